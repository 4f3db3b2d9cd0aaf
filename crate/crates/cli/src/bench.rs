//! Batch runs over a directory of instances and the result tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Result;
use log::warn;
use serde::Serialize;

use scheloc::framework::{FrameworkResult, Stage};
use scheloc::Instance;

/// Upper edges of the `N/p` buckets; anything above the last one is `>50`.
const EDGES: [usize; 11] = [0, 1, 2, 3, 4, 5, 10, 15, 20, 25, 50];

/// Stages that can close an instance, in pipeline order.
const CLOSING: [Stage; 5] = [Stage::Ils, Stage::Cg, Stage::AfCg, Stage::AfSubsetM, Stage::Full];

/// Index of the `N/p` bucket, compared exactly on integers.
pub fn bucket_index(n: usize, p: usize) -> usize {
    EDGES
        .windows(2)
        .position(|w| n > w[0] * p && n <= w[1] * p)
        .unwrap_or(EDGES.len() - 1)
}

pub fn bucket_label(index: usize) -> String {
    match EDGES.get(index + 1) {
        Some(&hi) => format!("({}, {}]", EDGES[index], hi),
        None => format!(">{}", EDGES[EDGES.len() - 1]),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub set: String,
    pub ratio_bucket: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub lb: i64,
    pub ub: i64,
    pub gap_pct: f64,
    pub stage_closed: String,
    pub time_s: f64,
    #[serde(skip)]
    bucket: usize,
}

impl BenchRow {
    pub fn new(set: &str, instance: &Instance, result: &FrameworkResult) -> Self {
        let bucket = bucket_index(instance.n(), instance.p());
        Self {
            set: set.to_string(),
            ratio_bucket: bucket_label(bucket),
            n: instance.n(),
            m: instance.m(),
            p: instance.p(),
            lb: result.bounds.lb,
            ub: result.bounds.ub,
            gap_pct: result.bounds.gap_pct().unwrap_or(f64::NAN),
            stage_closed: result.closed_by.map_or_else(|| "-".to_string(), |s| s.to_string()),
            time_s: result.wall_time_s,
            bucket,
        }
    }
}

/// Instance files directly in `dir` (set named after `dir`) and one level
/// below (set named after the subdirectory), sorted by path.
pub fn collect_instances(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let top = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| ".".into());
    let mut out = Vec::new();
    for entry in sorted_entries(dir)? {
        if entry.is_dir() {
            let set = entry.file_name().unwrap_or_default().to_string_lossy().into_owned();
            match sorted_entries(&entry) {
                Ok(files) => out.extend(files.into_iter().filter(|f| f.is_file()).map(|f| (set.clone(), f))),
                Err(e) => warn!("skipping {}: {e}", entry.display()),
            }
        } else if entry.is_file() {
            out.push((top.clone(), entry));
        }
    }
    Ok(out)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    v.retain(|p| !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')));
    v.sort();
    Ok(v)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["set", "ratio_bucket", "n", "m", "p", "lb", "ub", "gap_pct", "stage_closed", "time_s"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// One line per (set, bucket) with the number of instances closed by each
/// stage, the mean gap and the mean time.
pub fn write_markdown<W: Write>(rows: &[BenchRow], mut out: W) -> Result<()> {
    let mut header = String::from("| set | N/p | #inst. |");
    for s in CLOSING {
        header.push_str(&format!(" {s} |"));
    }
    header.push_str(" #opt. | gap (%) | avg. time (s) |");
    writeln!(out, "{header}")?;
    writeln!(out, "|{}", "---|".repeat(CLOSING.len() + 6))?;

    let mut groups: BTreeMap<(&str, usize), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.set.as_str(), r.bucket)).or_default().push(r);
    }
    for ((set, bucket), group) in groups {
        let count = group.len() as f64;
        let mut line = format!("| {set} | {} | {} |", bucket_label(bucket), group.len());
        let mut closed = 0;
        for s in CLOSING {
            let c = group.iter().filter(|r| r.stage_closed == s.name()).count();
            closed += c;
            line.push_str(&format!(" {c} |"));
        }
        let gap = group.iter().map(|r| r.gap_pct).sum::<f64>() / count;
        let time = group.iter().map(|r| r.time_s).sum::<f64>() / count;
        line.push_str(&format!(" {closed} | {gap:.2} | {time:.2} |"));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buckets_follow_table_edges() {
        assert_eq!(bucket_label(bucket_index(3, 3)), "(0, 1]");
        assert_eq!(bucket_label(bucket_index(4, 3)), "(1, 2]");
        assert_eq!(bucket_label(bucket_index(15, 3)), "(4, 5]");
        assert_eq!(bucket_label(bucket_index(16, 3)), "(5, 10]");
        assert_eq!(bucket_label(bucket_index(100, 2)), "(25, 50]");
        assert_eq!(bucket_label(bucket_index(101, 2)), ">50");
    }

    #[test]
    fn empty_tables() {
        let mut csv = Vec::new();
        write_csv(&[], &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1);
        let mut md = Vec::new();
        write_markdown(&[], &mut md).unwrap();
        assert_eq!(String::from_utf8(md).unwrap().lines().count(), 2);
    }
}
