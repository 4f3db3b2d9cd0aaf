//! Instance files, the benchmark generator and JSON solution files.
//!
//! Native instance layout (whitespace separated, `#` starts a comment):
//!
//! ```text
//! # name: toy
//! n m p scale
//! p_1 ... p_n
//! r_11 ... r_1m
//! ...
//! r_n1 ... r_nm
//! coords            (optional)
//! x y               (n job lines, then m location lines)
//! ```
//!
//! Release dates may be written with decimals when `scale` is 1. They are
//! then truncated to two decimals and every time in the instance is
//! multiplied by 100, so the stored instance has `scale == 100`.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{evaluate, Bounds, Coordinates, Instance, InstanceError, Solution, SolutionError, Time};

/// Factor applied to instances whose release dates carry decimals.
pub const DECIMAL_SCALE: u32 = 100;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("solution file: {0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io { path: path.display().to_string(), source }
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

/// A numeric token kept in exact decimal form: `units + hundredths / 100`,
/// truncated to two decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Decimal {
    hundredths: i64,
    fractional: bool,
}

fn parse_decimal(token: &str, line: usize) -> Result<Decimal, IoError> {
    let bad = || parse_err(line, format!("invalid number {token:?}"));
    let (neg, body) = match token.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, token.strip_prefix('+').unwrap_or(token)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    if int_part.is_empty() && frac_part.is_none_or(str::is_empty) {
        return Err(bad());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let units: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
    let mut hundredths = units.checked_mul(100).ok_or_else(bad)?;
    let mut fractional = false;
    if let Some(frac) = frac_part {
        if !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: Vec<i64> = frac.bytes().map(|b| (b - b'0') as i64).collect();
        fractional = digits.iter().any(|&d| d != 0);
        hundredths += digits.first().copied().unwrap_or(0) * 10 + digits.get(1).copied().unwrap_or(0);
    }
    if neg {
        hundredths = -hundredths;
    }
    Ok(Decimal { hundredths, fractional })
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("");
            items.extend(content.split_whitespace().map(|t| (i + 1, t)));
        }
        Self { items, pos: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), IoError> {
        let last_line = self.items.last().map_or(1, |t| t.0);
        let tok = self
            .items
            .get(self.pos)
            .copied()
            .ok_or_else(|| parse_err(last_line, format!("unexpected end of file, expected {what}")))?;
        self.pos += 1;
        Ok(tok)
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|t| t.1)
    }

    fn count(&mut self, what: &str) -> Result<usize, IoError> {
        let (line, tok) = self.next(what)?;
        tok.parse().map_err(|_| parse_err(line, format!("expected {what}, found {tok:?}")))
    }

    fn integer(&mut self, what: &str) -> Result<i64, IoError> {
        let (line, tok) = self.next(what)?;
        tok.parse().map_err(|_| parse_err(line, format!("expected integer {what}, found {tok:?}")))
    }

    fn decimal(&mut self, what: &str) -> Result<(usize, Decimal), IoError> {
        let (line, tok) = self.next(what)?;
        Ok((line, parse_decimal(tok, line)?))
    }

    fn remaining(&self) -> usize {
        self.items.len() - self.pos
    }
}

fn name_from_comment(text: &str) -> Option<String> {
    text.lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|l| l.trim().strip_prefix("name:").map(|n| n.trim().to_string()))
}

/// Converts processing times and release dates, rescaling by
/// [`DECIMAL_SCALE`] when any release carries decimals.
fn scale_times(
    proc: Vec<(usize, Decimal)>,
    release: Vec<Vec<(usize, Decimal)>>,
    mut scale: u32,
) -> Result<(Vec<Time>, Vec<Vec<Time>>, u32), IoError> {
    if let Some(&(line, _)) = proc.iter().find(|(_, d)| d.fractional) {
        return Err(parse_err(line, "processing times must be integers"));
    }
    let fractional = release.iter().flatten().find(|(_, d)| d.fractional);
    let rescale = match fractional {
        Some(&(line, _)) if scale != 1 => {
            return Err(parse_err(line, format!("decimal release date in a file already scaled by {scale}")));
        }
        Some(_) => {
            scale = DECIMAL_SCALE;
            true
        }
        None => false,
    };
    // DECIMAL_SCALE is 100, so the hundredths count is the rescaled value.
    let convert = |d: Decimal| if rescale { d.hundredths } else { d.hundredths / 100 };
    let proc = proc.into_iter().map(|(_, d)| convert(d)).collect();
    let release = release.into_iter().map(|row| row.into_iter().map(|(_, d)| convert(d)).collect()).collect();
    Ok((proc, release, scale))
}

/// Parses the native text format.
pub fn parse_instance(text: &str, default_name: &str) -> Result<Instance, IoError> {
    let name = name_from_comment(text).unwrap_or_else(|| default_name.to_string());
    let mut tok = Tokens::new(text);
    let n = tok.count("job count n")?;
    let m = tok.count("location count m")?;
    let p = tok.count("machine count p")?;
    let (scale_line, scale_tok) = tok.next("scale")?;
    let scale: u32 = scale_tok
        .parse()
        .map_err(|_| parse_err(scale_line, format!("expected scale, found {scale_tok:?}")))?;
    let proc = (0..n).map(|_| tok.decimal("processing time")).collect::<Result<Vec<_>, _>>()?;
    let release = (0..n)
        .map(|_| (0..m).map(|_| tok.decimal("release date")).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let (proc, release, scale) = scale_times(proc, release, scale)?;

    let mut coords = None;
    if tok.peek() == Some("coords") {
        tok.next("coords")?;
        let mut read = |count: usize| -> Result<Vec<(i64, i64)>, IoError> {
            (0..count).map(|_| Ok((tok.integer("x coordinate")?, tok.integer("y coordinate")?))).collect()
        };
        let jobs = read(n)?;
        let locations = read(m)?;
        coords = Some(Coordinates { jobs, locations });
    }
    if let Some((line, extra)) = tok.items.get(tok.pos) {
        return Err(parse_err(*line, format!("unexpected trailing token {extra:?}")));
    }
    let instance = Instance::new(name, p, proc, release, scale)?;
    Ok(match coords {
        Some(c) => instance.with_coordinates(c)?,
        None => instance,
    })
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn read_instance(path: &Path) -> Result<Instance, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_instance(&text, &file_stem(path))
}

pub fn format_instance(instance: &Instance) -> String {
    let mut out = String::new();
    if !instance.name().is_empty() {
        out.push_str(&format!("# name: {}\n", instance.name()));
    }
    out.push_str(&format!("{} {} {} {}\n", instance.n(), instance.m(), instance.p(), instance.scale()));
    let join = |v: &[Time]| v.iter().map(Time::to_string).collect::<Vec<_>>().join(" ");
    out.push_str(&join(instance.processing_times()));
    out.push('\n');
    for j in 0..instance.n() {
        out.push_str(&join(instance.release_row(j)));
        out.push('\n');
    }
    if let Some(c) = instance.coordinates() {
        out.push_str("coords\n");
        for (x, y) in c.jobs.iter().chain(&c.locations) {
            out.push_str(&format!("{x} {y}\n"));
        }
    }
    out
}

pub fn write_instance(instance: &Instance, path: &Path) -> Result<(), IoError> {
    fs::write(path, format_instance(instance)).map_err(|e| io_err(path, e))
}

/// Best-effort reader for whitespace-separated benchmark files laid out as
/// `n m p`, then `n` processing times, then the `n x m` release matrix
/// (job-major). Anything else is reported as a parse error.
#[cfg(feature = "literature")]
pub fn parse_literature(text: &str, name: &str) -> Result<Instance, IoError> {
    let mut tok = Tokens::new(text);
    let n = tok.count("job count n")?;
    let m = tok.count("location count m")?;
    let p = tok.count("machine count p")?;
    let expected = n
        .checked_mul(m)
        .and_then(|nm| nm.checked_add(n))
        .ok_or_else(|| parse_err(1, "dimensions overflow"))?;
    if tok.remaining() != expected {
        return Err(parse_err(
            1,
            format!("expected {expected} numbers after the header for n={n}, m={m}, found {}", tok.remaining()),
        ));
    }
    let proc = (0..n).map(|_| tok.decimal("processing time")).collect::<Result<Vec<_>, _>>()?;
    let release = (0..n)
        .map(|_| (0..m).map(|_| tok.decimal("release date")).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let (proc, release, scale) = scale_times(proc, release, 1)?;
    Ok(Instance::new(name, p, proc, release, scale)?)
}

#[cfg(feature = "literature")]
pub fn read_literature(path: &Path) -> Result<Instance, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_literature(&text, &file_stem(path))
}

/// Reads a native file, falling back to the literature layout when the native
/// parse fails and the feature is enabled.
pub fn read_any(path: &Path) -> Result<Instance, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let native = parse_instance(&text, &file_stem(path));
    #[cfg(feature = "literature")]
    if let Err(IoError::Parse { .. }) = &native {
        if let Ok(inst) = parse_literature(&text, &file_stem(path)) {
            return Ok(inst);
        }
    }
    native
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("generator needs p < m < n, got n={n}, m={m}, p={p}")]
pub struct GeneratorError {
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

/// Random instance on an `n x n` grid.
///
/// Jobs and locations get integer coordinates uniform in `[0, n]`, processing
/// times are uniform in `[max(1, n/10), n/2]` and release dates are the
/// truncated Euclidean distances.
pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance, GeneratorError> {
    let GeneratorConfig { n, m, p, seed } = *config;
    if !(p >= 1 && p < m && m < n) {
        return Err(GeneratorError { n, m, p });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = n as i64;
    let point = |rng: &mut ChaCha8Rng| (rng.gen_range(0..=side), rng.gen_range(0..=side));
    let jobs: Vec<(i64, i64)> = (0..n).map(|_| point(&mut rng)).collect();
    let locations: Vec<(i64, i64)> = (0..m).map(|_| point(&mut rng)).collect();
    let lo = (n as Time / 10).max(1);
    let hi = n as Time / 2;
    let proc: Vec<Time> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    let release: Vec<Vec<Time>> = jobs
        .iter()
        .map(|&a| locations.iter().map(|&b| floor_distance(a, b)).collect())
        .collect();
    let name = format!("gen_n{n}_m{m}_p{p}_s{seed}");
    let instance = Instance::new(name, p, proc, release, 1).expect("generated data is valid");
    Ok(instance
        .with_coordinates(Coordinates { jobs, locations })
        .expect("coordinate table sized to the instance"))
}

/// `floor(sqrt(dx^2 + dy^2))` computed exactly on integers.
pub fn floor_distance(a: (i64, i64), b: (i64, i64)) -> Time {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    let sq = (dx * dx + dy * dy) as u64;
    let mut r = (sq as f64).sqrt() as u64;
    while r * r > sq {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= sq {
        r += 1;
    }
    r as Time
}

/// Solver metadata stored alongside a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveMetadata {
    /// Pipeline stage that produced the final bounds.
    pub stage: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub instance: String,
    pub solution: Solution,
    pub bounds: Bounds,
    pub metadata: SolveMetadata,
}

impl SolutionFile {
    fn check_schema(&self) -> Result<(), IoError> {
        if self.solution.machines.is_empty() {
            return Err(IoError::Schema("solution opens no machine".into()));
        }
        if self.bounds.lb > self.bounds.ub {
            return Err(IoError::Schema(format!("lower bound {} exceeds upper bound {}", self.bounds.lb, self.bounds.ub)));
        }
        Ok(())
    }

    /// Checks the stored schedule against `instance`.
    pub fn validate(&self, instance: &Instance) -> Result<Time, SolutionError> {
        evaluate(&self.solution, instance)
    }
}

pub fn solution_to_json(file: &SolutionFile) -> Result<String, IoError> {
    file.check_schema()?;
    Ok(serde_json::to_string_pretty(file)?)
}

pub fn solution_from_json(text: &str) -> Result<SolutionFile, IoError> {
    let file: SolutionFile = serde_json::from_str(text)?;
    file.check_schema()?;
    Ok(file)
}

pub fn write_solution(file: &SolutionFile, path: &Path) -> Result<(), IoError> {
    let json = solution_to_json(file)?;
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(json.as_bytes()).and_then(|_| f.write_all(b"\n")).map_err(|e| io_err(path, e))
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    solution_from_json(&text)
}
