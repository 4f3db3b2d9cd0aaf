mod bench;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use scheloc::framework::{run_framework_with, run_stage, FrameworkConfig, FrameworkResult, Stage};
use scheloc::io::{self as sio, GeneratorConfig, SolutionFile, SolveMetadata};
use scheloc::lpsolve::SimplexSolver;
use scheloc::oracle::{self, DEFAULT_CAP};
use scheloc::par::*;
use scheloc::Instance;

use bench::BenchRow;

#[derive(Parser)]
#[command(name = "scheloc", version, about = "Parallel machine scheduling-location solver")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "SCHELOC_THREADS", default_value_t = 0)]
    threads: usize,
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StageArg {
    Ils,
    Cg,
    Afcg,
    Afsubsetm,
    Full,
    Framework,
}

impl StageArg {
    fn stage(self) -> Option<Stage> {
        match self {
            StageArg::Ils => Some(Stage::Ils),
            StageArg::Cg => Some(Stage::Cg),
            StageArg::Afcg => Some(Stage::AfCg),
            StageArg::Afsubsetm => Some(Stage::AfSubsetM),
            StageArg::Full => Some(Stage::Full),
            StageArg::Framework => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Md,
}

#[derive(clap::Args, Clone)]
struct SolveArgs {
    /// Time limit in seconds for each MIP stage.
    #[arg(long, default_value_t = 300.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// ILS starts.
    #[arg(long, default_value_t = 10)]
    starts: usize,
    /// Non-improving ILS rounds that end a start.
    #[arg(long, default_value_t = 100)]
    rounds: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "framework")]
        stage: StageArg,
        #[command(flatten)]
        args: SolveArgs,
        /// Write the solution as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run each heuristic on its own and compare.
    Heuristics {
        instance: PathBuf,
        #[command(flatten)]
        args: SolveArgs,
    },
    /// Write a random instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustive optimum of a tiny instance.
    Oracle {
        instance: PathBuf,
        /// Largest search space C(m,p) * p^n accepted.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: f64,
    },
    /// Solve every instance in a directory and print a table.
    Bench {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
        #[command(flatten)]
        args: SolveArgs,
    },
    /// Summarise a solution file, checking it against an instance if given.
    Report {
        solution: PathBuf,
        #[arg(long)]
        instance: Option<PathBuf>,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Input(anyhow::Error),
    Solve(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
            Failure::Solve(_) => 4,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Input(e) | Failure::Solve(e) => e,
        }
    }
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn config(args: &SolveArgs) -> Result<FrameworkConfig, Failure> {
    if !(args.time_limit >= 0.0 && args.time_limit.is_finite()) {
        return Err(Failure::Usage(anyhow!("time limit must be a non-negative number of seconds")));
    }
    let mut cfg = FrameworkConfig::default().with_mip_time_limit(Duration::from_secs_f64(args.time_limit));
    cfg.ils.seed = args.seed;
    cfg.ils.n_iter = args.starts.max(1);
    cfg.ils.n_ils = args.rounds;
    Ok(cfg)
}

fn solve_one(instance: &Instance, stage: Option<Stage>, cfg: &FrameworkConfig) -> FrameworkResult {
    let solver = SimplexSolver::default();
    match stage {
        Some(s) => run_stage(instance, s, cfg, &solver),
        None => run_framework_with(instance, cfg, &solver),
    }
}

fn print_result(out: &mut impl Write, instance: &Instance, res: &FrameworkResult) -> io::Result<()> {
    writeln!(out, "instance {}  n={} m={} p={}", instance.name(), instance.n(), instance.m(), instance.p())?;
    writeln!(out, "{:<10} {:>18} {:>18} {:>9}", "stage", "entry", "exit", "time_s")?;
    for r in &res.reports {
        let entry = bounds_text(r.entry);
        let exit = bounds_text(r.exit);
        writeln!(out, "{:<10} {entry:>18} {exit:>18} {:>9.3}", r.stage.name(), r.wall_time_s)?;
    }
    if let Some(lp) = res.lp_bound {
        writeln!(out, "lp bound {lp:.6}")?;
    }
    writeln!(out, "makespan {}", res.solution.makespan)?;
    writeln!(out, "bounds {}", res.bounds)?;
    match res.bounds.gap_pct() {
        Some(g) => writeln!(out, "gap {g:.2}%")?,
        None => writeln!(out, "gap -")?,
    }
    writeln!(out, "opt {}", res.optimal)?;
    for m in &res.solution.machines {
        let jobs: Vec<String> = m.job_ids().map(|j| (j + 1).to_string()).collect();
        writeln!(out, "location {}: {}", m.location + 1, jobs.join(" "))?;
    }
    Ok(())
}

fn bounds_text(b: scheloc::Bounds) -> String {
    let ub = if b.ub == scheloc::Time::MAX { "inf".to_string() } else { b.ub.to_string() };
    format!("[{}, {ub}]", b.lb)
}

fn solution_file(instance: &Instance, res: &FrameworkResult, stage: &str) -> SolutionFile {
    SolutionFile {
        instance: instance.name().to_string(),
        solution: res.solution.clone(),
        bounds: res.bounds,
        metadata: SolveMetadata { stage: stage.to_string(), wall_time_s: res.wall_time_s },
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Solve { instance, stage, args, out } => {
            let cfg = config(&args)?;
            let inst = sio::read_any(&instance).map_err(input)?;
            let res = solve_one(&inst, stage.stage(), &cfg);
            print_result(&mut stdout, &inst, &res).map_err(input)?;
            if let Some(path) = out {
                let label = res.closed_by.or(stage.stage()).map_or("framework", |s| s.name());
                sio::write_solution(&solution_file(&inst, &res, label), &path).map_err(input)?;
                info!("wrote {}", path.display());
            }
        }
        Command::Heuristics { instance, args } => {
            let cfg = config(&args)?;
            let inst = sio::read_any(&instance).map_err(input)?;
            writeln!(stdout, "{:<10} {:>8} {:>8} {:>8} {:>9}", "heuristic", "lb", "ub", "gap_pct", "time_s").map_err(input)?;
            for stage in [Stage::Ils, Stage::AfCg, Stage::AfSubsetM] {
                let res = solve_one(&inst, Some(stage), &cfg);
                let gap = res.bounds.gap_pct().map_or("-".to_string(), |g| format!("{g:.2}"));
                writeln!(
                    stdout,
                    "{:<10} {:>8} {:>8} {gap:>8} {:>9.3}",
                    stage.name(),
                    res.bounds.lb,
                    res.bounds.ub,
                    res.wall_time_s
                )
                .map_err(input)?;
            }
        }
        Command::Generate { n, m, p, seed, out } => {
            let inst = sio::generate_instance(&GeneratorConfig { n, m, p, seed }).map_err(|e| Failure::Usage(e.into()))?;
            sio::write_instance(&inst, &out).map_err(input)?;
            writeln!(stdout, "wrote {} to {}", inst.name(), out.display()).map_err(input)?;
        }
        Command::Oracle { instance, cap } => {
            let inst = sio::read_any(&instance).map_err(input)?;
            let res = oracle::solve_exact(&inst, cap).map_err(|e| Failure::Solve(e.into()))?;
            writeln!(stdout, "makespan {}", res.makespan).map_err(input)?;
            writeln!(stdout, "nodes {}", res.nodes).map_err(input)?;
            for m in &res.solution.machines {
                let jobs: Vec<String> = m.job_ids().map(|j| (j + 1).to_string()).collect();
                writeln!(stdout, "location {}: {}", m.location + 1, jobs.join(" ")).map_err(input)?;
            }
        }
        Command::Bench { dir, format, args } => {
            let cfg = config(&args)?;
            let rows = bench_dir(&dir, &cfg)?;
            match format {
                Format::Csv => bench::write_csv(&rows, &mut stdout),
                Format::Md => bench::write_markdown(&rows, &mut stdout),
            }
            .map_err(Failure::Input)?;
        }
        Command::Report { solution, instance } => {
            let file = sio::read_solution(&solution).map_err(input)?;
            writeln!(stdout, "instance {}", file.instance).map_err(input)?;
            writeln!(stdout, "stage {}", file.metadata.stage).map_err(input)?;
            writeln!(stdout, "makespan {}", file.solution.makespan).map_err(input)?;
            writeln!(stdout, "bounds {}", file.bounds).map_err(input)?;
            writeln!(stdout, "opt {}", file.bounds.optimal()).map_err(input)?;
            if let Some(path) = instance {
                let inst = sio::read_any(&path).map_err(input)?;
                let value = file
                    .validate(&inst)
                    .with_context(|| format!("solution does not fit {}", path.display()))
                    .map_err(Failure::Solve)?;
                writeln!(stdout, "valid makespan {value}").map_err(input)?;
            }
        }
    }
    Ok(())
}

fn bench_dir(dir: &Path, cfg: &FrameworkConfig) -> Result<Vec<BenchRow>, Failure> {
    let files = bench::collect_instances(dir)
        .with_context(|| format!("cannot list {}", dir.display()))
        .map_err(Failure::Input)?;
    let rows: Vec<Option<BenchRow>> = files
        .par_iter()
        .map(|(set, path)| match sio::read_any(path) {
            Ok(inst) => {
                let res = solve_one(&inst, None, cfg);
                info!("{}: {} closed by {:?}", inst.name(), res.bounds, res.closed_by);
                Some(BenchRow::new(set, &inst, &res))
            }
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                None
            }
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn init_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            warn!("thread pool: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    if threads > 1 {
        warn!("built without the parallel feature; running on one thread");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    init_threads(cli.threads);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
