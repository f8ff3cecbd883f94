use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use oaccel::profile::default_tau_grid;
use oaccel::solver::SolverSettings;
use oaccel::{LineSearchConfig, ProblemId, RotationKind, SolverKind};
use oaccel_bench::output::PROFILE_FILE;
use oaccel_bench::{
    emit_results, profile_from_records, read_records, run_experiment, write_profile, BenchError, ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "bench", about = "Run the solver benchmark matrix and compute performance profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment matrix and write records, profile and summary.
    Run(RunArgs),
    /// Recompute the profile from a records file.
    Profile {
        /// Directory holding records.csv.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_delimiter = ',', default_value = "A,B,C,D,E,F,G")]
    problems: Vec<ProblemId>,
    /// Sizes for every problem; defaults to each problem's standard sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_value = "oaccel-a,oaccel-b,ngmres-a,ngmres-b,lbfgs,ncg")]
    solvers: Vec<SolverKind>,
    #[arg(long, default_value_t = 100)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    wmax: usize,
    #[arg(long, default_value_t = 1e-12)]
    eps0: f64,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, default_value_t = 1e-4)]
    c1: f64,
    #[arg(long, default_value_t = 0.1)]
    c2: f64,
    #[arg(long, default_value_t = 1500)]
    max_iters: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
    /// Include the n = 50000 and 100000 sizes.
    #[arg(long)]
    large: bool,
    /// Distribution of Problem C's rotation: haar or uniform-qr.
    #[arg(long, default_value = "haar")]
    rotation: RotationKind,
}

impl RunArgs {
    fn config(self) -> ExperimentConfig {
        let ls = LineSearchConfig { c1: self.c1, c2: self.c2, ..LineSearchConfig::default() };
        ExperimentConfig {
            problems: self.problems,
            sizes: self.sizes,
            solvers: self.solvers,
            runs: self.runs,
            seed: self.seed,
            settings: SolverSettings { w_max: self.wmax, eps0: self.eps0, delta: self.delta, ls, ..Default::default() },
            max_iters: self.max_iters,
            tol: self.tol,
            large: self.large,
            rotation: self.rotation,
            keep_traces: false,
        }
    }
}

fn run(args: RunArgs) -> Result<(), BenchError> {
    let out = args.out.clone();
    let cfg = args.config();
    let started = Instant::now();
    let outcome = run_experiment(&cfg)?;
    let profile = emit_results(&out, &cfg, &outcome)?;

    let mut groups: Vec<(String, Vec<Option<u64>>)> = Vec::new();
    for r in &outcome.records {
        let key = format!("{} n={} {}", r.problem, r.n, r.solver);
        match groups.last_mut() {
            Some((k, v)) if *k == key => v.push(r.t()),
            _ => groups.push((key, vec![r.t()])),
        }
    }
    for (key, t) in groups {
        let v: Vec<f64> = t.iter().map(|t| t.map_or(f64::INFINITY, |t| t as f64)).collect();
        let median = oaccel::profile::quantile(&v, 0.5)?;
        let median = if median.is_finite() { median.to_string() } else { "fail".to_string() };
        let solved = t.iter().flatten().count();
        println!("{key:<24} solved {solved:>5}/{:<5} median {median}", t.len());
    }
    if profile.dropped > 0 {
        eprintln!("warning: {} instances were solved by no solver and left out of the profile", profile.dropped);
    }
    println!(
        "{} runs in {:.1} s, results in {}",
        outcome.records.len(),
        started.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}

fn profile(input: PathBuf, out: PathBuf) -> Result<(), BenchError> {
    let path = if input.is_dir() { input.join(oaccel_bench::output::RECORDS_FILE) } else { input };
    let records = read_records(&path)?;
    let report = profile_from_records(&records, &default_tau_grid());
    if report.dropped > 0 {
        eprintln!("warning: {} instances were solved by no solver and left out of the profile", report.dropped);
    }
    let out = if out.is_dir() { out.join(PROFILE_FILE) } else { out };
    write_profile(&out, &report.curves)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Profile { input, out } => profile(input, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
