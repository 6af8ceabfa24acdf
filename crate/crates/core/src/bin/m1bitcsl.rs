use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use m1bitcsl::analysis::{lambda_numeric, lemma1_check, metrics, nnz};
use m1bitcsl::config::RunConfig;
use m1bitcsl::harness::{
    build_penalty, calibrate_nonconvex_params, read_long_csv, run_sweep, run_timing, save_sweep, select_nu,
    write_plot_series, write_timing_csv, Method, SweepAxis,
};
use m1bitcsl::prox::{Penalty, PenaltyKind};
use m1bitcsl::rng::{self, streams};
use m1bitcsl::solver::{solve_lasso, AdmmProblem, RecoveryResult, SolverConfig};
use m1bitcsl::synth::synthesize;
use m1bitcsl::{Error, GroundTruth, SaturatedDataset};
use nalgebra::DVector;

/// Sparse recovery from saturated compressive measurements.
#[derive(Parser, Debug)]
#[command(name = "m1bitcsl", version)]
struct Cli {
    /// TOML run configuration (experiment spec plus optional [sweep], [bench], [theory]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for trial-parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize one instance and write it (plus the true signal) to --out.
    Generate {
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Solve one stored dataset with one method and print metrics.
    Solve {
        /// Directory written by `generate`.
        #[arg(long)]
        data: PathBuf,
        /// LASSO, L1, L0, MCP or sL1.
        #[arg(long, default_value = "L1")]
        method: String,
        /// Penalty weight; chosen by cross-validation (and nnz matching for
        /// nonconvex penalties) when omitted.
        #[arg(long)]
        nu: Option<f64>,
        /// True signal for metrics (default: <data>/x_bar.csv if present).
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Write the per-iteration residual trace to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a sweep over saturation ratio, M or K and write CSV results.
    Sweep {
        /// saturation_ratio, m or k (overrides the config's [sweep]).
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// File name stem for the CSV files.
        #[arg(long, default_value = "sweep")]
        name: String,
    },
    /// Time every method over (M, N) cells on one thread.
    Bench,
    /// Compare the lambda quadrature with Monte Carlo estimates.
    Theory,
    /// Turn a long-format sweep CSV into two-column series files.
    Plot {
        #[arg(long)]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) => 2,
        Error::Divergence { .. } => 3,
        _ => 1,
    }
}

fn load_config(cli: &Cli) -> m1bitcsl::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.spec.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> m1bitcsl::Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?;
    }
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Generate { trial } => generate(&cfg, *trial, &cli.out),
        Command::Solve { data, method, nu, truth, trace } => {
            solve(&cfg, data, method, *nu, truth.as_deref(), trace.as_deref())
        }
        Command::Sweep { axis, values, name } => sweep(&cfg, axis.as_deref(), values.clone(), name, &cli.out),
        Command::Bench => bench(&cfg, &cli.out),
        Command::Theory => theory(&cfg),
        Command::Plot { input } => plot(input, &cli.out),
    }
}

fn generate(cfg: &RunConfig, trial: u64, out: &Path) -> m1bitcsl::Result<()> {
    let (truth, ds) = synthesize(&cfg.spec, trial)?;
    fs::create_dir_all(out)?;
    ds.save(out)?;
    truth.save(&out.join("x_bar.csv"))?;
    println!(
        "wrote {}: N = {}, M1 = {}, M2 = {}, thresholds [{}, {}]",
        out.display(),
        ds.n(),
        ds.m1(),
        ds.m2(),
        ds.y_min(),
        ds.y_max()
    );
    Ok(())
}

fn solve(
    cfg: &RunConfig,
    data: &Path,
    method: &str,
    nu: Option<f64>,
    truth: Option<&Path>,
    trace: Option<&Path>,
) -> m1bitcsl::Result<()> {
    let method: Method = method.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
    let ds = SaturatedDataset::load(data)?;
    let spec = &cfg.spec;
    let solver = SolverConfig { trace: trace.is_some() || spec.solver.trace, ..spec.solver.clone() };
    let cv_nu = match nu {
        Some(v) => v,
        None => select_nu(spec, &ds, 0)?,
    };

    let (label, result, used_nu) = match method {
        Method::Lasso => ("LASSO".to_string(), solve_lasso(ds.phi1(), ds.y1(), cv_nu, &solver)?, cv_nu),
        Method::Alg1(kind) => {
            let problem = AdmmProblem::from_dataset(&ds, solver.gamma, solver.rho)?;
            let l1 = Penalty::l1(cv_nu)?;
            let (penalty, result) = match (kind, nu) {
                (PenaltyKind::L1, _) => {
                    let r = solve_with_objective(&problem, &ds, &l1, &solver)?;
                    (l1, r)
                }
                (_, Some(v)) => {
                    let k_hat = nnz(&problem.solve(&l1, &solver, None)?.x_hat).max(1);
                    let p = build_penalty(kind, v, ds.n(), k_hat, spec.mcp_b, &spec.sl1_weights)?;
                    let r = solve_with_objective(&problem, &ds, &p, &solver)?;
                    (p, r)
                }
                (_, None) => {
                    let k_hat = nnz(&problem.solve(&l1, &solver, None)?.x_hat).max(1);
                    let start = build_penalty(kind, cv_nu, ds.n(), k_hat, spec.mcp_b, &spec.sl1_weights)?;
                    let cal = calibrate_nonconvex_params(&start, k_hat, &problem, &solver)?;
                    let r = solve_with_objective(&problem, &ds, &cal.penalty, &solver)?;
                    (cal.penalty, r)
                }
            };
            let nu = penalty.nu();
            (method.label(), result, nu)
        }
    };

    println!("method      {label}");
    println!("nu          {used_nu:.6e}");
    println!("iterations  {}", result.iterations);
    println!("converged   {}", result.converged);
    println!("wall_time   {:.4}s", result.wall_time);
    println!("nnz         {}", nnz(&result.x_hat));
    let truth_path = truth.map(Path::to_path_buf).unwrap_or_else(|| data.join("x_bar.csv"));
    if truth_path.exists() {
        let truth = GroundTruth::load(&truth_path)?;
        let m = metrics(&truth.x_bar, &result.x_hat)?;
        println!("snr_db      {:.4}", m.snr_db);
        println!("angular     {:.6}", m.angular_error);
        println!("l2_error    {:.6}", m.l2_error);
    }
    if let Some(path) = trace {
        result.save_trace(path)?;
    }
    Ok(())
}

fn solve_with_objective(
    problem: &AdmmProblem,
    ds: &SaturatedDataset,
    penalty: &Penalty,
    solver: &SolverConfig,
) -> m1bitcsl::Result<RecoveryResult> {
    let obj = |x: &DVector<f64>| m1bitcsl::solver::objective(ds, penalty, solver.gamma, x);
    problem.solve(penalty, solver, Some(&obj))
}

fn sweep(
    cfg: &RunConfig,
    axis: Option<&str>,
    values: Option<Vec<f64>>,
    name: &str,
    out: &Path,
) -> m1bitcsl::Result<()> {
    let (axis, values) = match (axis, values, &cfg.sweep) {
        (Some(a), Some(v), _) => (a.parse::<SweepAxis>().map_err(|e| Error::Config(e.to_string()))?, v),
        (None, None, Some(s)) => (s.axis, s.values.clone()),
        (a, v, Some(s)) => (
            match a {
                Some(a) => a.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
                None => s.axis,
            },
            v.unwrap_or_else(|| s.values.clone()),
        ),
        _ => return Err(Error::Config("sweep needs --axis and --values or a [sweep] table".into())),
    };
    for v in &values {
        axis.apply(&cfg.spec, *v).map_err(|e| Error::Config(e.to_string()))?;
    }
    let result = run_sweep(&cfg.spec, axis, &values)?;
    let (long, summary) = save_sweep(&result, out, name)?;
    println!("{:>18} {:>10} {:>9} {:>9} {:>8} {:>7}", axis.name(), "method", "snr_db", "angular", "time_s", "flagged");
    for c in &result.cells {
        println!(
            "{:>18} {:>10} {:>9.3} {:>9.4} {:>8.4} {:>7}",
            c.axis_value,
            c.method.label(),
            c.snr_db.mean,
            c.angular_error.mean,
            c.wall_time.mean,
            c.flagged
        );
    }
    println!("wrote {} and {}", long.display(), summary.display());
    Ok(())
}

fn bench(cfg: &RunConfig, out: &Path) -> m1bitcsl::Result<()> {
    let rows = run_timing(&cfg.spec, &cfg.bench.cells, cfg.bench.repeats)?;
    fs::create_dir_all(out)?;
    let path = out.join("timing.csv");
    write_timing_csv(&rows, fs::File::create(&path)?)?;
    println!("{:>6} {:>6} {:>10} {:>10} {:>8}", "M", "N", "method", "time_s", "iters");
    for r in &rows {
        println!("{:>6} {:>6} {:>10} {:>10.4} {:>8.1}", r.m, r.n, r.method.label(), r.mean_time, r.mean_iterations);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn theory(cfg: &RunConfig) -> m1bitcsl::Result<()> {
    let th = &cfg.theory;
    let x = DVector::from_element(th.dim, 1.0 / (th.dim as f64).sqrt());
    println!("{:>6} {:>12} {:>12} {:>10} {:>14}", "T", "lambda_quad", "lambda_mc", "std_err", "max_deviation");
    for (i, &t) in th.thresholds.iter().enumerate() {
        let quad = lambda_numeric(t)?;
        let mut r = rng::stream(cfg.spec.seed, i as u64, streams::LAMBDA);
        let check = lemma1_check(t, &x, th.samples, &mut r)?;
        println!(
            "{t:>6.3} {quad:>12.6} {:>12.6} {:>10.6} {:>14.6}",
            check.estimate.lambda_hat, check.estimate.std_err, check.max_deviation
        );
    }
    Ok(())
}

fn plot(input: &Path, out: &Path) -> m1bitcsl::Result<()> {
    let rows = read_long_csv(fs::File::open(input)?)?;
    let paths = write_plot_series(&rows, out)?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}
