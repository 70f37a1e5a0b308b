use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nonoverlap::bounds::corollary4_scaled_bound;
use nonoverlap::optimizer::{maximize_product_f_with, random_system, AscentOptions};
use nonoverlap::selfcheck::run_selfcheck;
use nonoverlap::svg::emit_svg;
use nonoverlap::{
    check_composition_bounds, corollary1_bound, corollary2_bound, corollary3_bound, exclusion_check,
    extremal_config, inner_radius, random_disk_config, theorem1_bound, trace_trajectories,
    verify_inequality, DomainGeometry, QdParams, WosConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bounds, certification runs and extremal configurations for products of
/// inner radii of non-overlapping domains.
#[derive(Debug, Parser)]
#[command(name = "nonoverlap", version)]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// CSV table of the closed-form bounds at equal gaps.
    Bounds(BoundsArgs),
    /// Certify the product bound on random disk configurations.
    Verify(VerifyArgs),
    /// Maximize ∏F(α_k) on the simplex; the ascent trace is written as CSV.
    Optimize(OptimizeArgs),
    /// Circular domains of the extremal quadratic differential.
    Extremal(ExtremalArgs),
    /// Inner radii of domains read from a JSON file.
    Radius(RadiusArgs),
    /// Composition inequalities under the separating transformation.
    Composition(CompositionArgs),
    /// Quick invariant suite; exits with 3 on any failure.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Point counts.
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4, 5, 6, 7, 8, 9, 10])]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.25, 0.5, 0.75, 1.0])]
    gamma: Vec<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Full JSON report; a one-line summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Stopping tolerance on the projected gradient norm.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trace CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtremalArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Scale R of the points R·e^{2πik/n}.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Largest trace step; 1e-3·R when absent.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Domains as a JSON array readable by `radius`.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Walks per domain for the product check; 0 skips it.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct RadiusArgs {
    /// A domain or an array of domains in JSON.
    domains: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompositionArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Random disk configurations; ignored with --extremal.
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Check the extremal configuration instead of random disks.
    #[arg(long)]
    extremal: bool,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest trace step for --extremal.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Also report the pairing with both images from the same sector.
    #[arg(long)]
    verbose: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelfcheckArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

/// A certified inequality or invariant failed.
#[derive(Debug)]
struct InvariantViolation(String);

impl std::fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invariant violated: {}", self.0)
    }
}

impl std::error::Error for InvariantViolation {}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn bounds(args: &BoundsArgs) -> Result<()> {
    let mut csv = String::from("n,gamma,alphas,theorem1,corollary1,corollary2,corollary3,corollary4,consistency\n");
    for &n in &args.n {
        for &g in &args.gamma {
            let eq = vec![2.0 / n as f64; n];
            let theorem = theorem1_bound(n, g, &eq)?;
            let c1 = corollary1_bound(n, g)?;
            let c2 = corollary2_bound(n, g, &eq)?;
            let c3 = if g <= 0.2 {
                corollary3_bound(n, g, &eq)?.to_string()
            } else {
                String::new()
            };
            let c4 = corollary4_scaled_bound(n, g, 1.0)?;
            let alphas = eq.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
            let consistency = (theorem - c1).abs() / c1;
            writeln!(csv, "{n},{g},{alphas},{theorem},{c1},{c2},{c3},{c4},{consistency}")?;
        }
    }
    write_output(args.out.as_deref(), &csv)
}

fn verify(args: &VerifyArgs) -> Result<()> {
    let v = verify_inequality(args.n, args.gamma, args.trials, args.seed)?;
    if let Some(p) = &args.out {
        write_output(Some(p), &(serde_json::to_string_pretty(&v)? + "\n"))?;
    }
    println!(
        "n={} gamma={} trials={} seed={} max_ratio={} violations={}",
        v.n, v.gamma, v.trials, v.seed, v.max_ratio, v.violations
    );
    if v.violations > 0 {
        return Err(InvariantViolation(format!("{} trials exceed the bound", v.violations)).into());
    }
    Ok(())
}

fn optimize(args: &OptimizeArgs) -> Result<()> {
    let opts = AscentOptions {
        tol: args.tol,
        ..AscentOptions::default()
    };
    let o = maximize_product_f_with(args.n, args.seed, &opts)?;
    let mut csv = String::from("iteration,objective,gradient_norm,step\n");
    for t in &o.trace {
        writeln!(csv, "{},{},{},{}", t.iteration, t.objective, t.gradient_norm, t.step)?;
    }
    write_output(args.out.as_deref(), &csv)?;
    let verdict = exclusion_check(&o.best)?;
    eprintln!(
        "best alphas {:?}, objective {}, distance to equal gaps {:e}, multistart spread {:e}, {:?}",
        o.best.alphas(),
        o.objective,
        o.best.distance_to_equal(),
        o.spread(),
        verdict
    );
    if !verdict.survives() {
        return Err(InvariantViolation("the optimum has a gap above 1".into()).into());
    }
    Ok(())
}

fn extremal(args: &ExtremalArgs) -> Result<()> {
    let params = QdParams::new(args.n, args.gamma, args.r)?;
    let step = args.step.unwrap_or(1e-3 * args.r);
    let cfg = extremal_config(&params, step)?;
    if let Some(p) = &args.json {
        write_output(Some(p), &(serde_json::to_string_pretty(&cfg.domains)? + "\n"))?;
    }
    if let Some(p) = &args.svg {
        let field = trace_trajectories(&params, step, 1e4 * step)?;
        emit_svg(&field, p)?;
    }
    println!(
        "n={} gamma={} R={} domains={} axis_crossing={}",
        args.n,
        args.gamma,
        args.r,
        cfg.domains.len(),
        cfg.axis_crossing
    );
    if args.samples > 0 {
        let mut log_j = 0.0;
        let mut var = 0.0;
        for (i, d) in cfg.domains.iter().enumerate() {
            let e = inner_radius(d, &WosConfig::with_samples(args.samples, args.seed).reseeded(i as u64))?;
            let weight = if i == 0 { args.gamma } else { 1.0 };
            log_j += weight * e.value.ln();
            var += (weight * e.log_std_error()).powi(2);
            println!("domain {i}: r = {} ± {}", e.value, e.std_error);
        }
        let bound = corollary4_scaled_bound(args.n, args.gamma, args.r.powf(args.n as f64 + args.gamma))?;
        println!("J = {}, bound = {}, ratio = {} ± {}", log_j.exp(), bound, log_j.exp() / bound, var.sqrt());
    }
    Ok(())
}

fn radius(args: &RadiusArgs) -> Result<()> {
    let text = fs::read_to_string(&args.domains).with_context(|| format!("reading {}", args.domains.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let domains: Vec<DomainGeometry> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    };
    let estimates = domains
        .iter()
        .enumerate()
        .map(|(i, d)| inner_radius(d, &WosConfig::with_samples(args.samples, args.seed).reseeded(i as u64)))
        .collect::<nonoverlap::Result<Vec<_>>>()?;
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&estimates)? + "\n"))
}

fn composition(args: &CompositionArgs) -> Result<()> {
    let wos = WosConfig::with_samples(args.samples, args.seed);
    let reports = if args.extremal {
        let cfg = extremal_config(&QdParams::unit(args.n, args.gamma)?, args.step)?;
        vec![check_composition_bounds(&cfg.system, &cfg.domains, &wos, args.verbose)?]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        (0..args.trials as u64)
            .map(|t| {
                let system = random_system(args.n, &mut rng)?;
                let domains = random_disk_config(&system, args.seed.wrapping_add(t))?;
                check_composition_bounds(&system, &domains, &wos.reseeded(t), args.verbose)
            })
            .collect::<nonoverlap::Result<Vec<_>>>()?
    };
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&reports)? + "\n"))?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(InvariantViolation(format!("{failed} configurations violate a composition inequality")).into());
    }
    Ok(())
}

fn selfcheck(args: &SelfcheckArgs) -> Result<()> {
    let report = run_selfcheck(args.seed);
    for c in &report.checks {
        println!("{:<22} {}  {}", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail);
    }
    if !report.passed() {
        return Err(InvariantViolation("selfcheck".into()).into());
    }
    Ok(())
}

/// 1 for bad input, 2 for numerical failure, 3 for a violated invariant.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InvariantViolation>().is_some() {
        return 3;
    }
    match err.downcast_ref::<nonoverlap::Error>() {
        Some(nonoverlap::Error::Numerical(_) | nonoverlap::Error::Singular(_)) => 2,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Bounds(a) => bounds(a),
        Command::Verify(a) => verify(a),
        Command::Optimize(a) => optimize(a),
        Command::Extremal(a) => extremal(a),
        Command::Radius(a) => radius(a),
        Command::Composition(a) => composition(a),
        Command::Selfcheck(a) => selfcheck(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
