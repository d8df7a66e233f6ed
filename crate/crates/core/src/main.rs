//! Command-line driver for seeded zero-distribution experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dzeros::calculus::LimitFamily;
use dzeros::ensembles::{check_profile_fit, ensemble_diagnostics, make_log_coeffs, SamplerSpec};
use dzeros::experiments::{
    fixed_degree_convergence, resolve_ensemble, resolve_profile, resolve_target, run_trials,
    DerivativeRule, ExperimentConfig, ReportPaths, RescaleMode,
};
use dzeros::Result;

#[derive(Parser)]
#[command(
    name = "dzeros",
    about = "Monte Carlo and limit-law toolkit for zeros of repeated derivatives of random polynomials",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials and persist per-root CSV plus summary JSON.
    Simulate(SimulateArgs),
    /// Simulate and compare the pooled radial CDF against a target curve.
    Compare(SimulateArgs),
    /// Tabulate a limit radial CDF on a radius grid.
    Limit(LimitArgs),
    /// Check coefficient sequences against a profile and report diagnostics.
    CheckFit(CheckFitArgs),
    /// Fixed-remaining-degree convergence against the limit polynomial.
    FixedDegree(FixedDegreeArgs),
}

#[derive(Args)]
struct DerivativeArgs {
    /// Differentiation order N.
    #[arg(long = "Nn", conflicts_with_all = ["ratio", "fixed_m", "log_drop"])]
    order: Option<usize>,
    /// Order as a fraction of the degree: N = round(ratio * n).
    #[arg(long, conflicts_with_all = ["fixed_m", "log_drop"])]
    ratio: Option<f64>,
    /// Fixed remaining degree: N = n - m.
    #[arg(long = "fixed-m", conflicts_with = "log_drop")]
    fixed_m: Option<usize>,
    /// Counterexample scaling: N = n - floor(log n).
    #[arg(long = "log-drop")]
    log_drop: bool,
}

impl DerivativeArgs {
    fn rule(&self) -> DerivativeRule {
        if let Some(order) = self.order {
            DerivativeRule::Explicit { order }
        } else if let Some(ratio) = self.ratio {
            DerivativeRule::Ratio { ratio }
        } else if let Some(m) = self.fixed_m {
            DerivativeRule::FixedDegree { m }
        } else if self.log_drop {
            DerivativeRule::LogDrop
        } else {
            DerivativeRule::Explicit { order: 0 }
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// kac | elliptic | counterexample | profile:<file>
    #[arg(long)]
    ensemble: String,
    /// complex-gaussian | real-gaussian | uniform-unit-disk | rademacher | heavy-tail-log
    #[arg(long, default_value = "complex-gaussian")]
    dist: String,
    /// Degree of the undifferentiated polynomial.
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    derivative: DerivativeArgs,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// none | auto
    #[arg(long, default_value = "none")]
    rescale: String,
    /// Comparison curve (required for `compare`).
    #[arg(long)]
    target: Option<String>,
    /// Mass normalization for numeric-profile targets.
    #[arg(long = "mass-norm", default_value_t = 1.0)]
    mass_norm: f64,
    /// center:halfwidth annulus statistics (repeatable).
    #[arg(long = "annulus")]
    annuli: Vec<String>,
    /// Output directory for roots.csv and summary.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LimitArgs {
    /// Closed form (kac-unit-circle | kac-a:<a> | kac-rescaled |
    /// elliptic-rescaled) or numeric `profile:<kind>`.
    #[arg(long)]
    target: String,
    /// Radius grid lo:hi:step.
    #[arg(long, default_value = "0.01:3:0.01")]
    grid: String,
    #[arg(long = "mass-norm", default_value_t = 1.0)]
    mass_norm: f64,
    /// Output CSV path, or - for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct CheckFitArgs {
    /// kac | elliptic | counterexample | profile:<file>
    #[arg(long)]
    ensemble: String,
    /// Reference profile (kac | elliptic | kac-case2:<a> | kac-case3-rescaled
    /// | elliptic-rescaled | u_a:<base>:<a> | <table file>).
    #[arg(long)]
    profile: String,
    /// Comma-separated degrees.
    #[arg(long)]
    n: String,
    #[command(flatten)]
    derivative: DerivativeArgs,
}

#[derive(Args)]
struct FixedDegreeArgs {
    /// kac | elliptic
    #[arg(long)]
    kind: String,
    /// Remaining degree of the derivative.
    #[arg(long)]
    m: usize,
    /// Comma-separated degrees.
    #[arg(long)]
    n: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_usize_list(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| {
                dzeros::Error::InvalidParameter(format!("bad degree '{part}' in list"))
            })
        })
        .collect()
}

fn parse_grid(raw: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = raw.split(':').collect();
    let bad = || dzeros::Error::InvalidParameter(format!("bad grid '{raw}', expected lo:hi:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let step: f64 = parts[2].parse().map_err(|_| bad())?;
    if !(step > 0.0 && hi >= lo) {
        return Err(bad());
    }
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let r = lo + step * i as f64;
        if r > hi + step * 1e-9 {
            break;
        }
        grid.push(r);
        i += 1;
    }
    Ok(grid)
}

fn parse_annulus(raw: &str) -> Result<(f64, f64)> {
    let bad = || {
        dzeros::Error::InvalidParameter(format!("bad annulus '{raw}', expected center:halfwidth"))
    };
    let (c, w) = raw.split_once(':').ok_or_else(bad)?;
    Ok((c.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?))
}

fn build_config(args: &SimulateArgs, target_required: bool) -> Result<ExperimentConfig> {
    if target_required && args.target.is_none() {
        return Err(dzeros::Error::InvalidParameter(
            "compare needs --target".into(),
        ));
    }
    let mut cfg = ExperimentConfig::new(args.ensemble.clone(), args.n, args.trials, args.seed);
    cfg.sampler = SamplerSpec::parse(&args.dist)?;
    cfg.derivative = args.derivative.rule();
    cfg.rescale = match args.rescale.as_str() {
        "none" => RescaleMode::None,
        "auto" => RescaleMode::Auto,
        other => {
            return Err(dzeros::Error::InvalidParameter(format!(
                "unknown rescale mode '{other}'"
            )))
        }
    };
    cfg.target = args.target.clone();
    cfg.mass_norm = args.mass_norm;
    if !args.annuli.is_empty() {
        cfg.annuli = args
            .annuli
            .iter()
            .map(|raw| parse_annulus(raw))
            .collect::<Result<_>>()?;
    }
    Ok(cfg)
}

fn run_simulate(args: &SimulateArgs, target_required: bool) -> Result<u8> {
    let cfg = build_config(args, target_required)?;
    let report = run_trials(&cfg)?;
    let paths = ReportPaths::in_dir(&args.out);
    dzeros::experiments::write_report(&report, &paths)?;
    println!(
        "{} trials of {} (n = {}): {} roots pooled",
        report.root_counts.len(),
        cfg.ensemble,
        cfg.n,
        report.root_counts.iter().sum::<usize>()
    );
    if let Some(ks) = report.pooled_ks {
        println!(
            "pooled KS vs {}: {ks:.6}",
            cfg.target.as_deref().unwrap_or("?")
        );
    }
    println!(
        "angular Kuiper discrepancy: {:.6}",
        report.angular_discrepancy
    );
    for a in &report.annulus_fractions {
        println!(
            "mean mass with ||z|-{}| <= {}: {:.6}",
            a.center, a.halfwidth, a.mean_fraction
        );
    }
    println!(
        "wrote {} and {}",
        paths.roots_csv.display(),
        paths.summary_json.display()
    );
    if !report.failed_trials.is_empty() {
        eprintln!(
            "warning: {} trial(s) failed root finding: {:?}",
            report.failed_trials.len(),
            report.failed_trials
        );
        return Ok(2);
    }
    Ok(0)
}

fn run_limit(args: &LimitArgs) -> Result<u8> {
    let grid = parse_grid(&args.grid)?;
    let cdf = resolve_target(&args.target, args.mass_norm)?;
    let mut out = String::from("r,cdf\n");
    for r in grid {
        out.push_str(&format!("{r},{:.16e}\n", cdf.evaluate(r)));
    }
    if args.out == "-" {
        print!("{out}");
    } else {
        let path = PathBuf::from(&args.out);
        std::fs::write(&path, out).map_err(|source| dzeros::Error::Io { path, source })?;
        println!("wrote {}", args.out);
    }
    Ok(0)
}

fn run_check_fit(args: &CheckFitArgs) -> Result<u8> {
    let kind = resolve_ensemble(&args.ensemble)?;
    let profile = resolve_profile(&args.profile)?;
    let degrees = parse_usize_list(&args.n)?;
    let coeffs = degrees
        .iter()
        .map(|&n| make_log_coeffs(&kind, n))
        .collect::<Result<Vec<_>>>()?;
    let l_n: Vec<usize> = degrees.clone();
    let delta_n = vec![0.0; degrees.len()];
    let sups = check_profile_fit(&coeffs, &profile, &l_n, &delta_n)?;
    println!("n,fit_sup,eta,log_b");
    for ((n, c), sup) in degrees.iter().zip(&coeffs).zip(&sups) {
        let order = match args.derivative.rule() {
            DerivativeRule::Explicit { order } => order,
            DerivativeRule::Ratio { ratio } => (ratio * *n as f64).round() as usize,
            DerivativeRule::LogDrop => n - (*n as f64).ln().floor() as usize,
            DerivativeRule::FixedDegree { m } => n.saturating_sub(m),
        };
        let (eta, log_b) = ensemble_diagnostics(c, order, &profile)?;
        println!("{n},{sup:.6e},{eta:.6e},{log_b:.6e}");
    }
    Ok(0)
}

fn run_fixed_degree(args: &FixedDegreeArgs) -> Result<u8> {
    let family = LimitFamily::parse(&args.kind)?;
    let degrees = parse_usize_list(&args.n)?;
    let distances = fixed_degree_convergence(family, args.m, &degrees, args.seed)?;
    println!("n,max_pairing_distance");
    for (n, d) in degrees.iter().zip(&distances) {
        println!("{n},{d:.6e}");
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = match &cli.command {
        Command::Simulate(args) => run_simulate(args, false),
        Command::Compare(args) => run_simulate(args, true),
        Command::Limit(args) => run_limit(args),
        Command::CheckFit(args) => run_check_fit(args),
        Command::FixedDegree(args) => run_fixed_degree(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
