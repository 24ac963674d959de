use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use solow_core::equilibrium::{balanced_growth_capital, find_equilibria};
use solow_core::series::DEFAULT_ORDER;
use solow_core::sweep::{
    compare_backends, gnuplot_script, metadata_json, run_solve, run_sweep, write_csv, Axis,
    SweepConfig, SweepMethod,
};
use solow_core::transform::{identity_suite, IDENTITY_TOL};
use solow_core::{Error, ModelParams};

#[derive(Parser)]
#[command(
    name = "solow",
    version,
    about = "Classical and fractional Solow-Swan solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once and print `t,k,trusted,method` rows.
    Solve(SolveArgs),
    /// Sweep one parameter and write a `t,axis,k,trusted,method` grid.
    Sweep(SweepArgs),
    /// Fixed points, stability and balanced-growth capital.
    Equilibria(EquilibriaArgs),
    /// Check the integral-transform identities by quadrature.
    Verify(VerifyArgs),
    /// Series against the matching oracle on the trusted samples.
    Compare(CompareArgs),
}

#[derive(Args, Clone, Default)]
struct ParamArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k0: Option<f64>,
}

impl ParamArgs {
    fn apply(&self, base: ModelParams<f64>) -> ModelParams<f64> {
        ModelParams {
            p: self.p.unwrap_or(base.p),
            q: self.q.unwrap_or(base.q),
            mu: self.mu.unwrap_or(base.mu),
            alpha: self.alpha.unwrap_or(base.alpha),
            k0: self.k0.unwrap_or(base.k0),
        }
    }

    fn resolve(&self) -> Result<ModelParams<f64>, Error> {
        let params = self.apply(ModelParams::reference());
        params.validate()?;
        Ok(params)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = 2.0)]
    t_max: f64,
    #[arg(long, default_value_t = 41)]
    samples: usize,
    /// series | abm | exact | both
    #[arg(long, default_value = "series")]
    method: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// fig-ktq | fig-ktp | fig-ktmu | fig-ktq-frac | fig-ktalpha
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Flat `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    /// p | q | mu | alpha
    #[arg(long)]
    axis: Option<String>,
    #[arg(long)]
    axis_min: Option<f64>,
    #[arg(long)]
    axis_max: Option<f64>,
    #[arg(long)]
    axis_count: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// series | abm | exact | both
    #[arg(long)]
    method: Option<String>,
    /// CSV destination; metadata goes to `<out>.meta.json`. Stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script for the grid.
    #[arg(long)]
    gnuplot_script: Option<PathBuf>,
    /// Evaluate cells on one thread.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct EquilibriaArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    json: bool,
    /// Initial labour force for the balanced-growth figure.
    #[arg(long)]
    l0: Option<f64>,
    /// Labour growth rate.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    psi: f64,
    /// Time at which to report total capital.
    #[arg(long, default_value_t = 0.0)]
    t: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = IDENTITY_TOL)]
    tolerance: f64,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    #[arg(long, default_value_t = 41)]
    samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    max_gap: f64,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    /// The run completed but a check did not pass (exit 1).
    Check(String),
    /// Bad input or configuration (exit 2).
    Usage(String),
    /// A solver or I/O failure (exit 1).
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::Config(_) => Failure::Usage(e.to_string()),
            Error::Domain { .. } | Error::NonPositiveState { .. } => {
                Failure::Runtime(e.to_string())
            }
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Equilibria(a) => equilibria(a),
        Command::Verify(a) => verify(a),
        Command::Compare(a) => compare(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) | Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(|e| {
            Failure::Runtime(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn solve(a: SolveArgs) -> Result<(), Failure> {
    let params = a.params.resolve()?;
    let method: SweepMethod = a.method.parse()?;
    let runs = run_solve(&params, a.t_max, a.samples, method, a.order)?;
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "t,k,trusted,method")?;
    for i in 0..a.samples {
        for tr in &runs {
            writeln!(
                out,
                "{:.16e},{:.16e},{},{}",
                tr.times[i],
                tr.values[i],
                tr.trusted[i],
                tr.method.label()
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig, Failure> {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(name), _) => SweepConfig::preset(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            SweepConfig::parse(&text)?
        }
        (None, None) => SweepConfig::default(),
    };
    cfg.base = a.params.apply(cfg.base);
    if let Some(axis) = &a.axis {
        cfg.axis = axis.parse::<Axis>()?;
    }
    cfg.axis_min = a.axis_min.unwrap_or(cfg.axis_min);
    cfg.axis_max = a.axis_max.unwrap_or(cfg.axis_max);
    cfg.axis_count = a.axis_count.unwrap_or(cfg.axis_count);
    cfg.order = a.order.unwrap_or(cfg.order);
    cfg.t_max = a.t_max.unwrap_or(cfg.t_max);
    cfg.t_count = a.samples.unwrap_or(cfg.t_count);
    if let Some(m) = &a.method {
        cfg.method = m.parse()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let cfg = sweep_config(&a)?;
    let grid = run_sweep(&cfg, !a.serial)?;
    let mut out = output(a.out.as_deref())?;
    write_csv(&grid.rows, &mut out)?;
    out.flush()?;
    if let Some(path) = &a.out {
        let mut meta = path.as_os_str().to_owned();
        meta.push(".meta.json");
        fs::write(&meta, metadata_json(&grid) + "\n")?;
    }
    if let Some(script) = &a.gnuplot_script {
        let csv = a
            .out
            .as_deref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "sweep.csv".into());
        fs::write(script, gnuplot_script(&cfg, &csv))?;
    }
    let untrusted = grid.rows.iter().filter(|r| !r.trusted).count();
    if untrusted > 0 {
        eprintln!(
            "note: {untrusted} of {} rows are outside the series trust region or failed",
            grid.rows.len()
        );
    }
    Ok(())
}

fn equilibria(a: EquilibriaArgs) -> Result<(), Failure> {
    let params = a.params.resolve()?;
    let report = find_equilibria(&params)?;
    let growth =
        a.l0.map(|l0| balanced_growth_capital(&params, l0, a.psi, a.t))
            .transpose()?;
    if a.json {
        let mut value = serde_json::to_value(&report).expect("report is plain data");
        if let Some(g) = growth {
            value["balanced_growth"] = serde_json::to_value(g).expect("plain data");
        }
        println!(
            "{}",
            serde_json::to_string_pretty(&value).expect("plain data")
        );
    } else {
        println!("{report}");
        if let Some(g) = growth {
            println!(
                "{:<22} {:>24.16e} (t = {}, {} equilibrium, gap {:.3e})",
                "K(t) = k* L0 e^(psi t)",
                g.capital,
                a.t,
                if g.near_equilibrium {
                    "near"
                } else {
                    "NOT near"
                },
                g.relative_gap
            );
        }
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    if a.tolerance.is_nan() || a.tolerance < 0.0 {
        return Err(Failure::Usage(format!(
            "tolerance must be >= 0, got {}",
            a.tolerance
        )));
    }
    let reports = identity_suite(a.tolerance)?;
    println!("{:<40} {:>12} {:>10}  status", "identity", "max dev", "tol");
    for r in &reports {
        println!(
            "{:<40} {:>12.3e} {:>10.1e}  {}",
            r.name,
            r.max_deviation(),
            r.tolerance,
            if r.passed() { "ok" } else { "FAIL" }
        );
    }
    let failing: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| {
            let us: Vec<String> = r.failing_points().map(|p| p.u.to_string()).collect();
            format!("{} (u = {})", r.name, us.join(", "))
        })
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} identities out of tolerance:\n  {}",
            failing.len(),
            failing.join("\n  ")
        )))
    }
}

fn compare(a: CompareArgs) -> Result<(), Failure> {
    let params = a.params.resolve()?;
    let cmp = compare_backends(&params, a.t_max, a.samples, a.order)?;
    println!("oracle            {}", cmp.oracle.label());
    println!(
        "trusted samples   {} of {}",
        cmp.trusted_samples, cmp.samples
    );
    match cmp.at_t {
        Some(t) => println!("max relative gap  {:.6e} at t = {t}", cmp.max_relative_gap),
        None => println!("max relative gap  n/a"),
    }
    if cmp.at_t.is_none() {
        return Err(Failure::Check(
            "no trusted series samples to compare".into(),
        ));
    }
    if cmp.max_relative_gap.is_nan() || cmp.max_relative_gap > a.max_gap {
        return Err(Failure::Check(format!(
            "gap {:.3e} exceeds --max-gap {:.3e}",
            cmp.max_relative_gap, a.max_gap
        )));
    }
    Ok(())
}
