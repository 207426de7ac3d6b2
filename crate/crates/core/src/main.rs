use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hyperwave::adjoint::{apply_adjoint, AdjointMethod};
use hyperwave::config::{load_config, ExperimentConfig};
use hyperwave::error::{ConfigIssue, Error, Result};
use hyperwave::forward::{energy_budget, solve_forward};
use hyperwave::inversion::{self, InversionResult, IterateTrace, StopReason};
use hyperwave::io::{emit_report, load_field, save_field, write_field_csv, Gate, Report};
use hyperwave::sensitivity::{random_directions, solve_frechet, Linearization};
use hyperwave::verify;

const THREADS_VAR: &str = "HYPERWAVE_THREADS";
const EXIT_GATE: u8 = 4;

#[derive(Parser)]
#[command(name = "hyperwave", version, about = "Hyperelastic wave solver, sensitivities and coefficient inversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem and write the displacement field.
    Forward {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the field as long-format CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Apply the Frechet derivative to a coefficient direction.
    Derivative {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated direction, one value per dictionary entry.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        h: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply the adjoint of the Frechet derivative to a field.
    Adjoint {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        w: PathBuf,
        /// Defaults to `solver.adjoint` from the config.
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover coefficients from measured data by projected Landweber.
    Invert {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Continue from a previous result or trace file; `max_iterations`
        /// counts the iterations already recorded there.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Also write report.json, trace.csv and plots here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run numerical checks and write a report; exits 4 if a gate fails.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "report")]
        report: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Discrete,
    Continuous,
}

impl From<Method> for AdjointMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Discrete => AdjointMethod::Discrete,
            Method::Continuous => AdjointMethod::Continuous,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Taylor,
    Adjoint,
    Lipschitz,
    Gronwall,
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| run(cli.command));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Error::Config(vec![ConfigIssue {
            path: THREADS_VAR.into(),
            message: format!("expected a positive integer, got '{raw}'"),
        }])
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Forward { config, out, csv } => forward(&config, &out, csv.as_deref()),
        Command::Derivative { config, h, out } => derivative(&config, &h, &out),
        Command::Adjoint { config, w, method, out } => adjoint(&config, &w, method.map(Into::into), &out),
        Command::Invert {
            config,
            data,
            out,
            resume,
            report,
        } => invert(&config, &data, &out, resume.as_deref(), report.as_deref()),
        Command::Verify { suite, config, report } => run_verify(suite, &config, &report),
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn forward(config: &Path, out: &Path, csv: Option<&Path>) -> Result<u8> {
    let cfg = load_config(config)?;
    let setup = cfg.build_setup()?;
    let (u, report) = solve_forward(&setup)?;
    save_field(out, &u)?;
    if let Some(path) = csv {
        write_field_csv(path, setup.grid(), &u)?;
    }
    let energy = energy_budget(&u, &setup)?;
    let e0 = energy[0];
    let drift = energy.iter().fold(0.0_f64, |m, e| m.max((e - e0).abs())) / e0.abs().max(f64::MIN_POSITIVE);
    let sidecar = json!({
        "command": "forward",
        "alpha": setup.alpha().as_slice(),
        "dt": setup.grid().dt(),
        "dx": setup.grid().dx(),
        "max_abs": u.max_abs(),
        "energy": energy,
        "relative_energy_drift": drift,
        "solve": report,
    });
    write_json(&out.with_extension("json"), &sidecar)?;
    println!("wrote {} (cfl {:.3}, {:.3}s)", out.display(), report.cfl, report.wall_time_s);
    Ok(0)
}

fn derivative(config: &Path, h: &[f64], out: &Path) -> Result<u8> {
    let cfg = load_config(config)?;
    let setup = cfg.build_setup()?;
    let (u, _) = solve_forward(&setup)?;
    let v = solve_frechet(&setup, setup.alpha().as_slice(), h, &u)?;
    save_field(out, &v)?;
    println!("wrote {} (max |v| {:e})", out.display(), v.max_abs());
    Ok(0)
}

fn adjoint(config: &Path, w: &Path, method: Option<AdjointMethod>, out: &Path) -> Result<u8> {
    let cfg = load_config(config)?;
    let setup = cfg.build_setup()?;
    let w = load_field(w, setup.grid())?;
    let method = method.unwrap_or(cfg.solver.adjoint);
    let (u, _) = solve_forward(&setup)?;
    let lin = Linearization::new(&setup, setup.alpha().as_slice(), &u)?;
    let gradient = apply_adjoint(&lin, &w, method)?;
    write_json(
        out,
        &json!({ "method": method, "alpha": setup.alpha().as_slice(), "gradient": gradient }),
    )?;
    println!("wrote {}", out.display());
    Ok(0)
}

fn read_resume(path: &Path) -> Result<IterateTrace> {
    let text = fs::read_to_string(path)?;
    if let Ok(result) = serde_json::from_str::<InversionResult>(&text) {
        return Ok(result.trace);
    }
    Ok(serde_json::from_str::<IterateTrace>(&text)?)
}

fn invert(config: &Path, data: &Path, out: &Path, resume: Option<&Path>, report_dir: Option<&Path>) -> Result<u8> {
    let cfg = load_config(config)?;
    let setup = cfg.build_setup()?;
    let u_meas = load_field(data, setup.grid())?;
    let inv = cfg.inversion_config();
    let result = match resume {
        Some(path) => inversion::resume(&setup, &u_meas, read_resume(path)?, &inv)?,
        None => inversion::invert(&setup, &u_meas, &cfg.alpha0(), &inv)?,
    };
    write_json(out, &result)?;
    if let Some(dir) = report_dir {
        let mut report = Report::new("invert", cfg.seed).with_trace(result.trace.clone());
        report.values.insert("step_size".into(), result.trace.step_size);
        report.values.insert("best_iteration".into(), result.best_iteration as f64);
        if let Some(best) = result.trace.records.get(result.best_iteration) {
            report.values.insert("residual_norm".into(), best.residual_norm);
            report.values.insert("misfit".into(), best.misfit);
        }
        emit_report(dir, &report, cfg.output.plots)?;
    }
    println!("stop: {:?}; alpha = {:?}", result.stop, result.alpha);
    match result.stop {
        StopReason::SolverFailure { message } => {
            eprintln!("error: solver failed during inversion: {message}");
            Ok(3)
        }
        _ => Ok(0),
    }
}

fn gate(name: &str, passed: bool, measured: &[(&str, f64)], threshold: &str) -> Gate {
    Gate {
        name: name.into(),
        passed,
        measured: measured.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        threshold: threshold.into(),
    }
}

fn verify_suites(suite: Suite, cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let setup = cfg.build_setup()?;
    let alpha = setup.alpha().as_slice().to_vec();
    let n = alpha.len();
    let h = cfg.verify.direction_or_default(n);
    let wants = |s: Suite| suite == Suite::All || suite == s;

    if wants(Suite::Taylor) {
        let t = verify::taylor_order_test(&setup, &alpha, &h, &cfg.verify.taylor_steps)?;
        let slope = t.slope.unwrap_or(f64::NAN);
        report.values.insert("taylor_slope".into(), slope);
        report.gates.push(gate("taylor_slope", slope >= 1.4, &[("slope", slope)], "slope >= 1.4"));
        report.tables.push(t.table());
    }
    if wants(Suite::Adjoint) {
        for method in [AdjointMethod::Discrete, AdjointMethod::Continuous] {
            let c = verify::adjoint_certificate(&setup, &alpha, cfg.verify.trials, cfg.seed, method)?;
            let name = format!("adjoint_{}", method_name(method));
            report.values.insert(format!("{name}_max_mismatch"), c.max_mismatch);
            report.gates.push(gate(&name, c.max_mismatch <= 1e-10, &[("max_mismatch", c.max_mismatch)], "<= 1e-10"));
            let mut table = c.table();
            table.name = name;
            report.tables.push(table);
        }
    }
    if wants(Suite::Lipschitz) {
        let limit = if setup.dictionary().is_quadratic() { 2.0 } else { 5.0 };
        let threshold = format!("spread <= {limit}");
        let dirs = random_directions(n, cfg.verify.directions, cfg.seed);
        match verify::lipschitz_alpha_test(&setup, &alpha, &dirs, &cfg.verify.lipschitz_steps) {
            Ok(l) => {
                report.values.insert("lipschitz_spread".into(), l.spread);
                report.gates.push(gate("lipschitz_spread", l.spread <= limit, &[("spread", l.spread)], &threshold));
                report.tables.push(l.table());
            }
            Err(Error::InvalidInput(msg)) => {
                report
                    .gates
                    .push(gate("lipschitz_spread", false, &[], &format!("{threshold}; not run: {msg}")));
            }
            Err(e) => return Err(e),
        }
    }
    if wants(Suite::Gronwall) {
        let threshold = "psi <= envelope";
        match verify::gronwall_consistency(&setup, &alpha, &h) {
            Ok(g) => {
                report.values.insert("gronwall_max_ratio".into(), g.max_ratio);
                report.gates.push(gate(
                    "gronwall_envelope",
                    g.holds(),
                    &[("max_ratio", g.max_ratio), ("b", g.b), ("k", g.k)],
                    threshold,
                ));
                report.tables.push(g.table());
            }
            Err(Error::InvalidInput(msg)) => {
                report
                    .gates
                    .push(gate("gronwall_envelope", false, &[], &format!("{threshold}; not run: {msg}")));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn method_name(m: AdjointMethod) -> &'static str {
    match m {
        AdjointMethod::Discrete => "discrete",
        AdjointMethod::Continuous => "continuous",
    }
}

fn run_verify(suite: Suite, config: &Path, dir: &Path) -> Result<u8> {
    let cfg = load_config(config)?;
    let mut report = Report::new("verify", cfg.seed);
    verify_suites(suite, &cfg, &mut report)?;
    emit_report(dir, &report, cfg.output.plots)?;
    for g in &report.gates {
        let measured: Vec<String> = g.measured.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
        println!(
            "{} {} [{}] ({})",
            if g.passed { "PASS" } else { "FAIL" },
            g.name,
            measured.join(", "),
            g.threshold
        );
    }
    Ok(if report.passed() { 0 } else { EXIT_GATE })
}
