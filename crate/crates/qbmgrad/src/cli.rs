//! The `qbmgrad` command-line driver.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input, 3 numerical guard.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::estimator::{estimate_first_term_with, estimate_gradient, hoeffding_shots, Circuit, EstimatorConfig};
use crate::gradients::{grad, Objective};
use crate::model::thermalize;
use crate::spec_file::RunSpec;
use crate::trainer::{finite_diff_gradient, train, GradientMode, TrainConfig, Trajectory};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Run the built-in verification suites.
    Verify,
    /// Exact gradient with its term breakdown and finite-difference residuals.
    Grad,
    /// Gradient descent, writing trajectory.csv.
    Train,
    /// Shot estimate of the first gradient term of one parameter.
    Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Umegaki,
    Tsallis,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    #[default]
    Exact,
    Shot,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "qbmgrad", version, about = "Quantum Boltzmann machine gradients, estimation and training")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run specification (required except for verify).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Suite for verify: matcalc, densities, gradients, estimator or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    /// Petz–Tsallis order, used with --objective tsallis.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Shot count; 0 picks the Hoeffding count.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, env = "QBMGRAD_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for shot loops.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory receiving report.json and trajectory.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Result of one command.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Value,
    /// CSV text for `train`.
    pub trajectory: Option<String>,
    pub passed: bool,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
}

/// A float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let j = traj.rows.first().map_or(0, |r| r.theta.len());
    let mut s = String::from("iter,objective,grad_norm");
    for k in 0..j {
        let _ = write!(s, ",theta_{k}");
    }
    s.push_str(",wall_ms\n");
    for r in &traj.rows {
        let _ = write!(s, "{},{},{}", r.iter, fmt_f64(r.objective), fmt_f64(r.grad_norm));
        for t in &r.theta {
            let _ = write!(s, ",{}", fmt_f64(*t));
        }
        let _ = writeln!(s, ",{}", fmt_f64(r.wall_ms));
    }
    s
}

fn load_spec(cli: &Cli) -> Result<RunSpec> {
    let path = cli.spec.as_ref().ok_or_else(|| Error::InvalidInput("--spec FILE is required for this command".into()))?;
    RunSpec::load(path)
}

fn objective(cli: &Cli, spec: &RunSpec) -> Result<Objective> {
    let obj = match (cli.objective, cli.q) {
        (Some(ObjectiveArg::Tsallis), Some(q)) => Objective::PetzTsallis(q),
        (Some(ObjectiveArg::Tsallis), None) => return Err(Error::InvalidInput("--objective tsallis needs --q".into())),
        (Some(ObjectiveArg::Umegaki), Some(_)) => return Err(Error::InvalidInput("--q applies to tsallis only".into())),
        (Some(ObjectiveArg::Umegaki), None) => Objective::Umegaki,
        (None, Some(_)) => return Err(Error::InvalidInput("--q needs --objective tsallis".into())),
        (None, None) => spec.objective(),
    };
    obj.validate()?;
    Ok(obj)
}

fn estimator_config(cli: &Cli, spec: &RunSpec, seed: u64) -> Result<EstimatorConfig> {
    let shots = match cli.shots.or(spec.estimate.shots) {
        Some(0) | None => None,
        s => s,
    };
    let cfg = EstimatorConfig {
        epsilon: cli.epsilon.unwrap_or(spec.estimate.epsilon),
        delta_fail: cli.delta.unwrap_or(spec.estimate.delta),
        shots,
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn objective_json(obj: Objective) -> Value {
    match obj {
        Objective::Umegaki => json!({"kind": "umegaki"}),
        Objective::PetzTsallis(q) => json!({"kind": "tsallis", "q": q}),
    }
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= (rel * b.abs()).max(abs)
}

fn cmd_verify(cli: &Cli) -> Result<RunOutput> {
    let suite: Suite = cli.suite.parse()?;
    let report = run_suite(suite)?;
    let mut summary: Vec<String> = report
        .checks
        .iter()
        .map(|c| format!("{} [{}] {}: {:.3e} (tol {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.residual, c.tolerance))
        .collect();
    summary.push(format!("{} passed, {} failed", report.passed, report.failed));
    Ok(RunOutput { passed: report.ok(), report: serde_json::to_value(&report)?, trajectory: None, summary })
}

fn cmd_grad(cli: &Cli, spec: &RunSpec, seed: u64) -> Result<RunOutput> {
    let (machine, target) = spec.build()?;
    let obj = objective(cli, spec)?;
    let g = machine.gradient(&target, obj)?;
    let fd = finite_diff_gradient(&machine, &target, obj, 1e-5)?;
    let fd_ok = g.values.iter().zip(&fd).all(|(a, b)| close(*a, *b, 1e-6, 1e-9));
    let fd_residual = g.values.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut passed = fd_ok;
    let mut summary = vec![format!("objective {}", fmt_f64(machine.objective(&target, obj)?))];
    for (j, v) in g.values.iter().enumerate() {
        summary.push(format!("d/dθ_{j} = {}  (finite difference {})", fmt_f64(*v), fmt_f64(fd[j])));
    }
    if let Some(q) = g.q_value {
        summary.push(format!("Q_q = {}", fmt_f64(q)));
    }
    let mut expect_ok = Value::Null;
    if let Some(exp) = spec.expect.as_ref().and_then(|e| e.gradient.as_ref().map(|g| (g, e.tolerance))) {
        let ok = exp.0.len() == g.values.len() && exp.0.iter().zip(&g.values).all(|(a, b)| (a - b).abs() <= exp.1);
        passed &= ok;
        expect_ok = json!(ok);
    }
    let mut shot = Value::Null;
    if cli.mode == Mode::Shot {
        let h = machine.hamiltonian().ok_or_else(|| Error::InvalidInput("shot mode needs a quantum machine".into()))?;
        if obj != Objective::Umegaki {
            return Err(Error::InvalidInput("shot mode supports the umegaki objective only".into()));
        }
        let cfg = estimator_config(cli, spec, seed)?;
        let est = estimate_gradient(&thermalize(h)?, &machine.target_state(&target)?, &cfg)?;
        summary.push(format!(
            "shot estimates {}",
            est.iter().map(|e| format!("{:.6} ± {:.1e}", e.value, e.stderr)).collect::<Vec<_>>().join(", ")
        ));
        shot = json!({
            "values": est.iter().map(|e| e.value).collect::<Vec<_>>(),
            "stderr": est.iter().map(|e| e.stderr).collect::<Vec<_>>(),
            "shots": est.iter().map(|e| e.first.shots).collect::<Vec<_>>(),
            "epsilon": cfg.epsilon,
            "delta": cfg.delta_fail,
        });
    }
    let report = json!({
        "command": "grad",
        "objective": objective_json(obj),
        "theta": machine.theta(),
        "values": g.values,
        "first_terms": g.first_terms,
        "second_terms": g.second_terms,
        "q_value": g.q_value,
        "finite_difference": fd,
        "finite_difference_step": 1e-5,
        "finite_difference_max_residual": fd_residual,
        "finite_difference_ok": fd_ok,
        "expected_gradient_ok": expect_ok,
        "shot": shot,
        "seed": seed,
        "passed": passed,
    });
    Ok(RunOutput { report, trajectory: None, passed, summary })
}

fn cmd_train(cli: &Cli, spec: &RunSpec, seed: u64) -> Result<RunOutput> {
    let (machine, target) = spec.build()?;
    let obj = objective(cli, spec)?;
    let gradient_mode = match cli.mode {
        Mode::Exact => GradientMode::Exact,
        Mode::Shot => GradientMode::Shot(estimator_config(cli, spec, seed)?),
    };
    let cfg = TrainConfig {
        learning_rate: spec.train.learning_rate,
        iterations: spec.train.iterations,
        gradient_mode,
        objective: obj,
        seed,
        log_every: spec.train.log_every,
    };
    let traj = train(&machine, &target, &cfg)?;
    let last = traj.last();
    let monotone = traj.is_monotone(0.0);
    let mut passed = monotone;
    let mut checks = serde_json::Map::new();
    checks.insert("monotone".into(), json!(monotone));
    if let Some(e) = &spec.expect {
        if let Some(b) = e.objective_below {
            let ok = last.objective < b;
            checks.insert("objective_below".into(), json!(ok));
            passed &= ok;
        }
        if let Some(t) = &e.theta {
            let ok = t.len() == last.theta.len() && t.iter().zip(&last.theta).all(|(a, b)| (a - b).abs() <= e.tolerance);
            checks.insert("theta".into(), json!(ok));
            passed &= ok;
        }
    }
    let summary = vec![
        format!("iterations {}  rejected steps {}", spec.train.iterations, traj.rejected_steps),
        format!("final objective {}", fmt_f64(last.objective)),
        format!("final theta [{}]", last.theta.iter().map(|t| fmt_f64(*t)).collect::<Vec<_>>().join(", ")),
    ];
    let report = json!({
        "command": "train",
        "objective": objective_json(obj),
        "mode": if cli.mode == Mode::Exact { "exact" } else { "shot" },
        "learning_rate": cfg.learning_rate,
        "iterations": cfg.iterations,
        "initial_objective": traj.rows[0].objective,
        "final_objective": last.objective,
        "final_theta": last.theta,
        "final_grad_norm": last.grad_norm,
        "rejected_steps": traj.rejected_steps,
        "wall_ms": last.wall_ms,
        "checks": checks,
        "seed": seed,
        "passed": passed,
    });
    Ok(RunOutput { report, trajectory: Some(trajectory_csv(&traj)), passed, summary })
}

fn cmd_estimate(cli: &Cli, spec: &RunSpec, seed: u64) -> Result<RunOutput> {
    let (machine, target) = spec.build()?;
    if objective(cli, spec)? != Objective::Umegaki {
        return Err(Error::InvalidInput("estimate supports the umegaki objective only".into()));
    }
    let h = machine.hamiltonian().ok_or_else(|| Error::InvalidInput("estimate needs a quantum machine".into()))?;
    let j = spec.estimate.term;
    if j >= h.terms.len() {
        return Err(Error::InvalidInput(format!("term {j} out of range for {} terms", h.terms.len())));
    }
    let model = thermalize(h)?;
    let rho = machine.target_state(&target)?;
    let cfg = estimator_config(cli, spec, seed)?;
    let circuit = Circuit::new(&model, &rho, &model.terms()[j])?;
    let est = estimate_first_term_with(&circuit, &cfg)?;
    let exact = grad(&model, &rho, Objective::Umegaki)?.first_terms[j];
    let err = (est.mean - exact).abs();
    let passed = err < cfg.epsilon;
    let summary = vec![
        format!("first term of θ_{j}: {} ± {} over {} shots", fmt_f64(est.mean), fmt_f64(est.stderr), est.shots),
        format!("exact {}  |error| {}  (ε = {})", fmt_f64(exact), fmt_f64(err), cfg.epsilon),
        format!("κ = {}  ‖G_j‖ = {}", fmt_f64(est.kappa), fmt_f64(est.g_norm)),
    ];
    let report = json!({
        "command": "estimate",
        "term": j,
        "mean": est.mean,
        "stderr": est.stderr,
        "shots": est.shots,
        "hoeffding_shots": hoeffding_shots(est.kappa, est.g_norm, cfg.epsilon, cfg.delta_fail),
        "exact": exact,
        "abs_error": err,
        "kappa": est.kappa,
        "g_norm": est.g_norm,
        "epsilon": cfg.epsilon,
        "delta": cfg.delta_fail,
        "seed": seed,
        "passed": passed,
    });
    Ok(RunOutput { report, trajectory: None, passed, summary })
}

/// Runs a parsed command without touching the filesystem beyond `--spec`.
pub fn run(cli: &Cli) -> Result<RunOutput> {
    if cli.command == Command::Verify {
        return cmd_verify(cli);
    }
    let spec = load_spec(cli)?;
    let seed = cli.seed.unwrap_or(spec.seed);
    match cli.command {
        Command::Grad => cmd_grad(cli, &spec, seed),
        Command::Train => cmd_train(cli, &spec, seed),
        Command::Estimate => cmd_estimate(cli, &spec, seed),
        Command::Verify => unreachable!(),
    }
}

fn write_outputs(out: &Path, res: &RunOutput) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), serde_json::to_string_pretty(&res.report)? + "\n")?;
    if let Some(csv) = &res.trajectory {
        fs::write(out.join("trajectory.csv"), csv)?;
    }
    Ok(())
}

/// Parses `args`, runs the command, writes outputs and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        // fails only if a pool already exists, which keeps its own size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let res = run(&cli).and_then(|r| write_outputs(&cli.out, &r).map(|_| r));
    match res {
        Ok(r) => {
            for line in &r.summary {
                println!("{line}");
            }
            if r.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
