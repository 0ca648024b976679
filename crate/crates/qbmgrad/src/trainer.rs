//! Gradient descent with step halving for every machine class, and a
//! central-difference oracle.

use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimator::{derive_seed, estimate_gradient, hoeffding_shots, EstimatorConfig};
use crate::gradients::{
    classical_divergence, classical_gradient, grad, grad_cq, grad_qc, relative_entropy, GradientReport, Objective,
    Target,
};
use crate::hermitian::{CMatrix, QuantumState};
use crate::model::{cq_decompose, qc_decompose, thermalize, ClassicalBm, ParamHamiltonian};
use crate::random;

/// Largest objective accepted before training is aborted.
pub const DIVERGENCE_LIMIT: f64 = 1e6;
/// Halvings tried per step before the step is skipped.
pub const MAX_HALVINGS: u32 = 20;

/// A trainable machine of any supported class.
#[derive(Clone, Debug)]
pub enum Machine {
    Generic(ParamHamiltonian),
    /// Hidden operators diagonal in `hidden_basis`.
    Qc { h: ParamHamiltonian, hidden_basis: CMatrix },
    /// Visible operators diagonal in `visible_basis`.
    Cq { h: ParamHamiltonian, visible_basis: CMatrix },
    Classical(ClassicalBm),
}

impl Machine {
    pub fn theta(&self) -> &[f64] {
        match self {
            Machine::Generic(h) | Machine::Qc { h, .. } | Machine::Cq { h, .. } => &h.theta,
            Machine::Classical(bm) => &bm.theta,
        }
    }

    pub fn num_params(&self) -> usize {
        self.theta().len()
    }

    pub fn with_theta(&self, theta: &[f64]) -> Result<Self> {
        Ok(match self {
            Machine::Generic(h) => Machine::Generic(h.with_theta(theta)?),
            Machine::Qc { h, hidden_basis } => Machine::Qc { h: h.with_theta(theta)?, hidden_basis: hidden_basis.clone() },
            Machine::Cq { h, visible_basis } => {
                Machine::Cq { h: h.with_theta(theta)?, visible_basis: visible_basis.clone() }
            }
            Machine::Classical(bm) => {
                if theta.len() != bm.num_params() {
                    return Err(Error::Dimension(format!("{} parameters for {} tables", theta.len(), bm.num_params())));
                }
                Machine::Classical(bm.with_theta(theta))
            }
        })
    }

    /// The parameterized Hamiltonian, for quantum machines.
    pub fn hamiltonian(&self) -> Option<&ParamHamiltonian> {
        match self {
            Machine::Generic(h) | Machine::Qc { h, .. } | Machine::Cq { h, .. } => Some(h),
            Machine::Classical(_) => None,
        }
    }

    fn distribution<'a>(&self, target: &'a Target) -> Result<&'a [f64]> {
        match target {
            Target::Distribution(r) => Ok(r),
            Target::State(_) => Err(Error::InvalidInput("this machine takes a probability-vector target".into())),
        }
    }

    fn state<'a>(&self, target: &'a Target) -> Result<&'a QuantumState> {
        match target {
            Target::State(rho) => Ok(rho),
            Target::Distribution(_) => Err(Error::InvalidInput("this machine takes a density-matrix target".into())),
        }
    }

    /// The target as a visible density matrix.
    pub fn target_state(&self, target: &Target) -> Result<QuantumState> {
        match self {
            Machine::Generic(_) | Machine::Qc { .. } => Ok(self.state(target)?.clone()),
            Machine::Cq { h, visible_basis } => cq_decompose(h, visible_basis)?.target_state(self.distribution(target)?),
            Machine::Classical(_) => QuantumState::diagonal(self.distribution(target)?),
        }
    }

    pub fn objective(&self, target: &Target, obj: Objective) -> Result<f64> {
        match self {
            Machine::Generic(h) => relative_entropy(self.state(target)?, thermalize(h)?.sigma_v(), obj),
            Machine::Qc { h, hidden_basis } => relative_entropy(self.state(target)?, qc_decompose(h, hidden_basis)?.sigma_v(), obj),
            Machine::Cq { h, visible_basis } => {
                classical_divergence(self.distribution(target)?, &cq_decompose(h, visible_basis)?.p(), obj)
            }
            Machine::Classical(bm) => classical_divergence(self.distribution(target)?, &bm.marginal(), obj),
        }
    }

    pub fn gradient(&self, target: &Target, obj: Objective) -> Result<GradientReport> {
        match self {
            Machine::Generic(h) => grad(&thermalize(h)?, self.state(target)?, obj),
            Machine::Qc { h, hidden_basis } => grad_qc(&qc_decompose(h, hidden_basis)?, self.state(target)?, obj),
            Machine::Cq { h, visible_basis } => grad_cq(&cq_decompose(h, visible_basis)?, self.distribution(target)?, obj),
            Machine::Classical(bm) => {
                let r = self.distribution(target)?;
                if obj == Objective::Umegaki {
                    let values = classical_gradient(bm, r)?;
                    let n = values.len();
                    // terms are not separated by the enumeration formula
                    return Ok(GradientReport { values, first_terms: vec![f64::NAN; n], second_terms: vec![f64::NAN; n], q_value: None });
                }
                let h = bm.to_quantum()?;
                grad_cq(&cq_decompose(&h, &CMatrix::identity(bm.d_v, bm.d_v))?, r, obj)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradientMode {
    Exact,
    /// Circuit shots for quantum machines, Monte Carlo over `(v, h)` for
    /// classical ones.
    Shot(EstimatorConfig),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub gradient_mode: GradientMode,
    pub objective: Objective,
    pub seed: u64,
    pub log_every: usize,
}

impl TrainConfig {
    pub fn exact(learning_rate: f64, iterations: usize) -> Self {
        Self { learning_rate, iterations, gradient_mode: GradientMode::Exact, objective: Objective::Umegaki, seed: 0, log_every: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidInput(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.iterations == 0 || self.log_every == 0 {
            return Err(Error::InvalidInput("iterations and log_every must be at least 1".into()));
        }
        self.objective.validate()?;
        if let GradientMode::Shot(c) = self.gradient_mode {
            c.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub theta: Vec<f64>,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    /// Steps where every halving still increased the objective.
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryRow {
        self.rows.last().expect("trajectories hold at least one row")
    }

    pub fn final_theta(&self) -> &[f64] {
        &self.last().theta
    }

    pub fn final_objective(&self) -> f64 {
        self.last().objective
    }

    /// Whether logged objectives never increase by more than `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].objective <= w[0].objective + tol)
    }
}

/// Monte Carlo estimate of the classical gradient: `shots` draws of
/// `(v, h)` from `q(v)p(h|v)` and from `p(v, h)`.
pub fn monte_carlo_gradient(bm: &ClassicalBm, target: &[f64], shots: u64, rng: &mut random::Rand) -> Result<(Vec<f64>, Vec<f64>)> {
    if target.len() != bm.d_v {
        return Err(Error::Dimension(format!("target has {} entries, expected {}", target.len(), bm.d_v)));
    }
    if shots == 0 {
        return Err(Error::InvalidInput("shot count must be positive".into()));
    }
    let p = bm.joint();
    let dh = bm.d_h;
    let draw = |w: &[f64], rng: &mut random::Rand| -> usize {
        let total: f64 = w.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (k, x) in w.iter().enumerate() {
            if u < *x {
                return k;
            }
            u -= x;
        }
        w.len() - 1
    };
    let nj = bm.num_params();
    let (mut sum, mut sum_sq) = (vec![0.0; nj], vec![0.0; nj]);
    for _ in 0..shots {
        let v = draw(target, rng);
        let h = draw(&p[v * dh..(v + 1) * dh], rng);
        let joint = draw(&p, rng);
        for (j, t) in bm.tables.iter().enumerate() {
            let y = t[v * dh + h] - t[joint];
            sum[j] += y;
            sum_sq[j] += y * y;
        }
    }
    let n = shots as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let stderr = mean
        .iter()
        .zip(&sum_sq)
        .map(|(m, s)| if shots > 1 { ((s - n * m * m) / (n - 1.0)).max(0.0).sqrt() / n.sqrt() } else { 0.0 })
        .collect();
    Ok((mean, stderr))
}

fn shot_gradient(machine: &Machine, target: &Target, obj: Objective, cfg: &EstimatorConfig) -> Result<Vec<f64>> {
    if obj != Objective::Umegaki {
        return Err(Error::InvalidInput("shot-mode gradients support the umegaki objective only".into()));
    }
    match machine {
        Machine::Classical(bm) => {
            let r = machine.distribution(target)?;
            let range = bm.tables.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
            let shots = cfg.shots.unwrap_or_else(|| hoeffding_shots(2.0, range.max(f64::MIN_POSITIVE), cfg.epsilon, cfg.delta_fail));
            Ok(monte_carlo_gradient(bm, r, shots, &mut random::rng(cfg.seed))?.0)
        }
        _ => {
            let h = machine.hamiltonian().expect("quantum machine");
            let rho = machine.target_state(target)?;
            Ok(estimate_gradient(&thermalize(h)?, &rho, cfg)?.iter().map(|g| g.value).collect())
        }
    }
}

fn checked(objective: f64, iteration: usize) -> Result<f64> {
    if objective.is_nan() || objective > DIVERGENCE_LIMIT {
        return Err(Error::Diverged { iteration, objective });
    }
    Ok(objective)
}

/// Plain gradient descent. Each step starts at the configured learning rate
/// and halves it while the exact objective increases; a step that still
/// increases after [`MAX_HALVINGS`] halvings is skipped.
pub fn train(machine: &Machine, target: &Target, cfg: &TrainConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let start = Instant::now();
    let mut current = machine.clone();
    let mut objective = checked(current.objective(target, cfg.objective)?, 0)?;
    let mut traj = Trajectory::default();
    for iter in 0..=cfg.iterations {
        let g = match cfg.gradient_mode {
            GradientMode::Exact => current.gradient(target, cfg.objective)?.values,
            GradientMode::Shot(est) => {
                let est = EstimatorConfig { seed: derive_seed(est.seed, iter as u64), ..est };
                shot_gradient(&current, target, cfg.objective, &est)?
            }
        };
        let grad_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if iter % cfg.log_every == 0 || iter == cfg.iterations {
            traj.rows.push(TrajectoryRow {
                iter,
                objective,
                grad_norm,
                theta: current.theta().to_vec(),
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
        if iter == cfg.iterations {
            break;
        }
        let mut eta = cfg.learning_rate;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let theta: Vec<f64> = current.theta().iter().zip(&g).map(|(t, d)| t - eta * d).collect();
            // parameters outside the model's numeric range count as an increase
            if let Ok(next) = current.with_theta(&theta) {
                if let Ok(value) = next.objective(target, cfg.objective) {
                    if value <= objective {
                        current = next;
                        objective = checked(value, iter + 1)?;
                        accepted = true;
                        break;
                    }
                    checked(value, iter + 1)?;
                }
            }
            eta *= 0.5;
        }
        if !accepted {
            traj.rejected_steps += 1;
        }
    }
    Ok(traj)
}

/// Training loop for a classical machine on a distribution target.
pub fn train_classical(bm: &ClassicalBm, target: &[f64], cfg: &TrainConfig) -> Result<Trajectory> {
    train(&Machine::Classical(bm.clone()), &Target::Distribution(target.to_vec()), cfg)
}

/// Central differences of the exact objective.
pub fn finite_diff_gradient(machine: &Machine, target: &Target, obj: Objective, step: f64) -> Result<Vec<f64>> {
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::InvalidInput(format!("finite-difference step {step} outside [1e-7, 1e-3]")));
    }
    let theta = machine.theta().to_vec();
    (0..theta.len())
        .map(|j| {
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[j] += step;
            down[j] -= step;
            let fu = machine.with_theta(&up)?.objective(target, obj)?;
            let fd = machine.with_theta(&down)?.objective(target, obj)?;
            Ok((fu - fd) / (2.0 * step))
        })
        .collect()
}
