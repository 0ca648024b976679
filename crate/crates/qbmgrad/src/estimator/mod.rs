//! Shot-based estimation of the gradient terms with idealized
//! block-encodings, and the error and sample-complexity accounting.

pub mod circuit;
pub mod encoding;

use rand::Rng;
use rayon::prelude::*;

pub use circuit::{circuit_expectation, shot_sample, Circuit, Outcome, ShotRecord};
pub use encoding::{
    be_product, dilate, inv_sqrt_block, inv_sqrt_encoding, modular_flow, modular_unitary, BlockEncoding, EncodingMeta,
};

use crate::densities::{quadrature_rule, Density, SeededSampler};
use crate::error::{Error, Result};
use crate::hermitian::{kron, op_norm, CMatrix, HermitianOperator, QuantumState};
use crate::model::ThermalModel;
use crate::random::{self, Rand};

/// Number of independent seed streams a shot loop is split into.
pub const SHOT_CHUNKS: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub delta_fail: f64,
    /// `None` picks [`hoeffding_shots`].
    pub shots: Option<u64>,
    pub seed: u64,
}

impl EstimatorConfig {
    pub fn new(epsilon: f64, delta_fail: f64, seed: u64) -> Self {
        Self { epsilon, delta_fail, shots: None, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.delta_fail > 0.0 && self.delta_fail < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {}", self.delta_fail)));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidInput("shot count must be positive".into()));
        }
        Ok(())
    }
}

/// Mean of a κ-scaled shot average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TermEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub shots: u64,
    pub kappa: f64,
    pub g_norm: f64,
}

/// `⌈2(κ‖G‖/ε)² ln(2/δ)⌉`.
pub fn hoeffding_shots(kappa: f64, g_norm: f64, epsilon: f64, delta_fail: f64) -> u64 {
    let r = kappa * g_norm / epsilon;
    (2.0 * r * r * (2.0 / delta_fail).ln()).ceil().max(1.0) as u64
}

/// `‖G‖(2√κ ε₂ + 2ε₁(κ + √κ ε₂))`.
pub fn error_budget(eps1: f64, eps2: f64, kappa: f64, g_norm: f64) -> f64 {
    let sk = kappa.sqrt();
    g_norm * (2.0 * sk * eps2 + 2.0 * eps1 * (kappa + sk * eps2))
}

/// Encoding errors `(ε₁, ε₂)` whose [`error_budget`] is exactly `ε/2`.
pub fn budget_split(epsilon: f64, kappa: f64, g_norm: f64) -> (f64, f64) {
    let sk = kappa.sqrt();
    let eps2 = epsilon / (8.0 * sk * g_norm);
    let eps1 = epsilon / (8.0 * g_norm * (kappa + sk * eps2));
    (eps1, eps2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostKind {
    ModularFlow,
    InvSqrt,
    FullAlgorithm,
}

/// Query counts with unit constants. `s` is only read by `ModularFlow`,
/// `g_norm` and `delta_fail` only by `FullAlgorithm`.
pub fn query_cost(kind: CostKind, kappa: f64, s: f64, g_norm: f64, epsilon: f64, delta_fail: f64) -> f64 {
    match kind {
        CostKind::InvSqrt => (kappa * (1.0 / epsilon).ln()).max(1.0),
        CostKind::ModularFlow => {
            let s = s.abs();
            let log_s = if s > 0.0 { (s / epsilon).ln().max(1.0) } else { 1.0 };
            (kappa * s * log_s * kappa.ln().max(1.0)).max(1.0)
        }
        CostKind::FullAlgorithm => {
            let r = kappa * g_norm / epsilon;
            kappa * r * r * r.ln().max(1.0) * (1.0 / delta_fail).ln().max(1.0)
        }
    }
}

/// splitmix64 of `seed ^ stream`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = (seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

/// Runs `shots` draws split over [`SHOT_CHUNKS`] seed streams and reduces
/// them in chunk order.
fn run_chunks<F>(shots: u64, seed: u64, draw: F) -> Result<Moments>
where
    F: Fn(u64, u64) -> Result<Moments> + Sync,
{
    let per = shots / SHOT_CHUNKS;
    let extra = shots % SHOT_CHUNKS;
    let parts: Vec<Result<Moments>> = (0..SHOT_CHUNKS)
        .into_par_iter()
        .map(|c| draw(derive_seed(seed, c), per + u64::from(c < extra)))
        .collect();
    let mut m = Moments::default();
    for p in parts {
        let p = p?;
        m.n += p.n;
        m.sum += p.sum;
        m.sum_sq += p.sum_sq;
    }
    Ok(m)
}

fn finish(m: Moments, scale: f64, kappa: f64, g_norm: f64) -> TermEstimate {
    let n = m.n as f64;
    let mean = m.sum / n;
    let var = if m.n > 1 { ((m.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    TermEstimate { mean: scale * mean, stderr: scale * (var / n).sqrt(), shots: m.n, kappa, g_norm }
}

/// κ-scaled mean of the circuit outcome `Y` over the configured shots.
pub fn estimate_first_term_with(circuit: &Circuit, config: &EstimatorConfig) -> Result<TermEstimate> {
    config.validate()?;
    let kappa = circuit.kappa();
    let g_norm = circuit.g_norm();
    let shots = config
        .shots
        .unwrap_or_else(|| hoeffding_shots(kappa, g_norm.max(f64::MIN_POSITIVE), config.epsilon, config.delta_fail));
    let m = run_chunks(shots, config.seed, |seed, n| {
        let mut ss = SeededSampler::new(Density::Logistic, derive_seed(seed, 1))?;
        let mut st = SeededSampler::new(Density::HighPeakTent, derive_seed(seed, 2))?;
        let mut rng = random::rng(derive_seed(seed, 3));
        let mut out = Moments::default();
        for _ in 0..n {
            let y = circuit.sample(&mut ss, &mut st, &mut rng)?.y;
            out.n += 1;
            out.sum += y;
            out.sum_sq += y * y;
        }
        Ok(out)
    })?;
    Ok(finish(m, kappa, kappa, g_norm))
}

/// Estimate of `⟨G_j⟩_{Σ(ρ)}` from circuit shots.
pub fn estimate_first_term(
    model: &ThermalModel,
    rho: &QuantumState,
    gj: &HermitianOperator,
    config: &EstimatorConfig,
) -> Result<TermEstimate> {
    estimate_first_term_with(&Circuit::new(model, rho, gj)?, config)
}

/// Estimate of `⟨G_j⟩_{σ_vh}` by measuring `G_j` on the thermal state.
pub fn estimate_second_term_with(circuit: &Circuit, config: &EstimatorConfig) -> Result<TermEstimate> {
    config.validate()?;
    let (values, probs) = circuit.thermal_outcomes();
    let g_norm = circuit.g_norm();
    let shots =
        config.shots.unwrap_or_else(|| hoeffding_shots(1.0, g_norm.max(f64::MIN_POSITIVE), config.epsilon, config.delta_fail));
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!("outcome mass defect {:.3e}", total - 1.0)));
    }
    let m = run_chunks(shots, derive_seed(config.seed, 0x5EC0), |seed, n| {
        let mut rng = random::rng(seed);
        let mut out = Moments::default();
        for _ in 0..n {
            let mut u = rng.random::<f64>() * total;
            let mut g = values[values.len() - 1];
            for (v, p) in values.iter().zip(probs) {
                if u < *p {
                    g = *v;
                    break;
                }
                u -= p;
            }
            out.n += 1;
            out.sum += g;
            out.sum_sq += g * g;
        }
        Ok(out)
    })?;
    Ok(finish(m, 1.0, circuit.kappa(), g_norm))
}

pub fn estimate_second_term(
    model: &ThermalModel,
    gj: &HermitianOperator,
    config: &EstimatorConfig,
) -> Result<TermEstimate> {
    let rho = model.sigma_v().clone();
    estimate_second_term_with(&Circuit::new(model, &rho, gj)?, config)
}

/// Shot estimate of one Umegaki gradient component and its two terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientEstimate {
    pub value: f64,
    pub stderr: f64,
    pub first: TermEstimate,
    pub second: TermEstimate,
}

/// Umegaki gradient from shots. Each term gets half of `ε` and `δ`, so the
/// difference is within `ε` with probability at least `1 − δ`.
pub fn estimate_gradient(model: &ThermalModel, rho: &QuantumState, config: &EstimatorConfig) -> Result<Vec<GradientEstimate>> {
    config.validate()?;
    let half = EstimatorConfig {
        epsilon: config.epsilon / 2.0,
        delta_fail: config.delta_fail / 2.0,
        shots: config.shots,
        seed: config.seed,
    };
    model
        .terms()
        .iter()
        .enumerate()
        .map(|(j, gj)| {
            let c = Circuit::new(model, rho, gj)?;
            let cfg = EstimatorConfig { seed: derive_seed(config.seed, 0x6A00 + j as u64), ..half };
            let first = estimate_first_term_with(&c, &cfg)?;
            let second = estimate_second_term_with(&c, &cfg)?;
            Ok(GradientEstimate {
                value: first.mean - second.mean,
                stderr: first.stderr.hypot(second.stderr),
                first,
                second,
            })
        })
        .collect()
}

/// Quadrature rules for `s ~ β` and `t ~ γ` accurate far below `1e-6`.
pub fn time_rules() -> Result<(Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    Ok((quadrature_rule(Density::Logistic, 12.0, 2048)?, quadrature_rule(Density::HighPeakTent, 12.0, 2048)?))
}

/// `½Tr[Φ(G_j){σ_vh, E_s[A₂A₁(s)ρA₁(s)†A₂†] ⊗ I}]` for the given blocks.
pub fn first_term_with_blocks(
    circuit: &Circuit,
    model: &ThermalModel,
    rho: &QuantumState,
    a1: impl Fn(f64) -> Result<CMatrix>,
    a2: &CMatrix,
    s_rule: &[(f64, f64)],
    t_rule: &[(f64, f64)],
) -> Result<f64> {
    let dims = model.dims();
    let mut k = CMatrix::zeros(dims.d_v, dims.d_v);
    for &(s, w) in s_rule {
        let a = a2 * a1(s)?;
        k += (&a * rho.matrix() * a.adjoint()).scale(w);
    }
    let lifted = kron(&k, &CMatrix::identity(dims.d_h, dims.d_h));
    let sig = model.sigma_vh().matrix();
    let anti = &lifted * sig + sig * &lifted;
    let phi = circuit.observable_mixture(t_rule);
    Ok(0.5 * (phi * anti).trace().re)
}

/// Outcome of one perturbed-encoding trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationTrial {
    /// `‖A₂A₁ − σ^{−1/2}σ^{−is/2}‖` at the probed `s`.
    pub product_deviation: f64,
    /// The product rule's bound for the two declared errors.
    pub product_bound: f64,
    /// First-term bias over the `s` average.
    pub bias: f64,
    /// [`error_budget`] for the declared errors.
    pub budget: f64,
}

/// Random Hermitian matrix with spectral norm one.
fn unit_noise(d: usize, rng: &mut Rand) -> CMatrix {
    random::hermitian(d, 1.0, rng).into_matrix()
}

/// Replaces the exact modular-flow and inverse-square-root blocks with
/// contractions at spectral distance `eps1` and `eps2/√κ` from them, then
/// measures the composed deviation at `s_probe` and the first-term bias.
#[allow(clippy::too_many_arguments)]
pub fn perturbation_trial(
    circuit: &Circuit,
    model: &ThermalModel,
    rho: &QuantumState,
    eps1: f64,
    eps2: f64,
    s_probe: f64,
    rules: &(Vec<(f64, f64)>, Vec<(f64, f64)>),
    rng: &mut Rand,
) -> Result<PerturbationTrial> {
    let d = model.dims().d_v;
    let kappa = model.kappa();
    let sk = kappa.sqrt();
    let n1 = unit_noise(d, rng);
    let n2 = unit_noise(d, rng);
    let eta = eps2 / (2.0 * sk);
    let c2 = inv_sqrt_block(model)?.scale(1.0 - eta) + n2.scale(eta);
    let a1 = |s: f64| -> Result<CMatrix> { Ok(modular_flow(model, s)?.scale(1.0 - eps1 / 2.0) + n1.scale(eps1 / 2.0)) };
    let e1 = BlockEncoding { delta: eps1, ..dilate(&a1(s_probe)?, 1.0)? };
    let e2 = BlockEncoding { delta: eps2, ..dilate(&c2, sk)? };
    let prod = e2.product(&e1)?;
    let exact = inv_sqrt_block(model)?.scale(sk) * modular_flow(model, s_probe)?;
    let product_deviation = op_norm(&(prod.encoded() - exact));
    let a2 = c2.scale(sk);
    let perturbed = first_term_with_blocks(circuit, model, rho, a1, &a2, &rules.0, &rules.1)?;
    let exact_a2 = inv_sqrt_block(model)?.scale(sk);
    let reference = first_term_with_blocks(circuit, model, rho, |s| modular_flow(model, s), &exact_a2, &rules.0, &rules.1)?;
    Ok(PerturbationTrial {
        product_deviation,
        product_bound: prod.delta,
        bias: (perturbed - reference).abs(),
        budget: error_budget(eps1, eps2, kappa, circuit.g_norm()),
    })
}
