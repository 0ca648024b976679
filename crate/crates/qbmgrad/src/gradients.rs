//! Objective values and exact gradients for fully quantum, quantum–classical,
//! classical–quantum and classical machines.

use crate::calculus::{apply_channel, ChannelKind, EvalMode};
use crate::error::{Error, Result};
use crate::hermitian::{
    eigh, matrix_function, tensor, trace_product, CMatrix, HermitianOperator, QuantumState, SpectralDecomposition,
};
use crate::model::{cq_decompose, qc_decompose, restricted_to_param, thermalize, ClassicalBm, CqModel, QcModel, RestrictedSpec, ThermalModel};

/// Smallest eigenvalue of the model's visible state accepted by gradients.
pub const SUPPORT_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    /// `Tr[ρ ln ρ] − Tr[ρ ln σ]`.
    Umegaki,
    /// `(Tr[ρ^q σ^{1−q}] − 1)/(q − 1)` for `q ∈ (0,1)∪(1,2]`.
    PetzTsallis(f64),
}

impl Objective {
    pub fn validate(&self) -> Result<()> {
        if let Objective::PetzTsallis(q) = *self {
            if !(q > 0.0 && q <= 2.0 && q != 1.0) {
                return Err(Error::InvalidInput(format!("Petz–Tsallis needs q in (0,1)∪(1,2], got {q}")));
            }
        }
        Ok(())
    }

    pub fn q(&self) -> f64 {
        match *self {
            Objective::Umegaki => 1.0,
            Objective::PetzTsallis(q) => q,
        }
    }
}

/// Gradient components with the two terms they are the difference of.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub values: Vec<f64>,
    pub first_terms: Vec<f64>,
    /// Already multiplied by `Q_q` for Petz–Tsallis.
    pub second_terms: Vec<f64>,
    /// `Q_q = Tr[ρ^q σ^{1−q}]` for Petz–Tsallis objectives.
    pub q_value: Option<f64>,
}

impl GradientReport {
    fn from_terms(first_terms: Vec<f64>, second_terms: Vec<f64>, q_value: Option<f64>) -> Self {
        let values = first_terms.iter().zip(&second_terms).map(|(a, b)| a - b).collect();
        Self { values, first_terms, second_terms, q_value }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// A Hermitian operator with unit trace that need not be positive.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiState {
    pub op: HermitianOperator,
}

/// A positive operator-valued measure.
#[derive(Clone, Debug)]
pub struct Povm {
    pub elements: Vec<HermitianOperator>,
}

/// What a machine is trained toward.
#[derive(Clone, Debug)]
pub enum Target {
    State(QuantumState),
    /// Probabilities over a classical visible register.
    Distribution(Vec<f64>),
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput("target is not a probability vector".into()));
    }
    Ok(())
}

/// `ρ^q` with eigenvalues clamped at zero.
pub fn state_power(rho: &HermitianOperator, q: f64) -> Result<HermitianOperator> {
    let s = eigh(rho)?;
    if s.min() < -1e-12 {
        return Err(Error::InvalidState(format!("negative eigenvalue {:.3e}", s.min())));
    }
    matrix_function(&s, |x| if x <= 0.0 { 0.0 } else { x.powf(q) })
}

fn positive(sigma: &HermitianOperator) -> Result<SpectralDecomposition> {
    let s = eigh(sigma)?;
    if s.min() <= SUPPORT_GUARD {
        return Err(Error::Support(format!("λ_min(σ) = {:.3e} is below {SUPPORT_GUARD:e}", s.min())));
    }
    Ok(s)
}

/// `Q_q = Tr[ρ^q σ^{1−q}]`.
pub fn quasi_overlap(rho: &QuantumState, sigma: &QuantumState, q: f64) -> Result<f64> {
    let ss = positive(sigma.op())?;
    let rq = state_power(rho.op(), q)?;
    let sq = matrix_function(&ss, |x| x.powf(1.0 - q))?;
    trace_product(&rq, &sq)
}

pub fn relative_entropy(rho: &QuantumState, sigma: &QuantumState, obj: Objective) -> Result<f64> {
    obj.validate()?;
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    match obj {
        Objective::Umegaki => {
            let ss = positive(sigma.op())?;
            let rs = eigh(rho.op())?;
            let neg_entropy: f64 = rs.values.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum();
            let ln_sigma = matrix_function(&ss, f64::ln)?;
            Ok(neg_entropy - trace_product(rho.op(), &ln_sigma)?)
        }
        Objective::PetzTsallis(q) => Ok((quasi_overlap(rho, sigma, q)? - 1.0) / (q - 1.0)),
    }
}

/// `Υ(σ^{−q/2} X σ^{−q/2})` with the logistic channel at `q = 1` and
/// `β_{1−q}` otherwise; both factors act in the eigenbasis of `σ`.
fn visible_weight(sigma_spec: &SpectralDecomposition, x: &HermitianOperator, q: f64) -> Result<HermitianOperator> {
    let kind = if q == 1.0 { ChannelKind::LogLogistic } else { ChannelKind::PowerBeta(1.0 - q) };
    let side = matrix_function(sigma_spec, |l| l.powf(-0.5 * q))?;
    apply_channel(kind, sigma_spec, &x.sandwich(&side), EvalMode::Spectral)
}

fn guard_model(model: &ThermalModel) -> Result<()> {
    let lmin = model.sigma_v_spectrum().min();
    if lmin <= SUPPORT_GUARD {
        return Err(Error::Support(format!("λ_min(σ_v) = {lmin:.3e} is below {SUPPORT_GUARD:e}")));
    }
    Ok(())
}

/// `Φ_G(½{σ_vh, Υ(σ_v^{−q/2} ρ_in σ_v^{−q/2}) ⊗ I_h})`, where the caller passes
/// `ρ^q` as `rho_in` when `q ≠ 1`.
pub fn sigma_map(model: &ThermalModel, rho_in: &HermitianOperator, q: f64) -> Result<QuasiState> {
    guard_model(model)?;
    let dims = model.dims();
    if rho_in.dim() != dims.d_v {
        return Err(Error::Dimension(format!("input of dim {} on a {}-dim visible space", rho_in.dim(), dims.d_v)));
    }
    let w = visible_weight(model.sigma_v_spectrum(), rho_in, q)?;
    let lifted = tensor(&w, &HermitianOperator::identity(dims.d_h));
    let xi = model.sigma_vh().op().anticommutator(&lifted).scale(0.5);
    let op = apply_channel(ChannelKind::ExpTent, model.g_spectrum(), &xi, EvalMode::Spectral)?;
    Ok(QuasiState { op })
}

/// `ρ^q` for the objective, `ρ` itself at `q = 1`.
fn objective_input(rho: &QuantumState, obj: Objective) -> Result<HermitianOperator> {
    match obj {
        Objective::Umegaki => Ok(rho.op().clone()),
        Objective::PetzTsallis(q) => state_power(rho.op(), q),
    }
}

pub fn grad(model: &ThermalModel, rho: &QuantumState, obj: Objective) -> Result<GradientReport> {
    obj.validate()?;
    let input = objective_input(rho, obj)?;
    let sig = sigma_map(model, &input, obj.q())?;
    let q_value = match obj {
        Objective::Umegaki => None,
        Objective::PetzTsallis(q) => Some(quasi_overlap(rho, model.sigma_v(), q)?),
    };
    let scale = q_value.unwrap_or(1.0);
    let mut first = Vec::with_capacity(model.terms().len());
    let mut second = Vec::with_capacity(model.terms().len());
    for gj in model.terms() {
        first.push(trace_product(gj, &sig.op)?);
        second.push(scale * trace_product(gj, model.sigma_vh().op())?);
    }
    Ok(GradientReport::from_terms(first, second, q_value))
}

pub fn grad_qc(qc: &QcModel, rho: &QuantumState, obj: Objective) -> Result<GradientReport> {
    obj.validate()?;
    if rho.dim() != qc.dims.d_v {
        return Err(Error::Dimension(format!("target of dim {} on a {}-dim visible space", rho.dim(), qc.dims.d_v)));
    }
    let spec = qc.sigma_v_spectrum();
    if spec.min() <= SUPPORT_GUARD {
        return Err(Error::Support(format!("λ_min(σ_v) = {:.3e} is below {SUPPORT_GUARD:e}", spec.min())));
    }
    let input = objective_input(rho, obj)?;
    let w = visible_weight(spec, &input, obj.q())?;
    let q_value = match obj {
        Objective::Umegaki => None,
        Objective::PetzTsallis(q) => Some(quasi_overlap(rho, qc.sigma_v(), q)?),
    };
    let scale = q_value.unwrap_or(1.0);
    let nj = qc.num_params();
    let (mut first, mut second) = (vec![0.0; nj], vec![0.0; nj]);
    for br in &qc.branches {
        let xi = br.state.op().anticommutator(&w).scale(0.5 * br.p);
        let img = apply_channel(ChannelKind::ExpTent, &br.g_spec, &xi, EvalMode::Spectral)?;
        for j in 0..nj {
            first[j] += trace_product(&br.terms[j], &img)?;
            second[j] += scale * br.p * trace_product(&br.terms[j], br.state.op())?;
        }
    }
    Ok(GradientReport::from_terms(first, second, q_value))
}

pub fn grad_cq(cq: &CqModel, target: &[f64], obj: Objective) -> Result<GradientReport> {
    obj.validate()?;
    check_distribution(target)?;
    if target.len() != cq.branches.len() {
        return Err(Error::Dimension(format!("target has {} entries, expected {}", target.len(), cq.branches.len())));
    }
    let q = obj.q();
    let mut weights = Vec::with_capacity(target.len());
    for (r, br) in target.iter().zip(&cq.branches) {
        if *r > 0.0 && br.p <= SUPPORT_GUARD {
            return Err(Error::Support(format!("model weight {:.3e} where the target has mass {r}", br.p)));
        }
        weights.push(if *r == 0.0 { 0.0 } else { r.powf(q) * br.p.powf(1.0 - q) });
    }
    let q_value = match obj {
        Objective::Umegaki => None,
        Objective::PetzTsallis(_) => Some(weights.iter().sum()),
    };
    let scale = q_value.unwrap_or(1.0);
    let nj = cq.num_params();
    let (mut first, mut second) = (vec![0.0; nj], vec![0.0; nj]);
    for (wx, br) in weights.iter().zip(&cq.branches) {
        for j in 0..nj {
            let e = trace_product(&br.terms[j], br.state.op())?;
            first[j] += wx * e;
            second[j] += scale * br.p * e;
        }
    }
    Ok(GradientReport::from_terms(first, second, q_value))
}

/// Classical relative entropy or Petz–Tsallis value between distributions.
pub fn classical_divergence(r: &[f64], p: &[f64], obj: Objective) -> Result<f64> {
    obj.validate()?;
    check_distribution(r)?;
    if r.len() != p.len() {
        return Err(Error::Dimension(format!("{} vs {}", r.len(), p.len())));
    }
    if r.iter().zip(p).any(|(a, b)| *a > 0.0 && *b <= SUPPORT_GUARD) {
        return Err(Error::Support("model assigns no weight where the target has mass".into()));
    }
    Ok(match obj {
        Objective::Umegaki => r.iter().zip(p).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).ln()).sum(),
        Objective::PetzTsallis(q) => {
            let s: f64 = r.iter().zip(p).filter(|(a, _)| **a > 0.0).map(|(a, b)| a.powf(q) * b.powf(1.0 - q)).sum();
            (s - 1.0) / (q - 1.0)
        }
    })
}

/// `Λ_x = Υ(σ_v^{−1/2} p_x σ_v^x σ_v^{−1/2})`.
pub fn pgm_povm(qc: &QcModel) -> Result<Povm> {
    let spec = qc.sigma_v_spectrum();
    if spec.min() <= SUPPORT_GUARD {
        return Err(Error::Support(format!("λ_min(σ_v) = {:.3e} is below {SUPPORT_GUARD:e}", spec.min())));
    }
    let elements = qc
        .branches
        .iter()
        .map(|br| visible_weight(spec, &br.state.op().scale(br.p), 1.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(Povm { elements })
}

pub fn povm_probs(povm: &Povm, rho: &QuantumState) -> Result<Vec<f64>> {
    povm.elements.iter().map(|e| trace_product(e, rho.op())).collect()
}

/// How the hidden or visible side of a restricted machine is treated.
#[derive(Clone, Debug)]
pub enum RestrictedKind {
    FullyQuantum,
    /// Hidden operators commute and are diagonal in this basis.
    Qc(CMatrix),
    /// Visible operators commute and are diagonal in this basis.
    Cq(CMatrix),
}

/// Gradients of a restricted machine in its own `(a, b, w)` shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedGrads {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<Vec<f64>>,
}

pub fn restricted_grads(
    kind: &RestrictedKind,
    spec: &RestrictedSpec,
    target: &Target,
    obj: Objective,
) -> Result<RestrictedGrads> {
    let h = restricted_to_param(spec)?;
    let report = match (kind, target) {
        (RestrictedKind::FullyQuantum, Target::State(rho)) => grad(&thermalize(&h)?, rho, obj)?,
        (RestrictedKind::Qc(basis), Target::State(rho)) => grad_qc(&qc_decompose(&h, basis)?, rho, obj)?,
        (RestrictedKind::Cq(basis), Target::Distribution(r)) => grad_cq(&cq_decompose(&h, basis)?, r, obj)?,
        (RestrictedKind::Cq(_), _) => return Err(Error::InvalidInput("cq machines take a distribution target".into())),
        _ => return Err(Error::InvalidInput("quantum visible units take a density-matrix target".into())),
    };
    let (a, b, w) = spec.unpack(&report.values);
    Ok(RestrictedGrads { a, b, w })
}

/// `D(q‖p_θ)` for a classical machine's visible marginal.
pub fn classical_objective(bm: &ClassicalBm, target: &[f64], obj: Objective) -> Result<f64> {
    classical_divergence(target, &bm.marginal(), obj)
}

/// `Σ q(v) p_θ(h|v) G_j(v,h) − Σ p_θ(v,h) G_j(v,h)` by enumeration.
pub fn classical_gradient(bm: &ClassicalBm, target: &[f64]) -> Result<Vec<f64>> {
    check_distribution(target)?;
    if target.len() != bm.d_v {
        return Err(Error::Dimension(format!("target has {} entries, expected {}", target.len(), bm.d_v)));
    }
    let p = bm.joint();
    let pv = bm.marginal();
    let dh = bm.d_h;
    Ok(bm
        .tables
        .iter()
        .map(|t| {
            let mut data = 0.0;
            for v in 0..bm.d_v {
                if target[v] == 0.0 {
                    continue;
                }
                let cond: f64 = (0..dh).map(|h| p[v * dh + h] * t[v * dh + h]).sum();
                data += target[v] * cond / pv[v];
            }
            let model: f64 = p.iter().zip(t).map(|(a, b)| a * b).sum();
            data - model
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{pauli, BipartiteDims};
    use crate::model::ParamHamiltonian;

    #[test]
    fn diagonal_qubit_relative_entropy() {
        let rho = QuantumState::diagonal(&[0.9, 0.1]).unwrap();
        let sigma = QuantumState::diagonal(&[0.5, 0.5]).unwrap();
        let d = relative_entropy(&rho, &sigma, Objective::Umegaki).unwrap();
        let expect = 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln();
        assert!((d - expect).abs() < 1e-14);
        assert!((d - 0.368).abs() < 1e-3);
        assert!(relative_entropy(&rho, &rho, Objective::Umegaki).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rank_deficient_model_is_rejected() {
        let rho = QuantumState::diagonal(&[0.5, 0.5]).unwrap();
        let sigma = QuantumState::diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(relative_entropy(&rho, &sigma, Objective::Umegaki), Err(Error::Support(_))));
    }

    #[test]
    fn one_qubit_gradient_closed_form() {
        let dims = BipartiteDims::new(2, 1).unwrap();
        let h = ParamHamiltonian::new(dims, vec![pauli("Z").unwrap()], vec![0.0]).unwrap();
        let m = thermalize(&h).unwrap();
        let rho = QuantumState::diagonal(&[1.0, 0.0]).unwrap();
        let g = grad(&m, &rho, Objective::Umegaki).unwrap();
        assert!((g.values[0] - 1.0).abs() < 1e-14);
        assert!(g.second_terms[0].abs() < 1e-15);
    }

    #[test]
    fn q_range_checked() {
        for q in [0.0, 1.0, 2.5, -0.5] {
            assert!(Objective::PetzTsallis(q).validate().is_err());
        }
        assert!(Objective::PetzTsallis(2.0).validate().is_ok());
    }

    #[test]
    fn classical_no_hidden_reduction() {
        let bm = ClassicalBm::new(3, 1, vec![vec![0.3, -1.0, 0.5]], vec![0.7]).unwrap();
        let q = [0.2, 0.5, 0.3];
        let g = classical_gradient(&bm, &q).unwrap();
        let p = bm.marginal();
        let expect: f64 = (0..3).map(|v| (q[v] - p[v]) * bm.tables[0][v]).sum();
        assert!((g[0] - expect).abs() < 1e-15);
    }
}
