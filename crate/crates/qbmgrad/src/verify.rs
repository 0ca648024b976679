//! Seeded self-checks grouped into suites, each reporting a residual
//! against a tolerance.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::calculus::{
    apply_channel, frechet_exp, frechet_log, frechet_power, thermal_derivative, ChannelKind, EvalMode, ExpForm, LogForm,
};
use crate::densities::{
    cdf, fourier_transform, quadrature_rule, tail_mass, tail_mass_bound, verify_contour_lemma, Density, SeededSampler,
};
use crate::error::{Error, Result};
use crate::estimator::{
    be_product, budget_split, dilate, error_budget, estimate_first_term_with, first_term_with_blocks, hoeffding_shots,
    inv_sqrt_block, inv_sqrt_encoding, modular_flow, modular_unitary, perturbation_trial, time_rules, Circuit,
    EstimatorConfig,
};
use crate::gradients::{classical_gradient, grad, grad_cq, grad_qc, Objective, Target};
use crate::hermitian::{eigh, matrix_function, op_norm, BipartiteDims, CMatrix, HermitianOperator, QuantumState};
use crate::model::{cq_decompose, identity_basis, qc_decompose, thermalize};
use crate::random::{self, Rand};
use crate::trainer::{finite_diff_gradient, Machine};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Matcalc,
    Densities,
    Gradients,
    Estimator,
    All,
}

impl Suite {
    pub const PARTS: [Suite; 4] = [Suite::Matcalc, Suite::Densities, Suite::Gradients, Suite::Estimator];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "matcalc" => Suite::Matcalc,
            "densities" => Suite::Densities,
            "gradients" => Suite::Gradients,
            "estimator" => Suite::Estimator,
            "all" => Suite::All,
            _ => return Err(Error::InvalidInput(format!("unknown suite {s:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Matcalc => "matcalc",
            Suite::Densities => "densities",
            Suite::Gradients => "gradients",
            Suite::Estimator => "estimator",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
    pub max_residual: f64,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

struct Checks {
    suite: Suite,
    out: Vec<Check>,
}

impl Checks {
    fn push(&mut self, name: &str, residual: f64, tolerance: f64) {
        self.out.push(Check {
            suite: self.suite,
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        });
    }
}

fn max_diff(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    a.max_abs_diff(b)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn positive(d: usize, rng: &mut Rand) -> HermitianOperator {
    let s = random::state(d, d, rng);
    s.op().add(&HermitianOperator::identity(d).scale(0.05))
}

fn matcalc(c: &mut Checks) -> Result<()> {
    let mut rng = random::rng(101);
    let b = random::hermitian(4, 3.0, &mut rng);
    let h = random::hermitian(4, 1.0, &mut rng);
    let a = positive(4, &mut rng);
    let sb = eigh(&b)?;
    let sa = eigh(&a)?;
    let quad = EvalMode::quadrature_default();
    for (name, kind, anchor) in [
        ("exp-tent channel spectral vs quadrature", ChannelKind::ExpTent, &sb),
        ("log-logistic channel spectral vs quadrature", ChannelKind::LogLogistic, &sa),
        ("power channel r=0.5 spectral vs quadrature", ChannelKind::PowerBeta(0.5), &sa),
        ("power channel r=-0.5 spectral vs quadrature", ChannelKind::PowerBeta(-0.5), &sa),
    ] {
        let x = apply_channel(kind, anchor, &h, EvalMode::Spectral)?;
        let y = apply_channel(kind, anchor, &h, quad)?;
        c.push(name, max_diff(&x, &y), 1e-8);
    }
    let id = apply_channel(ChannelKind::PowerBeta(-1.0), &sa, &h, EvalMode::Spectral)?;
    c.push("power channel r=-1 is the identity", max_diff(&id, &h), 1e-12);
    let unital = apply_channel(ChannelKind::ExpTent, &sb, &HermitianOperator::identity(4), EvalMode::Spectral)?;
    c.push("channels are unital", max_diff(&unital, &HermitianOperator::identity(4)), 1e-12);
    let d1 = frechet_exp(&b, &h, ExpForm::Duhamel)?;
    let d2 = frechet_exp(&b, &h, ExpForm::Fourier)?;
    c.push("exp derivative Duhamel vs Fourier", max_diff(&d1, &d2), 1e-8);
    let step = 1e-5;
    let fd = |f: &dyn Fn(&HermitianOperator) -> Result<HermitianOperator>, x: &HermitianOperator| -> Result<HermitianOperator> {
        let up = f(&x.add(&h.scale(step)))?;
        let down = f(&x.sub(&h.scale(step)))?;
        Ok(up.sub(&down).scale(0.5 / step))
    };
    let exp = |x: &HermitianOperator| matrix_function(&eigh(x)?, f64::exp);
    c.push("exp derivative vs central difference", max_diff(&d2, &fd(&exp, &b)?) / op_norm(d2.matrix()), 1e-6);
    let l1 = frechet_log(&a, &h, LogForm::Fourier)?;
    let l2 = frechet_log(&a, &h, LogForm::Resolvent)?;
    c.push("log derivative Fourier vs resolvent", max_diff(&l1, &l2), 1e-8);
    let ln = |x: &HermitianOperator| matrix_function(&eigh(x)?, f64::ln);
    c.push("log derivative vs central difference", max_diff(&l1, &fd(&ln, &a)?) / op_norm(l1.matrix()), 1e-6);
    let p = frechet_power(&a, &h, 0.5)?;
    let sqrt = |x: &HermitianOperator| matrix_function(&eigh(x)?, f64::sqrt);
    c.push("square-root derivative vs central difference", max_diff(&p, &fd(&sqrt, &a)?) / op_norm(p.matrix()), 1e-6);
    let td = thermal_derivative(&sb, &h)?;
    let gibbs = |x: &HermitianOperator| -> Result<HermitianOperator> {
        let e = matrix_function(&eigh(x)?, |l| (-l).exp())?;
        Ok(e.scale(1.0 / e.trace()))
    };
    c.push("thermal-state derivative vs central difference", max_diff(&td, &fd(&gibbs, &b)?) / op_norm(td.matrix()), 1e-6);
    Ok(())
}

fn ks_statistic(d: Density, n: usize, seed: u64) -> Result<f64> {
    let mut s = SeededSampler::new(d, seed)?;
    let mut xs: Vec<f64> = (0..n).map(|_| s.sample()).collect();
    xs.sort_by(f64::total_cmp);
    let mut worst: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(d, *x)?;
        worst = worst.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
    }
    Ok(worst)
}

fn densities(c: &mut Checks) -> Result<()> {
    for (name, d) in [
        ("high-peak tent has unit mass", Density::HighPeakTent),
        ("logistic has unit mass", Density::Logistic),
        ("beta r=0.5 has unit mass", Density::BetaR(0.5)),
        ("beta r=-0.5 has unit mass", Density::BetaR(-0.5)),
    ] {
        let m: f64 = quadrature_rule(d, 12.0, 4096)?.iter().map(|x| x.1).sum();
        c.push(name, (m - 1.0).abs(), 1e-10);
    }
    let mut worst = [0.0f64; 3];
    for w in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let f = fourier_transform(Density::HighPeakTent, w, 10.0, 4096)?;
        worst[0] = worst[0].max((f - (w / 2.0).tanh() / (w / 2.0)).abs());
        let f = fourier_transform(Density::Logistic, w / 2.0, 10.0, 4096)?;
        worst[1] = worst[1].max((f - (w / 2.0) / (w / 2.0).sinh()).abs());
        let r = 0.5;
        let f = fourier_transform(Density::BetaR(r), w / 2.0, 10.0, 4096)?;
        worst[2] = worst[2].max((f - (r * w / 2.0).sinh() / (r * (w / 2.0).sinh())).abs());
    }
    c.push("high-peak tent transform is tanh(x/2)/(x/2)", worst[0], 1e-8);
    c.push("logistic transform is (x/2)/sinh(x/2)", worst[1], 1e-8);
    c.push("beta transform is sinh(rx/2)/(r sinh(x/2))", worst[2], 1e-8);
    let mut lemma: f64 = 0.0;
    for r in [-0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 0.9] {
        for u in [0.0, 0.5, 1.0, 2.0, 5.0] {
            lemma = lemma.max(verify_contour_lemma(r, u)?);
        }
    }
    c.push("contour lemma on the r×u grid", lemma, 1e-8);
    for (name, d) in [
        ("high-peak tent tail below its bound at T=10", Density::HighPeakTent),
        ("logistic tail below its bound at T=10", Density::Logistic),
        ("beta r=-0.5 tail below its bound at T=3", Density::BetaR(-0.5)),
    ] {
        let t = if matches!(d, Density::BetaR(_)) { 3.0 } else { 10.0 };
        let excess = tail_mass(d, t)? / tail_mass_bound(d, t)? - 1.0;
        c.push(name, excess.max(0.0), 1e-10);
    }
    for (name, d, seed) in [
        ("high-peak tent sampler KS excess over the 1% critical value", Density::HighPeakTent, 11),
        ("logistic sampler KS excess over the 1% critical value", Density::Logistic, 12),
    ] {
        let n = 20_000;
        c.push(name, (ks_statistic(d, n, seed)? - 1.63 / (n as f64).sqrt()).max(0.0), 0.0);
    }
    c.push("cdf is one half at zero", (cdf(Density::HighPeakTent, 0.0)? - 0.5).abs(), 1e-15);
    Ok(())
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(1e-3)).fold(0.0, f64::max)
}

fn gradients(c: &mut Checks) -> Result<()> {
    let mut rng = random::rng(202);
    let dims = BipartiteDims::new(4, 2)?;
    let h = random::model(dims, 4, 1.0, &mut rng)?;
    let rho = random::state(4, 4, &mut rng);
    let machine = Machine::Generic(h.clone());
    let target = Target::State(rho.clone());
    for (name, obj) in [
        ("umegaki gradient vs central difference", Objective::Umegaki),
        ("petz-tsallis q=0.5 gradient vs central difference", Objective::PetzTsallis(0.5)),
        ("petz-tsallis q=1.5 gradient vs central difference", Objective::PetzTsallis(1.5)),
        ("petz-tsallis q=2 gradient vs central difference", Objective::PetzTsallis(2.0)),
    ] {
        let g = machine.gradient(&target, obj)?;
        let fd = finite_diff_gradient(&machine, &target, obj, 1e-5)?;
        c.push(name, rel(&g.values, &fd), 1e-6);
    }
    let model = thermalize(&h)?;
    let u = grad(&model, &rho, Objective::Umegaki)?;
    let near = grad(&model, &rho, Objective::PetzTsallis(1.0 + 1e-4))?;
    c.push("petz-tsallis tends to umegaki as q→1", rel(&u.values, &near.values), 1e-3);
    let fixed = grad(&model, model.sigma_v(), Objective::Umegaki)?;
    c.push("gradient vanishes at the model's own state", fixed.norm(), 1e-10);
    let hb = identity_basis(2);
    let qh = random::qc_model(dims, 3, 1.0, &hb, &mut rng)?;
    let a = grad_qc(&qc_decompose(&qh, &hb)?, &rho, Objective::Umegaki)?;
    let b = grad(&thermalize(&qh)?, &rho, Objective::Umegaki)?;
    c.push("quantum-classical gradient matches the generic one", rel(&a.values, &b.values), 1e-8);
    let vb = random::unitary(4, &mut rng);
    let ch = random::cq_model(dims, 3, 1.0, &vb, &mut rng)?;
    let cq = cq_decompose(&ch, &vb)?;
    let r = random::distribution(4, &mut rng);
    let a = grad_cq(&cq, &r, Objective::Umegaki)?;
    let b = grad(&thermalize(&ch)?, &cq.target_state(&r)?, Objective::Umegaki)?;
    c.push("classical-quantum gradient matches the generic one", rel(&a.values, &b.values), 1e-8);
    let vis = random::model(BipartiteDims::new(4, 1)?, 3, 1.0, &mut rng)?;
    let vm = thermalize(&vis)?;
    let g = grad(&vm, &rho, Objective::Umegaki)?;
    let direct: Vec<f64> =
        vm.terms().iter().map(|t| crate::hermitian::expectation(t, &rho)).collect::<Result<Vec<_>>>()?;
    c.push("without hidden units the first term is ⟨G_j⟩_ρ", rel(&g.first_terms, &direct), 1e-8);
    let bm = random::classical(4, 2, 3, 1.0, &mut rng)?;
    let cg = classical_gradient(&bm, &r)?;
    let qg = grad(&thermalize(&bm.to_quantum()?)?, &QuantumState::diagonal(&r)?, Objective::Umegaki)?;
    c.push("diagonal machines reduce to the classical gradient", rel(&cg, &qg.values), 1e-10);
    let sig = crate::gradients::sigma_map(&model, rho.op(), 1.0)?;
    c.push("the gradient map preserves trace", (sig.op.trace() - 1.0).abs(), 1e-10);
    Ok(())
}

fn estimator(c: &mut Checks) -> Result<()> {
    let mut rng = random::rng(303);
    let contraction = random::contraction(4, &mut rng);
    let e = dilate(&contraction, 1.0)?;
    c.push("dilation is unitary", e.unitarity_defect(), 1e-10);
    c.push("dilation block reproduces the contraction", max_abs(&(e.block() - &contraction)), 1e-12);
    let dims = BipartiteDims::new(2, 2)?;
    let h = random::model(dims, 3, 0.8, &mut rng)?;
    let model = thermalize(&h)?;
    let rho = random::state(2, 2, &mut rng);
    let u = modular_unitary(&model, 0.7)?.block() * modular_unitary(&model, -1.9)?.block();
    c.push("modular flow group law", max_abs(&(u - modular_flow(&model, -1.2)?)), 1e-10);
    let isq = inv_sqrt_encoding(&model)?;
    let target = matrix_function(model.sigma_v_spectrum(), |l| l.powf(-0.5))?;
    c.push("inverse square root extraction", max_abs(&(isq.encoded() - target.matrix())), 1e-10);
    c.push("inverse square root normalization is √κ", (isq.alpha * isq.alpha - model.kappa()).abs(), 1e-10);
    let gj = &model.terms()[0];
    let circuit = Circuit::new(&model, &rho, gj)?;
    let (s, t) = (0.6, -0.9);
    let reg = circuit.expectation(s, t)?;
    let exact_a2 = inv_sqrt_block(&model)?.scale(model.kappa().sqrt());
    let direct = first_term_with_blocks(&circuit, &model, &rho, |x| modular_flow(&model, x), &exact_a2, &[(s, 1.0)], &[(t, 1.0)])?;
    c.push("register simulation matches the trace formula", (reg - direct).abs(), 1e-8);
    let (e1, e2) = circuit.exact_encodings(&model, s)?;
    let front = circuit.front_state(&e1, &e2)?;
    let full = circuit.register_outcomes(&front, t);
    let fast = circuit.outcomes(s, t);
    let gap = full.iter().zip(&fast).map(|(a, b)| (a.prob - b.prob).abs()).fold(0.0, f64::max);
    c.push("contracted outcome distribution matches the registers", gap, 1e-10);
    let state = circuit.register_state(&front);
    let spec = eigh(&HermitianOperator::new(state.clone())?)?;
    c.push("register state has unit trace", (state.trace().re - 1.0).abs(), 1e-9);
    c.push("register state is positive", (-spec.min()).max(0.0), 1e-9);
    let rules = time_rules()?;
    let avg = circuit.averaged_expectation(&rules.0, &rules.1)?;
    let exact = grad(&model, &rho, Objective::Umegaki)?.first_terms[0];
    c.push("averaged circuit reproduces the first gradient term", (avg - exact).abs(), 1e-6);
    let cfg = EstimatorConfig { shots: Some(100_000), ..EstimatorConfig::new(0.05, 0.05, 7) };
    let est = estimate_first_term_with(&circuit, &cfg)?;
    c.push("shot mean within 5 standard errors", (est.mean - exact).abs() / (5.0 * est.stderr), 1.0);
    c.push("Hoeffding count for κ=1, ‖G‖=1, ε=0.1, δ=0.05", (hoeffding_shots(1.0, 1.0, 0.1, 0.05) as f64 - 738.0).abs(), 0.0);
    let mut worst: f64 = 0.0;
    for kappa in [1.0, 2.0, 10.0, 1e3] {
        for g in [0.1, 1.0, 5.0] {
            for eps in [1e-3, 0.05, 0.5] {
                let (a, b) = budget_split(eps, kappa, g);
                worst = worst.max(error_budget(a, b, kappa, g) / (eps / 2.0) - 1.0);
            }
        }
    }
    c.push("budget split stays within ε/2", worst.max(0.0), 1e-12);
    let (e1, e2) = budget_split(0.05, model.kappa(), circuit.g_norm());
    let (mut excess, mut bias): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let trial = perturbation_trial(&circuit, &model, &rho, e1, e2, 1.3, &rules, &mut rng)?;
        excess = excess.max(trial.product_deviation - trial.product_bound);
        bias = bias.max(trial.bias / 0.025);
    }
    c.push("perturbed product stays within the composed error", excess.max(0.0), 1e-12);
    c.push("perturbed first-term bias within ε/2", bias, 1.0);
    let m = be_product(dilate(&contraction, 2.0)?.meta(), isq.meta());
    c.push("exact encodings compose without error", m.delta, 0.0);
    Ok(())
}

pub fn run_suite(suite: Suite) -> Result<VerifyReport> {
    let parts: Vec<Suite> = if suite == Suite::All { Suite::PARTS.to_vec() } else { vec![suite] };
    let mut checks = Vec::new();
    for p in parts {
        let mut c = Checks { suite: p, out: Vec::new() };
        match p {
            Suite::Matcalc => matcalc(&mut c)?,
            Suite::Densities => densities(&mut c)?,
            Suite::Gradients => gradients(&mut c)?,
            Suite::Estimator => estimator(&mut c)?,
            Suite::All => unreachable!(),
        }
        checks.extend(c.out);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let max_residual = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(VerifyReport { suite, passed: checks.len() - failed, failed, checks, max_residual })
}
