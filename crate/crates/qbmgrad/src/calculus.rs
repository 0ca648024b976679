//! Fréchet derivatives of the matrix exponential, logarithm and powers, and
//! the modular channels that express them.

use num_complex::Complex64;

use crate::densities::{self, Density};
use crate::error::{Error, Result};
use crate::hermitian::{eigh, matrix_function, CMatrix, HermitianOperator, SpectralDecomposition};
use crate::quad;

const DEGENERATE_GAP: f64 = 1e-10;

/// Which modular channel to apply.
///
/// `PowerBeta(-1.0)` is accepted as the endpoint of the family, where the
/// channel is the identity; it has no density and works in spectral mode only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelKind {
    /// Φ_B, anchored at a Hamiltonian, Fourier weight γ.
    ExpTent,
    /// Υ_A, anchored at a positive definite state, Fourier weight β.
    LogLogistic,
    /// Υ^r_A, anchored at a positive definite state, Fourier weight β_r.
    PowerBeta(f64),
}

impl ChannelKind {
    pub fn validate(&self) -> Result<()> {
        if let ChannelKind::PowerBeta(r) = *self {
            if !(-1.0..1.0).contains(&r) || r == 0.0 {
                return Err(Error::InvalidInput(format!("PowerBeta needs r in [-1,0)∪(0,1), got {r}")));
            }
        }
        Ok(())
    }

    fn density(&self) -> Option<Density> {
        match *self {
            ChannelKind::ExpTent => Some(Density::HighPeakTent),
            ChannelKind::LogLogistic => Some(Density::Logistic),
            ChannelKind::PowerBeta(-1.0) => None,
            ChannelKind::PowerBeta(r) => Some(Density::BetaR(r)),
        }
    }

    fn uses_log_gap(&self) -> bool {
        !matches!(self, ChannelKind::ExpTent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EvalMode {
    Spectral,
    /// Integrate the defining `t`-integral on `[-T, T]` with about `nodes`
    /// points.
    Quadrature { t_max: f64, nodes: usize },
}

impl EvalMode {
    pub fn quadrature_default() -> Self {
        EvalMode::Quadrature { t_max: 10.0, nodes: 4096 }
    }
}

/// `sinh(a)/sinh(b)` for `b > 0`, stable for large arguments.
fn sinh_ratio(a: f64, b: f64) -> f64 {
    if b < 1.0 {
        return a.sinh() / b.sinh();
    }
    let sa = a.signum();
    let aa = a.abs();
    sa * (aa - b).exp() * (-(-2.0 * aa).exp_m1()) / (-(-2.0 * b).exp_m1())
}

/// Fourier transform of the channel density at gap `u`.
pub fn channel_factor(kind: ChannelKind, u: f64) -> f64 {
    if u == 0.0 {
        return 1.0;
    }
    let h = 0.5 * u.abs();
    match kind {
        ChannelKind::ExpTent => h.tanh() / h,
        ChannelKind::LogLogistic => {
            if h > 700.0 {
                0.0
            } else {
                h / h.sinh()
            }
        }
        ChannelKind::PowerBeta(r) => sinh_ratio(r * h, h) / r,
    }
}

fn gaps(kind: ChannelKind, anchor: &SpectralDecomposition) -> Result<Vec<f64>> {
    if kind.uses_log_gap() {
        anchor
            .values
            .iter()
            .map(|&l| {
                if l > 0.0 {
                    Ok(l.ln())
                } else {
                    Err(Error::Support(format!("channel anchor has eigenvalue {l:.3e}")))
                }
            })
            .collect()
    } else {
        Ok(anchor.values.clone())
    }
}

/// Applies the channel anchored at `anchor` to `y`.
pub fn apply_channel(
    kind: ChannelKind,
    anchor: &SpectralDecomposition,
    y: &HermitianOperator,
    mode: EvalMode,
) -> Result<HermitianOperator> {
    kind.validate()?;
    if y.dim() != anchor.dim() {
        return Err(Error::Dimension(format!("channel anchor {} vs input {}", anchor.dim(), y.dim())));
    }
    let mu = gaps(kind, anchor)?;
    let n = mu.len();
    let scale = mu.iter().fold(1.0f64, |a, m| a.max(m.abs()));
    let mut yb = anchor.to_eigenbasis(y.matrix());
    match mode {
        EvalMode::Spectral => {
            for k in 0..n {
                for l in 0..n {
                    let g = mu[k] - mu[l];
                    let f = if g.abs() < DEGENERATE_GAP * scale { 1.0 } else { channel_factor(kind, g) };
                    yb[(k, l)] *= f;
                }
            }
        }
        EvalMode::Quadrature { t_max, nodes } => {
            if !(t_max > 0.0) || nodes < 64 {
                return Err(Error::InvalidInput("quadrature mode needs T > 0 and nodes ≥ 64".into()));
            }
            let Some(d) = kind.density() else {
                return Ok(y.clone());
            };
            let rule = densities::quadrature_rule(d, t_max, nodes)?;
            // e^{-iBt}(·)e^{iBt} and A^{-it/2}(·)A^{it/2} both act as phases
            // e^{-iωt} on eigenbasis entries
            let freq = if kind.uses_log_gap() { 0.5 } else { 1.0 };
            for k in 0..n {
                for l in 0..n {
                    let w = freq * (mu[k] - mu[l]);
                    let acc: Complex64 = rule.iter().map(|&(t, wt)| Complex64::from_polar(wt, -w * t)).sum();
                    yb[(k, l)] *= acc;
                }
            }
        }
    }
    Ok(HermitianOperator::symmetrized(anchor.from_eigenbasis(&yb)))
}

/// Form of the exponential derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpForm {
    /// `∫₀¹ e^{tB} H e^{(1−t)B} dt` by 64-node Gauss–Legendre.
    Duhamel,
    /// `½{Φ_B(H), e^B}`.
    Fourier,
}

/// Directional derivative of `e^B` along `H`.
pub fn frechet_exp(b: &HermitianOperator, h: &HermitianOperator, form: ExpForm) -> Result<HermitianOperator> {
    if b.dim() != h.dim() {
        return Err(Error::Dimension(format!("{} vs {}", b.dim(), h.dim())));
    }
    let sb = eigh(b)?;
    match form {
        ExpForm::Duhamel => {
            let hb = sb.to_eigenbasis(h.matrix());
            let rule = quad::gauss_legendre(64);
            let n = sb.dim();
            let mut acc = CMatrix::zeros(n, n);
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let t = 0.5 * (x + 1.0);
                for k in 0..n {
                    for l in 0..n {
                        let f = (t * sb.values[k] + (1.0 - t) * sb.values[l]).exp();
                        acc[(k, l)] += hb[(k, l)] * (0.5 * w * f);
                    }
                }
            }
            Ok(HermitianOperator::symmetrized(sb.from_eigenbasis(&acc)))
        }
        ExpForm::Fourier => {
            let phi = apply_channel(ChannelKind::ExpTent, &sb, h, EvalMode::Spectral)?;
            let e = matrix_function(&sb, f64::exp)?;
            Ok(phi.anticommutator(&e).scale(0.5))
        }
    }
}

fn positive_spectrum(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    let s = eigh(a)?;
    if s.min() <= 0.0 {
        return Err(Error::Support(format!("matrix is not positive definite (λ_min = {:.3e})", s.min())));
    }
    Ok(s)
}

/// Form of the logarithm derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogForm {
    /// `A^{-1/2} Υ_A(H) A^{-1/2}`.
    Fourier,
    /// `∫₀^∞ (A+s)^{-1} H (A+s)^{-1} ds`, integrated in `s = e^y`.
    Resolvent,
}

/// Directional derivative of `ln A` along `H` for positive definite `A`.
pub fn frechet_log(a: &HermitianOperator, h: &HermitianOperator, form: LogForm) -> Result<HermitianOperator> {
    if a.dim() != h.dim() {
        return Err(Error::Dimension(format!("{} vs {}", a.dim(), h.dim())));
    }
    let sa = positive_spectrum(a)?;
    match form {
        LogForm::Fourier => {
            let ups = apply_channel(ChannelKind::LogLogistic, &sa, h, EvalMode::Spectral)?;
            let isq = matrix_function(&sa, |x| x.powf(-0.5))?;
            Ok(ups.sandwich(&isq))
        }
        LogForm::Resolvent => {
            let hb = sa.to_eigenbasis(h.matrix());
            let n = sa.dim();
            let lo = sa.min().ln() - 40.0;
            let hi = sa.max().ln() + 40.0;
            let mut breaks = vec![lo];
            while *breaks.last().unwrap() < hi {
                let next = breaks.last().unwrap() + 0.5;
                breaks.push(next);
            }
            let rule = quad::composite(&breaks, 16);
            let mut acc = CMatrix::zeros(n, n);
            for &(y, w) in &rule {
                let s = y.exp();
                for k in 0..n {
                    for l in 0..n {
                        let f = s / ((sa.values[k] + s) * (sa.values[l] + s));
                        acc[(k, l)] += hb[(k, l)] * (w * f);
                    }
                }
            }
            Ok(HermitianOperator::symmetrized(sa.from_eigenbasis(&acc)))
        }
    }
}

/// Directional derivative of `A^r` along `H`, as
/// `r A^{(r−1)/2} Υ^r_A(H) A^{(r−1)/2}`.
pub fn frechet_power(a: &HermitianOperator, h: &HermitianOperator, r: f64) -> Result<HermitianOperator> {
    if !(r > -1.0 && r < 1.0 && r != 0.0) {
        return Err(Error::InvalidInput(format!("power derivative needs r in (-1,0)∪(0,1), got {r}")));
    }
    if a.dim() != h.dim() {
        return Err(Error::Dimension(format!("{} vs {}", a.dim(), h.dim())));
    }
    let sa = positive_spectrum(a)?;
    let ups = apply_channel(ChannelKind::PowerBeta(r), &sa, h, EvalMode::Spectral)?;
    let side = matrix_function(&sa, |x| x.powf(0.5 * (r - 1.0)))?;
    Ok(ups.sandwich(&side).scale(r))
}

/// Derivative of `σ = e^{-G}/Z` when `G` moves along `dG`:
/// `−½{Φ_G(dG), σ} + σ⟨dG⟩_σ`.
pub fn thermal_derivative(g_spec: &SpectralDecomposition, dg: &HermitianOperator) -> Result<HermitianOperator> {
    let lmin = g_spec.min();
    let sigma = matrix_function(g_spec, |x| (lmin - x).exp())?;
    let sigma = sigma.scale(1.0 / sigma.trace());
    let phi = apply_channel(ChannelKind::ExpTent, g_spec, dg, EvalMode::Spectral)?;
    let mean = crate::hermitian::trace_product(dg, &sigma)?;
    Ok(phi.anticommutator(&sigma).scale(-0.5).add(&sigma.scale(mean)))
}
