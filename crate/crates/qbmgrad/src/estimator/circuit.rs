//! The swap-test circuit on registers `c v₁ a₁ a₂ v₂ h`.
//!
//! Two evaluators share one set of precomputed spectra: a full density-matrix
//! simulation of every register, and a contracted form of the same outcome
//! distribution that only touches `v₂h`-sized matrices and is used for
//! shots.

use num_complex::Complex64;
use rand::Rng;

use super::encoding::{dilate, inv_sqrt_encoding, modular_flow, BlockEncoding};
use crate::densities::SeededSampler;
use crate::error::{Error, Result};
use crate::hermitian::{eigh, kron, CMatrix, HermitianOperator, QuantumState, SpectralDecomposition, MAX_DIM};
use crate::model::ThermalModel;

/// One sample of the estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotRecord {
    /// Modular time drawn from the logistic density.
    pub s: f64,
    /// Hamiltonian time drawn from the high-peak tent.
    pub t: f64,
    /// Control-qubit outcome in the X basis.
    pub z: u8,
    /// Eigenvalue of `G_j` observed; zero when the ancillas fail.
    pub g: f64,
    /// `(−1)^z g`, or zero when the ancillas fail.
    pub y: f64,
    /// Whether both ancillas returned `|0⟩`.
    pub accepted: bool,
}

/// A joint outcome of the control qubit, ancillas and `G_j` measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub z: u8,
    pub g: f64,
    pub accepted: bool,
    pub prob: f64,
}

impl Outcome {
    pub fn y(&self) -> f64 {
        if !self.accepted {
            return 0.0;
        }
        if self.z == 0 {
            self.g
        } else {
            -self.g
        }
    }
}

/// Precomputed data for one `(model, ρ, G_j)` triple.
#[derive(Clone, Debug)]
pub struct Circuit {
    dv: usize,
    dh: usize,
    kappa: f64,
    sigma_v: SpectralDecomposition,
    sigma_vh: CMatrix,
    sigma_h: CMatrix,
    g_spec: SpectralDecomposition,
    rho: CMatrix,
    rho_eig: CMatrix,
    gj_eig: CMatrix,
    g_values: Vec<f64>,
    proj_eig: Vec<CMatrix>,
    p_g: Vec<f64>,
    fail: (f64, f64),
    g_norm: f64,
}

/// Groups eigenvalues of `gj` closer than `1e-9·max(1,‖G_j‖)`.
fn spectral_projectors(gj: &HermitianOperator) -> Result<(Vec<f64>, Vec<CMatrix>)> {
    let s = eigh(gj)?;
    let scale = s.min().abs().max(s.max().abs()).max(1.0);
    let n = s.dim();
    let mut values = Vec::new();
    let mut projs: Vec<CMatrix> = Vec::new();
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && s.values[end] - s.values[k] < 1e-9 * scale {
            end += 1;
        }
        let cols = s.vectors.columns(k, end - k);
        projs.push(&cols * cols.adjoint());
        values.push(s.values[k..end].iter().sum::<f64>() / (end - k) as f64);
        k = end;
    }
    Ok((values, projs))
}

impl Circuit {
    pub fn new(model: &ThermalModel, rho: &QuantumState, gj: &HermitianOperator) -> Result<Self> {
        let dims = model.dims();
        let (dv, dh) = (dims.d_v, dims.d_h);
        if rho.dim() != dv || gj.dim() != dims.total() {
            return Err(Error::Dimension("ρ must act on v and G_j on vh".into()));
        }
        let total = 2 * dv * 4 * dv * dh;
        if total > MAX_DIM {
            return Err(Error::Dimension(format!("circuit registers need dimension {total} > {MAX_DIM}")));
        }
        let sigma_v = model.sigma_v_spectrum().clone();
        if sigma_v.min() <= crate::gradients::SUPPORT_GUARD {
            return Err(Error::Support(format!("λ_min(σ_v) = {:.3e}", sigma_v.min())));
        }
        let kappa = model.kappa();
        let g_spec = model.g_spectrum().clone();
        let (g_values, projs) = spectral_projectors(gj)?;
        let sigma_vh = model.sigma_vh().matrix().clone();
        let p_g = projs.iter().map(|p| (p * &sigma_vh).trace().re).collect();
        let proj_eig = projs.iter().map(|p| g_spec.to_eigenbasis(p)).collect();
        let rho_eig = sigma_v.to_eigenbasis(rho.matrix());
        // the second ancilla fails with S₂ = √(I − σ⁻¹/κ), diagonal with σ
        let (mut tr_f, mut tr_fs) = (0.0, 0.0);
        for (k, &a) in sigma_v.values.iter().enumerate() {
            let s2 = (1.0 - 1.0 / (kappa * a)).max(0.0);
            tr_f += s2 * rho_eig[(k, k)].re;
            tr_fs += s2 * rho_eig[(k, k)].re * a;
        }
        let g_norm = g_values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(Self {
            dv,
            dh,
            kappa,
            sigma_v,
            sigma_h: model.sigma_h().into_matrix(),
            sigma_vh,
            gj_eig: g_spec.to_eigenbasis(gj.matrix()),
            g_spec,
            rho: rho.matrix().clone(),
            rho_eig,
            g_values,
            proj_eig,
            p_g,
            fail: (tr_f, tr_fs),
            g_norm,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `‖G_j‖`, the largest outcome magnitude.
    pub fn g_norm(&self) -> f64 {
        self.g_norm
    }

    /// Distinct eigenvalues of `G_j` and their probabilities in `σ_vh`.
    pub fn thermal_outcomes(&self) -> (&[f64], &[f64]) {
        (&self.g_values, &self.p_g)
    }

    /// `Σ_n w_n e^{iGt_n} G_j e^{−iGt_n}` in the standard basis.
    pub fn observable_mixture(&self, rule: &[(f64, f64)]) -> CMatrix {
        let lam = &self.g_spec.values;
        let n = lam.len();
        let mut o = CMatrix::zeros(n, n);
        for k in 0..n {
            for l in 0..n {
                let w = lam[k] - lam[l];
                let f: Complex64 = rule.iter().map(|&(t, wt)| Complex64::from_polar(wt, w * t)).sum();
                o[(k, l)] = self.gj_eig[(k, l)] * f;
            }
        }
        self.g_spec.from_eigenbasis(&o)
    }

    /// `e^{iGt} G_j e^{−iGt}`.
    pub fn observable(&self, t: f64) -> CMatrix {
        self.observable_mixture(&[(t, 1.0)])
    }

    /// State of `v₁a₁a₂` after both encodings act on `ρ ⊗ |00⟩⟨00|`.
    pub fn front_state(&self, enc1: &BlockEncoding, enc2: &BlockEncoding) -> Result<CMatrix> {
        let dv = self.dv;
        for e in [enc1, enc2] {
            if e.ancillas != 1 || e.system_dim() != dv {
                return Err(Error::Dimension("circuit encodings need one ancilla on the visible register".into()));
            }
        }
        let n = 4 * dv;
        let idx = |v: usize, a1: usize, a2: usize| (v * 2 + a1) * 2 + a2;
        let mut e1 = CMatrix::zeros(n, n);
        let mut e2 = CMatrix::zeros(n, n);
        for v in 0..dv {
            for w in 0..dv {
                for a in 0..2 {
                    for b in 0..2 {
                        for other in 0..2 {
                            e1[(idx(v, a, other), idx(w, b, other))] = enc1.unitary[(a * dv + v, b * dv + w)];
                            e2[(idx(v, other, a), idx(w, other, b))] = enc2.unitary[(a * dv + v, b * dv + w)];
                        }
                    }
                }
            }
        }
        let mut w0 = CMatrix::zeros(n, n);
        for v in 0..dv {
            for w in 0..dv {
                w0[(idx(v, 0, 0), idx(w, 0, 0))] = self.rho[(v, w)];
            }
        }
        let u = e2 * e1;
        Ok(&u * w0 * u.adjoint())
    }

    /// The exact encodings used at modular time `s`.
    pub fn exact_encodings(&self, model: &ThermalModel, s: f64) -> Result<(BlockEncoding, BlockEncoding)> {
        Ok((dilate(&modular_flow(model, s)?, 1.0)?, inv_sqrt_encoding(model)?))
    }

    fn front_state_exact(&self, s: f64) -> Result<CMatrix> {
        let phases = |l: f64| -0.5 * s * l.ln();
        let c1 = crate::hermitian::phase_unitary(&self.sigma_v, phases);
        let c2 = {
            let mut m = self.sigma_v.vectors.clone();
            for (j, &l) in self.sigma_v.values.iter().enumerate() {
                let f = Complex64::new(1.0 / (l * self.kappa).sqrt(), 0.0);
                for x in m.column_mut(j).iter_mut() {
                    *x *= f;
                }
            }
            m * self.sigma_v.vectors.adjoint()
        };
        let e1 = dilate(&c1, 1.0)?;
        let e2 = dilate(&c2, self.kappa.sqrt())?;
        self.front_state(&e1, &e2)
    }

    /// Full register state after the controlled swap, indexed
    /// `((((c·d_v + v₁)·2 + a₁)·2 + a₂)·d_v + v₂)·d_h + h`.
    pub fn register_state(&self, front: &CMatrix) -> CMatrix {
        let (dv, dh) = (self.dv, self.dh);
        let omega = kron(front, &self.sigma_vh);
        let half = omega.nrows();
        let n = 2 * half;
        let swap = |i: usize| -> usize {
            let c = i / half;
            if c == 0 {
                return i;
            }
            let r = i % half;
            let h = r % dh;
            let v2 = (r / dh) % dv;
            let a = (r / (dh * dv)) % 4;
            let v1 = r / (dh * dv * 4);
            half + ((v2 * 4 + a) * dv + v1) * dh + h
        };
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            let pi = swap(i);
            for j in 0..n {
                out[(pi, swap(j))] = omega[(i % half, j % half)] * 0.5;
            }
        }
        out
    }

    /// `Σ_{c,c'} P[c,c'] Σ_{v₁, a∈anc, k,l} Π[k,l] Ψ[(c',v₁,a,l),(c,v₁,a,k)]`.
    fn register_trace(&self, state: &CMatrix, pc: [[f64; 2]; 2], ancillas: &[usize], pi: &CMatrix) -> f64 {
        let (dv, dh) = (self.dv, self.dh);
        let blk = dv * dh;
        let half = 4 * dv * blk;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..2 {
            for cp in 0..2 {
                let wc = pc[c][cp];
                if wc == 0.0 {
                    continue;
                }
                for v1 in 0..dv {
                    for &a in ancillas {
                        let base = (v1 * 4 + a) * blk;
                        for k in 0..blk {
                            for l in 0..blk {
                                let p = pi[(k, l)];
                                if p.norm() == 0.0 {
                                    continue;
                                }
                                acc += p * state[(cp * half + base + l, c * half + base + k)] * wc;
                            }
                        }
                    }
                }
            }
        }
        acc.re
    }

    /// `(α₁α₂)² ⟨X_c ⊗ I ⊗ |00⟩⟨00| ⊗ O⟩` on the simulated registers.
    pub fn register_expectation(&self, front: &CMatrix, observable: &CMatrix, alpha_sq: f64) -> f64 {
        let state = self.register_state(front);
        alpha_sq * self.register_trace(&state, [[0.0, 1.0], [1.0, 0.0]], &[0], observable)
    }

    /// Circuit expectation at fixed `(s, t)` by full register simulation.
    pub fn expectation(&self, s: f64, t: f64) -> Result<f64> {
        let front = self.front_state_exact(s)?;
        Ok(self.register_expectation(&front, &self.observable(t), self.kappa))
    }

    /// Register simulation with `s` and `t` drawn from quadrature rules;
    /// by linearity this equals the rule-weighted average of
    /// [`Circuit::expectation`].
    pub fn averaged_expectation(&self, s_rule: &[(f64, f64)], t_rule: &[(f64, f64)]) -> Result<f64> {
        let n = 4 * self.dv;
        let mut front = CMatrix::zeros(n, n);
        for &(s, w) in s_rule {
            front += self.front_state_exact(s)?.scale(w);
        }
        Ok(self.register_expectation(&front, &self.observable_mixture(t_rule), self.kappa))
    }

    /// Outcome distribution from the simulated registers.
    pub fn register_outcomes(&self, front: &CMatrix, t: f64) -> Vec<Outcome> {
        let state = self.register_state(front);
        let plus = [[0.5, 0.5], [0.5, 0.5]];
        let minus = [[0.5, -0.5], [-0.5, 0.5]];
        let lam = &self.g_spec.values;
        let mut out = Vec::new();
        for (z, pc) in [(0u8, plus), (1u8, minus)] {
            for (gi, &g) in self.g_values.iter().enumerate() {
                let mut pe = self.proj_eig[gi].clone();
                for k in 0..lam.len() {
                    for l in 0..lam.len() {
                        pe[(k, l)] *= Complex64::from_polar(1.0, (lam[k] - lam[l]) * t);
                    }
                }
                let pi = self.g_spec.from_eigenbasis(&pe);
                out.push(Outcome { z, g, accepted: true, prob: self.register_trace(&state, pc, &[0], &pi) });
            }
            let eye = CMatrix::identity(self.dv * self.dh, self.dv * self.dh);
            out.push(Outcome { z, g: 0.0, accepted: false, prob: self.register_trace(&state, pc, &[1, 2, 3], &eye) });
        }
        out
    }

    /// `K/κ = σ^{−1/2}σ^{−is/2}ρσ^{is/2}σ^{−1/2}/κ`.
    fn k_over_kappa(&self, s: f64) -> CMatrix {
        let a = &self.sigma_v.values;
        let n = a.len();
        let mut k = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let c = 1.0 / (self.kappa * (a[i] * a[j]).sqrt());
                let ph = -0.5 * s * (a[i].ln() - a[j].ln());
                k[(i, j)] = self.rho_eig[(i, j)] * Complex64::from_polar(c, ph);
            }
        }
        self.sigma_v.from_eigenbasis(&k)
    }

    /// Exact outcome distribution at `(s, t)` in contracted form.
    pub fn outcomes(&self, s: f64, t: f64) -> Vec<Outcome> {
        let kq = self.k_over_kappa(s);
        let tr_k = kq.trace().re;
        let lifted = kron(&kq, &CMatrix::identity(self.dh, self.dh));
        let anti = &lifted * &self.sigma_vh + &self.sigma_vh * &lifted;
        let prod = kron(&kq, &self.sigma_h);
        let lam = &self.g_spec.values;
        let rotate = |m: &CMatrix| {
            let mut e = self.g_spec.to_eigenbasis(m);
            for k in 0..lam.len() {
                for l in 0..lam.len() {
                    e[(k, l)] *= Complex64::from_polar(1.0, -(lam[k] - lam[l]) * t);
                }
            }
            e
        };
        let (anti_e, prod_e) = (rotate(&anti), rotate(&prod));
        let tr_with = |p: &CMatrix, m: &CMatrix| -> f64 { p.iter().zip(m.transpose().iter()).map(|(x, y)| (x * y).re).sum() };
        let mut out = Vec::with_capacity(2 * self.g_values.len() + 2);
        for z in 0..2u8 {
            let sign = if z == 0 { 1.0 } else { -1.0 };
            for (gi, &g) in self.g_values.iter().enumerate() {
                let p = &self.proj_eig[gi];
                let prob = 0.25 * (tr_k * self.p_g[gi] + tr_with(p, &prod_e) + sign * tr_with(p, &anti_e));
                out.push(Outcome { z, g, accepted: true, prob });
            }
            out.push(Outcome { z, g: 0.0, accepted: false, prob: 0.5 * (self.fail.0 + sign * self.fail.1) });
        }
        out
    }

    /// One estimator shot: draw `(s, t)`, then a joint outcome.
    pub fn sample<R: Rng>(
        &self,
        sampler_s: &mut SeededSampler,
        sampler_t: &mut SeededSampler,
        rng: &mut R,
    ) -> Result<ShotRecord> {
        let s = sampler_s.sample();
        let t = sampler_t.sample();
        let mut outs = self.outcomes(s, t);
        let mut total = 0.0;
        for o in outs.iter_mut() {
            if o.prob < -1e-10 {
                return Err(Error::Numerical(format!("outcome probability {:.3e}", o.prob)));
            }
            o.prob = o.prob.max(0.0);
            total += o.prob;
        }
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Numerical(format!("outcome mass defect {:.3e}", total - 1.0)));
        }
        let mut u = rng.random::<f64>() * total;
        let mut pick = outs[outs.len() - 1];
        for o in &outs {
            if u < o.prob {
                pick = *o;
                break;
            }
            u -= o.prob;
        }
        Ok(ShotRecord { s, t, z: pick.z, g: pick.g, y: pick.y(), accepted: pick.accepted })
    }
}

/// `κ⟨X_c ⊗ O⟩` of the circuit at `(s, t)` by register simulation.
pub fn circuit_expectation(model: &ThermalModel, rho: &QuantumState, gj: &HermitianOperator, s: f64, t: f64) -> Result<f64> {
    Circuit::new(model, rho, gj)?.expectation(s, t)
}

/// One shot of the estimator for `G_j`.
pub fn shot_sample<R: Rng>(
    model: &ThermalModel,
    rho: &QuantumState,
    gj: &HermitianOperator,
    sampler_s: &mut SeededSampler,
    sampler_t: &mut SeededSampler,
    rng: &mut R,
) -> Result<ShotRecord> {
    Circuit::new(model, rho, gj)?.sample(sampler_s, sampler_t, rng)
}
