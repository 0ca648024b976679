//! Block-encodings realized as exact unitary dilations, and their
//! composition rule.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{op_norm, phase_unitary, CMatrix};
use crate::model::ThermalModel;

/// A unitary whose top-left block, scaled by `alpha`, approximates a target
/// to within `delta` in spectral norm.
///
/// Ancilla qubits are the most significant index: row `a·d + i` is ancilla
/// basis state `a`, system index `i`.
#[derive(Clone, Debug)]
pub struct BlockEncoding {
    pub unitary: CMatrix,
    pub alpha: f64,
    pub ancillas: usize,
    pub delta: f64,
}

/// Normalization, ancilla count and declared error of an encoding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodingMeta {
    pub alpha: f64,
    pub ancillas: usize,
    pub delta: f64,
}

impl BlockEncoding {
    pub fn system_dim(&self) -> usize {
        self.unitary.nrows() >> self.ancillas
    }

    /// `(⟨a|⊗I) U (|b⟩⊗I)`.
    pub fn block_at(&self, a: usize, b: usize) -> CMatrix {
        let d = self.system_dim();
        self.unitary.view((a * d, b * d), (d, d)).into_owned()
    }

    /// `(⟨0|⊗I) U (|0⟩⊗I)`.
    pub fn block(&self) -> CMatrix {
        self.block_at(0, 0)
    }

    /// `α` times the top-left block.
    pub fn encoded(&self) -> CMatrix {
        self.block().scale(self.alpha)
    }

    pub fn meta(&self) -> EncodingMeta {
        EncodingMeta { alpha: self.alpha, ancillas: self.ancillas, delta: self.delta }
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.unitary.nrows();
        (self.unitary.adjoint() * &self.unitary - CMatrix::identity(n, n)).iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// Encoding of `self.encoded() · rhs.encoded()`; `rhs` acts first and
    /// its ancillas are the less significant ones.
    pub fn product(&self, rhs: &BlockEncoding) -> Result<BlockEncoding> {
        let d = self.system_dim();
        if rhs.system_dim() != d {
            return Err(Error::Dimension(format!("system dims {d} and {}", rhs.system_dim())));
        }
        let (na, nb) = (1usize << self.ancillas, 1usize << rhs.ancillas);
        let n = na * nb * d;
        let idx = |a: usize, b: usize, i: usize| (a * nb + b) * d + i;
        let mut left = CMatrix::zeros(n, n);
        let mut right = CMatrix::zeros(n, n);
        for a in 0..na {
            for a2 in 0..na {
                for b in 0..nb {
                    for i in 0..d {
                        for j in 0..d {
                            left[(idx(a, b, i), idx(a2, b, j))] = self.unitary[(a * d + i, a2 * d + j)];
                        }
                    }
                }
            }
        }
        for b in 0..nb {
            for b2 in 0..nb {
                for a in 0..na {
                    for i in 0..d {
                        for j in 0..d {
                            right[(idx(a, b, i), idx(a, b2, j))] = rhs.unitary[(b * d + i, b2 * d + j)];
                        }
                    }
                }
            }
        }
        let meta = be_product(self.meta(), rhs.meta());
        Ok(BlockEncoding { unitary: left * right, alpha: meta.alpha, ancillas: meta.ancillas, delta: meta.delta })
    }
}

/// `(αβ, a+b, αε + βδ + δε)` for encodings `(α, δ)` and `(β, ε)`.
pub fn be_product(a: EncodingMeta, b: EncodingMeta) -> EncodingMeta {
    EncodingMeta {
        alpha: a.alpha * b.alpha,
        ancillas: a.ancillas + b.ancillas,
        delta: a.alpha * b.delta + b.alpha * a.delta + a.delta * b.delta,
    }
}

/// One-ancilla unitary `[[C, √(I−CC†)], [√(I−C†C), −C†]]` for a contraction.
pub fn dilate(contraction: &CMatrix, alpha: f64) -> Result<BlockEncoding> {
    let d = contraction.nrows();
    if contraction.ncols() != d {
        return Err(Error::Dimension("only square contractions are dilated".into()));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("normalization {alpha}")));
    }
    let n = op_norm(contraction);
    if n > 1.0 + 1e-10 {
        return Err(Error::InvalidInput(format!("‖C‖ = {n} exceeds 1")));
    }
    let c = contraction;
    // with C = UΣV†, the defect blocks are U√(1−Σ²)U† and V√(1−Σ²)V†
    let svd = c.clone().svd(true, true);
    let (uu, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let comp = |x: f64| {
        let x = x.min(1.0);
        ((1.0 - x) * (1.0 + x)).sqrt()
    };
    let side = |b: &CMatrix| {
        let mut m = b.clone();
        for (j, &x) in svd.singular_values.iter().enumerate() {
            let f = Complex64::new(comp(x), 0.0);
            for z in m.column_mut(j).iter_mut() {
                *z *= f;
            }
        }
        m * b.adjoint()
    };
    let top = side(&uu);
    let bottom = side(&vt.adjoint());
    let mut u = CMatrix::zeros(2 * d, 2 * d);
    u.view_mut((0, 0), (d, d)).copy_from(c);
    u.view_mut((0, d), (d, d)).copy_from(&top);
    u.view_mut((d, 0), (d, d)).copy_from(&bottom);
    u.view_mut((d, d), (d, d)).copy_from(&(-c.adjoint()));
    Ok(BlockEncoding { unitary: u, alpha, ancillas: 1, delta: 0.0 })
}

fn check_support(model: &ThermalModel) -> Result<()> {
    let lmin = model.sigma_v_spectrum().min();
    if lmin <= crate::gradients::SUPPORT_GUARD {
        return Err(Error::Support(format!("λ_min(σ_v) = {lmin:.3e}")));
    }
    Ok(())
}

/// `σ_v^{−is/2}` as a matrix.
pub fn modular_flow(model: &ThermalModel, s: f64) -> Result<CMatrix> {
    check_support(model)?;
    Ok(phase_unitary(model.sigma_v_spectrum(), |l| -0.5 * s * l.ln()))
}

/// Exact encoding of the modular flow `σ_v^{−is/2}` with `α = 1`.
pub fn modular_unitary(model: &ThermalModel, s: f64) -> Result<BlockEncoding> {
    dilate(&modular_flow(model, s)?, 1.0)
}

/// `σ_v^{−1/2}/√κ`, a contraction of norm one.
pub fn inv_sqrt_block(model: &ThermalModel) -> Result<CMatrix> {
    check_support(model)?;
    let k = model.kappa();
    let s = model.sigma_v_spectrum();
    let mut m = s.vectors.clone();
    for (j, &l) in s.values.iter().enumerate() {
        let f = Complex64::new(1.0 / (l * k).sqrt(), 0.0);
        for x in m.column_mut(j).iter_mut() {
            *x *= f;
        }
    }
    Ok(m * s.vectors.adjoint())
}

/// Exact `(√κ, 0)` encoding of `σ_v^{−1/2}`.
pub fn inv_sqrt_encoding(model: &ThermalModel) -> Result<BlockEncoding> {
    dilate(&inv_sqrt_block(model)?, model.kappa().sqrt())
}
