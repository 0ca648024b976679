//! Seeded random operators, states and machines for tests, demos and the
//! verification suites.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::hermitian::{kron, op_norm, BipartiteDims, CMatrix, HermitianOperator, QuantumState};
use crate::model::{ClassicalBm, ParamHamiltonian, RestrictedSpec};

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut Rand) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Random Hermitian operator with spectral norm `scale`.
pub fn hermitian(d: usize, scale: f64, rng: &mut Rand) -> HermitianOperator {
    let g = ginibre(d, d, rng);
    let h = HermitianOperator::symmetrized(&g + g.adjoint());
    let n = op_norm(h.matrix());
    if n == 0.0 {
        return h;
    }
    h.scale(scale / n)
}

/// Random density matrix of the given rank.
pub fn state(d: usize, rank: usize, rng: &mut Rand) -> QuantumState {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    QuantumState::trusted(HermitianOperator::symmetrized(m.unscale(tr)))
}

/// Haar-random unitary.
pub fn unitary(d: usize, rng: &mut Rand) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
        for x in q.column_mut(j).iter_mut() {
            *x *= ph;
        }
    }
    q
}

/// Random matrix with spectral norm one.
pub fn contraction(d: usize, rng: &mut Rand) -> CMatrix {
    let g = ginibre(d, d, rng);
    let n = op_norm(&g);
    g.unscale(n)
}

pub fn distribution(d: usize, rng: &mut Rand) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn thetas(j: usize, scale: f64, rng: &mut Rand) -> Vec<f64> {
    (0..j).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// `J` random unit-norm terms with `θ_j` uniform in `[−scale, scale]`.
pub fn model(dims: BipartiteDims, j: usize, scale: f64, rng: &mut Rand) -> Result<ParamHamiltonian> {
    let terms = (0..j).map(|_| hermitian(dims.total(), 1.0, rng)).collect();
    ParamHamiltonian::new(dims, terms, thetas(j, scale, rng))
}

fn projector(basis: &CMatrix, x: usize) -> CMatrix {
    let c = basis.column(x);
    &c * c.adjoint()
}

/// Terms block diagonal over the columns of `hidden_basis`.
pub fn qc_model(
    dims: BipartiteDims,
    j: usize,
    scale: f64,
    hidden_basis: &CMatrix,
    rng: &mut Rand,
) -> Result<ParamHamiltonian> {
    let terms = (0..j)
        .map(|_| {
            let mut m = CMatrix::zeros(dims.total(), dims.total());
            for x in 0..dims.d_h {
                m += kron(hermitian(dims.d_v, 1.0, rng).matrix(), &projector(hidden_basis, x));
            }
            HermitianOperator::symmetrized(m)
        })
        .collect();
    ParamHamiltonian::new(dims, terms, thetas(j, scale, rng))
}

/// Terms block diagonal over the columns of `visible_basis`.
pub fn cq_model(
    dims: BipartiteDims,
    j: usize,
    scale: f64,
    visible_basis: &CMatrix,
    rng: &mut Rand,
) -> Result<ParamHamiltonian> {
    let terms = (0..j)
        .map(|_| {
            let mut m = CMatrix::zeros(dims.total(), dims.total());
            for x in 0..dims.d_v {
                m += kron(&projector(visible_basis, x), hermitian(dims.d_h, 1.0, rng).matrix());
            }
            HermitianOperator::symmetrized(m)
        })
        .collect();
    ParamHamiltonian::new(dims, terms, thetas(j, scale, rng))
}

/// Restricted machine with `m` visible and `n` hidden operators.
pub fn restricted(d_v: usize, d_h: usize, m: usize, n: usize, scale: f64, rng: &mut Rand) -> RestrictedSpec {
    RestrictedSpec {
        a: thetas(m, scale, rng),
        b: thetas(n, scale, rng),
        w: (0..m).map(|_| thetas(n, scale, rng)).collect(),
        v_ops: (0..m).map(|_| hermitian(d_v, 1.0, rng)).collect(),
        h_ops: (0..n).map(|_| hermitian(d_h, 1.0, rng)).collect(),
    }
}

/// Operators that are diagonal in `basis` with random real spectra.
pub fn commuting(d: usize, count: usize, basis: &CMatrix, rng: &mut Rand) -> Vec<HermitianOperator> {
    (0..count)
        .map(|_| {
            let diag: Vec<f64> = (0..d).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            HermitianOperator::from_real_diagonal(&diag).conjugate_by(basis)
        })
        .collect()
}

/// Classical machine with Gaussian energy tables.
pub fn classical(d_v: usize, d_h: usize, j: usize, scale: f64, rng: &mut Rand) -> Result<ClassicalBm> {
    let tables = (0..j).map(|_| (0..d_v * d_h).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
    ClassicalBm::new(d_v, d_h, tables, thetas(j, scale, rng))
}
