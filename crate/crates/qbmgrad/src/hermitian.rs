//! Dense Hermitian operators, density matrices, bipartite structure and
//! spectral calculus.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest supported operator dimension.
pub const MAX_DIM: usize = 256;

const HERMITIAN_TOL: f64 = 1e-12;
const STATE_TOL: f64 = 1e-10;

/// A dense complex square matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity and symmetrizes away residual asymmetry below
    /// `1e-12`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 || m.nrows() > MAX_DIM {
            return Err(Error::Dimension(format!("dimension {} outside 1..={MAX_DIM}", m.nrows())));
        }
        let asym = (&m - m.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if !asym.is_finite() || asym >= HERMITIAN_TOL {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self::symmetrized(m))
    }

    /// Builds from a matrix that is Hermitian in exact arithmetic.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let h = (&m + m.adjoint()).scale(0.5);
        Self { m: h }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { m: self.m.scale(c) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m }
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        let ab = &self.m * &other.m;
        Self::symmetrized(&ab + ab.adjoint())
    }

    /// `S X S` for Hermitian `S`.
    pub fn sandwich(&self, s: &Self) -> Self {
        Self::symmetrized(&s.m * &self.m * &s.m)
    }

    /// `U X U†` for any square `U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::symmetrized(u * &self.m * u.adjoint())
    }

    /// Largest absolute entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.m - &other.m).iter().fold(0.0, |a, z| a.max(z.norm()))
    }
}

/// A positive semidefinite, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    op: HermitianOperator,
}

impl QuantumState {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let lmin = eigh(&op)?.min();
        if lmin < -STATE_TOL {
            return Err(Error::InvalidState(format!("min eigenvalue {lmin:.3e}")));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    pub(crate) fn trusted(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: HermitianOperator::identity(dim).scale(1.0 / dim as f64) }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(probs))
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::from_matrix(&v * v.adjoint())
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

/// Eigenvalues in ascending order with the matching unitary of column
/// eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        let d: Vec<f64> = self.values.clone();
        diag_conjugate(&self.vectors, &d)
    }

    /// `U† X U`, the matrix of `x` in the eigenbasis.
    pub fn to_eigenbasis(&self, x: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * x * &self.vectors
    }

    /// `U X U†`.
    pub fn from_eigenbasis(&self, x: &CMatrix) -> CMatrix {
        &self.vectors * x * self.vectors.adjoint()
    }
}

/// Which factor of a bipartite operator to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    Visible,
    Hidden,
}

/// Visible and hidden dimensions; operators on `vh` are indexed `v·d_h + h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartiteDims {
    pub d_v: usize,
    pub d_h: usize,
}

impl BipartiteDims {
    pub fn new(d_v: usize, d_h: usize) -> Result<Self> {
        if d_v == 0 || d_h == 0 {
            return Err(Error::Dimension("subsystem dimensions must be positive".into()));
        }
        if d_v * d_h > MAX_DIM {
            return Err(Error::Dimension(format!("d_v·d_h = {} exceeds {MAX_DIM}", d_v * d_h)));
        }
        Ok(Self { d_v, d_h })
    }

    pub fn total(&self) -> usize {
        self.d_v * self.d_h
    }
}

fn diag_conjugate(u: &CMatrix, d: &[f64]) -> HermitianOperator {
    let mut scaled = u.clone();
    for (j, &x) in d.iter().enumerate() {
        scaled.column_mut(j).scale_mut(x);
    }
    HermitianOperator::symmetrized(scaled * u.adjoint())
}

/// Kronecker product of general matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator { m: kron(&a.m, &b.m) }
}

pub fn partial_trace(x: &HermitianOperator, dims: BipartiteDims, keep: Subsystem) -> Result<HermitianOperator> {
    if x.dim() != dims.total() {
        return Err(Error::Dimension(format!(
            "operator of dim {} does not split as {}x{}",
            x.dim(),
            dims.d_v,
            dims.d_h
        )));
    }
    let (dv, dh) = (dims.d_v, dims.d_h);
    let m = &x.m;
    let out = match keep {
        Subsystem::Visible => CMatrix::from_fn(dv, dv, |i, j| (0..dh).map(|h| m[(i * dh + h, j * dh + h)]).sum()),
        Subsystem::Hidden => CMatrix::from_fn(dh, dh, |i, j| (0..dv).map(|v| m[(v * dh + i, v * dh + j)]).sum()),
    };
    Ok(HermitianOperator::symmetrized(out))
}

pub fn eigh(x: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = x.dim();
    if x.m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let eig = SymmetricEigen::new(x.m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    let s = SpectralDecomposition { values, vectors };

    let scale = s.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let resid = s.reconstruct().max_abs_diff(x);
    if resid > 1e-10 * n as f64 * scale {
        return Err(Error::Numerical(format!("eigendecomposition residual {resid:.3e}")));
    }
    Ok(s)
}

/// `U diag(f(λ)) U†`; fails if `f` is not finite at some eigenvalue.
pub fn matrix_function(s: &SpectralDecomposition, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    let mut d = Vec::with_capacity(s.dim());
    for &l in &s.values {
        let y = f(l);
        if !y.is_finite() {
            return Err(Error::Undefined(l));
        }
        d.push(y);
    }
    Ok(diag_conjugate(&s.vectors, &d))
}

/// `Tr[obs · state]`.
pub fn expectation(obs: &HermitianOperator, state: &QuantumState) -> Result<f64> {
    trace_product(obs, state.op())
}

/// `Tr[AB]` for Hermitian `A` and `B`, which is real.
pub fn trace_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(a.m.iter().zip(b.m.transpose().iter()).map(|(x, y)| (x * y).re).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub spectral: f64,
    pub trace: f64,
}

pub fn norms(x: &HermitianOperator) -> Result<Norms> {
    let s = eigh(x)?;
    Ok(Norms {
        spectral: s.values.iter().fold(0.0, |a, v| a.max(v.abs())),
        trace: s.values.iter().map(|v| v.abs()).sum(),
    })
}

/// Largest singular value of an arbitrary matrix.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// `U diag(e^{iφ_k}) U†`.
pub(crate) fn phase_unitary(s: &SpectralDecomposition, phase: impl Fn(f64) -> f64) -> CMatrix {
    let mut scaled = s.vectors.clone();
    for (j, &l) in s.values.iter().enumerate() {
        let z = Complex64::from_polar(1.0, phase(l));
        for x in scaled.column_mut(j).iter_mut() {
            *x *= z;
        }
    }
    scaled * s.vectors.adjoint()
}

/// Tensor product of Pauli matrices named by a string such as `"ZXI"`,
/// leftmost factor most significant.
pub fn pauli(label: &str) -> Result<HermitianOperator> {
    let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    let one = Complex64::new(1.0, 0.0);
    let mut m = CMatrix::identity(1, 1);
    for c in label.chars() {
        let f = match c.to_ascii_uppercase() {
            'I' => CMatrix::from_row_slice(2, 2, &[one, o, o, one]),
            'X' => CMatrix::from_row_slice(2, 2, &[o, one, one, o]),
            'Y' => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            'Z' => CMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
            _ => return Err(Error::InvalidInput(format!("unknown Pauli label {c:?} in {label:?}"))),
        };
        m = kron(&m, &f);
    }
    if label.is_empty() || m.nrows() > MAX_DIM {
        return Err(Error::InvalidInput(format!("Pauli label {label:?} has unsupported length")));
    }
    Ok(HermitianOperator { m })
}
