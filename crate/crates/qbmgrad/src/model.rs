//! Parameterized Hamiltonians, their thermal states, restricted machines and
//! the block decompositions used when one side is classical.

use crate::error::{Error, Result};
use crate::hermitian::{
    eigh, kron, matrix_function, partial_trace, BipartiteDims, CMatrix, HermitianOperator, QuantumState,
    SpectralDecomposition, Subsystem,
};

/// Largest spectral norm of `G(θ)` accepted before `e^{-G}` risks overflow.
pub const EXPONENT_GUARD: f64 = 700.0;

/// `G(θ) = Σ_j θ_j G_j` on the visible–hidden space.
#[derive(Clone, Debug)]
pub struct ParamHamiltonian {
    pub dims: BipartiteDims,
    pub terms: Vec<HermitianOperator>,
    pub theta: Vec<f64>,
}

impl ParamHamiltonian {
    pub fn new(dims: BipartiteDims, terms: Vec<HermitianOperator>, theta: Vec<f64>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("a Hamiltonian needs at least one term".into()));
        }
        if terms.len() != theta.len() {
            return Err(Error::InvalidInput(format!("{} terms but {} parameters", terms.len(), theta.len())));
        }
        if let Some(t) = terms.iter().find(|t| t.dim() != dims.total()) {
            return Err(Error::Dimension(format!("term of dim {} on a {}-dim space", t.dim(), dims.total())));
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite parameter".into()));
        }
        Ok(Self { dims, terms, theta })
    }

    pub fn num_params(&self) -> usize {
        self.terms.len()
    }

    pub fn with_theta(&self, theta: &[f64]) -> Result<Self> {
        Self::new(self.dims, self.terms.clone(), theta.to_vec())
    }

    pub fn hamiltonian(&self) -> HermitianOperator {
        weighted_sum(&self.terms, &self.theta)
    }
}

fn weighted_sum(ops: &[HermitianOperator], w: &[f64]) -> HermitianOperator {
    let mut m = CMatrix::zeros(ops[0].dim(), ops[0].dim());
    for (op, &c) in ops.iter().zip(w) {
        if c != 0.0 {
            m += op.matrix().scale(c);
        }
    }
    HermitianOperator::symmetrized(m)
}

/// Gibbs weights `e^{-(λ-λ_min)}` normalized, and `ln Z`.
fn gibbs(values: &[f64]) -> (Vec<f64>, f64) {
    let lmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = values.iter().map(|l| (lmin - l).exp()).collect();
    let s: f64 = w.iter().sum();
    (w.iter().map(|x| x / s).collect(), s.ln() - lmin)
}

fn state_spectrum(g: &SpectralDecomposition, probs: &[f64]) -> SpectralDecomposition {
    // probabilities decrease along ascending energies
    let n = probs.len();
    let values = (0..n).map(|k| probs[n - 1 - k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| g.vectors[(i, n - 1 - j)]);
    SpectralDecomposition { values, vectors }
}

fn check_guard(s: &SpectralDecomposition) -> Result<()> {
    let norm = s.min().abs().max(s.max().abs());
    if norm > EXPONENT_GUARD {
        return Err(Error::Numerical(format!("‖G(θ)‖ = {norm:.1} exceeds the exponent guard {EXPONENT_GUARD}")));
    }
    Ok(())
}

/// `G(θ)` together with `σ_vh = e^{-G}/Z`, `σ_v = Tr_h σ_vh` and their spectra.
#[derive(Clone, Debug)]
pub struct ThermalModel {
    hamiltonian: ParamHamiltonian,
    g: HermitianOperator,
    g_spec: SpectralDecomposition,
    log_z: f64,
    sigma_vh: QuantumState,
    sigma_vh_spec: SpectralDecomposition,
    sigma_v: QuantumState,
    sigma_v_spec: SpectralDecomposition,
    kappa: f64,
}

pub fn thermalize(h: &ParamHamiltonian) -> Result<ThermalModel> {
    let g = h.hamiltonian();
    let g_spec = eigh(&g)?;
    check_guard(&g_spec)?;
    let (p, log_z) = gibbs(&g_spec.values);
    let sigma_vh_spec = state_spectrum(&g_spec, &p);
    let svh = sigma_vh_spec.reconstruct();
    let sv = partial_trace(&svh, h.dims, Subsystem::Visible)?;
    let sigma_v_spec = eigh(&sv)?;
    let kappa = 1.0 / sigma_v_spec.min();
    Ok(ThermalModel {
        hamiltonian: h.clone(),
        g,
        g_spec,
        log_z,
        sigma_vh: QuantumState::trusted(svh),
        sigma_vh_spec,
        sigma_v: QuantumState::trusted(sv),
        sigma_v_spec,
        kappa: if kappa > 0.0 { kappa } else { f64::INFINITY },
    })
}

impl ThermalModel {
    pub fn hamiltonian(&self) -> &ParamHamiltonian {
        &self.hamiltonian
    }

    pub fn dims(&self) -> BipartiteDims {
        self.hamiltonian.dims
    }

    pub fn terms(&self) -> &[HermitianOperator] {
        &self.hamiltonian.terms
    }

    pub fn g(&self) -> &HermitianOperator {
        &self.g
    }

    pub fn g_spectrum(&self) -> &SpectralDecomposition {
        &self.g_spec
    }

    /// Partition function; may overflow to infinity for very negative
    /// energies even when the states are well defined.
    pub fn partition_function(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn log_partition_function(&self) -> f64 {
        self.log_z
    }

    pub fn sigma_vh(&self) -> &QuantumState {
        &self.sigma_vh
    }

    pub fn sigma_vh_spectrum(&self) -> &SpectralDecomposition {
        &self.sigma_vh_spec
    }

    pub fn sigma_v(&self) -> &QuantumState {
        &self.sigma_v
    }

    pub fn sigma_v_spectrum(&self) -> &SpectralDecomposition {
        &self.sigma_v_spec
    }

    /// `1/λ_min(σ_v)`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `σ_h = Tr_v σ_vh`.
    pub fn sigma_h(&self) -> HermitianOperator {
        partial_trace(self.sigma_vh.op(), self.dims(), Subsystem::Hidden).expect("dims checked at construction")
    }
}

/// Restricted machine `Σ a_i V_i⊗I + Σ b_j I⊗H_j + Σ w_ij V_i⊗H_j`.
#[derive(Clone, Debug)]
pub struct RestrictedSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `m` rows of `n` couplings.
    pub w: Vec<Vec<f64>>,
    pub v_ops: Vec<HermitianOperator>,
    pub h_ops: Vec<HermitianOperator>,
}

impl RestrictedSpec {
    pub fn validate(&self) -> Result<BipartiteDims> {
        let (m, n) = (self.v_ops.len(), self.h_ops.len());
        if self.a.len() != m || self.b.len() != n || self.w.len() != m || self.w.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("restricted spec expects a[{m}], b[{n}], w[{m}][{n}]")));
        }
        if m == 0 && n == 0 {
            return Err(Error::InvalidInput("restricted spec has no operators".into()));
        }
        let dv = self.v_ops.first().map_or(1, |o| o.dim());
        let dh = self.h_ops.first().map_or(1, |o| o.dim());
        if self.v_ops.iter().any(|o| o.dim() != dv) || self.h_ops.iter().any(|o| o.dim() != dh) {
            return Err(Error::Dimension("restricted operators disagree on subsystem dimension".into()));
        }
        BipartiteDims::new(dv, dh)
    }

    /// `(a, b, row-major w)`.
    pub fn packed_theta(&self) -> Vec<f64> {
        let mut t = self.a.clone();
        t.extend_from_slice(&self.b);
        for row in &self.w {
            t.extend_from_slice(row);
        }
        t
    }

    /// Splits a packed vector back into `(a, b, w)`.
    pub fn unpack(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
        let (m, n) = (self.v_ops.len(), self.h_ops.len());
        let a = theta[..m].to_vec();
        let b = theta[m..m + n].to_vec();
        let w = (0..m).map(|i| theta[m + n + i * n..m + n + (i + 1) * n].to_vec()).collect();
        (a, b, w)
    }

    pub fn with_packed(&self, theta: &[f64]) -> Self {
        let (a, b, w) = self.unpack(theta);
        Self { a, b, w, ..self.clone() }
    }
}

/// Terms `V_i⊗I`, `I⊗H_j`, `V_i⊗H_j` with θ packed as `(a, b, row-major w)`.
pub fn restricted_to_param(spec: &RestrictedSpec) -> Result<ParamHamiltonian> {
    let dims = spec.validate()?;
    let iv = HermitianOperator::identity(dims.d_v);
    let ih = HermitianOperator::identity(dims.d_h);
    let mut terms = Vec::new();
    for v in &spec.v_ops {
        terms.push(crate::hermitian::tensor(v, &ih));
    }
    for h in &spec.h_ops {
        terms.push(crate::hermitian::tensor(&iv, h));
    }
    for v in &spec.v_ops {
        for h in &spec.h_ops {
            terms.push(crate::hermitian::tensor(v, h));
        }
    }
    ParamHamiltonian::new(dims, terms, spec.packed_theta())
}

fn check_unitary(u: &CMatrix, d: usize, what: &str) -> Result<()> {
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::Dimension(format!("{what} must be {d}x{d}")));
    }
    let dev = (u.adjoint() * u - CMatrix::identity(d, d)).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if dev > 1e-10 {
        return Err(Error::InvalidInput(format!("{what} is not unitary (deviation {dev:.3e})")));
    }
    Ok(())
}

/// Splits `m` (indexed `v·d_h + h`) into blocks along the classical factor,
/// failing if any off-block entry exceeds `1e-10`.
fn split_blocks(m: &CMatrix, dims: BipartiteDims, classical_hidden: bool) -> Result<Vec<HermitianOperator>> {
    let (dv, dh) = (dims.d_v, dims.d_h);
    let (nx, nb) = if classical_hidden { (dh, dv) } else { (dv, dh) };
    let idx = |x: usize, k: usize| if classical_hidden { k * dh + x } else { x * dh + k };
    let scale = m.iter().fold(1.0f64, |a, z| a.max(z.norm()));
    let mut off = 0.0f64;
    for x in 0..nx {
        for y in 0..nx {
            if x == y {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    off = off.max(m[(idx(x, k), idx(y, l))].norm());
                }
            }
        }
    }
    if off > 1e-10 * scale {
        return Err(Error::Structure(format!("term is not block diagonal over the declared basis (off-block {off:.3e})")));
    }
    Ok((0..nx)
        .map(|x| HermitianOperator::symmetrized(CMatrix::from_fn(nb, nb, |k, l| m[(idx(x, k), idx(x, l))])))
        .collect())
}

/// One classical branch `x`: block Hamiltonian, its state and its weight.
#[derive(Clone, Debug)]
pub struct Branch {
    pub terms: Vec<HermitianOperator>,
    pub g: HermitianOperator,
    pub g_spec: SpectralDecomposition,
    pub state: QuantumState,
    pub p: f64,
}

fn build_branches(blocks: Vec<Vec<HermitianOperator>>, theta: &[f64]) -> Result<Vec<Branch>> {
    // blocks[j][x]
    let nx = blocks[0].len();
    let mut specs = Vec::with_capacity(nx);
    for x in 0..nx {
        let terms: Vec<HermitianOperator> = blocks.iter().map(|b| b[x].clone()).collect();
        let g = weighted_sum(&terms, theta);
        let s = eigh(&g)?;
        check_guard(&s)?;
        specs.push((terms, g, s));
    }
    let lmin = specs.iter().map(|s| s.2.min()).fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = specs.iter().map(|s| s.2.values.iter().map(|l| (lmin - l).exp()).sum()).collect();
    let total: f64 = weights.iter().sum();
    specs
        .into_iter()
        .zip(weights)
        .map(|((terms, g, g_spec), w)| {
            let st = matrix_function(&g_spec, |l| (lmin - l).exp() / w)?;
            Ok(Branch { terms, g, g_spec, state: QuantumState::trusted(st), p: w / total })
        })
        .collect()
}

/// Hidden register classical in a declared basis:
/// `G_j = Σ_x G_v^{j,x} ⊗ |x⟩⟨x|`.
#[derive(Clone, Debug)]
pub struct QcModel {
    pub dims: BipartiteDims,
    pub theta: Vec<f64>,
    pub hidden_basis: CMatrix,
    /// Indexed by hidden label `x`.
    pub branches: Vec<Branch>,
    sigma_v: QuantumState,
    sigma_v_spec: SpectralDecomposition,
}

impl QcModel {
    pub fn p(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.p).collect()
    }

    /// `σ_v = Σ_x p_x σ_v^x`.
    pub fn sigma_v(&self) -> &QuantumState {
        &self.sigma_v
    }

    pub fn sigma_v_spectrum(&self) -> &SpectralDecomposition {
        &self.sigma_v_spec
    }

    pub fn num_params(&self) -> usize {
        self.theta.len()
    }

    /// Full terms `Σ_x G_v^{j,x} ⊗ |x⟩⟨x|` in the standard basis.
    pub fn reassemble_terms(&self) -> Vec<HermitianOperator> {
        let dh = self.dims.d_h;
        let w = &self.hidden_basis;
        (0..self.theta.len())
            .map(|j| {
                let mut m = CMatrix::zeros(self.dims.total(), self.dims.total());
                for (x, br) in self.branches.iter().enumerate() {
                    let col = w.column(x);
                    let proj = &col * col.adjoint();
                    m += kron(br.terms[j].matrix(), &proj);
                }
                debug_assert_eq!(m.nrows(), self.dims.d_v * dh);
                HermitianOperator::symmetrized(m)
            })
            .collect()
    }

    /// `Σ_x p_x σ_v^x ⊗ |x⟩⟨x|`.
    pub fn sigma_vh(&self) -> HermitianOperator {
        let mut m = CMatrix::zeros(self.dims.total(), self.dims.total());
        for (x, br) in self.branches.iter().enumerate() {
            let col = self.hidden_basis.column(x);
            m += kron(br.state.matrix(), &(&col * col.adjoint())).scale(br.p);
        }
        HermitianOperator::symmetrized(m)
    }
}

pub fn qc_decompose(h: &ParamHamiltonian, hidden_basis: &CMatrix) -> Result<QcModel> {
    let dims = h.dims;
    check_unitary(hidden_basis, dims.d_h, "hidden basis")?;
    let u = kron(&CMatrix::identity(dims.d_v, dims.d_v), hidden_basis);
    let blocks = h
        .terms
        .iter()
        .map(|t| split_blocks(&(u.adjoint() * t.matrix() * &u), dims, true))
        .collect::<Result<Vec<_>>>()?;
    let branches = build_branches(blocks, &h.theta)?;
    let mut sv = CMatrix::zeros(dims.d_v, dims.d_v);
    for br in &branches {
        sv += br.state.matrix().scale(br.p);
    }
    let sv = HermitianOperator::symmetrized(sv);
    let sigma_v_spec = eigh(&sv)?;
    Ok(QcModel {
        dims,
        theta: h.theta.clone(),
        hidden_basis: hidden_basis.clone(),
        branches,
        sigma_v: QuantumState::trusted(sv),
        sigma_v_spec,
    })
}

/// Visible register classical in a declared basis:
/// `G_j = Σ_x |x⟩⟨x| ⊗ G_h^{j,x}`.
#[derive(Clone, Debug)]
pub struct CqModel {
    pub dims: BipartiteDims,
    pub theta: Vec<f64>,
    pub visible_basis: CMatrix,
    /// Indexed by visible label `x`; states live on the hidden register.
    pub branches: Vec<Branch>,
}

impl CqModel {
    pub fn p(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.p).collect()
    }

    pub fn num_params(&self) -> usize {
        self.theta.len()
    }

    pub fn reassemble_terms(&self) -> Vec<HermitianOperator> {
        (0..self.theta.len())
            .map(|j| {
                let mut m = CMatrix::zeros(self.dims.total(), self.dims.total());
                for (x, br) in self.branches.iter().enumerate() {
                    let col = self.visible_basis.column(x);
                    m += kron(&(&col * col.adjoint()), br.terms[j].matrix());
                }
                HermitianOperator::symmetrized(m)
            })
            .collect()
    }

    /// `σ_v = Σ_x p_x |x⟩⟨x|` in the standard basis.
    pub fn sigma_v(&self) -> HermitianOperator {
        let mut m = CMatrix::zeros(self.dims.d_v, self.dims.d_v);
        for (x, br) in self.branches.iter().enumerate() {
            let col = self.visible_basis.column(x);
            m += (&col * col.adjoint()).scale(br.p);
        }
        HermitianOperator::symmetrized(m)
    }

    /// `Σ_x r_x |x⟩⟨x|` in the standard basis.
    pub fn target_state(&self, r: &[f64]) -> Result<QuantumState> {
        if r.len() != self.dims.d_v {
            return Err(Error::Dimension(format!("target has {} entries, expected {}", r.len(), self.dims.d_v)));
        }
        let d = HermitianOperator::from_real_diagonal(r);
        QuantumState::new(d.conjugate_by(&self.visible_basis))
    }
}

pub fn cq_decompose(h: &ParamHamiltonian, visible_basis: &CMatrix) -> Result<CqModel> {
    let dims = h.dims;
    check_unitary(visible_basis, dims.d_v, "visible basis")?;
    let u = kron(visible_basis, &CMatrix::identity(dims.d_h, dims.d_h));
    let blocks = h
        .terms
        .iter()
        .map(|t| split_blocks(&(u.adjoint() * t.matrix() * &u), dims, false))
        .collect::<Result<Vec<_>>>()?;
    let branches = build_branches(blocks, &h.theta)?;
    Ok(CqModel { dims, theta: h.theta.clone(), visible_basis: visible_basis.clone(), branches })
}

/// Classical Boltzmann machine with energies `Σ_j θ_j G_j(v,h)`, tables
/// indexed `v·d_h + h`.
#[derive(Clone, Debug)]
pub struct ClassicalBm {
    pub d_v: usize,
    pub d_h: usize,
    pub tables: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
}

impl ClassicalBm {
    pub fn new(d_v: usize, d_h: usize, tables: Vec<Vec<f64>>, theta: Vec<f64>) -> Result<Self> {
        if d_v == 0 || d_h == 0 || tables.is_empty() || tables.len() != theta.len() {
            return Err(Error::InvalidInput("classical machine needs J ≥ 1 tables and J parameters".into()));
        }
        if tables.iter().any(|t| t.len() != d_v * d_h || t.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput(format!("each energy table needs {} finite entries", d_v * d_h)));
        }
        Ok(Self { d_v, d_h, tables, theta })
    }

    /// Restricted machine on bits: `v ∈ {0,1}^m`, `h ∈ {0,1}^n` mapped to
    /// spins `±1` with energies `Σ a_i v_i + Σ b_j h_j + Σ w_ij v_i h_j`.
    pub fn restricted_bits(m: usize, n: usize, theta: Vec<f64>) -> Result<Self> {
        let (dv, dh) = (1usize << m, 1usize << n);
        let spin = |x: usize, k: usize, len: usize| if (x >> (len - 1 - k)) & 1 == 1 { -1.0 } else { 1.0 };
        let mut tables = Vec::new();
        for i in 0..m {
            tables.push((0..dv * dh).map(|idx| spin(idx / dh, i, m)).collect());
        }
        for j in 0..n {
            tables.push((0..dv * dh).map(|idx| spin(idx % dh, j, n)).collect());
        }
        for i in 0..m {
            for j in 0..n {
                tables.push((0..dv * dh).map(|idx| spin(idx / dh, i, m) * spin(idx % dh, j, n)).collect());
            }
        }
        Self::new(dv, dh, tables, theta)
    }

    pub fn num_params(&self) -> usize {
        self.theta.len()
    }

    pub fn with_theta(&self, theta: &[f64]) -> Self {
        Self { theta: theta.to_vec(), ..self.clone() }
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.d_v * self.d_h)
            .map(|k| self.tables.iter().zip(&self.theta).map(|(t, th)| th * t[k]).sum())
            .collect()
    }

    /// Joint distribution `p_θ(v,h)`.
    pub fn joint(&self) -> Vec<f64> {
        gibbs(&self.energies()).0
    }

    pub fn marginal(&self) -> Vec<f64> {
        let p = self.joint();
        (0..self.d_v).map(|v| p[v * self.d_h..(v + 1) * self.d_h].iter().sum()).collect()
    }

    /// The same machine as diagonal quantum terms.
    pub fn to_quantum(&self) -> Result<ParamHamiltonian> {
        let dims = BipartiteDims::new(self.d_v, self.d_h)?;
        let terms = self.tables.iter().map(|t| HermitianOperator::from_real_diagonal(t)).collect();
        ParamHamiltonian::new(dims, terms, self.theta.clone())
    }
}

/// The computational basis as a unitary.
pub fn identity_basis(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{expectation, pauli};

    #[test]
    fn zero_parameters_give_maximally_mixed_state() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let h = ParamHamiltonian::new(dims, vec![pauli("ZX").unwrap()], vec![0.0]).unwrap();
        let m = thermalize(&h).unwrap();
        assert!(m.sigma_vh().op().max_abs_diff(&HermitianOperator::identity(4).scale(0.25)) < 1e-15);
        assert!((m.kappa() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_qubit_closed_form() {
        let dims = BipartiteDims::new(2, 1).unwrap();
        let z = pauli("Z").unwrap();
        let h = ParamHamiltonian::new(dims, vec![z.clone()], vec![1.0]).unwrap();
        let m = thermalize(&h).unwrap();
        let (a, b) = ((-1.0f64).exp(), 1.0f64.exp());
        let expect = HermitianOperator::from_real_diagonal(&[a / (a + b), b / (a + b)]);
        assert!(m.sigma_v().op().max_abs_diff(&expect) < 1e-15);
        assert!((expectation(&z, m.sigma_v()).unwrap() + 1.0f64.tanh()).abs() < 1e-14);
        assert!((m.partition_function() - (a + b)).abs() < 1e-12);
    }

    #[test]
    fn exponent_guard() {
        let dims = BipartiteDims::new(2, 1).unwrap();
        let h = ParamHamiltonian::new(dims, vec![pauli("Z").unwrap()], vec![701.0]).unwrap();
        assert!(matches!(thermalize(&h), Err(Error::Numerical(_))));
    }

    #[test]
    fn restricted_zz() {
        let z = pauli("Z").unwrap();
        let spec = RestrictedSpec { a: vec![0.0], b: vec![0.0], w: vec![vec![1.0]], v_ops: vec![z.clone()], h_ops: vec![z] };
        let h = restricted_to_param(&spec).unwrap();
        assert_eq!(h.num_params(), 3);
        assert!(h.hamiltonian().max_abs_diff(&pauli("ZZ").unwrap()) < 1e-15);
        let zero = RestrictedSpec { w: vec![vec![0.0]], ..spec };
        assert!(restricted_to_param(&zero).unwrap().hamiltonian().max_abs_diff(&HermitianOperator::zeros(4)) < 1e-15);
    }

    #[test]
    fn qc_rejects_non_block_terms() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let h = ParamHamiltonian::new(dims, vec![pauli("ZX").unwrap()], vec![0.3]).unwrap();
        assert!(matches!(qc_decompose(&h, &identity_basis(2)), Err(Error::Structure(_))));
        assert!(cq_decompose(&h, &identity_basis(2)).is_ok());
    }

    #[test]
    fn trivial_hidden_register() {
        let dims = BipartiteDims::new(2, 1).unwrap();
        let h = ParamHamiltonian::new(dims, vec![pauli("X").unwrap(), pauli("Z").unwrap()], vec![0.4, -0.2]).unwrap();
        let qc = qc_decompose(&h, &identity_basis(1)).unwrap();
        assert_eq!(qc.branches.len(), 1);
        assert!((qc.branches[0].p - 1.0).abs() < 1e-15);
        let m = thermalize(&h).unwrap();
        assert!(qc.sigma_v().op().max_abs_diff(m.sigma_v().op()) < 1e-14);
    }
}
