//! JSON run specifications.
//!
//! Complex matrices are row-major nested arrays of `[re, im]` pairs. A term
//! may instead be a Pauli string such as `"ZI"`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradients::{Objective, Target};
use crate::hermitian::{pauli, BipartiteDims, CMatrix, HermitianOperator, QuantumState};
use crate::model::{restricted_to_param, ClassicalBm, ParamHamiltonian, RestrictedSpec};
use crate::trainer::Machine;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum TermSpec {
    Pauli(String),
    Matrix(JsonMatrix),
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Treatment {
    #[default]
    Quantum,
    Qc,
    Cq,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Generic {
        d_v: usize,
        d_h: usize,
        terms: Vec<TermSpec>,
        theta: Vec<f64>,
    },
    Restricted {
        d_v: usize,
        d_h: usize,
        a: Vec<f64>,
        b: Vec<f64>,
        w: Vec<Vec<f64>>,
        v_ops: Vec<TermSpec>,
        h_ops: Vec<TermSpec>,
        #[serde(default)]
        treatment: Treatment,
        /// Basis of the classical side for `qc` or `cq`; identity if absent.
        #[serde(default)]
        basis: Option<JsonMatrix>,
    },
    Qc {
        d_v: usize,
        d_h: usize,
        terms: Vec<TermSpec>,
        theta: Vec<f64>,
        #[serde(default)]
        hidden_basis: Option<JsonMatrix>,
    },
    Cq {
        d_v: usize,
        d_h: usize,
        terms: Vec<TermSpec>,
        theta: Vec<f64>,
        #[serde(default)]
        visible_basis: Option<JsonMatrix>,
    },
    Classical {
        /// Energy tables indexed `v·d_h + h`; required unless `bits` is set.
        #[serde(default)]
        d_v: Option<usize>,
        #[serde(default)]
        d_h: Option<usize>,
        #[serde(default)]
        tables: Option<Vec<Vec<f64>>>,
        /// `[visible, hidden]` bit counts of a restricted spin machine.
        #[serde(default)]
        bits: Option<[usize; 2]>,
        theta: Vec<f64>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetSpec {
    State(JsonMatrix),
    Distribution(Vec<f64>),
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObjectiveSpec {
    #[default]
    Umegaki,
    Tsallis {
        q: f64,
    },
}

impl From<ObjectiveSpec> for Objective {
    fn from(o: ObjectiveSpec) -> Self {
        match o {
            ObjectiveSpec::Umegaki => Objective::Umegaki,
            ObjectiveSpec::Tsallis { q } => Objective::PetzTsallis(q),
        }
    }
}

fn default_learning_rate() -> f64 {
    0.1
}
fn default_iterations() -> usize {
    1000
}
fn default_one() -> usize {
    1
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_error() -> f64 {
    0.05
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_one")]
    pub log_every: usize,
}

impl Default for TrainSpec {
    fn default() -> Self {
        Self { learning_rate: default_learning_rate(), iterations: default_iterations(), log_every: 1 }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EstimateSpec {
    /// Index of the term `G_j` whose first gradient term is estimated.
    #[serde(default)]
    pub term: usize,
    #[serde(default = "default_error")]
    pub epsilon: f64,
    #[serde(default = "default_error")]
    pub delta: f64,
    #[serde(default)]
    pub shots: Option<u64>,
}

impl Default for EstimateSpec {
    fn default() -> Self {
        Self { term: 0, epsilon: default_error(), delta: default_error(), shots: None }
    }
}

/// Values the run is checked against; a mismatch exits with status 1.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExpectSpec {
    #[serde(default)]
    pub gradient: Option<Vec<f64>>,
    /// Upper bound on the final training objective.
    #[serde(default)]
    pub objective_below: Option<f64>,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub description: Option<String>,
    pub model: ModelSpec,
    pub target: TargetSpec,
    #[serde(default)]
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub train: TrainSpec,
    #[serde(default)]
    pub estimate: EstimateSpec,
    #[serde(default)]
    pub expect: Option<ExpectSpec>,
    #[serde(default)]
    pub seed: u64,
}

pub fn matrix_from_json(m: &JsonMatrix) -> Result<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidInput("matrix rows must be non-empty and of equal length".into()));
    }
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix entries must be finite".into()));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| Complex64::new(m[i][j][0], m[i][j][1])))
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn term(t: &TermSpec, dim: usize) -> Result<HermitianOperator> {
    let op = match t {
        TermSpec::Pauli(s) => pauli(s)?,
        TermSpec::Matrix(m) => HermitianOperator::new(matrix_from_json(m)?)?,
    };
    if op.dim() != dim {
        return Err(Error::Dimension(format!("term of dimension {} where {dim} is expected", op.dim())));
    }
    Ok(op)
}

fn terms(ts: &[TermSpec], dim: usize) -> Result<Vec<HermitianOperator>> {
    ts.iter().map(|t| term(t, dim)).collect()
}

fn basis(b: &Option<JsonMatrix>, d: usize) -> Result<CMatrix> {
    match b {
        Some(m) => {
            let m = matrix_from_json(m)?;
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension(format!("basis must be {d}×{d}")));
            }
            Ok(m)
        }
        None => Ok(CMatrix::identity(d, d)),
    }
}

impl ModelSpec {
    pub fn machine(&self) -> Result<Machine> {
        match self {
            ModelSpec::Generic { d_v, d_h, terms: ts, theta } => {
                let dims = BipartiteDims::new(*d_v, *d_h)?;
                Ok(Machine::Generic(ParamHamiltonian::new(dims, terms(ts, dims.total())?, theta.clone())?))
            }
            ModelSpec::Qc { d_v, d_h, terms: ts, theta, hidden_basis } => {
                let dims = BipartiteDims::new(*d_v, *d_h)?;
                let h = ParamHamiltonian::new(dims, terms(ts, dims.total())?, theta.clone())?;
                Ok(Machine::Qc { h, hidden_basis: basis(hidden_basis, *d_h)? })
            }
            ModelSpec::Cq { d_v, d_h, terms: ts, theta, visible_basis } => {
                let dims = BipartiteDims::new(*d_v, *d_h)?;
                let h = ParamHamiltonian::new(dims, terms(ts, dims.total())?, theta.clone())?;
                Ok(Machine::Cq { h, visible_basis: basis(visible_basis, *d_v)? })
            }
            ModelSpec::Restricted { d_v, d_h, a, b, w, v_ops, h_ops, treatment, basis: bs } => {
                let spec = RestrictedSpec {
                    a: a.clone(),
                    b: b.clone(),
                    w: w.clone(),
                    v_ops: terms(v_ops, *d_v)?,
                    h_ops: terms(h_ops, *d_h)?,
                };
                let h = restricted_to_param(&spec)?;
                Ok(match treatment {
                    Treatment::Quantum => Machine::Generic(h),
                    Treatment::Qc => Machine::Qc { h, hidden_basis: basis(bs, *d_h)? },
                    Treatment::Cq => Machine::Cq { h, visible_basis: basis(bs, *d_v)? },
                })
            }
            ModelSpec::Classical { d_v, d_h, tables, bits, theta } => {
                let bm = match (tables, bits) {
                    (Some(t), None) => {
                        let (dv, dh) = d_v.zip(*d_h).ok_or_else(|| Error::InvalidInput("tables need d_v and d_h".into()))?;
                        ClassicalBm::new(dv, dh, t.clone(), theta.clone())?
                    }
                    (None, Some([m, n])) => ClassicalBm::restricted_bits(*m, *n, theta.clone())?,
                    _ => return Err(Error::InvalidInput("a classical model needs exactly one of tables or bits".into())),
                };
                BipartiteDims::new(bm.d_v, bm.d_h)?;
                Ok(Machine::Classical(bm))
            }
        }
    }
}

impl TargetSpec {
    pub fn target(&self) -> Result<Target> {
        match self {
            TargetSpec::State(m) => Ok(Target::State(QuantumState::from_matrix(matrix_from_json(m)?)?)),
            TargetSpec::Distribution(p) => Ok(Target::Distribution(p.clone())),
        }
    }
}

impl RunSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: RunSpec = serde_json::from_str(text)?;
        spec.objective().validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn objective(&self) -> Objective {
        self.objective.into()
    }

    /// The machine and target, checked against each other's dimensions.
    pub fn build(&self) -> Result<(Machine, Target)> {
        let machine = self.model.machine()?;
        let target = self.target.target()?;
        let dv = match &machine {
            Machine::Classical(bm) => bm.d_v,
            m => m.hamiltonian().expect("quantum machine").dims.d_v,
        };
        let td = match &target {
            Target::State(s) => s.dim(),
            Target::Distribution(p) => p.len(),
        };
        if td != dv {
            return Err(Error::Dimension(format!("target of dimension {td} for a {dv}-dim visible register")));
        }
        machine.target_state(&target)?;
        Ok((machine, target))
    }
}
