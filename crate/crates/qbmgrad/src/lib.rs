//! Gradients of quantum Boltzmann machine objectives.
//!
//! The crate evaluates the relative-entropy and Petz–Tsallis objectives of
//! thermal-state models with visible and hidden units, their exact
//! gradients through modular channels, a shot-level simulation of the
//! swap-test estimator for the first gradient term, and plain gradient
//! descent on top of either.
//!
//! ```no_run
//! use qbmgrad::prelude::*;
//!
//! let dims = BipartiteDims::new(2, 1)?;
//! let h = ParamHamiltonian::new(dims, vec![pauli("Z")?], vec![0.0])?;
//! let model = thermalize(&h)?;
//! let rho = QuantumState::diagonal(&[1.0, 0.0])?;
//! let g = grad(&model, &rho, Objective::Umegaki)?;
//! assert!((g.values[0] - 1.0).abs() < 1e-12);
//! # Ok::<(), qbmgrad::Error>(())
//! ```

pub mod calculus;
pub mod cli;
pub mod densities;
pub mod estimator;
pub mod error;
pub mod gradients;
pub mod hermitian;
pub mod model;
pub mod quad;
pub mod random;
pub mod spec_file;
pub mod trainer;
pub mod verify;

pub use error::{Error, Result};

/// The types and functions most programs need.
pub mod prelude {
    pub use crate::calculus::{apply_channel, frechet_exp, frechet_log, ChannelKind, EvalMode};
    pub use crate::densities::{Density, SeededSampler};
    pub use crate::error::{Error, Result};
    pub use crate::estimator::{estimate_first_term, hoeffding_shots, Circuit, EstimatorConfig};
    pub use crate::gradients::{grad, grad_cq, grad_qc, relative_entropy, GradientReport, Objective, Target};
    pub use crate::hermitian::{eigh, pauli, BipartiteDims, CMatrix, HermitianOperator, QuantumState};
    pub use crate::model::{cq_decompose, qc_decompose, thermalize, ClassicalBm, ParamHamiltonian, ThermalModel};
    pub use crate::trainer::{train, GradientMode, Machine, TrainConfig, Trajectory};
}
