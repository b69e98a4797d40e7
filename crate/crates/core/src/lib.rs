//! Residual-driven basis extension of a linear subspace under a
//! description-length criterion.
//!
//! Given a current subspace `C` of `R^n` and a weighted dataset `D`, the crate
//! computes residuals against `C`, proposes the novelty direction that best
//! explains them (the top eigenvector of the residual covariance), and
//! accepts it only when the penalized description length
//! `L(S; D) = Σ_u w(u) ℓ(‖u − Π_S u‖²) + λ dim(S)` strictly drops.
//!
//! ```
//! use rbx_core::{propose_one_dim, Dataset, MdlConfig, Subspace};
//!
//! let c = Subspace::new(2, vec![vec![1.0, 0.0]], 1e-9).unwrap();
//! let d = Dataset::from_vectors(2, [vec![3.0, 4.0], vec![1.0, 2.0]]).unwrap();
//! let p = propose_one_dim(&c, &d, &MdlConfig::new(19.0).unwrap()).unwrap();
//! assert!(p.accepted);
//! assert!((p.gain - 20.0).abs() < 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extension;
pub mod imagination;
pub mod linalg;
pub mod mdl;
pub mod verify;

pub use error::{RbxError, Result};
pub use extension::{
    canonical_direction, extend_greedy, novelty_rank, propose_one_dim, strip_to_residual_support,
    AdmissibleExtension, CanonicalDirection, ExtensionProposal, ExtensionTrace, StopReason,
    StrippedExtension,
};
pub use imagination::{
    amplify, classify_simulation, gain_decomposition, GainDecomposition, Mechanism,
    MechanismReport, SimulationBatch,
};
pub use linalg::{
    intersect, orthonormalize, residual_covariance, residual_span, spectrum, top_eigenpair,
    Dataset, EigenOptions, EigenPair, ExperienceVector, Intersection, ResidualCovariance, Subspace,
    SymMatrix, DEFAULT_TOL,
};
pub use mdl::{description_length, fit_term, gain, is_accepted, Acceptance, Loss, MdlConfig};
pub use verify::{CheckFailure, CheckName, CheckReport, InstanceGenerator};
