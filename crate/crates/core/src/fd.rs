//! Finite-difference Dirichlet heat solvers on masked geometries and the
//! decay-rate measurements built on them.
//!
//! The implicit Euler scheme keeps the discrete maximum principle (the
//! stepping matrix is an M-matrix), which the comparison and subsolution
//! experiments rely on; accuracy is recovered by small steps and reported
//! refinement slopes rather than a higher-order scheme.

pub mod decay;
pub mod localized;
pub mod mask;
pub mod partition;
pub mod solver;

pub use decay::{absorption_integral, algebraic_decay_fit, exp_decay_fit, AbsorptionCheck, DecayFit};
pub use localized::{localized_norm_series, vitesse_gate, LocalizedSeries};
pub use mask::{build_mask, CellFlag, DomainMask, Lattice, MaskKind};
pub use partition::{build_partition, localization_audit, LocalizationAudit, PartitionOfUnity};
pub use solver::{
    duality_identity_check, fd_solve, fd_solve_dense, subsolution_check, FdSolution,
    FdSolverConfig,
};
