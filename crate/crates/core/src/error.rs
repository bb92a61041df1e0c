//! Error type shared by all laboratory modules.

use std::fmt;

/// Errors surfaced by grid construction, spectral operations, solvers and
/// the estimate-verification routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid parameters cannot host a valid lattice.
    InvalidGrid(String),
    /// Grid too coarse to host at least three dyadic bands.
    InsufficientSpectralRange { bands: i64 },
    /// Requested Littlewood-Paley band outside the resolvable range.
    BandOutsideResolution { j: i32, j_min: i32, j_max: i32 },
    /// Negative propagation time passed to the heat multiplier.
    BackwardHeat { t: f64 },
    /// Forcing samples do not line up with the solver time grid.
    IncompatibleSampling(String),
    /// Finite-difference Besov characterization requires 0 < s < 1.
    FdCharacterizationOutOfRange { s: f64 },
    /// An a priori inequality failed structurally (zero right-hand side
    /// against a nonzero left-hand side).
    InequalityViolated(String),
    /// Input makes the requested ratio undefined.
    DegenerateInput(String),
    /// Compact support does not keep the required margin from the sub-box.
    MarginViolated { required: f64, found: f64 },
    /// Estimate hypothesis not met for the selected law.
    HypothesisViolated(String),
    /// Obstacle too close to the outer box for far-field experiments.
    InsufficientFarFieldMargin { margin: f64, required: f64 },
    /// Iterative linear solver failed to reach its residual tolerance.
    SolverDiverged { residual: f64, iterations: usize },
    /// The decay-fit window is empty because the box is too small.
    FarFieldHorizonExhausted { t_far: f64 },
    /// Fit window produced an unreliable regression.
    FitWindowUnreliable { r_squared: f64 },
    /// Partition-of-unity bump narrower than the lattice can resolve.
    UnresolvableBump { lambda: f64, min_lambda: f64 },
    /// Theorem hypothesis excludes this dimension; the check is skipped.
    DimensionExcluded { n: usize, reason: String },
    /// Parity bookkeeping of the symmetrization proof failed.
    ParityBroken { derivative: String, deviation: f64 },
    /// Non-negative data required (comparison-principle experiments).
    NegativeData { min: f64 },
    /// Spread across the horizon sweep exceeded the allowed factor.
    SpreadExceeded { case: String, spread: f64 },
    /// Search or iteration budget exhausted before reaching the target.
    BudgetExhausted(String),
    /// Malformed serialized artifact.
    Format(String),
    /// Underlying I/O failure.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::InsufficientSpectralRange { bands } => {
                write!(f, "insufficient spectral range: only {bands} dyadic bands fit")
            }
            Error::BandOutsideResolution { j, j_min, j_max } => {
                write!(f, "band outside grid resolution: j={j} not in [{j_min}, {j_max}]")
            }
            Error::BackwardHeat { t } => write!(f, "backward heat rejected: t={t}"),
            Error::IncompatibleSampling(msg) => write!(f, "incompatible sampling: {msg}"),
            Error::FdCharacterizationOutOfRange { s } => {
                write!(f, "finite-difference characterization out of range: s={s}")
            }
            Error::InequalityViolated(msg) => write!(f, "inequality violated: {msg}"),
            Error::DegenerateInput(msg) => write!(f, "degenerate input: {msg}"),
            Error::MarginViolated { required, found } => {
                write!(f, "margin violated: need {required}, found {found}")
            }
            Error::HypothesisViolated(msg) => write!(f, "hypothesis violated: {msg}"),
            Error::InsufficientFarFieldMargin { margin, required } => {
                write!(f, "insufficient far-field margin: {margin} < {required}")
            }
            Error::SolverDiverged { residual, iterations } => {
                write!(f, "linear solver stalled: residual {residual:.3e} after {iterations} iterations")
            }
            Error::FarFieldHorizonExhausted { t_far } => {
                write!(f, "far-field horizon exhausted: T_far={t_far}")
            }
            Error::FitWindowUnreliable { r_squared } => {
                write!(f, "fit window unreliable: R^2={r_squared}")
            }
            Error::UnresolvableBump { lambda, min_lambda } => {
                write!(f, "unresolvable bump: lambda={lambda} below {min_lambda}")
            }
            Error::DimensionExcluded { n, reason } => {
                write!(f, "dimension excluded: n={n} ({reason})")
            }
            Error::ParityBroken { derivative, deviation } => {
                write!(f, "parity broken: {derivative} deviates by {deviation:.3e}")
            }
            Error::NegativeData { min } => write!(f, "negative data rejected: min={min}"),
            Error::SpreadExceeded { case, spread } => {
                write!(f, "horizon spread exceeded on case {case}: {spread:.3}")
            }
            Error::BudgetExhausted(msg) => write!(f, "budget exhausted: {msg}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
