use thiserror::Error;

/// Which half of the stability condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityViolation {
    /// `lambda1 > mu1c1` does not hold: the first queue is not ergodic.
    FirstQueue,
    /// `mu1c1 + mu2c2 < lambda1 + lambda2` does not hold.
    TotalLoad,
}

impl std::fmt::Display for StabilityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StabilityViolation::FirstQueue => write!(f, "lambda1 > mu1*c1 is violated"),
            StabilityViolation::TotalLoad => {
                write!(f, "mu1*c1 + mu2*c2 < lambda1 + lambda2 is violated")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rate `{name}` must be strictly positive and finite, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },

    #[error("no stationary regime: {0}")]
    Unstable(StabilityViolation),

    #[error("branch points {0} and {1} coincide (parameters sit on a degenerate boundary)")]
    DegenerateBranchPoints(f64, f64),

    #[error("point {0} lies on a branch cut; a side (above/below) must be given")]
    OnCut(num_complex::Complex64),

    #[error("negative discriminant {value} at theta = {theta}")]
    NegativeDiscriminant { theta: f64, value: f64 },

    #[error("argument {value} outside the domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),

    #[error("adaptive quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    NoConvergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("principal-value pole {pole} too close to an endpoint of [{a}, {b}]")]
    PoleAtEndpoint { pole: f64, a: f64, b: f64 },

    #[error("kernel vanishes on the cut at x = {0}")]
    KernelZeroOnCut(num_complex::Complex64),

    #[error("secondary pole of the Phi1 integrand inside the cut for y = {0}")]
    SecondaryPole(f64),

    #[error("linear system is singular or ill-conditioned (condition estimate {0:e})")]
    SingularSystem(f64),

    #[error("negative probability p(0,{index}) = {value:e}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("coefficient ({n},{k}) failed: {source}")]
    Coefficient {
        n: usize,
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("truncation box too small: rim mass {0:e} exceeds 1e-4")]
    BoxTooSmall(f64),

    #[error("stationary solve did not reach residual {tol:e} (got {residual:e})")]
    OracleNoConvergence { residual: f64, tol: f64 },

    #[error("state space of {0} states exceeds the 4e6 limit")]
    StateSpaceTooLarge(usize),

    #[error("invalid pre-limit chain: {0}")]
    InvalidPrelimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse classification for reporting: `validation`, `quadrature`,
    /// `linear-system` or `oracle`.
    pub fn category(&self) -> &'static str {
        match self {
            Error::NonPositiveRate { .. }
            | Error::Unstable(_)
            | Error::DegenerateBranchPoints(..)
            | Error::InvalidConfig(_)
            | Error::InvalidPrelimit(_)
            | Error::Domain { .. }
            | Error::OnCut(_) => "validation",
            Error::NegativeDiscriminant { .. }
            | Error::NoConvergence { .. }
            | Error::PoleAtEndpoint { .. }
            | Error::KernelZeroOnCut(_)
            | Error::SecondaryPole(_) => "quadrature",
            Error::SingularSystem(_) | Error::NegativeProbability { .. } => "linear-system",
            Error::Coefficient { source, .. } => source.category(),
            Error::BoxTooSmall(_) | Error::OracleNoConvergence { .. } | Error::StateSpaceTooLarge(_) => {
                "oracle"
            }
        }
    }
}
