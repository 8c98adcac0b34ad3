use thiserror::Error;

/// Which constitutive singularity an evaluation ran into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoleKind {
    /// Dirichlet resonance of the core, a pole of the effective permeability.
    Dirichlet,
    /// Generalized electrostatic resonance, a pole of the inverse permittivity.
    Electrostatic,
    /// The coating permittivity vanishes (`nu = 1`).
    Coating,
}

impl std::fmt::Display for PoleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PoleKind::Dirichlet => "Dirichlet (mu_eff)",
            PoleKind::Electrostatic => "electrostatic (inverse permittivity)",
            PoleKind::Coating => "coating singularity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry a={a}, b={b}: {reason}")]
    Geometry { a: f64, b: f64, reason: &'static str },

    #[error("missing required configuration key `{0}`")]
    MissingKey(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what}: argument {value} outside the supported domain")]
    Domain { what: &'static str, value: f64 },

    #[error("lattice sum S_{0} is conditionally convergent and unused by the square-lattice matrix")]
    ConditionallyConvergent(u32),

    #[error("(b/a)^(2N) = {ratio:e} overflows for N = {order}; reduce the multipole order")]
    Overflow { order: usize, ratio: f64 },

    #[error("closure singular: |1 - 2 lambda| < 1e-12 at lambda = {0}")]
    SingularClosure(f64),

    #[error("nu = {nu} lies within the exclusion radius of a {kind} pole at {pole}")]
    PoleProximity { nu: f64, pole: f64, kind: PoleKind },

    #[error("mode with lambda = {lambda} has non-positive energy norm {energy}; truncation artifact")]
    NonPositiveEnergy { lambda: f64, energy: f64 },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("bisection bracket [{lo}, {hi}] has f = ({f_lo}, {f_hi}) without a sign change")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("fixed-point iteration did not converge after {} iterates (last {:?})", history.len(), history.last())]
    NonConvergence { history: Vec<f64> },

    #[error("energy flow requested for a non-propagating response (n_eff^2 = {0})")]
    NotPropagating(f64),
}

impl Error {
    /// Numerical failures (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eigensolver(_)
                | Error::Bracket { .. }
                | Error::NonConvergence { .. }
                | Error::NonPositiveEnergy { .. }
                | Error::Overflow { .. }
                | Error::PoleProximity { .. }
                | Error::SingularClosure(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
