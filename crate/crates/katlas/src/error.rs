use thiserror::Error;

/// Error type shared by all solver and algebra operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// F stays negative on the searched range; the instance does not realize
    /// the required sign structure of the potential.
    #[error("F has no positive zero in the searched range")]
    NoPositiveZero,

    #[error("integrator step size underflow at r = {r:.6e}")]
    IntegratorFailure { r: f64 },

    #[error("trajectory classification inconclusive: r_max = {r_max:.3e} exhausted")]
    Inconclusive { r_max: f64 },

    #[error("no shooting bracket separating {target} crossings found below zeta0 = {limit:.6e}")]
    BracketNotFound { target: usize, limit: f64 },

    #[error("solver failed to converge: {0}")]
    NoConvergence(String),

    #[error("tail too short to fit a decay rate")]
    TailTooShort,

    #[error("not applicable for N = {n}, a = {a}")]
    NotApplicable { n: u32, a: f64 },

    #[error("degenerate case a = 0 must route through h_roots/beta_degenerate")]
    DegenerateRequiresA,

    #[error("level c = {c:.6e} outside (0, c_star = {c_star:.6e}]")]
    OutOfRange { c: f64, c_star: f64 },

    #[error("continuum case (N = 4, a = 0, b·D = 1): enumerate with continuum_family")]
    ContinuumCase,

    #[error("state is not on the continuum: b·D = {s:.17e} differs from 1")]
    NotOnContinuum { s: f64 },

    #[error("b = {b:.6e} is outside the two-branch regime (b_star = {b_star:.6e})")]
    OutOfRegime { b: f64, b_star: f64 },

    #[error("atlas holds no computed branch")]
    EmptyAtlas,

    #[error("cache I/O: {0}")]
    CacheIo(#[from] std::io::Error),

    #[error("stored record malformed: {0}")]
    RecordFormat(String),
}
