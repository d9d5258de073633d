use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Solver failures and contract violations are kept
/// separate so the CLI can map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("CFL violation: dt = {dt:.6e} exceeds {max_dt:.6e}")]
    CflViolation { dt: f64, max_dt: f64 },

    #[error(
        "causal window exceeded: data supported up to r = {support:.3} cannot be evolved to \
         t = {t_end:.3} on a grid ending at r = {r_max:.3}; need r_max >= {required:.3}"
    )]
    CausalWindow {
        support: f64,
        t_end: f64,
        r_max: f64,
        required: f64,
    },

    #[error("numerical blow-up (NaN/Inf) detected at t = {t:.6}")]
    NumericalBlowup { t: f64 },

    #[error("strauss ratio undefined: state has zero gradient")]
    ZeroGradient,

    #[error(
        "truncation check inconclusive: truncated run reached sup |u| = {observed_sup:.6e} \
         >= M = {m_big:.6e}"
    )]
    TruncationInconclusive { observed_sup: f64, m_big: f64 },

    #[error("point (T, alpha) = ({t_compact:.4}, {alpha:.4}) lies outside the Einstein diamond (omega = {omega:.4} <= 0)")]
    OutsideDiamond {
        t_compact: f64,
        alpha: f64,
        omega: f64,
    },

    #[error("boundary curve slope unbounded at alpha = {alpha:.6}")]
    UnboundedSlope { alpha: f64 },

    #[error("empty integration range: [{lo:.4}, {hi:.4}]")]
    EmptyRange { lo: f64, hi: f64 },

    #[error("history too short: {got} snapshots, need at least {need}")]
    HistoryTooShort { got: usize, need: usize },

    #[error("background does not cover (t, r) = ({t:.4}, {r:.4})")]
    OutOfCoverage { t: f64, r: f64 },

    #[error("background stride {stride:.4e} too coarse for time interpolation (max allowed {max:.4e})")]
    StrideTooCoarse { stride: f64, max: f64 },

    #[error("exponent pair (q, r) = ({q}, {r}) is not of the Sobolev-extended form")]
    InadmissiblePair { q: f64, r: f64 },

    #[error("compatibility order {order} unsupported: {reason}")]
    CompatOrder { order: usize, reason: String },

    #[error("missing forcing derivatives: got {got}, need {need} for order {order}")]
    MissingForcing {
        got: usize,
        need: usize,
        order: usize,
    },

    #[error("{0}")]
    Diagnostics(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown profile: {0}")]
    UnknownProfile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
