use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside an operation's domain (ν ∉ P_m, t ≤ 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A metric specification violates its invariants (a_i ∉ Δ_n, w ≤ 0, ...).
    #[error("invalid metric spec: {0}")]
    Spec(String),

    /// A quadrature or minimization budget was exhausted. Carries the best
    /// estimate and an error bound so callers can decide to keep going.
    #[error("accuracy budget exceeded in {context}: best estimate {best}, error bound {error_bound}")]
    Accuracy {
        context: String,
        best: f64,
        error_bound: f64,
    },

    #[error("empty exponent set: {0}")]
    EmptyExponentSet(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
