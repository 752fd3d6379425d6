use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural invariant of the model (variation bound, lag range,
    /// ignoring condition, ...) failed on concrete data.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// An operation requires the bounded-birth hypotheses but the birth
    /// function was configured in growth mode.
    #[error("mode error: {0}")]
    Mode(String),

    #[error("fixed point did not converge after {iterations} iterations (last increment {increment:e})")]
    FixedPoint { iterations: usize, increment: f64 },

    #[error("step failed at t = {time}: {source}")]
    StepFailure {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, Error>;
