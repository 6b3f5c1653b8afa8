use alloc::string::String;
use alloc::vec::Vec;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input (unknown label, dimension mismatch, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A configured enumeration cap was hit. `partial` is the count reached so far.
    #[error("resource cap exceeded in {what}: {partial} elements (cap {cap})")]
    Resource {
        what: &'static str,
        partial: usize,
        cap: usize,
        /// Best value known when the cap was hit, if the operation tracks one.
        upper_bound: Option<f64>,
    },

    /// A partition region received no samples, so its measure is unknown.
    #[error("region {region} received no samples")]
    EmptyRegion { region: usize },

    #[error("exhaustive search refused: {vertices} vertices exceeds limit {limit}")]
    TooLarge { vertices: usize, limit: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("eigensolver did not converge after {iterations} iterations")]
    NotConverged { iterations: usize, residuals: Vec<f64> },

    /// The base point lies in the singular set; `witness` is the offending word.
    #[error("base point is singular: word {witness:?} moves it by {displacement}")]
    Singular { witness: Vec<String>, displacement: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
