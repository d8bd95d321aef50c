use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    BadLength {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("invalid tolerances: {0}")]
    InvalidTolerances(&'static str),
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("subspaces live in different ambient spaces ({0} vs {1})")]
    MismatchedAmbient(usize, usize),
    #[error("matrix is not idempotent (residual {0:e})")]
    NotIdempotent(f64),
    #[error("range and kernel are not complementary")]
    NotComplementary,
    #[error("perturbed range and kernel lost complementarity")]
    PerturbationTooLarge,
    #[error("the requested generalized inverse does not exist")]
    NotExists,
    #[error("core matrix is ill-conditioned (sigma_min {sigma_min:e} <= threshold {threshold:e})")]
    IllConditioned { sigma_min: f64, threshold: f64 },
    #[error("no group inverse: index exceeds one")]
    NoGroupInverse,
    #[error("representations disagree (max deviation {0:e})")]
    RepresentationMismatch(f64),
    #[error("witness does not produce idempotent products")]
    BadWitness,
    #[error("idempotent ranks do not sum to the ambient dimension")]
    DimMismatch,
    #[error("side condition violated: {0}")]
    SideConditionViolated(&'static str),
}
