//! Private information retrieval from MDS-coded storage with colluding servers.
//!
//! Every file is striped across `N` servers with an `(N, K)` MDS code and any
//! `T` servers may pool their queries. The user disguises the query for the
//! wanted file so that it has the same subspace structure as the queries for
//! the other files. Linear redundancy among the queried undesired symbols is
//! then squeezed out with per-server combination matrices, which pushes the
//! rate past the FGHK value.
//!
//! Layers, bottom up:
//!
//! * [`gf`]: prime-field arithmetic.
//! * [`linalg`]: dense matrices, RREF, subspaces and MDS checks.
//! * [`codes`]: GRS generators, the `H` and `H*` query-mixing matrices.
//! * [`scheme`]: query plans, combination strategies, answers and decoding.
//! * [`audit`]: structural privacy, spanning and redundancy checks.
//! * [`rates`]: closed-form rates as exact rationals.

pub mod audit;
pub mod codes;
pub mod combinatorics;
pub mod gf;
pub mod linalg;
pub mod parallel;
pub mod rates;
pub mod scheme;

pub use gf::{Field, FieldElement};
pub use linalg::{Matrix, Subspace};
pub use rates::Rational;

/// Everything that can go wrong, from field arithmetic up to decoding.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("moduli differ: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a supported prime modulus")]
    NotPrime(u64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Vandermonde nodes are not distinct")]
    DuplicateNodes,
    #[error("linear system has no solution")]
    NoSolution,
    #[error("no valid matrix found after {0} attempts; try a larger field")]
    RetriesExhausted(usize),
    #[error("field F_{q} is too small, need q >= {need}")]
    FieldTooSmall { q: u64, need: u64 },
    #[error("generator is not MDS")]
    NotMds,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("downloaded undesired symbols of file {file} do not span the interference")]
    SpanFailure { file: usize },
    #[error("formula not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ModulusMismatch { .. } => "modulus_mismatch",
            Error::DivisionByZero => "division_by_zero",
            Error::NotPrime(_) => "not_prime",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::DuplicateNodes => "duplicate_nodes",
            Error::NoSolution => "no_solution",
            Error::RetriesExhausted(_) => "retries_exhausted",
            Error::FieldTooSmall { .. } => "field_too_small",
            Error::NotMds => "not_mds",
            Error::InvalidParams(_) => "invalid_params",
            Error::SpanFailure { .. } => "span_failure",
            Error::NotApplicable(_) => "not_applicable",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
