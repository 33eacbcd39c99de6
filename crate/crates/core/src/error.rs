use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("weight system {0:?} is not well-formed")]
    NotWellFormed([u64; 4]),
    #[error("monomial {monomial:?} has weighted degree {actual}, expected {expected}")]
    InhomogeneousMonomial {
        monomial: [u32; 4],
        actual: u64,
        expected: u64,
    },
    #[error("surface is not a K3 candidate (degree {degree} != weight sum {weight_sum})")]
    NotK3 { degree: u64, weight_sum: u64 },
    #[error("rank mismatch: lattice rank {expected}, divisor length {actual}")]
    RankMismatch { expected: usize, actual: usize },
    #[error("no {0} singularity to blow up")]
    TargetAbsent(String),
    #[error("cannot parse singularity label {0:?}")]
    BadLabel(String),
    #[error("unknown condition profile {0:?}")]
    UnknownProfile(String),
    #[error("character index {j} out of range for group order {m}")]
    CharacterOutOfRange { m: u64, j: u64 },
    #[error("group order must be at least 2, got {0}")]
    GroupOrderTooSmall(u64),
    #[error("certificate rejected: {0}")]
    CertificateRejected(String),
    #[error("last exceptional block is not a pair; the divisor triple needs an A_n blow-up with n > 1")]
    NoPairBlock,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("catalog: {0}")]
    Catalog(String),
    #[error("unknown catalog entry {0:?}")]
    UnknownEntry(String),
}

impl Error {
    /// True for errors caused by malformed input rather than a failed check.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::CertificateRejected(_) | Error::SearchExhausted(_)
        )
    }
}
