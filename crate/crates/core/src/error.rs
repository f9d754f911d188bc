use thiserror::Error;

/// Position of a spectral quantity: frequency channel `channel` and bin index `bin`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinRef {
    pub channel: usize,
    pub bin: usize,
}

impl std::fmt::Display for BinRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "channel {} bin {}", self.channel, self.bin)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("spectral matrix is not Hermitian at {at} (deviation {deviation:e})")]
    NonHermitian { at: BinRef, deviation: f64 },

    #[error("spectral matrix is not positive semidefinite at {at} (eigenvalue {eigenvalue:e})")]
    NotPsd { at: BinRef, eigenvalue: f64 },

    #[error("spectral factor is singular at {at} (condition estimate {condition:e})")]
    SingularFactor { at: BinRef, condition: f64 },

    #[error("target bispectrum is infeasible: pure spectrum loses positivity at {at} (deficit {deficit:e})")]
    InfeasibleBispectrum { at: BinRef, deficit: f64 },

    #[error("pure spectrum cannot be inverted at {at} where the bispectrum is nonzero")]
    SingularPureSpectrum { at: BinRef },

    #[error("coefficient index {index} does not fit a block of {block_len} samples")]
    CoefficientOverflow { index: usize, block_len: usize },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
