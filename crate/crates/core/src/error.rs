use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    CompositeP(u64),
    #[error("modulus {0:?} is reducible or has the wrong degree")]
    ReducibleModulus(Vec<u64>),
    #[error("the zero element has no multiplicative order")]
    ZeroElement,
    #[error("argument out of range: {0}")]
    BadRange(String),
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("invalid Carlitz chain: {0}")]
    BadChain(String),
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error("characteristic {0} is even; odd characteristic required")]
    EvenCharacteristic(u64),
    #[error("polynomial does not permute the field")]
    NotPermutation,
    #[error("field size {q} exceeds the configured cap {cap}")]
    FieldTooLarge { q: u64, cap: u64 },
    #[error("the linear coefficient c must be nonzero")]
    ZeroC,
    #[error("gamma = 1 is excluded")]
    GammaOne,
    #[error("periods {n1} and {n2} are not coprime")]
    NonCoprimePeriods { n1: usize, n2: usize },
    #[error("sequence is empty")]
    EmptySequence,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}
