//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong when building fields, constructing
/// permutation polynomials or deriving their inverses.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field too large: q^2 = {0} exceeds the exhaustive-verification cap 2^20")]
    FieldTooLarge(u64),
    #[error("modulus is reducible: {0}")]
    ReducibleModulus(String),
    #[error("modulus has wrong degree or is not monic: {0}")]
    DegreeMismatch(String),
    #[error("coefficient out of range: {0}")]
    CoefficientOutOfRange(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} does not divide the group order {1}")]
    NotADivisor(u32, u32),
    #[error("element index {0} out of range for this field")]
    IndexOutOfRange(u64),
    #[error("delta is not a (q+1)-th root of unity")]
    InvalidDelta,
    #[error("linearized polynomial is not full rank")]
    NotFullRank,
    #[error("chosen images collapse the rank of the linear map")]
    RankCollapse,
    #[error("gcd({0}, q-1) != 1")]
    NotCoprime(usize),
    #[error("kernel of L coincides with the kernel of s")]
    SameKernel,
    #[error("image of L coincides with the image line of g(s)")]
    ImageClash,
    #[error("operation requires odd characteristic")]
    EvenCharacteristic,
    #[error("field too small: q = {0} < 7")]
    FieldTooSmall(u32),
    #[error("{0} is not a permutation-binomial witness")]
    NotAPermutationWitness(String),
    #[error("coefficient lies outside the subfield F_q")]
    CoefficientNotInSubfield,
    #[error("lambda is not a nonzero element of the image of s")]
    LambdaNotInImage,
    #[error("base polynomial does not permute F_q")]
    BaseNotPermutation,
    #[error("polynomial does not permute F_q")]
    NotAPermutation,
    #[error("inverse recipe does not apply to family {0}")]
    WrongFamily(String),
    #[error("no (q+1)-th root of unity annihilates L(u); certification bug")]
    NoSuchDeltaJ,
    #[error("lambda^m does not lie in the kernel of x^q + delta_j x; certification bug")]
    LambdaPowerNotInKernel,
    #[error("line fails the eligibility re-check")]
    IneligibleLine,
    #[error("field too large for full listing (q > {0})")]
    FieldTooLargeForListing(u32),
    #[error("unknown family tag: {0}")]
    UnknownFamily(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("consistency check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
