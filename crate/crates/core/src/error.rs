use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value at index {0}")]
    NonFinite(i64),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("a_{index} = {value} is not positive")]
    NonpositiveA { index: usize, value: f64 },
    #[error("Verblunsky coefficient alpha_{index} = {value} lies outside (-1, 1)")]
    DomainError { index: i64, value: f64 },
    #[error("fixed-point iteration is not contracting after {iterations} iterations (last step {last_step:e})")]
    NoContraction { iterations: usize, last_step: f64 },
    #[error("fixed-point iteration did not reach tolerance in {0} iterations")]
    MaxIterExceeded(usize),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("function range leaves the analyticity domain: {0}")]
    RangeViolation(String),
    #[error("measure is not invariant under conjugation")]
    NotConjugationInvariant,
    #[error("measure has total mass {0}, expected 1")]
    NotNormalized(f64),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("point mass at x = {0} lies outside [-2, 2]")]
    SupportOutsideInterval(f64),
    #[error("point mass at the spectral edge x = {0}")]
    MassAtEdge(f64),
    #[error("|z| = {0} is not inside the disc")]
    OutsideDisc(f64),
    #[error("boundary exponent undetermined at x = {edge}: log-log slope {slope}")]
    ExponentUndetermined { edge: f64, slope: f64 },
    #[error("density is not positive at x = {0}")]
    DensityNotPositive(f64),
    #[error("moment sequence degenerate at step {0}")]
    MomentDegenerate(usize),
    #[error("Verblunsky coefficient alpha_{index} has imaginary part {imag:e}")]
    ComplexVerblunsky { index: usize, imag: f64 },
    #[error("requested depth {requested} exceeds the limit {limit}")]
    DepthExceeded { requested: usize, limit: usize },
    #[error("measure has point masses; an absolutely continuous measure is required")]
    NotAbsolutelyContinuous,
    #[error("tridiagonal eigensolver failed to converge")]
    EigenFailure,
    #[error("evaluation point too close to the spectrum ({0})")]
    NearSpectrum(String),
    #[error("operator has eigenvalues off [-2, 2]: {0:?}")]
    EigenvaluesPresent(Vec<f64>),
    #[error("resonance classification inconclusive at E = {edge}")]
    Inconclusive { edge: f64 },
    #[error("invalid radial limits: {0}")]
    InvalidC(String),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
}
