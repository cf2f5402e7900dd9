use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degree overflow: degree {degree} exceeds dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("expected a form of degree {expected}, got degree {found}")]
    WrongDegree { expected: usize, found: usize },
    #[error("frame dimension {0} is not supported (1..=16)")]
    UnsupportedDimension(usize),
    #[error("metric is not symmetric positive definite (asymmetry {asymmetry:e})")]
    NotPositiveDefinite { asymmetry: f64 },
    #[error("structure constants are not antisymmetric (residual {0:e})")]
    NotAntisymmetric(f64),
    #[error("Jacobi identity fails (residual {0:e})")]
    JacobiFailure(f64),
    #[error("J is not an almost complex structure: |J^2 + I| = {0:e}")]
    NotAlmostComplex(f64),
    #[error("metric is not J-invariant: |g(J.,J.) - g| = {0:e}")]
    NotCompatible(f64),
    #[error("J is not integrable: Nijenhuis residual {0:e}")]
    NotIntegrable(f64),
    #[error("Lee form formulas disagree (residual {0:e})")]
    LeeFormMismatch(f64),
    #[error("metric is not pluriclosed: |dH| = {0:e}")]
    NotPluriclosed(f64),
    #[error("model is not Bismut-Hermitian-Einstein: |rho_B| = {0:e}")]
    NotBhe(f64),
    #[error("V vanishes: the model is Kaehler (|V| = {0:e})")]
    VanishingLeeField(f64),
    #[error("principal curvature is not basic of type (1,1) (residual {0:e})")]
    NotBasic(f64),
    #[error("curvature forms cannot be realized by the transverse isotropy (residual {0:e})")]
    UnrealizableCurvature(f64),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("class constraint violated: {0}")]
    ClassConstraint(String),
    #[error("scalar curvature is not positive (min R = {0:e})")]
    NonPositiveScalarCurvature(f64),
    #[error("incompatible right-hand side: compatibility defect {0:e}")]
    IncompatibleRhs(f64),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("Jacobian rank collapse (sigma_max = {0:e})")]
    RankCollapse(f64),
}
