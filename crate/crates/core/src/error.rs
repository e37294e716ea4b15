use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is not symmetric")]
    NonSymmetric,
    #[error("cone {0:?} has linearly dependent rays")]
    NonSimplicialCone(Vec<usize>),
    #[error("not a fan: {0}")]
    NotAFan(String),
    #[error("duplicate ray {0}")]
    DuplicateRay(usize),
    #[error("invalid fan input: {0}")]
    InvalidFan(String),
    #[error("cone {0:?} is not in the fan")]
    ConeNotInFan(Vec<usize>),
    #[error("ray is not in the relative interior of the cone")]
    RayNotInteriorToCone,
    #[error("ray {0} is not the center of a stellar subdivision")]
    NotABlowup(usize),
    #[error("{0:?} is not a facet of {1:?}")]
    NotCovering(Vec<usize>, Vec<usize>),
    #[error("weight dimension {0} does not match {1}")]
    DimensionMismatch(usize, usize),
    #[error("function is not integral on cone {0:?}")]
    NotMeromorphic(Vec<usize>),
    #[error("cone {0:?} is not of codimension one")]
    NotCodimOne(Vec<usize>),
    #[error("classes live on different fans")]
    HostMismatch,
    #[error("rewrite at cone {0:?} needs rational coefficients")]
    NonIntegralRewrite(Vec<usize>),
    #[error("degree map expects a class of degree {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("cones {0:?} and {1:?} are not comparable")]
    NotComparable(Vec<usize>, Vec<usize>),
    #[error("blow-up center must have at least two rays")]
    ConeTooSmall,
    #[error("Poincaré duality over Q fails")]
    PDFails,
    #[error("missing ample witness for cone {0:?}")]
    MissingWitness(Vec<usize>),
    #[error("hypothesis fails: {0}")]
    HypothesisFails(String),
    #[error("no bases given")]
    EmptyBases,
    #[error("basis exchange fails for {0:?} and {1:?}")]
    ExchangeFails(Vec<usize>, Vec<usize>),
    #[error("invalid matroid: {0}")]
    InvalidMatroid(String),
    #[error("delete and contract sets overlap")]
    OverlappingSets,
    #[error("basepoint {0} is a loop")]
    LoopBasepoint(usize),
    #[error("matroid has a loop at {0}")]
    HasLoop(usize),
    #[error("class violation at node {node}: {reason}")]
    ClassViolation { node: String, reason: String },
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("property {name} fails at cone {cone:?}")]
    PropertyFails { name: String, cone: Vec<usize> },
    #[error("no integral solution: {0}")]
    NoSolution(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
