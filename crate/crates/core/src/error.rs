use thiserror::Error;

/// Failures of the geometric and equation-level kernels.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Error {
    #[error("mass {index} is not strictly positive and finite ({value})")]
    InvalidMass { index: usize, value: f64 },
    #[error("non-finite coordinate in configuration")]
    NonFinite,
    #[error("bodies {i} and {j} collide")]
    Collision { i: usize, j: usize },
    #[error("squared distances around body {body}'s opposite triangle are not realizable (Heron discriminant {discriminant:e})")]
    NotRealizable { body: usize, discriminant: f64 },
    #[error(
        "signed areas violate the zero-sum identity (relative defect {defect:e}); not convex in the labelled order"
    )]
    InconsistentConvexity { defect: f64 },
    #[error("argument outside domain: {0}")]
    Domain(&'static str),
    #[error("configuration not centred (relative offset {offset:e})")]
    NotCentered { offset: f64 },
    #[error("multiplier fit is rank deficient")]
    DegenerateFit,
    #[error("configuration is not convex in the labelled order")]
    NotConvex,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
