use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("variable lists differ: {left} vs {right}")]
    RingMismatch { left: String, right: String },

    #[error("negative power of non-unit image {image} for variable {var}")]
    NonUnitInverse { var: String, image: String },

    #[error("laurent variable {var} must map to a unit monomial, got {image}")]
    LaurentImage { var: String, image: String },

    #[error("poly variable {var} carries negative exponent {exp}")]
    NegativePolyExponent { var: String, exp: i32 },

    #[error("{0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("composite is nonzero on column {column}: {entry}")]
    NotAComplex { column: usize, entry: String },
}
