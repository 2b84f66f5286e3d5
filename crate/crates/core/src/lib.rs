//! Exact higher-order Fourier analysis over prime fields.
//!
//! Polynomials over `F_p` are handled symbolically; biases, Gowers norms
//! and correlations are computed by exhaustive enumeration into integer
//! histograms, so every reported zero is exact.

pub mod bias;
pub mod certfile;
pub mod enumerate;
pub mod error;
pub mod field;
pub mod linalg;
pub mod multilinear;
pub mod pipeline;
pub mod poly;
pub mod random;
pub mod rank;
pub mod rkstar;
pub mod suites;

pub use error::{Error, Result};
pub use field::{histogram_to_bias, Bias, FieldElement, FieldSpec, ValueHistogram};
pub use multilinear::{depolarize, polarize, MultilinearForm};
pub use poly::{parse_polynomial, Degree, HomogeneousForm, Monomial, Polynomial};
