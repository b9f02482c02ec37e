//! Auditing continuous maps ℝⁿ → ℝᵐ (n > m) for unavoidably large fibers.
//!
//! Every such map identifies two points at distance `2M` for any `M`: on an
//! m-sphere of radius `M`, some antipodal pair has equal images. This crate
//! searches for those pairs ([`collision`]), extracts and classifies
//! approximate fibers ([`fibers`]), provides closed-form fiber geometry for
//! the two-point map ([`urysohn`]), and offers a discontinuous grid codec
//! whose fibers are bounded ([`quantizer`]).

pub mod collision;
pub mod error;
pub mod fibers;
pub mod figure;
pub mod geometry;
pub mod maps;
pub mod quantizer;
pub mod sampling;
pub mod urysohn;

mod linalg;

pub use error::{Error, Result};
pub use geometry::{distance, farthest_pair, FarthestPair, Point, PolylinePath, SphereEmbedding};
pub use maps::{
    parse_descriptor, serialize_descriptor, DenseMatrix, FnMap, MapDescriptor, MapEval,
};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use sampling::{BoxBounds, DEFAULT_SEED};
