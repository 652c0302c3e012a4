//! curvkit: comparison-geometry computations on finite and sampled metric
//! spaces — model-plane trigonometry, CBB/CAT four-point tests, short-map
//! extension, barycentric simplices, developments, gradient and radial
//! curves, and warped-product constructions.

pub mod cli;
pub mod comparison;
pub mod extension;
pub mod flows;
pub mod io;
pub(crate) mod linalg;
pub mod metric;
pub mod model;
pub mod suite;
pub mod warped;

pub use comparison::Verdict;
pub use metric::{FiniteMetric, SampledSpace, Witness};
pub use model::{Curvature, Model, ModelPoint, TriangleSides};
