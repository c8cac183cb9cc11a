//! Twisted unions of finite metric spaces and their embeddings into ℓ₁.
//!
//! The crate builds twisted unions of pairs of metrics on a common point
//! set, checks closed-form and two-sided distance estimates against
//! shortest-path oracles, computes exact minimal ℓ₁ distortion of small
//! metrics with a cut-cone linear program, and assembles explicit ℓ₁
//! embeddings of twisted unions from embeddings of their pieces.
//!
//! ```
//! use twisted_l1::gallery::nr_twisted_cube;
//! use twisted_l1::twisted::build_twisted_union;
//!
//! let spec = nr_twisted_cube(2, 0.75, 1.0).unwrap();
//! let space = build_twisted_union(&spec).unwrap();
//! assert_eq!(space.metric().len(), 8);
//! ```

pub mod apsp;
pub mod assembly;
pub mod cutcone;
pub mod embedding;
pub mod error;
pub mod gallery;
pub mod gauge;
pub mod instances;
pub mod lp;
pub mod metric;
pub mod tableau;
pub mod transform;
pub mod twisted;

pub use cutcone::{exact_c1, CutMeasure};
pub use embedding::{measure_distortion, DistortionCertificate, L1Embedding};
pub use error::{Error, Result};
pub use metric::{FiniteMetricSpace, SemiMetric};
pub use twisted::{build_twisted_union, TwistedUnionSpace, TwistedUnionSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/twisted_unions.md")]
    mod twisted_unions {}
    #[doc = include_str!("../../../book/src/cut_cone.md")]
    mod cut_cone {}
    #[doc = include_str!("../../../book/src/assembly.md")]
    mod assembly {}
    #[doc = include_str!("../../../book/src/lower_bounds.md")]
    mod lower_bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
