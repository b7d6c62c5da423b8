//! Detection-to-yield estimation numerics.
//!
//! The crate turns bounding-box detector output into fruit counts and
//! standard detection metrics, provides response-based knowledge-distillation
//! losses verified on tiny seeded networks, and fits count-correction and
//! yield regression models by gradient descent with a closed-form oracle.
//!
//! Everything here is pure computation over in-memory data; file formats,
//! CSV/SVG reports, and the command-line surface live in the `orchard` binary
//! crate.

pub mod distill;
pub mod geometry;
pub mod metrics;
pub mod persist;
pub mod regress;

#[cfg(feature = "testkit")]
pub mod testkit;
