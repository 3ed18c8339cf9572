//! Multi-scale end structure of metric spaces.
//!
//! This crate computes finite-scale surrogates of the "ways to tend to
//! infinity" of an unbounded metric space from a truncated sample of it:
//!
//! * [`instance`] — finite pseudometric instances (point clouds and weighted
//!   graphs) with a base point and a truncation radius, plus the scale-level
//!   decision procedures (boundedness, control, chain connectivity).
//! * [`maps`] — sampled maps between instances and their bornologous modulus,
//!   properness table, and homotopy distance.
//! * [`filtration`] — the (cut-off, scale)-indexed matrix of annulus chain
//!   components, its inclusion/coarsening transition maps, end threads, and
//!   stabilization diagnostics.
//! * [`sigma`] — escape chains from the base point, their classes, and the
//!   comparison map into end threads.
//! * [`nonscattering`] — witness search for the single-scale annulus
//!   connectivity property and its structural consequences.
//! * [`symbolic`] — exact-arithmetic certificates (chain schemas and gap
//!   certificates) deciding connectivity of the infinite part of parametric
//!   spaces with polynomial coordinates.
//! * [`spaces`] — generators for the built-in example spaces, file ingestion,
//!   and report serialization.

pub mod error;
pub mod filtration;
pub mod instance;
pub mod maps;
pub mod nonscattering;
pub mod scale;
pub mod sigma;
pub mod spaces;
pub mod symbolic;

mod neighbors;
mod unionfind;

pub use error::{Error, Result};
pub use instance::{ArchimedeanReport, FiniteCoarseInstance, MetricKind, PointIndex};
pub use scale::ScaleLadder;
