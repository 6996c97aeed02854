//! Escaping hairs of explicit entire functions, through their logarithmic
//! transforms.
//!
//! The crate models `λ·e^z` and `a·cosh z`, rescales them until the
//! postsingular set sits well inside the unit disk and the logarithmic
//! transform expands by a factor of at least 2, and then builds unbounded
//! escaping curves for a given external address by repeated pullback. The
//! topological facts the construction relies on have standalone numerical
//! verifiers in [`lemmas`].
//!
//! Most capabilities have a runnable example under `examples/`.

pub mod error;
pub mod geometry;
pub mod hairs;
pub mod lemmas;
pub mod model;
pub mod normalize;
pub mod render;
pub mod symbolic;

pub use error::{Error, Result};
pub use geometry::{ComplexPoint, Disk, HalfPlane, Polyline};
pub use model::{EntireModel, Family, LogTransform, TractLabel};
