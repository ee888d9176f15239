//! Configuration spaces, sampled curves, the arrow space `X⃗`, space maps
//! and the parameter category ∇.

mod curve;
mod map;
mod nabla;
pub mod probe;
mod space;

pub use curve::{curve_distance, curve_distance_on, curve_to_csv, grid_time, resample, Continuity, Curve, DEFAULT_GRID};
pub(crate) use curve::lerp;
pub use map::{apply_spacemap_to_curve, MapKind, SpaceMap};
pub use nabla::{nabla_compose, NablaMorphism};
pub use probe::probe_curves;
pub use space::{same_space, ConfigSpace, Dimension, SpaceRef};
