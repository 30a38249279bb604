pub mod error;
pub mod group;

pub use error::{Caps, Error, Result};
pub use group::{ball, Element, Group, GroupDescriptor, GroupRef, GroupSubset};
pub mod constructions;
pub mod graph;
pub mod lll;
pub mod shift;
