//! Finite stages of the free pseudospace of dimension 2 and its colored
//! variants, with verifiers for word reduction, closure, independence and
//! cycles of types.

pub mod builder;
pub mod closure;
pub mod cycles;
pub mod error;
pub mod geometry;
pub mod logic;
pub mod paths;
pub mod psg;
pub mod report;
pub mod words;

pub use error::{Error, Result};
pub use geometry::{ColorChoice, ColorSpec, Flag, Geometry, Level, VertexId};
pub use report::Report;
pub use words::{Letter, Word};
