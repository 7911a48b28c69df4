//! Sparse state simulation over mixed-radix registers.

mod backend;
mod circuit;
mod layout;
mod measure;
mod sparse;

pub use backend::{sample_exact, Backend, Exact, Float, FloatAmp, FLOAT_PRUNE};
pub use circuit::{amplitude_amplify, Circuit, ClassicalMap, GateCounts, LabelFn, Predicate, Step};
pub use layout::{LayoutBuilder, Register, RegisterKind, RegisterLayout};
pub use measure::{MeasureMode, Prefer, Sampler};
pub use sparse::{SparseState, MAX_SUPPORT};

/// A basis label: one value per slot of the layout.
pub type Label = Vec<u64>;
