//! Black-box groups: backends, element arithmetic, the exact swap test and
//! membership, abelian presentations, superposition pyramids, polycyclic
//! series, order, derived series and abelian factor decompositions.

pub mod arith;
pub mod backend;
pub mod pyramid;
pub mod quantum;
pub mod series;
pub mod zoo;

pub use arith::{commutator, conjugate, identity_from, inverse, order_divides_power, power, NotDividing};
pub use backend::{closure, Group, GroupBackend, GroupFile, GroupSpec, PermutationGroup, TableGroup, UnitsGroup};
pub use pyramid::{
    build_group_superposition, extend_superposition, extend_superposition_coherent, Extension, ExtensionTrace, Pyramid,
};
pub use quantum::{left_multiply, GroupStats, Prep, Presentation, PresentationOracle, Session, SwapOracle};
pub use series::{
    abelian_factor_decomposition, build_polycyclic_series, commutator_subgroup, derived_series, group_order,
    DerivedTerm, PolycyclicSeries, SeriesOutcome, SeriesReport,
};
