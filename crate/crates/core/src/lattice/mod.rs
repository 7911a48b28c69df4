//! Exact integer linear algebra for subgroups of `Z_{m^k}^n`.

mod matrix;
mod normal_form;
mod subgroup;

pub use matrix::IntMatrix;
pub use normal_form::{hermite_normal_form, smith_normal_form, unimodular_inverse, Hermite, Smith};
pub use subgroup::{invariant_factor_decomposition, AbelianDecomposition, Comparison, Lift, SubgroupRep};
