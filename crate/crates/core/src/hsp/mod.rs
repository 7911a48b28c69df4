//! Exact hidden subgroup algorithm for `Z_{m^k}^n`.

mod instance;
mod oracle;
mod sampling;
mod solver;

pub use instance::{Instance, SolveReport, MAX_GROUP_SIZE, SCHEMA};
pub use oracle::{bits_for, build_coset_oracle, element_at, index_of, ComposedOracle, HspOracle, TableOracle};
pub use sampling::{
    flag_value, fourier_sample, fourier_sample_with, is_prime, oracle_root_order, pairing, probe_levels, witness_level,
    ProbeLayout,
};
pub use solver::{
    hidden_from_classes, hsp_round, round_cap, solve_hsp, solve_hsp_zmn, witness_d, Engine, Observer, Probe,
    ProbeSnapshot, QueryStats, RoundTrace, Solution, SolveConfig, Solver, StageStats, AUTO_CIRCUIT_LIMIT,
};
