//! Command-line front end for `hspkit`, and the acceptance sweeps it runs
//! under `selftest`.

pub mod brute;
pub mod commands;
pub mod selftest;
