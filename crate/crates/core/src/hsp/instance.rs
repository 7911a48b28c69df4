//! JSON instance and result formats.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::json::{unwrap_rows, wrap_rows, JsonInt};
use crate::lattice::SubgroupRep;
use crate::{Error, Result};

use super::oracle::{build_coset_oracle, TableOracle};
use super::solver::{QueryStats, RoundTrace, Solution};

pub const SCHEMA: &str = "1";

/// `{"m":..,"k":..,"n":..,"hidden_subgroup_generators":[[..]]}`; `k`
/// defaults to 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub m: u64,
    #[serde(default = "one")]
    pub k: u32,
    pub n: usize,
    #[serde(default)]
    pub hidden_subgroup_generators: Vec<Vec<JsonInt>>,
}

fn one() -> u32 {
    1
}

/// Instances must stay small enough for the coset table.
pub const MAX_GROUP_SIZE: u64 = 1 << 16;

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.k == 0 || self.n == 0 {
            return Err(Error::Parse("need m >= 2, k >= 1, n >= 1".into()));
        }
        let size = (self.m as u128).checked_pow(self.k * self.n as u32);
        if size.map_or(true, |s| s > MAX_GROUP_SIZE as u128) {
            return Err(Error::Parse(format!("group order (m^k)^n exceeds {MAX_GROUP_SIZE}")));
        }
        if self.hidden_subgroup_generators.iter().any(|g| g.len() != self.n) {
            return Err(Error::Parse(format!("every generator needs {} coordinates", self.n)));
        }
        Ok(())
    }

    pub fn hidden_subgroup(&self) -> Result<SubgroupRep> {
        let gens = unwrap_rows(self.hidden_subgroup_generators.clone());
        SubgroupRep::from_generators(&gens, self.m, self.k, self.n)
    }

    /// The coset oracle hiding the instance's subgroup.
    pub fn oracle(&self) -> Result<TableOracle> {
        Ok(build_coset_oracle(&self.hidden_subgroup()?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: String,
    pub m: u64,
    pub k: u32,
    pub n: usize,
    /// HNF of the recovered subgroup's lattice, by rows.
    pub hnf: Vec<Vec<JsonInt>>,
    pub order: JsonInt,
    pub stats: QueryStats,
    pub trace: Vec<RoundTrace>,
}

impl SolveReport {
    pub fn new(solution: &Solution) -> Self {
        let h = &solution.subgroup;
        SolveReport {
            schema: SCHEMA.into(),
            m: h.m(),
            k: h.k(),
            n: h.n(),
            hnf: wrap_rows(&h.hnf().to_rows()),
            order: JsonInt(h.order()),
            stats: solution.stats.clone(),
            trace: solution.trace.clone(),
        }
    }

    pub fn subgroup(&self) -> Result<SubgroupRep> {
        let rows: Vec<Vec<BigInt>> = unwrap_rows(self.hnf.clone());
        SubgroupRep::from_hnf(self.m, self.k, crate::lattice::IntMatrix::from_rows(&rows)?)
    }
}
