//! The exact HSP algorithm over `Z_m^n` and its reduction from `Z_{m^k}^n`.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::lattice::{Comparison, SubgroupRep};
use crate::state::{
    amplitude_amplify, Backend, Exact, GateCounts, MeasureMode, Predicate, RegisterLayout, Sampler, SparseState,
};
use crate::{Error, Result};

use super::oracle::{element_at, ComposedOracle, HspOracle};
use super::sampling::{flag_value, oracle_root_order, pairing, probe_levels, ProbeLayout};

/// How probe states are simulated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// The literal circuit: Fourier sampling through `U_f`, value registers
    /// included.
    Circuit,
    /// Value registers traced out analytically: the probe state is built on
    /// `x | b | flag` from the hidden subgroup read off the oracle's classes,
    /// and amplification is applied in closed form.
    Lumped,
    /// `Circuit` when `m^n <= AUTO_CIRCUIT_LIMIT`, else `Lumped`.
    #[default]
    Auto,
}

pub const AUTO_CIRCUIT_LIMIT: u64 = 64;

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub engine: Engine,
    pub mode: MeasureMode,
    /// The subgroup the oracle is known to hide. Enables the `K <= H`,
    /// `L <= H^perp` checks after every round and the `d` witness in traces.
    pub known: Option<SubgroupRep>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { engine: Engine::Auto, mode: MeasureMode::Deterministic, known: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub j: i32,
    pub x: Vec<u64>,
    pub pairing: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    /// Reduction stage (0 for a direct `Z_m^n` solve).
    pub stage: u32,
    pub u: Vec<u64>,
    pub probes: Vec<Probe>,
    pub found: bool,
    /// `gcd((u,y) over H^perp, m)`, when the hidden subgroup is known.
    pub d_witness: Option<u64>,
}

/// Per `Z_m^n` solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStats {
    pub rounds: u64,
    pub probes: u64,
    pub oracle_calls: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    pub oracle_calls: u64,
    pub oracle_forward: u64,
    pub oracle_inverse: u64,
    pub qft_calls: u64,
    pub qft_forward: u64,
    pub qft_inverse: u64,
    pub hadamard: u64,
    pub rounds: u64,
    pub probes: u64,
    /// Rounds of the `Z_{m^k}^n` reduction (0 when `k = 1`).
    pub reduction_rounds: u64,
    pub stages: Vec<StageStats>,
}

impl QueryStats {
    fn absorb(&mut self, counts: &GateCounts) {
        self.oracle_forward += counts.oracle_forward;
        self.oracle_inverse += counts.oracle_inverse;
        self.oracle_calls = self.oracle_forward + self.oracle_inverse;
        self.qft_forward += counts.qft_forward;
        self.qft_inverse += counts.qft_inverse;
        self.qft_calls = self.qft_forward + self.qft_inverse;
        self.hadamard += counts.hadamard;
    }
}

/// Post-amplification state of one probe, handed to observers before `x` is
/// measured.
pub struct ProbeSnapshot<'a, B: Backend> {
    pub stage: u32,
    pub u: &'a [u64],
    pub j: i32,
    pub state: &'a SparseState<B>,
    pub x_slots: &'a [usize],
    pub flag_slot: usize,
}

pub type Observer<'o, B> = Box<dyn FnMut(&ProbeSnapshot<'_, B>) + 'o>;

#[derive(Clone, Debug)]
pub struct Solution {
    pub subgroup: SubgroupRep,
    pub stats: QueryStats,
    pub trace: Vec<RoundTrace>,
    /// Every measurement outcome, in order; replayable on another backend.
    pub outcomes: Vec<Vec<u64>>,
}

pub fn solve_hsp_zmn(oracle: &dyn HspOracle, config: &SolveConfig) -> Result<Solution> {
    let mut s = Solver::<Exact>::new(config.engine, Sampler::new(config.mode));
    if let Some(h) = &config.known {
        s = s.with_known(h.clone());
    }
    let subgroup = s.solve_zmn(oracle)?;
    Ok(s.finish(subgroup))
}

pub fn solve_hsp(oracle: &dyn HspOracle, config: &SolveConfig) -> Result<Solution> {
    let mut s = Solver::<Exact>::new(config.engine, Sampler::new(config.mode));
    if let Some(h) = &config.known {
        s = s.with_known(h.clone());
    }
    let subgroup = s.solve(oracle)?;
    Ok(s.finish(subgroup))
}

/// One round for a given `u`: probe every level, measure `x` after each
/// amplification.
pub fn hsp_round(oracle: &dyn HspOracle, u: &[u64], engine: Engine, sampler: &mut Sampler) -> Result<RoundTrace> {
    let mut prepared = Prepared::<Exact>::new(oracle, engine)?;
    let mut counts = GateCounts::default();
    prepared.round(0, u, sampler, &mut counts, &mut None)
}

/// Stateful driver: accumulates statistics, the trace and the measurement
/// log across solves.
pub struct Solver<'o, B: Backend> {
    engine: Engine,
    sampler: Sampler,
    known: Option<SubgroupRep>,
    observer: Option<Observer<'o, B>>,
    stats: QueryStats,
    trace: Vec<RoundTrace>,
}

impl<'o, B: Backend> Solver<'o, B> {
    pub fn new(engine: Engine, sampler: Sampler) -> Self {
        Solver { engine, sampler, known: None, observer: None, stats: QueryStats::default(), trace: Vec::new() }
    }

    pub fn with_known(mut self, h: SubgroupRep) -> Self {
        self.known = Some(h);
        self
    }

    pub fn observe(mut self, f: impl FnMut(&ProbeSnapshot<'_, B>) + 'o) -> Self {
        self.observer = Some(Box::new(f));
        self
    }

    pub fn stats(&self) -> &QueryStats {
        &self.stats
    }

    pub fn trace(&self) -> &[RoundTrace] {
        &self.trace
    }

    pub fn finish(self, subgroup: SubgroupRep) -> Solution {
        Solution { subgroup, stats: self.stats, trace: self.trace, outcomes: self.sampler.into_log() }
    }

    pub fn solve_zmn(&mut self, oracle: &dyn HspOracle) -> Result<SubgroupRep> {
        let known = self.known.clone();
        self.solve_stage(oracle, 0, known.as_ref())
    }

    pub fn solve(&mut self, oracle: &dyn HspOracle) -> Result<SubgroupRep> {
        if oracle.k() == 1 {
            return self.solve_zmn(oracle);
        }
        let (m, k, n) = (oracle.m(), oracle.k(), oracle.n());
        let mut h0 = SubgroupRep::trivial(m, k, n)?;
        for stage in 1..=k {
            let lift = h0.lift_by_m();
            if lift.is_trivial() {
                break;
            }
            self.stats.reduction_rounds = stage as u64;
            let composed = ComposedOracle::new(oracle, &lift);
            let known_s = match &self.known {
                Some(h) => Some(preimage(&composed, h)?),
                None => None,
            };
            let s = self.solve_stage(&composed, stage, known_s.as_ref())?;
            let images: Vec<Vec<BigInt>> = s.generators().iter().map(|g| lift.phi0(&to_u64(g))).collect();
            let next = h0.join(&images)?;
            if next == h0 {
                break;
            }
            h0 = next;
        }
        if let Some(h) = &self.known {
            if !h.contains_subgroup(&h0) {
                return Err(Error::Promise("reduction produced elements outside the hidden subgroup".into()));
            }
        }
        Ok(h0)
    }

    fn solve_stage(&mut self, oracle: &dyn HspOracle, stage: u32, known: Option<&SubgroupRep>) -> Result<SubgroupRep> {
        let (m, n) = (oracle.m(), oracle.n());
        if oracle.k() != 1 {
            return Err(Error::Precondition("the Z_m^n algorithm needs k = 1".into()));
        }
        let mut prepared = Prepared::<B>::new(oracle, self.engine)?;
        let known_perp = match known {
            Some(h) => Some(h.perp()?),
            None => None,
        };
        let cap = round_cap(m, n);
        let mut kk = SubgroupRep::trivial(m, 1, n)?;
        let mut ll = SubgroupRep::trivial(m, 1, n)?;
        let mut stage_stats = StageStats::default();
        loop {
            let u = match kk.equal_or_witness(&ll.perp()?)? {
                Comparison::Equal => break,
                Comparison::Witness(u) => to_u64(&u),
            };
            stage_stats.rounds += 1;
            if stage_stats.rounds > cap {
                return Err(Error::Promise(format!(
                    "no convergence within {cap} rounds; the oracle does not hide a subgroup"
                )));
            }
            let mut counts = GateCounts::default();
            let mut round = prepared
                .round(stage, &u, &mut self.sampler, &mut counts, &mut self.observer)
                .map_err(promise_on_irrational)?;
            if let Some(hp) = &known_perp {
                round.d_witness = Some(witness_d(&u, hp, m));
            }
            stage_stats.probes += round.probes.len() as u64;
            stage_stats.oracle_calls += counts.oracle_calls();
            self.stats.absorb(&counts);
            let found: Vec<Vec<u64>> = round.probes.iter().filter(|p| p.pairing != 0).map(|p| p.x.clone()).collect();
            if found.is_empty() {
                kk = kk.join(&[u])?;
            } else {
                ll = ll.join(&found)?;
            }
            self.trace.push(round);
            if let (Some(h), Some(hp)) = (known, &known_perp) {
                if !h.contains_subgroup(&kk) || !hp.contains_subgroup(&ll) {
                    return Err(Error::Promise("round invariants K <= H, L <= H^perp broken".into()));
                }
            }
        }
        self.stats.rounds += stage_stats.rounds;
        self.stats.probes += stage_stats.probes;
        self.stats.stages.push(stage_stats);
        Ok(kk)
    }
}

/// `ceil(n log2 m) + 1`.
pub fn round_cap(m: u64, n: usize) -> u64 {
    let size = BigInt::from(m).pow(n as u32);
    (size - 1u32).bits() + 1
}

/// `gcd((u,y) for y generating H^perp, m)`.
pub fn witness_d(u: &[u64], h_perp: &SubgroupRep, m: u64) -> u64 {
    h_perp.generators().iter().fold(m, |d, y| d.gcd(&pairing(u, &to_u64(y), m)))
}

fn promise_on_irrational(e: Error) -> Error {
    match e {
        Error::IrrationalMass => {
            Error::Promise("outcome masses are irrational; the oracle does not hide a subgroup".into())
        }
        e => e,
    }
}

fn to_u64(v: &[BigInt]) -> Vec<u64> {
    v.iter().map(|x| x.to_u64().expect("reduced coordinate")).collect()
}

/// `{x in Z_m^n : phi_0(x) in H}`
fn preimage(composed: &ComposedOracle<'_>, h: &SubgroupRep) -> Result<SubgroupRep> {
    let (m, n) = (composed.m(), composed.n());
    let gens: Vec<Vec<u64>> = (0..m.pow(n as u32) as usize)
        .map(|i| element_at(i, m, n))
        .filter(|x| h.contains_u64(composed.image(x)))
        .collect();
    SubgroupRep::from_generators(&gens, m, 1, n)
}

enum EngineData {
    Circuit(ProbeLayout),
    Lumped { layout: Arc<RegisterLayout>, h_perp: Vec<Vec<u64>> },
}

/// Per-oracle simulation setup shared by all rounds of a solve.
struct Prepared<'a, B: Backend> {
    oracle: &'a dyn HspOracle,
    backend: B,
    levels: Vec<i32>,
    data: EngineData,
}

impl<'a, B: Backend> Prepared<'a, B> {
    fn new(oracle: &'a dyn HspOracle, engine: Engine) -> Result<Self> {
        let (m, n) = (oracle.m(), oracle.n());
        let use_circuit = match engine {
            Engine::Circuit => true,
            Engine::Lumped if !oracle.supports_lumped() => {
                return Err(Error::Precondition("this oracle has no classical class labels".into()))
            }
            Engine::Lumped => false,
            Engine::Auto => !oracle.supports_lumped() || (m as u128).pow(n as u32) <= AUTO_CIRCUIT_LIMIT as u128,
        };
        let data = if use_circuit {
            EngineData::Circuit(ProbeLayout::new(oracle)?)
        } else {
            let h = hidden_from_classes(oracle)?;
            let h_perp = h.perp()?.elements();
            let layout = Arc::new(RegisterLayout::builder().digits("x", m, n).qubit("b").qubit("flag").build()?);
            EngineData::Lumped { layout, h_perp }
        };
        Ok(Prepared { oracle, backend: B::with_order(oracle_root_order(oracle)), levels: probe_levels(m), data })
    }

    fn round(
        &mut self,
        stage: u32,
        u: &[u64],
        sampler: &mut Sampler,
        counts: &mut GateCounts,
        observer: &mut Option<Observer<'_, B>>,
    ) -> Result<RoundTrace> {
        let m = self.oracle.m();
        let mut probes = Vec::with_capacity(self.levels.len());
        for &j in &self.levels.clone() {
            let (state, x_slots, flag_slot) = self.amplified(u, j, counts)?;
            if let Some(obs) = observer.as_mut() {
                obs(&ProbeSnapshot { stage, u, j, state: &state, x_slots: &x_slots, flag_slot });
            }
            let zero_pairing = |x: &[u64]| pairing(u, x, m) == 0;
            let (x, _) = state.measure(&x_slots, sampler, Some(&zero_pairing))?;
            let p = pairing(u, &x, m);
            probes.push(Probe { j, x, pairing: p });
        }
        let found = probes.iter().any(|p| p.pairing != 0);
        Ok(RoundTrace { stage, u: u.to_vec(), probes, found, d_witness: None })
    }

    fn amplified(&self, u: &[u64], j: i32, counts: &mut GateCounts) -> Result<(SparseState<B>, Vec<usize>, usize)> {
        let m = self.oracle.m();
        match &self.data {
            EngineData::Circuit(pl) => {
                let prep = pl.prep_circuit(self.oracle, u, j);
                let flag = pl.flag_slot;
                let good: Predicate = Arc::new(move |l: &[u64]| l[flag] == 1);
                let start = SparseState::prepare_zero(pl.layout.clone(), self.backend.clone());
                let state = amplitude_amplify(&prep, good).run(start, counts)?;
                Ok((state, pl.x_slots.clone(), flag))
            }
            EngineData::Lumped { layout, h_perp } => {
                let n = self.oracle.n();
                let labels = h_perp.iter().flat_map(|y| {
                    let p = pairing(u, y, m);
                    (0..2u64).map(move |b| {
                        let mut l = y.clone();
                        l.push(b);
                        l.push(flag_value(m, j, p, b) as u64);
                        l
                    })
                });
                let mut state = SparseState::uniform(layout.clone(), self.backend.clone(), labels)?;
                let q = 2 * h_perp.len() as i64;
                let good = state.amplitudes().keys().filter(|l| l[n + 1] == 1).count() as i64;
                // amplitude amplification in closed form, scaled by q:
                // bad -> i(q - 2P), good -> i(2q - 2P) - q
                let b = &self.backend;
                let quarter = b.order() / 4;
                let c_bad = b.mul_root(&b.from_int(q - 2 * good), quarter);
                let c_good = b.add(&b.mul_root(&b.from_int(2 * q - 2 * good), quarter), &b.from_int(-q));
                state.scale_diagonal(|l| if l[n + 1] == 1 { &c_good } else { &c_bad }, (q * q) as u64);
                // the same query and transform counts as the circuit
                counts.oracle_forward += 2;
                counts.oracle_inverse += 1;
                counts.qft_forward += 4 * n as u64;
                counts.qft_inverse += 2 * n as u64;
                counts.hadamard += 3;
                counts.phase += 2;
                Ok((state, (0..n).collect(), n + 1))
            }
        }
    }
}

/// Reads `H = {x : f(x) = f(0)}` off the oracle's classes and checks that
/// `f` hides it.
pub fn hidden_from_classes(oracle: &dyn HspOracle) -> Result<SubgroupRep> {
    let (m, k, n) = (oracle.m(), oracle.k(), oracle.n());
    let q = oracle.modulus();
    let size = q.pow(n as u32) as usize;
    let zero_class = oracle.class_of(&vec![0; n]);
    let mut members = Vec::new();
    let mut classes = HashSet::new();
    for i in 0..size {
        let x = element_at(i, q, n);
        let c = oracle.class_of(&x);
        classes.insert(c);
        if c == zero_class {
            members.push(x);
        }
    }
    let h = SubgroupRep::from_generators(&members, m, k, n)?;
    let broken = || Error::Promise("the oracle's level sets are not the cosets of a subgroup".into());
    if h.order() != BigInt::from(members.len()) || classes.len() * members.len() != size {
        return Err(broken());
    }
    let gens: Vec<Vec<u64>> = h.generators().iter().map(|g| to_u64(g)).collect();
    for i in 0..size {
        let x = element_at(i, q, n);
        let c = oracle.class_of(&x);
        for g in &gens {
            let y: Vec<u64> = x.iter().zip(g).map(|(a, b)| (a + b) % q).collect();
            if oracle.class_of(&y) != c {
                return Err(broken());
            }
        }
    }
    Ok(h)
}
