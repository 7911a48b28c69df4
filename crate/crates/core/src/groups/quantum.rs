//! State preparations for subgroup superpositions, the exact swap test,
//! membership, and abelian presentations through the hidden subgroup solver.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::root_order_for;
use crate::hsp::{solve_hsp, solve_hsp_zmn, Engine, HspOracle, SolveConfig};
use crate::json::JsonInt;
use crate::lattice::{invariant_factor_decomposition, AbelianDecomposition, SubgroupRep};
use crate::state::{
    Backend, Circuit, ClassicalMap, Exact, GateCounts, MeasureMode, Register, RegisterLayout, SparseState,
};
use crate::{Error, Result};

use super::arith::{order_divides_power, plain_inverse, power};
use super::backend::{Group, GroupBackend};

/// A unitary taking `|0>` on `layout` to a state whose group register sits
/// at slot `out`.
#[derive(Clone)]
pub struct Prep {
    pub layout: Arc<RegisterLayout>,
    pub circuit: Circuit,
    pub out: usize,
    /// Roots of unity the circuit needs.
    pub root_order: u64,
}

impl Prep {
    pub fn run(&self) -> Result<SparseState<Exact>> {
        self.run_with_order(num_integer::lcm(4, self.root_order))
    }

    /// Runs over `Q(zeta_order)`; `order` must be a multiple of `root_order`.
    pub fn run_with_order(&self, order: u64) -> Result<SparseState<Exact>> {
        let backend = Exact::new(order as usize);
        self.circuit.run(SparseState::prepare_zero(self.layout.clone(), backend), &mut GateCounts::default())
    }

    /// `mu_u o self`: the output register left-multiplied by `u`.
    pub fn left_multiplied(&self, group: &Group, u: u64) -> Prep {
        let mut p = self.clone();
        p.circuit = p.circuit.map(left_multiply(group, u, self.out));
        p
    }

    /// The polycyclic loader for `<g_1, ..., g_h>` with exact factor orders
    /// `o_i = |G_i / G_{i-1}|`: uniform exponents `e_i in Z_{o_i}`, XOR of
    /// `g_1^{e_1} ... g_h^{e_h}` into the group register, then the exponent
    /// registers are cleared again from the normal form of the result.
    pub fn loader(group: &Group, elements: &[u64], orders: &[u64]) -> Result<Prep> {
        assert_eq!(elements.len(), orders.len());
        let mut b = RegisterLayout::builder().bits("g", group.bits());
        for (i, &o) in orders.iter().enumerate() {
            if o < 2 {
                return Err(Error::Precondition("loader levels need factor order at least 2".into()));
            }
            b = b.digits(&format!("e{i}"), o, 1);
        }
        let layout = Arc::new(b.build()?);
        let h = orders.len();
        let total = orders.iter().try_fold(1u64, |a, &o| a.checked_mul(o)).filter(|&t| t <= 1 << 20);
        let Some(total) = total else {
            return Err(Error::StateTooLarge(1 << 20));
        };
        // normal forms: every element of G_h once
        let mut normal: HashMap<u64, Vec<u64>> = HashMap::with_capacity(total as usize);
        let mut exps = vec![0u64; h];
        for _ in 0..total {
            let g = product(group.as_ref(), elements, &exps);
            if normal.insert(g, exps.clone()).is_some() {
                return Err(Error::Promise("series factor orders do not give unique normal forms".into()));
            }
            for (e, &o) in exps.iter_mut().zip(orders) {
                *e += 1;
                if *e < o {
                    break;
                }
                *e = 0;
            }
        }
        let normal = Arc::new(normal);
        let mut circuit = Circuit::new();
        for i in 0..h {
            circuit = circuit.qft(1 + i);
        }
        let (grp, els) = (group.clone(), elements.to_vec());
        let load = Arc::new(move |l: &mut [u64]| l[0] ^= product(grp.as_ref(), &els, &l[1..]));
        let shift = |sign: bool| {
            let normal = normal.clone();
            let orders = orders.to_vec();
            Arc::new(move |l: &mut [u64]| {
                if let Some(nf) = normal.get(&l[0]) {
                    for i in 0..orders.len() {
                        let o = orders[i];
                        l[1 + i] = if sign { (l[1 + i] + nf[i]) % o } else { (l[1 + i] + o - nf[i]) % o };
                    }
                }
            }) as crate::state::LabelFn
        };
        circuit = circuit.map(ClassicalMap::involution("load", load)).map(ClassicalMap::new(
            "unload",
            shift(false),
            shift(true),
        ));
        let root_order = orders.iter().fold(1u64, |a, &o| num_integer::lcm(a, root_order_for(o) as u64));
        Ok(Prep { layout, circuit, out: 0, root_order })
    }

    /// Preparation of a basis state `|code>` on a single group register.
    pub fn basis(group: &Group, code: u64) -> Result<Prep> {
        let layout = Arc::new(RegisterLayout::builder().bits("g", group.bits()).build()?);
        let circuit = Circuit::new().map(ClassicalMap::involution("load", Arc::new(move |l: &mut [u64]| l[0] ^= code)));
        Ok(Prep { layout, circuit, out: 0, root_order: 1 })
    }
}

/// `g_1^{e_1} ... g_h^{e_h}`.
pub(crate) fn product(g: &dyn GroupBackend, elements: &[u64], exps: &[u64]) -> u64 {
    elements.iter().zip(exps).fold(g.identity(), |acc, (&x, &e)| g.mul(acc, power(g, x, e)))
}

/// `v -> u v` on valid codes of slot `slot`, identity elsewhere.
pub fn left_multiply(group: &Group, u: u64, slot: usize) -> ClassicalMap {
    let ui = plain_inverse(group.as_ref(), u);
    let by = |x: u64| {
        let g = group.clone();
        Arc::new(move |l: &mut [u64]| {
            if g.is_element(l[slot]) {
                l[slot] = g.mul(x, l[slot]);
            }
        }) as crate::state::LabelFn
    };
    ClassicalMap::new("mu", by(u), by(ui))
}

/// Counters for one group computation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupStats {
    pub swap_tests: u64,
    pub membership_tests: u64,
    pub presentations: u64,
    pub hsp_solves: u64,
    pub hsp_rounds: u64,
    pub hsp_oracle_calls: u64,
    pub fourier_samples: u64,
    pub kickbacks: u64,
}

/// Shared context of a group computation: the group, `m`, how the hidden
/// subgroup solver is run, and counters.
pub struct Session {
    pub group: Group,
    pub m: u64,
    pub engine: Engine,
    mode: MeasureMode,
    solves: u64,
    /// Check the equal-or-orthogonal promise before every swap test (on by
    /// default in debug builds).
    pub check_promises: bool,
    pub stats: GroupStats,
}

impl Session {
    pub fn new(group: Group, m: u64) -> Self {
        assert!(m >= 2, "m must be at least 2");
        Session {
            group,
            m,
            engine: Engine::Auto,
            mode: MeasureMode::Deterministic,
            solves: 0,
            check_promises: cfg!(debug_assertions),
            stats: GroupStats::default(),
        }
    }

    pub fn with_mode(mut self, mode: MeasureMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_promise_checks(mut self, on: bool) -> Self {
        self.check_promises = on;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn mode(&self) -> MeasureMode {
        self.mode
    }

    /// Measurement mode for the next sub-computation; seeded runs get a
    /// distinct stream each time.
    pub(crate) fn next_mode(&mut self) -> MeasureMode {
        self.solves += 1;
        match self.mode {
            MeasureMode::Seeded(s) => {
                MeasureMode::Seeded(s.wrapping_add(self.solves.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
            }
            d => d,
        }
    }

    fn config(&mut self) -> SolveConfig {
        SolveConfig { engine: self.engine, mode: self.next_mode(), known: None }
    }

    fn absorb(&mut self, sol: &crate::hsp::Solution) {
        self.stats.hsp_solves += 1;
        self.stats.hsp_rounds += sol.stats.rounds;
        self.stats.hsp_oracle_calls += sol.stats.oracle_calls;
    }

    /// True iff the prepared states are equal up to a phase; they must be
    /// equal or orthogonal. Solved as a hidden subgroup problem over `Z_2`.
    pub fn swap_test(&mut self, p1: &Prep, p2: &Prep) -> Result<bool> {
        let oracle = SwapOracle::new(p1, p2)?;
        if self.check_promises {
            check_swap_promise(p1, p2)?;
        }
        let mut config = self.config();
        config.engine = Engine::Circuit;
        let sol = solve_hsp_zmn(&oracle, &config)?;
        self.absorb(&sol);
        self.stats.swap_tests += 1;
        Ok(sol.subgroup.contains_u64(&[1]))
    }

    /// `u in K`, comparing `|K>` with `|uK>`.
    pub fn is_member(&mut self, u: u64, k_prep: &Prep) -> Result<bool> {
        self.stats.membership_tests += 1;
        let shifted = k_prep.left_multiplied(&self.group, u);
        self.swap_test(k_prep, &shifted)
    }

    /// Relations among `u_1..u_n` modulo the normal subgroup prepared by
    /// `k_prep`, found as the subgroup hidden by `x -> |u_1^{x_1}...u_n^{x_n} K>`.
    pub fn presentation(&mut self, gens: &[u64], k_prep: &Prep) -> Result<Presentation> {
        if gens.is_empty() {
            return Err(Error::Precondition("a presentation needs at least one generator".into()));
        }
        let mut ks = Vec::with_capacity(gens.len());
        for &u in gens {
            ks.push(order_divides_power(self.group.as_ref(), u, self.m).map_err(|e| Error::Group(e.to_string()))?);
        }
        let k = ks.iter().copied().max().unwrap_or(0).max(1);
        let oracle = PresentationOracle::new(self.group.clone(), self.m, k, gens, k_prep)?;
        let config = self.config();
        let sol = solve_hsp(&oracle, &config)?;
        self.absorb(&sol);
        self.stats.presentations += 1;
        let relations = sol.subgroup.hnf().clone();
        let decomposition = invariant_factor_decomposition(&relations)?;
        Ok(Presentation {
            generators: gens.to_vec(),
            k,
            exponents: ks,
            relations: relations.to_rows().into_iter().map(|r| r.into_iter().map(JsonInt).collect()).collect(),
            decomposition,
            subgroup: sol.subgroup,
        })
    }
}

/// Relation lattice of `u_1..u_n` modulo `K`.
#[derive(Clone, Debug, Serialize)]
pub struct Presentation {
    pub generators: Vec<u64>,
    /// Exponent `k` of the domain `Z_{m^k}^n`.
    pub k: u32,
    /// Per generator, the least `k_i` with `u_i^{m^{k_i}} = 1`.
    pub exponents: Vec<u32>,
    /// Lattice basis, one relation per column.
    pub relations: Vec<Vec<JsonInt>>,
    pub decomposition: AbelianDecomposition,
    #[serde(skip)]
    pub subgroup: SubgroupRep,
}

impl Presentation {
    /// Relations as exponent vectors (columns of the basis).
    pub fn relation_vectors(&self) -> Vec<Vec<u64>> {
        let n = self.generators.len();
        (0..n)
            .map(|j| (0..n).map(|i| self.relations[i][j].0.to_u64().expect("relation entries are small")).collect())
            .collect()
    }

    /// Checks by membership that every relation evaluates into `K`.
    pub fn verify(&self, session: &mut Session, k_prep: &Prep) -> Result<bool> {
        for rel in self.relation_vectors() {
            let g = product(session.group.as_ref(), &self.generators, &rel);
            if !session.is_member(g, k_prep)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn prefixed(layout: &RegisterLayout, prefix: &str) -> Vec<Register> {
    layout.registers().iter().map(|r| Register { name: format!("{prefix}.{}", r.name), kind: r.kind.clone() }).collect()
}

fn same_shape(a: &RegisterLayout, b: &RegisterLayout) -> bool {
    a.width() == b.width() && (0..a.width()).all(|s| a.slot_modulus(s).ok() == b.slot_modulus(s).ok())
}

fn check_swap_promise(p1: &Prep, p2: &Prep) -> Result<()> {
    let order = num_integer::lcm(4, num_integer::lcm(p1.root_order, p2.root_order));
    let (a, b) = (p1.run_with_order(order)?, p2.run_with_order(order)?);
    let be = a.backend().clone();
    if a.equal_up_to_phase(&b) {
        return Ok(());
    }
    let mut acc = be.zero();
    for (l, x) in a.amplitudes() {
        if let Some(y) = b.amplitude(l) {
            acc = be.add(&acc, &be.mul(&be.conj(x), y));
        }
    }
    if be.is_zero(&acc) {
        Ok(())
    } else {
        Err(Error::Promise("swap test states are neither equal up to phase nor orthogonal".into()))
    }
}

/// `f(0) = |psi_1>|psi_2>`, `f(1) = |psi_2>|psi_1>` over `Z_2`.
pub struct SwapOracle {
    p1: Prep,
    p2: Prep,
}

impl SwapOracle {
    pub fn new(p1: &Prep, p2: &Prep) -> Result<Self> {
        if !same_shape(&p1.layout, &p2.layout) {
            return Err(Error::Precondition("swap test needs preparations on the same register shape".into()));
        }
        Ok(SwapOracle { p1: p1.clone(), p2: p2.clone() })
    }
}

impl HspOracle for SwapOracle {
    fn m(&self) -> u64 {
        2
    }
    fn k(&self) -> u32 {
        1
    }
    fn n(&self) -> usize {
        1
    }
    fn value_registers(&self) -> Vec<Register> {
        let mut regs = prefixed(&self.p1.layout, "A");
        regs.extend(prefixed(&self.p2.layout, "B"));
        regs
    }
    fn unitary(&self, x_slots: &[usize], value_start: usize) -> Circuit {
        let w = self.p1.layout.width();
        let x = x_slots[0];
        let swap = Arc::new(move |l: &mut [u64]| {
            if l[x] == 1 {
                let (a, b) = l[value_start..value_start + 2 * w].split_at_mut(w);
                a.swap_with_slice(b);
            }
        });
        self.p1
            .circuit
            .embed(value_start, w)
            .then(self.p2.circuit.embed(value_start + w, w))
            .map(ClassicalMap::involution("cswap", swap).counted_as_oracle())
    }
    fn class_of(&self, _x: &[u64]) -> u64 {
        unreachable!("the swap oracle is simulated by the circuit engine only")
    }
    fn supports_lumped(&self) -> bool {
        false
    }
    fn extra_root_order(&self) -> u64 {
        num_integer::lcm(self.p1.root_order, self.p2.root_order)
    }
}

/// `f(x) = |u_1^{x_1} ... u_n^{x_n} K>` over `Z_{m^k}^n`.
pub struct PresentationOracle {
    group: Group,
    m: u64,
    k: u32,
    gens: Vec<u64>,
    k_prep: Prep,
    /// `powers[i][e] = u_i^e`, `e < m^k`.
    powers: Arc<Vec<Vec<u64>>>,
    inverse_powers: Arc<Vec<Vec<u64>>>,
    /// Elements of `K`, for class labels.
    k_elements: Vec<u64>,
}

/// Largest `m^k` a presentation domain may have.
pub const MAX_PRESENTATION_MODULUS: u64 = 1 << 14;

impl PresentationOracle {
    pub fn new(group: Group, m: u64, k: u32, gens: &[u64], k_prep: &Prep) -> Result<Self> {
        let q = m.checked_pow(k).filter(|&q| q <= MAX_PRESENTATION_MODULUS);
        let Some(q) = q else {
            return Err(Error::Precondition(format!("m^k exceeds {MAX_PRESENTATION_MODULUS}")));
        };
        let g = group.as_ref();
        let powers: Vec<Vec<u64>> = gens
            .iter()
            .map(|&u| {
                let mut row = Vec::with_capacity(q as usize);
                let mut acc = g.identity();
                for _ in 0..q {
                    row.push(acc);
                    acc = g.mul(acc, u);
                }
                row
            })
            .collect();
        let inverse_powers = gens
            .iter()
            .map(|&u| {
                let ui = plain_inverse(g, u);
                let mut row = Vec::with_capacity(q as usize);
                let mut acc = g.identity();
                for _ in 0..q {
                    row.push(acc);
                    acc = g.mul(acc, ui);
                }
                row
            })
            .collect();
        let state = k_prep.run()?;
        let k_elements: BTreeSet<u64> = state.amplitudes().keys().map(|l| l[k_prep.out]).collect();
        Ok(PresentationOracle {
            group,
            m,
            k,
            gens: gens.to_vec(),
            k_prep: k_prep.clone(),
            powers: Arc::new(powers),
            inverse_powers: Arc::new(inverse_powers),
            k_elements: k_elements.into_iter().collect(),
        })
    }

    fn element(&self, x: &[u64]) -> u64 {
        let g = self.group.as_ref();
        x.iter().enumerate().fold(g.identity(), |acc, (i, &e)| g.mul(acc, self.powers[i][e as usize]))
    }
}

impl HspOracle for PresentationOracle {
    fn m(&self) -> u64 {
        self.m
    }
    fn k(&self) -> u32 {
        self.k
    }
    fn n(&self) -> usize {
        self.gens.len()
    }
    fn value_registers(&self) -> Vec<Register> {
        prefixed(&self.k_prep.layout, "K")
    }
    fn unitary(&self, x_slots: &[usize], value_start: usize) -> Circuit {
        let w = self.k_prep.layout.width();
        let slot = value_start + self.k_prep.out;
        let mk = |inverse: bool| {
            let (g, xs) = (self.group.clone(), x_slots.to_vec());
            let table = if inverse { self.inverse_powers.clone() } else { self.powers.clone() };
            Arc::new(move |l: &mut [u64]| {
                if !g.is_element(l[slot]) {
                    return;
                }
                // (u_1^{x_1} ... u_n^{x_n})^{-1} = u_n^{-x_n} ... u_1^{-x_1}
                let idx: Vec<usize> = if inverse { (0..xs.len()).rev().collect() } else { (0..xs.len()).collect() };
                let e = idx.iter().fold(g.identity(), |acc, &i| g.mul(acc, table[i][l[xs[i]] as usize]));
                l[slot] = g.mul(e, l[slot]);
            }) as crate::state::LabelFn
        };
        self.k_prep.circuit.embed(value_start, w).map(ClassicalMap::new("mul", mk(false), mk(true)).counted_as_oracle())
    }
    fn class_of(&self, x: &[u64]) -> u64 {
        let g = self.group.as_ref();
        let e = self.element(x);
        self.k_elements.iter().map(|&k| g.mul(e, k)).min().expect("K is nonempty")
    }
    fn extra_root_order(&self) -> u64 {
        self.k_prep.root_order
    }
}
