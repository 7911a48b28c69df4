//! Fourier sampling, the round's flag function and the preparation circuit.

use std::sync::Arc;

use crate::cyclotomic::root_order_for;
use crate::state::{Backend, Circuit, ClassicalMap, Exact, GateCounts, RegisterLayout, SparseState};
use crate::Result;

use super::oracle::HspOracle;

/// `(u, x) mod m`.
pub fn pairing(u: &[u64], x: &[u64], m: u64) -> u64 {
    u.iter().zip(x).fold(0u64, |acc, (&a, &b)| (acc + (a % m) * (b % m)) % m)
}

/// `f(j, x, b) = [2(u,x) >= m  or  (b = 1 and 0 < (u,x) <= 2^j)]`, with
/// `j = -1` meaning the second clause is off.
pub fn flag_value(m: u64, j: i32, p: u64, b: u64) -> bool {
    2 * p >= m || (b == 1 && j >= 0 && p > 0 && p <= 1u64 << j)
}

/// Probe levels `j` used for modulus `m`: `-1..=floor(log2 m)`, or just
/// `{-1, 0}` when `m` is prime.
pub fn probe_levels(m: u64) -> Vec<i32> {
    if is_prime(m) {
        vec![-1, 0]
    } else {
        (-1..=(63 - m.leading_zeros()) as i32).collect()
    }
}

pub fn is_prime(m: u64) -> bool {
    m >= 2 && (2..).take_while(|p| p * p <= m).all(|p| m % p != 0)
}

/// The level at which amplification is exact, given
/// `d = gcd((u,y) over H^perp, m)`; `None` when `d = m` (then `u` lies in `H`).
pub fn witness_level(m: u64, d: u64) -> Option<i32> {
    if d == m {
        return None;
    }
    if (m / d) % 2 == 0 {
        Some(-1)
    } else {
        Some((64 - (d - 1).leading_zeros()) as i32 * (d > 1) as i32)
    }
}

/// Root order needed to simulate an oracle's circuits.
pub fn oracle_root_order(oracle: &dyn HspOracle) -> usize {
    let base = root_order_for(oracle.m()) as u64;
    num_integer::lcm(base, oracle.extra_root_order()) as usize
}

/// Register layout `x | value registers | b | flag` used by the circuit engine.
pub struct ProbeLayout {
    pub layout: Arc<RegisterLayout>,
    pub x_slots: Vec<usize>,
    pub value_start: usize,
    pub b_slot: usize,
    pub flag_slot: usize,
}

impl ProbeLayout {
    pub fn new(oracle: &dyn HspOracle) -> Result<Self> {
        let n = oracle.n();
        let mut regs = RegisterLayout::builder().digits("x", oracle.m(), n).build()?.registers().to_vec();
        regs.extend(oracle.value_registers());
        let with_values = RegisterLayout::new(regs.clone())?;
        let value_start = n;
        let b_slot = with_values.width();
        let mut all = regs;
        all.extend(RegisterLayout::builder().qubit("b").qubit("flag").build()?.registers().iter().cloned());
        let layout = Arc::new(RegisterLayout::new(all)?);
        Ok(ProbeLayout { layout, x_slots: (0..n).collect(), value_start, b_slot, flag_slot: b_slot + 1 })
    }

    /// `QFT^n . U_f . QFT^n` on the `x` register.
    pub fn fourier_circuit(&self, oracle: &dyn HspOracle) -> Circuit {
        let mut c = Circuit::new();
        for &s in &self.x_slots {
            c = c.qft(s);
        }
        c = c.then(oracle.unitary(&self.x_slots, self.value_start));
        for &s in &self.x_slots {
            c = c.qft(s);
        }
        c
    }

    /// Fourier sampling, then `H` on `b`, then `flag ^= f(j, x, b)`.
    pub fn prep_circuit(&self, oracle: &dyn HspOracle, u: &[u64], j: i32) -> Circuit {
        let m = oracle.m();
        let (xs, b, flag) = (self.x_slots.clone(), self.b_slot, self.flag_slot);
        let u = u.to_vec();
        let write = Arc::new(move |l: &mut [u64]| {
            let x: Vec<u64> = xs.iter().map(|&s| l[s]).collect();
            if flag_value(m, j, pairing(&u, &x, m), l[b]) {
                l[flag] ^= 1;
            }
        });
        self.fourier_circuit(oracle).hadamard(b).map(ClassicalMap::involution("flag", write))
    }
}

/// The Fourier-sampled state `sum_{y in H^perp} |y>|gamma_y>` on the layout
/// `x | value registers` (exact backend).
pub fn fourier_sample(oracle: &dyn HspOracle) -> Result<(SparseState<Exact>, GateCounts)> {
    fourier_sample_with(oracle, Exact::new(oracle_root_order(oracle)))
}

pub fn fourier_sample_with<B: Backend>(oracle: &dyn HspOracle, backend: B) -> Result<(SparseState<B>, GateCounts)> {
    if oracle.k() != 1 {
        return Err(crate::Error::Precondition("Fourier sampling needs an oracle over Z_m^n".into()));
    }
    let n = oracle.n();
    let mut regs = RegisterLayout::builder().digits("x", oracle.m(), n).build()?.registers().to_vec();
    regs.extend(oracle.value_registers());
    let layout = Arc::new(RegisterLayout::new(regs)?);
    let x_slots: Vec<usize> = (0..n).collect();
    let mut c = Circuit::new();
    for &s in &x_slots {
        c = c.qft(s);
    }
    c = c.then(oracle.unitary(&x_slots, n));
    for &s in &x_slots {
        c = c.qft(s);
    }
    let mut counts = GateCounts::default();
    let state = c.run(SparseState::prepare_zero(layout, backend), &mut counts)?;
    Ok((state, counts))
}
