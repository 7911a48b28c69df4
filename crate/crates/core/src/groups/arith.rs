//! Element arithmetic from the multiplication oracle alone: identity and
//! inverse are reached through powers `x^{m^t}`.

use std::fmt;

use super::backend::GroupBackend;

/// The order of `element` has a prime factor not dividing `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NotDividing {
    pub element: u64,
}

impl fmt::Display for NotDividing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "order of element {} does not divide a power of m", self.element)
    }
}

impl std::error::Error for NotDividing {}

pub fn power(g: &dyn GroupBackend, x: u64, mut e: u64) -> u64 {
    let (mut acc, mut base) = (g.identity(), x);
    while e > 0 {
        if e & 1 == 1 {
            acc = g.mul(acc, base);
        }
        base = g.mul(base, base);
        e >>= 1;
    }
    acc
}

/// `x, x^m, x^{m^2}, ...` up to the first `x^{m^t}` with `x^{m^t} x = x`
/// (so `x^{m^t}` is the identity), with `t <= l`.
fn m_power_chain(g: &dyn GroupBackend, x: u64, m: u64) -> Result<Vec<u64>, NotDividing> {
    let mut chain = vec![x];
    loop {
        let y = *chain.last().unwrap();
        if g.mul(y, x) == x {
            return Ok(chain);
        }
        if chain.len() > g.bits() as usize {
            return Err(NotDividing { element: x });
        }
        chain.push(power(g, y, m));
    }
}

/// Minimal `k <= l` with `x^{m^k} = 1`.
pub fn order_divides_power(g: &dyn GroupBackend, x: u64, m: u64) -> Result<u32, NotDividing> {
    Ok(m_power_chain(g, x, m)?.len() as u32 - 1)
}

/// `x^{m^t}`.
pub fn identity_from(g: &dyn GroupBackend, x: u64, m: u64) -> Result<u64, NotDividing> {
    Ok(*m_power_chain(g, x, m)?.last().unwrap())
}

/// `x^{m^t - 1} = prod_{i<t} (x^{m^i})^{m-1}`.
pub fn inverse(g: &dyn GroupBackend, x: u64, m: u64) -> Result<u64, NotDividing> {
    let chain = m_power_chain(g, x, m)?;
    let t = chain.len() - 1;
    let mut acc = chain[t];
    for &y in &chain[..t] {
        acc = g.mul(acc, power(g, y, m - 1));
    }
    Ok(acc)
}

/// `u^{-1} v^{-1} u v`.
pub fn commutator(g: &dyn GroupBackend, u: u64, v: u64, m: u64) -> Result<u64, NotDividing> {
    let (ui, vi) = (inverse(g, u, m)?, inverse(g, v, m)?);
    Ok(g.mul(g.mul(ui, vi), g.mul(u, v)))
}

/// `u^y = y^{-1} u y`.
pub fn conjugate(g: &dyn GroupBackend, u: u64, y: u64, m: u64) -> Result<u64, NotDividing> {
    Ok(g.mul(g.mul(inverse(g, y, m)?, u), y))
}

/// Order by repeated multiplication; simulator bookkeeping for inverse maps.
pub(crate) fn element_order(g: &dyn GroupBackend, x: u64) -> u64 {
    let e = g.identity();
    let (mut y, mut k) = (x, 1u64);
    while y != e {
        y = g.mul(y, x);
        k += 1;
    }
    k
}

/// `x^{-1}` by the element order.
pub(crate) fn plain_inverse(g: &dyn GroupBackend, x: u64) -> u64 {
    power(g, x, element_order(g, x) - 1)
}
