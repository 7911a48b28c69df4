//! Deterministic coefficients `u_1..u_{s-1}` with
//! `gcd(u_1 z_1 + ... + u_{s-1} z_{s-1} + z_s, m) = gcd(z_1, ..., z_s, m)`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// Bookkeeping of one pairwise combination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTrace {
    pub u: u64,
    /// `gcd(z1, z2, m)`
    pub g: u64,
    /// Sieve and scan bound `S = floor(log2(m / g)) + 1`.
    pub bound: u64,
    /// Primes below `S` dividing `m / g`.
    pub primes: Vec<u64>,
    /// Their product `m'`.
    pub modulus: u64,
    /// CRT start value `u_0`.
    pub start: u64,
    /// Candidates `u_t = u_0 + t m'` tried, the successful one included.
    pub scans: u64,
}

fn floor_log2(x: u64) -> u64 {
    63 - x.leading_zeros() as u64
}

fn primes_below(bound: u64) -> Vec<u64> {
    let n = bound as usize;
    let mut composite = vec![false; n.max(2)];
    let mut out = Vec::new();
    for p in 2..n {
        if !composite[p] {
            out.push(p as u64);
            for q in (p * p..n).step_by(p) {
                composite[q] = true;
            }
        }
    }
    out
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(p as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(p as i128) as u64
}

/// `u` in `[0, m)` with `gcd(u z1 + z2, m) = gcd(z1, z2, m)`.
pub fn combine_pair(z1: u64, z2: u64, m: u64) -> u64 {
    combine_pair_traced(z1, z2, m).u
}

pub fn combine_pair_traced(z1: u64, z2: u64, m: u64) -> PairTrace {
    assert!(m >= 1, "modulus must be positive");
    let (z1, z2) = (z1 % m, z2 % m);
    let g = z1.gcd(&z2).gcd(&m);
    let (a, b, m1) = (z1 / g, z2 / g, m / g);
    let bound = floor_log2(m1) + 1;
    let primes: Vec<u64> = primes_below(bound).into_iter().filter(|p| m1 % p == 0).collect();
    let modulus: u64 = primes.iter().product();
    // a good residue per prime: make u a + b = 1 (mod p) when p does not
    // divide a; otherwise p does not divide b and any residue is good
    let mut start = 0u128;
    let mut acc = 1u128;
    for &p in &primes {
        let want = if a % p == 0 { 0 } else { ((1 + p - b % p) % p) * inverse_mod(a % p, p) % p };
        // lift `start (mod acc)` to also satisfy `want (mod p)`
        let cur = (start % p as u128) as u64;
        let step = (want + p - cur) % p * inverse_mod((acc % p as u128) as u64, p) % p;
        start += step as u128 * acc;
        acc *= p as u128;
    }
    let m1w = m1 as u128;
    for t in 0..bound {
        let u = start + t as u128 * modulus as u128;
        let v = (u % m1w * a as u128 + b as u128) % m1w;
        if (v as u64).gcd(&m1) == 1 {
            return PairTrace {
                u: (u % m as u128) as u64,
                g,
                bound,
                primes,
                modulus,
                start: start as u64,
                scans: t + 1,
            };
        }
    }
    unreachable!("some u_t with t < S is good for every prime divisor of m")
}

/// Right-to-left folding of [`combine_pair`]: returns `u_1..u_{s-1}`.
pub fn combine_many(zs: &[u64], m: u64) -> Vec<u64> {
    combine_many_traced(zs, m).into_iter().map(|t| t.u).collect()
}

/// As [`combine_many`], with the trace of each pairwise step; entry `i` is
/// the step producing `u_{i+1}`.
pub fn combine_many_traced(zs: &[u64], m: u64) -> Vec<PairTrace> {
    assert!(!zs.is_empty(), "need at least one value");
    let s = zs.len();
    let mut cur = zs[s - 1] % m;
    let mut traces = Vec::with_capacity(s - 1);
    for i in (0..s - 1).rev() {
        let t = combine_pair_traced(zs[i], cur, m);
        cur = ((t.u as u128 * (zs[i] % m) as u128 + cur as u128) % m as u128) as u64;
        traces.push(t);
    }
    traces.reverse();
    traces
}

/// `(sum u_i z_i + z_s) mod m`.
pub fn combined_value(zs: &[u64], us: &[u64], m: u64) -> u64 {
    assert_eq!(us.len() + 1, zs.len(), "need s - 1 coefficients");
    let m = m as u128;
    let sum = zs.iter().zip(us).fold(0u128, |acc, (&z, &u)| (acc + (z as u128 % m) * (u as u128 % m)) % m);
    ((sum + *zs.last().unwrap() as u128) % m) as u64
}
