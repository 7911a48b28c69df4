//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the normal-form code it is used to check.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

pub type Elem = Vec<u64>;

/// Subgroup of `Z_q^n` generated by `gens`, by breadth-first closure.
pub fn span_mod(gens: &[Elem], q: u64, n: usize) -> BTreeSet<Elem> {
    let mut seen = BTreeSet::new();
    let zero = vec![0u64; n];
    seen.insert(zero.clone());
    let mut queue = VecDeque::from([zero]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y: Elem = x.iter().zip(g).map(|(a, b)| (a + b) % q).collect();
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

pub fn all_elements(q: u64, n: usize) -> Vec<Elem> {
    let total = q.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut v = vec![0u64; n];
            for slot in v.iter_mut() {
                *slot = idx % q;
                idx /= q;
            }
            v
        })
        .collect()
}

pub fn pairing(x: &[u64], y: &[u64], m: u64) -> u64 {
    x.iter().zip(y).map(|(a, b)| a * b % m).sum::<u64>() % m
}

/// `A^perp` by checking every element against every element of `A`.
pub fn brute_perp(a: &BTreeSet<Elem>, m: u64, n: usize) -> BTreeSet<Elem> {
    all_elements(m, n).into_iter().filter(|y| a.iter().all(|x| pairing(x, y, m) == 0)).collect()
}

/// Every subgroup of `Z_q^n` as an element set. Candidates come from all
/// lower-triangular integer matrices with diagonal entries dividing `q`;
/// each candidate's column span is closed by brute force and deduplicated,
/// so the result does not depend on any normal-form routine.
pub fn all_subgroups(q: u64, n: usize) -> Vec<BTreeSet<Elem>> {
    let divisors: Vec<u64> = (1..=q).filter(|d| q % d == 0).collect();
    let mut found = BTreeSet::new();
    let mut diag = vec![0usize; n];
    loop {
        let ds: Vec<u64> = diag.iter().map(|&i| divisors[i]).collect();
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let mut offs = vec![0u64; slots.len()];
        loop {
            let mut cols: Vec<Elem> =
                (0..n).map(|j| (0..n).map(|i| if i == j { ds[i] % q } else { 0 }).collect()).collect();
            for ((i, j), v) in slots.iter().zip(&offs) {
                cols[*j][*i] = *v;
            }
            found.insert(span_mod(&cols, q, n));
            let mut t = 0;
            while t < slots.len() {
                offs[t] += 1;
                if offs[t] < ds[slots[t].0] {
                    break;
                }
                offs[t] = 0;
                t += 1;
            }
            if t == slots.len() {
                break;
            }
        }
        let mut t = 0;
        while t < n {
            diag[t] += 1;
            if diag[t] < divisors.len() {
                break;
            }
            diag[t] = 0;
            t += 1;
        }
        if t == n {
            break;
        }
    }
    found.into_iter().collect()
}

/// Lattice points of the column span of `cols` inside `[0, bound)^n`,
/// enumerated over integer coefficients in `[-radius, radius]`.
pub fn lattice_points_in_box(cols: &[Vec<i64>], bound: i64, radius: i64) -> BTreeSet<Vec<i64>> {
    let n = cols[0].len();
    let s = cols.len();
    let mut out = BTreeSet::new();
    let mut coef = vec![-radius; s];
    loop {
        let v: Vec<i64> = (0..n).map(|i| (0..s).map(|j| coef[j] * cols[j][i]).sum()).collect();
        if v.iter().all(|&x| (0..bound).contains(&x)) {
            out.insert(v);
        }
        let mut t = 0;
        while t < s {
            coef[t] += 1;
            if coef[t] <= radius {
                break;
            }
            coef[t] = -radius;
            t += 1;
        }
        if t == s {
            break;
        }
    }
    out
}

/// Invariant factors of a small integer matrix by repeated gcd reduction
/// of determinantal divisors: `d_1 ... d_i = gcd of i x i minors`.
pub fn invariant_factors_by_minors(rows: &[Vec<i64>]) -> Vec<i64> {
    let r = rows.len();
    let c = rows[0].len();
    let mut prev = 1i64;
    let mut out = Vec::new();
    for size in 1..=r.min(c) {
        let mut g = 0i64;
        for rs in subsets(r, size) {
            for cs in subsets(c, size) {
                let sub: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j]).collect()).collect();
                g = gcd(g, det_i64(&sub).abs());
            }
        }
        if g == 0 {
            break;
        }
        out.push(g / prev);
        prev = g;
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut with_last: Vec<Vec<usize>> = subsets(n - 1, k - 1);
    for s in &mut with_last {
        s.push(n - 1);
    }
    let mut out = subsets(n - 1, k);
    out.extend(with_last);
    out
}

pub fn det_i64(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] * det_i64(&minor)
        })
        .sum()
}

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

pub fn to_u64_vec(v: &[BigInt]) -> Elem {
    v.iter().map(|x| x.to_u64().expect("small nonnegative entry")).collect()
}

pub fn to_big(v: &[u64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn hnf_rows(rows: &[Vec<i64>]) -> hspkit::lattice::IntMatrix {
    hspkit::lattice::IntMatrix::from_rows(rows).unwrap()
}

/// Finite group given only by a multiplication closure, for brute force.
pub struct BruteGroup<'a> {
    pub mul: Box<dyn Fn(u64, u64) -> u64 + 'a>,
    pub identity: u64,
}

impl BruteGroup<'_> {
    pub fn span(&self, gens: &[u64]) -> BTreeSet<u64> {
        let mut seen = BTreeSet::from([self.identity]);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                for y in [(self.mul)(x, g), (self.mul)(g, x)] {
                    if seen.insert(y) {
                        queue.push_back(y);
                    }
                }
            }
        }
        seen
    }

    pub fn inv(&self, x: u64, all: &BTreeSet<u64>) -> u64 {
        *all.iter().find(|&&y| (self.mul)(x, y) == self.identity).expect("inverse exists")
    }

    pub fn order(&self, x: u64) -> u64 {
        let (mut y, mut k) = (x, 1);
        while y != self.identity {
            y = (self.mul)(y, x);
            k += 1;
        }
        k
    }

    /// Subgroup generated by all commutators of `g`.
    pub fn derived(&self, g: &BTreeSet<u64>) -> BTreeSet<u64> {
        let mut comms = BTreeSet::new();
        for &a in g {
            for &b in g {
                let (ai, bi) = (self.inv(a, g), self.inv(b, g));
                comms.insert((self.mul)((self.mul)(ai, bi), (self.mul)(a, b)));
            }
        }
        self.span(&comms.into_iter().collect::<Vec<_>>())
    }

    pub fn is_normal(&self, n: &BTreeSet<u64>, g: &BTreeSet<u64>) -> bool {
        g.iter().all(|&x| n.iter().all(|&y| n.contains(&(self.mul)((self.mul)(self.inv(x, g), y), x))))
    }

    /// Multiset of element orders of `g / n` (`n` normal), sorted.
    pub fn quotient_orders(&self, g: &BTreeSet<u64>, n: &BTreeSet<u64>) -> Vec<u64> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &x in g {
            let coset: BTreeSet<u64> = n.iter().map(|&y| (self.mul)(x, y)).collect();
            if !seen.insert(coset.iter().next().copied().unwrap()) {
                continue;
            }
            let (mut y, mut k) = (x, 1);
            while !n.contains(&y) {
                y = (self.mul)(y, x);
                k += 1;
            }
            out.push(k);
        }
        out.sort();
        out
    }
}

/// Element orders of `Z_{f_1} + ... + Z_{f_r}`, sorted.
pub fn cyclic_sum_orders(factors: &[u64]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &f in factors {
        let mut next = Vec::new();
        for &o in &out {
            for x in 0..f {
                let ox = f / gcd(x as i64, f as i64) as u64;
                next.push(o / gcd(o as i64, ox as i64) as u64 * ox);
            }
        }
        out = next;
    }
    out.sort();
    out
}
