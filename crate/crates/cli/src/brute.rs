//! Brute-force reference answers for the self-test. Nothing in here calls
//! the normal-form, solver or group-structure code it is used to check.

use std::collections::{BTreeSet, HashMap, VecDeque};

use hspkit::groups::Group;

/// Elements of `Z_q^n` packed little-endian in base `q`.
#[derive(Clone, Copy, Debug)]
pub struct Cube {
    pub q: u64,
    pub n: usize,
}

impl Cube {
    pub fn new(q: u64, n: usize) -> Self {
        Cube { q, n }
    }

    pub fn size(&self) -> usize {
        self.q.pow(self.n as u32) as usize
    }

    pub fn pack(&self, x: &[u64]) -> usize {
        x.iter().rev().fold(0u64, |acc, &v| acc * self.q + v % self.q) as usize
    }

    pub fn unpack(&self, mut idx: usize) -> Vec<u64> {
        let mut v = vec![0; self.n];
        for slot in v.iter_mut() {
            *slot = idx as u64 % self.q;
            idx /= self.q as usize;
        }
        v
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b, mut out, mut place) = (a, b, 0usize, 1usize);
        let q = self.q as usize;
        for _ in 0..self.n {
            out += ((a % q + b % q) % q) * place;
            a /= q;
            b /= q;
            place *= q;
        }
        out
    }

    /// Subgroup generated by `gens`, as a sorted list of packed elements.
    pub fn span(&self, gens: &[Vec<u64>]) -> Vec<usize> {
        let gens: Vec<usize> = gens.iter().map(|g| self.pack(g)).collect();
        let mut seen = vec![false; self.size()];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = self.add(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..seen.len()).filter(|&i| seen[i]).collect()
    }

    pub fn pairing(&self, x: &[u64], y: &[u64]) -> u64 {
        x.iter().zip(y).map(|(a, b)| a * b % self.q).sum::<u64>() % self.q
    }

    /// `A^perp`, checking every element against every element of `A`.
    pub fn perp(&self, a: &[usize]) -> Vec<usize> {
        let a: Vec<Vec<u64>> = a.iter().map(|&x| self.unpack(x)).collect();
        (0..self.size())
            .filter(|&y| {
                let yv = self.unpack(y);
                a.iter().all(|x| self.pairing(x, &yv) == 0)
            })
            .collect()
    }

    /// `{y : (g, y) = 0 for every generator g}`.
    pub fn annihilator(&self, gens: &[Vec<u64>]) -> Vec<usize> {
        (0..self.size())
            .filter(|&y| {
                let yv = self.unpack(y);
                gens.iter().all(|g| self.pairing(g, &yv) == 0)
            })
            .collect()
    }

    /// Every subgroup of `Z_q^n`. Candidates are lower-triangular generator
    /// sets with diagonal entries dividing `q` and the entry in row `i`
    /// reduced below the diagonal entry of row `i`; each candidate is closed
    /// by breadth-first search and duplicates are dropped.
    pub fn all_subgroups(&self) -> Vec<BruteSubgroup> {
        let (q, n) = (self.q, self.n);
        let divisors: Vec<u64> = (1..=q).filter(|d| q % d == 0).collect();
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let mut found: HashMap<Vec<usize>, Vec<Vec<u64>>> = HashMap::new();
        let mut diag = vec![0usize; n];
        loop {
            let ds: Vec<u64> = diag.iter().map(|&i| divisors[i]).collect();
            let mut offs = vec![0u64; slots.len()];
            loop {
                let mut cols: Vec<Vec<u64>> =
                    (0..n).map(|j| (0..n).map(|i| if i == j { ds[i] % q } else { 0 }).collect()).collect();
                for (&(i, j), &v) in slots.iter().zip(&offs) {
                    cols[j][i] = v;
                }
                found.entry(self.span(&cols)).or_insert(cols);
                if !odometer(&mut offs, |t| ds[slots[t].0]) {
                    break;
                }
            }
            if !odometer(&mut diag, |_| divisors.len()) {
                break;
            }
        }
        let mut out: Vec<BruteSubgroup> =
            found.into_iter().map(|(elements, gens)| BruteSubgroup { elements, gens }).collect();
        out.sort_by(|a, b| a.elements.cmp(&b.elements));
        out
    }
}

/// A subgroup as its sorted packed elements, with a generating set.
#[derive(Clone, Debug)]
pub struct BruteSubgroup {
    pub elements: Vec<usize>,
    pub gens: Vec<Vec<u64>>,
}

fn odometer<T: Copy + PartialOrd + std::ops::AddAssign + From<u8>>(
    digits: &mut [T],
    radix: impl Fn(usize) -> T,
) -> bool {
    for t in 0..digits.len() {
        digits[t] += T::from(1);
        if digits[t] < radix(t) {
            return true;
        }
        digits[t] = T::from(0);
    }
    false
}

/// A finite group seen only through its multiplication.
pub struct BruteGroup {
    group: Group,
}

impl BruteGroup {
    pub fn new(group: Group) -> Self {
        BruteGroup { group }
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        self.group.mul(a, b)
    }

    pub fn identity(&self) -> u64 {
        self.group.identity()
    }

    pub fn span(&self, gens: &[u64]) -> BTreeSet<u64> {
        let e = self.identity();
        let mut seen = BTreeSet::from([e]);
        let mut queue = VecDeque::from([e]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                for y in [self.mul(x, g), self.mul(g, x)] {
                    if seen.insert(y) {
                        queue.push_back(y);
                    }
                }
            }
        }
        seen
    }

    pub fn inv(&self, x: u64, all: &BTreeSet<u64>) -> u64 {
        *all.iter().find(|&&y| self.mul(x, y) == self.identity()).expect("inverse exists")
    }

    pub fn order(&self, x: u64) -> u64 {
        let (mut y, mut k) = (x, 1);
        while y != self.identity() {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    pub fn power(&self, x: u64, e: u64) -> u64 {
        (0..e).fold(self.identity(), |acc, _| self.mul(acc, x))
    }

    /// Subgroup generated by all commutators of `g`.
    pub fn derived(&self, g: &BTreeSet<u64>) -> BTreeSet<u64> {
        let mut comms = BTreeSet::new();
        for &a in g {
            for &b in g {
                let (ai, bi) = (self.inv(a, g), self.inv(b, g));
                comms.insert(self.mul(self.mul(ai, bi), self.mul(a, b)));
            }
        }
        self.span(&comms.into_iter().collect::<Vec<_>>())
    }

    pub fn is_normal(&self, n: &BTreeSet<u64>, g: &BTreeSet<u64>) -> bool {
        g.iter().all(|&x| n.iter().all(|&y| n.contains(&self.mul(self.mul(self.inv(x, g), y), x))))
    }

    /// Element orders of `g / n` (`n` normal), sorted.
    pub fn quotient_orders(&self, g: &BTreeSet<u64>, n: &BTreeSet<u64>) -> Vec<u64> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &x in g {
            let coset: BTreeSet<u64> = n.iter().map(|&y| self.mul(x, y)).collect();
            if !seen.insert(*coset.iter().next().unwrap()) {
                continue;
            }
            let (mut y, mut k) = (x, 1);
            while !n.contains(&y) {
                y = self.mul(y, x);
                k += 1;
            }
            out.push(k);
        }
        out.sort();
        out
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Element orders of `Z_{f_1} + ... + Z_{f_r}`, sorted.
pub fn cyclic_sum_orders(factors: &[u64]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * f as usize);
        for &o in &out {
            for x in 0..f {
                let ox = f / gcd(x, f);
                next.push(o / gcd(o, ox) * ox);
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// `gcd(z_1, ..., z_s, m)` by trial division from the top.
pub fn gcd_by_search(zs: &[u64], m: u64) -> u64 {
    (1..=m).rev().find(|d| m % d == 0 && zs.iter().all(|z| z % d == 0)).unwrap()
}
