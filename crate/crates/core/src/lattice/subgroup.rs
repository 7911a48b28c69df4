use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::normal_form::{hermite_normal_form, smith_normal_form};
use crate::error::{Error, Result};

/// A subgroup `A` of `Z_{m^k}^n`, stored as the Hermite normal form of the
/// lattice `L_A`, the preimage of `A` in `Z^n`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SubgroupRep {
    m: u64,
    k: u32,
    hnf: IntMatrix,
}

/// Outcome of comparing `A <= B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    /// An element of `B \ A`: the first column of `H_B` whose diagonal entry
    /// is smaller than the matching entry of `H_A`.
    Witness(Vec<BigInt>),
}

/// `K_0 = {x : m x in H_0}` together with the data defining `phi_0`.
#[derive(Clone, Debug)]
pub struct Lift {
    base: SubgroupRep,
    lifted: SubgroupRep,
    l_inv: IntMatrix,
    /// `d_i / gcd(d_i, m)`
    steps: Vec<BigInt>,
    /// `gcd(d_i, m)`
    gcds: Vec<BigInt>,
}

pub(crate) fn reduce_mod(v: &BigInt, q: &BigInt) -> BigInt {
    v.mod_floor(q)
}

impl SubgroupRep {
    /// Validates the Hermite-form invariants eagerly.
    pub fn from_hnf(m: u64, k: u32, hnf: IntMatrix) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidSubgroup(format!("modulus must be >= 2, got {m}")));
        }
        if k < 1 {
            return Err(Error::InvalidSubgroup("exponent must be >= 1".into()));
        }
        if !hnf.is_square() {
            return Err(Error::InvalidSubgroup("HNF must be square".into()));
        }
        let n = hnf.rows();
        for i in 0..n {
            let d = &hnf[(i, i)];
            if !d.is_positive() {
                return Err(Error::InvalidSubgroup(format!("diagonal entry {i} is not positive")));
            }
            for j in 0..n {
                let v = &hnf[(i, j)];
                if j > i && !v.is_zero() {
                    return Err(Error::InvalidSubgroup("HNF must be lower triangular".into()));
                }
                if j < i && (v.is_negative() || v >= d) {
                    return Err(Error::InvalidSubgroup(format!("entry ({i},{j}) is not reduced modulo the diagonal")));
                }
            }
        }
        let rep = SubgroupRep { m, k, hnf };
        let q = rep.modulus();
        for i in 0..n {
            let mut e = vec![BigInt::zero(); n];
            e[i] = q.clone();
            if !rep.lattice_contains(&e) {
                return Err(Error::InvalidSubgroup("lattice does not contain m^k Z^n".into()));
            }
        }
        Ok(rep)
    }

    /// Subgroup generated by `gens` (reduced modulo `m^k`); an empty list
    /// gives the trivial subgroup.
    pub fn from_generators<T: Into<BigInt> + Clone>(gens: &[Vec<T>], m: u64, k: u32, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("rank must be >= 1".into()));
        }
        if m < 2 || k < 1 {
            return Err(Error::InvalidSubgroup(format!("need m >= 2 and k >= 1, got m={m}, k={k}")));
        }
        let q = BigInt::from(m).pow(k);
        let mut cols: Vec<Vec<BigInt>> = Vec::with_capacity(gens.len() + n);
        for g in gens {
            if g.len() != n {
                return Err(Error::Dimension(format!("generator of length {}, expected {n}", g.len())));
            }
            let v: Vec<BigInt> = g.iter().map(|x| reduce_mod(&x.clone().into(), &q)).collect();
            if v.iter().any(|x| !x.is_zero()) {
                cols.push(v);
            }
        }
        for i in 0..n {
            let mut e = vec![BigInt::zero(); n];
            e[i] = q.clone();
            cols.push(e);
        }
        let m_cols = IntMatrix::from_columns(n, &cols)?;
        let herm = hermite_normal_form(&m_cols);
        debug_assert_eq!(herm.rank, n);
        Ok(SubgroupRep { m, k, hnf: herm.h.take_columns(n) })
    }

    pub fn trivial(m: u64, k: u32, n: usize) -> Result<Self> {
        Self::from_generators::<i64>(&[], m, k, n)
    }

    pub fn full(m: u64, k: u32, n: usize) -> Result<Self> {
        let gens: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        Self::from_generators(&gens, m, k, n)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.hnf.rows()
    }

    pub fn hnf(&self) -> &IntMatrix {
        &self.hnf
    }

    /// `m^k`
    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.m).pow(self.k)
    }

    /// Nonzero HNF columns, i.e. a generating set of the subgroup.
    pub fn generators(&self) -> Vec<Vec<BigInt>> {
        let q = self.modulus();
        self.hnf
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|x| reduce_mod(x, &q)).collect::<Vec<_>>())
            .filter(|c| c.iter().any(|x| !x.is_zero()))
            .collect()
    }

    /// `|A| = m^{kn} / det(H_A)`
    pub fn order(&self) -> BigInt {
        let q = self.modulus();
        let total = q.pow(self.n() as u32);
        let det: BigInt = (0..self.n()).map(|i| self.hnf[(i, i)].clone()).product();
        debug_assert!(total.is_multiple_of(&det));
        total / det
    }

    fn lattice_contains(&self, x: &[BigInt]) -> bool {
        let mut v = x.to_vec();
        let n = self.n();
        for i in 0..n {
            let d = &self.hnf[(i, i)];
            if !v[i].is_multiple_of(d) {
                return false;
            }
            let c = &v[i] / d;
            if c.is_zero() {
                continue;
            }
            for (r, vr) in v.iter_mut().enumerate().skip(i) {
                *vr -= &c * &self.hnf[(r, i)];
            }
        }
        v.iter().all(Zero::is_zero)
    }

    /// Whether `x mod m^k` lies in the subgroup.
    pub fn contains(&self, x: &[BigInt]) -> Result<bool> {
        if x.len() != self.n() {
            return Err(Error::Dimension(format!("element of length {}, expected {}", x.len(), self.n())));
        }
        let q = self.modulus();
        let v: Vec<BigInt> = x.iter().map(|e| reduce_mod(e, &q)).collect();
        Ok(self.lattice_contains(&v))
    }

    pub fn contains_u64(&self, x: &[u64]) -> bool {
        let v: Vec<BigInt> = x.iter().map(|&e| BigInt::from(e)).collect();
        self.contains(&v).unwrap_or(false)
    }

    pub fn contains_subgroup(&self, other: &SubgroupRep) -> bool {
        other.same_ambient(self) && other.hnf.columns().iter().all(|c| self.lattice_contains(c))
    }

    fn same_ambient(&self, other: &SubgroupRep) -> bool {
        self.m == other.m && self.k == other.k && self.n() == other.n()
    }

    /// Canonical representative of the coset `x + A`: the unique vector
    /// congruent to `x` modulo `L_A` with `0 <= x_i < H_ii`.
    pub fn coset_representative(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut v = x.to_vec();
        for i in 0..self.n() {
            let d = &self.hnf[(i, i)];
            let c = v[i].div_floor(d);
            if c.is_zero() {
                continue;
            }
            for (r, vr) in v.iter_mut().enumerate().skip(i) {
                *vr -= &c * &self.hnf[(r, i)];
            }
        }
        v
    }

    /// Subgroup generated by this one and extra elements.
    pub fn join<T: Into<BigInt> + Clone>(&self, extra: &[Vec<T>]) -> Result<Self> {
        let mut gens = self.generators();
        for e in extra {
            gens.push(e.iter().cloned().map(Into::into).collect());
        }
        Self::from_generators(&gens, self.m, self.k, self.n())
    }

    /// `A^perp = {y : (x, y) = 0 mod m for all x in A}`, via the Smith form of
    /// `H_A`: with `S = L H_A R`, the lattice `L_{A^perp}` is `L^T` applied to
    /// `diag(m / gcd(d_i, m)) Z^n`.
    pub fn perp(&self) -> Result<Self> {
        if self.k != 1 {
            return Err(Error::PerpRequiresPrimeLevel(self.k));
        }
        let n = self.n();
        let snf = smith_normal_form(&self.hnf);
        let m = BigInt::from(self.m);
        let lt = snf.l.transpose();
        let cols: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let d = &snf.s[(i, i)];
                let scale = &m / d.gcd(&m);
                lt.column(i).into_iter().map(|x| x * &scale).collect()
            })
            .collect();
        Self::from_generators(&cols, self.m, 1, n)
    }

    /// Decides `self == larger` given `self <= larger`, or returns an element
    /// of `larger \ self`.
    pub fn equal_or_witness(&self, larger: &SubgroupRep) -> Result<Comparison> {
        if !self.same_ambient(larger) {
            return Err(Error::Dimension("subgroups live in different groups".into()));
        }
        if !larger.contains_subgroup(self) {
            return Err(Error::Precondition("first subgroup is not contained in the second".into()));
        }
        if self.hnf == larger.hnf {
            return Ok(Comparison::Equal);
        }
        let q = self.modulus();
        for j in 0..self.n() {
            if larger.hnf[(j, j)] < self.hnf[(j, j)] {
                let w = larger.hnf.column(j).iter().map(|x| reduce_mod(x, &q)).collect();
                return Ok(Comparison::Witness(w));
            }
        }
        unreachable!("distinct nested lattices must differ on the diagonal")
    }

    /// `K_0 = {x : m x in A}` plus the map `phi_0` onto a transversal of
    /// `K_0 / A`.
    pub fn lift_by_m(&self) -> Lift {
        let n = self.n();
        let snf = smith_normal_form(&self.hnf);
        let m = BigInt::from(self.m);
        let mut steps = Vec::with_capacity(n);
        let mut gcds = Vec::with_capacity(n);
        for i in 0..n {
            let d = snf.s[(i, i)].clone();
            let g = d.gcd(&m);
            steps.push(&d / &g);
            gcds.push(g);
        }
        let cols: Vec<Vec<BigInt>> =
            (0..n).map(|i| snf.l_inv.column(i).into_iter().map(|x| x * &steps[i]).collect()).collect();
        let lifted = Self::from_generators(&cols, self.m, self.k, n).expect("valid ambient group");
        Lift { base: self.clone(), lifted, l_inv: snf.l_inv, steps, gcds }
    }

    /// All elements as vectors over `[0, m^k)`; intended for small groups.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let q = self.modulus().to_u64().expect("modulus fits in u64");
        let n = self.n();
        let cols: Vec<Vec<u64>> = self
            .hnf
            .columns()
            .iter()
            .map(|c| c.iter().map(|x| reduce_mod(x, &BigInt::from(q)).to_u64().unwrap()).collect())
            .collect();
        let ranges: Vec<u64> = (0..n).map(|i| q / self.hnf[(i, i)].to_u64().unwrap()).collect();
        let mut out = Vec::new();
        let mut coef = vec![0u64; n];
        loop {
            let mut v = vec![0u64; n];
            for (c, col) in coef.iter().zip(&cols) {
                for (vi, ci) in v.iter_mut().zip(col) {
                    *vi = (*vi + c * ci) % q;
                }
            }
            out.push(v);
            let mut i = 0;
            while i < n {
                coef[i] += 1;
                if coef[i] < ranges[i] {
                    break;
                }
                coef[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        out
    }
}

impl Lift {
    pub fn base(&self) -> &SubgroupRep {
        &self.base
    }

    /// `K_0`
    pub fn lifted(&self) -> &SubgroupRep {
        &self.lifted
    }

    /// Orders `gcd(d_i, m)` of the cyclic factors of `K_0 / H_0`.
    pub fn factor_orders(&self) -> &[BigInt] {
        &self.gcds
    }

    pub fn is_trivial(&self) -> bool {
        self.lifted == self.base
    }

    /// `phi_0 : Z_m^n -> K_0`, reduced modulo `m^k`. Coordinate `i` is sent to
    /// `x_i' * d_i / gcd(d_i, m)` with `x_i'` the least positive integer
    /// congruent to `x_i` modulo `gcd(d_i, m)`, then mapped back through the
    /// inverse left multiplier.
    pub fn phi0(&self, x: &[u64]) -> Vec<BigInt> {
        let q = self.base.modulus();
        let coords: Vec<BigInt> = x
            .iter()
            .zip(self.gcds.iter().zip(&self.steps))
            .map(|(&xi, (g, step))| {
                let mut r = BigInt::from(xi).mod_floor(g);
                if r.is_zero() {
                    r = g.clone();
                }
                r * step
            })
            .collect();
        self.l_inv.mul_vec(&coords).iter().map(|v| reduce_mod(v, &q)).collect()
    }
}

/// Structure of a finite abelian group `Z^n / L` as a direct sum of cyclic
/// groups with increasing divisibility.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianDecomposition {
    pub factors: Vec<crate::json::JsonInt>,
    /// Row `i` expresses the generator of the `i`-th cyclic factor in terms
    /// of the original generators.
    pub generator_matrix: Vec<Vec<crate::json::JsonInt>>,
}

impl AbelianDecomposition {
    pub fn nprime(&self) -> usize {
        self.factors.len()
    }

    pub fn factor_values(&self) -> Vec<BigInt> {
        self.factors.iter().map(|f| f.0.clone()).collect()
    }

    pub fn generators(&self) -> Vec<Vec<BigInt>> {
        self.generator_matrix.iter().map(|r| r.iter().map(|v| v.0.clone()).collect()).collect()
    }

    pub fn order(&self) -> BigInt {
        self.factors.iter().map(|f| f.0.clone()).product()
    }

    /// The same decomposition listed with decreasing divisibility
    /// (`m_i | m_{i-1}`).
    pub fn reversed(&self) -> Self {
        let mut factors = self.factors.clone();
        let mut generator_matrix = self.generator_matrix.clone();
        factors.reverse();
        generator_matrix.reverse();
        AbelianDecomposition { factors, generator_matrix }
    }
}

/// Invariant factors of `Z^n / L` where `L` is spanned by the columns of
/// `relations`. Generators of the cyclic factors are columns of the inverse
/// left Smith multiplier.
pub fn invariant_factor_decomposition(relations: &IntMatrix) -> Result<AbelianDecomposition> {
    let n = relations.rows();
    let snf = smith_normal_form(relations);
    let diag = snf.diagonal();
    if diag.len() < n || diag.iter().any(Zero::is_zero) {
        return Err(Error::InfiniteQuotient);
    }
    let mut factors = Vec::new();
    let mut generator_matrix = Vec::new();
    for (i, d) in diag.iter().enumerate() {
        if d.is_one() {
            continue;
        }
        let gen = snf.l_inv.column(i);
        factors.push(crate::json::JsonInt(d.clone()));
        generator_matrix.push(gen.into_iter().map(crate::json::JsonInt).collect());
    }
    Ok(AbelianDecomposition { factors, generator_matrix })
}
