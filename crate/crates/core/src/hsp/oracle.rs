//! Oracles for the hidden subgroup problem over `Z_{m^k}^n`.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::lattice::{Lift, SubgroupRep};
use crate::state::{Circuit, ClassicalMap, Register, RegisterKind};

/// A function on `Z_{m^k}^n` given as a reversible circuit writing `f(x)`
/// into value registers, plus a classical class label used by the lumped
/// simulator (`class_of(x) == class_of(y)` iff `f(x) = f(y)`).
pub trait HspOracle: Send + Sync {
    fn m(&self) -> u64;
    fn k(&self) -> u32;
    fn n(&self) -> usize;

    /// `m^k`
    fn modulus(&self) -> u64 {
        self.m().pow(self.k())
    }

    /// Registers appended after the argument register.
    fn value_registers(&self) -> Vec<Register>;

    /// `U_f` on a layout where the argument occupies `x_slots` and the value
    /// registers start at slot `value_start`. Exactly one step is marked as an
    /// oracle query.
    fn unitary(&self, x_slots: &[usize], value_start: usize) -> Circuit;

    fn class_of(&self, x: &[u64]) -> u64;

    /// False when `class_of` is unavailable; such oracles are only simulated
    /// gate by gate.
    fn supports_lumped(&self) -> bool {
        true
    }

    /// Order of the roots of unity the value preparation needs beyond `i`
    /// and `omega_m`.
    fn extra_root_order(&self) -> u64 {
        1
    }
}

/// Number of bits needed to store values `0..count`.
pub fn bits_for(count: u64) -> u32 {
    (64 - count.saturating_sub(1).leading_zeros()).max(1)
}

/// Mixed-radix index of `x` over `Z_q^n`, first coordinate least significant.
pub fn index_of(x: &[u64], q: u64) -> usize {
    x.iter().rev().fold(0usize, |acc, &v| acc * q as usize + v as usize)
}

/// Inverse of [`index_of`].
pub fn element_at(mut idx: usize, q: u64, n: usize) -> Vec<u64> {
    let mut v = vec![0u64; n];
    for slot in v.iter_mut() {
        *slot = (idx % q as usize) as u64;
        idx /= q as usize;
    }
    v
}

/// Classical `f` stored as a table over `Z_{m^k}^n`, realized by XOR into a
/// bit-string register.
#[derive(Clone)]
pub struct TableOracle {
    m: u64,
    k: u32,
    n: usize,
    bits: u32,
    table: Arc<Vec<u64>>,
    hidden: Option<SubgroupRep>,
}

impl TableOracle {
    /// `values[index_of(x)]` is `f(x)`.
    pub fn new(m: u64, k: u32, n: usize, values: Vec<u64>) -> Self {
        let q = m.pow(k);
        assert_eq!(values.len() as u64, q.pow(n as u32), "table must cover Z_(m^k)^n");
        let max = values.iter().copied().max().unwrap_or(0);
        TableOracle { m, k, n, bits: bits_for(max + 1), table: Arc::new(values), hidden: None }
    }

    /// The subgroup this oracle was built to hide, when known.
    pub fn hidden(&self) -> Option<&SubgroupRep> {
        self.hidden.as_ref()
    }

    pub fn value(&self, x: &[u64]) -> u64 {
        self.table[index_of(x, self.modulus())]
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }
}

/// `f(x)` = index of the canonical coset representative of `x + H`; hides
/// exactly `H`.
pub fn build_coset_oracle(h: &SubgroupRep) -> TableOracle {
    let (m, k, n) = (h.m(), h.k(), h.n());
    let q = h.modulus().to_u64().expect("small modulus");
    let size = q.pow(n as u32) as usize;
    let mut ids: HashMap<Vec<BigInt>, u64> = HashMap::new();
    let mut values = Vec::with_capacity(size);
    // representatives are numbered in order of first appearance
    for idx in 0..size {
        let x: Vec<BigInt> = element_at(idx, q, n).into_iter().map(BigInt::from).collect();
        let rep = h.coset_representative(&x);
        let next = ids.len() as u64;
        values.push(*ids.entry(rep).or_insert(next));
    }
    let mut o = TableOracle::new(m, k, n, values);
    o.hidden = Some(h.clone());
    o
}

impl HspOracle for TableOracle {
    fn m(&self) -> u64 {
        self.m
    }
    fn k(&self) -> u32 {
        self.k
    }
    fn n(&self) -> usize {
        self.n
    }
    fn value_registers(&self) -> Vec<Register> {
        vec![Register { name: "value".into(), kind: RegisterKind::Bits { bits: self.bits } }]
    }
    fn unitary(&self, x_slots: &[usize], value_start: usize) -> Circuit {
        let table = self.table.clone();
        let q = self.modulus();
        let xs = x_slots.to_vec();
        let write = Arc::new(move |l: &mut [u64]| {
            let idx = xs.iter().rev().fold(0usize, |acc, &s| acc * q as usize + l[s] as usize);
            l[value_start] ^= table[idx];
        });
        Circuit::new().map(ClassicalMap::involution("U_f", write).counted_as_oracle())
    }
    fn class_of(&self, x: &[u64]) -> u64 {
        self.value(x)
    }
}

/// `f o phi_0` as an oracle over `Z_m^n`: computes `phi_0(x)` into an
/// auxiliary `Z_{m^k}^n` register, calls the parent, and uncomputes.
pub struct ComposedOracle<'a> {
    parent: &'a dyn HspOracle,
    images: Arc<Vec<Vec<u64>>>,
}

impl<'a> ComposedOracle<'a> {
    pub fn new(parent: &'a dyn HspOracle, lift: &Lift) -> Self {
        let m = parent.m();
        let n = parent.n();
        let images = (0..m.pow(n as u32) as usize)
            .map(|idx| lift.phi0(&element_at(idx, m, n)).iter().map(|v| v.to_u64().unwrap()).collect())
            .collect();
        ComposedOracle { parent, images: Arc::new(images) }
    }

    pub fn image(&self, x: &[u64]) -> &[u64] {
        &self.images[index_of(x, self.parent.m())]
    }
}

impl HspOracle for ComposedOracle<'_> {
    fn m(&self) -> u64 {
        self.parent.m()
    }
    fn k(&self) -> u32 {
        1
    }
    fn n(&self) -> usize {
        self.parent.n()
    }
    fn value_registers(&self) -> Vec<Register> {
        let q = self.parent.modulus();
        let mut regs =
            vec![Register { name: "phi0".into(), kind: RegisterKind::Digits { modulus: q, count: self.n() } }];
        for r in self.parent.value_registers() {
            regs.push(Register { name: format!("inner.{}", r.name), kind: r.kind });
        }
        regs
    }
    fn unitary(&self, x_slots: &[usize], value_start: usize) -> Circuit {
        let n = self.n();
        let m = self.m();
        let q = self.parent.modulus();
        let z: Vec<usize> = (value_start..value_start + n).collect();
        let images = self.images.clone();
        let (xs, zs) = (x_slots.to_vec(), z.clone());
        let add = move |sign: bool| {
            let images = images.clone();
            let xs = xs.clone();
            let zs = zs.clone();
            Arc::new(move |l: &mut [u64]| {
                let idx = xs.iter().rev().fold(0usize, |acc, &s| acc * m as usize + l[s] as usize);
                for (&s, &v) in zs.iter().zip(&images[idx]) {
                    l[s] = if sign { (l[s] + v) % q } else { (l[s] + q - v) % q };
                }
            }) as crate::state::LabelFn
        };
        let compute = ClassicalMap::new("phi0", add(true), add(false));
        Circuit::new()
            .map(compute.clone())
            .then(self.parent.unitary(&z, value_start + n))
            .then(Circuit::new().map(compute).inverse())
    }
    fn class_of(&self, x: &[u64]) -> u64 {
        self.parent.class_of(self.image(x))
    }
    fn supports_lumped(&self) -> bool {
        self.parent.supports_lumped()
    }
    fn extra_root_order(&self) -> u64 {
        self.parent.extra_root_order()
    }
}
