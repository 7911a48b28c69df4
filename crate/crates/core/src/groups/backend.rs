//! Black-box groups with unique encodings: permutation groups, groups given
//! by a multiplication table, and unit groups modulo `N`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::hsp::bits_for;
use crate::{Error, Result};

/// Largest permutation degree whose packed image list fits in 62 bits.
pub const MAX_DEGREE: usize = 15;

/// Largest multiplication table accepted.
pub const MAX_TABLE: usize = 4096;

/// A finite group whose elements are encoded as `bits()`-bit strings.
pub trait GroupBackend: Send + Sync + fmt::Debug {
    fn kind(&self) -> &'static str;
    /// Encoding length `l`.
    fn bits(&self) -> u32;
    fn generators(&self) -> &[u64];
    fn identity(&self) -> u64;
    fn mul(&self, a: u64, b: u64) -> u64;
    /// Whether `code` encodes a group element.
    fn is_element(&self, code: u64) -> bool;
    fn format(&self, code: u64) -> String {
        code.to_string()
    }
}

pub type Group = Arc<dyn GroupBackend>;

/// Permutations of `0..degree`; a permutation is packed as
/// `sum img[i] * degree^i`. The product `ab` applies `a` first.
#[derive(Clone, Debug)]
pub struct PermutationGroup {
    degree: usize,
    bits: u32,
    generators: Vec<u64>,
}

impl PermutationGroup {
    pub fn new(degree: usize, generators: &[Vec<usize>]) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::Parse(format!("permutation degree must lie in 1..={MAX_DEGREE}")));
        }
        let mut codes = Vec::with_capacity(generators.len());
        for g in generators {
            let mut seen = vec![false; degree];
            if g.len() != degree || g.iter().any(|&i| i >= degree || std::mem::replace(&mut seen[i], true)) {
                return Err(Error::Parse(format!("{g:?} is not a permutation of 0..{degree}")));
            }
            codes.push(pack(g, degree));
        }
        let space = (degree as u64).pow(degree as u32);
        Ok(PermutationGroup { degree, bits: bits_for(space), generators: codes })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Image list of a code.
    pub fn images(&self, code: u64) -> Vec<usize> {
        unpack(code, self.degree)
    }

    pub fn encode(&self, images: &[usize]) -> u64 {
        pack(images, self.degree)
    }
}

fn pack(images: &[usize], d: usize) -> u64 {
    images.iter().rev().fold(0u64, |acc, &i| acc * d as u64 + i as u64)
}

fn unpack(mut code: u64, d: usize) -> Vec<usize> {
    (0..d)
        .map(|_| {
            let v = (code % d as u64) as usize;
            code /= d as u64;
            v
        })
        .collect()
}

impl GroupBackend for PermutationGroup {
    fn kind(&self) -> &'static str {
        "permutation"
    }
    fn bits(&self) -> u32 {
        self.bits
    }
    fn generators(&self) -> &[u64] {
        &self.generators
    }
    fn identity(&self) -> u64 {
        pack(&(0..self.degree).collect::<Vec<_>>(), self.degree)
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        let (a, b) = (unpack(a, self.degree), unpack(b, self.degree));
        pack(&a.iter().map(|&i| b[i]).collect::<Vec<_>>(), self.degree)
    }
    fn is_element(&self, code: u64) -> bool {
        if code >= (self.degree as u64).pow(self.degree as u32) {
            return false;
        }
        let imgs = unpack(code, self.degree);
        imgs.iter().collect::<HashSet<_>>().len() == self.degree
    }
    fn format(&self, code: u64) -> String {
        format!("{:?}", unpack(code, self.degree))
    }
}

/// Elements `0..size`, product read from `table[a][b]`.
#[derive(Clone, Debug)]
pub struct TableGroup {
    table: Vec<Vec<u64>>,
    identity: u64,
    bits: u32,
    generators: Vec<u64>,
}

impl TableGroup {
    /// Checks the group axioms. Without explicit generators a generating set
    /// is picked greedily in element order.
    pub fn new(table: Vec<Vec<u64>>, generators: Option<Vec<u64>>) -> Result<Self> {
        let t = table.len();
        if t == 0 || t > MAX_TABLE {
            return Err(Error::Parse(format!("table size must lie in 1..={MAX_TABLE}")));
        }
        for row in &table {
            let distinct: HashSet<u64> = row.iter().copied().collect();
            if row.len() != t || distinct.len() != t || row.iter().any(|&v| v as usize >= t) {
                return Err(Error::Parse("every table row must be a permutation of 0..size".into()));
            }
        }
        for c in 0..t {
            let col: HashSet<u64> = table.iter().map(|r| r[c]).collect();
            if col.len() != t {
                return Err(Error::Parse("every table column must be a permutation of 0..size".into()));
            }
        }
        let identity = (0..t)
            .find(|&e| (0..t).all(|x| table[e][x] == x as u64 && table[x][e] == x as u64))
            .ok_or_else(|| Error::Parse("table has no identity".into()))? as u64;
        if t <= 256 {
            for a in 0..t {
                for b in 0..t {
                    let ab = table[a][b] as usize;
                    for c in 0..t {
                        if table[ab][c] != table[a][table[b][c] as usize] {
                            return Err(Error::Parse(format!("table is not associative at ({a},{b},{c})")));
                        }
                    }
                }
            }
        }
        let mut g = TableGroup { table, identity, bits: bits_for(t as u64), generators: Vec::new() };
        g.generators = match generators {
            Some(gens) => {
                if let Some(bad) = gens.iter().find(|&&x| x as usize >= t) {
                    return Err(Error::Parse(format!("generator {bad} is not an element")));
                }
                gens
            }
            None => g.greedy_generators(),
        };
        Ok(g)
    }

    /// Cayley table of `Z_{n_1} x ... x Z_{n_r}` (mixed radix, first factor
    /// least significant), generated by the unit vectors.
    pub fn abelian(orders: &[u64]) -> Result<Self> {
        let size: u64 = orders.iter().product();
        let digits = |mut x: u64| -> Vec<u64> {
            orders
                .iter()
                .map(|&o| {
                    let d = x % o;
                    x /= o;
                    d
                })
                .collect()
        };
        let join = |d: &[u64]| d.iter().zip(orders).rev().fold(0u64, |acc, (&v, &o)| acc * o + v);
        let table = (0..size)
            .map(|a| {
                (0..size)
                    .map(|b| {
                        let s: Vec<u64> =
                            digits(a).iter().zip(digits(b)).zip(orders).map(|((x, y), o)| (x + y) % o).collect();
                        join(&s)
                    })
                    .collect()
            })
            .collect();
        let mut stride = 1;
        let mut gens = Vec::new();
        for &o in orders {
            gens.push(stride);
            stride *= o;
        }
        Self::new(table, Some(gens))
    }

    pub fn size(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Vec<u64>] {
        &self.table
    }

    fn greedy_generators(&self) -> Vec<u64> {
        let mut gens = Vec::new();
        let mut span: BTreeSet<u64> = BTreeSet::from([self.identity]);
        for x in 0..self.table.len() as u64 {
            if !span.contains(&x) {
                gens.push(x);
                span = closure(self, &gens);
            }
        }
        gens
    }
}

impl GroupBackend for TableGroup {
    fn kind(&self) -> &'static str {
        "table"
    }
    fn bits(&self) -> u32 {
        self.bits
    }
    fn generators(&self) -> &[u64] {
        &self.generators
    }
    fn identity(&self) -> u64 {
        self.identity
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.table[a as usize][b as usize]
    }
    fn is_element(&self, code: u64) -> bool {
        (code as usize) < self.table.len()
    }
}

/// The multiplicative group of units modulo `modulus`, or the subgroup
/// generated by the given residues.
#[derive(Clone, Debug)]
pub struct UnitsGroup {
    modulus: u64,
    bits: u32,
    generators: Vec<u64>,
}

impl UnitsGroup {
    pub fn new(modulus: u64, generators: &[u64]) -> Result<Self> {
        if !(2..=1 << 31).contains(&modulus) {
            return Err(Error::Parse("units modulus must lie in 2..=2^31".into()));
        }
        let mut gens = Vec::with_capacity(generators.len());
        for &g in generators {
            let r = g % modulus;
            if r.gcd(&modulus) != 1 {
                return Err(Error::Parse(format!("{g} is not a unit modulo {modulus}")));
            }
            gens.push(r);
        }
        Ok(UnitsGroup { modulus, bits: bits_for(modulus), generators: gens })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl GroupBackend for UnitsGroup {
    fn kind(&self) -> &'static str {
        "units"
    }
    fn bits(&self) -> u32 {
        self.bits
    }
    fn generators(&self) -> &[u64] {
        &self.generators
    }
    fn identity(&self) -> u64 {
        1 % self.modulus
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        (a as u128 * b as u128 % self.modulus as u128) as u64
    }
    fn is_element(&self, code: u64) -> bool {
        code < self.modulus && code.gcd(&self.modulus) == 1
    }
}

/// Classical closure of a generating set (breadth first). Meant for small
/// groups: tests, table setup and simulator bookkeeping.
pub fn closure(group: &dyn GroupBackend, gens: &[u64]) -> BTreeSet<u64> {
    let mut seen = BTreeSet::from([group.identity()]);
    let mut queue = VecDeque::from([group.identity()]);
    while let Some(x) = queue.pop_front() {
        for &g in gens {
            let y = group.mul(x, g);
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Group file contents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    Permutation {
        degree: usize,
        generators: Vec<Vec<usize>>,
    },
    Table {
        size: usize,
        table: Vec<Vec<u64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<u64>>,
    },
    Units {
        modulus: u64,
        generators: Vec<u64>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupFile {
    #[serde(flatten)]
    pub spec: GroupSpec,
    pub m: u64,
}

impl GroupSpec {
    pub fn build(&self) -> Result<Group> {
        Ok(match self {
            GroupSpec::Permutation { degree, generators } => Arc::new(PermutationGroup::new(*degree, generators)?),
            GroupSpec::Table { size, table, generators } => {
                if table.len() != *size {
                    return Err(Error::Parse(format!("table has {} rows, size says {size}", table.len())));
                }
                Arc::new(TableGroup::new(table.clone(), generators.clone())?)
            }
            GroupSpec::Units { modulus, generators } => Arc::new(UnitsGroup::new(*modulus, generators)?),
        })
    }
}

impl GroupFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let f: GroupFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if f.m < 2 {
            return Err(Error::Parse("m must be at least 2".into()));
        }
        Ok(f)
    }
}
