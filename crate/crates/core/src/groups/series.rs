//! Polycyclic series built from the bottom, group order, derived series and
//! decompositions of abelian quotients.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::lattice::AbelianDecomposition;
use crate::{Error, Result};

use super::arith::{commutator, conjugate, order_divides_power, power};
use super::quantum::{Prep, Session};

/// `1 = G_0 < G_1 < ... < G_h` with `G_i = <G_{i-1}, g_i>`, each `G_{i-1}`
/// normal in `G_i` and `|G_i / G_{i-1}| = o_i` dividing `m`.
#[derive(Clone)]
pub struct PolycyclicSeries {
    pub elements: Vec<u64>,
    pub orders: Vec<u64>,
    /// `preps[i]` prepares `|G_i>`.
    preps: Vec<Prep>,
}

impl PolycyclicSeries {
    pub fn trivial(session: &Session) -> Result<Self> {
        let p = Prep::basis(&session.group, session.group.identity())?;
        Ok(PolycyclicSeries { elements: Vec::new(), orders: Vec::new(), preps: vec![p] })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Preparation of `|G_i>`.
    pub fn prep_at(&self, level: usize) -> &Prep {
        &self.preps[level]
    }

    /// Preparation of the top group.
    pub fn prep(&self) -> &Prep {
        self.preps.last().unwrap()
    }

    /// `G_0 < ... < G_level`.
    pub fn prefix(&self, level: usize) -> Self {
        PolycyclicSeries {
            elements: self.elements[..level].to_vec(),
            orders: self.orders[..level].to_vec(),
            preps: self.preps[..=level].to_vec(),
        }
    }

    /// Appends `g` (normalizing the top group, `g^m` inside it) with its
    /// factor order read off an abelian presentation.
    pub fn push(&mut self, session: &mut Session, g: u64) -> Result<()> {
        let pres = session.presentation(&[g], self.prep())?;
        let order = pres.decomposition.order();
        let o: u64 = order.try_into().map_err(|_| Error::Group("factor order overflows".into()))?;
        if o < 2 || session.m % o != 0 {
            return Err(Error::Group(format!("factor order {o} does not divide m = {}", session.m)));
        }
        self.elements.push(g);
        self.orders.push(o);
        let prep = Prep::loader(&session.group, &self.elements, &self.orders)?;
        self.preps.push(prep);
        Ok(())
    }

    /// Extends by `c` through `c^{m^{k-1}}, ..., c^m, c`, skipping powers
    /// already inside. The top group must be normal in `<top, c>` with
    /// abelian quotient.
    pub fn extend_refined(&mut self, session: &mut Session, c: u64) -> Result<()> {
        let g = session.group.clone();
        let k = order_divides_power(g.as_ref(), c, session.m).map_err(|e| Error::Group(e.to_string()))?;
        let mut chain = vec![c];
        for _ in 1..k {
            chain.push(power(g.as_ref(), *chain.last().unwrap(), session.m));
        }
        for &p in chain.iter().rev() {
            if !session.is_member(p, self.prep())? {
                self.push(session, p)?;
            }
        }
        Ok(())
    }

    pub fn report(&self) -> SeriesReport {
        SeriesReport { elements: self.elements.clone(), orders: self.orders.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub elements: Vec<u64>,
    pub orders: Vec<u64>,
}

/// Result of series construction; failures are answers, not faults.
#[derive(Clone)]
pub enum SeriesOutcome {
    Series(PolycyclicSeries),
    /// A generator or a newly met commutator has order with a prime factor
    /// not dividing `m`.
    BadOrder {
        element: u64,
    },
    /// The collected element was replaced by a commutator more than `l` times.
    NotSolvable {
        replacements: usize,
    },
}

impl SeriesOutcome {
    pub fn series(self) -> Result<PolycyclicSeries> {
        match self {
            SeriesOutcome::Series(s) => Ok(s),
            SeriesOutcome::BadOrder { element } => {
                Err(Error::Group(format!("element {element} has order not dividing a power of m")))
            }
            SeriesOutcome::NotSolvable { replacements } => {
                Err(Error::Group(format!("group is not solvable ({replacements} replacements)")))
            }
        }
    }
}

/// Polycyclic series of `<gens>`, grown from the bottom: take a generator
/// `x` outside the current normal subgroup `N`, collect its conjugates while
/// they commute modulo `N`, and restart from a commutator whenever one falls
/// outside `N`.
pub fn build_polycyclic_series(session: &mut Session, gens: &[u64]) -> Result<SeriesOutcome> {
    let g = session.group.clone();
    let m = session.m;
    for &y in gens {
        if order_divides_power(g.as_ref(), y, m).is_err() {
            return Ok(SeriesOutcome::BadOrder { element: y });
        }
    }
    let ell = g.bits() as usize;
    let mut n = PolycyclicSeries::trivial(session)?;
    let mut replacements = 0usize;
    loop {
        let mut outside = Vec::new();
        for &y in gens {
            if !session.is_member(y, n.prep())? {
                outside.push(y);
            }
        }
        let Some(&first) = outside.first() else {
            return Ok(SeriesOutcome::Series(n));
        };
        let mut x = first;
        'stage: loop {
            let mut list = vec![x];
            let mut k = n.clone();
            k.extend_refined(session, x)?;
            let mut i = 0;
            while i < list.len() {
                for &y in &outside {
                    let v = conjugate(g.as_ref(), list[i], y, m).map_err(|e| Error::Group(e.to_string()))?;
                    if session.is_member(v, k.prep())? {
                        continue;
                    }
                    for &w in &list {
                        let c = commutator(g.as_ref(), w, v, m);
                        let c = match c {
                            Ok(c) => c,
                            Err(e) => return Ok(SeriesOutcome::BadOrder { element: e.element }),
                        };
                        if !session.is_member(c, n.prep())? {
                            replacements += 1;
                            if replacements > ell {
                                return Ok(SeriesOutcome::NotSolvable { replacements });
                            }
                            if order_divides_power(g.as_ref(), c, m).is_err() {
                                return Ok(SeriesOutcome::BadOrder { element: c });
                            }
                            x = c;
                            continue 'stage;
                        }
                    }
                    list.push(v);
                    k.extend_refined(session, v)?;
                }
                i += 1;
            }
            n = k;
            break;
        }
    }
}

/// `|G| = prod o_i`.
pub fn group_order(series: &PolycyclicSeries) -> u128 {
    series.orders.iter().map(|&o| o as u128).product()
}

/// Series of the commutator subgroup of the top group of `series`.
pub fn commutator_subgroup(session: &mut Session, series: &PolycyclicSeries) -> Result<PolycyclicSeries> {
    let h = series.len();
    if h == 0 {
        return Ok(series.clone());
    }
    let g = session.group.clone();
    let m = session.m;
    let top = series.elements[h - 1];
    let prefix = series.prefix(h - 1);
    let mut derived = commutator_subgroup(session, &prefix)?;
    let comm = |a: u64| commutator(g.as_ref(), a, top, m).map_err(|e| Error::Group(e.to_string()));
    let mut queue: VecDeque<u64> = prefix.elements.iter().map(|&a| comm(a)).collect::<Result<_>>()?;
    while let Some(c) = queue.pop_front() {
        if !session.is_member(c, derived.prep())? {
            derived.extend_refined(session, c)?;
            queue.push_back(comm(c)?);
        }
    }
    Ok(derived)
}

/// One term of the derived series.
#[derive(Clone)]
pub struct DerivedTerm {
    pub generators: Vec<u64>,
    pub series: PolycyclicSeries,
}

/// `G = G^(0) > G^(1) > ... > 1`, ending with the trivial group.
pub fn derived_series(session: &mut Session, gens: &[u64]) -> Result<Vec<DerivedTerm>> {
    let mut cur = build_polycyclic_series(session, gens)?.series()?;
    let mut terms = vec![DerivedTerm { generators: gens.to_vec(), series: cur.clone() }];
    while !cur.is_empty() {
        let next = commutator_subgroup(session, &cur)?;
        if next.len() >= cur.len() && group_order(&next) >= group_order(&cur) {
            return Err(Error::Group("derived series does not terminate".into()));
        }
        terms.push(DerivedTerm { generators: next.elements.clone(), series: next.clone() });
        cur = next;
    }
    Ok(terms)
}

/// `G / N` as a direct sum of cyclic groups, for `N` normal with abelian
/// quotient, from a presentation of `G`'s generators modulo `N`.
pub fn abelian_factor_decomposition(session: &mut Session, n_gens: &[u64]) -> Result<AbelianDecomposition> {
    let n = if n_gens.is_empty() {
        PolycyclicSeries::trivial(session)?
    } else {
        build_polycyclic_series(session, n_gens)?.series()?
    };
    let gens = session.group.generators().to_vec();
    if gens.is_empty() {
        return Ok(AbelianDecomposition { factors: Vec::new(), generator_matrix: Vec::new() });
    }
    Ok(session.presentation(&gens, n.prep())?.decomposition)
}
