//! Exact arithmetic in the cyclotomic field `Q(zeta_M)`.
//!
//! Elements are stored in the power basis `1, x, ..., x^(phi(M)-1)` modulo
//! the `M`-th cyclotomic polynomial, as integer numerators over one positive
//! common denominator. That makes the representation unique, so equality and
//! `is_zero` are structural.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Precomputed data for one root order.
#[derive(Debug)]
pub struct FieldData {
    pub order: usize,
    /// Coefficients of `Phi_M`, lowest degree first (monic).
    pub phi: Vec<i64>,
    /// `reduce[k]` = `x^k mod Phi_M` for `0 <= k < M`.
    reduce: Vec<Vec<i64>>,
    roots: Vec<Complex64>,
}

impl FieldData {
    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = *den.last().unwrap();
    let mut q = vec![0i64; num.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd] / lead;
        q[i] = c;
        for (t, &d) in den.iter().enumerate() {
            rem[i + t] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

fn cyclotomic_poly(order: usize, cache: &mut HashMap<usize, Vec<i64>>) -> Vec<i64> {
    if let Some(p) = cache.get(&order) {
        return p.clone();
    }
    let mut p = vec![0i64; order + 1];
    p[0] = -1;
    p[order] = 1;
    for d in 1..order {
        if order % d == 0 {
            let q = cyclotomic_poly(d, cache);
            p = poly_div_exact(&p, &q);
        }
    }
    cache.insert(order, p.clone());
    p
}

fn build_field(order: usize) -> FieldData {
    let phi = cyclotomic_poly(order, &mut HashMap::new());
    let deg = phi.len() - 1;
    let mut reduce = Vec::with_capacity(order);
    let mut cur = vec![0i64; deg];
    cur[0] = 1;
    if deg == 0 {
        unreachable!("cyclotomic polynomials have positive degree");
    }
    for _ in 0..order {
        reduce.push(cur.clone());
        // multiply by x and reduce the overflowing top coefficient
        let top = cur[deg - 1];
        for i in (1..deg).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        for i in 0..deg {
            cur[i] -= top * phi[i];
        }
    }
    let roots =
        (0..order).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / order as f64)).collect();
    FieldData { order, phi, reduce, roots }
}

/// Shared per-order field tables; built once and kept for the process.
pub fn field(order: usize) -> &'static FieldData {
    assert!(order >= 1, "root order must be positive");
    thread_local! {
        static LAST: std::cell::Cell<Option<&'static FieldData>> = const { std::cell::Cell::new(None) };
    }
    if let Some(f) = LAST.with(|c| c.get()).filter(|f| f.order == order) {
        return f;
    }
    let f = shared_field(order);
    LAST.with(|c| c.set(Some(f)));
    f
}

fn shared_field(order: usize) -> &'static FieldData {
    static FIELDS: OnceLock<Mutex<HashMap<usize, &'static FieldData>>> = OnceLock::new();
    let mut map = FIELDS.get_or_init(Default::default).lock().unwrap();
    map.entry(order).or_insert_with(|| Box::leak(Box::new(build_field(order))))
}

/// An element of `Q(zeta_M)` in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyclotomic {
    order: usize,
    num: Vec<BigInt>,
    den: BigInt,
}

impl Cyclotomic {
    pub fn zero(order: usize) -> Self {
        let deg = field(order).degree();
        Cyclotomic { order, num: vec![BigInt::zero(); deg], den: BigInt::one() }
    }

    pub fn from_int(order: usize, v: impl Into<BigInt>) -> Self {
        let mut c = Self::zero(order);
        c.num[0] = v.into();
        c
    }

    pub fn one(order: usize) -> Self {
        Self::from_int(order, 1)
    }

    pub fn from_rational(order: usize, r: &BigRational) -> Self {
        let mut c = Self::zero(order);
        c.num[0] = r.numer().clone();
        c.den = r.denom().clone();
        c.normalize_den();
        c
    }

    /// `zeta_M^k`.
    pub fn root(order: usize, k: usize) -> Self {
        let f = field(order);
        let num = f.reduce[k % order].iter().map(|&v| BigInt::from(v)).collect();
        Cyclotomic { order, num, den: BigInt::one() }
    }

    /// Canonical form of `sum raw[k] x^k / den` for any raw length; powers are
    /// taken modulo `x^M - 1` first.
    pub fn from_raw(order: usize, raw: &[BigInt], den: &BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if let Some(small) = raw.iter().map(ToPrimitive::to_i128).collect::<Option<Vec<i128>>>() {
            if let Some(num) = reduce_small(order, &small) {
                let mut out = Cyclotomic { order, num, den: den.clone() };
                out.normalize_den();
                return out;
            }
        }
        let f = field(order);
        let deg = f.degree();
        let mut folded = vec![BigInt::zero(); order];
        for (k, c) in raw.iter().enumerate() {
            folded[k % order] += c;
        }
        let mut num = vec![BigInt::zero(); deg];
        for (k, c) in folded.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k < deg {
                num[k] += c;
                continue;
            }
            for (slot, &r) in num.iter_mut().zip(&f.reduce[k]) {
                if r != 0 {
                    *slot += c * r;
                }
            }
        }
        let mut out = Cyclotomic { order, num, den: den.clone() };
        out.normalize_den();
        out
    }

    fn normalize_den(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in &mut self.num {
                *c = -&*c;
            }
        }
        if self.den.is_one() {
            return;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                return;
            }
            g = g.gcd(c);
        }
        if !g.is_one() {
            self.den /= &g;
            for c in &mut self.num {
                *c /= &g;
            }
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Numerators of the canonical coefficients.
    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num.iter().map(|c| BigRational::new(c.clone(), self.den.clone())).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// The value if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.num[1..].iter().all(Zero::is_zero).then(|| BigRational::new(self.num[0].clone(), self.den.clone()))
    }

    /// The value if the element is a rational integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        let r = self.as_rational()?;
        r.is_integer().then(|| r.to_integer())
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.order, other.order, "cyclotomic order mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        if self.den == other.den {
            let num = self.num.iter().zip(&other.num).map(|(a, b)| a + b).collect();
            let mut out = Cyclotomic { order: self.order, num, den: self.den.clone() };
            out.normalize_den();
            return out;
        }
        let den = &self.den * &other.den;
        let num = self.num.iter().zip(&other.num).map(|(a, b)| a * &other.den + b * &self.den).collect();
        let mut out = Cyclotomic { order: self.order, num, den };
        out.normalize_den();
        out
    }

    pub fn neg(&self) -> Self {
        Cyclotomic { order: self.order, num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let deg = self.num.len();
        if let (Some(a), Some(b)) = (small_coeffs(&self.num), small_coeffs(&other.num)) {
            let mut raw = vec![0i128; 2 * deg];
            for (i, &x) in a.iter().enumerate() {
                if x != 0 {
                    for (j, &y) in b.iter().enumerate() {
                        raw[i + j] += x as i128 * y as i128;
                    }
                }
            }
            if let Some(num) = reduce_small(self.order, &raw) {
                let mut out = Cyclotomic { order: self.order, num, den: &self.den * &other.den };
                out.normalize_den();
                return out;
            }
        }
        let mut raw = vec![BigInt::zero(); 2 * deg];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        Self::from_raw(self.order, &raw, &(&self.den * &other.den))
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        let mut out =
            Cyclotomic { order: self.order, num: self.num.iter().map(|c| c * k).collect(), den: self.den.clone() };
        out.normalize_den();
        out
    }

    /// Divide the numerators by `k`, which must divide all of them.
    pub fn div_exact_in_place(&mut self, k: &BigInt) {
        assert!(!k.is_zero(), "division by zero");
        for c in &mut self.num {
            if !c.is_zero() {
                debug_assert!(c.is_multiple_of(k));
                *c /= k;
            }
        }
        if k.is_negative() {
            for c in &mut self.num {
                *c = -&*c;
            }
        }
    }

    /// Divide by a nonzero integer.
    pub fn div_int(&self, k: &BigInt) -> Self {
        assert!(!k.is_zero(), "division by zero");
        let mut out = Cyclotomic { order: self.order, num: self.num.clone(), den: &self.den * k };
        out.normalize_den();
        out
    }

    /// Multiply by `zeta_M^k`.
    pub fn mul_root(&self, k: usize) -> Self {
        let k = k % self.order;
        if k == 0 {
            return self.clone();
        }
        let mut raw = vec![BigInt::zero(); self.order];
        for (i, c) in self.num.iter().enumerate() {
            raw[(i + k) % self.order] = c.clone();
        }
        Self::from_raw(self.order, &raw, &self.den)
    }

    /// Complex conjugate: `zeta -> zeta^(M-1)`.
    pub fn conj(&self) -> Self {
        let mut raw = vec![BigInt::zero(); self.order];
        for (i, c) in self.num.iter().enumerate() {
            raw[(self.order - i) % self.order] += c;
        }
        Self::from_raw(self.order, &raw, &self.den)
    }

    /// `a * conj(a)`.
    pub fn norm_sqr(&self) -> Self {
        Self::sum_norm_sqr(self.order, std::iter::once(self))
    }

    /// `sum |a|^2` over the given elements.
    pub fn sum_norm_sqr<'a>(order: usize, items: impl Iterator<Item = &'a Cyclotomic> + Clone) -> Self {
        // fast path: integral, word-sized coefficients, summed over x^M - 1
        let mut raw = vec![0i128; order];
        let mut fast = true;
        for a in items.clone() {
            assert_eq!(a.order, order, "cyclotomic order mismatch");
            match (a.den.is_one(), small_coeffs(&a.num)) {
                (true, Some(c)) => {
                    for (i, &x) in c.iter().enumerate() {
                        if x == 0 {
                            continue;
                        }
                        for (j, &y) in c.iter().enumerate() {
                            if y != 0 {
                                let slot = &mut raw[(i + order - j) % order];
                                match slot.checked_add(x as i128 * y as i128) {
                                    Some(v) => *slot = v,
                                    None => fast = false,
                                }
                            }
                        }
                    }
                }
                _ => fast = false,
            }
            if !fast {
                break;
            }
        }
        if fast {
            if let Some(num) = reduce_small(order, &raw) {
                return Cyclotomic { order, num, den: BigInt::one() };
            }
        }
        let mut acc = RawCyclic::new(order);
        for a in items {
            acc.add_rotated(&a.mul(&a.conj()), 0);
        }
        acc.finish()
    }

    /// Gcd of the numerators (zero for the zero element).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.num {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn to_complex(&self) -> Complex64 {
        let f = field(self.order);
        let den = self.den.to_f64().unwrap_or(f64::INFINITY);
        self.num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| f.roots[i] * c.to_f64().unwrap_or(f64::NAN))
            .sum::<Complex64>()
            / den
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `[c0,c1,...]` or `[c0,c1,...]/den`.
impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.num.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")?;
        if !self.den.is_one() {
            write!(f, "/{}", self.den)?;
        }
        Ok(())
    }
}

/// Integer accumulator over `x^M - 1`: adding `zeta^k * a` is a rotation, so a
/// Fourier sum costs one canonicalization per output instead of per term.
#[derive(Clone, Debug)]
pub struct RawCyclic {
    order: usize,
    coeffs: Vec<BigInt>,
    den: BigInt,
}

impl RawCyclic {
    pub fn new(order: usize) -> Self {
        RawCyclic { order, coeffs: vec![BigInt::zero(); order], den: BigInt::one() }
    }

    /// `self += zeta^k * a`.
    pub fn add_rotated(&mut self, a: &Cyclotomic, k: usize) {
        assert_eq!(a.order, self.order, "cyclotomic order mismatch");
        if a.den != self.den {
            let l = self.den.lcm(&a.den);
            let up = &l / &self.den;
            if !up.is_one() {
                for c in &mut self.coeffs {
                    *c *= &up;
                }
            }
            self.den = l;
        }
        let scale = &self.den / &a.den;
        for (i, c) in a.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let slot = &mut self.coeffs[(i + k) % self.order];
            if scale.is_one() {
                *slot += c;
            } else {
                *slot += c * &scale;
            }
        }
    }

    pub fn finish(&self) -> Cyclotomic {
        Cyclotomic::from_raw(self.order, &self.coeffs, &self.den)
    }
}

/// Canonical residue of raw integer coefficients over `x^M - 1`.
pub fn cyclotomic_normalize(order: usize, raw: &[BigInt]) -> Cyclotomic {
    Cyclotomic::from_raw(order, raw, &BigInt::one())
}

/// Coefficients bounded by `2^40`, so that products of two and sums of up to
/// `2^40` such products fit in `i128`.
fn small_coeffs(v: &[BigInt]) -> Option<Vec<i64>> {
    const BOUND: i64 = 1 << 40;
    v.iter().map(|c| c.to_i64().filter(|x| x.abs() < BOUND)).collect()
}

/// Word-sized version of the reduction in `from_raw`; `None` on overflow.
fn reduce_small(order: usize, raw: &[i128]) -> Option<Vec<BigInt>> {
    let f = field(order);
    let deg = f.degree();
    let mut folded_buf;
    let folded: &[i128] = if raw.len() <= order {
        raw
    } else {
        folded_buf = vec![0i128; order];
        for (k, &c) in raw.iter().enumerate() {
            folded_buf[k % order] = folded_buf[k % order].checked_add(c)?;
        }
        &folded_buf
    };
    let mut num = vec![0i128; deg];
    for (k, &c) in folded.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if k < deg {
            num[k] = num[k].checked_add(c)?;
            continue;
        }
        for (slot, &r) in num.iter_mut().zip(&f.reduce[k]) {
            if r != 0 {
                *slot = slot.checked_add(c.checked_mul(r as i128)?)?;
            }
        }
    }
    Some(num.into_iter().map(BigInt::from).collect())
}

/// `lcm(4, m)`: the smallest order containing both `omega_m` and `i`.
pub fn root_order_for(m: u64) -> usize {
    4u64.lcm(&m) as usize
}
