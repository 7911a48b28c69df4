//! Amplitude arithmetic behind one interface: exact cyclotomic (authoritative)
//! and complex doubles (comparison only).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, RandBigInt};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cyclotomic::{field, Cyclotomic, RawCyclic};
use crate::{Error, Result};

use super::Label;

pub trait Backend: Clone + fmt::Debug + Send + Sync + 'static {
    type Amp: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync;
    type Acc;
    /// Squared-norm bookkeeping: the global factor is `1/sqrt(scale)`.
    type Scale: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync;

    const NAME: &'static str;

    /// Backend over `Q(zeta_order)`.
    fn with_order(order: usize) -> Self;
    fn order(&self) -> usize;
    fn zero(&self) -> Self::Amp;
    fn from_int(&self, v: i64) -> Self::Amp;
    /// `zeta_M^k`.
    fn root(&self, k: usize) -> Self::Amp;
    fn is_zero(&self, a: &Self::Amp) -> bool;
    fn add(&self, a: &Self::Amp, b: &Self::Amp) -> Self::Amp;
    fn neg(&self, a: &Self::Amp) -> Self::Amp;
    fn mul(&self, a: &Self::Amp, b: &Self::Amp) -> Self::Amp;
    fn mul_root(&self, a: &Self::Amp, k: usize) -> Self::Amp;
    fn conj(&self, a: &Self::Amp) -> Self::Amp;
    fn to_complex(&self, a: &Self::Amp) -> Complex64;
    fn is_real(&self, a: &Self::Amp) -> bool;
    /// Structural equality (exact) or agreement within `1e-9` (float).
    fn approx_eq(&self, a: &Self::Amp, b: &Self::Amp) -> bool;

    fn acc_new(&self) -> Self::Acc;
    /// `acc += zeta^k * a`.
    fn acc_add(&self, acc: &mut Self::Acc, a: &Self::Amp, k: usize);
    fn acc_finish(&self, acc: Self::Acc) -> Self::Amp;

    fn unit_scale(&self) -> Self::Scale;
    fn scale_to_f64(&self, s: &Self::Scale) -> f64;
    /// Total squared norm of a group of amplitudes, in scale units.
    fn mass<'a>(&self, amps: impl Iterator<Item = &'a Self::Amp>) -> Result<Self::Scale>
    where
        Self::Amp: 'a;
    fn mass_is_zero(&self, w: &Self::Scale) -> bool;
    /// Account for an unnormalized transform that multiplied the squared norm
    /// by `factor`.
    fn rescale(&self, amps: &mut BTreeMap<Label, Self::Amp>, scale: &mut Self::Scale, factor: u64);
    /// Renormalize after projecting onto an outcome of the given mass.
    fn collapse(&self, amps: &mut BTreeMap<Label, Self::Amp>, scale: &mut Self::Scale, mass: Self::Scale);
    /// Index drawn with probability proportional to `weights`.
    fn sample(&self, weights: &[Self::Scale], rng: &mut ChaCha8Rng) -> usize;

    fn normalized(&self, a: &Self::Amp, scale: &Self::Scale) -> Complex64 {
        self.to_complex(a) / self.scale_to_f64(scale).sqrt()
    }
}

/// Exact amplitudes in `Z[zeta_M]` with an integer scale `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exact {
    order: usize,
}

impl Exact {
    pub fn new(order: usize) -> Self {
        field(order);
        Exact { order }
    }
}

/// Exact draw from integer weights. Weights are reduced by their gcd first so
/// that two engines holding proportional weights consume randomness
/// identically.
pub fn sample_exact(weights: &[BigInt], rng: &mut ChaCha8Rng) -> usize {
    let mut g = BigInt::zero();
    for w in weights {
        g = g.gcd(w);
    }
    assert!(g.is_positive(), "cannot sample from zero weights");
    let reduced: Vec<BigInt> = weights.iter().map(|w| w / &g).collect();
    let total: BigInt = reduced.iter().sum();
    if reduced.len() == 1 {
        return 0;
    }
    let draw = rng.gen_bigint_range(&BigInt::zero(), &total);
    let mut acc = BigInt::zero();
    for (i, w) in reduced.iter().enumerate() {
        acc += w;
        if draw < acc {
            return i;
        }
    }
    unreachable!("draw below total")
}

impl Backend for Exact {
    type Amp = Cyclotomic;
    type Acc = RawCyclic;
    type Scale = BigInt;

    const NAME: &'static str = "exact";

    fn with_order(order: usize) -> Self {
        Exact::new(order)
    }
    fn order(&self) -> usize {
        self.order
    }
    fn zero(&self) -> Cyclotomic {
        Cyclotomic::zero(self.order)
    }
    fn from_int(&self, v: i64) -> Cyclotomic {
        Cyclotomic::from_int(self.order, v)
    }
    fn root(&self, k: usize) -> Cyclotomic {
        Cyclotomic::root(self.order, k)
    }
    fn is_zero(&self, a: &Cyclotomic) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Cyclotomic, b: &Cyclotomic) -> Cyclotomic {
        a.add(b)
    }
    fn neg(&self, a: &Cyclotomic) -> Cyclotomic {
        a.neg()
    }
    fn mul(&self, a: &Cyclotomic, b: &Cyclotomic) -> Cyclotomic {
        a.mul(b)
    }
    fn mul_root(&self, a: &Cyclotomic, k: usize) -> Cyclotomic {
        a.mul_root(k)
    }
    fn conj(&self, a: &Cyclotomic) -> Cyclotomic {
        a.conj()
    }
    fn to_complex(&self, a: &Cyclotomic) -> Complex64 {
        a.to_complex()
    }
    fn is_real(&self, a: &Cyclotomic) -> bool {
        *a == a.conj()
    }
    fn approx_eq(&self, a: &Cyclotomic, b: &Cyclotomic) -> bool {
        a == b
    }
    fn acc_new(&self) -> RawCyclic {
        RawCyclic::new(self.order)
    }
    fn acc_add(&self, acc: &mut RawCyclic, a: &Cyclotomic, k: usize) {
        acc.add_rotated(a, k);
    }
    fn acc_finish(&self, acc: RawCyclic) -> Cyclotomic {
        acc.finish()
    }
    fn unit_scale(&self) -> BigInt {
        BigInt::one()
    }
    fn scale_to_f64(&self, s: &BigInt) -> f64 {
        s.to_f64().unwrap_or(f64::INFINITY)
    }
    fn mass<'a>(&self, amps: impl Iterator<Item = &'a Cyclotomic>) -> Result<BigInt> {
        let amps: Vec<&Cyclotomic> = amps.collect();
        Cyclotomic::sum_norm_sqr(self.order, amps.iter().copied()).as_integer().ok_or(Error::IrrationalMass)
    }
    fn mass_is_zero(&self, w: &BigInt) -> bool {
        w.is_zero()
    }
    fn rescale(&self, amps: &mut BTreeMap<Label, Cyclotomic>, scale: &mut BigInt, factor: u64) {
        *scale *= factor;
        // amplitudes a/sqrt(N) with content g: divide a by g and N by g^2
        let mut g = BigInt::zero();
        for a in amps.values() {
            if !a.is_integral() {
                return;
            }
            g = g.gcd(&a.content());
            if g.is_one() {
                return;
            }
        }
        if g.is_zero() || g.is_one() {
            return;
        }
        let g2 = &g * &g;
        debug_assert!(scale.is_multiple_of(&g2));
        *scale /= &g2;
        for a in amps.values_mut() {
            a.div_exact_in_place(&g);
        }
    }
    fn collapse(&self, amps: &mut BTreeMap<Label, Cyclotomic>, scale: &mut BigInt, mass: BigInt) {
        // surviving amplitudes already have squared norm `mass`
        *scale = mass;
        self.rescale(amps, scale, 1);
    }
    fn sample(&self, weights: &[BigInt], rng: &mut ChaCha8Rng) -> usize {
        sample_exact(weights, rng)
    }
}

/// Complex doubles, kept normalized (scale fixed at 1).
#[derive(Clone, Debug, PartialEq)]
pub struct Float {
    order: usize,
    roots: Vec<Complex64>,
}

/// Amplitudes below this magnitude are treated as cancelled.
pub const FLOAT_PRUNE: f64 = 1e-12;

impl Float {
    pub fn new(order: usize) -> Self {
        let roots = (0..order)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / order as f64))
            .collect();
        Float { order, roots }
    }
}

/// Display wrapper so the float backend can share the dump format.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloatAmp(pub Complex64);

impl fmt::Display for FloatAmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12},{:.12}]", self.0.re, self.0.im)
    }
}

impl Backend for Float {
    type Amp = FloatAmp;

    fn with_order(order: usize) -> Self {
        Float::new(order)
    }
    type Acc = Complex64;
    type Scale = f64;

    const NAME: &'static str = "float";

    fn order(&self) -> usize {
        self.order
    }
    fn zero(&self) -> FloatAmp {
        FloatAmp(Complex64::new(0.0, 0.0))
    }
    fn from_int(&self, v: i64) -> FloatAmp {
        FloatAmp(Complex64::new(v as f64, 0.0))
    }
    fn root(&self, k: usize) -> FloatAmp {
        FloatAmp(self.roots[k % self.order])
    }
    fn is_zero(&self, a: &FloatAmp) -> bool {
        a.0.norm() < FLOAT_PRUNE
    }
    fn add(&self, a: &FloatAmp, b: &FloatAmp) -> FloatAmp {
        FloatAmp(a.0 + b.0)
    }
    fn neg(&self, a: &FloatAmp) -> FloatAmp {
        FloatAmp(-a.0)
    }
    fn mul(&self, a: &FloatAmp, b: &FloatAmp) -> FloatAmp {
        FloatAmp(a.0 * b.0)
    }
    fn mul_root(&self, a: &FloatAmp, k: usize) -> FloatAmp {
        FloatAmp(a.0 * self.roots[k % self.order])
    }
    fn conj(&self, a: &FloatAmp) -> FloatAmp {
        FloatAmp(a.0.conj())
    }
    fn to_complex(&self, a: &FloatAmp) -> Complex64 {
        a.0
    }
    fn is_real(&self, a: &FloatAmp) -> bool {
        a.0.im.abs() <= 1e-9 * a.0.norm().max(1.0)
    }
    fn approx_eq(&self, a: &FloatAmp, b: &FloatAmp) -> bool {
        (a.0 - b.0).norm() <= 1e-9
    }
    fn acc_new(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn acc_add(&self, acc: &mut Complex64, a: &FloatAmp, k: usize) {
        *acc += a.0 * self.roots[k % self.order];
    }
    fn acc_finish(&self, acc: Complex64) -> FloatAmp {
        FloatAmp(acc)
    }
    fn unit_scale(&self) -> f64 {
        1.0
    }
    fn scale_to_f64(&self, s: &f64) -> f64 {
        *s
    }
    fn mass<'a>(&self, amps: impl Iterator<Item = &'a FloatAmp>) -> Result<f64> {
        Ok(amps.map(|a| a.0.norm_sqr()).sum())
    }
    fn mass_is_zero(&self, w: &f64) -> bool {
        *w < FLOAT_PRUNE * FLOAT_PRUNE
    }
    fn rescale(&self, amps: &mut BTreeMap<Label, FloatAmp>, _scale: &mut f64, factor: u64) {
        let s = (factor as f64).sqrt();
        amps.retain(|_, a| {
            a.0 /= s;
            a.0.norm() >= FLOAT_PRUNE
        });
    }
    fn collapse(&self, amps: &mut BTreeMap<Label, FloatAmp>, scale: &mut f64, mass: f64) {
        let s = (mass / *scale).sqrt();
        for a in amps.values_mut() {
            a.0 /= s;
        }
        *scale = 1.0;
    }
    fn sample(&self, weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
        let total: f64 = weights.iter().sum();
        let draw = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if draw < acc {
                return i;
            }
        }
        weights.len() - 1
    }
}
