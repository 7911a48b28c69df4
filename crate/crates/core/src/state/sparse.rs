use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;

use super::backend::{Backend, Exact};
use super::circuit::ClassicalMap;
use super::layout::{RegisterKind, RegisterLayout};
use super::measure::{Prefer, Sampler};
use super::Label;
use crate::{Error, Result};

/// Hard cap on the number of stored labels.
pub const MAX_SUPPORT: usize = 1 << 20;

/// Sparse state `(1/sqrt(N)) * sum a_l |l>` with zero amplitudes absent.
#[derive(Clone)]
pub struct SparseState<B: Backend = Exact> {
    layout: Arc<RegisterLayout>,
    backend: B,
    scale: B::Scale,
    amps: BTreeMap<Label, B::Amp>,
}

impl<B: Backend> SparseState<B> {
    pub fn prepare_zero(layout: Arc<RegisterLayout>, backend: B) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(layout.zero_label(), backend.from_int(1));
        let scale = backend.unit_scale();
        SparseState { layout, backend, scale, amps }
    }

    /// Builds a state from explicit amplitudes; checks labels and the
    /// normalization `sum |a|^2 = scale`.
    pub fn from_amplitudes(
        layout: Arc<RegisterLayout>,
        backend: B,
        scale: B::Scale,
        amps: impl IntoIterator<Item = (Label, B::Amp)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (l, a) in amps {
            layout.check_label(&l)?;
            if !backend.is_zero(&a) {
                map.insert(l, a);
            }
        }
        if map.is_empty() {
            return Err(Error::Precondition("state must have nonempty support".into()));
        }
        let s = SparseState { layout, backend, scale, amps: map };
        if !s.is_normalized()? {
            return Err(Error::Precondition("amplitudes do not match the declared scale".into()));
        }
        Ok(s)
    }

    /// Equal-weight superposition over distinct labels.
    pub fn uniform(layout: Arc<RegisterLayout>, backend: B, labels: impl IntoIterator<Item = Label>) -> Result<Self> {
        let mut amps = BTreeMap::new();
        for l in labels {
            layout.check_label(&l)?;
            amps.insert(l, backend.from_int(1));
        }
        if amps.is_empty() {
            return Err(Error::Precondition("state must have nonempty support".into()));
        }
        let mut scale = backend.unit_scale();
        let count = amps.len() as u64;
        backend.rescale(&mut amps, &mut scale, count);
        Ok(SparseState { layout, backend, scale, amps })
    }

    /// Multiplies each amplitude by `coeff(label)`; `factor` is the resulting
    /// growth of the squared norm.
    pub fn scale_diagonal<'c>(&mut self, coeff: impl Fn(&[u64]) -> &'c B::Amp, factor: u64)
    where
        B::Amp: 'c,
    {
        let b = &self.backend;
        for (l, a) in self.amps.iter_mut() {
            *a = b.mul(a, coeff(l));
        }
        self.amps.retain(|_, a| !b.is_zero(a));
        b.rescale(&mut self.amps, &mut self.scale, factor);
    }

    /// `self (x) other` on the concatenated layout; register names must be
    /// distinct.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut regs = self.layout.registers().to_vec();
        regs.extend(other.layout.registers().iter().cloned());
        let layout = Arc::new(RegisterLayout::new(regs)?);
        let b = &self.backend;
        if self.amps.len().saturating_mul(other.amps.len()) > MAX_SUPPORT {
            return Err(Error::StateTooLarge(MAX_SUPPORT));
        }
        let mut amps = BTreeMap::new();
        for (l, a) in &self.amps {
            for (r, c) in &other.amps {
                let mut label = l.clone();
                label.extend_from_slice(r);
                amps.insert(label, b.mul(a, c));
            }
        }
        let mut scale = b.unit_scale();
        let total = b.mass(amps.values())?;
        b.collapse(&mut amps, &mut scale, total);
        Ok(SparseState { layout, backend: b.clone(), scale, amps })
    }

    /// Removes the global phase: multiplies by the conjugate of the first
    /// amplitude, which becomes real and positive.
    pub fn fix_global_phase(&mut self) -> Result<()> {
        let b = &self.backend;
        let Some(pivot) = self.amps.values().next() else {
            return Ok(());
        };
        let c = b.conj(pivot);
        for a in self.amps.values_mut() {
            *a = b.mul(a, &c);
        }
        let total = b.mass(self.amps.values())?;
        b.collapse(&mut self.amps, &mut self.scale, total);
        Ok(())
    }

    /// Same amplitudes on another layout of identical shape (e.g. renamed
    /// registers).
    pub fn relabel(&self, layout: Arc<RegisterLayout>) -> Result<Self> {
        let same_shape = layout.width() == self.layout.width()
            && (0..layout.width()).all(|s| layout.slot_modulus(s).ok() == self.layout.slot_modulus(s).ok());
        if !same_shape {
            return Err(Error::Register("relabel needs a layout of the same shape".into()));
        }
        Ok(SparseState { layout, backend: self.backend.clone(), scale: self.scale.clone(), amps: self.amps.clone() })
    }

    /// Basis state `|label>`.
    pub fn basis(layout: Arc<RegisterLayout>, backend: B, label: Label) -> Result<Self> {
        layout.check_label(&label)?;
        let one = backend.from_int(1);
        let scale = backend.unit_scale();
        Ok(SparseState { layout, backend, scale, amps: BTreeMap::from([(label, one)]) })
    }

    pub fn layout(&self) -> &Arc<RegisterLayout> {
        &self.layout
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn scale(&self) -> &B::Scale {
        &self.scale
    }

    pub fn amplitudes(&self) -> &BTreeMap<Label, B::Amp> {
        &self.amps
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, label: &[u64]) -> Option<&B::Amp> {
        self.amps.get(label)
    }

    /// `a / sqrt(N)` as a complex number (zero off the support).
    pub fn normalized_amplitude(&self, label: &[u64]) -> Complex64 {
        self.amps.get(label).map(|a| self.backend.normalized(a, &self.scale)).unwrap_or_default()
    }

    /// Exact check of `sum a conj(a) = N` (tolerance `1e-9` on the float
    /// backend).
    pub fn is_normalized(&self) -> Result<bool> {
        let total = self.backend.mass(self.amps.values())?;
        let t = self.backend.scale_to_f64(&total);
        let s = self.backend.scale_to_f64(&self.scale);
        if B::NAME == "exact" {
            Ok(total == self.scale)
        } else {
            Ok((t - s).abs() <= 1e-9 * s.max(1.0))
        }
    }

    fn digit_slot(&self, slot: usize) -> Result<u64> {
        let reg = self.layout.register_of_slot(slot)?;
        match reg.kind {
            RegisterKind::Digits { modulus, .. } => Ok(modulus),
            _ => Err(Error::Register(format!("register {:?} is not a digit register", reg.name))),
        }
    }

    /// Unnormalized `QFT_m` (or its inverse) on one digit slot.
    pub fn apply_qft(&mut self, slot: usize, inverse: bool) -> Result<()> {
        let m = self.digit_slot(slot)?;
        let order = self.backend.order() as u64;
        let required = 4u64.lcm(&m);
        if order % required != 0 {
            return Err(Error::RootOrder { order: order as u32, required: required as u32 });
        }
        let step = order / m;
        let mut acc: HashMap<Label, B::Acc> = HashMap::new();
        for (label, a) in &self.amps {
            let x = label[slot];
            let mut out = label.clone();
            for y in 0..m {
                out[slot] = y;
                let e = (x * y % m) * step;
                let k = if inverse { (order - e) % order } else { e };
                let entry = acc.entry(out.clone()).or_insert_with(|| self.backend.acc_new());
                self.backend.acc_add(entry, a, k as usize);
            }
            if acc.len() > MAX_SUPPORT {
                return Err(Error::StateTooLarge(MAX_SUPPORT));
            }
        }
        self.replace_from_acc(acc, m)
    }

    fn replace_from_acc(&mut self, acc: HashMap<Label, B::Acc>, factor: u64) -> Result<()> {
        let mut amps = BTreeMap::new();
        for (l, a) in acc {
            let v = self.backend.acc_finish(a);
            if !self.backend.is_zero(&v) {
                amps.insert(l, v);
            }
        }
        self.amps = amps;
        self.backend.rescale(&mut self.amps, &mut self.scale, factor);
        if self.amps.is_empty() {
            return Err(Error::Precondition("transform annihilated the state".into()));
        }
        Ok(())
    }

    /// Unnormalized Hadamard on a qubit slot.
    pub fn apply_hadamard(&mut self, slot: usize) -> Result<()> {
        let reg = self.layout.register_of_slot(slot)?;
        if reg.kind != RegisterKind::Qubit {
            return Err(Error::Register(format!("register {:?} is not a qubit", reg.name)));
        }
        let half = self.backend.order() / 2;
        let mut acc: HashMap<Label, B::Acc> = HashMap::new();
        for (label, a) in &self.amps {
            let b = label[slot];
            let mut out = label.clone();
            for y in 0..2u64 {
                out[slot] = y;
                let k = if b == 1 && y == 1 { half } else { 0 };
                let entry = acc.entry(out.clone()).or_insert_with(|| self.backend.acc_new());
                self.backend.acc_add(entry, a, k);
            }
        }
        if acc.len() > MAX_SUPPORT {
            return Err(Error::StateTooLarge(MAX_SUPPORT));
        }
        self.replace_from_acc(acc, 2)
    }

    /// Permutes labels; detects collisions on the support.
    pub fn apply_classical_map(&mut self, map: &ClassicalMap, inverse: bool) -> Result<()> {
        let mut out = BTreeMap::new();
        for (label, a) in std::mem::take(&mut self.amps) {
            let mut image = label.clone();
            map.apply(&mut image, inverse);
            if let Err(e) = self.layout.check_label(&image) {
                return Err(Error::NotBijection(format!("{}: {label:?} maps outside the layout ({e})", map.name())));
            }
            if out.insert(image.clone(), a).is_some() {
                return Err(Error::NotBijection(format!("{}: {image:?}", map.name())));
            }
        }
        self.amps = out;
        Ok(())
    }

    /// Multiplies amplitudes on labels satisfying `pred` by `i^quarter_turns`.
    pub fn conditional_phase_i(&mut self, pred: &dyn Fn(&[u64]) -> bool, quarter_turns: u32) {
        let k = (quarter_turns as usize % 4) * self.backend.order() / 4;
        if k == 0 {
            return;
        }
        for (l, a) in self.amps.iter_mut() {
            if pred(l) {
                *a = self.backend.mul_root(a, k);
            }
        }
    }

    /// Multiplies every amplitude satisfying `pred` by `zeta_M^k`.
    pub fn conditional_root_phase(&mut self, pred: &dyn Fn(&[u64]) -> bool, k: usize) {
        for (l, a) in self.amps.iter_mut() {
            if pred(l) {
                *a = self.backend.mul_root(a, k);
            }
        }
    }

    /// Outcome masses (in scale units) of the given slots, sorted by value.
    pub fn marginal(&self, slots: &[usize]) -> Result<Vec<(Vec<u64>, B::Scale)>> {
        let mut groups: BTreeMap<Vec<u64>, Vec<&B::Amp>> = BTreeMap::new();
        for (l, a) in &self.amps {
            groups.entry(slots.iter().map(|&s| l[s]).collect()).or_default().push(a);
        }
        let mut out = Vec::with_capacity(groups.len());
        for (v, amps) in groups {
            let w = self.backend.mass(amps.into_iter())?;
            if !self.backend.mass_is_zero(&w) {
                out.push((v, w));
            }
        }
        Ok(out)
    }

    /// Measures `slots`, returning the outcome and the collapsed state.
    pub fn measure(&self, slots: &[usize], sampler: &mut Sampler, prefer: Prefer<'_>) -> Result<(Vec<u64>, Self)> {
        for &s in slots {
            self.layout.register_of_slot(s)?;
        }
        let marginal = self.marginal(slots)?;
        let (values, weights): (Vec<_>, Vec<_>) = marginal.into_iter().unzip();
        let backend = self.backend.clone();
        let idx = sampler.choose(&values, &weights, prefer, |w, rng| backend.sample(w, rng))?;
        let outcome = values[idx].clone();
        let mut amps: BTreeMap<Label, B::Amp> = self
            .amps
            .iter()
            .filter(|(l, _)| slots.iter().zip(&outcome).all(|(&s, &v)| l[s] == v))
            .map(|(l, a)| (l.clone(), a.clone()))
            .collect();
        let mut scale = self.scale.clone();
        self.backend.collapse(&mut amps, &mut scale, weights[idx].clone());
        Ok((outcome, SparseState { layout: self.layout.clone(), backend: self.backend.clone(), scale, amps }))
    }

    /// Measures a whole register by name.
    pub fn measure_register(&self, name: &str, sampler: &mut Sampler, prefer: Prefer<'_>) -> Result<(Vec<u64>, Self)> {
        let slots: Vec<usize> = self.layout.slots(name)?.collect();
        self.measure(&slots, sampler, prefer)
    }

    /// Splits into (named registers, the rest) if the state is an exact
    /// tensor product across that partition.
    pub fn factor_split(&self, names: &[&str]) -> Result<(Self, Self)> {
        let (left_layout, left_slots) = self.layout.restrict(names)?;
        let rest: Vec<&str> =
            self.layout.registers().iter().map(|r| r.name.as_str()).filter(|n| !names.contains(n)).collect();
        if rest.is_empty() || left_slots.is_empty() {
            return Err(Error::Register("factor_split needs two nonempty parts".into()));
        }
        let (right_layout, right_slots) = self.layout.restrict(&rest)?;
        let split = |l: &Label| -> (Label, Label) {
            (left_slots.iter().map(|&s| l[s]).collect(), right_slots.iter().map(|&s| l[s]).collect())
        };
        let (pivot_label, pivot) = self.amps.iter().next().expect("nonempty support");
        let (r0, c0) = split(pivot_label);
        let mut left: BTreeMap<Label, B::Amp> = BTreeMap::new();
        let mut right: BTreeMap<Label, B::Amp> = BTreeMap::new();
        for (l, a) in &self.amps {
            let (r, c) = split(l);
            if c == c0 {
                left.insert(r.clone(), a.clone());
            }
            if r == r0 {
                right.insert(c, a.clone());
            }
        }
        // a(r,c) * a(r0,c0) == a(r,c0) * a(r0,c) for every pair, zeros included
        if left.len() * right.len() != self.amps.len() {
            return Err(Error::NotProduct);
        }
        for (l, a) in &self.amps {
            let (r, c) = split(l);
            let (Some(ar), Some(ac)) = (left.get(&r), right.get(&c)) else {
                return Err(Error::NotProduct);
            };
            if !self.backend.approx_eq(&self.backend.mul(a, pivot), &self.backend.mul(ar, ac)) {
                return Err(Error::NotProduct);
            }
        }
        let left_mass = self.backend.mass(left.values())?;
        let right_mass = self.backend.mass(right.values())?;
        let b = &self.backend;
        let mut ls =
            SparseState { layout: Arc::new(left_layout), backend: b.clone(), scale: b.unit_scale(), amps: left };
        let mut rs =
            SparseState { layout: Arc::new(right_layout), backend: b.clone(), scale: b.unit_scale(), amps: right };
        b.collapse(&mut ls.amps, &mut ls.scale, left_mass);
        b.collapse(&mut rs.amps, &mut rs.scale, right_mass);
        Ok((ls, rs))
    }

    /// Debug dump: `N=<scale>` then one line per support label.
    pub fn dump(&self) -> String {
        let mut out = format!("N={}\n", self.scale);
        for (l, a) in &self.amps {
            let label: Vec<String> = l.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "({}) {}", label.join(","), a);
        }
        out
    }

    /// Total scale-free squared norm of the labels selected by `pred`.
    pub fn mass_where(&self, pred: &dyn Fn(&[u64]) -> bool) -> Result<B::Scale> {
        self.backend.mass(self.amps.iter().filter(|(l, _)| pred(l)).map(|(_, a)| a))
    }

    /// Largest normalized-amplitude difference against another state on the
    /// same layout.
    pub fn max_deviation<C: Backend>(&self, other: &SparseState<C>) -> f64 {
        let mut worst: f64 = 0.0;
        for l in self.amps.keys().chain(other.amps.keys()) {
            let d = (self.normalized_amplitude(l) - other.normalized_amplitude(l)).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Same state with every amplitude mapped into another backend.
    pub fn convert<C: Backend>(&self, backend: C, f: impl Fn(&B::Amp) -> C::Amp, scale: C::Scale) -> SparseState<C> {
        let amps = self.amps.iter().map(|(l, a)| (l.clone(), f(a))).collect();
        SparseState { layout: self.layout.clone(), backend, scale, amps }
    }
}

impl<B: Backend> SparseState<B> {
    /// Proportional amplitudes on the same support; for unit vectors this is
    /// equality up to a global phase.
    pub fn equal_up_to_phase(&self, other: &Self) -> bool {
        self.ratio_witness(other).is_some()
    }

    /// Equal as vectors (the scale may be split off differently).
    pub fn same_state(&self, other: &Self) -> bool {
        match self.ratio_witness(other) {
            Some(x) => self.backend.is_real(&x) && self.backend.to_complex(&x).re > 0.0,
            None => false,
        }
    }

    /// `b(l0) * conj(a(l0))` when `other` is proportional to `self`.
    fn ratio_witness(&self, other: &Self) -> Option<B::Amp> {
        if self.layout != other.layout || self.amps.len() != other.amps.len() {
            return None;
        }
        let b = &self.backend;
        let (l0, a0) = self.amps.iter().next()?;
        let b0 = other.amps.get(l0)?;
        for (l, a) in &self.amps {
            let o = other.amps.get(l)?;
            if !b.approx_eq(&b.mul(a, b0), &b.mul(o, a0)) {
                return None;
            }
        }
        Some(b.mul(b0, &b.conj(a0)))
    }
}

impl<B: Backend> PartialEq for SparseState<B> {
    fn eq(&self, other: &Self) -> bool {
        self.same_state(other)
    }
}

impl<B: Backend> fmt::Debug for SparseState<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
