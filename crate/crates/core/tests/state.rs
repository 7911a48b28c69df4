use std::sync::Arc;

use hspkit::cyclotomic::Cyclotomic;
use hspkit::state::*;
use hspkit::Error;
use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;

fn exact(order: usize) -> Exact {
    Exact::new(order)
}

fn layout(b: LayoutBuilder) -> Arc<RegisterLayout> {
    Arc::new(b.build().unwrap())
}

fn all_labels(l: &RegisterLayout) -> Vec<Label> {
    let mods: Vec<u64> = (0..l.width()).map(|s| l.slot_modulus(s).unwrap()).collect();
    let mut out = vec![vec![]];
    for m in mods {
        out = out.into_iter().flat_map(|p: Label| (0..m).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

fn dense<B: Backend>(s: &SparseState<B>) -> Vec<(Label, Complex64)> {
    all_labels(s.layout())
        .into_iter()
        .map(|l| {
            let a = s.normalized_amplitude(&l);
            (l, a)
        })
        .collect()
}

/// Dense `(F_m (x) I)` with `F_yx = w^{+-xy} / sqrt m` on one slot.
fn dense_dft(v: &[(Label, Complex64)], slot: usize, m: u64, inverse: bool) -> Vec<(Label, Complex64)> {
    v.iter()
        .map(|(l, _)| {
            let y = l[slot];
            let sum: Complex64 = v
                .iter()
                .filter(|(k, _)| k.iter().enumerate().all(|(i, &x)| i == slot || x == l[i]))
                .map(|(k, a)| {
                    let sign = if inverse { -1.0 } else { 1.0 };
                    let ang = sign * 2.0 * std::f64::consts::PI * ((k[slot] * y) % m) as f64 / m as f64;
                    a * Complex64::from_polar(1.0, ang)
                })
                .sum();
            (l.clone(), sum / (m as f64).sqrt())
        })
        .collect()
}

fn max_diff(a: &[(Label, Complex64)], b: &[(Label, Complex64)]) -> f64 {
    a.iter()
        .zip(b)
        .map(|((l1, x), (l2, y))| {
            assert_eq!(l1, l2);
            (x - y).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn prepare_zero_examples() {
    let q = layout(RegisterLayout::builder().qubit("q"));
    let s = SparseState::prepare_zero(q, exact(4));
    assert_eq!(s.support_len(), 1);
    assert_eq!(s.amplitude(&[0]), Some(&Cyclotomic::one(4)));
    assert_eq!(s.scale(), &BigInt::from(1));
    let d = layout(RegisterLayout::builder().digits("x", 6, 1));
    assert_eq!(SparseState::prepare_zero(d, exact(12)).amplitudes().keys().next().unwrap(), &vec![0]);
    let c = layout(RegisterLayout::builder().digits("x", 3, 2).bits("v", 4).qubit("b"));
    let s = SparseState::prepare_zero(c, exact(12));
    assert_eq!(s.amplitudes().keys().next().unwrap(), &vec![0, 0, 0, 0]);
}

#[test]
fn qft_examples() {
    let l = layout(RegisterLayout::builder().digits("x", 6, 1));
    let mut s = SparseState::prepare_zero(l.clone(), exact(12));
    s.apply_qft(0, false).unwrap();
    assert_eq!(s.support_len(), 6);
    assert_eq!(s.scale(), &BigInt::from(6));
    assert!(s.amplitudes().values().all(|a| *a == Cyclotomic::one(12)));
    s.apply_qft(0, true).unwrap();
    assert_eq!(s, SparseState::prepare_zero(l, exact(12)));

    // m = 3: |1> -> (1, w, w^2)/sqrt 3 with w = zeta_12^4
    let l3 = layout(RegisterLayout::builder().digits("x", 3, 1));
    let mut s = SparseState::basis(l3, exact(12), vec![1]).unwrap();
    s.apply_qft(0, false).unwrap();
    assert_eq!(s.scale(), &BigInt::from(3));
    for y in 0..3u64 {
        assert_eq!(s.amplitude(&[y]), Some(&Cyclotomic::root(12, 4 * y as usize)));
    }
    assert!(s.is_normalized().unwrap());
}

#[test]
fn qft_requires_root_order() {
    let l = layout(RegisterLayout::builder().digits("x", 3, 1));
    let mut s = SparseState::prepare_zero(l, exact(4));
    assert_eq!(s.apply_qft(0, false), Err(Error::RootOrder { order: 4, required: 12 }));
    let q = layout(RegisterLayout::builder().qubit("q"));
    let mut s = SparseState::prepare_zero(q, exact(4));
    assert!(matches!(s.apply_qft(0, false), Err(Error::Register(_))));
}

#[test]
fn qft_matches_dense_dft_for_all_small_moduli() {
    for m in 2..=12u64 {
        let order = 4 * m as usize;
        let l = layout(RegisterLayout::builder().digits("x", m, 2));
        // a sparse start state built from basis states and phases
        let amps: Vec<(Label, Cyclotomic)> = vec![
            (vec![1, 0], Cyclotomic::one(order)),
            (vec![m - 1, 1], Cyclotomic::root(order, 3)),
            (vec![0, m / 2], Cyclotomic::root(order, order / 4).add(&Cyclotomic::one(order))),
        ];
        let scale = BigInt::from(4);
        let mut s = SparseState::from_amplitudes(l, exact(order), scale, amps).unwrap();
        for (slot, inverse) in [(0, false), (1, true), (0, true), (1, false)] {
            let before = dense(&s);
            s.apply_qft(slot, inverse).unwrap();
            assert!(s.is_normalized().unwrap());
            let want = dense_dft(&before, slot, m, inverse);
            assert!(max_diff(&dense(&s), &want) < 1e-9, "m={m} slot={slot}");
        }
    }
}

#[test]
fn hadamard_examples() {
    let q = layout(RegisterLayout::builder().qubit("q"));
    let mut s = SparseState::prepare_zero(q.clone(), exact(4));
    s.apply_hadamard(0).unwrap();
    assert_eq!(s.scale(), &BigInt::from(2));
    assert_eq!(s.amplitude(&[0]), s.amplitude(&[1]));
    s.apply_hadamard(0).unwrap();
    assert_eq!(s, SparseState::prepare_zero(q.clone(), exact(4)));
    let minus = SparseState::from_amplitudes(
        q.clone(),
        exact(4),
        BigInt::from(2),
        [(vec![0], Cyclotomic::one(4)), (vec![1], Cyclotomic::from_int(4, -1))],
    )
    .unwrap();
    let mut m = minus.clone();
    m.apply_hadamard(0).unwrap();
    assert_eq!(m, SparseState::basis(q, exact(4), vec![1]).unwrap());
    let d = layout(RegisterLayout::builder().digits("x", 2, 1));
    assert!(SparseState::prepare_zero(d, exact(4)).apply_hadamard(0).is_err());
}

fn xor_flag(flag: usize, f: impl Fn(&[u64]) -> u64 + Send + Sync + 'static) -> ClassicalMap {
    ClassicalMap::involution("flag", Arc::new(move |l: &mut [u64]| l[flag] ^= f(l)))
}

#[test]
fn classical_map_examples() {
    let l = layout(RegisterLayout::builder().digits("x", 4, 1).qubit("f"));
    let mut s = SparseState::prepare_zero(l.clone(), exact(4));
    s.apply_qft(0, false).unwrap();
    let before = s.clone();
    let id = ClassicalMap::involution("id", Arc::new(|_: &mut [u64]| {}));
    s.apply_classical_map(&id, false).unwrap();
    assert_eq!(s, before);
    let flag = xor_flag(1, |l| (l[0] % 2 == 1) as u64);
    s.apply_classical_map(&flag, false).unwrap();
    assert_ne!(s, before);
    assert_eq!(s.support_len(), before.support_len());
    s.apply_classical_map(&flag, false).unwrap();
    assert_eq!(s, before);

    let collapse = ClassicalMap::involution("bad", Arc::new(|l: &mut [u64]| l[0] = 0));
    assert!(matches!(s.apply_classical_map(&collapse, false), Err(Error::NotBijection(_))));
}

/// Left multiplication in `Z_2 x Z_2` (codes 0..4, xor) against its dense
/// permutation matrix on the 8-dimensional space `G x qubit`.
#[test]
fn left_multiplication_matches_dense_matrix() {
    let l = layout(RegisterLayout::builder().bits("g", 2).qubit("c"));
    let s = SparseState::from_amplitudes(
        l.clone(),
        exact(4),
        BigInt::from(2),
        [(vec![1, 0], Cyclotomic::one(4)), (vec![2, 1], Cyclotomic::root(4, 1))],
    )
    .unwrap();
    for g in 0..4u64 {
        let map = ClassicalMap::involution("mul", Arc::new(move |l: &mut [u64]| l[0] ^= g));
        let mut t = s.clone();
        t.apply_classical_map(&map, false).unwrap();
        let labels = all_labels(&l);
        let v: Vec<Complex64> = labels.iter().map(|x| s.normalized_amplitude(x)).collect();
        for (i, row) in labels.iter().enumerate() {
            // (P v)_row = v_{P^-1 row}
            let src: Label = vec![row[0] ^ g, row[1]];
            let j = labels.iter().position(|x| *x == src).unwrap();
            assert!((t.normalized_amplitude(row) - v[j]).norm() < 1e-12, "row {i}");
        }
        assert_eq!(t.support_len(), 2);
    }
}

#[test]
fn conditional_phase_examples() {
    let l = layout(RegisterLayout::builder().digits("x", 3, 1));
    let mut s = SparseState::prepare_zero(l, exact(12));
    s.apply_qft(0, false).unwrap();
    let before = s.clone();
    s.conditional_phase_i(&|_| false, 1);
    assert_eq!(s, before);
    for _ in 0..4 {
        s.conditional_phase_i(&|l| l[0] == 2, 1);
    }
    assert_eq!(s, before);
    s.conditional_phase_i(&|_| true, 1);
    assert!(s.equal_up_to_phase(&before));
    assert_ne!(s, before);
    assert!(s.is_normalized().unwrap());
    for (l, a) in s.amplitudes() {
        assert_eq!(*a, before.amplitude(l).unwrap().mul_root(3));
    }
}

/// prep on `b (x) flag`: rotate b into `cos|0> + sin|1>` shapes, copy b into the flag.
fn flag_prep(kind: &str) -> (Arc<RegisterLayout>, Circuit) {
    let l = layout(RegisterLayout::builder().qubit("b").qubit("flag"));
    let copy = xor_flag(1, |l| l[0]);
    let not = ClassicalMap::involution("not", Arc::new(|l: &mut [u64]| l[0] ^= 1));
    let c = match kind {
        "half" => Circuit::new().hadamard(0).map(copy),
        "zero" => Circuit::new().map(copy),
        "one" => Circuit::new().map(not).map(copy),
        _ => unreachable!(),
    };
    (l, c)
}

fn good() -> Predicate {
    Arc::new(|l: &[u64]| l[l.len() - 1] == 1)
}

#[test]
fn amplification_examples() {
    let (l, prep) = flag_prep("half");
    let amp = amplitude_amplify(&prep, good());
    let mut counts = GateCounts::default();
    let out = amp.run(SparseState::prepare_zero(l.clone(), exact(4)), &mut counts).unwrap();
    assert!(out.amplitudes().keys().all(|k| k[1] == 1), "bad branch must vanish exactly");
    assert_eq!(out.mass_where(&|k| k[1] == 1).unwrap(), *out.scale());
    assert_eq!(counts.hadamard, 3);

    let (l, prep) = flag_prep("zero");
    let out =
        amplitude_amplify(&prep, good()).run(SparseState::prepare_zero(l.clone(), exact(4)), &mut counts).unwrap();
    assert!(out.amplitudes().keys().all(|k| k[1] == 0));

    let (l, prep) = flag_prep("one");
    let start = SparseState::prepare_zero(l.clone(), exact(4));
    let psi = prep.run(start.clone(), &mut counts).unwrap();
    let out = amplitude_amplify(&prep, good()).run(start, &mut counts).unwrap();
    let minus_psi = SparseState::from_amplitudes(
        l,
        exact(4),
        psi.scale().clone(),
        psi.amplitudes().iter().map(|(k, a)| (k.clone(), a.neg())),
    )
    .unwrap();
    assert_eq!(out, minus_psi);
}

/// Closed form `(i - 2ip)|psi> + (i - 1)|psi_good>` checked exactly for good
/// mass `p = 1/3`.
#[test]
fn amplification_matches_two_dimensional_formula() {
    let order = 12;
    let l = layout(RegisterLayout::builder().digits("x", 3, 1).qubit("flag"));
    let prep = Circuit::new().qft(0).map(xor_flag(1, |l| (l[0] == 0) as u64));
    let start = SparseState::prepare_zero(l, exact(order));
    let mut counts = GateCounts::default();
    let psi = prep.run(start.clone(), &mut counts).unwrap();
    counts = GateCounts::default();
    let out = amplitude_amplify(&prep, good()).run(start, &mut counts).unwrap();
    assert_eq!(counts.qft_forward, 2);
    assert_eq!(counts.qft_inverse, 1);
    let i = Cyclotomic::root(order, 3);
    let p = Cyclotomic::from_rational(order, &num_rational::BigRational::new(1.into(), 3.into()));
    let two_ip = i.mul(&p).mul_int(&BigInt::from(2));
    let c_bad = i.sub(&two_ip);
    let c_good = c_bad.add(&i).sub(&Cyclotomic::one(order));
    for (k, a) in psi.amplitudes() {
        let want = if k[1] == 1 { a.mul(&c_good) } else { a.mul(&c_bad) };
        // compare a_out / sqrt(N_out) with want / sqrt(N_psi)
        let got = out.normalized_amplitude(k);
        let expect = want.to_complex() / 3f64.sqrt();
        assert!((got - expect).norm() < 1e-12);
        // exact: a_out^2 * N_psi == want^2 * N_out
        let n_psi = BigInt::from(3);
        assert_eq!(
            out.amplitude(k).unwrap().mul(out.amplitude(k).unwrap()).mul_int(&n_psi),
            want.mul(&want).mul_int(out.scale())
        );
    }
}

#[test]
fn measurement_examples() {
    let l = layout(RegisterLayout::builder().digits("x", 5, 1).qubit("q"));
    let basis = SparseState::basis(l.clone(), exact(20), vec![3, 1]).unwrap();
    let (v, after) = basis.measure_register("x", &mut Sampler::seeded(7), None).unwrap();
    assert_eq!(v, vec![3]);
    assert_eq!(after, basis);

    let mut uni = SparseState::prepare_zero(l.clone(), exact(20));
    uni.apply_qft(0, false).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    let mut sampler = Sampler::seeded(11);
    for _ in 0..40 {
        let (v, after) = uni.measure_register("x", &mut sampler, None).unwrap();
        assert!(v[0] < 5);
        assert_eq!(after, SparseState::basis(l.clone(), exact(20), vec![v[0], 0]).unwrap());
        seen.insert(v[0]);
    }
    assert_eq!(seen.len(), 5);
    assert_eq!(sampler.log().len(), 40);

    let (v, _) = uni.measure_register("x", &mut Sampler::deterministic(), None).unwrap();
    assert_eq!(v, vec![0]);
    let odd = |v: &[u64]| v[0] % 2 == 1;
    let (v, _) = uni.measure_register("x", &mut Sampler::deterministic(), Some(&odd)).unwrap();
    assert_eq!(v, vec![1]);
    assert_eq!(uni.measure_register("x", &mut Sampler::strict(), Some(&odd)).unwrap_err(), Error::NotConfined);
    let (v, _) = basis.measure_register("x", &mut Sampler::strict(), Some(&odd)).unwrap();
    assert_eq!(v, vec![3]);

    let mut replay = Sampler::replay([vec![4]]);
    assert_eq!(uni.measure_register("x", &mut replay, None).unwrap().0, vec![4]);
}

#[test]
fn seeded_measurement_is_reproducible_and_unbiased_in_support() {
    let l = layout(RegisterLayout::builder().digits("x", 3, 1).qubit("b"));
    let mut s = SparseState::prepare_zero(l, exact(12));
    s.apply_qft(0, false).unwrap();
    s.apply_hadamard(1).unwrap();
    let run = |seed| {
        let mut sm = Sampler::seeded(seed);
        (0..20).map(|_| s.measure(&[0, 1], &mut sm, None).unwrap().0).collect::<Vec<_>>()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

#[test]
fn factor_split_examples() {
    let l = layout(RegisterLayout::builder().qubit("a").qubit("b"));
    let prod = SparseState::basis(l.clone(), exact(4), vec![1, 0]).unwrap();
    let (a, b) = prod.factor_split(&["a"]).unwrap();
    assert_eq!(a.amplitudes().keys().next().unwrap(), &vec![1]);
    assert_eq!(b.amplitudes().keys().next().unwrap(), &vec![0]);

    let mut bell = SparseState::prepare_zero(l.clone(), exact(4));
    bell.apply_hadamard(0).unwrap();
    bell.apply_classical_map(&xor_flag(1, |l| l[0]), false).unwrap();
    assert_eq!(bell.factor_split(&["a"]).unwrap_err(), Error::NotProduct);

    // |+> (x) (|0> + i|1>)/sqrt 2 splits with both factors normalized
    let mut s = SparseState::prepare_zero(l, exact(4));
    s.apply_hadamard(0).unwrap();
    s.apply_hadamard(1).unwrap();
    s.conditional_phase_i(&|l| l[1] == 1, 1);
    let (a, b) = s.factor_split(&["a"]).unwrap();
    assert!(a.is_normalized().unwrap() && b.is_normalized().unwrap());
    assert_eq!(a.scale(), &BigInt::from(2));
    assert!((b.normalized_amplitude(&[1]) - Complex64::new(0.0, 1.0) / 2f64.sqrt()).norm() < 1e-12);
}

#[test]
fn dump_format() {
    let l = layout(RegisterLayout::builder().qubit("a"));
    let mut s = SparseState::prepare_zero(l, exact(4));
    s.apply_hadamard(0).unwrap();
    assert_eq!(s.dump(), "N=2\n(0) [1,0]\n(1) [1,0]\n");
}

#[test]
fn support_limit_is_enforced() {
    let l = layout(RegisterLayout::builder().digits("x", 12, 6));
    let mut s = SparseState::prepare_zero(l, Float::new(12));
    let mut r = Ok(());
    for slot in 0..6 {
        r = s.apply_qft(slot, false);
        if r.is_err() {
            break;
        }
    }
    assert_eq!(r, Err(Error::StateTooLarge(MAX_SUPPORT)));
}

// ---- random circuits ----

#[derive(Clone, Debug)]
enum Op {
    Qft(usize, bool),
    Had,
    Phase(u64, u32),
    Add(usize, u64),
    CtrlAdd(usize),
    Flag(u64),
}

fn op_strategy() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0usize..2, any::<bool>()).prop_map(|(s, i)| Op::Qft(s, i)),
        Just(Op::Had),
        (0u64..6, 1u32..4).prop_map(|(v, q)| Op::Phase(v, q)),
        (0usize..2, 1u64..6).prop_map(|(s, c)| Op::Add(s, c)),
        (0usize..2).prop_map(Op::CtrlAdd),
        (0u64..6).prop_map(Op::Flag),
    ]
}

/// Layout `x: Z_m^2, b: qubit`.
fn build_circuit(m: u64, ops: &[Op]) -> Circuit {
    let mut c = Circuit::new();
    for op in ops {
        c = match *op {
            Op::Qft(s, inv) => {
                if inv {
                    c.qft_inverse(s)
                } else {
                    c.qft(s)
                }
            }
            Op::Had => c.hadamard(2),
            Op::Phase(v, q) => c.phase("p", Arc::new(move |l: &[u64]| (l[0] + l[1]) % m == v % m), q),
            Op::Add(s, k) => c.map(ClassicalMap::new(
                "add",
                Arc::new(move |l: &mut [u64]| l[s] = (l[s] + k) % m),
                Arc::new(move |l: &mut [u64]| l[s] = (l[s] + m - k % m) % m),
            )),
            Op::CtrlAdd(s) => {
                let o = 1 - s;
                c.map(ClassicalMap::new(
                    "cadd",
                    Arc::new(move |l: &mut [u64]| l[s] = (l[s] + l[o]) % m),
                    Arc::new(move |l: &mut [u64]| l[s] = (l[s] + m - l[o]) % m),
                ))
            }
            Op::Flag(v) => c.map(xor_flag(2, move |l| (l[0] == v % m) as u64)),
        };
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn circuits_preserve_normalization_and_invert(
        m in prop::sample::select(vec![2u64, 3, 4, 6]),
        prefix in prop::collection::vec(op_strategy(), 0..6),
        ops in prop::collection::vec(op_strategy(), 0..8),
    ) {
        let order = hspkit::cyclotomic::root_order_for(m);
        let l = layout(RegisterLayout::builder().digits("x", m, 2).qubit("b"));
        let mut counts = GateCounts::default();
        // random sparse start state
        let start = build_circuit(m, &prefix).run(SparseState::prepare_zero(l.clone(), exact(order)), &mut counts).unwrap();
        prop_assert!(start.is_normalized().unwrap());
        let c = build_circuit(m, &ops);
        let mut s = start.clone();
        for step in c.steps() {
            let mut one = Circuit::new();
            one.push(step.clone());
            one.apply(&mut s, &mut counts).unwrap();
            prop_assert!(s.is_normalized().unwrap());
        }
        c.inverse().apply(&mut s, &mut counts).unwrap();
        prop_assert_eq!(&s, &start);

        // float mirror
        let fstart = build_circuit(m, &prefix).run(SparseState::prepare_zero(l, Float::new(order)), &mut counts).unwrap();
        prop_assert!(fstart.max_deviation(&start) < 1e-9);
        let mut fs = fstart.clone();
        c.apply(&mut fs, &mut counts).unwrap();
        let mut es = start.clone();
        c.apply(&mut es, &mut counts).unwrap();
        prop_assert!(fs.max_deviation(&es) < 1e-9);
    }
}
