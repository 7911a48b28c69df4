mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{cyclic_sum_orders, BruteGroup};
use hspkit::cyclotomic::root_order_for;
use hspkit::groups::*;
use hspkit::state::{Circuit, ClassicalMap, Exact, MeasureMode, RegisterLayout, Sampler, SparseState};
use num_traits::ToPrimitive;

fn brute(g: &Group) -> BruteGroup<'_> {
    BruteGroup { mul: Box::new(move |a, b| g.mul(a, b)), identity: g.identity() }
}

fn uniform_over(g: &Group, m: u64, elems: &BTreeSet<u64>) -> SparseState<Exact> {
    let layout = Arc::new(RegisterLayout::builder().bits("g", g.bits()).build().unwrap());
    SparseState::uniform(layout, Exact::new(root_order_for(m)), elems.iter().map(|&e| vec![e])).unwrap()
}

/// Exactly `1/sqrt(|S|)` on every element of `S` and nothing else.
fn assert_uniform(state: &SparseState<Exact>, elems: &BTreeSet<u64>) {
    let support: BTreeSet<u64> = state.amplitudes().keys().map(|l| l[0]).collect();
    assert_eq!(&support, elems);
    let first = state.amplitudes().values().next().unwrap();
    assert!(state.amplitudes().values().all(|a| a == first));
    let a = first.as_integer().expect("integral amplitude");
    assert_eq!(a.clone() * a * num_bigint::BigInt::from(elems.len()), state.scale().clone());
    assert!(state.is_normalized().unwrap());
}

fn series_of(z: &zoo::ZooGroup) -> (Session, PolycyclicSeries) {
    let mut s = Session::new(z.group.clone(), z.m);
    let gens = z.group.generators().to_vec();
    let series = build_polycyclic_series(&mut s, &gens).unwrap().series().unwrap();
    (s, series)
}

fn zoo_by_name(name: &str) -> zoo::ZooGroup {
    zoo::solvable().into_iter().find(|z| z.name == name).unwrap()
}

#[test]
fn arithmetic_examples() {
    let z15: Group = Arc::new(UnitsGroup::new(15, &[2, 14]).unwrap());
    assert_eq!(order_divides_power(z15.as_ref(), 1, 2), Ok(0));
    assert_eq!(order_divides_power(z15.as_ref(), 2, 2), Ok(2));
    let s3 = zoo_by_name("S3").group;
    let c = s3.generators()[0];
    assert_eq!(order_divides_power(s3.as_ref(), c, 2), Err(NotDividing { element: c }));
    // against the brute-force order on every element of the zoo
    for z in zoo::solvable() {
        let b = brute(&z.group);
        for x in b.span(z.group.generators()) {
            let o = b.order(x);
            let k = order_divides_power(z.group.as_ref(), x, z.m).unwrap();
            assert_eq!(z.m.pow(k) % o, 0, "{} {x}", z.name);
            assert!(k == 0 || z.m.pow(k - 1) % o != 0);
            assert_eq!(identity_from(z.group.as_ref(), x, z.m), Ok(z.group.identity()));
            assert_eq!(z.group.mul(x, inverse(z.group.as_ref(), x, z.m).unwrap()), z.group.identity());
        }
    }
}

fn bits_prep(width: u32, set: u64, quarter_turns: u32) -> Prep {
    let layout = Arc::new(RegisterLayout::builder().bits("g", width).qubit("q").build().unwrap());
    let mut c = Circuit::new().hadamard(1);
    c = c.map(ClassicalMap::involution("set", Arc::new(move |l: &mut [u64]| l[0] ^= set)));
    if quarter_turns > 0 {
        c = c.phase("i", Arc::new(|_: &[u64]| true), quarter_turns);
    }
    Prep { layout, circuit: c, out: 0, root_order: 4 }
}

#[test]
fn swap_test_examples() {
    let g: Group = Arc::new(UnitsGroup::new(15, &[2]).unwrap());
    for mode in [MeasureMode::Deterministic, MeasureMode::Seeded(1), MeasureMode::Seeded(99)] {
        let mut s = Session::new(g.clone(), 2).with_mode(mode);
        let (a, b, phased) = (bits_prep(3, 0, 0), bits_prep(3, 1, 0), bits_prep(3, 0, 1));
        assert!(s.swap_test(&a, &a).unwrap());
        assert!(!s.swap_test(&a, &b).unwrap());
        assert!(s.swap_test(&a, &phased).unwrap());
        assert!(s.swap_test(&phased, &phased).unwrap());
        assert_eq!(s.stats.swap_tests, 4);
    }
}

#[test]
fn swap_test_rejects_partial_overlap() {
    let g: Group = Arc::new(UnitsGroup::new(15, &[2]).unwrap());
    let mut s = Session::new(g, 2).with_promise_checks(true);
    // |0>|+> against |0>|0>: overlap 1/sqrt 2
    let layout = Arc::new(RegisterLayout::builder().bits("g", 2).qubit("q").build().unwrap());
    let plus = Prep { layout: layout.clone(), circuit: Circuit::new().hadamard(1), out: 0, root_order: 4 };
    let zero = Prep { layout, circuit: Circuit::new(), out: 0, root_order: 4 };
    assert!(s.swap_test(&plus, &zero).is_err());
}

#[test]
fn membership_in_s3() {
    let z = zoo_by_name("S3");
    let g = z.group.clone();
    let (c, t) = (g.generators()[0], g.generators()[1]);
    let a3 = Prep::loader(&g, &[c], &[3]).unwrap();
    let mut s = Session::new(g.clone(), 6);
    assert!(s.is_member(g.identity(), &a3).unwrap());
    assert!(s.is_member(c, &a3).unwrap());
    assert!(!s.is_member(t, &a3).unwrap());
}

#[test]
fn membership_matches_enumeration_on_series_levels() {
    for name in ["S3", "D4", "Q8", "A4"] {
        let z = zoo_by_name(name);
        let b = brute(&z.group);
        let all = b.span(z.group.generators());
        let (mut s, series) = series_of(&z);
        for level in 0..=series.len() {
            let members = b.span(&series.elements[..level]);
            for &u in &all {
                assert_eq!(
                    s.is_member(u, series.prep_at(level)).unwrap(),
                    members.contains(&u),
                    "{name} level {level} u {u}"
                );
            }
        }
    }
}

#[test]
fn membership_is_seed_independent() {
    let z = zoo_by_name("D4");
    let b = brute(&z.group);
    let all = b.span(z.group.generators());
    let rot = Prep::loader(&z.group, &[z.group.generators()[0]], &[4]).unwrap();
    let answers = |mode| {
        let mut s = Session::new(z.group.clone(), 2).with_mode(mode);
        all.iter().map(|&u| s.is_member(u, &rot).unwrap()).collect::<Vec<_>>()
    };
    let base = answers(MeasureMode::Deterministic);
    for seed in 0..4 {
        assert_eq!(answers(MeasureMode::Seeded(seed)), base);
    }
    assert_eq!(base.iter().filter(|&&x| x).count(), 4);
}

#[test]
fn presentation_examples() {
    let z6: Group = Arc::new(TableGroup::abelian(&[6]).unwrap());
    let trivial = Prep::basis(&z6, z6.identity()).unwrap();
    let mut s = Session::new(z6.clone(), 6);
    let p = s.presentation(&[1], &trivial).unwrap();
    assert_eq!(p.relation_vectors(), vec![vec![6]]);
    assert_eq!(p.decomposition.factor_values(), vec![6.into()]);
    assert!(p.verify(&mut s, &trivial).unwrap());

    // discrete logarithm: u1 = g^5, u2 = g in Z_12
    let z12: Group = Arc::new(TableGroup::abelian(&[12]).unwrap());
    let trivial = Prep::basis(&z12, z12.identity()).unwrap();
    let mut s = Session::new(z12.clone(), 12);
    let p = s.presentation(&[5, 1], &trivial).unwrap();
    let rows: Vec<Vec<i64>> = p.relations.iter().map(|r| r.iter().map(|v| v.0.to_i64().unwrap()).collect()).collect();
    assert_eq!(rows, vec![vec![1, 0], vec![7, 12]]);
    let dlog = (0..12).find(|&d| power(z12.as_ref(), 1, d) == 5).unwrap();
    assert_eq!(rows[1][0], 12 - dlog as i64);
    // brute force: (a, b) is a relation iff 5a + b = 0 (mod 12)
    for rel in p.relation_vectors() {
        assert_eq!((5 * rel[0] + rel[1]) % 12, 0);
    }

    let z15: Group = Arc::new(UnitsGroup::new(15, &[2, 14]).unwrap());
    let trivial = Prep::basis(&z15, 1).unwrap();
    let mut s = Session::new(z15.clone(), 2);
    let p = s.presentation(&[2, 14], &trivial).unwrap();
    assert_eq!(p.k, 2);
    assert_eq!(p.decomposition.factor_values(), vec![2.into(), 4.into()]);
    assert!(p.verify(&mut s, &trivial).unwrap());
}

#[test]
fn presentation_relations_match_brute_force() {
    // relations of (u1, u2) in Z15* are exactly the exponent pairs with
    // u1^a u2^b = 1
    let g: Group = Arc::new(UnitsGroup::new(15, &[2, 14]).unwrap());
    let trivial = Prep::basis(&g, 1).unwrap();
    for gens in [[2u64, 14], [4, 7], [2, 8], [11, 14]] {
        let mut s = Session::new(g.clone(), 2);
        let p = s.presentation(&gens, &trivial).unwrap();
        let q = 2u64.pow(p.k);
        for a in 0..q {
            for b in 0..q {
                let val = g.mul(power(g.as_ref(), gens[0], a), power(g.as_ref(), gens[1], b));
                assert_eq!(p.subgroup.contains_u64(&[a, b]), val == 1, "{gens:?} ({a},{b})");
            }
        }
    }
}

#[test]
fn extension_examples() {
    // N trivial, u of order m
    let z6: Group = Arc::new(TableGroup::abelian(&[6]).unwrap());
    let mut s = Session::new(z6.clone(), 6);
    let b = brute(&z6);
    let one = uniform_over(&z6, 6, &BTreeSet::from([0]));
    for u in 0..6u64 {
        for seed in 0..3 {
            let mut sampler = Sampler::seeded(seed);
            let ext = extend_superposition(&mut s, &vec![one.clone(); 3], u, &mut sampler).unwrap();
            assert_eq!(ext.outputs.len(), 2);
            for out in &ext.outputs {
                assert_uniform(out, &b.span(&[u]));
            }
        }
    }
    // u in N leaves N unchanged
    let d4 = zoo_by_name("D4");
    let g = d4.group.clone();
    let b = brute(&g);
    let rot = g.generators()[0];
    let center = b.span(&[g.mul(rot, rot)]);
    let mut s = Session::new(g.clone(), 2);
    let n = uniform_over(&g, 2, &center);
    let ext =
        extend_superposition(&mut s, &[n.clone(), n.clone()], g.mul(rot, rot), &mut Sampler::deterministic()).unwrap();
    assert!(ext.outputs[0].same_state(&n));
    // D4: center extended by the rotation gives the rotation subgroup
    for seed in 0..5 {
        let ext =
            extend_superposition(&mut s, &[n.clone(), n.clone(), n.clone()], rot, &mut Sampler::seeded(seed)).unwrap();
        for out in &ext.outputs {
            assert_uniform(out, &b.span(&[rot]));
        }
    }
}

#[test]
fn hybrid_and_coherent_steps_agree() {
    let mut cases: Vec<(Group, u64, Vec<u64>, u64)> = Vec::new();
    let z6: Group = Arc::new(TableGroup::abelian(&[6]).unwrap());
    cases.push((z6.clone(), 6, vec![], 1));
    cases.push((z6.clone(), 6, vec![3], 2));
    cases.push((z6, 6, vec![2], 3));
    for name in ["D4", "Q8", "S3"] {
        let z = zoo_by_name(name);
        let gens = z.group.generators().to_vec();
        for (n_gens, u) in [(vec![], gens[0]), (vec![], gens[1]), (vec![gens[0]], gens[1]), (vec![gens[1]], gens[0])] {
            cases.push((z.group.clone(), z.m, n_gens, u));
        }
    }
    let mut checked = 0;
    for (g, m, n_gens, u) in cases {
        let b = brute(&g);
        let n = b.span(&n_gens);
        let k = b.span(&[n_gens.clone(), vec![u]].concat());
        // preconditions: u normalizes N and u^m lies in N
        if k.len() > 8 || !b.is_normal(&n, &k) || !n.contains(&power(g.as_ref(), u, m)) {
            continue;
        }
        checked += 1;
        let n_state = uniform_over(&g, m, &n);
        for s_copies in 2..=3 {
            let copies = vec![n_state.clone(); s_copies];
            let mut s = Session::new(g.clone(), m);
            let coherent = extend_superposition_coherent(&mut s, &copies, u).unwrap();
            assert_eq!(coherent.len(), s_copies - 1);
            for seed in 0..4 {
                let hybrid = extend_superposition(&mut s, &copies, u, &mut Sampler::seeded(seed)).unwrap();
                for (h, c) in hybrid.outputs.iter().zip(&coherent) {
                    assert!(h.same_state(c));
                    assert_uniform(c, &k);
                }
            }
        }
    }
    assert!(checked >= 8, "only {checked} cases met the preconditions");
}

#[test]
fn pyramid_examples() {
    // trivial group
    let triv: Group = Arc::new(UnitsGroup::new(7, &[]).unwrap());
    let mut s = Session::new(triv.clone(), 2);
    let p = build_group_superposition(&mut s, &[], &mut Sampler::deterministic()).unwrap();
    assert_uniform(&p.state, &BTreeSet::from([1]));

    // Z4 with series <2> < Z4, m = 2: amplitudes exactly 1/2
    let z4: Group = Arc::new(TableGroup::abelian(&[4]).unwrap());
    let mut s = Session::new(z4.clone(), 2);
    let p = build_group_superposition(&mut s, &[2, 1], &mut Sampler::seeded(5)).unwrap();
    assert_uniform(&p.state, &(0..4).collect());
    assert_eq!(p.state.scale().clone(), p.state.amplitudes().values().next().unwrap().as_integer().unwrap().pow(2) * 4);

    // S3 with A3 < S3
    let z = zoo_by_name("S3");
    let mut s = Session::new(z.group.clone(), 6);
    let gens = z.group.generators().to_vec();
    let p = build_group_superposition(&mut s, &gens, &mut Sampler::deterministic()).unwrap();
    assert_uniform(&p.state, &brute(&z.group).span(&gens));
    assert_eq!(p.tiers.len(), 3);
}

#[test]
fn pyramid_is_exact_on_the_zoo() {
    for z in zoo::solvable() {
        let b = brute(&z.group);
        let (mut s, series) = series_of(&z);
        for mode in [Sampler::deterministic(), Sampler::seeded(11)] {
            let mut sampler = mode;
            let p = build_group_superposition(&mut s, &series.elements, &mut sampler).unwrap();
            for (i, tier) in p.tiers.iter().enumerate() {
                assert_uniform(tier, &b.span(&series.elements[..i]));
            }
            assert_uniform(&p.state, &b.span(z.group.generators()));
        }
        // the loader used for membership prepares the same states
        for level in 0..=series.len() {
            let st = series.prep_at(level).run().unwrap();
            let (g_part, rest) = if st.layout().width() > 1 {
                st.factor_split(&["g"]).map(|(a, b)| (a, Some(b))).unwrap()
            } else {
                (st, None)
            };
            if let Some(r) = rest {
                assert_eq!(r.support_len(), 1);
                assert!(r.amplitudes().keys().next().unwrap().iter().all(|&v| v == 0));
            }
            assert_uniform(&g_part, &b.span(&series.elements[..level]));
        }
    }
}

#[test]
fn series_invariants_on_the_zoo() {
    for z in zoo::solvable() {
        let b = brute(&z.group);
        let all = b.span(z.group.generators());
        let (_, series) = series_of(&z);
        assert_eq!(group_order(&series), all.len() as u128, "{}", z.name);
        let mut prev = BTreeSet::from([z.group.identity()]);
        for i in 0..series.len() {
            let cur = b.span(&series.elements[..=i]);
            assert!(b.is_normal(&prev, &cur), "{} level {i}", z.name);
            assert_eq!(cur.len() as u64, prev.len() as u64 * series.orders[i]);
            assert_eq!(z.m % series.orders[i], 0);
            let gm = power(z.group.as_ref(), series.elements[i], z.m);
            assert!(prev.contains(&gm));
            prev = cur;
        }
        assert_eq!(prev, all);
    }
}

#[test]
fn series_examples() {
    let (_, s) = series_of(&zoo_by_name("Z15*"));
    assert_eq!(s.orders, vec![2, 2, 2]);
    let (_, s) = series_of(&zoo_by_name("S3"));
    assert_eq!(s.orders, vec![3, 2]);
    let a5 = zoo::a5();
    let mut s = Session::new(a5.group.clone(), a5.m);
    match build_polycyclic_series(&mut s, a5.group.generators()).unwrap() {
        SeriesOutcome::NotSolvable { replacements } => assert!(replacements > a5.group.bits() as usize),
        _ => panic!("A5 must be reported as not solvable"),
    }
    let c7 = zoo::seven_cycle();
    let mut s = Session::new(c7.group.clone(), c7.m);
    match build_polycyclic_series(&mut s, c7.group.generators()).unwrap() {
        SeriesOutcome::BadOrder { element } => assert_eq!(element, c7.group.generators()[0]),
        _ => panic!("a 7-cycle with m = 2 has bad order"),
    }
    // S3 generated by two transpositions with m = 2: the commutator is a 3-cycle
    let s3t: Group = Arc::new(PermutationGroup::new(3, &[vec![1, 0, 2], vec![0, 2, 1]]).unwrap());
    let mut s = Session::new(s3t.clone(), 2);
    assert!(matches!(build_polycyclic_series(&mut s, s3t.generators()).unwrap(), SeriesOutcome::BadOrder { .. }));
}

#[test]
fn derived_series_on_the_zoo() {
    for z in zoo::solvable() {
        let b = brute(&z.group);
        let mut s = Session::new(z.group.clone(), z.m);
        let terms = derived_series(&mut s, z.group.generators()).unwrap();
        let mut expected = vec![b.span(z.group.generators())];
        while expected.last().unwrap().len() > 1 {
            let next = b.derived(expected.last().unwrap());
            expected.push(next);
        }
        let got: Vec<BTreeSet<u64>> = terms.iter().map(|t| b.span(&t.generators)).collect();
        assert_eq!(got, expected, "{}", z.name);
        for t in &terms {
            assert_eq!(group_order(&t.series), b.span(&t.generators).len() as u128);
        }
    }
}

#[test]
fn derived_series_examples() {
    let z = zoo_by_name("A4");
    let b = brute(&z.group);
    let mut s = Session::new(z.group.clone(), z.m);
    let sizes: Vec<usize> =
        derived_series(&mut s, z.group.generators()).unwrap().iter().map(|t| b.span(&t.generators).len()).collect();
    assert_eq!(sizes, vec![12, 4, 1]);
    let z = zoo_by_name("Z15*");
    let mut s = Session::new(z.group.clone(), z.m);
    assert_eq!(derived_series(&mut s, z.group.generators()).unwrap().len(), 2);
}

#[test]
fn abelian_quotients_on_the_zoo() {
    for z in zoo::solvable() {
        let b = brute(&z.group);
        let all = b.span(z.group.generators());
        let mut s = Session::new(z.group.clone(), z.m);
        let derived = derived_series(&mut s, z.group.generators()).unwrap();
        let n_gens = derived[1].generators.clone();
        let dec = abelian_factor_decomposition(&mut s, &n_gens).unwrap();
        let factors: Vec<u64> = dec.factor_values().iter().map(|f| f.to_u64().unwrap()).collect();
        assert!(factors.windows(2).all(|w| w[1] % w[0] == 0));
        let n = b.span(&n_gens);
        assert_eq!(cyclic_sum_orders(&factors), b.quotient_orders(&all, &n), "{}", z.name);
    }
}

#[test]
fn decomposition_examples() {
    let z = zoo_by_name("D4");
    let mut s = Session::new(z.group.clone(), 2);
    let rot = z.group.generators()[0];
    assert_eq!(abelian_factor_decomposition(&mut s, &[rot]).unwrap().factor_values(), vec![2.into()]);
    let all = z.group.generators().to_vec();
    assert!(abelian_factor_decomposition(&mut s, &all).unwrap().factors.is_empty());
    let z = zoo_by_name("Z6xZ4");
    let mut s = Session::new(z.group.clone(), 12);
    assert_eq!(abelian_factor_decomposition(&mut s, &[]).unwrap().factor_values(), vec![2.into(), 12.into()]);
}

#[test]
fn group_files() {
    for z in zoo::solvable() {
        let text = serde_json::to_string(&GroupFile { spec: z.spec.clone(), m: z.m }).unwrap();
        let f = GroupFile::from_json(&text).unwrap();
        let g = f.spec.build().unwrap();
        assert_eq!(g.generators(), z.group.generators());
    }
    assert!(GroupFile::from_json(r#"{"kind":"permutation","degree":3,"generators":[[0,0,1]],"m":2}"#)
        .and_then(|f| f.spec.build())
        .is_err());
    assert!(GroupFile::from_json(r#"{"kind":"nope","m":2}"#).is_err());
}
