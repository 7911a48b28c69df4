mod common;

use std::collections::BTreeSet;

use common::*;
use hspkit::lattice::*;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;

fn mat(rows: &[Vec<i64>]) -> IntMatrix {
    IntMatrix::from_rows(rows).unwrap()
}

fn small(m: &IntMatrix) -> Vec<Vec<i64>> {
    m.to_rows().iter().map(|r| r.iter().map(|x| x.to_i64().unwrap()).collect()).collect()
}

fn nonzero_columns(m: &IntMatrix) -> Vec<Vec<i64>> {
    m.columns()
        .iter()
        .filter(|c| c.iter().any(|x| !x.is_zero()))
        .map(|c| c.iter().map(|x| x.to_i64().unwrap()).collect())
        .collect()
}

fn assert_hnf_shape(h: &IntMatrix, pivots: &[usize]) {
    for (j, &i) in pivots.iter().enumerate() {
        assert!(h[(i, j)].is_positive(), "pivot must be positive");
        for r in 0..i {
            assert!(h[(r, j)].is_zero(), "entries above a pivot must vanish");
        }
        for c in 0..j {
            assert!(!h[(i, c)].is_negative() && h[(i, c)] < h[(i, j)], "row {i} not reduced");
        }
    }
    for j in pivots.len()..h.cols() {
        assert!(h.column(j).iter().all(Zero::is_zero), "zero columns must be rightmost");
    }
}

#[test]
fn hnf_of_three_generators_is_diag_2_3() {
    let m = IntMatrix::from_columns(2, &[vec![2i64, 3], vec![6, 0], vec![0, 6]]).unwrap();
    let herm = hermite_normal_form(&m);
    assert_eq!(&m * &herm.u, herm.h);
    assert!(herm.u.is_unimodular());
    assert_eq!(nonzero_columns(&herm.h), vec![vec![2, 0], vec![0, 3]]);
    // oracle: both column spans agree on [0,12)^2
    let original = lattice_points_in_box(&[vec![2, 3], vec![6, 0], vec![0, 6]], 12, 12);
    let reduced = lattice_points_in_box(&[vec![2, 0], vec![0, 3]], 12, 12);
    assert_eq!(original, reduced);
}

#[test]
fn hnf_ignores_column_permutation() {
    let h0 = mat(&[vec![3, 0, 0], vec![1, 2, 0], vec![2, 1, 5]]);
    let cols = h0.columns();
    for perm in [[0, 1, 2], [2, 0, 1], [1, 2, 0], [2, 1, 0]] {
        let permuted: Vec<Vec<BigInt>> = perm.iter().map(|&j| cols[j].clone()).collect();
        let m = IntMatrix::from_columns(3, &permuted).unwrap();
        assert_eq!(hermite_normal_form(&m).h, h0);
    }
    let box_h0 = lattice_points_in_box(&small(&h0.transpose()), 8, 8);
    let box_perm = lattice_points_in_box(&[vec![0, 2, 1], vec![3, 3, 3], vec![0, 0, 5]], 8, 8);
    assert_eq!(box_h0, box_perm);
}

#[test]
fn snf_examples_match_minor_oracle() {
    let cases: Vec<(Vec<Vec<i64>>, Vec<i64>)> = vec![
        (vec![vec![4, 0], vec![0, 6]], vec![2, 12]),
        (vec![vec![1, 0], vec![7, 12]], vec![1, 12]),
        (vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]], vec![2, 6, 12]),
    ];
    for (rows, expected) in cases {
        assert_eq!(invariant_factors_by_minors(&rows), expected);
        let m = mat(&rows);
        let snf = smith_normal_form(&m);
        assert_eq!(&(&snf.l * &m) * &snf.r, snf.s);
        assert!(snf.l.is_unimodular() && snf.r.is_unimodular());
        let diag: Vec<i64> = snf.diagonal().iter().map(|d| d.to_i64().unwrap()).collect();
        assert_eq!(diag, expected);
    }
}

#[test]
fn subgroup_from_generators_examples() {
    let trivial = SubgroupRep::from_generators::<i64>(&[], 6, 2, 3).unwrap();
    assert_eq!(trivial.hnf(), &IntMatrix::scalar(3, &BigInt::from(36)));
    let full = SubgroupRep::from_generators(&[vec![1i64, 0], vec![0, 1]], 5, 1, 2).unwrap();
    assert_eq!(full.hnf(), &IntMatrix::identity(2));
    let a = SubgroupRep::from_generators(&[vec![2i64, 3]], 6, 1, 2).unwrap();
    assert_eq!(a.hnf(), &mat(&[vec![2, 0], vec![0, 3]]));
    let oracle = span_mod(&[vec![2, 3]], 6, 2);
    assert_eq!(oracle.len(), 6);
    let listed: BTreeSet<Elem> = a.elements().into_iter().collect();
    assert_eq!(listed, oracle);
    // idempotent
    let again = SubgroupRep::from_generators(&a.hnf().columns(), 6, 1, 2).unwrap();
    assert_eq!(again, a);
}

#[test]
fn from_hnf_rejects_broken_invariants() {
    assert!(SubgroupRep::from_hnf(6, 1, mat(&[vec![2, 1], vec![0, 3]])).is_err());
    assert!(SubgroupRep::from_hnf(6, 1, mat(&[vec![2, 0], vec![3, 3]])).is_err());
    assert!(SubgroupRep::from_hnf(6, 1, mat(&[vec![4, 0], vec![0, 3]])).is_err());
    assert!(SubgroupRep::from_hnf(6, 1, mat(&[vec![-2, 0], vec![0, 3]])).is_err());
    assert!(SubgroupRep::from_hnf(6, 1, mat(&[vec![2, 0], vec![0, 3]])).is_ok());
}

#[test]
fn perp_examples() {
    let trivial = SubgroupRep::trivial(6, 1, 2).unwrap();
    let full = SubgroupRep::full(6, 1, 2).unwrap();
    assert_eq!(trivial.perp().unwrap(), full);
    assert_eq!(full.perp().unwrap(), trivial);
    let a = SubgroupRep::from_generators(&[vec![2i64, 3]], 6, 1, 2).unwrap();
    let ap = a.perp().unwrap();
    assert_eq!(ap.order(), BigInt::from(6));
    let oracle = brute_perp(&span_mod(&[vec![2, 3]], 6, 2), 6, 2);
    let listed: BTreeSet<Elem> = ap.elements().into_iter().collect();
    assert_eq!(listed, oracle);
    assert!(matches!(SubgroupRep::trivial(2, 2, 1).unwrap().perp(), Err(hspkit::Error::PerpRequiresPrimeLevel(2))));
}

#[test]
fn order_and_membership_examples() {
    assert_eq!(SubgroupRep::trivial(6, 1, 2).unwrap().order(), BigInt::from(1));
    assert_eq!(SubgroupRep::full(3, 2, 2).unwrap().order(), BigInt::from(81));
    let a = SubgroupRep::from_hnf(6, 1, mat(&[vec![2, 0], vec![0, 3]])).unwrap();
    assert_eq!(a.order(), BigInt::from(6));
    assert!(a.contains_u64(&[0, 0]));
    assert!(a.contains_u64(&[4, 0]));
    assert!(!a.contains_u64(&[1, 0]));
    assert!(!SubgroupRep::trivial(6, 1, 2).unwrap().contains_u64(&[1, 0]));
    assert!(a.contains(&[BigInt::from(-2), BigInt::from(9)]).unwrap());
}

#[test]
fn equal_or_witness_examples() {
    let a = SubgroupRep::from_generators(&[vec![2i64, 3]], 6, 1, 2).unwrap();
    assert_eq!(a.equal_or_witness(&a).unwrap(), Comparison::Equal);

    let t = SubgroupRep::trivial(2, 1, 1).unwrap();
    let f = SubgroupRep::full(2, 1, 1).unwrap();
    assert_eq!(t.equal_or_witness(&f).unwrap(), Comparison::Witness(vec![BigInt::from(1)]));

    let b = SubgroupRep::from_generators(&[vec![2i64, 3], vec![0, 1]], 6, 1, 2).unwrap();
    match a.equal_or_witness(&b).unwrap() {
        Comparison::Witness(w) => {
            assert_eq!(b.hnf()[(1, 1)], BigInt::from(1));
            let w = to_u64_vec(&w);
            assert!(span_mod(&[vec![2, 3], vec![0, 1]], 6, 2).contains(&w));
            assert!(!span_mod(&[vec![2, 3]], 6, 2).contains(&w));
        }
        Comparison::Equal => panic!("strict inclusion must yield a witness"),
    }
    assert!(b.equal_or_witness(&a).is_err());
}

#[test]
fn lift_by_m_examples() {
    let t = SubgroupRep::trivial(3, 2, 2).unwrap();
    let lift = t.lift_by_m();
    assert_eq!(lift.lifted().hnf(), &IntMatrix::scalar(2, &BigInt::from(3)));

    let f = SubgroupRep::full(3, 2, 2).unwrap();
    assert!(f.lift_by_m().is_trivial());

    let h0 = SubgroupRep::from_generators(&[vec![2i64]], 2, 2, 1).unwrap();
    let lift = h0.lift_by_m();
    assert_eq!(lift.lifted(), &SubgroupRep::full(2, 2, 1).unwrap());
    // oracle: {x in Z_4 : 2x in <2>} = Z_4
    let h0_set = span_mod(&[vec![2]], 4, 1);
    let k0: BTreeSet<Elem> = all_elements(4, 1).into_iter().filter(|x| h0_set.contains(&vec![2 * x[0] % 4])).collect();
    assert_eq!(k0.len(), 4);
}

#[test]
fn lift_matches_brute_force_on_small_groups() {
    for (m, k, n) in [(2u64, 2u32, 2usize), (3, 2, 1), (6, 2, 1), (2, 3, 1)] {
        let q = m.pow(k);
        for h in all_subgroups(q, n) {
            let gens: Vec<Elem> = h.iter().cloned().collect();
            let rep = SubgroupRep::from_generators(&gens, m, k, n).unwrap();
            let lift = rep.lift_by_m();
            let expected: BTreeSet<Elem> = all_elements(q, n)
                .into_iter()
                .filter(|x| h.contains(&x.iter().map(|v| v * m % q).collect::<Vec<_>>()))
                .collect();
            let got: BTreeSet<Elem> = lift.lifted().elements().into_iter().collect();
            assert_eq!(got, expected, "K0 for m={m} k={k} n={n}");
            for col in lift.lifted().hnf().columns() {
                let scaled: Vec<BigInt> = col.iter().map(|x| x * m).collect();
                assert!(rep.contains(&scaled).unwrap());
            }
        }
    }
}

/// `x -> phi0(x) + H0` must be a surjective homomorphism `Z_m^n -> K0/H0`.
fn check_phi0(rep: &SubgroupRep) {
    let m = rep.m();
    let n = rep.n();
    let q = rep.modulus().to_u64().unwrap();
    let lift = rep.lift_by_m();
    let coset = |x: &[BigInt]| rep.coset_representative(&x.iter().map(|v| v % BigInt::from(q)).collect::<Vec<_>>());
    let mut images = BTreeSet::new();
    for x in all_elements(m, n) {
        let px = lift.phi0(&x);
        assert!(lift.lifted().contains(&px).unwrap());
        images.insert(coset(&px));
        for y in all_elements(m, n) {
            let s: Vec<u64> = x.iter().zip(&y).map(|(a, b)| (a + b) % m).collect();
            let lhs = coset(&lift.phi0(&s));
            let py = lift.phi0(&y);
            let sum: Vec<BigInt> = px.iter().zip(&py).map(|(a, b)| a + b).collect();
            assert_eq!(lhs, coset(&sum), "phi0 not additive modulo H0");
        }
    }
    let index = lift.lifted().order() / rep.order();
    assert_eq!(BigInt::from(images.len()), index, "phi0 must hit every coset of H0 in K0");
}

#[test]
fn phi0_examples() {
    check_phi0(&SubgroupRep::full(2, 2, 1).unwrap());
    check_phi0(&SubgroupRep::from_generators(&[vec![2i64]], 2, 2, 1).unwrap());
    let t = SubgroupRep::trivial(3, 2, 1).unwrap();
    check_phi0(&t);
    // injective: Z_3 -> <3> / {0}
    let lift = t.lift_by_m();
    let imgs: BTreeSet<Vec<BigInt>> = (0..3u64).map(|x| lift.phi0(&[x])).collect();
    assert_eq!(imgs.len(), 3);
    for q in [2u64, 3] {
        for h in all_subgroups(q * q, 2) {
            let gens: Vec<Elem> = h.iter().cloned().collect();
            check_phi0(&SubgroupRep::from_generators(&gens, q, 2, 2).unwrap());
        }
    }
}

/// Order of the quotient `Z^n / L` and whether it is cyclic, by enumerating
/// residues modulo a multiple `q` of the exponent.
fn quotient_shape(cols: &[Elem], q: u64, n: usize) -> (usize, usize) {
    let sub = span_mod(cols, q, n);
    let index = q.pow(n as u32) as usize / sub.len();
    // max element order in the quotient
    let mut max_order = 1;
    for x in all_elements(q, n) {
        let mut k = 1;
        let mut y = x.clone();
        while !sub.contains(&y) {
            y = y.iter().zip(&x).map(|(a, b)| (a + b) % q).collect();
            k += 1;
        }
        max_order = max_order.max(k);
    }
    (index, max_order)
}

#[test]
fn invariant_factor_examples() {
    let free = invariant_factor_decomposition(&IntMatrix::scalar(3, &BigInt::from(5))).unwrap();
    assert_eq!(free.factor_values(), vec![BigInt::from(5); 3]);

    let d23 = invariant_factor_decomposition(&mat(&[vec![2, 0], vec![0, 3]])).unwrap();
    assert_eq!(d23.factor_values(), vec![BigInt::from(6)]);
    assert_eq!(quotient_shape(&[vec![2, 0], vec![0, 3]], 6, 2), (6, 6));

    let dlog = invariant_factor_decomposition(&mat(&[vec![1, 0], vec![7, 12]])).unwrap();
    assert_eq!(dlog.factor_values(), vec![BigInt::from(12)]);
    assert_eq!(quotient_shape(&[vec![1, 7], vec![0, 12]], 12, 2), (12, 12));

    assert!(matches!(
        invariant_factor_decomposition(&mat(&[vec![2, 0], vec![0, 0]])),
        Err(hspkit::Error::InfiniteQuotient)
    ));
}

#[test]
fn decomposition_generators_are_independent() {
    // relation lattice of Z_2 + Z_4 + Z_12 presented by a scrambled basis
    let rel = mat(&[vec![2, 0, 0], vec![0, 4, 0], vec![0, 0, 12]]);
    let scramble = mat(&[vec![1, 2, 0], vec![0, 1, 3], vec![1, 2, 1]]);
    let u = unimodular_inverse(&scramble).unwrap();
    let presented = &u * &rel;
    let dec = invariant_factor_decomposition(&presented).unwrap();
    assert_eq!(dec.factor_values(), vec![BigInt::from(2), BigInt::from(4), BigInt::from(12)]);
    let q = 24u64;
    let rel_cols: Vec<Elem> =
        presented.columns().iter().map(|c| c.iter().map(|x| x.mod_floor_u64(q)).collect()).collect();
    let sub = span_mod(&rel_cols, q, 3);
    let gens: Vec<Elem> = dec.generators().iter().map(|g| g.iter().map(|x| x.mod_floor_u64(q)).collect()).collect();
    let factors: Vec<u64> = dec.factor_values().iter().map(|f| f.to_u64().unwrap()).collect();
    // z_i^{m_i} in L, and sum beta_i z_i in L with 0 <= beta_i < m_i forces beta = 0
    for (g, &f) in gens.iter().zip(&factors) {
        let p: Elem = g.iter().map(|x| x * f % q).collect();
        assert!(sub.contains(&p));
    }
    let mut hits = 0;
    for b0 in 0..factors[0] {
        for b1 in 0..factors[1] {
            for b2 in 0..factors[2] {
                let v: Elem = (0..3).map(|i| (b0 * gens[0][i] + b1 * gens[1][i] + b2 * gens[2][i]) % q).collect();
                if sub.contains(&v) {
                    hits += 1;
                    assert_eq!((b0, b1, b2), (0, 0, 0));
                }
            }
        }
    }
    assert_eq!(hits, 1);
    assert_eq!(dec.reversed().factor_values(), vec![BigInt::from(12), BigInt::from(4), BigInt::from(2)]);
}

trait ModU64 {
    fn mod_floor_u64(&self, q: u64) -> u64;
}

impl ModU64 for BigInt {
    fn mod_floor_u64(&self, q: u64) -> u64 {
        use num_integer::Integer;
        self.mod_floor(&BigInt::from(q)).to_u64().unwrap()
    }
}

#[test]
fn perp_involution_and_orders_exhaustive() {
    for (m, n) in [(6u64, 2usize), (4, 2), (2, 3), (12, 1), (9, 2)] {
        for h in all_subgroups(m, n) {
            let gens: Vec<Elem> = h.iter().cloned().collect();
            let a = SubgroupRep::from_generators(&gens, m, 1, n).unwrap();
            assert_eq!(a.order(), BigInt::from(h.len()));
            let ap = a.perp().unwrap();
            let listed: BTreeSet<Elem> = ap.elements().into_iter().collect();
            assert_eq!(listed, brute_perp(&h, m, n));
            assert_eq!(ap.perp().unwrap(), a);
            assert_eq!(a.order() * ap.order(), BigInt::from(m.pow(n as u32)));
        }
    }
}

fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..5, 1usize..6)
        .prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(-60i64..60, c), r))
}

fn unimodular_strategy(n: usize) -> impl Strategy<Value = IntMatrix> {
    proptest::collection::vec((0..n, 0..n, -3i64..4), 0..12).prop_map(move |ops| {
        let mut u = IntMatrix::identity(n);
        for (a, b, q) in ops {
            if a != b {
                // column operation col_a += q col_b
                let e = {
                    let mut e = IntMatrix::identity(n);
                    e[(b, a)] = BigInt::from(q);
                    e
                };
                u = &u * &e;
            }
        }
        u
    })
}

proptest! {
    #[test]
    fn hnf_reconstruction_and_shape(rows in matrix_strategy()) {
        let m = mat(&rows);
        let herm = hermite_normal_form(&m);
        prop_assert_eq!(&m * &herm.u, herm.h.clone());
        prop_assert!(herm.u.is_unimodular());
        assert_hnf_shape(&herm.h, &herm.pivot_rows);
    }

    #[test]
    fn snf_reconstruction_and_divisibility(rows in matrix_strategy()) {
        let m = mat(&rows);
        let snf = smith_normal_form(&m);
        prop_assert_eq!(&(&snf.l * &m) * &snf.r, snf.s.clone());
        prop_assert!(snf.l.is_unimodular() && snf.r.is_unimodular());
        prop_assert_eq!(&snf.l * &snf.l_inv, IntMatrix::identity(m.rows()));
        for i in 0..snf.s.rows() {
            for j in 0..snf.s.cols() {
                if i != j { prop_assert!(snf.s[(i, j)].is_zero()); }
            }
        }
        let diag = snf.diagonal();
        for w in diag.windows(2) {
            prop_assert!(!w[0].is_negative());
            if w[0].is_zero() { prop_assert!(w[1].is_zero()); }
            else { prop_assert!((&w[1] % &w[0]).is_zero()); }
        }
        let small_diag: Vec<i64> = diag.iter().map(|d| d.to_i64().unwrap()).take_while(|d| *d != 0).collect();
        prop_assert_eq!(small_diag, invariant_factors_by_minors(&rows));
    }

    #[test]
    fn hnf_invariant_under_unimodular_right_factor(
        (rows, v) in (1usize..4, 1usize..5).prop_flat_map(|(r, c)| (
            proptest::collection::vec(proptest::collection::vec(-40i64..40, c), r),
            unimodular_strategy(c),
        ))
    ) {
        let m = mat(&rows);
        prop_assert_eq!(hermite_normal_form(&(&m * &v)).h, hermite_normal_form(&m).h);
    }
}
