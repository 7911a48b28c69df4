//! Small groups used by the self test and the test suites.

use std::sync::Arc;

use super::backend::{Group, GroupBackend, GroupSpec, PermutationGroup, TableGroup, UnitsGroup};

pub struct ZooGroup {
    pub name: &'static str,
    pub group: Group,
    pub m: u64,
    pub spec: GroupSpec,
}

fn perm(name: &'static str, degree: usize, gens: Vec<Vec<usize>>, m: u64) -> ZooGroup {
    let group = Arc::new(PermutationGroup::new(degree, &gens).expect("valid permutations"));
    ZooGroup { name, group, m, spec: GroupSpec::Permutation { degree, generators: gens } }
}

fn table(name: &'static str, t: TableGroup, m: u64) -> ZooGroup {
    let spec =
        GroupSpec::Table { size: t.size(), table: t.table().to_vec(), generators: Some(t.generators().to_vec()) };
    ZooGroup { name, group: Arc::new(t), m, spec }
}

fn units(name: &'static str, modulus: u64, gens: Vec<u64>, m: u64) -> ZooGroup {
    let group = Arc::new(UnitsGroup::new(modulus, &gens).expect("valid units"));
    ZooGroup { name, group, m, spec: GroupSpec::Units { modulus, generators: gens } }
}

/// Quaternion group: code `q + 4 s` for `(-1)^s q`, `q` in `1, i, j, k`.
pub fn quaternion() -> TableGroup {
    // unit products as (sign, unit)
    const P: [[(u64, u64); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    let t = (0..8u64)
        .map(|a| {
            (0..8u64)
                .map(|b| {
                    let (s, q) = P[(a % 4) as usize][(b % 4) as usize];
                    q + 4 * ((s + a / 4 + b / 4) % 2)
                })
                .collect()
        })
        .collect();
    TableGroup::new(t, Some(vec![1, 2])).expect("quaternion table")
}

/// Unitriangular 3x3 matrices over `Z_3`: code `a + 3b + 9c` for
/// `[[1,a,c],[0,1,b],[0,0,1]]`.
pub fn heisenberg3() -> TableGroup {
    let split = |x: u64| (x % 3, x / 3 % 3, x / 9);
    let t = (0..27u64)
        .map(|x| {
            (0..27u64)
                .map(|y| {
                    let ((a, b, c), (d, e, f)) = (split(x), split(y));
                    (a + d) % 3 + 3 * ((b + e) % 3) + 9 * ((c + f + a * e) % 3)
                })
                .collect()
        })
        .collect();
    TableGroup::new(t, Some(vec![1, 3])).expect("Heisenberg table")
}

/// Solvable groups with a fitting `m`.
pub fn solvable() -> Vec<ZooGroup> {
    vec![
        perm("S3", 3, vec![vec![1, 2, 0], vec![1, 0, 2]], 6),
        perm("D4", 4, vec![vec![1, 2, 3, 0], vec![0, 3, 2, 1]], 2),
        table("Q8", quaternion(), 2),
        perm("A4", 4, vec![vec![1, 2, 0, 3], vec![1, 0, 3, 2]], 6),
        perm("D6", 6, vec![vec![1, 2, 3, 4, 5, 0], vec![0, 5, 4, 3, 2, 1]], 6),
        table("Heisenberg3", heisenberg3(), 3),
        units("Z15*", 15, vec![2, 14], 2),
        units("Z35*", 35, vec![2, 6], 12),
        table("Z6xZ4", TableGroup::abelian(&[6, 4]).expect("abelian table"), 12),
    ]
}

/// `A_5` with `m = 30`: every element order divides `m`, but the group is
/// not solvable.
pub fn a5() -> ZooGroup {
    perm("A5", 5, vec![vec![1, 2, 0, 3, 4], vec![1, 2, 3, 4, 0]], 30)
}

/// A 7-cycle with `m = 2`.
pub fn seven_cycle() -> ZooGroup {
    perm("C7", 7, vec![vec![1, 2, 3, 4, 5, 6, 0]], 2)
}
