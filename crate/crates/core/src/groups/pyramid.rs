//! Extending `|N>` to `|K>` for `K = <N, u>` from several copies, and the
//! pyramid building `|G>` along a polycyclic series.

use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::root_order_for;
use crate::gcd::{combine_many, combined_value};
use crate::state::{Backend, Circuit, ClassicalMap, Exact, GateCounts, LabelFn, RegisterLayout, Sampler, SparseState};
use crate::{Error, Result};

use super::arith::{plain_inverse, power};
use super::backend::{Group, GroupBackend};
use super::quantum::Session;

/// Outcome of one extension step.
#[derive(Clone, Debug)]
pub struct Extension {
    /// `s - 1` copies of `|K>`.
    pub outputs: Vec<SparseState<Exact>>,
    /// The last group register, left in `|gamma_y>` for the final `y`.
    pub garbage: SparseState<Exact>,
    pub trace: ExtensionTrace,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionTrace {
    /// Measured Fourier labels.
    pub ys: Vec<u64>,
    /// Coefficients making the last label a generator of all of them.
    pub us: Vec<u64>,
    /// That generator.
    pub final_y: u64,
    /// `y_i = t_i * final_y (mod m)`.
    pub ts: Vec<u64>,
}

fn group_layout(group: &dyn GroupBackend, name: &str) -> Result<Arc<RegisterLayout>> {
    Ok(Arc::new(RegisterLayout::builder().bits(name, group.bits()).build()?))
}

fn check_copy(copy: &SparseState<Exact>, m: u64) -> Result<()> {
    if copy.layout().width() != 1 {
        return Err(Error::Precondition("extension copies hold a single group register".into()));
    }
    let required = root_order_for(m);
    if copy.backend().order() % required != 0 {
        return Err(Error::RootOrder { order: copy.backend().order() as u32, required: required as u32 });
    }
    Ok(())
}

/// `QFT . (|x>|v> -> |x>|u^x v>) . QFT` on `|0>|N>`, as a state on `y | g`.
fn fourier_copy(session: &mut Session, copy: &SparseState<Exact>, u: u64) -> Result<SparseState<Exact>> {
    let (g, m) = (session.group.clone(), session.m);
    let y = Arc::new(RegisterLayout::builder().digits("y", m, 1).build()?);
    let state = SparseState::basis(y, copy.backend().clone(), vec![0])?
        .tensor(&copy.relabel(group_layout(g.as_ref(), "g")?)?)?;
    let pows: Vec<u64> = (0..m).map(|x| power(g.as_ref(), u, x)).collect();
    let inv: Vec<u64> = pows.iter().map(|&p| plain_inverse(g.as_ref(), p)).collect();
    let by = |table: Vec<u64>| {
        let g = g.clone();
        Arc::new(move |l: &mut [u64]| {
            if g.is_element(l[1]) {
                l[1] = g.mul(table[l[0] as usize], l[1]);
            }
        }) as LabelFn
    };
    let c = Circuit::new().qft(0).map(ClassicalMap::new("mu^x", by(pows), by(inv)).counted_as_oracle()).qft(0);
    session.stats.fourier_samples += 1;
    c.run(state, &mut GateCounts::default())
}

/// Left-multiplies slot `v` by `w^t` where `w` sits in slot `w`, on valid codes.
fn kick_map(group: &Group, v: usize, w: usize, t: u64) -> ClassicalMap {
    let by = |inverse: bool| {
        let g = group.clone();
        Arc::new(move |l: &mut [u64]| {
            if g.is_element(l[v]) && g.is_element(l[w]) {
                let mut p = power(g.as_ref(), l[w], t);
                if inverse {
                    p = plain_inverse(g.as_ref(), p);
                }
                l[v] = g.mul(p, l[v]);
            }
        }) as LabelFn
    };
    ClassicalMap::new("kick", by(false), by(true))
}

/// `(v, w) -> (w^t v, w)` on two single-register states: the first stays
/// `gamma_y`, the second goes from `gamma_z` to `gamma_{z - t y}`.
fn kick(
    session: &mut Session,
    first: &SparseState<Exact>,
    second: &SparseState<Exact>,
    t: u64,
) -> Result<(SparseState<Exact>, SparseState<Exact>)> {
    let g = session.group.clone();
    let joint =
        first.relabel(group_layout(g.as_ref(), "v")?)?.tensor(&second.relabel(group_layout(g.as_ref(), "w")?)?)?;
    let mut joint = joint;
    joint.apply_classical_map(&kick_map(&g, 0, 1, t), false)?;
    session.stats.kickbacks += 1;
    let (a, b) = joint.factor_split(&["v"])?;
    Ok((a.relabel(first.layout().clone())?, b.relabel(second.layout().clone())?))
}

/// Least `t >= 0` with `y = t * ys (mod m)`; `ys` generates a subgroup
/// containing `y`.
fn solve_multiple(y: u64, ys: u64, m: u64) -> Result<u64> {
    if ys == 0 {
        return if y == 0 { Ok(0) } else { Err(Error::Precondition(format!("{y} is not a multiple of 0 mod {m}"))) };
    }
    let d = ys.gcd(&m);
    if y % d != 0 {
        return Err(Error::Precondition(format!("{y} is not a multiple of {ys} mod {m}")));
    }
    let m1 = m / d;
    if m1 == 1 {
        return Ok(0);
    }
    let e = ((ys / d % m1) as i128).extended_gcd(&(m1 as i128));
    let inv = e.x.rem_euclid(m1 as i128) as u128;
    Ok(((y / d) as u128 % m1 as u128 * inv % m1 as u128) as u64)
}

/// The coefficient schedule for measured labels `ys`.
fn schedule(ys: &[u64], m: u64) -> Result<ExtensionTrace> {
    let us = combine_many(ys, m);
    let final_y = combined_value(ys, &us, m);
    let ts = ys[..ys.len() - 1].iter().map(|&y| solve_multiple(y, final_y, m)).collect::<Result<_>>()?;
    Ok(ExtensionTrace { ys: ys.to_vec(), us, final_y, ts })
}

/// From `s` copies of `|N>` (single group registers), `s - 1` copies of
/// `|K>` with `K = <N, u>`. Requires `u` to normalize `N` and `u^m in N`.
///
/// Each copy is Fourier sampled and its label measured at once; every later
/// step is a permutation controlled by those labels, so measuring first does
/// not change the outcome and keeps each step on two registers.
pub fn extend_superposition(
    session: &mut Session,
    copies: &[SparseState<Exact>],
    u: u64,
    sampler: &mut Sampler,
) -> Result<Extension> {
    let m = session.m;
    if copies.is_empty() {
        return Err(Error::Precondition("need at least one copy".into()));
    }
    let mut regs = Vec::with_capacity(copies.len());
    let mut ys = Vec::with_capacity(copies.len());
    for copy in copies {
        check_copy(copy, m)?;
        let st = fourier_copy(session, copy, u)?;
        let (y, collapsed) = st.measure(&[0], sampler, None)?;
        let (gamma, _) = collapsed.factor_split(&["g"])?;
        regs.push(gamma.relabel(copy.layout().clone())?);
        ys.push(y[0]);
    }
    let trace = schedule(&ys, m)?;
    let s = regs.len();
    let mut last = regs.pop().unwrap();
    for i in 0..s - 1 {
        let t = (m - trace.us[i] % m) % m;
        let (a, b) = kick(session, &regs[i], &last, t)?;
        regs[i] = a;
        last = b;
    }
    for i in 0..s - 1 {
        let (a, b) = kick(session, &last, &regs[i], trace.ts[i])?;
        last = a;
        regs[i] = b;
    }
    for r in regs.iter_mut() {
        r.fix_global_phase()?;
    }
    Ok(Extension { outputs: regs, garbage: last, trace })
}

/// The same step without intermediate measurement: all labels stay in
/// superposition and every multiplication is controlled by them. Returns the
/// `s - 1` output registers, each split off as its own factor.
pub fn extend_superposition_coherent(
    session: &mut Session,
    copies: &[SparseState<Exact>],
    u: u64,
) -> Result<Vec<SparseState<Exact>>> {
    let (g, m) = (session.group.clone(), session.m);
    let s = copies.len();
    if s < 2 {
        return Err(Error::Precondition("the coherent step needs at least two copies".into()));
    }
    let mut joint: Option<SparseState<Exact>> = None;
    for (i, copy) in copies.iter().enumerate() {
        check_copy(copy, m)?;
        let st = fourier_copy(session, copy, u)?;
        let names =
            RegisterLayout::builder().digits(&format!("y{i}"), m, 1).bits(&format!("g{i}"), g.bits()).build()?;
        let st = st.relabel(Arc::new(names))?;
        joint = Some(match joint {
            None => st,
            Some(j) => j.tensor(&st)?,
        });
    }
    let mut joint = joint.unwrap();
    // slots: y_i = 2i, g_i = 2i + 1
    let steps = move |l: &[u64]| -> Vec<(usize, usize, u64)> {
        let ys: Vec<u64> = (0..s).map(|i| l[2 * i]).collect();
        let tr = schedule(&ys, m).expect("labels come from Z_m");
        let mut out = Vec::with_capacity(2 * (s - 1));
        for i in 0..s - 1 {
            out.push((2 * i + 1, 2 * s - 1, (m - tr.us[i] % m) % m));
        }
        for i in 0..s - 1 {
            out.push((2 * s - 1, 2 * i + 1, tr.ts[i]));
        }
        out
    };
    let run = |inverse: bool| {
        let g = g.clone();
        Arc::new(move |l: &mut [u64]| {
            let mut st = steps(l);
            if inverse {
                st.reverse();
            }
            for (v, w, t) in st {
                kick_map(&g, v, w, t).apply(l, inverse);
            }
        }) as LabelFn
    };
    joint.apply_classical_map(&ClassicalMap::new("kicks", run(false), run(true)), false)?;
    session.stats.kickbacks += 2 * (s as u64 - 1);
    let mut outputs = Vec::with_capacity(s - 1);
    let out_layout = group_layout(g.as_ref(), "g")?;
    let names: Vec<String> = (0..s - 1).map(|i| format!("g{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let (mut left, _) = joint.factor_split(&refs)?;
    for i in 0..s - 1 {
        if i + 1 == s - 1 {
            outputs.push(left.relabel(out_layout.clone())?);
            break;
        }
        let (one, rest) = left.factor_split(&[refs[i]])?;
        outputs.push(one.relabel(out_layout.clone())?);
        left = rest;
    }
    for r in outputs.iter_mut() {
        r.fix_global_phase()?;
    }
    Ok(outputs)
}

/// `|G>` built level by level: `h + 1` copies of `|1>` become `h` copies of
/// `|G_1>`, then `h - 1` copies of `|G_2>`, and so on.
#[derive(Clone, Debug)]
pub struct Pyramid {
    pub state: SparseState<Exact>,
    /// Level `i`: the `i + 1`-th extension, one trace per produced batch.
    pub levels: Vec<ExtensionTrace>,
    /// Superpositions `|G_i>` for every level, `|G_0> = |1>` first.
    pub tiers: Vec<SparseState<Exact>>,
}

pub fn build_group_superposition(session: &mut Session, elements: &[u64], sampler: &mut Sampler) -> Result<Pyramid> {
    let g = session.group.clone();
    let h = elements.len();
    let backend = Exact::new(root_order_for(session.m));
    let base = SparseState::basis(group_layout(g.as_ref(), "g")?, backend, vec![g.identity()])?;
    let mut copies = vec![base.clone(); h + 1];
    let mut levels = Vec::with_capacity(h);
    let mut tiers = vec![base];
    for &u in elements {
        let ext = extend_superposition(session, &copies, u, sampler)?;
        copies = ext.outputs;
        levels.push(ext.trace);
        tiers.push(copies[0].clone());
    }
    Ok(Pyramid { state: copies.pop().unwrap(), levels, tiers })
}
