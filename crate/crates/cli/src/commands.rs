//! Subcommand implementations. Each returns a [`Report`] carrying the JSON
//! document, a short text rendering and the exit status.

use std::cell::RefCell;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use hspkit::gcd::combine_many_traced;
use hspkit::groups::{
    abelian_factor_decomposition, build_group_superposition, build_polycyclic_series, derived_series, group_order,
    Group, GroupFile, PolycyclicSeries, SeriesOutcome, Session,
};
use hspkit::hsp::{witness_d, witness_level, Engine, Instance, SolveReport, Solver, SCHEMA};
use hspkit::lattice::{hermite_normal_form, smith_normal_form, IntMatrix, SubgroupRep};
use hspkit::state::{Backend, Exact, Float, MeasureMode, Sampler};
use hspkit::Error;

use crate::selftest::{self, Scale};

#[derive(Parser, Debug)]
#[command(name = "hspkit", version, about = "Exact hidden subgroup solver, lattice and group-structure tools")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Seed for sampled measurements; without it measurements follow the
    /// deterministic schedule.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Amplitude arithmetic.
    #[arg(long, value_enum, default_value_t = BackendChoice::Exact, global = true)]
    pub backend: BackendChoice,
    /// Machine-check exactness claims and report them; needs the exact backend.
    #[arg(long, global = true)]
    pub assert_exact: bool,
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Progress on stderr; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendChoice {
    Exact,
    Float,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hidden subgroup instances.
    Hsp {
        #[command(subcommand)]
        action: HspAction,
    },
    /// Normal forms and duals of integer matrices.
    Lattice {
        #[arg(value_enum)]
        op: LatticeOp,
        /// A file or an inline literal: a JSON array of columns,
        /// `{"columns": ..}` / `{"rows": ..}`, or `rows cols` text.
        matrix: String,
        /// Modulus for `perp`.
        #[arg(short)]
        m: Option<u64>,
    },
    /// Coefficients u with gcd(u_1 z_1 + ... + z_s, m) = gcd(z_1, ..., z_s, m).
    GcdCombine {
        #[arg(required = true, num_args = 1..)]
        z: Vec<u64>,
        #[arg(short)]
        m: u64,
    },
    /// Structure of a black-box group.
    Group {
        #[arg(value_enum)]
        op: GroupOp,
        group: PathBuf,
        /// `decompose`: generator codes of the normal subgroup N (default G').
        #[arg(long, value_delimiter = ',')]
        normal: Option<Vec<u64>>,
    },
    /// Run the acceptance sweeps.
    Selftest {
        /// Reduced instance sets.
        #[arg(long)]
        quick: bool,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
    },
}

#[derive(Subcommand, Debug)]
pub enum HspAction {
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = EngineChoice::Auto)]
        engine: EngineChoice,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineChoice {
    Auto,
    Circuit,
    Lumped,
}

impl From<EngineChoice> for Engine {
    fn from(e: EngineChoice) -> Engine {
        match e {
            EngineChoice::Auto => Engine::Auto,
            EngineChoice::Circuit => Engine::Circuit,
            EngineChoice::Lumped => Engine::Lumped,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeOp {
    Hnf,
    Snf,
    Perp,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupOp {
    Order,
    Series,
    Derived,
    Decompose,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROMISE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Everything a run produces.
pub struct Report {
    pub json: Value,
    pub text: String,
    pub code: i32,
}

impl Report {
    fn ok(json: Value, text: String) -> Self {
        Report { json, text, code: EXIT_OK }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).unwrap() + "\n",
            Format::Text => self.text.clone(),
        }
    }
}

/// A failure that still gets reported.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: msg.into() }
    }

    pub fn report(&self) -> Report {
        let kind = if self.code == EXIT_PROMISE { "promise_violation" } else { "malformed_input" };
        Report {
            json: json!({"schema": SCHEMA, "status": kind, "error": self.message}),
            text: format!("error ({kind}): {}\n", self.message),
            code: self.code,
        }
    }
}

/// Errors raised while reading input.
fn input_err(e: Error) -> Failure {
    Failure::input(e.to_string())
}

/// Errors raised by a computation on well-formed input: broken promises
/// exit 1, anything else is blamed on the input.
fn compute_err(e: Error) -> Failure {
    match e {
        Error::Promise(_) | Error::Group(_) | Error::IrrationalMass => {
            Failure { code: EXIT_PROMISE, message: e.to_string() }
        }
        e => Failure::input(e.to_string()),
    }
}

pub fn mode_of(run: &RunArgs) -> MeasureMode {
    run.seed.map_or(MeasureMode::Deterministic, MeasureMode::Seeded)
}

fn mode_name(mode: MeasureMode) -> String {
    match mode {
        MeasureMode::Deterministic => "deterministic".into(),
        MeasureMode::Seeded(s) => format!("seeded:{s}"),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

pub fn run(cli: &Cli) -> Report {
    let result = (|| {
        if cli.run.assert_exact && cli.run.backend != BackendChoice::Exact {
            return Err(Failure::input("--assert-exact needs the exact backend"));
        }
        match &cli.command {
            Command::Hsp { action: HspAction::Solve { instance, engine } } => {
                hsp_solve(&cli.run, instance, (*engine).into())
            }
            Command::Lattice { op, matrix, m } => lattice(&cli.run, *op, matrix, *m),
            Command::GcdCombine { z, m } => gcd_combine(&cli.run, z, *m),
            Command::Group { op, group, normal } => group_cmd(&cli.run, *op, group, normal.as_deref()),
            Command::Selftest { quick, only } => Ok(selftest_cmd(&cli.run, *quick, only.as_deref())),
        }
    })();
    result.unwrap_or_else(|f| f.report())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct HspOutput {
    #[serde(flatten)]
    report: SolveReport,
    backend: &'static str,
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    exactness: Option<HspExactness>,
}

#[derive(Serialize, Default)]
struct HspExactness {
    /// Probes taken at the level where amplification must be exact.
    witness_probes: u64,
    /// Flag-0 amplitudes at those probes are exactly zero.
    witness_zero: bool,
    /// Every probe state is exactly normalized.
    normalized: bool,
    /// The recovered subgroup is the instance's subgroup.
    matches_instance: bool,
}

fn hsp_solve(run: &RunArgs, path: &Path, engine: Engine) -> Result<Report, Failure> {
    let inst = Instance::from_json(&read_input(path)?).map_err(input_err)?;
    let hidden = inst.hidden_subgroup().map_err(input_err)?;
    let oracle = inst.oracle().map_err(input_err)?;
    let mode = mode_of(run);
    let (solution, exactness) = match run.backend {
        BackendChoice::Float => {
            let mut s = Solver::<Float>::new(engine, Sampler::new(mode));
            let h = s.solve(&oracle).map_err(compute_err)?;
            (s.finish(h), None)
        }
        BackendChoice::Exact if !run.assert_exact => {
            let mut s = Solver::<Exact>::new(engine, Sampler::new(mode));
            let h = s.solve(&oracle).map_err(compute_err)?;
            (s.finish(h), None)
        }
        BackendChoice::Exact => {
            // the witness is read against Z_m^n, so check the k = 1 stages
            let perp = if inst.k == 1 { Some(hidden.perp().map_err(compute_err)?) } else { None };
            let ex = RefCell::new(HspExactness { witness_zero: true, normalized: true, ..Default::default() });
            let mut s = Solver::<Exact>::new(engine, Sampler::new(mode)).observe(|snap| {
                let mut e = ex.borrow_mut();
                if !snap.state.is_normalized().unwrap_or(false) {
                    e.normalized = false;
                }
                let Some(hp) = &perp else { return };
                let d = witness_d(snap.u, hp, inst.m);
                if witness_level(inst.m, d) == Some(snap.j) {
                    e.witness_probes += 1;
                    let zero = snap.state.amplitudes().keys().all(|l| l[snap.flag_slot] != 0);
                    e.witness_zero &= zero;
                }
            });
            let h = s.solve(&oracle).map_err(compute_err)?;
            let sol = s.finish(h);
            let mut e = ex.into_inner();
            e.matches_instance = sol.subgroup == hidden;
            (sol, Some(e))
        }
    };
    let report = SolveReport::new(&solution);
    let mut text = format!("order {}\nhnf\n", report.order.0);
    for row in &report.hnf {
        text += &format!("  {}\n", row.iter().map(|v| v.0.to_string()).collect::<Vec<_>>().join(" "));
    }
    text += &format!("rounds {} oracle calls {}\n", solution.stats.rounds, solution.stats.oracle_calls);
    let failed = exactness.as_ref().is_some_and(|e| !(e.witness_zero && e.normalized && e.matches_instance));
    if let Some(e) = &exactness {
        text += &format!(
            "exact: witness_zero={} normalized={} matches_instance={}\n",
            e.witness_zero, e.normalized, e.matches_instance
        );
    }
    let out = HspOutput {
        report,
        backend: if run.backend == BackendChoice::Exact { "exact" } else { "float" },
        mode: mode_name(mode),
        exactness,
    };
    let mut r = Report::ok(serde_json::to_value(out).unwrap(), text);
    if failed {
        r.code = EXIT_PROMISE;
    }
    Ok(r)
}

// ---------------------------------------------------------------------------

struct MatrixInput {
    matrix: IntMatrix,
    m: Option<u64>,
}

fn parse_matrix(arg: &str) -> Result<MatrixInput, Failure> {
    let text = if Path::new(arg).is_file() { read_input(Path::new(arg))? } else { arg.to_string() };
    let t = text.trim();
    if !(t.starts_with('[') || t.starts_with('{')) {
        let matrix: IntMatrix = t.parse().map_err(input_err)?;
        return Ok(MatrixInput { matrix, m: None });
    }
    let v: Value = serde_json::from_str(t).map_err(|e| Failure::input(format!("matrix: {e}")))?;
    let ints = |v: &Value| -> Result<Vec<Vec<BigInt>>, Failure> {
        let rows = v.as_array().ok_or_else(|| Failure::input("matrix must be an array of arrays"))?;
        rows.iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Failure::input("matrix must be an array of arrays"))?
                    .iter()
                    .map(|x| match x {
                        Value::Number(n) => {
                            n.to_string().parse::<BigInt>().map_err(|_| Failure::input(format!("not an integer: {n}")))
                        }
                        Value::String(s) => {
                            s.trim().parse::<BigInt>().map_err(|_| Failure::input(format!("not an integer: {s}")))
                        }
                        _ => Err(Failure::input("matrix entries must be integers")),
                    })
                    .collect()
            })
            .collect()
    };
    let from_cols = |cols: Vec<Vec<BigInt>>| -> Result<IntMatrix, Failure> {
        let n = cols.first().map(Vec::len).ok_or_else(|| Failure::input("matrix has no columns"))?;
        IntMatrix::from_columns(n, &cols).map_err(input_err)
    };
    match &v {
        Value::Array(_) => Ok(MatrixInput { matrix: from_cols(ints(&v)?)?, m: None }),
        Value::Object(o) => {
            let m = match o.get("m") {
                None => None,
                Some(x) => Some(x.as_u64().ok_or_else(|| Failure::input("m must be a positive integer"))?),
            };
            let matrix = match (o.get("columns"), o.get("rows")) {
                (Some(c), None) => from_cols(ints(c)?)?,
                (None, Some(r)) => {
                    let rows = ints(r)?;
                    if rows.is_empty() {
                        return Err(Failure::input("matrix has no rows"));
                    }
                    IntMatrix::from_rows(&rows).map_err(input_err)?
                }
                _ => return Err(Failure::input("give exactly one of `columns` and `rows`")),
            };
            for k in o.keys() {
                if !["m", "columns", "rows"].contains(&k.as_str()) {
                    return Err(Failure::input(format!("unknown field `{k}`")));
                }
            }
            Ok(MatrixInput { matrix, m })
        }
        _ => Err(Failure::input("matrix must be an array or an object")),
    }
}

fn matrix_text(m: &IntMatrix) -> String {
    let rows = m.to_rows();
    let width = rows.iter().flatten().map(|v| v.to_string().len()).max().unwrap_or(1);
    rows.iter()
        .map(|r| format!("  {}\n", r.iter().map(|v| format!("{v:>width$}")).collect::<Vec<_>>().join(" ")))
        .collect()
}

fn lattice(run: &RunArgs, op: LatticeOp, arg: &str, m_flag: Option<u64>) -> Result<Report, Failure> {
    let MatrixInput { matrix, m } = parse_matrix(arg)?;
    let checked = run.assert_exact;
    match op {
        LatticeOp::Hnf => {
            let h = hermite_normal_form(&matrix);
            let mut json = json!({"schema": SCHEMA, "op": "hnf", "input": matrix, "hnf": h.h, "u": h.u, "rank": h.rank, "pivot_rows": h.pivot_rows});
            let mut ok = true;
            if checked {
                let rec = &matrix * &h.u == h.h;
                let uni = h.u.is_unimodular();
                ok = rec && uni;
                json["exactness"] = json!({"reconstructs": rec, "unimodular": uni});
            }
            let text = format!("hnf (rank {})\n{}", h.rank, matrix_text(&h.h));
            Ok(Report { json, text, code: if ok { EXIT_OK } else { EXIT_PROMISE } })
        }
        LatticeOp::Snf => {
            let s = smith_normal_form(&matrix);
            let diag: Vec<String> = s.diagonal().iter().map(|d| d.to_string()).collect();
            let mut json = json!({"schema": SCHEMA, "op": "snf", "input": matrix, "diagonal": s.diagonal().iter().map(|d| hspkit::json::JsonInt(d.clone())).collect::<Vec<_>>(),
                "s": s.s, "l": s.l, "r": s.r, "l_inv": s.l_inv});
            let mut ok = true;
            if checked {
                let rec = &(&s.l * &matrix) * &s.r == s.s;
                let uni = s.l.is_unimodular() && s.r.is_unimodular();
                let inv = &s.l * &s.l_inv == IntMatrix::identity(matrix.rows());
                ok = rec && uni && inv;
                json["exactness"] = json!({"reconstructs": rec, "unimodular": uni, "inverse": inv});
            }
            let text = format!("snf diag({})\n{}", diag.join(", "), matrix_text(&s.s));
            Ok(Report { json, text, code: if ok { EXIT_OK } else { EXIT_PROMISE } })
        }
        LatticeOp::Perp => {
            let m = m_flag
                .or(m)
                .ok_or_else(|| Failure::input("perp needs a modulus: -m <m> or \"m\" in the matrix object"))?;
            if m < 2 {
                return Err(Failure::input("m must be at least 2"));
            }
            let n = matrix.rows();
            let a = SubgroupRep::from_generators(&matrix.columns(), m, 1, n).map_err(input_err)?;
            let p = a.perp().map_err(compute_err)?;
            let gens = |s: &SubgroupRep| {
                s.generators()
                    .into_iter()
                    .map(|g| g.into_iter().map(hspkit::json::JsonInt).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            };
            let mut json = json!({"schema": SCHEMA, "op": "perp", "m": m, "n": n,
                "subgroup": {"hnf": a.hnf(), "order": hspkit::json::JsonInt(a.order())},
                "perp": {"hnf": p.hnf(), "order": hspkit::json::JsonInt(p.order()), "generators": gens(&p)}});
            let mut ok = true;
            if checked {
                let inv = p.perp().map_err(compute_err)? == a;
                let size = a.order() * p.order() == BigInt::from(m).pow(n as u32);
                ok = inv && size;
                json["exactness"] = json!({"involution": inv, "order_product": size});
            }
            let text = format!("perp in Z_{m}^{n}, order {}\n{}", p.order(), matrix_text(p.hnf()));
            Ok(Report { json, text, code: if ok { EXIT_OK } else { EXIT_PROMISE } })
        }
    }
}

// ---------------------------------------------------------------------------

fn gcd_combine(run: &RunArgs, zs: &[u64], m: u64) -> Result<Report, Failure> {
    if m < 1 {
        return Err(Failure::input("m must be positive"));
    }
    let traces = combine_many_traced(zs, m);
    let us: Vec<u64> = traces.iter().map(|t| t.u).collect();
    let s = zs.len();
    let combined =
        zs[..s - 1].iter().zip(&us).fold(zs[s - 1] as u128 % m as u128, |acc, (&z, &u)| {
            (acc + (z as u128 % m as u128) * u as u128) % m as u128
        }) as u64;
    let g = |a: u64, b: u64| num_integer::Integer::gcd(&a, &b);
    let target = zs.iter().fold(m, |acc, &z| g(acc, z % m));
    let mut json =
        json!({"schema": SCHEMA, "m": m, "z": zs, "u": us, "combined": combined, "gcd": target, "steps": traces});
    let mut code = EXIT_OK;
    if run.assert_exact {
        let ok = g(combined, m) == target;
        json["exactness"] = json!({"gcd_preserved": ok});
        if !ok {
            code = EXIT_PROMISE;
        }
    }
    let text = format!("u = {us:?}\ngcd = {target}\n");
    Ok(Report { json, text, code })
}

// ---------------------------------------------------------------------------

fn load_group(path: &Path) -> Result<(Group, u64), Failure> {
    let file = GroupFile::from_json(&read_input(path)?).map_err(input_err)?;
    let group = file.spec.build().map_err(input_err)?;
    Ok((group, file.m))
}

fn outcome_failure(outcome: SeriesOutcome, group: &Group) -> Result<PolycyclicSeries, Report> {
    match outcome {
        SeriesOutcome::Series(s) => Ok(s),
        SeriesOutcome::BadOrder { element } => Err(Report {
            json: json!({"schema": SCHEMA, "status": "bad_order", "element": element, "element_text": group.format(element)}),
            text: format!("bad order: element {} has order not dividing a power of m\n", group.format(element)),
            code: EXIT_PROMISE,
        }),
        SeriesOutcome::NotSolvable { replacements } => Err(Report {
            json: json!({"schema": SCHEMA, "status": "not_solvable", "replacements": replacements}),
            text: format!("not solvable ({replacements} replacements)\n"),
            code: EXIT_PROMISE,
        }),
    }
}

/// Uniformity of the pyramid state over the series' group, exactly: equal
/// integer amplitudes `a` with `a^2 |G| = scale`.
fn pyramid_uniform(session: &mut Session, series: &PolycyclicSeries, mode: MeasureMode) -> Result<Value, Failure> {
    let mut sampler = Sampler::new(mode);
    let p = build_group_superposition(session, &series.elements, &mut sampler).map_err(compute_err)?;
    let order = group_order(series);
    let st = &p.state;
    let first = st.amplitudes().values().next().cloned();
    let equal = first.as_ref().is_some_and(|f| st.amplitudes().values().all(|a| a == f));
    let exact = first.and_then(|f| f.as_integer()).is_some_and(|a| (&a * &a) * BigInt::from(order) == *st.scale());
    let nonzero = st.amplitudes().values().all(|a| !st.backend().is_zero(a));
    Ok(json!({
        "support": st.support_len(),
        "support_matches_order": st.support_len() as u128 == order,
        "equal_amplitudes": equal && nonzero,
        "amplitude_is_inverse_sqrt_order": exact,
    }))
}

fn exactness_ok(v: &Value) -> bool {
    v.as_object().is_some_and(|o| o.values().all(|x| x.as_bool().unwrap_or(true)))
}

fn group_cmd(run: &RunArgs, op: GroupOp, path: &Path, normal: Option<&[u64]>) -> Result<Report, Failure> {
    if run.backend != BackendChoice::Exact {
        return Err(Failure::input("group computations run on the exact backend only"));
    }
    let (group, m) = load_group(path)?;
    let mode = mode_of(run);
    let mut session = Session::new(group.clone(), m).with_mode(mode);
    let gens = group.generators().to_vec();
    let fmt_all = |codes: &[u64]| codes.iter().map(|&c| group.format(c)).collect::<Vec<_>>();
    let base = json!({"schema": SCHEMA, "kind": group.kind(), "m": m, "mode": mode_name(mode)});
    let series = match outcome_failure(build_polycyclic_series(&mut session, &gens).map_err(compute_err)?, &group) {
        Ok(s) => s,
        Err(r) => return Ok(r),
    };
    let mut json = base;
    let mut code = EXIT_OK;
    let text = match op {
        GroupOp::Order => {
            let order = group_order(&series);
            json["order"] = json!(order as u64);
            json["series_orders"] = json!(series.orders);
            format!("{order}\n")
        }
        GroupOp::Series => {
            json["series"] = json!({"elements": series.elements, "elements_text": fmt_all(&series.elements), "orders": series.orders});
            json["order"] = json!(group_order(&series) as u64);
            let mut t = String::new();
            for (e, o) in series.elements.iter().zip(&series.orders) {
                t += &format!("{} (factor order {o})\n", group.format(*e));
            }
            t
        }
        GroupOp::Derived => {
            let terms = derived_series(&mut session, &gens).map_err(compute_err)?;
            let rows: Vec<Value> = terms
                .iter()
                .map(|t| json!({"generators": t.generators, "generators_text": fmt_all(&t.generators), "order": group_order(&t.series) as u64, "series_orders": t.series.orders}))
                .collect();
            json["terms"] = Value::from(rows);
            json["derived_length"] = json!(terms.len() - 1);
            terms.iter().map(|t| format!("order {}\n", group_order(&t.series))).collect()
        }
        GroupOp::Decompose => {
            let n_gens = match normal {
                Some(n) => n.to_vec(),
                None => derived_series(&mut session, &gens).map_err(compute_err)?[1].generators.clone(),
            };
            for &c in &n_gens {
                if !group.is_element(c) {
                    return Err(Failure::input(format!("{c} is not an element code of this group")));
                }
            }
            let dec = abelian_factor_decomposition(&mut session, &n_gens).map_err(compute_err)?;
            json["normal_generators"] = json!(n_gens);
            json["factors"] = json!(dec.factors);
            json["generator_matrix"] = json!(dec.generator_matrix);
            format!(
                "{}\n",
                if dec.factors.is_empty() {
                    "trivial".into()
                } else {
                    dec.factors.iter().map(|f| format!("Z_{}", f.0)).collect::<Vec<_>>().join(" + ")
                }
            )
        }
    };
    if run.assert_exact {
        let ex = pyramid_uniform(&mut session, &series, mode)?;
        if !exactness_ok(&ex) {
            code = EXIT_PROMISE;
        }
        json["exactness"] = ex;
    }
    json["generators"] = json!(gens);
    json["stats"] = serde_json::to_value(&session.stats).unwrap();
    Ok(Report { json, text, code })
}

// ---------------------------------------------------------------------------

fn selftest_cmd(run: &RunArgs, quick: bool, only: Option<&[u8]>) -> Report {
    let scale = if quick { Scale::Quick } else { Scale::Full };
    let ids: Vec<u8> = match only {
        Some(ids) => ids.to_vec(),
        None => selftest::CRITERIA.iter().map(|c| c.0).collect(),
    };
    let mut outcomes = Vec::new();
    let mut text = String::new();
    for id in ids {
        let o = selftest::run_criterion(id, scale);
        if run.verbose > 0 {
            eprintln!("{}", o.line());
        }
        text += &o.line();
        text.push('\n');
        outcomes.push(o);
    }
    let passed = outcomes.iter().all(|o| o.passed);
    // timings vary run to run; keep them out of the JSON document
    let rows: Vec<Value> = outcomes
        .iter()
        .map(|o| json!({"id": o.id, "title": o.title, "passed": o.passed, "detail": o.detail}))
        .collect();
    Report {
        json: json!({"schema": SCHEMA, "scale": scale, "passed": passed, "criteria": rows}),
        text,
        code: if passed { EXIT_OK } else { EXIT_PROMISE },
    }
}
