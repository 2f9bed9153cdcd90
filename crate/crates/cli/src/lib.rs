//! The `k3fm` command line. [`run_from`] parses arguments, runs one
//! subcommand and returns what would be printed together with the exit code,
//! so the binary and the tests share a single path.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 invalid input,
//! 3 enumeration budget exceeded.

pub mod args;
pub mod render;
pub mod sweep;

use std::ffi::OsString;

use clap::Parser;
use k3fm_core::discforms::{structure_invariants, DFIsometry};
use k3fm_core::lagrangians::count_lagrangians;
use k3fm_core::lattices::{genus_representatives, overlattice};
use k3fm_core::surfaces::{
    aut_orders, caldararu_class, coprime_jacobian_classes, de_closed_form, de_counts, fibration_count,
    fibrations_isomorphic, fm_contributions, ht_classify, jac0_isomorphic, jacobian_class_canonical,
    jacobian_compose, jacobian_index, jspecial_torsor_exists, second_fibration_jacobian,
};
use k3fm_core::{
    Budget, Error, GSpec, Int, JInvariant, MukaiVector, NsDiscriminant, Rational, RationalVector, SurfaceModel,
    UnitSubgroup,
};
use num_traits::Zero;
use serde_json::{json, Value};

use args::{Cli, Command, GroupArgs, LatticeArgs, SweepArgs};

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: &Error) -> Self {
        Outcome {
            code: if e.is_capacity() { 3 } else { 2 },
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

/// A subcommand's result in both output modes.
struct Report {
    json: Value,
    text: String,
}

impl Report {
    fn render(self, json: bool) -> String {
        if json {
            render::to_json(&self.json)
        } else {
            self.text
        }
    }
}

pub fn run_from<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                // Only the diagnostic itself; clap appends usage and a hint.
                let first = text.lines().next().unwrap_or("error: invalid arguments");
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: format!("{first}\n"),
                }
            } else {
                Outcome::ok(text)
            };
        }
    };
    let budget = match Budget::from_env() {
        Ok(b) => b,
        Err(e) => return Outcome::error(&e),
    };
    match execute(cli.command, &budget) {
        Ok(o) => o,
        Err(e) => Outcome::error(&e),
    }
}

fn execute(cmd: Command, budget: &Budget) -> Result<Outcome, Error> {
    let (report, json) = match cmd {
        Command::Disc { lat, json } => (disc(&lat)?, json),
        Command::Lagr { lat, list, json, .. } => (lagr(&lat, list, budget)?, json),
        Command::Pair { lat, t_general, json } => (pair(&lat, t_general)?, json),
        Command::Involution { lat, json } => (involution(&lat)?, json),
        Command::Genus { lat, json } => (genus(&lat, budget)?, json),
        Command::Fm { lat, g, json } => (fm(&lat, &g, budget)?, json),
        Command::De { lat, g, verify, json } => return de(&lat, &g, verify, json, budget),
        Command::Ht { lat, t_general, json } => (ht(&lat, t_general)?, json),
        Command::Jac {
            t,
            k,
            index,
            compose,
            canonical,
            classes,
            jspecial,
            b_order,
            json,
        } => {
            let mode = if index {
                JacMode::Index
            } else if let Some(l) = compose {
                JacMode::Compose(l)
            } else if canonical {
                JacMode::Canonical
            } else if classes {
                JacMode::Classes
            } else if jspecial {
                JacMode::JSpecial
            } else {
                JacMode::Summary
            };
            (jac(&t, k.as_ref(), mode, b_order)?, json)
        }
        Command::Overlattice { lat, gens, json } => (overlattice_cmd(&lat, &gens)?, json),
        Command::Caldararu { lat, r, x, y, s, json } => {
            (caldararu(&lat, MukaiVector::new(r, x, y, s))?, json)
        }
        Command::Sweep(args) => return sweep_cmd(&args, budget),
    };
    Ok(Outcome::ok(report.render(json)))
}

fn header(lat: &LatticeArgs) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("d".into(), render::int(&lat.d));
    m.insert("t".into(), render::int(&lat.t));
    m
}

fn disc(lat: &LatticeArgs) -> Result<Report, Error> {
    let x = NsDiscriminant::new(lat.d.clone(), lat.t.clone())?;
    let a = x.form();
    let (sa, sb) = structure_invariants(&lat.d, &lat.t)?;
    let (v, vp) = x.canonical_pair();
    let q = a.q_gen();
    let b = a.b_matrix();
    let mut j = header(lat);
    j.insert("structure".into(), json!([render::int(&sa), render::int(&sb)]));
    j.insert("order".into(), render::int(&a.order()));
    j.insert("orders".into(), render::ints(a.orders()));
    j.insert("q_gen".into(), Value::Array(q.iter().map(render::rational).collect()));
    j.insert(
        "b_matrix".into(),
        Value::Array(
            b.iter()
                .map(|row| Value::Array(row.iter().map(render::rational).collect()))
                .collect(),
        ),
    );
    j.insert("v".into(), render::element(v));
    j.insert("v_prime".into(), render::element(vp));

    let mut text = format!("A = Z/{sa} + Z/{sb}, |A| = {}\n", a.order());
    let orders: Vec<String> = a.orders().iter().map(ToString::to_string).collect();
    text += &format!("generator orders: {}\n", orders.join(" "));
    for (i, qi) in q.iter().enumerate() {
        let row: Vec<String> = b[i].iter().map(ToString::to_string).collect();
        text += &format!("g{}: q = {qi}, b = [{}]\n", i + 1, row.join(", "));
    }
    text += &format!("v = {}\nv' = {}\n", render::coords(&v.coords), render::coords(&vp.coords));
    Ok(Report {
        json: Value::Object(j),
        text,
    })
}

fn lagr(lat: &LatticeArgs, list: bool, budget: &Budget) -> Result<Report, Error> {
    let (elements, subgroups) = count_lagrangians(&lat.d, &lat.t)?;
    let m = num_integer::Integer::gcd(&lat.d, &lat.t);
    let mut j = header(lat);
    j.insert("m".into(), render::int(&m));
    j.insert("omega_m".into(), json!(k3fm_core::arith::omega(&m)));
    j.insert("elements".into(), render::int(&elements));
    j.insert("subgroups".into(), render::int(&subgroups));
    let mut text = format!("elements={elements} subgroups={subgroups}\n");
    if list {
        let x = NsDiscriminant::new(lat.d.clone(), lat.t.clone())?;
        let els = x.lagrangian_elements(budget)?;
        let subs = x.lagrangian_subgroups();
        j.insert(
            "element_list".into(),
            Value::Array(
                els.iter()
                    .map(|e| json!({ "coords": render::element(e), "lift": render::vector(&x.lift(e)) }))
                    .collect(),
            ),
        );
        j.insert(
            "subgroup_list".into(),
            Value::Array(subs.iter().map(render::subgroup).collect()),
        );
        text += "elements:\n";
        for e in &els {
            text += &format!("  {}  lift {}\n", render::coords(&e.coords), render::rationals(&x.lift(e)));
        }
        text += "subgroups:\n";
        for l in &subs {
            text += &format!(
                "  <{}>  {}\n",
                render::coords(&l.generator.coords),
                render::selector_text(l)
            );
        }
    }
    Ok(Report {
        json: Value::Object(j),
        text,
    })
}

fn opt<T, F: FnOnce(T) -> Value>(r: Result<T, Error>, f: F) -> Result<Value, Error> {
    match r {
        Ok(v) => Ok(f(v)),
        Err(Error::NotApplicable(_)) => Ok(Value::Null),
        Err(e) => Err(e),
    }
}

fn text_of(v: &Value) -> String {
    match v {
        Value::Null => "n/a".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn pair(lat: &LatticeArgs, t_general: bool) -> Result<Report, Error> {
    let x = NsDiscriminant::new(lat.d.clone(), lat.t.clone())?;
    let (d, t) = (&lat.d, &lat.t);
    let (v, vp) = x.canonical_pair();
    let same = x.subgroup_of(v)? == x.subgroup_of(vp)?;
    let fibrations = fibration_count(d, t)?;
    let iso = if t_general {
        opt(fibrations_isomorphic(d, t, true), |b| json!(b))?
    } else {
        Value::Null
    };
    let second = opt(second_fibration_jacobian(d, t), |k| render::int(&k))?;
    let jac0 = opt(jac0_isomorphic(d, t), |b| json!(b))?;
    let mut j = header(lat);
    j.insert("m".into(), render::int(x.ns().m()));
    j.insert("v".into(), render::element(v));
    j.insert("v_lift".into(), render::vector(&x.lift(v)));
    j.insert("v_prime".into(), render::element(vp));
    j.insert("v_prime_lift".into(), render::vector(&x.lift(vp)));
    j.insert("same_subgroup".into(), json!(same));
    j.insert("fibrations".into(), json!(fibrations));
    j.insert("fibrations_isomorphic".into(), iso.clone());
    j.insert("second_fibration_jacobian".into(), second.clone());
    j.insert("jac0_isomorphic".into(), jac0.clone());
    let text = format!(
        "v = {} (lift {})\nv' = {} (lift {})\nsame subgroup: {same}\nfibrations: {fibrations}\n\
         fibrations isomorphic: {}\nsecond fibration = J^k with k = {}\nzeroth Jacobians isomorphic: {}\n",
        render::coords(&v.coords),
        render::rationals(&x.lift(v)),
        render::coords(&vp.coords),
        render::rationals(&x.lift(vp)),
        text_of(&iso),
        text_of(&second),
        text_of(&jac0),
    );
    Ok(Report {
        json: Value::Object(j),
        text,
    })
}

fn involution(lat: &LatticeArgs) -> Result<Report, Error> {
    let x = NsDiscriminant::new(lat.d.clone(), lat.t.clone())?;
    let subs = x.lagrangian_subgroups();
    let mut rows = Vec::new();
    let mut text = String::new();
    for l in &subs {
        let img = x.involution(l);
        rows.push(json!({ "subgroup": render::subgroup(l), "image": render::subgroup(&img) }));
        text += &format!("{}  ->  {}\n", render::selector_text(l), render::selector_text(&img));
    }
    let mut j = header(lat);
    j.insert("flipped_primes".into(), render::ints(&x.selector_primes()));
    j.insert("pairs".into(), Value::Array(rows));
    Ok(Report {
        json: Value::Object(j),
        text,
    })
}

fn genus(lat: &LatticeArgs, budget: &Budget) -> Result<Report, Error> {
    let reps = genus_representatives(lat.d.clone(), lat.t.clone(), budget)?;
    let mut j = header(lat);
    j.insert("representatives".into(), render::ints(&reps));
    let parts: Vec<String> = reps.iter().map(ToString::to_string).collect();
    Ok(Report {
        json: Value::Object(j),
        text: format!("{}\n", parts.join(" ")),
    })
}

fn group(x: &NsDiscriminant, g: &GroupArgs) -> Result<GSpec, Error> {
    let a = x.form();
    match (g.g_order, &g.g_gen) {
        (None, _) => Ok(GSpec::t_general(a)),
        (Some(2), None) => Ok(GSpec::t_general(a)),
        (Some(n), None) => Err(Error::InvalidParameter(format!(
            "--g-gen is required when --g-order is {n}"
        ))),
        (Some(n), Some(vals)) => {
            let r = a.rank();
            if vals.len() != r * r {
                return Err(Error::InvalidParameter(format!(
                    "--g-gen needs {} residues ({r} generators with {r} coordinates each), got {}",
                    r * r,
                    vals.len()
                )));
            }
            let images = vals.chunks(r.max(1)).map(<[Int]>::to_vec).collect();
            let gen = DFIsometry::from_images(a, images)?;
            GSpec::new(a, n, gen)
        }
    }
}

fn fm(lat: &LatticeArgs, g: &GroupArgs, budget: &Budget) -> Result<Report, Error> {
    let x = NsDiscriminant::new(lat.d.clone(), lat.t.clone())?;
    let gs = group(&x, g)?;
    let parts = fm_contributions(&lat.d, &lat.t, &gs, budget)?;
    let total: usize = parts.iter().map(|(_, n)| n).sum();
    let mut j = header(lat);
    j.insert("g_order".into(), json!(gs.order()));
    j.insert(
        "genus".into(),
        Value::Array(
            parts
                .iter()
                .map(|(e, n)| json!({ "e": render::int(e), "double_cosets": n }))
                .collect(),
        ),
    );
    j.insert("fm".into(), json!(total));
    let mut text = String::new();
    for (e, n) in &parts {
        text += &format!("e={e}: {n}\n");
    }
    text += &format!("fm={total}\n");
    Ok(Report {
        json: Value::Object(j),
        text,
    })
}

fn de(lat: &LatticeArgs, g: &GroupArgs, verify: bool, json: bool, budget: &Budget) -> Result<Outcome, Error> {
    let x = NsDiscriminant::new(lat.d.clone(), lat.t.clone())?;
    let gs = group(&x, g)?;
    let sign = UnitSubgroup::sign(&lat.t)?;
    let t_general = gs.order() == 2;
    let model = SurfaceModel::new(x.clone(), gs.clone(), sign.clone(), sign, t_general, JInvariant::Generic)?;
    let counts = de_counts(&model, budget)?;
    let dq = x.double_quotient(&gs)?.len();
    let (aut, aut_f) = aut_orders(&x, &gs)?;
    let closed = match de_closed_form(&lat.d, &lat.t) {
        Ok(c) if t_general => Some(c),
        Ok(_) | Err(Error::NotApplicable(_)) => None,
        Err(e) => return Err(e),
    };
    let mut mismatch = None;
    if verify {
        if let Some(c) = &closed {
            if *c != counts {
                mismatch = Some(format!(
                    "orbit enumeration gives ({}, {}) but the closed form gives ({}, {})",
                    counts.de, counts.de_orbits, c.de, c.de_orbits
                ));
            }
        }
    }
    let mut j = header(lat);
    j.insert("g_order".into(), json!(gs.order()));
    j.insert("de".into(), render::int(&counts.de));
    j.insert("de_orbits".into(), render::int(&counts.de_orbits));
    j.insert("double_quotient".into(), json!(dq));
    j.insert("aut".into(), json!(aut));
    j.insert("aut_fixing_fibre".into(), json!(aut_f));
    j.insert(
        "closed_form".into(),
        closed.as_ref().map_or(Value::Null, |c| {
            json!({ "de": render::int(&c.de), "de_orbits": render::int(&c.de_orbits) })
        }),
    );
    if verify {
        j.insert("verified".into(), json!(mismatch.is_none()));
    }
    let text = format!(
        "de={} de_orbits={} double_quotient={dq} aut={aut} aut_fixing_fibre={aut_f}\n",
        counts.de, counts.de_orbits
    );
    let stdout = Report {
        json: Value::Object(j),
        text,
    }
    .render(json);
    Ok(match mismatch {
        None => Outcome::ok(stdout),
        Some(msg) => Outcome {
            code: 1,
            stdout,
            stderr: format!("verification failed: {msg}\n"),
        },
    })
}

fn ht(lat: &LatticeArgs, t_general: bool) -> Result<Report, Error> {
    let class = ht_classify(&lat.d, &lat.t, t_general)?;
    let m = num_integer::Integer::gcd(&lat.d, &lat.t);
    let mut j = header(lat);
    j.insert("m".into(), render::int(&m));
    j.insert("omega_m".into(), json!(k3fm_core::arith::omega(&m)));
    j.insert("t_general".into(), json!(t_general));
    j.insert("class".into(), json!(class.name()));
    Ok(Report {
        json: Value::Object(j),
        text: format!("{class}\n"),
    })
}

enum JacMode {
    Index,
    Compose(Int),
    Canonical,
    Classes,
    JSpecial,
    Summary,
}

fn jac(t: &Int, k: Option<&Int>, mode: JacMode, b_order: Option<u64>) -> Result<Report, Error> {
    let need_k = || {
        k.cloned()
            .ok_or_else(|| Error::InvalidParameter("--k is required".into()))
    };
    let mut j = serde_json::Map::new();
    let text = match mode {
        JacMode::Index => {
            let k = need_k()?;
            let idx = jacobian_index(t, &k)?;
            j.insert("t".into(), render::int(t));
            j.insert("k".into(), render::int(&k));
            j.insert("index".into(), render::int(&idx));
            format!("{idx}\n")
        }
        JacMode::Compose(l) => {
            let k = need_k()?;
            let c = jacobian_compose(&k, &l, t)?;
            j.insert("t".into(), render::int(t));
            j.insert("k".into(), render::int(&k));
            j.insert("l".into(), render::int(&l));
            j.insert("compose".into(), render::int(&c));
            format!("{c}\n")
        }
        JacMode::Canonical => {
            let k = need_k()?;
            let c = jacobian_class_canonical(&k, t)?;
            j.insert("t".into(), render::int(t));
            j.insert("k".into(), render::int(&k));
            j.insert("canonical".into(), render::int(&c));
            format!("{c}\n")
        }
        JacMode::Classes => {
            let order = b_order.unwrap_or(2);
            let b = if order == 2 {
                UnitSubgroup::sign(t)?
            } else {
                UnitSubgroup::cyclic_of_order(t, order)?
            };
            let (count, reps) = coprime_jacobian_classes(t, &b)?;
            j.insert("t".into(), render::int(t));
            j.insert("b_order".into(), json!(b.order()));
            j.insert("count".into(), render::int(&count));
            j.insert("representatives".into(), render::ints(&reps));
            let parts: Vec<String> = reps.iter().map(ToString::to_string).collect();
            format!("count={count} representatives={}\n", parts.join(" "))
        }
        JacMode::JSpecial => {
            let h = b_order.expect("clap requires --b-order");
            let h32 = u32::try_from(h)
                .map_err(|_| Error::InvalidParameter(format!("h must be 4 or 6, got {h}")))?;
            let exists = jspecial_torsor_exists(t, h32)?;
            j.insert("p".into(), render::int(t));
            j.insert("h".into(), json!(h));
            j.insert("exists".into(), json!(exists));
            format!("{exists}\n")
        }
        JacMode::Summary => {
            let k = need_k()?;
            let idx = jacobian_index(t, &k)?;
            let c = jacobian_class_canonical(&k, t)?;
            j.insert("t".into(), render::int(t));
            j.insert("k".into(), render::int(&k));
            j.insert("index".into(), render::int(&idx));
            j.insert("canonical".into(), render::int(&c));
            format!("index={idx} canonical={c}\n")
        }
    };
    Ok(Report {
        json: Value::Object(j),
        text,
    })
}

fn parse_vector(s: &str) -> Result<RationalVector, Error> {
    let coords = s
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<Rational>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse {c:?} as a rational number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RationalVector::new(coords))
}

fn overlattice_cmd(lat: &LatticeArgs, gens: &[String]) -> Result<Report, Error> {
    let ns = k3fm_core::lattices::ns_gram(lat.d.clone(), lat.t.clone())?;
    let base = ns.lattice();
    let gens = gens.iter().map(|s| parse_vector(s)).collect::<Result<Vec<_>, _>>()?;
    let o = overlattice(&base, &gens)?;
    let gram = o.lattice.gram().to_rows();
    let mut j = header(lat);
    j.insert("index".into(), render::int(&o.index));
    j.insert("det".into(), render::int(&o.lattice.det()));
    j.insert("gram".into(), Value::Array(gram.iter().map(|r| render::ints(r)).collect()));
    j.insert("basis".into(), Value::Array(o.basis.iter().map(render::vector).collect()));
    let rows: Vec<String> = gram.iter().map(|r| render::coords(r)).collect();
    let text = format!(
        "index={} det={}\ngram=[{}]\n",
        o.index,
        o.lattice.det(),
        rows.join(", ")
    );
    Ok(Report {
        json: Value::Object(j),
        text,
    })
}

fn caldararu(lat: &LatticeArgs, v: MukaiVector) -> Result<Report, Error> {
    let x = NsDiscriminant::new(lat.d.clone(), lat.t.clone())?;
    let w = caldararu_class(&x, &v)?;
    let div = v.divisibility(x.ns());
    let lagrangian = x.is_lagrangian(&w);
    let sub = if lagrangian {
        render::subgroup(&x.subgroup_of(&w)?)
    } else {
        Value::Null
    };
    let mut j = header(lat);
    j.insert(
        "mukai".into(),
        json!({ "r": render::int(&v.r), "x": render::int(&v.x), "y": render::int(&v.y), "s": render::int(&v.s) }),
    );
    j.insert("divisibility".into(), render::int(&div));
    j.insert("class".into(), render::element(&w));
    j.insert("lift".into(), render::vector(&x.lift(&w)));
    j.insert("is_zero".into(), json!(w.coords.iter().all(Zero::is_zero)));
    j.insert("lagrangian".into(), json!(lagrangian));
    j.insert("subgroup".into(), sub);
    let text = format!(
        "divisibility={div} class={} lift={} lagrangian={lagrangian}\n",
        render::coords(&w.coords),
        render::rationals(&x.lift(&w))
    );
    Ok(Report {
        json: Value::Object(j),
        text,
    })
}

fn sweep_cmd(args: &SweepArgs, budget: &Budget) -> Result<Outcome, Error> {
    let results = sweep::run_sweep(args, budget)?;
    let mut body = String::new();
    if args.json {
        let rows: Vec<Value> = results
            .iter()
            .map(|r| serde_json::to_value(&r.row).expect("rows serialize"))
            .collect();
        body = render::to_json(&Value::Array(rows));
    } else if args.jsonl {
        for r in &results {
            body += &serde_json::to_string(&r.row).expect("rows serialize");
            body.push('\n');
        }
    } else {
        body += sweep::CSV_HEADER;
        body.push('\n');
        for r in &results {
            body += &r.row.csv();
            body.push('\n');
        }
    }
    let mismatches: Vec<&String> = results.iter().flat_map(|r| &r.mismatches).collect();
    let stdout = match &args.out {
        Some(path) => {
            std::fs::write(path, &body).map_err(|e| {
                Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))
            })?;
            String::new()
        }
        None => body,
    };
    if mismatches.is_empty() {
        return Ok(Outcome::ok(stdout));
    }
    let mut stderr = String::new();
    for m in mismatches {
        stderr += &format!("verification failed: {m}\n");
    }
    Ok(Outcome {
        code: 1,
        stdout,
        stderr,
    })
}
