use std::collections::BTreeSet;

use k3fm_core::arith::omega;
use k3fm_core::lagrangians::{count_lagrangians, GSpec};
use k3fm_core::surfaces::{de_closed_form, de_counts, de_counts_for_sign, fm_count, ht_classify, SurfaceModel};
use k3fm_core::{Budget, Error, Int, NsDiscriminant};
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::args::SweepArgs;
use crate::render;

/// One `(d, t)` cell. Field names are part of the output schema.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SweepRow {
    pub d: Value,
    pub t: Value,
    pub m: Value,
    pub omega_m: u32,
    pub lagr_elements: Value,
    pub lagr_subgroups: Value,
    pub de: Value,
    pub de_orbits: Value,
    pub fm: Value,
    pub ht_class: String,
}

pub const CSV_HEADER: &str = "d,t,m,omega_m,lagr_elements,lagr_subgroups,de,de_orbits,fm,ht_class";

impl SweepRow {
    pub fn csv(&self) -> String {
        let cell = |v: &Value| match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            cell(&self.d),
            cell(&self.t),
            cell(&self.m),
            self.omega_m,
            cell(&self.lagr_elements),
            cell(&self.lagr_subgroups),
            cell(&self.de),
            cell(&self.de_orbits),
            cell(&self.fm),
            self.ht_class
        )
    }
}

/// Cells in lexicographic `(t, d)` order.
pub fn cells(args: &SweepArgs) -> Vec<(Int, Int)> {
    let mut out = Vec::new();
    let mut t = args.t_min.clone().max(Int::one());
    while t <= args.t_max {
        let mut d = args.d_min.clone().unwrap_or_default();
        let d_max = args.d_max.clone().unwrap_or_else(|| t.clone() - 1);
        while d <= d_max {
            out.push((d.clone(), t.clone()));
            d += 1;
        }
        t += 1;
    }
    out
}

pub struct CellResult {
    pub row: SweepRow,
    pub mismatches: Vec<String>,
}

pub fn compute_cell(d: &Int, t: &Int, args: &SweepArgs, budget: &Budget) -> Result<CellResult, Error> {
    let disc = NsDiscriminant::new(d.clone(), t.clone())?;
    let m = disc.ns().m().clone();
    let (elements, subgroups) = count_lagrangians(d, t)?;
    let de = if args.formula_only {
        de_counts_for_sign(d, t)?
    } else {
        de_counts(&SurfaceModel::t_general(d.clone(), t.clone())?, budget)?
    };
    let g = GSpec::t_general(disc.form());
    let group_order = (t.clone() * t.clone()).to_u64().unwrap_or(u64::MAX);
    let fm = if args.formula_only && group_order > budget.max_group_order {
        None
    } else {
        Some(fm_count(d, t, &g, budget)?)
    };
    let ht = ht_classify(d, t, true)?;
    let mut mismatches = Vec::new();
    if args.verify {
        verify_cell(&disc, &elements, &subgroups, budget, &mut mismatches)?;
        if let Some(f) = &fm {
            if *f < Int::one() {
                mismatches.push(format!("d={d} t={t}: fm = {f} < 1"));
            }
        }
    }
    Ok(CellResult {
        row: SweepRow {
            d: render::int(d),
            t: render::int(t),
            m: render::int(&m),
            omega_m: omega(&m),
            lagr_elements: render::int(&elements),
            lagr_subgroups: render::int(&subgroups),
            de: render::int(&de.de),
            de_orbits: render::int(&de.de_orbits),
            fm: fm.as_ref().map_or(Value::Null, render::int),
            ht_class: ht.to_string(),
        },
        mismatches,
    })
}

/// Brute force against the counting formulas: elements by scanning the whole
/// group, subgroups as distinct sets of multiples, orbits against the closed form.
fn verify_cell(
    disc: &NsDiscriminant,
    elements: &Int,
    subgroups: &Int,
    budget: &Budget,
    out: &mut Vec<String>,
) -> Result<(), Error> {
    let (d, t) = (disc.ns().d(), disc.t());
    let a = disc.form();
    let scanned = disc.lagrangian_elements(budget)?;
    if Int::from(scanned.len()) != *elements {
        out.push(format!("d={d} t={t}: {} Lagrangian elements scanned, formula {elements}", scanned.len()));
    }
    let mut sets = BTreeSet::new();
    for x in &scanned {
        let mut multiples = BTreeSet::new();
        let mut y = a.zero();
        loop {
            multiples.insert(y.clone());
            y = a.add(&y, x);
            if multiples.contains(&y) {
                break;
            }
        }
        sets.insert(multiples.into_iter().collect::<Vec<_>>());
    }
    if Int::from(sets.len()) != *subgroups {
        out.push(format!("d={d} t={t}: {} Lagrangian subgroups found, formula {subgroups}", sets.len()));
    }
    if *t > Int::from(2) {
        let g = GSpec::t_general(a);
        let enumerated = (
            disc.element_orbits(&scanned, &g)?.len(),
            disc.subgroup_orbits(&g)?.len(),
        );
        let closed = de_closed_form(d, t)?;
        if (Int::from(enumerated.0), Int::from(enumerated.1)) != (closed.de.clone(), closed.de_orbits.clone()) {
            out.push(format!(
                "d={d} t={t}: DE orbits {enumerated:?}, closed form ({}, {})",
                closed.de, closed.de_orbits
            ));
        }
    }
    Ok(())
}

/// All cells, computed in parallel and returned in cell order.
pub fn run_sweep(args: &SweepArgs, budget: &Budget) -> Result<Vec<CellResult>, Error> {
    cells(args)
        .par_iter()
        .map(|(d, t)| compute_cell(d, t, args, budget))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}
