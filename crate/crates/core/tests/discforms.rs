use std::collections::HashSet;

use k3fm_core::discforms::{isometry_between, isometry_group, primary_decomposition, reduce_mod2};
use k3fm_core::lattices::ns_gram;
use k3fm_core::{Budget, DFIsometry, FiniteQuadForm, Int, Rational};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn i(n: i64) -> Int {
    Int::from(n)
}

fn form(d: i64, t: i64) -> FiniteQuadForm {
    FiniteQuadForm::from_lattice(&ns_gram(i(d), i(t)).unwrap().lattice()).unwrap()
}

#[test]
fn order_is_abs_det() {
    for t in 1..=30i64 {
        for d in -3..t + 3 {
            let ns = ns_gram(i(d), i(t)).unwrap();
            assert_eq!(form(d, t).order(), ns.det().abs());
        }
    }
}

/// Every element and every multiple up to its order, on all forms with
/// `t ≤ 12` and a spread of forms up to `|A| = 400`.
#[test]
fn q_is_quadratic() {
    let cells = (1..=12i64)
        .flat_map(|t| (0..t).map(move |d| (d, t)))
        .chain((13..=20).flat_map(|t| [(0, t), (1, t), (t / 2, t)]));
    for (d, t) in cells {
        let a = form(d, t);
        for x in a.elements() {
            let qx = a.q(&x);
            let mut y = a.zero();
            let mut k = 0i64;
            loop {
                let want = reduce_mod2(&(qx.clone() * Rational::from_integer(i(k * k))));
                assert_eq!(a.q(&y), want, "({d},{t}) x={x} k={k}");
                assert_eq!(a.q(&a.neg(&y)), want);
                y = a.add(&y, &x);
                k += 1;
                if y == a.zero() {
                    break;
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn polarization(d in 0i64..30, t in 1i64..30, seed in any::<u64>()) {
        let a = form(d, t);
        let els = a.elements();
        let x = &els[(seed % els.len() as u64) as usize];
        let y = &els[((seed >> 20) % els.len() as u64) as usize];
        let lhs = reduce_mod2(&(a.q(&a.add(x, y)) - a.q(x) - a.q(y)));
        let rhs = reduce_mod2(&(a.b(x, y) * Rational::from_integer(i(2))));
        prop_assert_eq!(lhs, rhs);
        prop_assert!(a.b(x, y) >= Rational::zero() && a.b(x, y) < Rational::from_integer(i(1)));
    }
}

#[test]
fn isometry_groups_are_groups() {
    let budget = Budget::default();
    for (d, t) in [(0, 3), (1, 5), (0, 5), (3, 4), (2, 6), (0, 6), (1, 8)] {
        let a = form(d, t);
        let g = isometry_group(&a, &budget).unwrap();
        let set: HashSet<&DFIsometry> = g.iter().collect();
        assert!(g.iter().any(|s| s.is_identity(&a)));
        for s in &g {
            assert!(set.contains(&s.inverse(&a)), "({d},{t}) inverse");
            assert!(s.compose(&a, &s.inverse(&a)).is_identity(&a));
            for r in &g {
                assert!(set.contains(&s.compose(&a, r)), "({d},{t}) closure");
            }
        }
    }
}

#[test]
fn primary_decomposition_reassembles() {
    let budget = Budget::default();
    for t in 1..=24i64 {
        for d in 0..t {
            let a = form(d, t);
            let parts = primary_decomposition(&a);
            let product = parts.iter().fold(i(1), |acc, p| acc * p.form.order());
            assert_eq!(product, a.order());
            let forms: Vec<FiniteQuadForm> = parts.iter().map(|p| p.form.clone()).collect();
            let sum = FiniteQuadForm::orthogonal_sum(&forms);
            if a.order() <= i(600) {
                assert!(isometry_between(&a, &sum, &budget).unwrap().is_some(), "({d},{t})");
            }
            for x in a.elements().iter().step_by(7) {
                let back = parts
                    .iter()
                    .fold(a.zero(), |acc, p| a.add(&acc, &p.embed(&a, &p.project(x))));
                assert_eq!(&back, x, "({d},{t})");
            }
        }
    }
}
