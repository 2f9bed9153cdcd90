use k3fm_core::arith::{euler_phi, mod_inv, units};
use k3fm_core::surfaces::{
    allowed_g_orders, caldararu_class, coprime_jacobian_classes, de_closed_form, de_counts, fm_count,
    ht_classify, jacobian_class_canonical, jacobian_compose, jacobian_index,
};
use k3fm_core::{Budget, GSpec, Int, MukaiVector, NsDiscriminant, SurfaceModel, UnitSubgroup};
use num_integer::Integer;
use num_traits::One;
use proptest::prelude::*;

fn i(n: i64) -> Int {
    Int::from(n)
}

fn cells(t_max: i64) -> impl Iterator<Item = (i64, i64)> {
    (1..=t_max).flat_map(|t| (0..t).map(move |d| (d, t)))
}

proptest! {
    #[test]
    fn index_depends_on_the_class(t in 1i64..500, k in -2000i64..2000) {
        let c = jacobian_class_canonical(&i(k), &i(t)).unwrap();
        prop_assert_eq!(jacobian_index(&i(t), &i(k)).unwrap(), jacobian_index(&i(t), &c).unwrap());
        prop_assert_eq!(jacobian_index(&i(t), &i(k)).unwrap(), i(t / t.gcd(&k)));
    }

    #[test]
    fn units_act_on_classes(t in 1i64..200, k in 0i64..200, a in 0i64..200, b in 0i64..200) {
        let t_ = i(t);
        let us = units(&t_);
        let (u, w) = (&us[a as usize % us.len()], &us[b as usize % us.len()]);
        let canon = |x: &Int| jacobian_class_canonical(x, &t_).unwrap();
        let act = |u: &Int, k: &Int| canon(&jacobian_compose(u, k, &t_).unwrap());
        let k = canon(&i(k));
        prop_assert_eq!(act(&Int::one(), &k), k.clone());
        let uw = jacobian_compose(u, w, &t_).unwrap();
        prop_assert_eq!(act(&uw, &k), act(u, &act(w, &k)));
    }

    #[test]
    fn ht_depends_on_d_mod_t(d in -300i64..300, t in 1i64..100, general in any::<bool>()) {
        let base = ht_classify(&i(d.rem_euclid(t)), &i(t), general).unwrap();
        prop_assert_eq!(ht_classify(&i(d), &i(t), general).unwrap(), base);
        if d.gcd(&t) == 1 {
            let inv = mod_inv(&i(d), &i(t)).unwrap();
            prop_assert_eq!(ht_classify(&inv, &i(t), general).unwrap(), base);
        }
    }
}

#[test]
fn closed_form_matches_enumeration() {
    let budget = Budget::default();
    for (d, t) in cells(24).filter(|(_, t)| *t > 2) {
        let model = SurfaceModel::t_general(i(d), i(t)).unwrap();
        assert_eq!(de_counts(&model, &budget).unwrap(), de_closed_form(&i(d), &i(t)).unwrap(), "({d},{t})");
    }
}

#[test]
fn fibre_class_generates_v() {
    for (d, t) in cells(24) {
        let disc = NsDiscriminant::new(i(d), i(t)).unwrap();
        let w = caldararu_class(&disc, &MukaiVector::new(i(0), i(0), i(1), i(0))).unwrap();
        let v = disc.canonical_pair().0;
        assert!(w == *v || w == disc.form().neg(v), "({d},{t})");
    }
}

#[test]
fn fm_counts_and_double_quotients() {
    let budget = Budget::default();
    for (d, t) in cells(12) {
        let disc = NsDiscriminant::new(i(d), i(t)).unwrap();
        let g = GSpec::t_general(disc.form());
        assert!(fm_count(&i(d), &i(t), &g, &budget).unwrap() >= Int::one(), "({d},{t})");
        if d.gcd(&t) == 1 {
            assert_eq!(disc.double_quotient(&g).unwrap().len(), 1, "({d},{t})");
        }
    }
}

#[test]
fn fibre_orbit_matches_class_count() {
    for t in 3..=24i64 {
        let disc = NsDiscriminant::new(i(1), i(t)).unwrap();
        let w = caldararu_class(&disc, &MukaiVector::new(i(0), i(0), i(1), i(0))).unwrap();
        let a = disc.form();
        let mut orbits = std::collections::BTreeSet::new();
        for k in units(&i(t)) {
            let x = disc.units_action(&k, &w).unwrap();
            let nx = a.neg(&x);
            orbits.insert(std::cmp::min(x, nx));
        }
        let sign = UnitSubgroup::sign(&i(t)).unwrap();
        let (count, _) = coprime_jacobian_classes(&i(t), &sign).unwrap();
        assert_eq!(i(orbits.len() as i64), count, "t={t}");
        assert_eq!(count, euler_phi(&i(t)) / i(2));
    }
}

#[test]
fn admissible_g_orders_for_k3() {
    assert_eq!(allowed_g_orders(20), vec![2, 4, 6, 8, 10, 12, 22, 44, 50, 66]);
}
