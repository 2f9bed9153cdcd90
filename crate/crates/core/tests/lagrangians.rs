use std::collections::BTreeSet;

use k3fm_core::arith::{euler_phi, units};
use k3fm_core::lagrangians::count_lagrangians;
use k3fm_core::{Budget, Choice, GSpec, Int, NsDiscriminant};
use num_integer::Integer;
use proptest::prelude::*;

fn i(n: i64) -> Int {
    Int::from(n)
}

fn cells(t_max: i64) -> impl Iterator<Item = (i64, i64)> {
    (1..=t_max).flat_map(|t| (0..t).map(move |d| (d, t)))
}

#[test]
fn subgroups_have_phi_t_generators() {
    let budget = Budget::default();
    for (d, t) in cells(24) {
        let disc = NsDiscriminant::new(i(d), i(t)).unwrap();
        let els: BTreeSet<_> = disc.lagrangian_elements(&budget).unwrap().into_iter().collect();
        let mut covered = BTreeSet::new();
        for l in disc.lagrangian_subgroups() {
            assert!(els.contains(&l.generator), "({d},{t})");
            let gens = disc.subgroup_generators(&l, &budget).unwrap();
            assert_eq!(i(gens.len() as i64), euler_phi(&i(t)), "({d},{t})");
            for g in &gens {
                assert!(els.contains(g));
                assert_eq!(disc.subgroup_of(g).unwrap(), l);
            }
            covered.extend(gens);
        }
        assert_eq!(covered, els, "({d},{t}): every Lagrangian element generates a listed subgroup");
    }
}

#[test]
fn involution_commutes_with_sign() {
    for (d, t) in cells(24) {
        let disc = NsDiscriminant::new(i(d), i(t)).unwrap();
        let a = disc.form();
        let minus = GSpec::t_general(a);
        let neg = minus.generator();
        for l in disc.lagrangian_subgroups() {
            let img = disc.involution(&l);
            assert_eq!(disc.act_on_subgroup(neg, &l), l);
            assert_eq!(disc.involution(&disc.act_on_subgroup(neg, &l)), disc.act_on_subgroup(neg, &img));
            assert_eq!(disc.subgroup_of(&a.neg(&l.generator)).unwrap(), l);
        }
    }
}

#[test]
fn units_act_and_sweep_out_generators() {
    let budget = Budget::default();
    for (d, t) in cells(20) {
        let disc = NsDiscriminant::new(i(d), i(t)).unwrap();
        let (v, vp) = disc.canonical_pair();
        let us = units(&i(t));
        for k in &us {
            for l in &us {
                let kl = (k * l).mod_floor(&i(t));
                let lhs = disc.units_action(&kl, v).unwrap();
                let rhs = disc.units_action(k, &disc.units_action(l, v).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
        let orbit: BTreeSet<_> = us.iter().map(|k| disc.units_action(k, v).unwrap()).collect();
        let lv = disc.subgroup_of(v).unwrap();
        let gens: BTreeSet<_> = disc.subgroup_generators(&lv, &budget).unwrap().into_iter().collect();
        assert_eq!(orbit, gens, "({d},{t})");
        if d.gcd(&t) == 1 {
            assert!(orbit.contains(vp), "({d},{t}): v' should be a unit multiple of v");
        }
    }
}

#[test]
fn units_action_rejects_non_units() {
    let disc = NsDiscriminant::new(i(0), i(6)).unwrap();
    let v = disc.canonical_pair().0.clone();
    assert!(disc.units_action(&i(2), &v).is_err());
    assert!(disc.units_action(&i(5), &v).is_ok());
}

#[test]
fn selector_matches_primes_of_m() {
    let disc = NsDiscriminant::new(i(30), i(60)).unwrap();
    assert_eq!(disc.selector_primes(), vec![i(2), i(3), i(5)]);
    let l = disc.subgroup(&[Choice::V, Choice::VPrime, Choice::V]).unwrap();
    let img = disc.involution(&l);
    let flipped: Vec<Choice> = img.selector.iter().map(|(_, c)| *c).collect();
    assert_eq!(flipped, vec![Choice::VPrime, Choice::V, Choice::VPrime]);
    assert!(disc.subgroup(&[Choice::V]).is_err());
}

proptest! {
    #[test]
    fn counts_scale_to_large_t(d in 0i64..1_000_000, t in 1i64..1_000_000) {
        let (els, subs) = count_lagrangians(&i(d), &i(t)).unwrap();
        prop_assert_eq!(els, euler_phi(&i(t)) * subs.clone());
        let disc = NsDiscriminant::new(i(d), i(t)).unwrap();
        prop_assert_eq!(i(disc.lagrangian_subgroups().len() as i64), subs);
    }

    #[test]
    fn subgroup_of_inverts_subgroup(d in 0i64..500, t in 1i64..500, seed in any::<u64>()) {
        let disc = NsDiscriminant::new(i(d), i(t)).unwrap();
        let subs = disc.lagrangian_subgroups();
        let l = &subs[(seed % subs.len() as u64) as usize];
        prop_assert_eq!(&disc.subgroup_of(&l.generator).unwrap(), l);
        prop_assert!(disc.is_lagrangian(&l.generator));
        prop_assert_eq!(&disc.involution(&disc.involution(l)), l);
    }
}
