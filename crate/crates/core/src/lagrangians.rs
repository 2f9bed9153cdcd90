//! Lagrangian elements and subgroups of `A_{d,t}`, the involution `ι`, the
//! action of `(ℤ/t)*` and of a finite group `G ⊂ O(A)`, and the double
//! quotient `⟨ι⟩ \ L / G`.
//!
//! A Lagrangian subgroup is cyclic of order `t` and isotropic. Its `p`-part is
//! `⟨v̄⟩_p` or `⟨v̄′⟩_p`, and the two differ exactly when `p | m`, so a subgroup
//! is stored as one binary choice per prime of `m` and never as a list of
//! elements.

use std::collections::BTreeSet;
use std::fmt;

use crate::arith::{factorize, idempotent, mod_inv, modulo, omega, pow2};
use crate::budget::Budget;
use crate::discforms::{DFElement, DFIsometry, DualPresentation, FiniteQuadForm};
use crate::error::{Error, Result};
use crate::lattices::{isotropic_rays, ns_gram, NsLattice, RationalVector};
use crate::scalar::{to_u64_sat, Scalar};
use num_rational::Ratio;

/// Which isotropic ray a prime component of a subgroup comes from.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Choice {
    /// `⟨v̄⟩_p`, from the fibre class `F`.
    V,
    /// `⟨v̄′⟩_p`, from the second ray `F′`.
    VPrime,
}

impl Choice {
    pub fn flip(self) -> Self {
        match self {
            Choice::V => Choice::VPrime,
            Choice::VPrime => Choice::V,
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Choice::V => "v",
            Choice::VPrime => "v'",
        })
    }
}

/// A cyclic isotropic subgroup of order `t`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct LagrangianSubgroup<T> {
    /// One entry per prime dividing `m`, primes ascending.
    pub selector: Vec<(T, Choice)>,
    /// A generator, cached.
    pub generator: DFElement<T>,
}

#[derive(Clone, Debug)]
struct PrimePart<T> {
    p: T,
    /// Idempotent of `ℤ/t` for the `p`-part.
    idem: T,
    divides_m: bool,
}

/// One orbit of a finite group action.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Orbit<X> {
    /// Least member.
    pub representative: X,
    /// All members, sorted.
    pub members: Vec<X>,
}

/// `|L̃(A_{d,t})| = φ(t)·2^{ω(m)}` and `|L(A_{d,t})| = 2^{ω(m)}`.
pub fn count_lagrangians<T: Scalar>(d: &T, t: &T) -> Result<(T, T)> {
    let ns = ns_gram(d.clone(), t.clone())?;
    let subgroups: T = pow2(omega(ns.m()));
    Ok((crate::arith::euler_phi(t) * subgroups.clone(), subgroups))
}

/// A finite cyclic group `G ⊂ O(A)` containing `−id`, given by an abstract
/// order and the image of a generator.
///
/// The abstract order is kept separately because the map `G → O(A)` need not
/// be injective; its kernel is what fixes the fibration.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GSpec<T> {
    order: u64,
    generator: DFIsometry<T>,
}

impl<T: Scalar> GSpec<T> {
    /// `G = {±id}`.
    pub fn t_general(form: &FiniteQuadForm<T>) -> Self {
        GSpec {
            order: 2,
            generator: DFIsometry::negation(form),
        }
    }

    /// Validates that `generator` is an isometry, that `order` is admissible
    /// for a transcendental lattice of rank 20, and that `g^order = id` and
    /// `g^(order/2) = −id` on `A`.
    pub fn new(form: &FiniteQuadForm<T>, order: u64, generator: DFIsometry<T>) -> Result<Self> {
        generator.validate(form)?;
        let allowed = crate::surfaces::allowed_g_orders(20);
        if !allowed.contains(&order) {
            return Err(Error::InvalidParameter(format!(
                "|G| = {order} is not one of the admissible orders {allowed:?}"
            )));
        }
        if !generator.power(form, order).is_identity(form) {
            return Err(Error::InvalidIsometry(format!(
                "generator does not satisfy g^{order} = id"
            )));
        }
        if generator.power(form, order / 2) != DFIsometry::negation(form) {
            return Err(Error::InvalidIsometry(format!(
                "g^{} must act as -id on the discriminant group",
                order / 2
            )));
        }
        Ok(GSpec { order, generator })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn generator(&self) -> &DFIsometry<T> {
        &self.generator
    }

    /// Distinct elements of the image of `G` in `O(A)`, in power order.
    pub fn image(&self, form: &FiniteQuadForm<T>) -> Vec<DFIsometry<T>> {
        let n = self.generator.order(form);
        let mut out = vec![DFIsometry::identity(form)];
        for _ in 1..n {
            let next = self.generator.compose(form, out.last().expect("non-empty"));
            out.push(next);
        }
        out
    }

    /// `|ker(G → O(A))|`.
    pub fn kernel_order(&self, form: &FiniteQuadForm<T>) -> u64 {
        self.order / self.generator.order(form)
    }

    /// Whether the image of `G` is `{±id}`.
    pub fn acts_as_sign(&self, form: &FiniteQuadForm<T>) -> bool {
        self.generator.is_identity(form) || self.generator == DFIsometry::negation(form)
    }
}

/// One generator of an acting group, as a map on the orbit space.
pub type Step<'a, X> = dyn Fn(&X) -> X + 'a;

/// Orbits of the group generated by `steps` on a set closed under them.
pub fn orbits_under<X: Ord + Clone>(items: &[X], steps: &[&Step<'_, X>]) -> Vec<Orbit<X>> {
    let mut sorted: Vec<X> = items.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for x in sorted {
        if seen.contains(&x) {
            continue;
        }
        let mut members = BTreeSet::from([x.clone()]);
        let mut stack = vec![x];
        while let Some(cur) = stack.pop() {
            for step in steps {
                let y = step(&cur);
                if members.insert(y.clone()) {
                    stack.push(y);
                }
            }
        }
        seen.extend(members.iter().cloned());
        let members: Vec<X> = members.into_iter().collect();
        out.push(Orbit {
            representative: members[0].clone(),
            members,
        });
    }
    out.sort_by(|a, b| a.representative.cmp(&b.representative));
    out
}

/// `A_{d,t}` with everything needed to work with its Lagrangians.
#[derive(Clone, Debug)]
pub struct NsDiscriminant<T: Scalar> {
    ns: NsLattice<T>,
    pres: DualPresentation<T>,
    v: DFElement<T>,
    v_prime: DFElement<T>,
    parts: Vec<PrimePart<T>>,
}

impl<T: Scalar> NsDiscriminant<T> {
    pub fn new(d: T, t: T) -> Result<Self> {
        let ns = ns_gram(d, t)?;
        let pres = DualPresentation::new(&ns.lattice())?;
        let t = ns.t().clone();
        let (f, f_prime) = isotropic_rays(&ns);
        let inv_t = Ratio::new(T::one(), t.clone());
        let v = pres.reduce(&f.scale(&inv_t))?;
        let v_prime = pres.reduce(&f_prime.scale(&inv_t))?;
        let parts = factorize(&t)
            .into_iter()
            .map(|(p, k)| {
                let pk = crate::arith::pow(&p, k);
                PrimePart {
                    idem: idempotent(&pk, &t),
                    divides_m: ns.m().is_multiple_of(&p),
                    p,
                }
            })
            .collect();
        Ok(NsDiscriminant {
            ns,
            pres,
            v,
            v_prime,
            parts,
        })
    }

    pub fn ns(&self) -> &NsLattice<T> {
        &self.ns
    }

    pub fn t(&self) -> &T {
        self.ns.t()
    }

    pub fn form(&self) -> &FiniteQuadForm<T> {
        self.pres.form()
    }

    pub fn presentation(&self) -> &DualPresentation<T> {
        &self.pres
    }

    /// `v̄ = [F/t]` and `v̄′ = [F′/t]`.
    pub fn canonical_pair(&self) -> (&DFElement<T>, &DFElement<T>) {
        (&self.v, &self.v_prime)
    }

    /// Primes dividing `m`, the domain of a subgroup selector.
    pub fn selector_primes(&self) -> Vec<T> {
        self.parts
            .iter()
            .filter(|p| p.divides_m)
            .map(|p| p.p.clone())
            .collect()
    }

    /// A representative in `L*`, basis `(H, F)`.
    pub fn lift(&self, x: &DFElement<T>) -> RationalVector<T> {
        self.pres.lift(x)
    }

    pub fn is_lagrangian(&self, x: &DFElement<T>) -> bool {
        let a = self.form();
        a.contains(x) && a.is_isotropic(x) && a.element_order(x) == *self.t()
    }

    fn require_lagrangian(&self, x: &DFElement<T>) -> Result<()> {
        if self.is_lagrangian(x) {
            Ok(())
        } else {
            Err(Error::InvalidElement(format!(
                "{x} is not a Lagrangian element of A_{{{},{}}}",
                self.ns.d(),
                self.t()
            )))
        }
    }

    /// Every isotropic element of order `t`, sorted by coordinates.
    pub fn lagrangian_elements(&self, budget: &Budget) -> Result<Vec<DFElement<T>>> {
        budget.check_t("Lagrangian element enumeration", to_u64_sat(self.t()))?;
        Ok(self
            .form()
            .elements()
            .into_iter()
            .filter(|x| self.is_lagrangian(x))
            .collect())
    }

    /// The subgroup with the given per-prime choices (primes of `m` ascending).
    pub fn subgroup(&self, choices: &[Choice]) -> Result<LagrangianSubgroup<T>> {
        let primes = self.selector_primes();
        if choices.len() != primes.len() {
            return Err(Error::InvalidSubgroup(format!(
                "selector needs {} entries (one per prime of m), got {}",
                primes.len(),
                choices.len()
            )));
        }
        let a = self.form();
        let mut gen = a.zero();
        let mut it = choices.iter();
        for part in &self.parts {
            let base = if part.divides_m && *it.next().expect("length checked") == Choice::VPrime {
                &self.v_prime
            } else {
                &self.v
            };
            gen = a.add(&gen, &a.scale(&part.idem, base));
        }
        Ok(LagrangianSubgroup {
            selector: primes.into_iter().zip(choices.iter().copied()).collect(),
            generator: gen,
        })
    }

    /// All `2^{ω(m)}` Lagrangian subgroups, selectors in lexicographic order.
    pub fn lagrangian_subgroups(&self) -> Vec<LagrangianSubgroup<T>> {
        let k = self.selector_primes().len();
        (0u64..1 << k)
            .map(|bits| {
                let choices: Vec<Choice> = (0..k)
                    .map(|i| {
                        if bits >> (k - 1 - i) & 1 == 1 {
                            Choice::VPrime
                        } else {
                            Choice::V
                        }
                    })
                    .collect();
                self.subgroup(&choices).expect("selector length matches")
            })
            .collect()
    }

    /// The Lagrangian subgroup generated by a Lagrangian element.
    pub fn subgroup_of(&self, x: &DFElement<T>) -> Result<LagrangianSubgroup<T>> {
        self.require_lagrangian(x)?;
        let a = self.form();
        let mut choices = Vec::new();
        for part in self.parts.iter().filter(|p| p.divides_m) {
            let xp = a.scale(&part.idem, x);
            let vp = a.scale(&part.idem, &self.v);
            let choice = if a.discrete_multiple(&vp, &xp).is_some() {
                Choice::V
            } else {
                let wp = a.scale(&part.idem, &self.v_prime);
                if a.discrete_multiple(&wp, &xp).is_none() {
                    return Err(Error::InvalidElement(format!(
                        "{x} lies in neither <v> nor <v'> at p = {}",
                        part.p
                    )));
                }
                Choice::VPrime
            };
            choices.push(choice);
        }
        self.subgroup(&choices)
    }

    /// `ι`: flips the choice at every prime dividing `m`.
    pub fn involution(&self, l: &LagrangianSubgroup<T>) -> LagrangianSubgroup<T> {
        let choices: Vec<Choice> = l.selector.iter().map(|(_, c)| c.flip()).collect();
        self.subgroup(&choices).expect("selector length is preserved")
    }

    pub fn contains(&self, l: &LagrangianSubgroup<T>, x: &DFElement<T>) -> bool {
        self.form().discrete_multiple(&l.generator, x).is_some()
    }

    /// All `t` elements of the subgroup, sorted.
    pub fn subgroup_elements(&self, l: &LagrangianSubgroup<T>, budget: &Budget) -> Result<Vec<DFElement<T>>> {
        budget.check_t("subgroup materialization", to_u64_sat(self.t()))?;
        let a = self.form();
        let mut out = Vec::new();
        let mut x = a.zero();
        let mut k = T::zero();
        while k < *self.t() {
            out.push(x.clone());
            x = a.add(&x, &l.generator);
            k = k + T::one();
        }
        out.sort();
        Ok(out)
    }

    /// The `φ(t)` Lagrangian elements generating the subgroup, sorted.
    pub fn subgroup_generators(&self, l: &LagrangianSubgroup<T>, budget: &Budget) -> Result<Vec<DFElement<T>>> {
        budget.check_t("subgroup materialization", to_u64_sat(self.t()))?;
        let a = self.form();
        let mut out: Vec<_> = crate::arith::units(self.t())
            .iter()
            .map(|u| a.scale(u, &l.generator))
            .collect();
        out.sort();
        Ok(out)
    }

    /// `k ∗ w = k⁻¹·w` for a unit `k` of `ℤ/t`.
    pub fn units_action(&self, k: &T, w: &DFElement<T>) -> Result<DFElement<T>> {
        let t = self.t();
        let inv = mod_inv(k, t).ok_or_else(|| {
            Error::InvalidParameter(format!("k = {k} is not a unit modulo t = {t}"))
        })?;
        self.require_lagrangian(w)?;
        Ok(self.form().scale(&modulo(&inv, t), w))
    }

    /// Image of a subgroup under an isometry of `A`.
    pub fn act_on_subgroup(&self, g: &DFIsometry<T>, l: &LagrangianSubgroup<T>) -> LagrangianSubgroup<T> {
        let img = g.apply_to(self.form(), &l.generator);
        self.subgroup_of(&img)
            .expect("isometries map Lagrangian elements to Lagrangian elements")
    }

    fn check_g(&self, g: &GSpec<T>) -> Result<()> {
        g.generator().validate(self.form())
    }

    /// `G`-orbits on a set of Lagrangian elements (normally all of them).
    pub fn element_orbits(&self, items: &[DFElement<T>], g: &GSpec<T>) -> Result<Vec<Orbit<DFElement<T>>>> {
        self.check_g(g)?;
        for x in items {
            self.require_lagrangian(x)?;
        }
        let a = self.form();
        let step = |x: &DFElement<T>| g.generator().apply_to(a, x);
        Ok(orbits_under(items, &[&step]))
    }

    /// `G`-orbits on Lagrangian subgroups.
    pub fn subgroup_orbits(&self, g: &GSpec<T>) -> Result<Vec<Orbit<LagrangianSubgroup<T>>>> {
        self.check_g(g)?;
        let step = |l: &LagrangianSubgroup<T>| self.act_on_subgroup(g.generator(), l);
        Ok(orbits_under(&self.lagrangian_subgroups(), &[&step]))
    }

    /// `⟨ι⟩ \ L(A) / G`, as orbits of the group generated by `ι` and `G`.
    pub fn double_quotient(&self, g: &GSpec<T>) -> Result<Vec<Orbit<LagrangianSubgroup<T>>>> {
        self.check_g(g)?;
        let step = |l: &LagrangianSubgroup<T>| self.act_on_subgroup(g.generator(), l);
        let iota = |l: &LagrangianSubgroup<T>| self.involution(l);
        Ok(orbits_under(&self.lagrangian_subgroups(), &[&step, &iota]))
    }
}

impl<T: Scalar> fmt::Display for LagrangianSubgroup<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.generator)?;
        if !self.selector.is_empty() {
            let parts: Vec<String> = self.selector.iter().map(|(p, c)| format!("{p}:{c}")).collect();
            write!(f, " [{}]", parts.join(" "))?;
        }
        Ok(())
    }
}
