//! Surface-level counts for an elliptic K3 surface `X` with `NS(X) ≅ Λ_{d,t}`:
//! Jacobians, Căldăraru classes, fibrations, automorphisms, derived elliptic
//! structures, Fourier–Mukai partners and the Hassett–Tschinkel trichotomy.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;

use crate::arith::{euler_phi, factorize, is_prime, mod_inv, modulo, omega, pow2, units};
use crate::budget::Budget;
use crate::discforms::{isometry_between, isometry_group, transport, DFElement, DFIsometry};
use crate::error::{Error, Result};
use crate::lagrangians::{orbits_under, GSpec, NsDiscriminant, Step};
use crate::lattices::{genus_representatives, ns_automorphisms, ns_gram, NsLattice, RationalVector};
use crate::scalar::{int, to_u64_sat, Scalar};

fn require_t<T: Scalar>(t: &T) -> Result<()> {
    if *t < T::one() {
        return Err(Error::InvalidParameter(format!("t must be ≥ 1, got {t}")));
    }
    Ok(())
}

/// `ind(J^k(X)) = t / gcd(t, k)`.
pub fn jacobian_index<T: Scalar>(t: &T, k: &T) -> Result<T> {
    require_t(t)?;
    Ok(t.clone() / t.gcd(k))
}

/// `J^k(J^ℓ(X)) ≅ J^{kℓ}(X)`.
pub fn jacobian_compose<T: Scalar>(k: &T, l: &T, t: &T) -> Result<T> {
    require_t(t)?;
    Ok(modulo(&(k.clone() * l.clone()), t))
}

/// Representative of `k` modulo `J^{k+t} ≅ J^k ≅ J^{−k}`.
pub fn jacobian_class_canonical<T: Scalar>(k: &T, t: &T) -> Result<T> {
    require_t(t)?;
    let a = modulo(k, t);
    let b = modulo(&-k.clone(), t);
    Ok(a.min(b))
}

/// A subgroup of `(ℤ/t)*`, stored as its sorted elements.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct UnitSubgroup<T> {
    t: T,
    elements: Vec<T>,
}

impl<T: Scalar> UnitSubgroup<T> {
    /// Subgroup generated by `gens`.
    pub fn generated_by(t: &T, gens: &[T]) -> Result<Self> {
        require_t(t)?;
        let mut set = BTreeSet::from([modulo(&T::one(), t)]);
        for g in gens {
            if mod_inv(g, t).is_none() {
                return Err(Error::InvalidUnitGroup(format!("{g} is not a unit modulo {t}")));
            }
        }
        let mut frontier: Vec<T> = set.iter().cloned().collect();
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = modulo(&(x.clone() * g.clone()), t);
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        Ok(UnitSubgroup {
            t: t.clone(),
            elements: set.into_iter().collect(),
        })
    }

    /// `{±1}`.
    pub fn sign(t: &T) -> Result<Self> {
        Self::generated_by(t, &[-T::one()])
    }

    /// The cyclic subgroup of `(ℤ/t)*` of the given order containing `−1`,
    /// if there is exactly one candidate generator class.
    pub fn cyclic_of_order(t: &T, order: u64) -> Result<Self> {
        require_t(t)?;
        let mut found: Option<Self> = None;
        for u in units(t) {
            if crate::arith::unit_order(&u, t) == order {
                let g = Self::generated_by(t, &[u])?;
                if g.contains(&-T::one()) {
                    if let Some(prev) = &found {
                        if *prev != g {
                            return Err(Error::InvalidUnitGroup(format!(
                                "(Z/{t})* has several cyclic subgroups of order {order} containing -1; give a generator"
                            )));
                        }
                    }
                    found = Some(g);
                }
            }
        }
        found.ok_or_else(|| {
            Error::InvalidUnitGroup(format!(
                "(Z/{t})* has no cyclic subgroup of order {order} containing -1"
            ))
        })
    }

    pub fn t(&self) -> &T {
        &self.t
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, k: &T) -> bool {
        self.elements.binary_search(&modulo(k, &self.t)).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Self) -> bool {
        self.t == other.t && self.elements.iter().all(|x| other.contains(x))
    }

    pub fn is_cyclic(&self) -> bool {
        self.elements
            .iter()
            .any(|x| crate::arith::unit_order(x, &self.t) == self.order() as u64)
    }
}

/// Number of coprime Jacobians `J^k(X)` up to isomorphism over `ℙ¹`, which
/// is `φ(t)/|B|`, with the least member of each coset of `B` as representative.
pub fn coprime_jacobian_classes<T: Scalar>(t: &T, b: &UnitSubgroup<T>) -> Result<(T, Vec<T>)> {
    require_t(t)?;
    if *t <= int(2) {
        return Err(Error::OutOfScope(format!(
            "coprime Jacobian classes need t > 2, got t = {t}"
        )));
    }
    if b.t() != t {
        return Err(Error::InvalidUnitGroup(format!(
            "B lives in (Z/{})*, expected (Z/{t})*",
            b.t()
        )));
    }
    if !b.contains(&-T::one()) {
        return Err(Error::InvalidUnitGroup("B must contain -1".into()));
    }
    let mut seen = BTreeSet::new();
    let mut reps = Vec::new();
    for u in units(t) {
        if seen.contains(&u) {
            continue;
        }
        reps.push(u.clone());
        for x in b.elements() {
            seen.insert(modulo(&(u.clone() * x.clone()), t));
        }
    }
    let count = euler_phi(t) / T::from_usize(b.order()).expect("small");
    debug_assert_eq!(T::from_usize(reps.len()), Some(count.clone()));
    Ok((count, reps))
}

/// Whether a `j`-special torsor with `B ≅ ℤ/h` exists at index `p`:
/// `p ≡ 1 mod 4` for `h = 4`, `p ≡ 1 mod 3` for `h = 6`.
pub fn jspecial_torsor_exists<T: Scalar>(p: &T, h: u32) -> Result<bool> {
    if !is_prime(p) || *p == int(2) {
        return Err(Error::InvalidParameter(format!("{p} is not an odd prime")));
    }
    let modulus: T = match h {
        4 => int(4),
        6 => int(3),
        _ => return Err(Error::InvalidParameter(format!("h must be 4 or 6, got {h}"))),
    };
    Ok(modulo(p, &modulus) == T::one())
}

/// Mukai vector `(r, D, s)` with `D = xH + yF`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MukaiVector<T> {
    pub r: T,
    pub x: T,
    pub y: T,
    pub s: T,
}

impl<T: Scalar> MukaiVector<T> {
    pub fn new(r: T, x: T, y: T, s: T) -> Self {
        MukaiVector { r, x, y, s }
    }

    /// `v² = D² − 2rs`.
    pub fn square(&self, ns: &NsLattice<T>) -> T {
        ns.square_int(&self.x, &self.y) - int::<T>(2) * self.r.clone() * self.s.clone()
    }

    pub fn is_primitive(&self) -> bool {
        [&self.x, &self.y, &self.s]
            .into_iter()
            .fold(self.r.clone(), |g, a| g.gcd(a))
            .is_one()
    }

    /// `gcd(r, s, D·H, D·F)`, the divisibility of `v` in the Mukai lattice,
    /// with `D·H = 2dx + ty` and `D·F = tx`.
    pub fn divisibility(&self, ns: &NsLattice<T>) -> T {
        let dh = int::<T>(2) * ns.d().clone() * self.x.clone() + ns.t().clone() * self.y.clone();
        let df = ns.t().clone() * self.x.clone();
        [&self.s, &dh, &df]
            .into_iter()
            .fold(self.r.clone(), |g, a| g.gcd(a))
    }
}

impl<T: Scalar> fmt::Display for MukaiVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}H + {}F, {})", self.r, self.x, self.y, self.s)
    }
}

/// The Căldăraru class `−D/t_v` in `A_{d,t}` of the moduli space `M(v)`.
pub fn caldararu_class<T: Scalar>(disc: &NsDiscriminant<T>, v: &MukaiVector<T>) -> Result<DFElement<T>> {
    let ns = disc.ns();
    if !v.is_primitive() {
        return Err(Error::InvalidMukaiVector(format!("{v} is not primitive")));
    }
    let sq = v.square(ns);
    if !sq.is_zero() {
        return Err(Error::InvalidMukaiVector(format!("{v} has v² = {sq}, expected 0")));
    }
    let div = v.divisibility(ns);
    let scale = Ratio::new(-T::one(), div);
    let d = RationalVector::from_integers(&[v.x.clone(), v.y.clone()]).scale(&scale);
    disc.presentation().reduce(&d)
}

/// Number of elliptic fibrations on `X`: one iff `d ≡ −1 mod t`.
pub fn fibration_count<T: Scalar>(d: &T, t: &T) -> Result<u32> {
    require_t(t)?;
    Ok(if modulo(&(d.clone() + T::one()), t).is_zero() {
        1
    } else {
        2
    })
}

/// Whether the two fibrations are isomorphic: `d ≡ 1 mod t`, valid for
/// T-general `X` with `t > 2` and two fibrations.
pub fn fibrations_isomorphic<T: Scalar>(d: &T, t: &T, t_general: bool) -> Result<bool> {
    require_t(t)?;
    if !t_general || *t <= int(2) || fibration_count(d, t)? != 2 {
        return Err(Error::NotApplicable(
            "needs a T-general surface with t > 2 and d ≢ -1 mod t".into(),
        ));
    }
    Ok(modulo(&(d.clone() - T::one()), t).is_zero())
}

/// Possible orders of `G_X` when `rk T(X) = rk`: even `n` with `φ(n) | rk`.
pub fn allowed_g_orders(rk: u64) -> Vec<u64> {
    // φ(n) ≥ √(n/2), so φ(n) ≤ rk forces n ≤ 2·rk².
    let bound = 2 * rk * rk + 2;
    (2..=bound)
        .step_by(2)
        .filter(|n| {
            let phi = euler_phi(&(*n as i64)) as u64;
            rk.is_multiple_of(phi)
        })
        .collect()
}

/// Images in `O(A)` of the ample-cone preserving isometries of `Λ_{d,t}`:
/// the identity and, when `F′` is a fibre class, the isometry taking `F` to `F′`.
pub fn o_plus_image<T: Scalar>(disc: &NsDiscriminant<T>) -> Result<Vec<DFIsometry<T>>> {
    let a = disc.form();
    let mut out = vec![DFIsometry::identity(a)];
    let ns = disc.ns();
    if fibration_count(ns.d(), ns.t())? == 2 {
        let (_, fp) = crate::lattices::isotropic_rays(ns);
        for m in ns_automorphisms(ns) {
            let img_f = RationalVector::from_integers(&m.column(1));
            if img_f == fp {
                let bar = disc.presentation().induced_isometry(&m)?;
                if !out.contains(&bar) {
                    out.push(bar);
                }
            }
        }
    }
    Ok(out)
}

/// `(|Aut(X)|, |Aut(X, F)|)`: the kernel of `G → O(A)/O⁺(NS)` and of `G → O(A)`.
pub fn aut_orders<T: Scalar>(disc: &NsDiscriminant<T>, g: &GSpec<T>) -> Result<(u64, u64)> {
    let a = disc.form();
    g.generator().validate(a)?;
    let o_plus = o_plus_image(disc)?;
    let n = g.order();
    let mut aut = 0;
    let mut cur = DFIsometry::identity(a);
    for _ in 0..n {
        if o_plus.contains(&cur) {
            aut += 1;
        }
        cur = g.generator().compose(a, &cur);
    }
    Ok((aut, g.kernel_order(a)))
}

/// Isotriviality type of the fibration, constraining `B`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum JInvariant {
    Generic,
    J0,
    J1728,
}

/// The data of one surface that the counting formulas consume.
#[derive(Clone, Debug)]
pub struct SurfaceModel<T: Scalar> {
    disc: NsDiscriminant<T>,
    g: GSpec<T>,
    b: UnitSubgroup<T>,
    b_tilde: UnitSubgroup<T>,
    t_general: bool,
    j: JInvariant,
}

impl<T: Scalar> SurfaceModel<T> {
    /// A T-general surface: `G = {±id}`, `B = B̃ = {±1}`.
    pub fn t_general(d: T, t: T) -> Result<Self> {
        let disc = NsDiscriminant::new(d, t.clone())?;
        let g = GSpec::t_general(disc.form());
        let b = UnitSubgroup::sign(&t)?;
        Ok(SurfaceModel {
            disc,
            g,
            b: b.clone(),
            b_tilde: b,
            t_general: true,
            j: JInvariant::Generic,
        })
    }

    pub fn new(
        disc: NsDiscriminant<T>,
        g: GSpec<T>,
        b: UnitSubgroup<T>,
        b_tilde: UnitSubgroup<T>,
        t_general: bool,
        j: JInvariant,
    ) -> Result<Self> {
        let t = disc.t().clone();
        if b.t() != &t || b_tilde.t() != &t {
            return Err(Error::InvalidUnitGroup("B and B~ must live in (Z/t)*".into()));
        }
        if !b.contains(&-T::one()) {
            return Err(Error::InvalidUnitGroup("B must contain -1".into()));
        }
        if !b.is_subgroup_of(&b_tilde) {
            return Err(Error::InvalidUnitGroup("B must be contained in B~".into()));
        }
        let sign_order = UnitSubgroup::sign(&t)?.order();
        let ok_order = match b.order() {
            n if n == sign_order => true,
            4 => j == JInvariant::J1728,
            6 => j == JInvariant::J0,
            _ => false,
        };
        if !ok_order || !b.is_cyclic() {
            return Err(Error::InvalidUnitGroup(format!(
                "B of order {} is not allowed for j-type {j:?}",
                b.order()
            )));
        }
        if t_general {
            if !(g.order() == 2 && g.acts_as_sign(disc.form())) {
                return Err(Error::InvalidParameter("a T-general surface has G = {±id}".into()));
            }
            if b.order() != sign_order || b_tilde.order() != sign_order {
                return Err(Error::InvalidUnitGroup("a T-general surface has B = B~ = {±1}".into()));
            }
        }
        g.generator().validate(disc.form())?;
        Ok(SurfaceModel {
            disc,
            g,
            b,
            b_tilde,
            t_general,
            j,
        })
    }

    pub fn disc(&self) -> &NsDiscriminant<T> {
        &self.disc
    }

    pub fn g(&self) -> &GSpec<T> {
        &self.g
    }

    pub fn b(&self) -> &UnitSubgroup<T> {
        &self.b
    }

    pub fn b_tilde(&self) -> &UnitSubgroup<T> {
        &self.b_tilde
    }

    pub fn is_t_general(&self) -> bool {
        self.t_general
    }

    pub fn j(&self) -> JInvariant {
        self.j
    }
}

/// Derived elliptic structures: `|L̃/G|` and the number of `G`-orbits of
/// Lagrangian subgroups.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DeCounts<T> {
    pub de: T,
    pub de_orbits: T,
}

/// `2^{ω(m)−1}·φ(t)` and `2^{ω(m)}`, for `G = {±id}` and `t > 2`.
pub fn de_closed_form<T: Scalar>(d: &T, t: &T) -> Result<DeCounts<T>> {
    let ns = ns_gram(d.clone(), t.clone())?;
    if *t <= int(2) {
        return Err(Error::NotApplicable("the closed form needs t > 2".into()));
    }
    let orbits: T = pow2(omega(ns.m()));
    Ok(DeCounts {
        de: orbits.clone() * euler_phi(t) / int(2),
        de_orbits: orbits,
    })
}

/// DE counts for `G = {±id}` from the Lagrangian counts alone, any `t`.
pub fn de_counts_for_sign<T: Scalar>(d: &T, t: &T) -> Result<DeCounts<T>> {
    let (elements, subgroups) = crate::lagrangians::count_lagrangians(d, t)?;
    // −1 fixes every subgroup, and is free on generators of order t > 2.
    let de = if *t > int(2) { elements / int(2) } else { elements };
    Ok(DeCounts {
        de,
        de_orbits: subgroups,
    })
}

/// DE counts by orbit enumeration, or by the closed form when `G` acts by
/// sign and `t` is beyond the element budget.
pub fn de_counts<T: Scalar>(model: &SurfaceModel<T>, budget: &Budget) -> Result<DeCounts<T>> {
    let disc = model.disc();
    let g = model.g();
    let t = disc.t();
    if to_u64_sat(t) > budget.max_element_t && g.acts_as_sign(disc.form()) {
        return de_counts_for_sign(disc.ns().d(), t);
    }
    let els = disc.lagrangian_elements(budget)?;
    let de = disc.element_orbits(&els, g)?.len();
    let de_orbits = disc.subgroup_orbits(g)?.len();
    Ok(DeCounts {
        de: T::from_usize(de).expect("fits"),
        de_orbits: T::from_usize(de_orbits).expect("fits"),
    })
}

/// Where the Fourier–Mukai partners of `X` are found.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum HTClass {
    /// `m = 1`: every partner is a coprime Jacobian of the one fibration class.
    SingleFibrationCovers,
    /// `m` a prime power: coprime Jacobians of the two fibrations cover all.
    TwoFibrationsCover,
    /// Some partner is not a coprime Jacobian of either fibration.
    NonJacobianPartnersExist,
    /// `2 ≤ ω(m) ≤ 6` and `X` not T-general.
    Inconclusive,
}

impl HTClass {
    pub fn name(self) -> &'static str {
        match self {
            HTClass::SingleFibrationCovers => "SingleFibrationCovers",
            HTClass::TwoFibrationsCover => "TwoFibrationsCover",
            HTClass::NonJacobianPartnersExist => "NonJacobianPartnersExist",
            HTClass::Inconclusive => "Inconclusive",
        }
    }
}

impl fmt::Display for HTClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn ht_classify<T: Scalar>(d: &T, t: &T, t_general: bool) -> Result<HTClass> {
    let ns = ns_gram(d.clone(), t.clone())?;
    let w = factorize(ns.m()).len();
    Ok(match w {
        0 => HTClass::SingleFibrationCovers,
        1 => HTClass::TwoFibrationsCover,
        _ if t_general || w >= 7 => HTClass::NonJacobianPartnersExist,
        _ => HTClass::Inconclusive,
    })
}

/// `|FM(X)| = Σ_Λ |O(Λ) \ O(A_Λ) / G|`, summed over the genus of `Λ_{d,t}`.
pub fn fm_count<T: Scalar>(d: &T, t: &T, g: &GSpec<T>, budget: &Budget) -> Result<T> {
    let total: usize = fm_contributions(d, t, g, budget)?.iter().map(|(_, n)| n).sum();
    Ok(T::from_usize(total).expect("fits"))
}

/// One `(e, |O(Λ_{e,t}) \ O(A_{e,t}) / G|)` per genus representative.
///
/// `G` is given on `A_{d,t}` and carried to each `A_{e,t}` by an isometry of
/// discriminant forms; the count does not depend on that choice.
pub fn fm_contributions<T: Scalar>(d: &T, t: &T, g: &GSpec<T>, budget: &Budget) -> Result<Vec<(T, usize)>> {
    let base = NsDiscriminant::new(d.clone(), t.clone())?;
    let a = base.form();
    g.generator().validate(a)?;
    let g_image = g.image(a);
    let mut out = Vec::new();
    for e in genus_representatives(d.clone(), t.clone(), budget)? {
        let other = NsDiscriminant::new(e.clone(), t.clone())?;
        let b = other.form();
        let tau = isometry_between(a, b, budget)?.expect("genus members have isometric forms");
        let g_e: Vec<DFIsometry<T>> = g_image.iter().map(|s| transport(a, b, &tau, s)).collect();
        let k = lattice_image(&other)?;
        let group = isometry_group(b, budget)?;
        out.push((e, double_coset_count(b, &group, &k, &g_e)));
    }
    Ok(out)
}

/// Image of `O(Λ_{e,t})` in `O(A_{e,t})`.
pub fn lattice_image<T: Scalar>(disc: &NsDiscriminant<T>) -> Result<Vec<DFIsometry<T>>> {
    let mut out = Vec::new();
    for m in ns_automorphisms(disc.ns()) {
        let bar = disc.presentation().induced_isometry(&m)?;
        if !out.contains(&bar) {
            out.push(bar);
        }
    }
    Ok(out)
}

/// `|K \ O / H|` for subgroups `K`, `H` of `O`.
pub fn double_coset_count<T: Scalar>(
    form: &crate::discforms::FiniteQuadForm<T>,
    group: &[DFIsometry<T>],
    k: &[DFIsometry<T>],
    h: &[DFIsometry<T>],
) -> usize {
    let left: Vec<Box<Step<'_, DFIsometry<T>>>> = k
        .iter()
        .map(|kk| Box::new(move |x: &DFIsometry<T>| kk.compose(form, x)) as Box<Step<'_, _>>)
        .collect();
    let right: Vec<Box<Step<'_, DFIsometry<T>>>> = h
        .iter()
        .map(|hh| Box::new(move |x: &DFIsometry<T>| x.compose(form, hh)) as Box<Step<'_, _>>)
        .collect();
    let steps: Vec<&Step<'_, DFIsometry<T>>> = left.iter().chain(right.iter()).map(|b| b.as_ref()).collect();
    orbits_under(group, &steps).len()
}

/// `k` with `(X, g) ≅ J^k(X, f)`: `d⁻¹ mod t`, when `m = 1` and `X` has two
/// fibrations.
pub fn second_fibration_jacobian<T: Scalar>(d: &T, t: &T) -> Result<T> {
    if fibration_count(d, t)? != 2 {
        return Err(Error::NotApplicable(format!(
            "d ≡ -1 mod {t}: the surface has a single elliptic fibration"
        )));
    }
    let inv = mod_inv(d, t).ok_or_else(|| {
        Error::NotApplicable(format!(
            "gcd(d, t) = {} ≠ 1: the two fibrations are not Jacobians of each other",
            d.gcd(t)
        ))
    })?;
    Ok(inv)
}

/// Whether the zeroth Jacobians of the two (non-isomorphic) fibrations agree:
/// iff `gcd(d, t) = 1`.
pub fn jac0_isomorphic<T: Scalar>(d: &T, t: &T) -> Result<bool> {
    require_t(t)?;
    let r = modulo(d, t);
    if r == modulo(&T::one(), t) || r == modulo(&-T::one(), t) {
        return Err(Error::NotApplicable(
            "needs two non-isomorphic fibrations, d ≢ ±1 mod t".into(),
        ));
    }
    Ok(d.gcd(t).is_one())
}
