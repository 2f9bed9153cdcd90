//! Even integral lattices, the rank-2 family `Λ_{d,t}`, overlattices and
//! isometries between members of the family.
//!
//! `Λ_{d,t}` has basis `H, F` with Gram matrix `[[2d, t], [t, 0]]`. Vectors are
//! written in that basis throughout, `H` first.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;

use crate::arith::{exact_sqrt, modulo};
use crate::budget::Budget;
use crate::discforms::FiniteQuadForm;
use crate::error::{Error, Result};
use crate::matrix::{row_span_basis, IntMatrix};
use crate::scalar::{int, Scalar};

/// A vector of `L ⊗ ℚ` in the coordinates of a lattice basis.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct RationalVector<T: Clone + Integer> {
    pub coords: Vec<Ratio<T>>,
}

impl<T: Scalar> RationalVector<T> {
    pub fn new(coords: Vec<Ratio<T>>) -> Self {
        RationalVector { coords }
    }

    pub fn from_integers(coords: &[T]) -> Self {
        RationalVector {
            coords: coords.iter().cloned().map(Ratio::from_integer).collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        RationalVector {
            coords: vec![Ratio::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        RationalVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Ratio<T>) -> Self {
        RationalVector {
            coords: self.coords.iter().map(|a| a * c).collect(),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(Ratio::is_integer)
    }

    /// Least common denominator of the coordinates.
    pub fn denominator(&self) -> T {
        self.coords
            .iter()
            .fold(T::one(), |acc, c| acc.lcm(c.denom()))
    }
}

impl<T: Scalar> fmt::Display for RationalVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// An even, nondegenerate, symmetric integral lattice given by its Gram matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Lattice<T> {
    gram: IntMatrix<T>,
    labels: Vec<String>,
}

impl<T: Scalar> Lattice<T> {
    pub fn new(gram: IntMatrix<T>, labels: Vec<String>) -> Result<Self> {
        if !gram.is_square() || gram.nrows() == 0 {
            return Err(Error::InvalidLattice("Gram matrix must be square and non-empty".into()));
        }
        if labels.len() != gram.nrows() {
            return Err(Error::InvalidLattice("one basis label per row required".into()));
        }
        if !gram.is_symmetric() {
            return Err(Error::InvalidLattice("Gram matrix is not symmetric".into()));
        }
        if (0..gram.nrows()).any(|i| gram[(i, i)].is_odd()) {
            return Err(Error::InvalidLattice("odd diagonal entry: lattice is not even".into()));
        }
        if gram.det().is_zero() {
            return Err(Error::InvalidLattice("degenerate Gram matrix".into()));
        }
        Ok(Lattice { gram, labels })
    }

    /// Lattice with default labels `e1, e2, …`.
    pub fn from_gram(gram: IntMatrix<T>) -> Result<Self> {
        let labels = (1..=gram.nrows()).map(|i| format!("e{i}")).collect();
        Self::new(gram, labels)
    }

    pub fn gram(&self) -> &IntMatrix<T> {
        &self.gram
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn det(&self) -> T {
        self.gram.det()
    }

    /// Rational bilinear form `x · y`.
    pub fn pair(&self, x: &RationalVector<T>, y: &RationalVector<T>) -> Ratio<T> {
        let n = self.rank();
        let mut acc = Ratio::zero();
        for i in 0..n {
            if x.coords[i].is_zero() {
                continue;
            }
            for j in 0..n {
                acc = acc
                    + x.coords[i].clone()
                        * Ratio::from_integer(self.gram[(i, j)].clone())
                        * y.coords[j].clone();
            }
        }
        acc
    }

    pub fn square(&self, x: &RationalVector<T>) -> Ratio<T> {
        self.pair(x, x)
    }

    /// Pairings of `x` with every basis vector.
    pub fn pairings_with_basis(&self, x: &RationalVector<T>) -> Vec<Ratio<T>> {
        (0..self.rank())
            .map(|i| {
                (0..self.rank()).fold(Ratio::zero(), |acc, j| {
                    acc + Ratio::from_integer(self.gram[(i, j)].clone()) * x.coords[j].clone()
                })
            })
            .collect()
    }

    /// `x ∈ L*`, i.e. `x · y ∈ ℤ` for every `y ∈ L`.
    pub fn is_in_dual(&self, x: &RationalVector<T>) -> bool {
        x.dim() == self.rank() && self.pairings_with_basis(x).iter().all(Ratio::is_integer)
    }
}

impl<T: Scalar> fmt::Display for Lattice<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over ({})", self.gram, self.labels.join(", "))
    }
}

/// The Néron–Severi lattice `Λ_{d,t}` of a Picard rank 2 elliptic K3.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NsLattice<T> {
    d: T,
    t: T,
    m: T,
}

impl<T: Scalar> NsLattice<T> {
    pub fn d(&self) -> &T {
        &self.d
    }

    pub fn t(&self) -> &T {
        &self.t
    }

    /// `gcd(d, t)`.
    pub fn m(&self) -> &T {
        &self.m
    }

    pub fn gram(&self) -> IntMatrix<T> {
        let two: T = int(2);
        IntMatrix::from_rows(vec![
            vec![two * self.d.clone(), self.t.clone()],
            vec![self.t.clone(), T::zero()],
        ])
    }

    pub fn lattice(&self) -> Lattice<T> {
        Lattice::new(self.gram(), vec!["H".into(), "F".into()])
            .expect("Λ_{d,t} is even and nondegenerate for t ≥ 1")
    }

    pub fn det(&self) -> T {
        -(self.t.clone() * self.t.clone())
    }

    /// `(x H + y F)² = 2d x² + 2t x y`.
    pub fn square_int(&self, x: &T, y: &T) -> T {
        let two: T = int(2);
        two * x.clone() * (self.d.clone() * x.clone() + self.t.clone() * y.clone())
    }
}

/// `Λ_{d,t}`; fails unless `t ≥ 1`.
pub fn ns_gram<T: Scalar>(d: T, t: T) -> Result<NsLattice<T>> {
    if t < T::one() {
        return Err(Error::InvalidParameter(format!(
            "multisection index t must be ≥ 1, got {t}"
        )));
    }
    let m = d.gcd(&t);
    Ok(NsLattice { d, t, m })
}

fn ratio<T: Scalar>(n: T, d: T) -> Ratio<T> {
    Ratio::new(n, d)
}

/// Dual basis `(F*, H*)` with `F* = (1/t)H − (2d/t²)F`, `H* = (1/t)F`.
pub fn dual_generators<T: Scalar>(ns: &NsLattice<T>) -> (RationalVector<T>, RationalVector<T>) {
    let t = ns.t.clone();
    let two: T = int(2);
    let fstar = RationalVector::new(vec![
        ratio(T::one(), t.clone()),
        ratio(-(two * ns.d.clone()), t.clone() * t.clone()),
    ]);
    let hstar = RationalVector::new(vec![Ratio::zero(), ratio(T::one(), t)]);
    (fstar, hstar)
}

/// The two primitive isotropic vectors `F` and `F′ = (tH − dF)/gcd(d,t)`.
pub fn isotropic_rays<T: Scalar>(ns: &NsLattice<T>) -> (RationalVector<T>, RationalVector<T>) {
    let f = RationalVector::from_integers(&[T::zero(), T::one()]);
    let fp = RationalVector::from_integers(&[
        ns.t.clone() / ns.m.clone(),
        -(ns.d.clone() / ns.m.clone()),
    ]);
    (f, fp)
}

fn isotropic_rays_int<T: Scalar>(ns: &NsLattice<T>) -> [(T, T); 2] {
    [
        (T::zero(), T::one()),
        (ns.t.clone() / ns.m.clone(), -(ns.d.clone() / ns.m.clone())),
    ]
}

/// An overlattice `T ⊂ L` together with the basis of `L` written in the
/// coordinates of `T`.
#[derive(Clone, Debug)]
pub struct Overlattice<T: Scalar> {
    pub lattice: Lattice<T>,
    pub basis: Vec<RationalVector<T>>,
    /// `[L : T] = |H|`.
    pub index: T,
}

/// Builds the overlattice of `base` corresponding to the isotropic subgroup
/// of `A_base` generated by the classes of `generators`.
///
/// Generators are rational vectors in the basis of `base`. Each must lie in
/// the dual lattice, have even square and pair integrally with the others;
/// the span of `base` and the generators is then an even overlattice.
pub fn overlattice<T: Scalar>(
    base: &Lattice<T>,
    generators: &[RationalVector<T>],
) -> Result<Overlattice<T>> {
    let n = base.rank();
    for (i, g) in generators.iter().enumerate() {
        if g.dim() != n {
            return Err(Error::InvalidElement(format!(
                "generator {i} has {} coordinates, lattice rank is {n}",
                g.dim()
            )));
        }
        if !base.is_in_dual(g) {
            return Err(Error::InvalidElement(format!(
                "generator {g} is not in the dual lattice"
            )));
        }
        let q = base.square(g);
        if !(q.is_integer() && q.to_integer().is_even()) {
            return Err(Error::InvalidSubgroup(format!(
                "generator {g} is not isotropic (square {q})"
            )));
        }
        for h in &generators[..i] {
            let b = base.pair(g, h);
            if !b.is_integer() {
                return Err(Error::InvalidSubgroup(format!(
                    "generators {h} and {g} pair to {b}, subgroup is not isotropic"
                )));
            }
        }
    }

    let denom = generators
        .iter()
        .fold(T::one(), |acc, g| acc.lcm(&g.denominator()));
    let mut rows: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { denom.clone() } else { T::zero() })
                .collect()
        })
        .collect();
    for g in generators {
        rows.push(
            g.coords
                .iter()
                .map(|c| (c * Ratio::from_integer(denom.clone())).to_integer())
                .collect(),
        );
    }
    let basis_int = row_span_basis(&rows);
    debug_assert_eq!(basis_int.len(), n);
    let basis: Vec<RationalVector<T>> = basis_int
        .iter()
        .map(|row| {
            RationalVector::new(
                row.iter()
                    .map(|x| Ratio::new(x.clone(), denom.clone()))
                    .collect(),
            )
        })
        .collect();

    let mut gram = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = base.pair(&basis[i], &basis[j]);
            debug_assert!(v.is_integer());
            gram[(i, j)] = v.to_integer();
        }
    }
    // [L : T] = denomⁿ / |det(basis_int)|
    let det_b = IntMatrix::from_rows(basis_int).det().abs();
    let index = crate::arith::pow(&denom, n as u32) / det_b;
    let lattice = Lattice::from_gram(gram)?;
    Ok(Overlattice {
        lattice,
        basis,
        index,
    })
}

/// Isometries `Λ_{d,t} → Λ_{e,s}` as 2×2 integer matrices whose columns are
/// the images of `H` and `F`.
///
/// An isometry sends `F` to a primitive isotropic vector, so to one of
/// `±F, ±F′` of the target. For each choice the image `xH + yF` of `H` is
/// pinned by `(xH + yF)·img(F) = t` (a line of solutions) and by
/// `(xH + yF)² = 2d` (a quadratic along that line); both are solved exactly.
pub fn rank2_isometries<T: Scalar>(
    source: &NsLattice<T>,
    target: &NsLattice<T>,
) -> Vec<IntMatrix<T>> {
    let mut found = BTreeSet::new();
    if source.t != target.t {
        return Vec::new();
    }
    let g = target.gram();
    let two_d: T = int::<T>(2) * source.d.clone();
    let t = source.t.clone();
    for (fx, fy) in isotropic_rays_int(target) {
        for sign in [T::one(), -T::one()] {
            let f = (sign.clone() * fx.clone(), sign * fy.clone());
            // (a, b) = Gram · f, constraint a x + b y = t
            let a = g[(0, 0)].clone() * f.0.clone() + g[(0, 1)].clone() * f.1.clone();
            let b = g[(1, 0)].clone() * f.0.clone() + g[(1, 1)].clone() * f.1.clone();
            let eg = a.extended_gcd(&b);
            let gg = eg.gcd.clone();
            if gg.is_zero() || !t.is_multiple_of(&gg) {
                continue;
            }
            let scale = t.clone() / gg.clone();
            let x0 = eg.x.clone() * scale.clone();
            let y0 = eg.y.clone() * scale;
            let dx = b.clone() / gg.clone();
            let dy = -(a.clone() / gg);
            // Q(x0 + k dx, y0 + k dy) = α k² + β k + γ
            let q = |x: &T, y: &T| target.square_int(x, y);
            let bil = |x1: &T, y1: &T, x2: &T, y2: &T| {
                g[(0, 0)].clone() * x1.clone() * x2.clone()
                    + g[(0, 1)].clone() * (x1.clone() * y2.clone() + y1.clone() * x2.clone())
                    + g[(1, 1)].clone() * y1.clone() * y2.clone()
            };
            let alpha = q(&dx, &dy);
            let beta = int::<T>(2) * bil(&x0, &y0, &dx, &dy);
            let gamma = q(&x0, &y0) - two_d.clone();
            for k in integer_roots(&alpha, &beta, &gamma) {
                let x = x0.clone() + k.clone() * dx.clone();
                let y = y0.clone() + k * dy.clone();
                let m = IntMatrix::from_rows(vec![
                    vec![x.clone(), f.0.clone()],
                    vec![y.clone(), f.1.clone()],
                ]);
                if m.det().abs().is_one() {
                    found.insert(m.to_rows());
                }
            }
        }
    }
    found.into_iter().map(IntMatrix::from_rows).collect()
}

/// Integer roots of `α k² + β k + γ = 0`. The identically-zero polynomial
/// has no isolated roots and yields none.
fn integer_roots<T: Scalar>(alpha: &T, beta: &T, gamma: &T) -> Vec<T> {
    if alpha.is_zero() {
        if beta.is_zero() {
            return Vec::new();
        }
        return if gamma.is_multiple_of(beta) {
            vec![-(gamma.clone() / beta.clone())]
        } else {
            Vec::new()
        };
    }
    let disc = beta.clone() * beta.clone() - int::<T>(4) * alpha.clone() * gamma.clone();
    let Some(s) = exact_sqrt(&disc) else {
        return Vec::new();
    };
    let two_a = int::<T>(2) * alpha.clone();
    let mut out = Vec::new();
    for num in [-beta.clone() + s.clone(), -beta.clone() - s] {
        if num.is_multiple_of(&two_a) {
            let r = num / two_a.clone();
            if !out.contains(&r) {
                out.push(r);
            }
        }
    }
    out
}

/// Full isometry group `O(Λ_{d,t})` (at most 8 elements).
pub fn ns_automorphisms<T: Scalar>(ns: &NsLattice<T>) -> Vec<IntMatrix<T>> {
    rank2_isometries(ns, ns)
}

/// Whether `Λ_{d,t} ≅ Λ_{e,t}`.
pub fn is_isometric_rank2<T: Scalar>(d: T, e: T, t: T) -> Result<bool> {
    let a = ns_gram(d, t.clone())?;
    let b = ns_gram(e, t)?;
    Ok(!rank2_isometries(&a, &b).is_empty())
}

/// One `e ∈ [0, t)` per isometry class in the genus of `Λ_{d,t}`, each the
/// least member of its class.
///
/// Candidates share `gcd(2e, t)` with `d`, must have a discriminant form
/// isometric to that of `Λ_{d,t}`, and are deduplicated by lattice isometry.
pub fn genus_representatives<T: Scalar>(d: T, t: T, budget: &Budget) -> Result<Vec<T>> {
    let ns = ns_gram(d.clone(), t.clone())?;
    let two: T = int(2);
    let target_gcd = (two.clone() * d).gcd(&t);
    let base_form = FiniteQuadForm::from_lattice(&ns.lattice())?;
    let mut reps: Vec<T> = Vec::new();
    let mut e = T::zero();
    while e < t {
        if (two.clone() * e.clone()).gcd(&t) == target_gcd {
            let other = ns_gram(e.clone(), t.clone())?;
            let form = FiniteQuadForm::from_lattice(&other.lattice())?;
            if crate::discforms::isometry_between(&base_form, &form, budget)?.is_some() {
                let mut new_class = true;
                for r in &reps {
                    if is_isometric_rank2(r.clone(), e.clone(), t.clone())? {
                        new_class = false;
                        break;
                    }
                }
                if new_class {
                    reps.push(e.clone());
                }
            }
        }
        e = e + T::one();
    }
    Ok(reps)
}

/// `d` reduced into `[0, t)`.
pub fn normalize_d<T: Scalar>(d: &T, t: &T) -> T {
    modulo(d, t)
}
