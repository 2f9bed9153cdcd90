//! Finite quadratic forms `q: A → ℚ/2ℤ` with pairing `b: A × A → ℚ/ℤ`.
//!
//! A form is stored on its generators only: the cyclic orders, and the
//! values `q(gᵢ)`, `b(gᵢ, gⱼ)` as numerators over one common denominator `N`.
//! Every other value is derived. Elements are coordinate vectors reduced into
//! `[0, nᵢ)`, so equality and hashing are structural.
//!
//! Sign convention: everything here runs on `A_{NS} = A_{d,t}`. The
//! transcendental form `A_T` is `A_{NS}(-1)`; negating `q` changes neither
//! isotropy nor isometry groups, see [`FiniteQuadForm::negated`].

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::arith::{mod_inv, modulo};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattices::{Lattice, NsLattice, RationalVector};
use crate::matrix::{smith_normal_form, IntMatrix};
use crate::scalar::{int, to_u64_sat, Scalar};

/// Element of a finite quadratic form, in generator coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct DFElement<T> {
    pub coords: Vec<T>,
}

impl<T: Scalar> fmt::Display for DFElement<T> {
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

/// Reduces a rational into `[0, 2)`.
pub fn reduce_mod2<T: Scalar>(r: &Ratio<T>) -> Ratio<T> {
    let two = Ratio::from_integer(int::<T>(2));
    let k = (r / &two).floor();
    r - k * two
}

/// Reduces a rational into `[0, 1)`.
pub fn reduce_mod1<T: Scalar>(r: &Ratio<T>) -> Ratio<T> {
    r - r.floor()
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FiniteQuadForm<T> {
    orders: Vec<T>,
    denom: T,
    /// `q(gᵢ)·N` reduced mod `2N`.
    q_num: Vec<T>,
    /// `b(gᵢ, gⱼ)·N` reduced mod `N`.
    b_num: Vec<Vec<T>>,
}

impl<T: Scalar> FiniteQuadForm<T> {
    /// Builds a form from generator orders and values.
    ///
    /// Checks that the values are compatible with the orders, that `b` is
    /// symmetric with `b(g, g) ≡ q(g) mod ℤ`, and that the pairing is
    /// nondegenerate (by enumeration, so `|A|` must fit the default cap).
    pub fn new(orders: Vec<T>, q_gen: Vec<Ratio<T>>, b: Vec<Vec<Ratio<T>>>) -> Result<Self> {
        let r = orders.len();
        if q_gen.len() != r || b.len() != r || b.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidParameter("orders, q and b sizes disagree".into()));
        }
        if orders.iter().any(|n| *n < T::one()) {
            return Err(Error::InvalidParameter("generator orders must be ≥ 1".into()));
        }
        for i in 0..r {
            let n = Ratio::from_integer(orders[i].clone());
            if !(q_gen[i].clone() * n.clone()).is_integer()
                || !(q_gen[i].clone() * n.clone() * n.clone() / Ratio::from_integer(int(2)))
                    .is_integer()
            {
                return Err(Error::InvalidParameter(format!(
                    "q(g{i}) = {} is incompatible with order {}",
                    q_gen[i], orders[i]
                )));
            }
            if reduce_mod1(&(b[i][i].clone() - q_gen[i].clone())) != Ratio::zero() {
                return Err(Error::InvalidParameter(format!(
                    "b(g{i}, g{i}) must agree with q(g{i}) mod 1"
                )));
            }
            for (j, bij) in b[i].iter().enumerate() {
                if reduce_mod1(&(bij.clone() - b[j][i].clone())) != Ratio::zero() {
                    return Err(Error::InvalidParameter("pairing is not symmetric".into()));
                }
                if !(bij.clone() * n.clone()).is_integer() {
                    return Err(Error::InvalidParameter(format!(
                        "b(g{i}, g{j}) is incompatible with order {}",
                        orders[i]
                    )));
                }
            }
        }
        let form = Self::from_values(orders, &q_gen, &b);
        Budget::default().check_group("nondegeneracy check", to_u64_sat(&form.order()))?;
        if !form.is_nondegenerate() {
            return Err(Error::InvalidParameter("pairing is degenerate".into()));
        }
        Ok(form)
    }

    /// Canonical constructor from already-validated values.
    fn from_values(orders: Vec<T>, q: &[Ratio<T>], b: &[Vec<Ratio<T>>]) -> Self {
        let mut denom = T::one();
        for v in q.iter().chain(b.iter().flatten()) {
            denom = denom.lcm(v.denom());
        }
        let n = Ratio::from_integer(denom.clone());
        let two_n = int::<T>(2) * denom.clone();
        let q_num = q
            .iter()
            .map(|v| modulo(&(v * &n).to_integer(), &two_n))
            .collect();
        let b_num = b
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| modulo(&(v * &n).to_integer(), &denom))
                    .collect()
            })
            .collect();
        FiniteQuadForm {
            orders,
            denom,
            q_num,
            b_num,
        }
    }

    /// The discriminant form `L*/L` of an even lattice.
    pub fn from_lattice(lattice: &Lattice<T>) -> Result<Self> {
        Ok(DualPresentation::new(lattice)?.form)
    }

    /// Number of generators.
    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[T] {
        &self.orders
    }

    /// `|A|`.
    pub fn order(&self) -> T {
        self.orders.iter().fold(T::one(), |a, n| a * n.clone())
    }

    pub fn exponent(&self) -> T {
        self.orders.iter().fold(T::one(), |a, n| a.lcm(n))
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.iter().all(One::is_one)
    }

    /// Generator values `q(gᵢ)` in `[0, 2)`.
    pub fn q_gen(&self) -> Vec<Ratio<T>> {
        self.q_num
            .iter()
            .map(|x| Ratio::new(x.clone(), self.denom.clone()))
            .collect()
    }

    /// Pairing table `b(gᵢ, gⱼ)` in `[0, 1)`.
    pub fn b_matrix(&self) -> Vec<Vec<Ratio<T>>> {
        self.b_num
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| Ratio::new(x.clone(), self.denom.clone()))
                    .collect()
            })
            .collect()
    }

    /// The form `(A, −q)`.
    pub fn negated(&self) -> Self {
        let q: Vec<_> = self.q_gen().iter().map(|v| reduce_mod2(&-v.clone())).collect();
        let b: Vec<Vec<_>> = self
            .b_matrix()
            .iter()
            .map(|row| row.iter().map(|v| reduce_mod1(&-v.clone())).collect())
            .collect();
        Self::from_values(self.orders.clone(), &q, &b)
    }

    pub fn zero(&self) -> DFElement<T> {
        DFElement {
            coords: vec![T::zero(); self.rank()],
        }
    }

    pub fn generator(&self, i: usize) -> DFElement<T> {
        let mut x = self.zero();
        x.coords[i] = modulo(&T::one(), &self.orders[i]);
        x
    }

    /// Validates length and reduces coordinates.
    pub fn element(&self, coords: Vec<T>) -> Result<DFElement<T>> {
        if coords.len() != self.rank() {
            return Err(Error::InvalidElement(format!(
                "element has {} coordinates, form has {} generators",
                coords.len(),
                self.rank()
            )));
        }
        Ok(self.reduce(coords))
    }

    fn reduce(&self, coords: Vec<T>) -> DFElement<T> {
        DFElement {
            coords: coords
                .into_iter()
                .zip(&self.orders)
                .map(|(c, n)| modulo(&c, n))
                .collect(),
        }
    }

    pub fn contains(&self, x: &DFElement<T>) -> bool {
        x.coords.len() == self.rank()
            && x
                .coords
                .iter()
                .zip(&self.orders)
                .all(|(c, n)| !c.is_negative_like() && c < n)
    }

    pub fn add(&self, x: &DFElement<T>, y: &DFElement<T>) -> DFElement<T> {
        self.reduce(
            x.coords
                .iter()
                .zip(&y.coords)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        )
    }

    pub fn neg(&self, x: &DFElement<T>) -> DFElement<T> {
        self.reduce(x.coords.iter().map(|a| -a.clone()).collect())
    }

    pub fn sub(&self, x: &DFElement<T>, y: &DFElement<T>) -> DFElement<T> {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, k: &T, x: &DFElement<T>) -> DFElement<T> {
        self.reduce(x.coords.iter().map(|a| a.clone() * k.clone()).collect())
    }

    /// `q(x)·N` reduced mod `2N`.
    fn q_numerator(&self, x: &DFElement<T>) -> T {
        let r = self.rank();
        let two: T = int(2);
        let mut acc = T::zero();
        for i in 0..r {
            let xi = &x.coords[i];
            if xi.is_zero() {
                continue;
            }
            acc = acc + self.q_num[i].clone() * xi.clone() * xi.clone();
            for j in i + 1..r {
                acc = acc + two.clone() * self.b_num[i][j].clone() * xi.clone() * x.coords[j].clone();
            }
        }
        modulo(&acc, &(two * self.denom.clone()))
    }

    /// `b(x, y)·N` reduced mod `N`.
    fn b_numerator(&self, x: &DFElement<T>, y: &DFElement<T>) -> T {
        let r = self.rank();
        let mut acc = T::zero();
        for i in 0..r {
            if x.coords[i].is_zero() {
                continue;
            }
            for j in 0..r {
                acc = acc + self.b_num[i][j].clone() * x.coords[i].clone() * y.coords[j].clone();
            }
        }
        modulo(&acc, &self.denom)
    }

    /// `q(x) ∈ [0, 2)`.
    pub fn q(&self, x: &DFElement<T>) -> Ratio<T> {
        Ratio::new(self.q_numerator(x), self.denom.clone())
    }

    /// `b(x, y) ∈ [0, 1)`.
    pub fn b(&self, x: &DFElement<T>, y: &DFElement<T>) -> Ratio<T> {
        Ratio::new(self.b_numerator(x, y), self.denom.clone())
    }

    pub fn element_order(&self, x: &DFElement<T>) -> T {
        x.coords
            .iter()
            .zip(&self.orders)
            .fold(T::one(), |acc, (c, n)| acc.lcm(&(n.clone() / c.gcd(n))))
    }

    pub fn is_isotropic(&self, x: &DFElement<T>) -> bool {
        self.q_numerator(x).is_zero()
    }

    /// All elements in lexicographic coordinate order. Callers are expected
    /// to have checked `|A|` against a budget.
    pub fn elements(&self) -> Vec<DFElement<T>> {
        let mut out = Vec::new();
        let mut cur = vec![T::zero(); self.rank()];
        loop {
            out.push(DFElement { coords: cur.clone() });
            let mut i = self.rank();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] = cur[i].clone() + T::one();
                if cur[i] < self.orders[i] {
                    break;
                }
                cur[i] = T::zero();
            }
        }
    }

    /// [`elements`](Self::elements) behind a budget check.
    pub fn elements_within(&self, budget: &Budget, what: &str) -> Result<Vec<DFElement<T>>> {
        budget.check_group(what, to_u64_sat(&self.order()))?;
        Ok(self.elements())
    }

    /// Whether `b(x, ·) ≡ 0` forces `x = 0`.
    pub fn is_nondegenerate(&self) -> bool {
        let gens: Vec<_> = (0..self.rank()).map(|i| self.generator(i)).collect();
        self.elements().iter().all(|x| {
            x.coords.iter().all(Zero::is_zero)
                || gens.iter().any(|g| !self.b_numerator(x, g).is_zero())
        })
    }

    /// Solves `k·y = x`; returns `k` modulo the order of `y` if it exists.
    pub fn discrete_multiple(&self, y: &DFElement<T>, x: &DFElement<T>) -> Option<T> {
        let mut r = T::zero();
        let mut m = T::one();
        for ((yi, xi), n) in y.coords.iter().zip(&x.coords).zip(&self.orders) {
            let (k, step) = crate::arith::solve_linear(yi, xi, n)?;
            let (r2, m2) = crate::arith::crt(&r, &m, &k, &step)?;
            r = r2;
            m = m2;
        }
        Some(r)
    }

    /// Orthogonal direct sum.
    pub fn orthogonal_sum(parts: &[FiniteQuadForm<T>]) -> Self {
        let mut orders = Vec::new();
        let mut q = Vec::new();
        let total: usize = parts.iter().map(|p| p.rank()).sum();
        let mut b = vec![vec![Ratio::zero(); total]; total];
        let mut off = 0;
        for p in parts {
            orders.extend(p.orders.iter().cloned());
            q.extend(p.q_gen());
            let pb = p.b_matrix();
            for i in 0..p.rank() {
                for j in 0..p.rank() {
                    b[off + i][off + j] = pb[i][j].clone();
                }
            }
            off += p.rank();
        }
        Self::from_values(orders, &q, &b)
    }
}

// `is_negative` is not on the Scalar bound for unsigned-looking checks.
trait NegLike {
    fn is_negative_like(&self) -> bool;
}

impl<T: Scalar> NegLike for T {
    fn is_negative_like(&self) -> bool {
        *self < T::zero()
    }
}

impl<T: Scalar> fmt::Display for FiniteQuadForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank() == 0 {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.orders.iter().map(|n| format!("Z/{n}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Discriminant form of a lattice together with the lift and reduction maps
/// between `A_L` and `L* ⊂ L ⊗ ℚ`.
#[derive(Clone, Debug)]
pub struct DualPresentation<T: Scalar> {
    lattice: Lattice<T>,
    form: FiniteQuadForm<T>,
    lifts: Vec<RationalVector<T>>,
    /// Rows of the left SNF transform for the nontrivial invariants.
    reducer: Vec<Vec<T>>,
}

impl<T: Scalar> DualPresentation<T> {
    /// With `U·G·V = D`, `A_L ≅ ℤⁿ/Dℤⁿ`: the generator of order `dᵢ` lifts to
    /// column `i` of `V` divided by `dᵢ`, and `c ∈ L*` reduces to `(U·G·c)ᵢ mod dᵢ`.
    pub fn new(lattice: &Lattice<T>) -> Result<Self> {
        let g = lattice.gram();
        let snf = smith_normal_form(g);
        let inv = snf.invariants();
        let mut orders = Vec::new();
        let mut lifts = Vec::new();
        let mut reducer = Vec::new();
        for (i, di) in inv.iter().enumerate() {
            if di.is_zero() {
                return Err(Error::InvalidLattice("degenerate Gram matrix".into()));
            }
            if di.is_one() {
                continue;
            }
            orders.push(di.clone());
            lifts.push(RationalVector::new(
                snf.v
                    .column(i)
                    .into_iter()
                    .map(|x| Ratio::new(x, di.clone()))
                    .collect(),
            ));
            reducer.push(snf.u.row(i).to_vec());
        }
        let k = orders.len();
        let mut q = Vec::with_capacity(k);
        let mut b = vec![vec![Ratio::zero(); k]; k];
        for i in 0..k {
            q.push(reduce_mod2(&lattice.square(&lifts[i])));
            for j in 0..k {
                b[i][j] = reduce_mod1(&lattice.pair(&lifts[i], &lifts[j]));
            }
        }
        let form = FiniteQuadForm::from_values(orders, &q, &b);
        Ok(DualPresentation {
            lattice: lattice.clone(),
            form,
            lifts,
            reducer,
        })
    }

    pub fn form(&self) -> &FiniteQuadForm<T> {
        &self.form
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    /// Class in `A_L` of a dual-lattice vector.
    pub fn reduce(&self, v: &RationalVector<T>) -> Result<DFElement<T>> {
        if v.dim() != self.lattice.rank() {
            return Err(Error::InvalidElement("vector dimension mismatch".into()));
        }
        let y = self.lattice.pairings_with_basis(v);
        if !y.iter().all(Ratio::is_integer) {
            return Err(Error::InvalidElement(format!("{v} is not in the dual lattice")));
        }
        let y: Vec<T> = y.into_iter().map(|r| r.to_integer()).collect();
        let coords = self
            .reducer
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&y)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect();
        self.form.element(coords)
    }

    /// The representative in `L*` of an element of `A_L` with every
    /// coordinate in `[0, 1)`.
    pub fn lift(&self, x: &DFElement<T>) -> RationalVector<T> {
        let mut acc = RationalVector::zero(self.lattice.rank());
        for (c, l) in x.coords.iter().zip(&self.lifts) {
            acc = acc.add(&l.scale(&Ratio::from_integer(c.clone())));
        }
        RationalVector::new(acc.coords.iter().map(reduce_mod1).collect())
    }

    /// Isometry of `A_L` induced by a lattice isometry given as a matrix whose
    /// columns are the images of the basis vectors.
    pub fn induced_isometry(&self, m: &IntMatrix<T>) -> Result<DFIsometry<T>> {
        let n = self.lattice.rank();
        let images = self
            .lifts
            .iter()
            .map(|l| {
                let img: Vec<Ratio<T>> = (0..n)
                    .map(|i| {
                        (0..n).fold(Ratio::zero(), |acc, j| {
                            acc + Ratio::from_integer(m[(i, j)].clone()) * l.coords[j].clone()
                        })
                    })
                    .collect();
                self.reduce(&RationalVector::new(img))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DFIsometry { images })
    }
}

/// `A_{d,t} ≅ ℤ/a ⊕ ℤ/b` with `a = gcd(2d, t)`, `b = t²/a`.
pub fn structure_invariants<T: Scalar>(d: &T, t: &T) -> Result<(T, T)> {
    if *t < T::one() {
        return Err(Error::InvalidParameter(format!("t must be ≥ 1, got {t}")));
    }
    let a = (int::<T>(2) * d.clone()).gcd(t);
    let b = t.clone() * t.clone() / a.clone();
    Ok((a, b))
}

/// `q(a F̄* + b H̄*) = 2a(bt − ad)/t²` reduced into `[0, 2)`.
pub fn q_eval<T: Scalar>(d: &T, t: &T, a: &T, b: &T) -> Ratio<T> {
    let num = int::<T>(2) * a.clone() * (b.clone() * t.clone() - a.clone() * d.clone());
    reduce_mod2(&Ratio::new(num, t.clone() * t.clone()))
}

/// `b(x, y)`, failing if either element does not belong to `form`.
pub fn b_eval<T: Scalar>(form: &FiniteQuadForm<T>, x: &DFElement<T>, y: &DFElement<T>) -> Result<Ratio<T>> {
    for e in [x, y] {
        if !form.contains(e) {
            return Err(Error::InvalidElement(format!("{e} is not a reduced element of {form}")));
        }
    }
    Ok(form.b(x, y))
}

/// The discriminant form of `Λ_{d,t}` with its presentation.
pub fn ns_presentation<T: Scalar>(ns: &NsLattice<T>) -> DualPresentation<T> {
    DualPresentation::new(&ns.lattice()).expect("Λ_{d,t} is nondegenerate")
}

/// One p-primary summand `A^{(p)}` with maps to and from the parent form.
#[derive(Clone, Debug)]
pub struct PrimaryPart<T> {
    pub p: T,
    pub form: FiniteQuadForm<T>,
    /// Parent generator index for each generator of the part.
    parent_gens: Vec<usize>,
    /// `rᵢ` with part generator `hᵢ = rᵢ·g_{parent}`.
    cofactors: Vec<T>,
}

impl<T: Scalar> PrimaryPart<T> {
    /// p-component of `x`, in the part's coordinates.
    pub fn project(&self, x: &DFElement<T>) -> DFElement<T> {
        let coords = self
            .parent_gens
            .iter()
            .zip(&self.cofactors)
            .zip(self.form.orders())
            .map(|((&i, r), pk)| {
                let inv = mod_inv(r, pk).expect("cofactor is prime to p");
                modulo(&(x.coords[i].clone() * inv), pk)
            })
            .collect();
        DFElement { coords }
    }

    /// Element of the parent form.
    pub fn embed(&self, parent: &FiniteQuadForm<T>, y: &DFElement<T>) -> DFElement<T> {
        let mut coords = vec![T::zero(); parent.rank()];
        for ((&i, r), c) in self.parent_gens.iter().zip(&self.cofactors).zip(&y.coords) {
            coords[i] = coords[i].clone() + c.clone() * r.clone();
        }
        parent.reduce(coords)
    }
}

/// Orthogonal splitting `A = ⊕ₚ A^{(p)}`, primes ascending.
pub fn primary_decomposition<T: Scalar>(form: &FiniteQuadForm<T>) -> Vec<PrimaryPart<T>> {
    let primes = crate::arith::primes_of(&form.order());
    primes
        .into_iter()
        .map(|p| {
            let mut parent_gens = Vec::new();
            let mut cofactors = Vec::new();
            let mut orders = Vec::new();
            let mut gens = Vec::new();
            for (i, n) in form.orders().iter().enumerate() {
                let mut pk = T::one();
                let mut r = n.clone();
                while r.is_multiple_of(&p) {
                    r = r / p.clone();
                    pk = pk * p.clone();
                }
                if pk.is_one() {
                    continue;
                }
                parent_gens.push(i);
                gens.push(form.scale(&r, &form.generator(i)));
                cofactors.push(r);
                orders.push(pk);
            }
            let q: Vec<_> = gens.iter().map(|g| form.q(g)).collect();
            let b: Vec<Vec<_>> = gens
                .iter()
                .map(|g| gens.iter().map(|h| form.b(g, h)).collect())
                .collect();
            PrimaryPart {
                p,
                form: FiniteQuadForm::from_values(orders, &q, &b),
                parent_gens,
                cofactors,
            }
        })
        .collect()
}

/// Automorphism of a finite quadratic form, stored as generator images.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct DFIsometry<T> {
    pub images: Vec<DFElement<T>>,
}

impl<T: Scalar> DFIsometry<T> {
    pub fn identity(form: &FiniteQuadForm<T>) -> Self {
        DFIsometry {
            images: (0..form.rank()).map(|i| form.generator(i)).collect(),
        }
    }

    pub fn negation(form: &FiniteQuadForm<T>) -> Self {
        DFIsometry {
            images: (0..form.rank()).map(|i| form.neg(&form.generator(i))).collect(),
        }
    }

    /// Builds a map from raw generator images, validating it is an isometry.
    pub fn from_images(form: &FiniteQuadForm<T>, images: Vec<Vec<T>>) -> Result<Self> {
        if images.len() != form.rank() {
            return Err(Error::InvalidIsometry(format!(
                "{} generator images given, form has {} generators",
                images.len(),
                form.rank()
            )));
        }
        let images = images
            .into_iter()
            .map(|c| form.element(c))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::InvalidIsometry(e.to_string()))?;
        let iso = DFIsometry { images };
        iso.validate(form)?;
        Ok(iso)
    }

    pub fn apply_to(&self, form: &FiniteQuadForm<T>, x: &DFElement<T>) -> DFElement<T> {
        // images live in the target form, whose rank may differ from x's
        let target_rank = self.images.first().map_or(0, |e| e.coords.len());
        let mut acc = vec![T::zero(); target_rank];
        for (c, img) in x.coords.iter().zip(&self.images) {
            if c.is_zero() {
                continue;
            }
            for (a, b) in acc.iter_mut().zip(&img.coords) {
                *a = a.clone() + c.clone() * b.clone();
            }
        }
        form.reduce(acc)
    }

    /// `self ∘ other` on one form.
    pub fn compose(&self, form: &FiniteQuadForm<T>, other: &Self) -> Self {
        DFIsometry {
            images: other
                .images
                .iter()
                .map(|x| self.apply_to(form, x))
                .collect(),
        }
    }

    pub fn power(&self, form: &FiniteQuadForm<T>, k: u64) -> Self {
        let mut acc = Self::identity(form);
        for _ in 0..k {
            acc = self.compose(form, &acc);
        }
        acc
    }

    /// Order in `O(A)`.
    pub fn order(&self, form: &FiniteQuadForm<T>) -> u64 {
        let id = Self::identity(form);
        let mut cur = self.clone();
        let mut k = 1;
        while cur != id {
            cur = self.compose(form, &cur);
            k += 1;
        }
        k
    }

    pub fn inverse(&self, form: &FiniteQuadForm<T>) -> Self {
        let k = self.order(form);
        self.power(form, k - 1)
    }

    pub fn is_identity(&self, form: &FiniteQuadForm<T>) -> bool {
        *self == Self::identity(form)
    }

    /// Checks images have compatible orders and preserve `q` and `b`;
    /// nondegeneracy of the form makes such a map injective, hence bijective.
    pub fn validate(&self, form: &FiniteQuadForm<T>) -> Result<()> {
        if self.images.len() != form.rank() {
            return Err(Error::InvalidIsometry("wrong number of generator images".into()));
        }
        for (i, img) in self.images.iter().enumerate() {
            if !form.contains(img) {
                return Err(Error::InvalidIsometry(format!("image {img} is not reduced")));
            }
            let n = &form.orders()[i];
            if !form.scale(n, img).coords.iter().all(Zero::is_zero) {
                return Err(Error::InvalidIsometry(format!(
                    "image of g{i} does not have order dividing {n}"
                )));
            }
            if form.q_numerator(img) != form.q_num[i] {
                return Err(Error::InvalidIsometry(format!(
                    "image of g{i} changes q: {} vs {}",
                    form.q(img),
                    form.q(&form.generator(i))
                )));
            }
            for j in 0..i {
                if form.b_numerator(img, &self.images[j]) != form.b_num[i][j] {
                    return Err(Error::InvalidIsometry(format!(
                        "images of g{j}, g{i} change the pairing"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Generator-image search shared by [`isometry_group`] and [`isometry_between`].
fn search_isometries<T: Scalar>(
    src: &FiniteQuadForm<T>,
    dst: &FiniteQuadForm<T>,
    first_only: bool,
) -> Vec<DFIsometry<T>> {
    if src.order() != dst.order() {
        return Vec::new();
    }
    let l = src.denom.lcm(&dst.denom);
    let s_scale = l.clone() / src.denom.clone();
    let d_scale = l.clone() / dst.denom.clone();
    let two_l = int::<T>(2) * l.clone();
    let elements = dst.elements();
    let dst_q: Vec<T> = elements
        .iter()
        .map(|x| modulo(&(dst.q_numerator(x) * d_scale.clone()), &two_l))
        .collect();
    let r = src.rank();
    let candidates: Vec<Vec<usize>> = (0..r)
        .map(|i| {
            let want_q = modulo(&(src.q_num[i].clone() * s_scale.clone()), &two_l);
            let n = &src.orders[i];
            elements
                .iter()
                .enumerate()
                .filter(|(k, x)| dst_q[*k] == want_q && dst.element_order(x) == *n)
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    let want_b: Vec<Vec<T>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| modulo(&(src.b_num[i][j].clone() * s_scale.clone()), &l))
                .collect()
        })
        .collect();

    let search = Search {
        dst,
        elements: &elements,
        candidates: &candidates,
        want_b: &want_b,
        d_scale: &d_scale,
        l: &l,
        first_only,
    };
    let mut out = Vec::new();
    search.extend(&mut Vec::with_capacity(r), &mut out);
    out
}

/// Backtracking state: candidate images per generator and the pairings they
/// must reproduce, all scaled to the common denominator `l`.
struct Search<'a, T> {
    dst: &'a FiniteQuadForm<T>,
    elements: &'a [DFElement<T>],
    candidates: &'a [Vec<usize>],
    want_b: &'a [Vec<T>],
    d_scale: &'a T,
    l: &'a T,
    first_only: bool,
}

impl<T: Scalar> Search<'_, T> {
    fn extend(&self, chosen: &mut Vec<usize>, out: &mut Vec<DFIsometry<T>>) {
        let i = chosen.len();
        if i == self.candidates.len() {
            out.push(DFIsometry {
                images: chosen.iter().map(|&k| self.elements[k].clone()).collect(),
            });
            return;
        }
        for &k in &self.candidates[i] {
            let x = &self.elements[k];
            let ok = chosen.iter().enumerate().all(|(j, &kj)| {
                let b = self.dst.b_numerator(x, &self.elements[kj]) * self.d_scale.clone();
                modulo(&b, self.l) == self.want_b[i][j]
            });
            if !ok {
                continue;
            }
            chosen.push(k);
            self.extend(chosen, out);
            chosen.pop();
            if self.first_only && !out.is_empty() {
                return;
            }
        }
    }
}

/// All isometries of `form`, sorted by their generator-image tuples.
pub fn isometry_group<T: Scalar>(form: &FiniteQuadForm<T>, budget: &Budget) -> Result<Vec<DFIsometry<T>>> {
    budget.check_group("isometry group enumeration", to_u64_sat(&form.order()))?;
    Ok(search_isometries(form, form, false))
}

/// Some isometry `a → b`, if the forms are isometric.
pub fn isometry_between<T: Scalar>(
    a: &FiniteQuadForm<T>,
    b: &FiniteQuadForm<T>,
    budget: &Budget,
) -> Result<Option<DFIsometry<T>>> {
    budget.check_group("isometry search", to_u64_sat(&a.order()))?;
    budget.check_group("isometry search", to_u64_sat(&b.order()))?;
    Ok(search_isometries(a, b, true).into_iter().next())
}

/// `τ ∘ σ ∘ τ⁻¹` for `σ ∈ O(A)` and an isometry `τ: A → B`.
pub fn transport<T: Scalar>(
    a: &FiniteQuadForm<T>,
    b: &FiniteQuadForm<T>,
    tau: &DFIsometry<T>,
    sigma: &DFIsometry<T>,
) -> DFIsometry<T> {
    // τ⁻¹ on generators of B: find preimages by solving over A's elements is
    // expensive; instead invert through the linear map on coordinates.
    let tau_inv = invert_between(a, b, tau);
    DFIsometry {
        images: (0..b.rank())
            .map(|i| {
                let pre = tau_inv.apply_to(a, &b.generator(i));
                let img = sigma.apply_to(a, &pre);
                tau.apply_to(b, &img)
            })
            .collect(),
    }
}

/// Inverse of an isometry `τ: A → B`, as a map `B → A`.
pub fn invert_between<T: Scalar>(
    a: &FiniteQuadForm<T>,
    b: &FiniteQuadForm<T>,
    tau: &DFIsometry<T>,
) -> DFIsometry<T> {
    let preimage: std::collections::HashMap<DFElement<T>, DFElement<T>> = a
        .elements()
        .into_iter()
        .map(|x| (tau.apply_to(b, &x), x))
        .collect();
    DFIsometry {
        images: (0..b.rank())
            .map(|i| preimage[&b.generator(i)].clone())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattices::ns_gram;

    fn ns_form(d: i64, t: i64) -> FiniteQuadForm<i64> {
        FiniteQuadForm::from_lattice(&ns_gram(d, t).unwrap().lattice()).unwrap()
    }

    fn r(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    #[test]
    fn hyperbolic_plane_is_unimodular() {
        let u = Lattice::from_gram(IntMatrix::<i64>::from_i64(&[&[0, 1], &[1, 0]])).unwrap();
        let a = FiniteQuadForm::from_lattice(&u).unwrap();
        assert!(a.is_trivial());
        assert_eq!(a.order(), 1);
    }

    #[test]
    fn odd_lattice_rejected() {
        let odd = IntMatrix::<i64>::from_i64(&[&[1, 0], &[0, 2]]);
        assert!(matches!(Lattice::from_gram(odd), Err(Error::InvalidLattice(_))));
        let degenerate = IntMatrix::<i64>::from_i64(&[&[2, 2], &[2, 2]]);
        assert!(matches!(Lattice::from_gram(degenerate), Err(Error::InvalidLattice(_))));
    }

    #[test]
    fn lambda_0_5_has_two_isotropic_generators() {
        let ns = ns_gram(0i64, 5).unwrap();
        let pres = ns_presentation(&ns);
        let a = pres.form();
        assert_eq!(a.orders(), &[5, 5]);
        let (fs, hs) = crate::lattices::dual_generators(&ns);
        let fs = pres.reduce(&fs).unwrap();
        let hs = pres.reduce(&hs).unwrap();
        assert_eq!(a.q(&fs), r(0, 1));
        assert_eq!(a.q(&hs), r(0, 1));
        assert_eq!(a.b(&fs, &hs), r(1, 5));
    }

    #[test]
    fn lambda_1_5_is_cyclic() {
        assert_eq!(ns_form(1, 5).orders(), &[25]);
        assert_eq!(ns_form(3, 4).orders(), &[2, 8]);
    }

    #[test]
    fn structure_invariants_examples() {
        assert_eq!(structure_invariants(&0i64, &7).unwrap(), (7, 7));
        assert_eq!(structure_invariants(&1i64, &5).unwrap(), (1, 25));
        assert_eq!(structure_invariants(&3i64, &4).unwrap(), (2, 8));
    }

    #[test]
    fn q_formula_examples() {
        assert_eq!(q_eval(&1i64, &5, &0, &1), r(0, 1));
        assert_eq!(q_eval(&1i64, &5, &1, &0), r(48, 25));
        assert_eq!(q_eval(&1i64, &5, &1, &1), r(8, 25));
    }

    #[test]
    fn q_formula_agrees_with_lattice() {
        for t in 1..=9i64 {
            for d in -3..t + 2 {
                let ns = ns_gram(d, t).unwrap();
                let pres = ns_presentation(&ns);
                let (fs, hs) = crate::lattices::dual_generators(&ns);
                for a in 0..t {
                    for b in 0..t {
                        let v = fs
                            .scale(&Ratio::from_integer(a))
                            .add(&hs.scale(&Ratio::from_integer(b)));
                        let x = pres.reduce(&v).unwrap();
                        assert_eq!(pres.form().q(&x), q_eval(&d, &t, &a, &b));
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_examples() {
        let ns = ns_gram(2i64, 7).unwrap();
        let pres = ns_presentation(&ns);
        let (fs, hs) = crate::lattices::dual_generators(&ns);
        let a = pres.form();
        let fs = pres.reduce(&fs).unwrap();
        let hs = pres.reduce(&hs).unwrap();
        assert_eq!(b_eval(a, &fs, &hs).unwrap(), r(1, 7));
        assert_eq!(b_eval(a, &fs, &a.zero()).unwrap(), r(0, 1));
        let other = ns_form(0, 7);
        let foreign = other.generator(1);
        assert!(matches!(b_eval(a, &fs, &foreign), Err(Error::InvalidElement(_))));
    }

    #[test]
    fn orders_and_isotropy() {
        let ns = ns_gram(0i64, 2).unwrap();
        let pres = ns_presentation(&ns);
        let a = pres.form();
        assert_eq!(a.element_order(&a.zero()), 1);
        assert!(a.is_isotropic(&a.zero()));
        let (fs, hs) = crate::lattices::dual_generators(&ns);
        let sum = pres.reduce(&fs.add(&hs)).unwrap();
        assert_eq!(a.q(&sum), r(1, 1));
        assert!(!a.is_isotropic(&sum));
        let hs = pres.reduce(&hs).unwrap();
        assert_eq!(a.element_order(&hs), 2);
        assert!(a.is_isotropic(&hs));
    }

    #[test]
    fn primary_parts_of_a_0_6() {
        let a = ns_form(0, 6);
        let parts = primary_decomposition(&a);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].p, 2);
        assert_eq!(parts[0].form.order(), 4);
        assert_eq!(parts[1].p, 3);
        assert_eq!(parts[1].form.order(), 9);
        for x in parts[0].form.elements() {
            for y in parts[1].form.elements() {
                let xe = parts[0].embed(&a, &x);
                let ye = parts[1].embed(&a, &y);
                assert_eq!(a.b(&xe, &ye), r(0, 1));
            }
        }
        // projection ∘ embedding = id, and parts reassemble every element
        for x in a.elements() {
            let mut acc = a.zero();
            for p in &parts {
                let y = p.project(&x);
                assert_eq!(p.project(&p.embed(&a, &y)), y);
                acc = a.add(&acc, &p.embed(&a, &y));
            }
            assert_eq!(acc, x);
        }
        let single = primary_decomposition(&ns_form(1, 5));
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].p, 5);
    }

    #[test]
    fn isometry_groups() {
        let b = Budget::default();
        let trivial = ns_form(0, 1);
        assert_eq!(isometry_group(&trivial, &b).unwrap().len(), 1);
        assert_eq!(isometry_group(&ns_form(1, 5), &b).unwrap().len(), 2);
        assert_eq!(isometry_group(&ns_form(0, 5), &b).unwrap().len(), 8);
    }

    #[test]
    fn isometry_group_capacity() {
        let small = Budget {
            max_group_order: 10,
            ..Budget::default()
        };
        let err = isometry_group(&ns_form(0, 5), &small).unwrap_err();
        assert!(err.is_capacity());
        assert!(err.to_string().contains("10"));
    }

    #[test]
    fn isometries_between_forms() {
        let b = Budget::default();
        let a = ns_form(1, 5);
        let id = isometry_between(&a, &a, &b).unwrap().unwrap();
        assert!(id.is_identity(&a) || id == DFIsometry::negation(&a));
        let four = ns_form(4, 5);
        let iso = isometry_between(&a, &four, &b).unwrap().unwrap();
        let x = a.generator(0);
        assert_eq!(four.q(&iso.apply_to(&four, &x)), a.q(&x));
        assert!(isometry_between(&a, &ns_form(2, 5), &b).unwrap().is_none());
    }

    #[test]
    fn explicit_form_validation() {
        // (Z/2, q = 1/2): discriminant form of A1
        let f = FiniteQuadForm::new(vec![2i64], vec![r(1, 2)], vec![vec![r(1, 2)]]).unwrap();
        assert_eq!(f.order(), 2);
        assert!(FiniteQuadForm::new(vec![2i64], vec![r(1, 3)], vec![vec![r(1, 3)]]).is_err());
        // degenerate: b ≡ 0 on Z/2 with q = 0 is allowed by values but degenerate
        assert!(FiniteQuadForm::new(vec![2i64], vec![r(0, 1)], vec![vec![r(0, 1)]]).is_err());
    }

    #[test]
    fn negated_form_has_same_isotropic_elements_and_group() {
        let a = ns_form(2, 6);
        let n = a.negated();
        for x in a.elements() {
            assert_eq!(a.is_isotropic(&x), n.is_isotropic(&x));
        }
        let b = Budget::default();
        assert_eq!(isometry_group(&a, &b).unwrap(), isometry_group(&n, &b).unwrap());
    }
}
