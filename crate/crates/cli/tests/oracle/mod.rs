//! Brute-force reference implementations over `i64`, sharing no code with the
//! library. `A_{d,t}` is modelled as `ℤ² / Gℤ²` through the pairing vector
//! `p = (v·H, v·F)` of a dual vector `v`, so `q(v) = pᵀ G⁻¹ p`.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

pub type El = (i64, i64);

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

pub fn phi(n: i64) -> i64 {
    (1..=n).filter(|k| gcd(*k, n) == 1).count() as i64
}

pub fn omega(n: i64) -> u32 {
    (2..=n).filter(|p| n % p == 0 && (2..*p).all(|q| p % q != 0)).count() as u32
}

pub fn is_prime(n: i64) -> bool {
    n >= 2 && (2..n).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

#[derive(Clone, Debug)]
pub struct Disc {
    pub d: i64,
    pub t: i64,
}

impl Disc {
    pub fn new(d: i64, t: i64) -> Self {
        Disc { d, t }
    }

    pub fn reduce(&self, p: El) -> El {
        let k = p.1.div_euclid(self.t);
        ((p.0 - 2 * self.d * k).rem_euclid(self.t), p.1 - k * self.t)
    }

    pub fn elements(&self) -> Vec<El> {
        let t = self.t;
        (0..t).flat_map(|a| (0..t).map(move |b| (a, b))).collect()
    }

    pub fn index(&self, x: El) -> usize {
        (x.0 * self.t + x.1) as usize
    }

    pub fn add(&self, x: El, y: El) -> El {
        self.reduce((x.0 + y.0, x.1 + y.1))
    }

    pub fn neg(&self, x: El) -> El {
        self.reduce((-x.0, -x.1))
    }

    pub fn scale(&self, k: i64, x: El) -> El {
        self.reduce((k * x.0, k * x.1))
    }

    /// Numerator of `q` over `t²`, reduced mod `2t²`.
    pub fn q(&self, x: El) -> i64 {
        let t2 = self.t * self.t;
        (2 * x.0 * x.1 * self.t - 2 * self.d * x.1 * x.1).rem_euclid(2 * t2)
    }

    /// Numerator of `b` over `t²`, reduced mod `t²`.
    pub fn b(&self, x: El, y: El) -> i64 {
        let t2 = self.t * self.t;
        ((x.0 * y.1 + x.1 * y.0) * self.t - 2 * self.d * x.1 * y.1).rem_euclid(t2)
    }

    pub fn order(&self, x: El) -> i64 {
        (1..).find(|n| self.scale(*n, x) == (0, 0)).unwrap()
    }

    pub fn is_lagrangian(&self, x: El) -> bool {
        self.order(x) == self.t && self.q(x) == 0
    }

    /// All combinations `Σ cᵢ gᵢ` with `0 ≤ cᵢ < t`; `t` kills the group.
    pub fn span(&self, gens: &[El]) -> BTreeSet<El> {
        let mut set = BTreeSet::from([(0, 0)]);
        for g in gens {
            let multiples: Vec<El> = (0..self.t).map(|c| self.scale(c, *g)).collect();
            set = set
                .iter()
                .flat_map(|x| multiples.iter().map(move |m| self.add(*x, *m)))
                .collect();
        }
        set
    }

    /// Rational coordinates over `(H, F)` of the dual vector with pairing `x`,
    /// as `(numerator, denominator)` pairs.
    pub fn lift(&self, x: El) -> [(i64, i64); 2] {
        let t2 = self.t * self.t;
        [(x.1, self.t), (x.0 * self.t - 2 * self.d * x.1, t2)]
    }

    /// A generating set of size at most two, lexicographically first.
    pub fn generators(&self) -> Vec<El> {
        let n = (self.t * self.t) as usize;
        let els = self.elements();
        if let Some(x) = els.iter().find(|x| self.span(&[**x]).len() == n) {
            return vec![*x];
        }
        for x in &els {
            for y in &els {
                if self.span(&[*x, *y]).len() == n {
                    return vec![*x, *y];
                }
            }
        }
        unreachable!("finite abelian groups of rank two are 2-generated")
    }
}

/// An isometry as the table of images, indexed by [`Disc::index`].
pub type Iso = Vec<El>;

/// All isometries `a → b`, found by sending a generating set of `a` to every
/// possible tuple in `b` and keeping the well-defined bijections preserving `q`.
pub fn isometries(a: &Disc, b: &Disc) -> Vec<Iso> {
    let n = (a.t * a.t) as usize;
    if b.t != a.t {
        return Vec::new();
    }
    let gens = a.generators();
    let ords: Vec<i64> = gens.iter().map(|g| a.order(*g)).collect();
    let combos: Vec<Vec<i64>> = match gens.len() {
        1 => (0..ords[0]).map(|i| vec![i]).collect(),
        _ => (0..ords[0])
            .flat_map(|i| (0..ords[1]).map(move |j| vec![i, j]))
            .collect(),
    };
    let mut tuples: Vec<Vec<El>> = vec![Vec::new()];
    for _ in &gens {
        tuples = tuples
            .into_iter()
            .flat_map(|t| b.elements().into_iter().map(move |e| [t.clone(), vec![e]].concat()))
            .collect();
    }
    let mut out = Vec::new();
    'cand: for imgs in tuples {
        let mut map: HashMap<El, El> = HashMap::new();
        for c in &combos {
            let mut x = (0, 0);
            let mut y = (0, 0);
            for (k, coef) in c.iter().enumerate() {
                x = a.add(x, a.scale(*coef, gens[k]));
                y = b.add(y, b.scale(*coef, imgs[k]));
            }
            match map.get(&x) {
                Some(prev) if *prev != y => continue 'cand,
                _ => {
                    map.insert(x, y);
                }
            }
        }
        let images: BTreeSet<El> = map.values().copied().collect();
        if map.len() != n || images.len() != n {
            continue;
        }
        if map.iter().any(|(x, y)| a.q(*x) != b.q(*y)) {
            continue;
        }
        let mut table = vec![(0, 0); n];
        for (x, y) in map {
            table[a.index(x)] = y;
        }
        out.push(table);
    }
    out
}

pub fn compose(a: &Disc, f: &Iso, g: &Iso) -> Iso {
    a.elements().into_iter().map(|x| f[a.index(g[a.index(x)])]).collect()
}

/// Vectors `(x, y)` with `|x|, |y| ≤ bound` and `2d'x² + 2t xy = square` in `Λ_{d',t}`.
pub fn vectors_of_square(d: i64, t: i64, square: i64, bound: i64) -> Vec<El> {
    let mut out = Vec::new();
    for x in -bound..=bound {
        for y in -bound..=bound {
            if 2 * d * x * x + 2 * t * x * y == square {
                out.push((x, y));
            }
        }
    }
    out
}

/// Integer matrices `M` (columns: images of `H`, `F`) with
/// `Mᵀ G_{e'} M = G_e`, found by a box search.
pub fn lattice_isometries(e: i64, e2: i64, t: i64) -> Vec<[[i64; 2]; 2]> {
    let bound = 4 * t * t + 4;
    let pair = |u: El, v: El| 2 * e2 * u.0 * v.0 + t * (u.0 * v.1 + u.1 * v.0);
    let hs = vectors_of_square(e2, t, 2 * e, bound);
    let fs = vectors_of_square(e2, t, 0, bound);
    let mut out = Vec::new();
    for h in &hs {
        for f in &fs {
            if pair(*h, *f) == t {
                out.push([[h.0, f.0], [h.1, f.1]]);
            }
        }
    }
    out
}

/// Action of a lattice isometry `Λ_e → Λ_e'` on pairing vectors: `p ↦ M⁻ᵀ p`.
pub fn induced<'a>(b: &'a Disc, m: &[[i64; 2]; 2]) -> impl Fn(El) -> El + 'a {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv_t = [[m[1][1] * det, -m[1][0] * det], [-m[0][1] * det, m[0][0] * det]];
    move |p: El| b.reduce((inv_t[0][0] * p.0 + inv_t[0][1] * p.1, inv_t[1][0] * p.0 + inv_t[1][1] * p.1))
}

/// Genus representatives `e ∈ [0, t)` of `Λ_{d,t}` up to lattice isometry.
pub fn genus(d: i64, t: i64) -> Vec<i64> {
    let a = Disc::new(d, t);
    let mut reps: Vec<i64> = Vec::new();
    for e in 0..t {
        if gcd(2 * e, t) != gcd(2 * d, t) || isometries(&a, &Disc::new(e, t)).is_empty() {
            continue;
        }
        if reps.iter().all(|r| lattice_isometries(e, *r, t).is_empty()) {
            reps.push(e);
        }
    }
    reps
}

/// `Σ_e |O(Λ_e) \ O(A_e) / {±id}|`, enumerating double cosets as sets.
pub fn fm_count(d: i64, t: i64) -> usize {
    genus(d, t)
        .into_iter()
        .map(|e| {
            let a = Disc::new(e, t);
            let group = isometries(&a, &a);
            let k: Vec<Iso> = lattice_isometries(e, e, t)
                .iter()
                .map(|m| {
                    let f = induced(&a, m);
                    a.elements().into_iter().map(&f).collect()
                })
                .collect();
            let id: Iso = a.elements();
            let minus: Iso = a.elements().into_iter().map(|x| a.neg(x)).collect();
            let cosets: BTreeSet<BTreeSet<Iso>> = group
                .iter()
                .map(|s| {
                    k.iter()
                        .flat_map(|kk| [&id, &minus].map(|g| compose(&a, kk, &compose(&a, s, g))))
                        .collect()
                })
                .collect();
            cosets.len()
        })
        .sum()
}
