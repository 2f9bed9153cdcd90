//! Elementary number theory over any [`Scalar`].

use crate::scalar::{int, Scalar};

/// Least non-negative residue of `a` modulo `n` (`n > 0`).
pub fn modulo<T: Scalar>(a: &T, n: &T) -> T {
    a.mod_floor(n)
}

/// Inverse of `a` modulo `n`, if `gcd(a, n) = 1`.
pub fn mod_inv<T: Scalar>(a: &T, n: &T) -> Option<T> {
    if n.is_one() {
        return Some(T::zero());
    }
    let eg = modulo(a, n).extended_gcd(n);
    if eg.gcd.is_one() {
        Some(modulo(&eg.x, n))
    } else {
        None
    }
}

pub fn mod_pow<T: Scalar>(base: &T, mut exp: u64, n: &T) -> T {
    let mut result = modulo(&T::one(), n);
    let mut b = modulo(base, n);
    while exp > 0 {
        if exp & 1 == 1 {
            result = modulo(&(result * b.clone()), n);
        }
        b = modulo(&(b.clone() * b), n);
        exp >>= 1;
    }
    result
}

/// Prime factorisation of `|n|` by trial division, primes ascending.
pub fn factorize<T: Scalar>(n: &T) -> Vec<(T, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    let mut p: T = int(2);
    while p.clone() * p.clone() <= n {
        if n.is_multiple_of(&p) {
            let mut k = 0;
            while n.is_multiple_of(&p) {
                n = n / p.clone();
                k += 1;
            }
            out.push((p.clone(), k));
        }
        p = if p == int(2) { int(3) } else { p + int(2) };
    }
    if n > T::one() {
        out.push((n, 1));
    }
    out
}

pub fn primes_of<T: Scalar>(n: &T) -> Vec<T> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn is_prime<T: Scalar>(n: &T) -> bool {
    let f = factorize(n);
    *n > T::one() && f.len() == 1 && f[0].1 == 1
}

/// Euler's totient; `φ(1) = 1`.
pub fn euler_phi<T: Scalar>(n: &T) -> T {
    factorize(n)
        .into_iter()
        .fold(T::one(), |acc, (p, k)| {
            acc * pow(&p, k - 1) * (p - T::one())
        })
}

/// Number of distinct prime factors; `ω(1) = 0`.
pub fn omega<T: Scalar>(n: &T) -> u32 {
    factorize(n).len() as u32
}

pub fn pow<T: Scalar>(base: &T, exp: u32) -> T {
    (0..exp).fold(T::one(), |acc, _| acc * base.clone())
}

/// `2^k` in `T`.
pub fn pow2<T: Scalar>(k: u32) -> T {
    pow(&int(2), k)
}

/// Exact integer square root, if `n` is a perfect square.
pub fn exact_sqrt<T: Scalar>(n: &T) -> Option<T> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (r.clone() * r.clone() == *n).then_some(r)
}

/// Solves `a·k ≡ b (mod n)`; returns `(k₀, n')` with solution set `k₀ + n'ℤ`.
pub fn solve_linear<T: Scalar>(a: &T, b: &T, n: &T) -> Option<(T, T)> {
    let a = modulo(a, n);
    let b = modulo(b, n);
    let g = a.gcd(n);
    if !b.is_multiple_of(&g) {
        return None;
    }
    let n2 = n.clone() / g.clone();
    let a2 = a / g.clone();
    let b2 = b / g;
    let inv = mod_inv(&a2, &n2)?;
    Some((modulo(&(b2 * inv), &n2), n2))
}

/// Combines `k ≡ r1 (mod m1)` and `k ≡ r2 (mod m2)` for arbitrary moduli.
pub fn crt<T: Scalar>(r1: &T, m1: &T, r2: &T, m2: &T) -> Option<(T, T)> {
    let g = m1.gcd(m2);
    let diff = r2.clone() - r1.clone();
    if !diff.is_multiple_of(&g) {
        return None;
    }
    let l = m1.lcm(m2);
    if m1.is_one() {
        return Some((modulo(r2, &l), l));
    }
    // r1 + m1·s ≡ r2 (mod m2)
    let (s, step) = solve_linear(m1, &diff, m2)?;
    debug_assert_eq!(step.clone() * g, m2.clone());
    let r = r1.clone() + m1.clone() * s;
    Some((modulo(&r, &l), l))
}

/// CRT idempotent for the prime-power part `q` of `n`: `e ≡ 1 (mod q)`,
/// `e ≡ 0 (mod n/q)`.
pub fn idempotent<T: Scalar>(q: &T, n: &T) -> T {
    let cof = n.clone() / q.clone();
    let inv = mod_inv(&cof, q).expect("prime-power part is coprime to its cofactor");
    modulo(&(cof * inv), n)
}

/// Multiplicative order of the unit `a` modulo `n` (`n ≥ 1`).
pub fn unit_order<T: Scalar>(a: &T, n: &T) -> u64 {
    let one = modulo(&T::one(), n);
    let a = modulo(a, n);
    let mut x = a.clone();
    let mut k = 1u64;
    while x != one {
        x = modulo(&(x * a.clone()), n);
        k += 1;
    }
    k
}

/// Units of `ℤ/nℤ` in increasing order.
pub fn units<T: Scalar>(n: &T) -> Vec<T> {
    let mut out = Vec::new();
    let mut k = T::zero();
    while k < *n {
        if k.gcd(n).is_one() {
            out.push(k.clone());
        }
        k = k + T::one();
    }
    out
}
