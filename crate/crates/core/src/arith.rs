//! Integer factorization, the real character ψ and the multiplicative and
//! exponential sums built on it.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::{kahan_sum, ComplexKahanSum};

/// A positive integer together with its canonical factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInt {
    pub n: u64,
    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInt {
    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn is_cubefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e <= 2)
    }

    /// All positive divisors in ascending order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn num_divisors(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    pub fn mobius(&self) -> i64 {
        if self.is_squarefree() {
            if self.factors.len().is_multiple_of(2) {
                1
            } else {
                -1
            }
        } else {
            0
        }
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn gcd_i64(a: i64, b: i64) -> u64 {
    gcd(a.unsigned_abs(), b.unsigned_abs())
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a.rem_euclid(m as i64) as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho. `n` must be odd and composite.
fn pollard_rho(n: u64) -> u64 {
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
        let (mut x, mut ys, mut g);
        loop {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            loop {
                ys = y;
                for _ in 0..r.min(128).min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += 128;
                if k >= r || g != 1 {
                    break;
                }
            }
            r *= 2;
            if g != 1 {
                break;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g != 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_large(d, out);
    split_large(n / d, out);
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Canonical factorization: trial division up to 10⁶, then Miller–Rabin and
/// Pollard rho on whatever remains.
pub fn factor(n: u64) -> Result<FactoredInt> {
    if n == 0 {
        return Err(Error::NonPositive(0));
    }
    if n > i64::MAX as u64 {
        return Err(Error::Precondition(format!("{n} exceeds 2^63-1")));
    }
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut m = n;
    for p in [2u64, 3] {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    }
    let mut p = 5u64;
    let mut step = 2u64;
    while p <= TRIAL_LIMIT && p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += step;
        step = 6 - step;
    }
    if m > 1 {
        let mut big = Vec::new();
        split_large(m, &mut big);
        big.sort_unstable();
        for q in big {
            match factors.last_mut() {
                Some((last, e)) if *last == q => *e += 1,
                _ => factors.push((q, 1)),
            }
        }
    }
    Ok(FactoredInt { n, factors })
}

/// Factorization of a value already known to be positive and in range.
pub(crate) fn factor_pos(n: u64) -> FactoredInt {
    factor(n).expect("positive argument")
}

pub fn mobius(n: u64) -> i64 {
    factor_pos(n).mobius()
}

pub fn divisors(n: u64) -> Vec<u64> {
    factor_pos(n).divisors()
}

/// Primes up to `n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest-prime-factor table for fast bulk factorization of small integers.
#[derive(Debug, Clone)]
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: u64) -> Self {
        assert!(limit <= 10_000_000, "sieve limit above 10^7");
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    /// Table `t[n] = f(n)` for `1 ≤ n ≤ limit` of a multiplicative function
    /// given by its values on prime powers. `t[0]` is zero.
    pub fn multiplicative<T, F>(&self, f: F) -> Vec<T>
    where
        T: Copy + Default + std::ops::Mul<Output = T> + From<u8>,
        F: Fn(u64, u32) -> T,
    {
        let n = self.spf.len() - 1;
        let mut t = vec![T::default(); n + 1];
        if n >= 1 {
            t[1] = T::from(1u8);
        }
        for m in 2..=n {
            let p = self.spf[m] as usize;
            let mut rest = m;
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            t[m] = t[rest] * f(p as u64, e);
        }
        t
    }
}

/// A character on the integers, periodic modulo [`modulus`](Self::modulus).
pub trait ResidueCharacter: Sync {
    fn modulus(&self) -> u64;
    fn value(&self, n: i64) -> Complex64;
}

/// Kronecker symbol `(a/n)`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return i32::from(a == 1 || a == -1);
    }
    let mut sign = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -1;
        }
    }
    let v = n.trailing_zeros();
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            sign = -sign;
        }
        n >>= v;
    }
    sign * jacobi(a.rem_euclid(n), n)
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
fn jacobi(a: i64, n: i64) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    let (mut a, mut n) = (a.rem_euclid(n), n);
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                t = -t;
            }
        }
        (a, n) = (n, a);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// The even real primitive character `ψ(n) = (D/n)` modulo a squarefree
/// `D ≡ 1 (mod 4)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealCharacter {
    d: u64,
    table: Vec<i8>,
    d_factors: Vec<u64>,
}

impl RealCharacter {
    pub fn new(d: u64) -> Result<Self> {
        if d <= 1 || d % 4 != 1 || d > 1 << 31 {
            return Err(Error::BadDiscriminant(d));
        }
        let f = factor_pos(d);
        if !f.is_squarefree() {
            return Err(Error::BadDiscriminant(d));
        }
        let table = (0..d)
            .map(|n| kronecker(d as i64, n as i64) as i8)
            .collect();
        let d_factors = f.factors.iter().map(|&(p, _)| p).collect();
        Ok(Self { d, table, d_factors })
    }

    pub fn modulus(&self) -> u64 {
        self.d
    }

    /// Prime divisors of `D`, ascending.
    pub fn prime_divisors(&self) -> &[u64] {
        &self.d_factors
    }

    #[inline]
    pub fn eval(&self, n: i64) -> i32 {
        self.table[n.rem_euclid(self.d as i64) as usize] as i32
    }

    #[inline]
    pub fn eval_u(&self, n: u64) -> i32 {
        self.table[(n % self.d) as usize] as i32
    }
}

impl ResidueCharacter for RealCharacter {
    fn modulus(&self) -> u64 {
        self.d
    }

    fn value(&self, n: i64) -> Complex64 {
        Complex64::new(self.eval(n) as f64, 0.0)
    }
}

pub fn eval_psi(psi: &RealCharacter, n: i64) -> i32 {
    psi.eval(n)
}

/// `(1⋆ψ)` at the prime power `p^e`.
#[inline]
pub fn one_star_psi_local(psi_p: i32, e: u32) -> u64 {
    match psi_p {
        1 => e as u64 + 1,
        0 => 1,
        _ => u64::from(e.is_multiple_of(2)),
    }
}

/// `ρ = μ⋆(μψ)` at the prime power `p^e`.
#[inline]
pub fn rho_local(psi_p: i32, e: u32) -> i64 {
    match e {
        0 => 1,
        1 => -(1 + psi_p as i64),
        2 => psi_p as i64,
        _ => 0,
    }
}

/// `(1⋆ψ)(n) = Σ_{d|n} ψ(d)`.
pub fn one_star_psi(psi: &RealCharacter, n: u64) -> u64 {
    assert!(n >= 1, "one_star_psi requires n ≥ 1");
    factor_pos(n)
        .factors
        .iter()
        .map(|&(p, e)| one_star_psi_local(psi.eval_u(p), e))
        .product()
}

/// The mollifier coefficient `ρ(a)`, the Dirichlet inverse of `1⋆ψ`.
pub fn eval_rho(psi: &RealCharacter, a: u64) -> i64 {
    assert!(a >= 1, "eval_rho requires a ≥ 1");
    factor_pos(a)
        .factors
        .iter()
        .map(|&(p, e)| rho_local(psi.eval_u(p), e))
        .product()
}

/// Table of `(1⋆ψ)(n)` for `n ≤ sieve.limit()`.
pub fn one_star_psi_table(psi: &RealCharacter, sieve: &SpfSieve) -> Vec<u32> {
    sieve.multiplicative(|p, e| one_star_psi_local(psi.eval_u(p), e) as u32)
}

/// Ramanujan sum `c_ℓ(r) = Σ_{d | (r, ℓ)} μ(ℓ/d) d`.
pub fn ramanujan_sum(r: i64, l: u64) -> i64 {
    assert!(l >= 1, "ramanujan_sum requires ℓ ≥ 1");
    let g = if r == 0 { l } else { gcd(r.unsigned_abs(), l) };
    divisors(g)
        .into_iter()
        .map(|d| mobius(l / d) * d as i64)
        .sum()
}

/// Kloosterman sum `Σ*_{x mod c} twist(x) e((m x + n x̄)/c)`.
pub fn kloosterman(
    m: i64,
    n: i64,
    c: u64,
    twist: Option<&dyn ResidueCharacter>,
) -> Result<Complex64> {
    if c == 0 {
        return Err(Error::NonPositive(0));
    }
    if let Some(t) = twist {
        if t.modulus() != c {
            return Err(Error::TwistModulus {
                expected: c,
                got: t.modulus(),
            });
        }
    }
    let ci = c as i64;
    let (m, n) = (m.rem_euclid(ci) as u64, n.rem_euclid(ci) as u64);
    let mut acc = ComplexKahanSum::new();
    for x in 0..c {
        let Some(xb) = inv_mod(x as i64, c) else {
            continue;
        };
        let k = (mul_mod(m, x, c) + mul_mod(n, xb, c)) % c;
        let (s, co) = (TAU * k as f64 / c as f64).sin_cos();
        let w = twist.map_or(Complex64::new(1.0, 0.0), |t| t.value(x as i64));
        acc.add(w * Complex64::new(co, s));
    }
    Ok(acc.value())
}

/// Real Kloosterman sum `S(m, n; c)` without twist.
pub fn kloosterman_real(m: i64, n: i64, c: u64) -> f64 {
    kloosterman(m, n, c, None).expect("untwisted").re
}

/// `Σ_{n ≤ x} (1⋆ψ)(n)/n` in ascending order with compensated summation.
pub fn lacunary_partial_sum(psi: &RealCharacter, x: f64) -> f64 {
    assert!(x >= 1.0, "lacunary_partial_sum requires x ≥ 1");
    let n = x.floor() as u64;
    let t = one_star_psi_table(psi, &SpfSieve::new(n));
    kahan_sum((1..=n as usize).map(|k| t[k] as f64 / k as f64))
}

/// `Σ_{lo < n ≤ hi} τ(n)^k (1⋆ψ)(n)/n`, a nonnegative divisor-weighted
/// partial sum.
pub fn divisor_weighted_sum(psi: &RealCharacter, lo: u64, hi: u64, k: u32) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let sieve = SpfSieve::new(hi);
    let ops = one_star_psi_table(psi, &sieve);
    let tau = sieve.multiplicative(|_, e| e as f64 + 1.0);
    kahan_sum(
        ((lo + 1) as usize..=hi as usize).map(|n| tau[n].powi(k as i32) * ops[n] as f64 / n as f64),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_examples() {
        assert!(factor(1).unwrap().factors.is_empty());
        assert_eq!(factor(60).unwrap().factors, vec![(2, 2), (3, 1), (5, 1)]);
        assert_eq!(
            factor(1_000_000_007).unwrap().factors,
            vec![(1_000_000_007, 1)]
        );
        assert_eq!(factor(0), Err(Error::NonPositive(0)));
    }

    #[test]
    fn factor_large_semiprime() {
        let (p, q) = (1_000_000_007u64, 998_244_353u64);
        assert_eq!(factor(p * q).unwrap().factors, vec![(q, 1), (p, 1)]);
        let f = factor(4_611_686_014_132_420_609).unwrap();
        assert_eq!(f.factors, vec![(2_147_483_647, 2)]);
    }

    #[test]
    fn primality_oracle_by_trial_division() {
        for n in 0..20_000u64 {
            let slow = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), slow, "n={n}");
        }
    }

    #[test]
    fn psi_examples() {
        let p5 = RealCharacter::new(5).unwrap();
        assert_eq!(eval_psi(&p5, 2), -1);
        assert_eq!(eval_psi(&p5, 10), 0);
        assert_eq!(eval_psi(&p5, -1), 1);
        let p13 = RealCharacter::new(13).unwrap();
        assert_eq!(eval_psi(&p13, 3), 1);
    }

    #[test]
    fn kronecker_matches_square_enumeration() {
        for d in (5..=50u64).filter(|d| d % 4 == 1) {
            let Ok(psi) = RealCharacter::new(d) else {
                continue;
            };
            // For prime D the character is the Legendre symbol.
            if !is_prime(d) {
                continue;
            }
            let squares: Vec<u64> = (1..d).map(|x| x * x % d).collect();
            for n in 1..d {
                let expect = if squares.contains(&n) { 1 } else { -1 };
                assert_eq!(psi.eval_u(n), expect, "D={d} n={n}");
            }
        }
    }

    #[test]
    fn rejects_bad_discriminants() {
        for d in [0u64, 1, 3, 8, 12, 25, 45] {
            assert!(RealCharacter::new(d).is_err(), "D={d}");
        }
        assert!(RealCharacter::new(65).is_ok());
    }

    #[test]
    fn one_star_psi_and_rho_examples() {
        let psi = RealCharacter::new(5).unwrap();
        assert_eq!(one_star_psi(&psi, 1), 1);
        assert_eq!(one_star_psi(&psi, 2), 0);
        assert_eq!(one_star_psi(&psi, 4), 1);
        assert_eq!(eval_rho(&psi, 2), 0);
        assert_eq!(eval_rho(&psi, 4), -1);
        assert_eq!(eval_rho(&psi, 8), 0);
    }

    #[test]
    fn ramanujan_examples_and_exponential_sum() {
        assert_eq!(ramanujan_sum(1, 6), 1);
        assert_eq!(ramanujan_sum(0, 6), 2);
        // e(4/6) + e(20/6) = −1/2 − 1/2
        assert_eq!(ramanujan_sum(4, 6), -1);
        for l in 1..=300u64 {
            for r in -50..=50i64 {
                let direct: f64 = (1..=l)
                    .filter(|&k| gcd(k, l) == 1)
                    .map(|k| (TAU * (r * k as i64) as f64 / l as f64).cos())
                    .sum();
                assert!(
                    (direct - ramanujan_sum(r, l) as f64).abs() < 1e-8,
                    "r={r} l={l}"
                );
            }
        }
    }

    #[test]
    fn kloosterman_examples() {
        let s = kloosterman(1, 1, 5, None).unwrap();
        assert!((s.re - (2.0 + 2.0 * (2.0 * TAU / 5.0).cos())).abs() < 1e-12);
        assert!((s.re - 0.381_966_011_250_105).abs() < 1e-12);
        assert!((kloosterman_real(0, 0, 12) - 4.0).abs() < 1e-12);
        assert!(kloosterman(1, 1, 7, None).unwrap().im.abs() < 1e-12);
        let psi = RealCharacter::new(5).unwrap();
        assert_eq!(
            kloosterman(1, 1, 7, Some(&psi)),
            Err(Error::TwistModulus {
                expected: 7,
                got: 5
            })
        );
    }

    #[test]
    fn weil_bound() {
        for c in 1..=200u64 {
            let f = factor_pos(c);
            let tau = f.num_divisors() as f64;
            for m in -20..=20i64 {
                for n in -20..=20i64 {
                    let s = kloosterman_real(m, n, c);
                    let g = gcd(gcd(m.unsigned_abs(), n.unsigned_abs()), c) as f64;
                    assert!(s.abs() <= tau * (g * c as f64).sqrt() + 1e-9, "{m} {n} {c}");
                }
            }
        }
    }

    #[test]
    fn lacunary_small_x() {
        let psi = RealCharacter::new(5).unwrap();
        assert_eq!(lacunary_partial_sum(&psi, 1.0), 1.0);
        // n ≤ 10 with (1⋆ψ)(n) ≠ 0: 1, 4 (1), 5 (1), 9 (1): 1 + 1/4 + 1/5 + 1/9.
        let exact = 1.0 + 0.25 + 0.2 + 1.0 / 9.0;
        assert!((lacunary_partial_sum(&psi, 10.0) - exact).abs() < 1e-15);
    }

    #[test]
    fn sieve_multiplicative_matches_direct() {
        let psi = RealCharacter::new(13).unwrap();
        let s = SpfSieve::new(3000);
        let t = one_star_psi_table(&psi, &s);
        for n in 1..=3000 {
            assert_eq!(t[n as usize] as u64, one_star_psi(&psi, n));
        }
    }
}
