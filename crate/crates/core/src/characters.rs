//! Dirichlet characters modulo an odd prime, Gauss sums and root numbers.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::arith::{factor_pos, gcd, is_prime, kloosterman_real, pow_mod, inv_mod};
use crate::arith::{RealCharacter, ResidueCharacter};
use crate::error::{Error, Result};
use crate::sum::ComplexKahanSum;

pub const MAX_MODULUS: u64 = 100_000;

/// `e(k/m) = exp(2πik/m)` for `k` reduced modulo `m`.
#[inline]
pub fn e_frac(k: i64, m: u64) -> Complex64 {
    let r = k.rem_euclid(m as i64) as f64 / m as f64;
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// The character group of `(Z/qZ)*` for an odd prime `q`, indexed against
/// the least primitive root.
#[derive(Debug, Clone)]
pub struct PrimeCharacterGroup {
    q: u64,
    g: u64,
    dlog: Vec<u32>,
    roots: Vec<Complex64>,
}

impl PrimeCharacterGroup {
    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    /// Discrete logarithm `ind(n)` base `g`; `None` when `q | n`.
    pub fn ind(&self, n: i64) -> Option<u32> {
        let r = n.rem_euclid(self.q as i64) as usize;
        (r != 0).then(|| self.dlog[r])
    }

    /// `e(j/(q−1))`.
    pub fn root(&self, j: u64) -> Complex64 {
        self.roots[(j % (self.q - 1)) as usize]
    }

    /// Number of even primitive characters, `(q−3)/2`.
    pub fn phi_plus(&self) -> u64 {
        (self.q - 3) / 2
    }
}

/// Least primitive root modulo the prime `q`.
pub fn least_primitive_root(q: u64) -> u64 {
    if q == 2 {
        return 1;
    }
    let ps: Vec<u64> = factor_pos(q - 1).factors.iter().map(|&(p, _)| p).collect();
    (2..q)
        .find(|&g| ps.iter().all(|&p| pow_mod(g, (q - 1) / p, q) != 1))
        .expect("prime modulus has a primitive root")
}

/// Build the character group modulo the odd prime `q`.
pub fn build_group(q: u64) -> Result<Arc<PrimeCharacterGroup>> {
    if q.is_multiple_of(2) || !is_prime(q) {
        return Err(Error::NotOddPrime(q));
    }
    if q > MAX_MODULUS {
        return Err(Error::ModulusOutOfRange(q, 3, MAX_MODULUS));
    }
    let g = least_primitive_root(q);
    let mut dlog = vec![0u32; q as usize];
    let mut x = 1u64;
    for i in 0..q - 1 {
        dlog[x as usize] = i as u32;
        x = x * g % q;
    }
    let roots = (0..q - 1).map(|j| e_frac(j as i64, q - 1)).collect();
    Ok(Arc::new(PrimeCharacterGroup { q, g, dlog, roots }))
}

/// `χ_k(n) = e(k·ind(n)/(q−1))`.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    group: Arc<PrimeCharacterGroup>,
    k: u64,
}

impl DirichletCharacter {
    pub fn new(group: &Arc<PrimeCharacterGroup>, k: u64) -> Result<Self> {
        if k >= group.q - 1 {
            return Err(Error::BadCharacterIndex(k));
        }
        Ok(Self {
            group: Arc::clone(group),
            k,
        })
    }

    pub fn group(&self) -> &Arc<PrimeCharacterGroup> {
        &self.group
    }

    pub fn index(&self) -> u64 {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.group.q
    }

    pub fn is_principal(&self) -> bool {
        self.k == 0
    }

    pub fn is_even(&self) -> bool {
        self.k.is_multiple_of(2)
    }

    pub fn is_primitive(&self) -> bool {
        self.k != 0
    }

    pub fn conj(&self) -> Self {
        let m = self.group.q - 1;
        Self {
            group: Arc::clone(&self.group),
            k: (m - self.k) % m,
        }
    }

    #[inline]
    pub fn eval(&self, n: i64) -> Complex64 {
        match self.group.ind(n) {
            Some(i) => self.group.roots[((self.k * i as u64) % (self.group.q - 1)) as usize],
            None => Complex64::new(0.0, 0.0),
        }
    }
}

impl ResidueCharacter for DirichletCharacter {
    fn modulus(&self) -> u64 {
        self.group.q
    }

    fn value(&self, n: i64) -> Complex64 {
        self.eval(n)
    }
}

/// The product `χψ` modulo `qD`, evaluated as `χ(n)ψ(n)`.
#[derive(Debug, Clone, Copy)]
pub struct ProductCharacter<'a> {
    pub chi: &'a DirichletCharacter,
    pub psi: &'a RealCharacter,
}

impl ResidueCharacter for ProductCharacter<'_> {
    fn modulus(&self) -> u64 {
        self.chi.modulus() * self.psi.modulus()
    }

    fn value(&self, n: i64) -> Complex64 {
        self.chi.eval(n) * self.psi.eval(n) as f64
    }
}

/// The even primitive characters `k = 2, 4, …, q−3`.
pub fn enumerate_even_primitive(group: &Arc<PrimeCharacterGroup>) -> Vec<DirichletCharacter> {
    (2..group.q - 1)
        .step_by(2)
        .map(|k| DirichletCharacter {
            group: Arc::clone(group),
            k,
        })
        .collect()
}

/// `τ(χ) = Σ_{a mod m} χ(a) e(a/m)` for any character of modulus `m`.
pub fn gauss_sum_of(chi: &dyn ResidueCharacter) -> Complex64 {
    let m = chi.modulus();
    let mut acc = ComplexKahanSum::new();
    for a in 1..=m {
        let v = chi.value(a as i64);
        if v != Complex64::new(0.0, 0.0) {
            acc.add(v * e_frac(a as i64, m));
        }
    }
    acc.value()
}

/// Gauss sum of a character modulo `q`. For the principal character this is
/// `−1`.
pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    gauss_sum_of(chi)
}

/// A unimodular root number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootNumber {
    pub value: Complex64,
}

/// `ε(χ) = τ(χ)/√q`; the principal character is rejected.
pub fn epsilon(chi: &DirichletCharacter) -> Result<RootNumber> {
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    Ok(RootNumber {
        value: gauss_sum(chi) / (chi.modulus() as f64).sqrt(),
    })
}

/// `ε(ψ) = τ(ψ)/√D`, with the positive square root.
pub fn epsilon_real(psi: &RealCharacter) -> RootNumber {
    RootNumber {
        value: gauss_sum_of(psi) / (psi.modulus() as f64).sqrt(),
    }
}

/// `|ε(χψ) − χ(D)ψ(q)ε(χ)ε(ψ)|` with the left side from a direct Gauss sum
/// modulo `qD`.
pub fn epsilon_factorization_check(chi: &DirichletCharacter, psi: &RealCharacter) -> Result<f64> {
    let (q, d) = (chi.modulus(), psi.modulus());
    if gcd(q, d) != 1 {
        return Err(Error::NotCoprime(q, d));
    }
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    let prod = ProductCharacter { chi, psi };
    let lhs = gauss_sum_of(&prod) / ((q * d) as f64).sqrt();
    let rhs = chi.eval(d as i64)
        * psi.eval(q as i64) as f64
        * epsilon(chi)?.value
        * epsilon_real(psi).value;
    Ok((lhs - rhs).norm())
}

/// Root number `ε(χψ)` via the factorization `χ(D)ψ(q)ε(χ)ε(ψ)`.
pub fn epsilon_twisted(chi: &DirichletCharacter, psi: &RealCharacter) -> Result<Complex64> {
    let (q, d) = (chi.modulus(), psi.modulus());
    if gcd(q, d) != 1 {
        return Err(Error::NotCoprime(q, d));
    }
    let e_chi = epsilon(chi)?.value;
    Ok(chi.eval(d as i64) * psi.eval(q as i64) as f64 * e_chi * epsilon_real(psi).value)
}

/// `ε(χ)ε(χψ)`, the root number of the functional equation of
/// `L(s, χ)L(s, χψ)`.
pub fn epsilon_product(chi: &DirichletCharacter, psi: &RealCharacter) -> Result<Complex64> {
    Ok(epsilon(chi)?.value * epsilon_twisted(chi, psi)?)
}

/// Direct `Σ⁺_χ χ(m) χ̄(n)` over even primitive characters.
pub fn orthogonality_direct(m: i64, n: i64, group: &Arc<PrimeCharacterGroup>) -> Result<Complex64> {
    let q = group.q as i64;
    if m.rem_euclid(q) == 0 || n.rem_euclid(q) == 0 {
        return Err(Error::Precondition(format!("(mn, q) > 1 for m={m}, n={n}, q={q}")));
    }
    let mut acc = ComplexKahanSum::new();
    for chi in enumerate_even_primitive(group) {
        acc.add(chi.eval(m) * chi.eval(n).conj());
    }
    Ok(acc.value())
}

/// `1_{q|m−n}·φ(q)/2 + 1_{q|m+n}·φ(q)/2 − 1`.
pub fn orthogonality_closed(m: i64, n: i64, q: u64) -> i64 {
    let qi = q as i64;
    let half = (qi - 1) / 2;
    let mut v = -1;
    if (m - n).rem_euclid(qi) == 0 {
        v += half;
    }
    if (m + n).rem_euclid(qi) == 0 {
        v += half;
    }
    v
}

/// `Σ⁺_χ χ(m) χ̄(n)` by enumeration, asserted integral and rounded.
pub fn orthogonality(m: i64, n: i64, q: u64) -> Result<i64> {
    let group = build_group(q)?;
    let z = orthogonality_direct(m, n, &group)?;
    let r = z.re.round();
    if (z - Complex64::new(r, 0.0)).norm() > 1e-9 {
        return Err(Error::Precondition(format!(
            "orthogonality sum {z} not within 1e-9 of an integer"
        )));
    }
    Ok(r as i64)
}

/// Both evaluations of `Σ⁺ ε(χ)ε(χψ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonPairSum {
    pub direct: Complex64,
    pub closed: Complex64,
}

impl EpsilonPairSum {
    pub fn residual(&self) -> f64 {
        (self.direct - self.closed).norm()
    }
}

/// `Σ⁺ ε(χ)ε(χψ)` directly and through
/// `(ψ(q)ε(ψ)φ(q)/2q)(S(1,D̄;q) + S(1,−D̄;q)) − ψ(q)ε(ψ)/q`.
pub fn epsilon_pair_sum(q: u64, psi: &RealCharacter) -> Result<EpsilonPairSum> {
    let group = build_group(q)?;
    let d = psi.modulus();
    if gcd(q, d) != 1 {
        return Err(Error::NotCoprime(q, d));
    }
    let mut acc = ComplexKahanSum::new();
    for chi in enumerate_even_primitive(&group) {
        let e1 = epsilon(&chi)?.value;
        let e2 = gauss_sum_of(&ProductCharacter { chi: &chi, psi }) / ((q * d) as f64).sqrt();
        acc.add(e1 * e2);
    }
    let dbar = inv_mod(d as i64, q).expect("coprime") as i64;
    let k = kloosterman_real(1, dbar, q) + kloosterman_real(1, -dbar, q);
    let pe = psi.eval(q as i64) as f64 * epsilon_real(psi).value;
    let qf = q as f64;
    let closed = pe * ((qf - 1.0) / (2.0 * qf) * k) - pe / qf;
    Ok(EpsilonPairSum {
        direct: acc.value(),
        closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_examples() {
        let g7 = build_group(7).unwrap();
        assert_eq!(g7.generator(), 3);
        assert_eq!(g7.ind(2), Some(2));
        assert_eq!(build_group(5).unwrap().generator(), 2);
        assert_eq!(build_group(9).unwrap_err(), Error::NotOddPrime(9));
        assert_eq!(build_group(2).unwrap_err(), Error::NotOddPrime(2));
        assert!(build_group(100_003).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let idx = |q| -> Vec<u64> {
            enumerate_even_primitive(&build_group(q).unwrap())
                .iter()
                .map(|c| c.index())
                .collect()
        };
        assert_eq!(idx(7), vec![2, 4]);
        assert_eq!(idx(5), vec![2]);
        assert_eq!(idx(13).len(), 5);
    }

    #[test]
    fn gauss_sum_examples() {
        let psi = RealCharacter::new(5).unwrap();
        assert!((gauss_sum_of(&psi) - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
        let g = build_group(13).unwrap();
        let principal = DirichletCharacter::new(&g, 0).unwrap();
        assert!((gauss_sum(&principal) + 1.0).norm() < 1e-12);
        assert_eq!(epsilon(&principal).unwrap_err(), Error::PrincipalCharacter);
        for k in 1..12 {
            let chi = DirichletCharacter::new(&g, k).unwrap();
            assert!((gauss_sum(&chi).norm() - 13f64.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn real_gauss_sums_are_root_d() {
        for d in [5u64, 13, 17, 21, 29, 33, 37, 41, 57, 65, 85, 93] {
            let psi = RealCharacter::new(d).unwrap();
            let t = gauss_sum_of(&psi);
            assert!((t - Complex64::new((d as f64).sqrt(), 0.0)).norm() < 1e-10, "D={d}");
        }
    }

    #[test]
    fn factorization_examples() {
        let psi = RealCharacter::new(5).unwrap();
        let g7 = build_group(7).unwrap();
        let chi = DirichletCharacter::new(&g7, 2).unwrap();
        assert!(epsilon_factorization_check(&chi, &psi).unwrap() < 1e-10);
        let g13 = build_group(13).unwrap();
        let chi = DirichletCharacter::new(&g13, 4).unwrap();
        assert!(epsilon_factorization_check(&chi, &psi).unwrap() < 1e-10);
        let g5 = build_group(5).unwrap();
        let chi = DirichletCharacter::new(&g5, 2).unwrap();
        assert_eq!(
            epsilon_factorization_check(&chi, &psi).unwrap_err(),
            Error::NotCoprime(5, 5)
        );
    }

    #[test]
    fn orthogonality_examples() {
        assert_eq!(orthogonality(1, 1, 7).unwrap(), 2);
        assert_eq!(orthogonality(2, 3, 11).unwrap(), -1);
        assert_eq!(orthogonality(1, 10, 11).unwrap(), 4);
        assert!(orthogonality(7, 1, 7).is_err());
    }

    #[test]
    fn epsilon_pair_examples() {
        let p5 = RealCharacter::new(5).unwrap();
        let p13 = RealCharacter::new(13).unwrap();
        assert!(epsilon_pair_sum(7, &p5).unwrap().residual() < 1e-10);
        let v = epsilon_pair_sum(13, &p5).unwrap();
        assert!(v.direct.norm() <= 3.0 * 13f64.sqrt());
        assert!(epsilon_pair_sum(11, &p13).unwrap().residual() < 1e-10);
    }

    #[test]
    fn conjugate_gauss_sum() {
        let g = build_group(29).unwrap();
        for k in 1..28 {
            let chi = DirichletCharacter::new(&g, k).unwrap();
            let parity = chi.eval(-1);
            let lhs = gauss_sum(&chi.conj());
            let rhs = parity * gauss_sum(&chi).conj();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }
}
