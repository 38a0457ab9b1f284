//! Central values `L_χ(1/2) = L(1/2, χ) L(1/2, χψ)` through the approximate
//! functional equation, and an independent Hurwitz-zeta evaluation.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, one_star_psi_table, RealCharacter, ResidueCharacter, SpfSieve};
use crate::characters::{epsilon_product, DirichletCharacter, ProductCharacter};
use crate::error::{Error, Result};
use crate::par;
use crate::special::{base_weights, digamma, gamma_ratio, WeightFunction, WeightKind};
use crate::sum::{ComplexKahanSum, KahanSum};

/// Truncation parameters of the approximate functional equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AFEConfig {
    /// `Q = q√D/π`.
    pub q_param: f64,
    pub n_max: u64,
    /// Certified bound on the neglected tail of both series, for both the
    /// central value and the derivative combination.
    pub tail_budget: f64,
}

impl AFEConfig {
    /// `n_max = ⌈Q·max(30, 10 log Q)⌉` with its certified tail.
    pub fn new(q: u64, d: u64) -> Self {
        let q_param = q as f64 * (d as f64).sqrt() / PI;
        let log_q = q_param.ln();
        let n_max = (q_param * 30f64.max(10.0 * log_q)).ceil() as u64;
        Self::with_n_max(q_param, n_max)
    }

    pub fn with_n_max(q_param: f64, n_max: u64) -> Self {
        let tail_budget = tail_bound(q_param, n_max);
        Self {
            q_param,
            n_max,
            tail_budget,
        }
    }

    pub fn log_q(&self) -> f64 {
        self.q_param.ln()
    }
}

/// `(1/2π) ∫ |w̃(c+it)| dt`, so that `|w(x)| ≤ B(c) x^{−c}`.
fn mellin_abs_integral(w: &WeightFunction, c: f64) -> f64 {
    let h = 1.0 / 16.0;
    let mut acc = KahanSum::new();
    let n = (200.0 / h) as usize;
    for k in 0..=n {
        let s = Complex64::new(c, k as f64 * h);
        let f = if k == 0 { 0.5 } else { 1.0 };
        acc.add(f * w.mellin(s).norm());
    }
    acc.value() * h / PI
}

/// Bound on `Σ_{n>N} |(1⋆ψ)(n)| n^{−1/2} |w(n/Q)|` summed over both series of
/// the AFE, using `(1⋆ψ)(n) ≤ τ(n) ≤ 2√n`.
pub fn tail_bound(q_param: f64, n_max: u64) -> f64 {
    let log_q = q_param.ln().max(1e-3);
    let nf = n_max as f64;
    [6.0, 10.0, 14.0, 20.0]
        .iter()
        .map(|&c| {
            let b = [WeightKind::V1, WeightKind::W1, WeightKind::W2]
                .iter()
                .map(|&k| mellin_abs_integral(&WeightFunction { kind: k, log_q }, c))
                .fold(0.0, f64::max);
            // Σ_{n>N} 2√n n^{−1/2} B Q^c n^{−c} ≤ 2 B Q^c N^{1−c}/(c−1), times two series.
            2.0 * 2.0 * b * (q_param / nf).powf(c) * nf / (c - 1.0)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `L_χ(1/2)`, `L_χ(1/2) + L′_χ(1/2)/2 log Q` and `ε(χ)ε(χψ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralValuePair {
    pub l_central: Complex64,
    pub l_combo: Complex64,
    pub epsilon_product: Complex64,
}

/// Precomputed Dirichlet coefficients and weights for one `(q, D)`.
#[derive(Debug, Clone)]
pub struct AfeEvaluator {
    q: u64,
    psi: RealCharacter,
    cfg: AFEConfig,
    /// `(1⋆ψ)(n)/√n`, index `n`.
    coeff: Vec<f64>,
    v: Vec<f64>,
    w1: Vec<f64>,
    w2: Vec<f64>,
    /// Indices with nonzero coefficient and `q ∤ n`.
    support: Vec<u32>,
}

impl AfeEvaluator {
    pub fn new(q: u64, psi: &RealCharacter, cfg: AFEConfig) -> Result<Self> {
        let d = psi.modulus();
        if gcd(q, d) != 1 {
            return Err(Error::NotCoprime(q, d));
        }
        if cfg.tail_budget > 1e-10 {
            return Err(Error::Truncation {
                tail: cfg.tail_budget,
                budget: 1e-10,
            });
        }
        let n = cfg.n_max;
        let ops = one_star_psi_table(psi, &SpfSieve::new(n));
        let support: Vec<u32> = (1..=n as u32)
            .filter(|&k| ops[k as usize] != 0 && !(k as u64).is_multiple_of(q))
            .collect();
        let log_q = cfg.log_q();
        let weights = par::map_ordered(&support, |&k| {
            let x = k as f64 / cfg.q_param;
            let b = base_weights(x);
            (b.v, b.w1(x, log_q), b.w2(x, log_q))
        });
        let mut coeff = vec![0.0; n as usize + 1];
        let (mut v, mut w1, mut w2) = (coeff.clone(), coeff.clone(), coeff.clone());
        for (&k, &(a, b, c)) in support.iter().zip(&weights) {
            let k = k as usize;
            coeff[k] = ops[k] as f64 / (k as f64).sqrt();
            v[k] = a;
            w1[k] = b;
            w2[k] = c;
        }
        Ok(Self {
            q,
            psi: psi.clone(),
            cfg,
            coeff,
            v,
            w1,
            w2,
            support,
        })
    }

    pub fn config(&self) -> &AFEConfig {
        &self.cfg
    }

    pub fn psi(&self) -> &RealCharacter {
        &self.psi
    }

    pub fn evaluate(&self, chi: &DirichletCharacter) -> Result<CentralValuePair> {
        if chi.modulus() != self.q {
            return Err(Error::TwistModulus {
                expected: self.q,
                got: chi.modulus(),
            });
        }
        if chi.is_principal() {
            return Err(Error::PrincipalCharacter);
        }
        let eps = epsilon_product(chi, &self.psi)?;
        let (mut s_v, mut s_vd) = (ComplexKahanSum::new(), ComplexKahanSum::new());
        let (mut s_w1, mut s_w2) = (ComplexKahanSum::new(), ComplexKahanSum::new());
        for &k in &self.support {
            let k = k as usize;
            let z = chi.eval(k as i64) * self.coeff[k];
            let zb = z.conj();
            s_v.add(z * self.v[k]);
            s_vd.add(zb * self.v[k]);
            s_w1.add(z * self.w1[k]);
            s_w2.add(zb * self.w2[k]);
        }
        Ok(CentralValuePair {
            l_central: s_v.value() + eps * s_vd.value(),
            l_combo: s_w1.value() + eps * s_w2.value(),
            epsilon_product: eps,
        })
    }
}

/// Central value and derivative combination for one character.
pub fn afe_central(
    chi: &DirichletCharacter,
    psi: &RealCharacter,
    cfg: AFEConfig,
) -> Result<CentralValuePair> {
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    AfeEvaluator::new(chi.modulus(), psi, cfg)?.evaluate(chi)
}

// Bernoulli numbers B_2 .. B_20.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Hurwitz `ζ(s, a)` by Euler–Maclaurin with shift `n` and Bernoulli terms
/// through `B_{2j}` (`j ≤ 10`).
pub fn hurwitz_zeta_em(s: Complex64, a: f64, n: usize, j: usize) -> Complex64 {
    assert!(a > 0.0 && (1..=10).contains(&j));
    let mut acc = ComplexKahanSum::new();
    for k in 0..n {
        acc.add((-s * (k as f64 + a).ln()).exp());
    }
    let x = n as f64 + a;
    let lx = x.ln();
    let xs = (-s * lx).exp();
    acc.add(x * xs / (s - 1.0));
    acc.add(0.5 * xs);
    // term_j = B_{2j}/(2j)! · s(s+1)…(s+2j−2) · x^{−s−2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut xp = xs / x;
    for i in 1..=j {
        acc.add(BERNOULLI[i - 1] / fact * rising * xp);
        rising *= (s + (2 * i - 1) as f64) * (s + (2 * i) as f64);
        fact *= ((2 * i + 1) * (2 * i + 2)) as f64;
        xp /= x * x;
    }
    acc.value()
}

/// Hurwitz `ζ(s, a)` with shift 50 and Bernoulli terms through `B₁₆`.
pub fn hurwitz_zeta(s: Complex64, a: f64) -> Complex64 {
    hurwitz_zeta_em(s, a, 50, 8)
}

fn sum_values(chi: &dyn ResidueCharacter) -> Complex64 {
    let m = chi.modulus();
    (1..=m).map(|a| chi.value(a as i64)).sum()
}

/// `L(s, χ) = m^{−s} Σ_{a=1}^{m} χ(a) ζ(s, a/m)` for any character of modulus
/// `m`, `Re s > 0`. At `s = 1` the digamma form is used.
pub fn oracle_l(s: Complex64, chi: &dyn ResidueCharacter) -> Result<Complex64> {
    oracle_l_order(s, chi, 50, 8)
}

/// As [`oracle_l`] with an explicit Euler–Maclaurin order.
pub fn oracle_l_order(
    s: Complex64,
    chi: &dyn ResidueCharacter,
    n: usize,
    j: usize,
) -> Result<Complex64> {
    if s.re <= 0.0 {
        return Err(Error::Unsupported(format!("Re s = {} ≤ 0", s.re)));
    }
    let m = chi.modulus();
    let mf = m as f64;
    if s == Complex64::new(1.0, 0.0) {
        if sum_values(chi).norm() > 0.5 {
            return Err(Error::Pole("L(s, principal)", "1".into()));
        }
        let mut acc = ComplexKahanSum::new();
        for a in 1..=m {
            let v = chi.value(a as i64);
            if v != Complex64::new(0.0, 0.0) {
                acc.add(v * digamma(Complex64::new(a as f64 / mf, 0.0)));
            }
        }
        return Ok(-acc.value() / mf);
    }
    let mut acc = ComplexKahanSum::new();
    for a in 1..=m {
        let v = chi.value(a as i64);
        if v != Complex64::new(0.0, 0.0) {
            acc.add(v * hurwitz_zeta_em(s, a as f64 / mf, n, j));
        }
    }
    Ok((-s * mf.ln()).exp() * acc.value())
}

/// `L(1/2, χ) L(1/2, χψ)` from the Hurwitz oracle.
pub fn oracle_product(chi: &DirichletCharacter, psi: &RealCharacter) -> Result<Complex64> {
    oracle_product_at(Complex64::new(0.5, 0.0), chi, psi)
}

/// `L(s, χ) L(s, χψ)` from the Hurwitz oracle.
pub fn oracle_product_at(
    s: Complex64,
    chi: &DirichletCharacter,
    psi: &RealCharacter,
) -> Result<Complex64> {
    if gcd(chi.modulus(), psi.modulus()) != 1 {
        return Err(Error::NotCoprime(chi.modulus(), psi.modulus()));
    }
    Ok(oracle_l(s, chi)? * oracle_l(s, &ProductCharacter { chi, psi })?)
}

/// `L(1, ψ)`.
pub fn l_one(psi: &RealCharacter) -> f64 {
    oracle_l(Complex64::new(1.0, 0.0), psi).expect("nonprincipal").re
}

/// `L′(1, ψ)` by a fourth-order centred difference.
pub fn l_prime_one(psi: &RealCharacter) -> f64 {
    let h = 1e-3;
    let f = |t: f64| oracle_l(Complex64::new(1.0 + t, 0.0), psi).expect("Re s > 0").re;
    (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
}

/// `Λ_χ(s) = Q^s Γ(s/2)² L_χ(s)` divided by `Γ(1/4)²`.
pub fn completed_product(
    s: Complex64,
    chi: &DirichletCharacter,
    psi: &RealCharacter,
) -> Result<Complex64> {
    let q_param = chi.modulus() as f64 * (psi.modulus() as f64).sqrt() / PI;
    let g = gamma_ratio(s - 0.5);
    Ok((s * q_param.ln()).exp() * g * oracle_product_at(s, chi, psi)?)
}

/// One golden-file row: `q, k, D, Re L, Im L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub q: u64,
    pub k: u64,
    pub d: u64,
    pub re: f64,
    pub im: f64,
}

pub const GOLDEN_HEADER: &str = "q,k,D,re,im";

/// Write rows with 12 significant digits.
pub fn write_golden<W: Write>(rows: &[GoldenRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{GOLDEN_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{:.11e},{:.11e}", r.q, r.k, r.d, r.re, r.im)?;
    }
    Ok(())
}

pub fn read_golden<R: BufRead>(r: R) -> std::io::Result<Vec<GoldenRow>> {
    let bad = |msg: String| std::io::Error::new(std::io::ErrorKind::InvalidData, msg);
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == GOLDEN_HEADER) {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad(format!("line {}: expected 5 fields", i + 1)));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|e| bad(format!("line {}: {e}", i + 1)));
        let flt = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("line {}: {e}", i + 1)));
        out.push(GoldenRow {
            q: int(f[0])?,
            k: int(f[1])?,
            d: int(f[2])?,
            re: flt(f[3])?,
            im: flt(f[4])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{build_group, enumerate_even_primitive};

    #[test]
    fn hurwitz_reduces_to_zeta() {
        let z2 = hurwitz_zeta(Complex64::new(2.0, 0.0), 1.0);
        assert!((z2.re - PI * PI / 6.0).abs() < 1e-14);
        let zh = hurwitz_zeta(Complex64::new(0.5, 0.0), 1.0);
        assert!((zh.re + 1.460_354_508_809_586_8).abs() < 1e-13);
    }

    #[test]
    fn principal_mod_three_at_two() {
        let g = build_group(3).unwrap();
        let chi = DirichletCharacter::new(&g, 0).unwrap();
        let l = oracle_l(Complex64::new(2.0, 0.0), &chi).unwrap();
        assert!((l.re - 8.0 / 9.0 * PI * PI / 6.0).abs() < 1e-13);
        assert!(oracle_l(Complex64::new(1.0, 0.0), &chi).is_err());
    }

    #[test]
    fn l_one_closed_form() {
        let psi = RealCharacter::new(5).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let expect = 2.0 / 5f64.sqrt() * golden.ln();
        assert!((l_one(&psi) - expect).abs() < 1e-13);
        // continuity of the Hurwitz form through s = 1
        let near = oracle_l(Complex64::new(1.0 + 1e-7, 0.0), &psi).unwrap().re;
        assert!((near - expect).abs() < 1e-6);
    }

    #[test]
    fn two_orders_agree() {
        let g = build_group(13).unwrap();
        let chi = DirichletCharacter::new(&g, 2).unwrap();
        let s = Complex64::new(0.5, 0.0);
        let a = oracle_l_order(s, &chi, 50, 8).unwrap();
        let b = oracle_l_order(s, &chi, 30, 6).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn afe_matches_oracle_small() {
        let psi = RealCharacter::new(5).unwrap();
        let g = build_group(13).unwrap();
        let cfg = AFEConfig::new(13, 5);
        assert!(cfg.tail_budget <= 1e-10);
        let ev = AfeEvaluator::new(13, &psi, cfg).unwrap();
        for chi in enumerate_even_primitive(&g) {
            let v = ev.evaluate(&chi).unwrap();
            let o = oracle_product(&chi, &psi).unwrap();
            assert!((v.l_central - o).norm() < 1e-6, "k={}", chi.index());
            let vc = ev.evaluate(&chi.conj()).unwrap();
            assert!((vc.l_central - v.l_central.conj()).norm() < 1e-8);
            assert!((v.epsilon_product.norm() - 1.0).abs() < 1e-9);
        }
        let principal = DirichletCharacter::new(&g, 0).unwrap();
        assert_eq!(ev.evaluate(&principal).unwrap_err(), Error::PrincipalCharacter);
    }

    #[test]
    fn combo_matches_finite_difference() {
        let psi = RealCharacter::new(5).unwrap();
        let g = build_group(13).unwrap();
        let cfg = AFEConfig::new(13, 5);
        let ev = AfeEvaluator::new(13, &psi, cfg).unwrap();
        let h = 1e-3;
        for chi in enumerate_even_primitive(&g) {
            let f = |t: f64| oracle_product_at(Complex64::new(0.5 + t, 0.0), &chi, &psi).unwrap();
            let d = (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h);
            let want = f(0.0) + d / (2.0 * cfg.log_q());
            assert!((ev.evaluate(&chi).unwrap().l_combo - want).norm() < 1e-6, "k={}", chi.index());
        }
    }

    #[test]
    fn doubling_n_max_is_stable() {
        let psi = RealCharacter::new(5).unwrap();
        let g = build_group(13).unwrap();
        let cfg = AFEConfig::new(13, 5);
        let wide = AFEConfig::with_n_max(cfg.q_param, 2 * cfg.n_max);
        let (a, b) = (
            AfeEvaluator::new(13, &psi, cfg).unwrap(),
            AfeEvaluator::new(13, &psi, wide).unwrap(),
        );
        for chi in enumerate_even_primitive(&g) {
            let d = a.evaluate(&chi).unwrap().l_central - b.evaluate(&chi).unwrap().l_central;
            assert!(d.norm() < 1e-8);
        }
    }

    #[test]
    fn completed_product_functional_equation() {
        let psi = RealCharacter::new(5).unwrap();
        let g = build_group(13).unwrap();
        for chi in enumerate_even_primitive(&g) {
            let a = Complex64::new(0.1, 0.05);
            let l = completed_product(0.5 + a, &chi, &psi).unwrap();
            let r = completed_product(0.5 - a, &chi.conj(), &psi).unwrap();
            let eps = epsilon_product(&chi, &psi).unwrap();
            assert!((l / r - eps).norm() < 1e-10);
        }
    }

    #[test]
    fn golden_round_trip() {
        let rows = vec![GoldenRow {
            q: 13,
            k: 2,
            d: 5,
            re: 1.234_567_890_123_456,
            im: -0.000_123_456_789_012_345,
        }];
        let mut buf = Vec::new();
        write_golden(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("1.23456789012e0"));
        let back = read_golden(&buf[..]).unwrap();
        assert!((back[0].re - rows[0].re).abs() < 1e-11);
        assert!((back[0].im - rows[0].im).abs() < 1e-15);
        assert!(read_golden("q,k,D,re,im\n1,2\n".as_bytes()).is_err());
    }
}
