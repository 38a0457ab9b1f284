//! The mollifier, mollified first and second moments, the nonvanishing
//! census and the diagonal Euler products `𝒜`, `ℬ`, `𝒞`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{
    eval_rho, gcd, inv_mod, is_prime, kloosterman_real, one_star_psi_table, primes_up_to,
    rho_local, RealCharacter, SpfSieve,
};
use crate::characters::{build_group, enumerate_even_primitive, epsilon_real, DirichletCharacter};
use crate::error::{Error, Result};
use crate::lvalues::{hurwitz_zeta, AFEConfig, AfeEvaluator};
use crate::par;
use crate::special::base_weights;
use crate::sum::{ComplexKahanSum, KahanSum};

/// Default census threshold on `|L_χ(1/2)|`.
pub const CENSUS_THRESHOLD: f64 = 1e-8;

/// Coefficients `ρ(a)` for `a ≤ X`, `D ∤ a`, `ρ(a) ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MollifierTable {
    pub x: u64,
    pub coeffs: BTreeMap<u64, i64>,
}

pub fn build_mollifier(psi: &RealCharacter, x: u64) -> Result<MollifierTable> {
    if x == 0 {
        return Err(Error::NonPositive(0));
    }
    let d = psi.modulus();
    let coeffs = (1..=x)
        .filter(|a| a % d != 0)
        .filter_map(|a| {
            let r = eval_rho(psi, a);
            (r != 0).then_some((a, r))
        })
        .collect();
    Ok(MollifierTable { x, coeffs })
}

/// `M(χ) = Σ ρ(a) χ(a)/√a`.
pub fn eval_mollifier(table: &MollifierTable, chi: &DirichletCharacter) -> Complex64 {
    let mut acc = ComplexKahanSum::new();
    for (&a, &r) in &table.coeffs {
        acc.add(chi.eval(a as i64) * (r as f64 / (a as f64).sqrt()));
    }
    acc.value()
}

/// First and second mollified moments with the nonvanishing census.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub q: u64,
    #[serde(rename = "D")]
    pub d: u64,
    #[serde(rename = "X")]
    pub x: u64,
    pub s1_re: f64,
    pub s1_im: f64,
    pub s2: f64,
    pub ratio: f64,
    pub census_nonzero: u64,
    pub phi_plus: u64,
    pub threshold: f64,
}

impl MomentReport {
    pub fn s1(&self) -> Complex64 {
        Complex64::new(self.s1_re, self.s1_im)
    }

    /// `S1/φ⁺(q) − 1`.
    pub fn delta(&self) -> Complex64 {
        self.s1() / self.phi_plus as f64 - 1.0
    }
}

/// Per-character values behind a [`MomentReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacterRow {
    pub k: u64,
    pub l_central: Complex64,
    pub mollifier: Complex64,
}

fn check_moment_inputs(q: u64, psi: &RealCharacter, x: u64) -> Result<()> {
    if q.is_multiple_of(2) || !is_prime(q) {
        return Err(Error::NotOddPrime(q));
    }
    if gcd(q, psi.modulus()) != 1 {
        return Err(Error::NotCoprime(q, psi.modulus()));
    }
    if x == 0 || x > q {
        return Err(Error::Precondition(format!("mollifier length X={x} must satisfy 1 ≤ X ≤ q={q}")));
    }
    Ok(())
}

/// `S1 = Σ⁺ L_χ(1/2) M(χ)` and `S2 = Σ⁺ |L_χ(1/2) M(χ)|²`, computed
/// character by character.
pub fn mollified_moments(
    q: u64,
    psi: &RealCharacter,
    x: u64,
    cfg: AFEConfig,
) -> Result<MomentReport> {
    Ok(mollified_moments_detailed(q, psi, x, cfg, CENSUS_THRESHOLD)?.0)
}

pub fn mollified_moments_detailed(
    q: u64,
    psi: &RealCharacter,
    x: u64,
    cfg: AFEConfig,
    threshold: f64,
) -> Result<(MomentReport, Vec<CharacterRow>)> {
    check_moment_inputs(q, psi, x)?;
    let group = build_group(q)?;
    let chars = enumerate_even_primitive(&group);
    let afe = AfeEvaluator::new(q, psi, cfg)?;
    let moll = build_mollifier(psi, x)?;
    let rows = par::map_ordered(&chars, |chi| -> Result<CharacterRow> {
        Ok(CharacterRow {
            k: chi.index(),
            l_central: afe.evaluate(chi)?.l_central,
            mollifier: eval_mollifier(&moll, chi),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut s1 = ComplexKahanSum::new();
    let mut s2 = KahanSum::new();
    let mut census = 0u64;
    for r in &rows {
        let lm = r.l_central * r.mollifier;
        s1.add(lm);
        s2.add(lm.norm_sqr());
        if r.l_central.norm() > threshold {
            census += 1;
        }
    }
    let (s1, s2) = (s1.value(), s2.value());
    let phi_plus = group.phi_plus();
    let ratio = if s2 > 0.0 {
        (s1.norm_sqr() / (phi_plus as f64 * s2)).clamp(0.0, 1.0 + 1e-9)
    } else {
        0.0
    };
    let report = MomentReport {
        q,
        d: psi.modulus(),
        x,
        s1_re: s1.re,
        s1_im: s1.im,
        s2,
        ratio,
        census_nonzero: census,
        phi_plus,
        threshold,
    };
    Ok((report, rows))
}

/// `S1` through the orthogonality relation: a double sum over `a ≤ X` and
/// `n ≤ n_max`, with the dual part collapsed to Kloosterman sums.
pub fn first_moment_expanded(
    q: u64,
    psi: &RealCharacter,
    x: u64,
    cfg: AFEConfig,
) -> Result<Complex64> {
    check_moment_inputs(q, psi, x)?;
    let d = psi.modulus();
    let moll = build_mollifier(psi, x)?;
    let qi = q as i64;
    let half = (q as f64 - 1.0) / 2.0;
    // K(t) = (1/q)[(φ(q)/2)(S(1,t;q) + S(1,−t;q)) − 1] for t mod q.
    let kl: Vec<f64> = (0..q)
        .map(|t| kloosterman_real(1, t as i64, q))
        .collect();
    let k_of = |t: i64| {
        let t = t.rem_euclid(qi) as usize;
        let tm = (qi - t as i64).rem_euclid(qi) as usize;
        (half * (kl[t] + kl[tm]) - 1.0) / q as f64
    };
    let orth = |m: i64| {
        let r = m.rem_euclid(qi);
        let mut v = -1.0;
        if r == 1 || r == qi - 1 {
            v += half;
        }
        v
    };
    let dual = psi.eval(qi) as f64 * epsilon_real(psi).value.re;
    let ops = one_star_psi_table(psi, &SpfSieve::new(cfg.n_max));
    let ns: Vec<u64> = (1..=cfg.n_max)
        .filter(|&n| ops[n as usize] != 0 && n % q != 0)
        .collect();
    let weights = par::map_ordered(&ns, |&n| base_weights(n as f64 / cfg.q_param).v);
    let mut acc = KahanSum::new();
    for (&a, &r) in &moll.coeffs {
        if a % q == 0 {
            continue;
        }
        let dab = inv_mod((d * a) as i64 % qi, q).expect("coprime") as i64;
        for (&n, &v) in ns.iter().zip(&weights) {
            let c = r as f64 * ops[n as usize] as f64 / ((a * n) as f64).sqrt() * v;
            let m = (a as i64 % qi) * (n as i64 % qi);
            acc.add(c * (orth(m) + dual * k_of(dab * (n as i64 % qi))));
        }
    }
    Ok(Complex64::new(acc.value(), 0.0))
}

/// Census counts of central values above a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusCounts {
    pub q: u64,
    #[serde(rename = "D")]
    pub d: u64,
    pub threshold: f64,
    pub phi_plus: u64,
    /// `#{χ : |L(1/2,χ)L(1/2,χψ)| > threshold}`.
    pub nonzero_product: u64,
    /// `#{χ : |L(1/2,χ)| > threshold}`.
    pub nonzero_l: u64,
}

/// Oracle values `(L(1/2, χ), L(1/2, χψ))` for every even primitive `χ`,
/// sharing one table of Hurwitz values.
pub fn oracle_central_values(
    q: u64,
    psi: &RealCharacter,
) -> Result<Vec<(u64, Complex64, Complex64)>> {
    let group = build_group(q)?;
    let d = psi.modulus();
    if gcd(q, d) != 1 {
        return Err(Error::NotCoprime(q, d));
    }
    let half = Complex64::new(0.5, 0.0);
    let m = q * d;
    let zq = par::map_range(1, q, |a| hurwitz_zeta(half, a as f64 / q as f64));
    let residues: Vec<u64> = (1..m).filter(|&a| gcd(a, m) == 1).collect();
    let zm = par::map_ordered(&residues, |&a| hurwitz_zeta(half, a as f64 / m as f64));
    let (sq, sm) = ((q as f64).powf(-0.5), (m as f64).powf(-0.5));
    let chars = enumerate_even_primitive(&group);
    Ok(par::map_ordered(&chars, |chi| {
        let mut l1 = ComplexKahanSum::new();
        for a in 1..q {
            l1.add(chi.eval(a as i64) * zq[a as usize - 1]);
        }
        let mut l2 = ComplexKahanSum::new();
        for (&a, &z) in residues.iter().zip(&zm) {
            l2.add(chi.eval(a as i64) * psi.eval_u(a) as f64 * z);
        }
        (chi.index(), sq * l1.value(), sm * l2.value())
    }))
}

/// Count even primitive `χ` with `|L_χ(1/2)|` and `|L(1/2, χ)|` above the
/// threshold, using the Hurwitz oracle.
pub fn census(q: u64, psi: &RealCharacter, threshold: f64) -> Result<CensusCounts> {
    if q > 10_000 {
        return Err(Error::ModulusOutOfRange(q, 3, 10_000));
    }
    let vals = oracle_central_values(q, psi)?;
    let nonzero_product = vals.iter().filter(|v| (v.1 * v.2).norm() > threshold).count() as u64;
    let nonzero_l = vals.iter().filter(|v| v.1.norm() > threshold).count() as u64;
    Ok(CensusCounts {
        q,
        d: psi.modulus(),
        threshold,
        phi_plus: (q - 3) / 2,
        nonzero_product,
        nonzero_l,
    })
}

/// Which diagonal Euler product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EulerFamily {
    A,
    B,
    C,
}

/// An Euler product at shifts `(u, v)` with its truncation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerProductFamily {
    pub which: EulerFamily,
    pub u: Complex64,
    pub v: Complex64,
    /// Prime cutoff for the infinite products in `ℬ` and `𝒞`.
    pub p_max: u64,
    /// Length of the Dirichlet polynomial in `𝒞`.
    pub x: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

#[inline]
fn cpow(p: f64, s: Complex64) -> Complex64 {
    (s * p.ln()).exp()
}

#[inline]
fn pinv(p: f64, s: Complex64) -> Complex64 {
    (-s * p.ln()).exp()
}

const REGION: f64 = -0.25 + 0.01;

/// `Σ_{n>P} n^{−a}` bounded by the integral, `a > 1`.
fn zeta_tail(p: u64, a: f64) -> f64 {
    (p as f64).powf(1.0 - a) / (a - 1.0)
}

/// Evaluate `𝒜`, `ℬ` or `𝒞`.
pub fn euler_product(fam: &EulerProductFamily, psi: &RealCharacter) -> Result<EulerValue> {
    let (u, v) = (fam.u, fam.v);
    if !(u.re > REGION && v.re > REGION) {
        return Err(Error::ConvergenceRegion(format!("u={u}, v={v}")));
    }
    let one = Complex64::new(1.0, 0.0);
    match fam.which {
        EulerFamily::A => {
            let mut val = one;
            for &p in psi.prime_divisors() {
                let pf = p as f64;
                let num = 1.0 + 1.0 / pf - pinv(pf, 1.0 + u) - pinv(pf, 1.0 + v);
                val *= num / (1.0 - pinv(pf, 1.0 + u + v));
            }
            Ok(EulerValue {
                value: val,
                tail_bound: 0.0,
            })
        }
        EulerFamily::B => {
            if fam.p_max < 1000 {
                return Err(Error::Precondition(format!("P_max={} < 1000", fam.p_max)));
            }
            let primes: Vec<u64> = primes_up_to(fam.p_max)
                .into_iter()
                .filter(|&p| psi.eval_u(p) == -1)
                .collect();
            let factors = par::map_ordered(&primes, |&p| {
                // 1 + p^{−2}(1 − p^{−2u})(1 − p^{−2v})/(1 − p^{−2(1+u+v)})
                let pf = p as f64;
                let e = pinv(pf, Complex64::new(2.0, 0.0)) * (1.0 - pinv(pf, 2.0 * u))
                    * (1.0 - pinv(pf, 2.0 * v))
                    / (1.0 - pinv(pf, 2.0 * (1.0 + u + v)));
                1.0 + e
            });
            let val = factors.iter().fold(one, |a, &f| a * f);
            let a = u.re.min(0.0);
            let b = v.re.min(0.0);
            let expo = 2.0 + 2.0 * a + 2.0 * b;
            let sum = 4.0 * 1.1 * zeta_tail(fam.p_max, expo);
            Ok(EulerValue {
                value: val,
                tail_bound: val.norm() * (sum.exp() - 1.0),
            })
        }
        EulerFamily::C => {
            if fam.p_max < 1000 {
                return Err(Error::Precondition(format!("P_max={} < 1000", fam.p_max)));
            }
            let primes: Vec<u64> = primes_up_to(fam.p_max)
                .into_iter()
                .filter(|&p| psi.eval_u(p) == 1)
                .collect();
            let factors = par::map_ordered(&primes, |&p| {
                let pf = p as f64;
                (1.0 - pinv(pf, 2.0 * (1.0 + u + v))) * (1.0 + 1.0 / (pf * pf))
            });
            let prod = factors.iter().fold(one, |a, &f| a * f);
            let expo = (2.0 + 2.0 * (u + v).re).min(2.0);
            let ptail = 1.1 * (zeta_tail(fam.p_max, expo) + zeta_tail(fam.p_max, 2.0));
            let series = g3_partial_sum(psi, fam.x, u, v);
            let val = prod * series;
            Ok(EulerValue {
                value: val,
                tail_bound: val.norm() * (ptail.exp() - 1.0),
            })
        }
    }
}

/// `Σ_{n ≤ X, p|n ⇒ ψ(p)=1} g₃(n; u, v)/n`.
pub fn g3_partial_sum(psi: &RealCharacter, x: u64, u: Complex64, v: Complex64) -> Complex64 {
    let sieve = SpfSieve::new(x.max(1));
    let mut cache: BTreeMap<(u64, u32), Complex64> = BTreeMap::new();
    let mut acc = ComplexKahanSum::new();
    'n: for n in 1..=x {
        let mut val = Complex64::new(1.0 / n as f64, 0.0);
        for (p, e) in sieve.factor(n) {
            if psi.eval_u(p) != 1 {
                continue 'n;
            }
            let g = *cache
                .entry((p, e))
                .or_insert_with(|| g3_local(p, e, u, v));
            val *= g;
        }
        acc.add(val);
    }
    acc.value()
}

/// Local factors in the diagonal algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GName {
    H2,
    H3,
    G1,
    G2,
    G3,
    F,
}

fn h2(p: f64) -> f64 {
    1.0 / (1.0 + 1.0 / (p * p))
}

fn g1_local(p: u64, j: u32, u: Complex64, v: Complex64) -> Complex64 {
    let pf = p as f64;
    let s = 1.0 + u + v;
    let damp = 1.0 / (1.0 + pinv(pf, s));
    match j {
        0 => Complex64::new(1.0, 0.0),
        1 => -4.0 * h2(pf) * damp * (pinv(pf, u) + pinv(pf, v)),
        2 => h2(pf) * damp * (3.0 - pinv(pf, s)) * (pinv(pf, 2.0 * u) + pinv(pf, 2.0 * v)),
        _ => Complex64::new(0.0, 0.0),
    }
}

fn h3_local(p: u64, u: Complex64, v: Complex64) -> Complex64 {
    let pf = p as f64;
    let s = 1.0 + u + v;
    4.0 - 4.0 / pf / (1.0 + pinv(pf, s)) * (pinv(pf, u) + pinv(pf, v))
}

fn g2_local(p: u64, j: u32, u: Complex64, v: Complex64) -> Complex64 {
    match j {
        1 => h2(p as f64) * h3_local(p, u, v) + g1_local(p, 1, u, v),
        _ => g1_local(p, j, u, v),
    }
}

fn g3_local(p: u64, j: u32, u: Complex64, v: Complex64) -> Complex64 {
    let pf = p as f64;
    let w = u + v;
    match j {
        0 => Complex64::new(1.0, 0.0),
        1 => g2_local(p, 1, u, v) + 4.0 * pinv(pf, w),
        _ => {
            let t = |i: u32| tau4_prime_power(i) as f64 * pinv(pf, i as f64 * w);
            t(j) + g2_local(p, 1, u, v) * t(j - 1) + g2_local(p, 2, u, v) * t(j - 2)
        }
    }
}

/// `f_{p^j}(s)`.
fn f_local(psi_p: i32, p: u64, j: u32, s: Complex64) -> Complex64 {
    match psi_p {
        0 => Complex64::new(1.0, 0.0),
        -1 => Complex64::new(if j.is_multiple_of(2) { 1.0 } else { 0.0 }, 0.0),
        _ => {
            let ps = cpow(p as f64, s);
            1.0 + j as f64 * (ps - 1.0) / (ps + 1.0)
        }
    }
}

/// Evaluate one member of the local-factor family at `p^j`.
pub fn g_family_eval(
    name: GName,
    p: u64,
    j: u32,
    u: Complex64,
    v: Complex64,
    psi: &RealCharacter,
) -> Result<Complex64> {
    if !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let psi_p = psi.eval_u(p);
    let unsupported = || Err(Error::Unsupported(format!("{name:?} at ψ(p)={psi_p}")));
    let one = Complex64::new(1.0, 0.0);
    match name {
        GName::F => Ok(f_local(psi_p, p, j, 1.0 + u + v)),
        GName::H2 => Ok(if j == 0 { one } else { h2(p as f64).into() }),
        _ if psi_p != 1 => unsupported(),
        GName::H3 => match j {
            0 => Ok(one),
            1 => Ok(h3_local(p, u, v)),
            _ => Err(Error::Unsupported(format!("h3 is defined on squarefree arguments, j={j}"))),
        },
        GName::G1 => Ok(g1_local(p, j, u, v)),
        GName::G2 => Ok(if j == 0 { one } else { g2_local(p, j, u, v) }),
        GName::G3 => Ok(g3_local(p, j, u, v)),
    }
}

/// `τ₄(p^j) = C(j+3, 3)`.
pub fn tau4_prime_power(j: u32) -> u64 {
    let j = j as u64;
    (j + 1) * (j + 2) * (j + 3) / 6
}

const TAU4_CACHE: usize = 1 << 16;

fn tau4_table() -> &'static [u32] {
    static T: OnceLock<Vec<u32>> = OnceLock::new();
    T.get_or_init(|| tau4_by_convolution(TAU4_CACHE))
}

/// `τ₄ = τ ⋆ τ` for `n ≤ limit` by Dirichlet convolution.
pub fn tau4_by_convolution(limit: usize) -> Vec<u32> {
    let mut tau = vec![0u32; limit + 1];
    for d in 1..=limit {
        for m in (d..=limit).step_by(d) {
            tau[m] += 1;
        }
    }
    let mut t4 = vec![0u32; limit + 1];
    for d in 1..=limit {
        for (k, m) in (d..=limit).step_by(d).enumerate() {
            t4[m] += tau[d] * tau[k + 1];
        }
    }
    t4
}

/// `τ₄(n)`, from the cached convolution table when in range.
pub fn tau4(n: u64) -> u64 {
    if (n as usize) <= TAU4_CACHE {
        return tau4_table()[n as usize] as u64;
    }
    crate::arith::factor(n)
        .expect("positive")
        .factors
        .iter()
        .map(|&(_, e)| tau4_prime_power(e))
        .product()
}

/// Exhaustive `|LHS − RHS|` for
/// `Σ_{d|D^∞} (1/d) Σ_{(e,g)=1} ρ(de)ρ(dg) e^{−1−u} g^{−1−v} = Π_{p|D}(1 + 1/p − p^{−1−u} − p^{−1−v})`.
pub fn diagonal_identity_check(d: u64, u: Complex64, v: Complex64) -> Result<f64> {
    let psi = RealCharacter::new(d)?;
    let primes = psi.prime_divisors().to_vec();
    // Exponents 0..=3 per prime per variable; ρ(p^j) = 0 beyond j = 1 for p | D.
    const MAXE: u32 = 3;
    let k = primes.len();
    let combos = (MAXE as usize + 1).pow(3 * k as u32);
    let mut lhs = ComplexKahanSum::new();
    for c in 0..combos {
        let mut idx = c;
        let mut term = Complex64::new(1.0, 0.0);
        let (mut rho_de, mut rho_dg) = (1i64, 1i64);
        let mut coprime = true;
        for &p in &primes {
            let pf = p as f64;
            let mut next = || {
                let e = (idx % (MAXE as usize + 1)) as u32;
                idx /= MAXE as usize + 1;
                e
            };
            let (ed, ee, eg) = (next(), next(), next());
            if ee > 0 && eg > 0 {
                coprime = false;
            }
            rho_de *= rho_local(0, ed + ee);
            rho_dg *= rho_local(0, ed + eg);
            term *= pf.powi(-(ed as i32))
                * pinv(pf, ee as f64 * (1.0 + u))
                * pinv(pf, eg as f64 * (1.0 + v));
        }
        if coprime && rho_de != 0 && rho_dg != 0 {
            lhs.add(term * (rho_de * rho_dg) as f64);
        }
    }
    let mut rhs = Complex64::new(1.0, 0.0);
    for &p in &primes {
        let pf = p as f64;
        rhs *= 1.0 + 1.0 / pf - pinv(pf, 1.0 + u) - pinv(pf, 1.0 + v);
    }
    Ok((lhs.value() - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn mollifier_examples() {
        let psi = RealCharacter::new(5).unwrap();
        let m = build_mollifier(&psi, 10).unwrap();
        assert_eq!(m.coeffs.get(&1), Some(&1));
        assert!(!m.coeffs.contains_key(&3));
        assert_eq!(m.coeffs.get(&4), Some(&-1));
        assert!(m.coeffs.keys().all(|a| a % 5 != 0));
        // ρ(9) = ψ(3) = −1, ρ(6) = ρ(2)ρ(3) = 0
        assert_eq!(m.coeffs.get(&9), Some(&-1));
        assert!(!m.coeffs.contains_key(&6));
    }

    #[test]
    fn diagonal_identity_examples() {
        assert!(diagonal_identity_check(5, c(0.3), c(-0.1)).unwrap() < 1e-15);
        assert!(diagonal_identity_check(65, c(0.0), c(0.0)).unwrap() < 1e-14);
        let lhs = 1.0 + 0.2 - 5f64.powf(-1.3) - 5f64.powf(-0.9);
        let rhs = {
            let p = 5.0f64;
            1.0 + 1.0 / p - p.powf(-1.3) - p.powf(-0.9)
        };
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn euler_anchors() {
        let psi = RealCharacter::new(5).unwrap();
        let fam = |which, u: f64, v: f64| EulerProductFamily {
            which,
            u: c(u),
            v: c(v),
            p_max: 10_000,
            x: 1000,
        };
        for &u in &[-0.2, 0.0, 0.1, 0.3] {
            let a = euler_product(&fam(EulerFamily::A, u, 0.0), &psi).unwrap();
            assert!((a.value - 1.0).norm() < 1e-15);
            let b = euler_product(&fam(EulerFamily::B, u, 0.0), &psi).unwrap();
            assert!((b.value - 1.0).norm() < 1e-12);
            let b2 = euler_product(&fam(EulerFamily::B, 0.0, u), &psi).unwrap();
            assert!((b2.value - 1.0).norm() < 1e-12);
        }
        assert!(euler_product(&fam(EulerFamily::B, -0.3, 0.0), &psi).is_err());
        assert!(euler_product(&EulerProductFamily { p_max: 10, ..fam(EulerFamily::B, 0.1, 0.1) }, &psi).is_err());
    }

    #[test]
    fn g_family_examples() {
        let psi = RealCharacter::new(5).unwrap();
        // ψ(11) = 1, ψ(2) = −1
        let p = 11u64;
        let pf = p as f64;
        let h3 = g_family_eval(GName::H3, p, 1, c(0.0), c(0.0), &psi).unwrap().re;
        assert!((h3 - (4.0 - 8.0 / (pf * (1.0 + 1.0 / pf)))).abs() < 1e-14);
        assert_eq!(g_family_eval(GName::G1, p, 3, c(0.2), c(0.1), &psi).unwrap(), c(0.0));
        assert_eq!(g_family_eval(GName::F, 2, 3, c(0.2), c(0.1), &psi).unwrap(), c(0.0));
        assert_eq!(g_family_eval(GName::F, 2, 2, c(0.2), c(0.1), &psi).unwrap(), c(1.0));
        assert!(g_family_eval(GName::G3, 2, 1, c(0.0), c(0.0), &psi).is_err());
        assert!(g_family_eval(GName::H3, 3, 1, c(0.0), c(0.0), &psi).is_err());
    }

    /// `f_{p^j}(s)` from its defining series with `(1⋆ψ)` coefficients.
    fn f_series(psi: &RealCharacter, p: u64, j: u32, s: Complex64) -> Complex64 {
        let ops = |e: u32| crate::arith::one_star_psi_local(psi.eval_u(p), e) as f64;
        let pf = p as f64;
        let (mut num, mut den) = (c(ops(j)), c(1.0));
        for i in 1..400 {
            let w = pinv(pf, i as f64 * s);
            num += ops(j + i) * ops(i) * w;
            den += ops(i) * ops(i) * w;
        }
        num / den
    }

    #[test]
    fn f_table_matches_series_definition() {
        let psi = RealCharacter::new(5).unwrap();
        let s = Complex64::new(1.1, 0.3);
        for p in [2u64, 3, 5, 11, 19] {
            for j in 0..5 {
                let closed = f_local(psi.eval_u(p), p, j, s);
                assert!((closed - f_series(&psi, p, j, s)).norm() < 1e-12, "p={p} j={j}");
            }
        }
    }

    #[test]
    fn h3_and_g1_match_their_defining_sums() {
        let (u, v) = (Complex64::new(0.1, 0.2), Complex64::new(-0.05, 0.0));
        let s = 1.0 + u + v;
        for p in [11u64, 19, 29] {
            let pf = p as f64;
            let rho = |e| rho_local(1, e) as f64;
            let f = |j| f_local(1, p, j, s);
            let h3 = rho(1) * rho(1)
                + rho(1) * rho(2) * f(1) * pinv(pf, 1.0 + u)
                + rho(1) * rho(2) * f(1) * pinv(pf, 1.0 + v);
            assert!((h3 - h3_local(p, u, v)).norm() < 1e-13);
            let g1p = rho(1) * f(1) * h2(pf) * (pinv(pf, u) + pinv(pf, v));
            assert!((g1p - g1_local(p, 1, u, v)).norm() < 1e-13);
            let g1p2 = rho(2) * f(2) * h2(pf) * (pinv(pf, 2.0 * u) + pinv(pf, 2.0 * v));
            assert!((g1p2 - g1_local(p, 2, u, v)).norm() < 1e-13);
        }
    }

    #[test]
    fn c_full_local_product_is_one() {
        // Π over one prime of (1 − p^{−2})(1 + p^{−2}) Σ_j g₃(p^j)/p^j equals 1.
        for p in [11u64, 19, 29, 101] {
            let pf = p as f64;
            let mut s = c(0.0);
            for j in 0..200 {
                s += g3_local(p, j, c(0.0), c(0.0)) * pf.powi(-(j as i32));
            }
            let v = (1.0 - pf.powi(-2)) * (1.0 + pf.powi(-2)) * s;
            assert!((v - 1.0).norm() < 1e-13, "p={p}: {v}");
        }
    }

    #[test]
    fn tau4_table_matches_binomials() {
        let t = tau4_by_convolution(5000);
        for n in 1..=5000u64 {
            let f = crate::arith::factor(n).unwrap();
            let m: u64 = f.factors.iter().map(|&(_, e)| tau4_prime_power(e)).product();
            assert_eq!(t[n as usize] as u64, m);
        }
        assert_eq!(tau4(1 << 20), tau4_prime_power(20));
    }

    #[test]
    fn moments_small() {
        let psi = RealCharacter::new(5).unwrap();
        let cfg = AFEConfig::new(29, 5);
        let r = mollified_moments(29, &psi, 1, cfg).unwrap();
        assert_eq!(r.phi_plus, 13);
        assert!(r.ratio <= 1.0 + 1e-9 && r.ratio >= 0.0);
        let direct = first_moment_expanded(29, &psi, 1, cfg).unwrap();
        assert!((direct - r.s1()).norm() < 1e-6);
        assert!(mollified_moments(29, &psi, 30, cfg).is_err());
    }
}
