//! Shifted convolution sums of `(1⋆ψ)` along `am ≡ ±bn (mod q)`, the
//! singular series, its Dirichlet series `G_{a,b}` and the kernel `H(u, v)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{factor, gcd, inv_mod, is_prime, one_star_psi_table, RealCharacter, SpfSieve};
use crate::error::{Error, Result};
use crate::lvalues::l_one;
use crate::par;
use crate::quad::adaptive;
use crate::special::{gamma, ln_gamma};
use crate::sum::{kahan_sum, KahanSum};

/// Largest `M`, `N` accepted by the brute-force evaluator.
pub const MAX_SCALE: f64 = 1e6;

/// `exp(1 + 1/((2x − 3)² − 1))` on `(1, 2)`, zero elsewhere. Peak value 1 at `x = 3/2`.
pub fn bump(x: f64) -> f64 {
    if x <= 1.0 || x >= 2.0 {
        return 0.0;
    }
    let t = 2.0 * x - 3.0;
    (1.0 + 1.0 / (t * t - 1.0)).exp()
}

/// Which congruence classes `am ≡ ±bn (mod q)` are summed. `Both` is the sum
/// of the two classes, so pairs with `q | m` and `q | n` count once in each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
    Both,
}

impl Sign {
    fn parts(self) -> &'static [Sign] {
        match self {
            Sign::Plus => &[Sign::Plus],
            Sign::Minus => &[Sign::Minus],
            Sign::Both => &[Sign::Plus, Sign::Minus],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedConvParams {
    pub a: u64,
    pub b: u64,
    pub m: f64,
    pub n: f64,
    pub q: u64,
    pub psi: RealCharacter,
    pub sign: Sign,
}

impl ShiftedConvParams {
    pub fn validate(&self) -> Result<()> {
        let d = self.psi.modulus();
        if self.a == 0 || self.b == 0 {
            return Err(Error::NonPositive(0));
        }
        if gcd(self.a, self.b) != 1 {
            return Err(Error::NotCoprime(self.a, self.b));
        }
        if self.a.is_multiple_of(d) || self.b.is_multiple_of(d) {
            return Err(Error::Precondition(format!("D={d} divides a={} or b={}", self.a, self.b)));
        }
        if !(self.m >= 1.0 && self.n >= 1.0) || self.m > MAX_SCALE || self.n > MAX_SCALE {
            return Err(Error::Precondition(format!(
                "scales M={}, N={} outside [1, {MAX_SCALE}]",
                self.m, self.n
            )));
        }
        if self.q.is_multiple_of(2) || !is_prime(self.q) {
            return Err(Error::NotOddPrime(self.q));
        }
        if self.a.is_multiple_of(self.q) || self.b.is_multiple_of(self.q) {
            return Err(Error::NotCoprime(self.a * self.b, self.q));
        }
        Ok(())
    }

    fn support(&self) -> (u64, u64, u64, u64) {
        (
            self.m.floor() as u64 + 1,
            (2.0 * self.m).ceil() as u64 - 1,
            self.n.floor() as u64 + 1,
            (2.0 * self.n).ceil() as u64 - 1,
        )
    }

    fn weights(&self) -> (Vec<u32>, impl Fn(u64) -> f64 + '_, impl Fn(u64) -> f64 + '_) {
        let top = (2.0 * self.m.max(self.n)).ceil() as u64 + 1;
        let ops = one_star_psi_table(&self.psi, &SpfSieve::new(top));
        (ops, move |m| bump(m as f64 / self.m), move |n| bump(n as f64 / self.n))
    }
}

/// `Σ (1⋆ψ)(m)(1⋆ψ)(n) ω(m/M) ω(n/N)` over `am ≡ ±bn (mod q)`, `am ≠ bn`.
pub fn brute_shifted_conv(p: &ShiftedConvParams) -> Result<f64> {
    p.validate()?;
    let (m_lo, m_hi, n_lo, n_hi) = p.support();
    let (ops, w1, w2) = p.weights();
    let q = p.q;
    let binv = inv_mod(p.b as i64, q).expect("b coprime to q");
    let per_m = par::map_range(m_lo, m_hi + 1, |m| {
        let om = ops[m as usize];
        if om == 0 {
            return 0.0;
        }
        let t = (p.a % q) * (m % q) % q * binv % q;
        let classes = p.sign.parts().iter().map(|s| match s {
            Sign::Plus => t,
            _ => (q - t) % q,
        });
        let mut acc = KahanSum::new();
        for c in classes {
            let first = n_lo + (c + q - n_lo % q) % q;
            let mut n = first;
            while n <= n_hi {
                if p.a * m != p.b * n {
                    acc.add(ops[n as usize] as f64 * w2(n));
                }
                n += q;
            }
        }
        om as f64 * w1(m) * acc.value()
    });
    Ok(kahan_sum(per_m))
}

/// The same sum reorganised as `Σ_{0<|r|≤R} Σ_{am ∓ bn = qr}`.
pub fn r_decomposed_shifted_conv(p: &ShiftedConvParams) -> Result<f64> {
    p.validate()?;
    let (m_lo, m_hi, n_lo, n_hi) = p.support();
    let (ops, w1, w2) = p.weights();
    let (a, b, q) = (p.a as i64, p.b as i64, p.q as i64);
    let r_max = (2.0 * (p.a as f64 * p.m + p.b as f64 * p.n) / p.q as f64).ceil() as i64 + 1;
    let mut total = KahanSum::new();
    for &s in p.sign.parts() {
        let rs: Vec<i64> = (-r_max..=r_max).filter(|&r| r != 0).collect();
        let per_r = par::map_ordered(&rs, |&r| {
            let mut acc = KahanSum::new();
            for m in m_lo..=m_hi {
                // Plus: am − bn = qr; Minus: am + bn = qr.
                let num = match s {
                    Sign::Plus => a * m as i64 - q * r,
                    _ => q * r - a * m as i64,
                };
                if num <= 0 || num % b != 0 {
                    continue;
                }
                let n = (num / b) as u64;
                if n < n_lo || n > n_hi {
                    continue;
                }
                acc.add(ops[m as usize] as f64 * ops[n as usize] as f64 * w1(m) * w2(n));
            }
            acc.value()
        });
        total.extend(per_r);
    }
    Ok(total.value())
}

/// Local data at one prime for the multiplicative pieces of `𝔖_{a,b}`.
struct LocalPrime {
    p: u64,
    va: u32,
    vb: u32,
    psi_p: i32,
    divides_d: bool,
}

impl LocalPrime {
    fn new(p: u64, a: u64, b: u64, psi: &RealCharacter) -> Self {
        LocalPrime {
            p,
            va: valuation(a, p),
            vb: valuation(b, p),
            psi_p: psi.eval_u(p),
            divides_d: psi.modulus().is_multiple_of(p),
        }
    }

    /// Local factors of `ψ(ℓ_a ℓ_b)/(ℓ_a ℓ_b)` and
    /// `1_{D|(ℓ_a,ℓ_b)} D ψ(a′b′)/(ℓ_a ℓ_b)` at `ℓ = p^j`.
    fn terms(&self, j: u32) -> (f64, f64) {
        let la = j.saturating_sub(self.va);
        let lb = j.saturating_sub(self.vb);
        let ap = self.va - self.va.min(j);
        let bp = self.vb - self.vb.min(j);
        let pf = self.p as f64;
        let denom = pf.powi((la + lb) as i32);
        let first = ipow(self.psi_p, la + lb) as f64 / denom;
        let second = if self.divides_d {
            if la >= 1 && lb >= 1 {
                pf * ipow(self.psi_p, ap + bp) as f64 / denom
            } else {
                0.0
            }
        } else {
            ipow(self.psi_p, ap + bp) as f64 / denom
        };
        (first, second)
    }
}

fn ipow(x: i32, e: u32) -> i32 {
    if e == 0 {
        1
    } else {
        x.pow(e)
    }
}

fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n > 0 && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// `c_{p^j}(r)` from the valuation `v = v_p(r)`.
fn ramanujan_local(p: u64, j: u32, v: u32) -> f64 {
    let pf = p as f64;
    if j == 0 {
        1.0
    } else if j <= v {
        pf.powi(j as i32) - pf.powi(j as i32 - 1)
    } else if j == v + 1 {
        -pf.powi(j as i32 - 1)
    } else {
        0.0
    }
}

/// The `ℓ`-summand of `𝔖_{a,b}(r)`.
pub fn singular_series_term(a: u64, b: u64, r: i64, psi: &RealCharacter, l: u64) -> f64 {
    let ga = gcd(a, l);
    let gb = gcd(b, l);
    let (la, lb) = (l / ga, l / gb);
    let (ap, bp) = (a / ga, b / gb);
    let d = psi.modulus();
    let mut coeff = psi.eval_u(la) as f64 * psi.eval_u(lb) as f64;
    if la % d == 0 && lb % d == 0 {
        coeff += d as f64 * psi.eval_u(ap) as f64 * psi.eval_u(bp) as f64;
    }
    if coeff == 0.0 {
        return 0.0;
    }
    coeff * crate::arith::ramanujan_sum(r, l) as f64 / (la as f64 * lb as f64)
}

/// A truncated singular series with its tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularSeries {
    pub value: f64,
    pub tail_bound: f64,
    pub l_max: u64,
}

/// `𝔖_{a,b}(r)` summed over `ℓ ≤ L_max` in increasing order.
///
/// The tail bound uses `|S(r,0;ℓ)| ≤ (r,ℓ)` and `ℓ_a ℓ_b ≥ ℓ²/(ab)`, which give
/// `2ab(1 + D)τ(r)/L_max`.
pub fn singular_series(
    a: u64,
    b: u64,
    r: i64,
    psi: &RealCharacter,
    l_max: u64,
) -> Result<SingularSeries> {
    if r == 0 {
        return Err(Error::Precondition("singular series needs r ≠ 0".into()));
    }
    if l_max < 1000 {
        return Err(Error::Precondition(format!("L_max={l_max} < 1000")));
    }
    let terms = par::map_range(1, l_max + 1, |l| singular_series_term(a, b, r, psi, l));
    let tau = factor(r.unsigned_abs())?.num_divisors() as f64;
    Ok(SingularSeries {
        value: kahan_sum(terms),
        tail_bound: 2.0 * (a * b) as f64 * (1.0 + psi.modulus() as f64) * tau / l_max as f64,
        l_max,
    })
}

fn bad_primes(n: u64) -> Vec<u64> {
    factor(n).expect("positive").factors.iter().map(|&(p, _)| p).collect()
}

const INV_ZETA2: f64 = 6.0 / (PI * PI);

/// `𝔖_{a,b}(r)` as a sum of two Euler products. Primes not dividing `rabD`
/// contribute `1 − p^{−2}` to each, which is folded into `1/ζ(2)`; the
/// remaining local sums are finite.
pub fn singular_series_factored(a: u64, b: u64, r: i64, psi: &RealCharacter) -> Result<f64> {
    if r == 0 {
        return Err(Error::Precondition("singular series needs r ≠ 0".into()));
    }
    let r = r.unsigned_abs();
    let mut primes = bad_primes(r * a * b * psi.modulus());
    primes.sort_unstable();
    primes.dedup();
    let (mut e1, mut e2, mut fold) = (1.0, 1.0, INV_ZETA2);
    for &p in &primes {
        let lp = LocalPrime::new(p, a, b, psi);
        let v = valuation(r, p);
        let (mut s1, mut s2) = (0.0, 0.0);
        for j in 0..=v + 1 + lp.va.max(lp.vb) {
            let c = ramanujan_local(p, j, v);
            let (t1, t2) = lp.terms(j);
            s1 += t1 * c;
            s2 += t2 * c;
        }
        e1 *= s1;
        e2 *= s2;
        fold /= 1.0 - 1.0 / (p * p) as f64;
    }
    Ok(fold * (e1 + e2))
}

/// `G_{a,b}(s)` defined by `Σ_r 𝔖_{a,b}(r) r^{−s} = G_{a,b}(s) ζ(s) ζ(1+s)`.
///
/// Uses `Σ_r S(r,0;ℓ) r^{−s} = ζ(s) ℓ^{1−s} Π_{p|ℓ}(1 − p^{s−1})`. Away from
/// `abD` each local factor is `(1 − p^{−2})/(1 − p^{−1−s})`, so the infinite
/// part is exactly `ζ(1+s)/ζ(2)` corrected at the finitely many bad primes.
pub fn dirichlet_series_g(a: u64, b: u64, s: Complex64, psi: &RealCharacter) -> Complex64 {
    let mut primes = bad_primes(a * b * psi.modulus());
    primes.sort_unstable();
    primes.dedup();
    let one = Complex64::new(1.0, 0.0);
    let (mut e1, mut e2, mut fold) = (one, one, Complex64::new(INV_ZETA2, 0.0));
    for &p in &primes {
        let pf = p as f64;
        let lp = LocalPrime::new(p, a, b, psi);
        let ratio = ((1.0 - s) * pf.ln()).exp();
        let tail = 1.0 - (-(1.0 - s) * pf.ln()).exp();
        let (mut s1, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut g = one;
        for j in 0..400u32 {
            let gj = if j == 0 { one } else { g * tail };
            let (t1, t2) = lp.terms(j);
            s1 += t1 * gj;
            s2 += t2 * gj;
            g *= ratio;
            if j > lp.va.max(lp.vb) + 2 && (t1.abs() + t2.abs()) * gj.norm() < 1e-20 {
                break;
            }
        }
        e1 *= s1;
        e2 *= s2;
        fold *= (1.0 - (-(1.0 + s) * pf.ln()).exp()) / (1.0 - 1.0 / (pf * pf));
    }
    fold * (e1 + e2)
}

/// `Σ_{r ≤ R} 𝔖_{a,b}(r)/r^s` with each `𝔖` in factored form.
pub fn singular_dirichlet_partial(a: u64, b: u64, s: f64, psi: &RealCharacter, r_max: u64) -> Result<f64> {
    let terms = par::map_range(1, r_max + 1, |r| {
        singular_series_factored(a, b, r as i64, psi).map(|v| v * (r as f64).powf(-s))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(kahan_sum(terms))
}

/// Main-term value with the singular series truncation it used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainTerm {
    pub value: f64,
    pub r_max: i64,
    pub integral_tol: f64,
}

const INTEGRAL_TOL: f64 = 1e-10;

/// `(L(1,ψ)²/ab) Σ_{r≠0} 𝔖_{a,b}(qr) ∫ ω(x/aM) ω(∓(qr − x)/bN) dx`.
///
/// The series is evaluated at the actual shift `qr` of `am ∓ bn = qr`; for
/// `ℓ < q` this agrees termwise with `S(r,0;ℓ)`.
pub fn main_term(p: &ShiftedConvParams) -> Result<MainTerm> {
    p.validate()?;
    let (a, b, q) = (p.a as f64, p.b as f64, p.q as f64);
    let l1 = l_one(&p.psi);
    let r_max = (2.0 * (a * p.m + b * p.n) / q).ceil() as i64 + 1;
    let (x_lo, x_hi) = (a * p.m, 2.0 * a * p.m);
    let mut total = KahanSum::new();
    for &s in p.sign.parts() {
        let rs: Vec<i64> = (-r_max..=r_max).filter(|&r| r != 0).collect();
        let per_r = par::map_ordered(&rs, |&r| -> Result<f64> {
            let h = q * r as f64;
            // y = bn as a function of x = am.
            let y = |x: f64| match s {
                Sign::Plus => x - h,
                _ => h - x,
            };
            let (lo, hi) = match s {
                Sign::Plus => ((h + b * p.n).max(x_lo), (h + 2.0 * b * p.n).min(x_hi)),
                _ => ((h - 2.0 * b * p.n).max(x_lo), (h - b * p.n).min(x_hi)),
            };
            if lo >= hi {
                return Ok(0.0);
            }
            let f = |x: f64| bump(x / (a * p.m)) * bump(y(x) / (b * p.n));
            let integral = adaptive(f, lo, hi, INTEGRAL_TOL);
            let sing = singular_series_factored(p.a, p.b, p.q as i64 * r, &p.psi)?;
            Ok(sing * integral)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        total.extend(per_r);
    }
    Ok(MainTerm {
        value: l1 * l1 / (a * b) * total.value(),
        r_max,
        integral_tol: INTEGRAL_TOL,
    })
}

/// One scale of a brute-vs-main comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedConvReport {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub brute: f64,
    pub main: f64,
    pub integral_tol: f64,
    pub relative_deviation: f64,
}

pub fn compare_scale(p: &ShiftedConvParams) -> Result<ShiftedConvReport> {
    let brute = brute_shifted_conv(p)?;
    let main = main_term(p)?;
    Ok(ShiftedConvReport {
        m: p.m,
        n: p.n,
        brute,
        main: main.value,
        integral_tol: main.integral_tol,
        relative_deviation: (brute - main.value).abs() / brute.abs(),
    })
}

fn rgamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        Complex64::new(0.0, 0.0)
    } else {
        (-ln_gamma(z)).exp()
    }
}

fn pole_gamma(z: Complex64, what: &'static str) -> Result<Complex64> {
    if z.im.abs() < 1e-14 && z.re <= 1e-14 && (z.re - z.re.round()).abs() < 1e-14 {
        Err(Error::Pole(what, format!("Γ({z})")))
    } else {
        Ok(gamma(z))
    }
}

fn check_kernel_args(u: Complex64, v: Complex64) -> Result<()> {
    pole_gamma(u + v, "H")?;
    pole_gamma(0.5 - u, "H")?;
    pole_gamma(0.5 - v, "H")?;
    Ok(())
}

/// `H⁺(u,v) = Γ(u+v)(Γ(1/2−v)/Γ(1/2+u) + Γ(1/2−u)/Γ(1/2+v))`.
pub fn h_plus(u: Complex64, v: Complex64) -> Result<Complex64> {
    check_kernel_args(u, v)?;
    let half = 0.5;
    Ok(gamma(u + v) * (gamma(half - v) * rgamma(half + u) + gamma(half - u) * rgamma(half + v)))
}

/// `H⁻(u,v) = Γ(1/2−u)Γ(1/2−v)/Γ(1−u−v)`.
pub fn h_minus(u: Complex64, v: Complex64) -> Result<Complex64> {
    check_kernel_args(u, v)?;
    Ok(gamma(0.5 - u) * gamma(0.5 - v) * rgamma(1.0 - u - v))
}

/// `H = H⁺ + H⁻`.
pub fn h_kernel(u: Complex64, v: Complex64) -> Result<Complex64> {
    Ok(h_plus(u, v)? + h_minus(u, v)?)
}

/// `√π Γ((u+v)/2) Γ((1/2−u)/2) Γ((1/2−v)/2) / (Γ((1−u−v)/2) Γ((1/2+u)/2) Γ((1/2+v)/2))`.
pub fn h_kernel_product(u: Complex64, v: Complex64) -> Result<Complex64> {
    let num = [(u + v) / 2.0, (0.5 - u) / 2.0, (0.5 - v) / 2.0];
    for z in num {
        pole_gamma(z, "H product form")?;
    }
    let mut val = Complex64::new(PI.sqrt(), 0.0);
    for z in num {
        val *= gamma(z);
    }
    for z in [(1.0 - u - v) / 2.0, (0.5 + u) / 2.0, (0.5 + v) / 2.0] {
        val *= rgamma(z);
    }
    Ok(val)
}

/// Quadrature and closed form of `∫_T^∞ x^{−(1/2+u)} (x − T)^{−(1/2+v)} dx`
/// for real `u + v > 0`, `v < 1/2`.
///
/// Closed form `T^{−(u+v)} Γ(u+v) Γ(1/2−v)/Γ(1/2+u)`. The quadrature substitutes
/// `x − T = w^k` with `k = 1/(1/2 − v)` to remove the endpoint singularity, and
/// `w = y^{−m}` on `w > 1` to map the algebraic tail onto a smooth integrand.
pub fn x_integral(t: f64, u: f64, v: f64) -> Result<(f64, f64)> {
    if !(u + v > 0.0 && v < 0.5 && t > 0.0) {
        return Err(Error::ConvergenceRegion(format!("T={t}, u={u}, v={v}")));
    }
    let k = 1.0 / (0.5 - v);
    let alpha = 0.5 + u;
    let inner = |w: f64| k * (t + w.powf(k)).powf(-alpha);
    let m = 1.0 / (k * alpha - 1.0);
    let outer = |y: f64| {
        if y <= 0.0 {
            return 0.0;
        }
        inner(y.powf(-m)) * m * y.powf(-m - 1.0)
    };
    let quad = adaptive(inner, 0.0, 1.0, 1e-13) + adaptive(outer, 0.0, 1.0, 1e-13);
    let closed = t.powf(-(u + v)) * gamma(Complex64::new(u + v, 0.0)).re
        * gamma(Complex64::new(0.5 - v, 0.0)).re
        / gamma(Complex64::new(0.5 + u, 0.0)).re;
    Ok((quad, closed))
}
