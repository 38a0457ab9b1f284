//! Twisted Voronoi summation for `(1⋆ψ)(n) e(an/c)` against a smooth
//! compactly supported weight, with both sides computed numerically.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, inv_mod, kronecker, RealCharacter, ResidueCharacter, SpfSieve};
use crate::characters::{e_frac, gauss_sum_of};
use crate::error::{Error, Result};
use crate::lvalues::l_one;
use crate::offdiag::bump;
use crate::par;
use crate::quad::{adaptive, GaussLegendre};
use crate::special::{bessel_k0, bessel_y0};
use crate::sum::ComplexKahanSum;

/// The real primitive character `(d*/·)` attached to a positive squarefree
/// `d` made of primes `≡ 1 (mod 4)`; `d = 1` is the trivial character mod 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KroneckerFactor {
    pub modulus: u64,
}

impl KroneckerFactor {
    pub fn eval(&self, n: i64) -> i32 {
        if self.modulus == 1 {
            1
        } else {
            kronecker(self.modulus as i64, n)
        }
    }
}

impl ResidueCharacter for KroneckerFactor {
    fn modulus(&self) -> u64 {
        self.modulus
    }

    fn value(&self, n: i64) -> Complex64 {
        Complex64::new(self.eval(n) as f64, 0.0)
    }
}

/// `ψ = ψ₁ψ₂` with `ψ₁` mod `(c, D)` and `ψ₂` mod `D_c = D/(c, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCase {
    pub c: u64,
    pub a: i64,
    pub psi: RealCharacter,
    pub psi1: KroneckerFactor,
    pub psi2: KroneckerFactor,
}

impl VoronoiCase {
    pub fn d_c(&self) -> u64 {
        self.psi2.modulus
    }
}

/// Split `ψ` along `(c, D)`. Each factor must itself be even, i.e. built from
/// primes `≡ 1 (mod 4)`; otherwise the split needs odd characters and is rejected.
pub fn factor_character(psi: &RealCharacter, c: u64, a: i64) -> Result<VoronoiCase> {
    if c == 0 {
        return Err(Error::NonPositive(0));
    }
    if gcd(a.unsigned_abs(), c) != 1 {
        return Err(Error::NotCoprime(a.unsigned_abs(), c));
    }
    let d = psi.modulus();
    let g = gcd(c, d);
    let (d1, d2) = (g, d / g);
    for part in [d1, d2] {
        if part != 1 && part % 4 != 1 {
            return Err(Error::Unsupported(format!(
                "ψ factors through an odd character mod {part}"
            )));
        }
    }
    Ok(VoronoiCase {
        c,
        a,
        psi: psi.clone(),
        psi1: KroneckerFactor { modulus: d1 },
        psi2: KroneckerFactor { modulus: d2 },
    })
}

/// `n ↦ bump` rescaled to `[x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub x0: f64,
    pub x1: f64,
}

impl TestFunction {
    pub fn new(x0: f64, x1: f64) -> Result<Self> {
        if !(x0 > 0.0 && x1 > x0) {
            return Err(Error::Precondition(format!("support [{x0}, {x1}] must lie in (0, ∞)")));
        }
        Ok(Self { x0, x1 })
    }

    pub fn eval(&self, x: f64) -> f64 {
        bump(1.0 + (x - self.x0) / (self.x1 - self.x0))
    }

    pub fn integral(&self) -> f64 {
        adaptive(|x| self.eval(x), self.x0, self.x1, 1e-14)
    }
}

/// `Σ_n (1⋆ψ)(n) e(an/c) g(n)`.
pub fn voronoi_lhs(case: &VoronoiCase, g: &TestFunction) -> Result<Complex64> {
    if g.x1 > 1e6 {
        return Err(Error::Precondition(format!("support end {} > 1e6", g.x1)));
    }
    let lo = g.x0.floor() as u64 + 1;
    let hi = g.x1.ceil() as u64;
    if lo >= hi {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let sieve = SpfSieve::new(hi);
    let ops = crate::arith::one_star_psi_table(&case.psi, &sieve);
    let mut acc = ComplexKahanSum::new();
    for n in lo..hi {
        let w = g.eval(n as f64);
        if w != 0.0 && ops[n as usize] != 0 {
            acc.add(e_frac(case.a * n as i64, case.c) * (ops[n as usize] as f64 * w));
        }
    }
    Ok(acc.value())
}

/// `(ψ₁ ⋆ ψ₂)(m)` for `m ≤ limit`.
fn dual_coefficients(case: &VoronoiCase, sieve: &SpfSieve) -> Vec<i32> {
    let (p1, p2) = (case.psi1, case.psi2);
    sieve.multiplicative(|p, e| {
        let (x, y) = (p1.eval(p as i64), p2.eval(p as i64));
        (0..=e).map(|i| pow0(x, i) * pow0(y, e - i)).sum::<i32>()
    })
}

fn pow0(x: i32, e: u32) -> i32 {
    if e == 0 {
        1
    } else {
        x.pow(e)
    }
}

/// Right side split into its pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoronoiRhs {
    pub value: Complex64,
    pub main: Complex64,
    pub y0_part: Complex64,
    pub k0_part: Complex64,
    /// Largest `m` included in the dual sums.
    pub m_used: u64,
    pub tail_bound: f64,
    /// True when the tail estimate fell below [`TAIL_TARGET`] within `m_max`.
    pub converged: bool,
}

const GL_ORDER: usize = 20;
const BLOCK: u64 = 1000;
/// Early blocks are dominated by the slowly varying part of the transform, so
/// the decay ratio is only trusted after this many.
const MIN_BLOCKS: u64 = 5;
/// Stop once the estimated tail of the dual sums is below this.
pub const TAIL_TARGET: f64 = 1e-9;

/// `∫ g(x) B(β√x) dx` over the support of `g`, via `x = t²` and Gauss–Legendre
/// panels sized to about half an oscillation of `β t`.
fn bessel_transform<B: Fn(f64) -> f64>(gl: &GaussLegendre, g: &TestFunction, beta: f64, bessel: B) -> f64 {
    let (t0, t1) = (g.x0.sqrt(), g.x1.sqrt());
    let panels = ((beta * (t1 - t0) / PI).ceil() as usize).max(32);
    gl.integrate_panels(|t| 2.0 * t * g.eval(t * t) * bessel(beta * t), t0, t1, panels)
}

/// Remaining dual terms decay faster than any power of `m`. With `r` the ratio
/// of the last two block sums of `|term|`, extrapolate geometrically; without
/// visible decay, charge ten more blocks.
fn tail_estimate(prefactor: f64, prev: f64, last: f64) -> f64 {
    let r = if prev.is_finite() && prev > 0.0 { last / prev } else { 1.0 };
    let factor = if r < 0.9 { r / (1.0 - r) } else { 10.0 };
    prefactor * last * factor
}

/// `ρ(a,c) L(1,ψ) ∫g + T(a,c)`, with dual sums truncated at `m_max` or earlier
/// once the tail estimate drops below [`TAIL_TARGET`].
pub fn voronoi_rhs(case: &VoronoiCase, g: &TestFunction, m_max: u64) -> Result<VoronoiRhs> {
    let (c, a) = (case.c, case.a);
    let d = case.psi.modulus();
    let d_c = case.d_c();
    let l1 = l_one(&case.psi);
    let rho = if c % d != 0 {
        Complex64::new(case.psi.eval_u(c) as f64 / c as f64, 0.0)
    } else {
        gauss_sum_of(&case.psi) * case.psi.eval(a) as f64 / c as f64
    };
    let main = rho * l1 * g.integral();

    let tau2 = gauss_sum_of(&case.psi2);
    let psi2c = case.psi2.eval(c as i64) as f64;
    let pref_y = -2.0 * PI * tau2 * (case.psi1.eval(-a) as f64 * psi2c / (c * d_c) as f64);
    let pref_k = 4.0 * tau2 * (case.psi1.eval(a) as f64 * psi2c / (c * d_c) as f64);
    let abar = inv_mod(a * d_c as i64, c).ok_or(Error::NotCoprime(a.unsigned_abs() * d_c, c))? as i64;
    let pref = pref_y.norm() + pref_k.norm();
    let scale = 4.0 * PI / (c as f64 * (d_c as f64).sqrt());

    let sieve = SpfSieve::new(m_max.max(2));
    let coeffs = dual_coefficients(case, &sieve);
    let gl = GaussLegendre::new(GL_ORDER);
    let mut y_sum = ComplexKahanSum::new();
    let mut k_sum = ComplexKahanSum::new();
    let mut m_used = 0;
    let (mut prev_block, mut last_block) = (f64::INFINITY, f64::INFINITY);
    let mut converged = false;
    let mut start = 1;
    while start <= m_max {
        let end = (start + BLOCK - 1).min(m_max);
        let terms = par::map_range(start, end + 1, |m| {
            let cm = coeffs[m as usize];
            if cm == 0 {
                return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            }
            let beta = scale * (m as f64).sqrt();
            let iy = bessel_transform(&gl, g, beta, bessel_y0);
            let ik = if beta * g.x0.sqrt() > 750.0 {
                0.0
            } else {
                bessel_transform(&gl, g, beta, bessel_k0)
            };
            let ph = (abar * (m % c) as i64) % c as i64;
            (
                e_frac(-ph, c) * (cm as f64 * iy),
                e_frac(ph, c) * (cm as f64 * ik),
            )
        });
        let mut block_abs = 0.0;
        for (y, k) in terms {
            block_abs += y.norm() + k.norm();
            y_sum.add(y);
            k_sum.add(k);
        }
        m_used = end;
        prev_block = last_block;
        last_block = block_abs;
        if end >= MIN_BLOCKS * BLOCK && tail_estimate(pref, prev_block, last_block) < TAIL_TARGET {
            converged = true;
            break;
        }
        start = end + 1;
    }
    let y0_part = pref_y * y_sum.value();
    let k0_part = pref_k * k_sum.value();
    let tail_bound = tail_estimate(pref, prev_block, last_block);
    Ok(VoronoiRhs {
        value: main + y0_part + k0_part,
        main,
        y0_part,
        k0_part,
        m_used,
        tail_bound,
        converged,
    })
}

/// Output of one dual-side comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoronoiCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub tail_bound: f64,
    pub m_used: u64,
    pub converged: bool,
}

pub fn voronoi_check(case: &VoronoiCase, g: &TestFunction, m_max: u64) -> Result<VoronoiCheck> {
    let lhs = voronoi_lhs(case, g)?;
    let rhs = voronoi_rhs(case, g, m_max)?;
    Ok(VoronoiCheck {
        lhs,
        rhs: rhs.value,
        residual: (lhs - rhs.value).norm(),
        tail_bound: rhs.tail_bound,
        m_used: rhs.m_used,
        converged: rhs.converged,
    })
}
