//! wasm-bindgen exports for the static demo page in `www/`. Each export
//! returns a JSON string; the plain functions underneath are what the tests
//! exercise, since `JsError` needs a JavaScript host.

use lcentral::arith::RealCharacter;
use lcentral::characters::{build_group, enumerate_even_primitive};
use lcentral::lvalues::{AFEConfig, AfeEvaluator};
use lcentral::special::base_weights;
use lcentral::voronoi::{factor_character, voronoi_check, TestFunction};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest modulus the page will enumerate; keeps the tab responsive.
pub const MAX_Q: u64 = 400;
/// Dual-sum cap for the page, well below the command-line default.
pub const MAX_DUAL_TERMS: u64 = 40_000;

#[derive(Debug, Serialize, PartialEq)]
pub struct WeightCurves {
    pub log_q: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

/// `V`, `W₁`, `W₂` on a log-spaced grid of `points` values in `[x_min, x_max]`.
pub fn weight_curves(log_q: f64, x_min: f64, x_max: f64, points: usize) -> Result<WeightCurves, String> {
    if !(log_q > 0.0 && log_q.is_finite()) {
        return Err(format!("log Q must be positive, got {log_q}"));
    }
    if !(x_min > 0.0 && x_max > x_min) {
        return Err("need 0 < x_min < x_max".into());
    }
    if !(2..=2000).contains(&points) {
        return Err("points must lie in 2..=2000".into());
    }
    let (a, b) = (x_min.ln(), x_max.ln());
    let x: Vec<f64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect();
    let mut out = WeightCurves {
        log_q,
        x: Vec::with_capacity(points),
        v: Vec::with_capacity(points),
        w1: Vec::with_capacity(points),
        w2: Vec::with_capacity(points),
    };
    for xi in x {
        let w = base_weights(xi);
        out.x.push(xi);
        out.v.push(w.v);
        out.w1.push(w.w1(xi, log_q));
        out.w2.push(w.w2(xi, log_q));
    }
    Ok(out)
}

#[derive(Debug, Serialize, PartialEq)]
pub struct CentralValue {
    pub k: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

/// `L(1/2, χ)L(1/2, χψ)` for every even primitive `χ` mod `q`.
pub fn central_values(q: u64, d: u64) -> Result<Vec<CentralValue>, String> {
    if q > MAX_Q {
        return Err(format!("q = {q} exceeds the page limit {MAX_Q}"));
    }
    let psi = RealCharacter::new(d).map_err(|e| e.to_string())?;
    let group = build_group(q).map_err(|e| e.to_string())?;
    let ev = AfeEvaluator::new(q, &psi, AFEConfig::new(q, d)).map_err(|e| e.to_string())?;
    enumerate_even_primitive(&group)
        .iter()
        .map(|chi| {
            let z = ev.evaluate(chi).map_err(|e| e.to_string())?.l_central;
            Ok(CentralValue {
                k: chi.index(),
                re: z.re,
                im: z.im,
                abs: z.norm(),
            })
        })
        .collect()
}

#[derive(Debug, Serialize, PartialEq)]
pub struct VoronoiResidual {
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub residual: f64,
    pub tail_bound: f64,
    pub m_used: u64,
    pub converged: bool,
}

/// Both sides of the twisted Voronoi formula for a bump on `[lo, hi]`.
pub fn voronoi_residual(d: u64, c: u64, a: i64, lo: f64, hi: f64, m_max: u64) -> Result<VoronoiResidual, String> {
    if hi > 1e4 {
        return Err("bump_hi is capped at 1e4 on the page".into());
    }
    let psi = RealCharacter::new(d).map_err(|e| e.to_string())?;
    let case = factor_character(&psi, c, a).map_err(|e| e.to_string())?;
    let g = TestFunction::new(lo, hi).map_err(|e| e.to_string())?;
    let r = voronoi_check(&case, &g, m_max.min(MAX_DUAL_TERMS)).map_err(|e| e.to_string())?;
    Ok(VoronoiResidual {
        lhs: [r.lhs.re, r.lhs.im],
        rhs: [r.rhs.re, r.rhs.im],
        residual: r.residual,
        tail_bound: r.tail_bound,
        m_used: r.m_used,
        converged: r.converged,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map(|v| serde_json::to_string(&v).expect("serializes"))
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = weightCurves)]
pub fn weight_curves_js(log_q: f64, x_min: f64, x_max: f64, points: usize) -> Result<String, JsError> {
    to_js(weight_curves(log_q, x_min, x_max, points))
}

#[wasm_bindgen(js_name = centralValues)]
pub fn central_values_js(q: u32, d: u32) -> Result<String, JsError> {
    to_js(central_values(q.into(), d.into()))
}

#[wasm_bindgen(js_name = voronoiResidual)]
pub fn voronoi_residual_js(d: u32, c: u32, a: i32, lo: f64, hi: f64, m_max: u32) -> Result<String, JsError> {
    to_js(voronoi_residual(d.into(), c.into(), a.into(), lo, hi, m_max.into()))
}
