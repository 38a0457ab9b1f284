use lcentral::arith::{gcd, primes_up_to, RealCharacter};
use lcentral::characters::{
    build_group, enumerate_even_primitive, epsilon_factorization_check, epsilon_pair_sum,
    orthogonality_closed, orthogonality_direct,
};
use lcentral::lvalues::{oracle_product_at, AFEConfig, AfeEvaluator};
use lcentral::moments::{census, diagonal_identity_check, mollified_moments_detailed, oracle_central_values};
use lcentral::offdiag::{compare_scale, h_kernel, h_kernel_product, ShiftedConvParams};
use lcentral::voronoi::{factor_character, voronoi_check, TestFunction};
use lcentral::Error;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Command, Format, RunConfig};
use crate::CliError;

/// Rendered output of one run.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub body: String,
    pub summary: String,
    /// False when a tolerance check failed.
    pub pass: bool,
}

/// Map a core precondition error to a usage error naming the flag at fault,
/// falling back to every flag that fed the call.
fn core_err(flags: &'static str) -> impl Fn(Error) -> CliError {
    move |e| {
        let has = |f: &str| flags.split('/').any(|g| g == f);
        let flag = match e {
            Error::NotOddPrime(_) | Error::ModulusOutOfRange(..) if has("--q") => "--q",
            Error::BadDiscriminant(_) if has("--D") => "--D",
            _ => flags,
        };
        CliError::usage(flag, e.to_string())
    }
}

fn psi(d: u64) -> Result<RealCharacter, CliError> {
    RealCharacter::new(d).map_err(core_err("--D"))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

/// Run a validated configuration inside a pool of the requested size.
pub fn run(cfg: &RunConfig) -> Result<Artifact, CliError> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::usage("--threads", e.to_string()))?;
    pool.install(|| dispatch(cfg))
}

fn dispatch(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let fmt = cfg.output.format;
    match &cfg.command {
        Command::Census { q, d, threshold } => run_census(*q, *d, *threshold, fmt),
        Command::Moments {
            q,
            d,
            x,
            threshold,
            max_delta,
        } => run_moments(*q, *d, *x, *threshold, *max_delta, fmt),
        Command::AfeCheck { q, d, tol } => run_afe_check(*q, *d, *tol),
        Command::IdentitySuite { max_q, max_d, tol } => run_identity_suite(*max_q, *max_d, *tol),
        Command::ShiftedConv {
            a,
            b,
            q,
            d,
            sign,
            scales,
            max_deviation,
        } => {
            let base = ShiftedConvParams {
                a: *a,
                b: *b,
                m: 1.0,
                n: 1.0,
                q: *q,
                psi: psi(*d)?,
                sign: *sign,
            };
            run_shifted_conv(base, scales, *max_deviation)
        }
        Command::VoronoiCheck {
            d,
            c,
            a,
            bump_lo,
            bump_hi,
            m_max,
            tol,
        } => run_voronoi(*d, *c, *a, *bump_lo, *bump_hi, *m_max, *tol),
    }
}

fn run_census(q: u64, d: u64, threshold: f64, fmt: Format) -> Result<Artifact, CliError> {
    let p = psi(d)?;
    let counts = census(q, &p, threshold).map_err(core_err("--q/--D"))?;
    let summary = format!(
        "census q={q} D={d}: {}/{} products and {}/{} L(1/2,chi) above {threshold:e}",
        counts.nonzero_product, counts.phi_plus, counts.nonzero_l, counts.phi_plus
    );
    let body = match fmt {
        Format::Json => json(&counts),
        Format::Csv => {
            let vals = oracle_central_values(q, &p).map_err(core_err("--q/--D"))?;
            csv_table(
                &["k", "l_re", "l_im", "l_psi_re", "l_psi_im", "abs_product"],
                vals.into_iter().map(|(k, l, lp)| {
                    vec![k.to_string(), num(l.re), num(l.im), num(lp.re), num(lp.im), num((l * lp).norm())]
                }),
            )
        }
    };
    Ok(Artifact {
        body,
        summary,
        pass: true,
    })
}

fn run_moments(
    q: u64,
    d: u64,
    x: u64,
    threshold: f64,
    max_delta: Option<f64>,
    fmt: Format,
) -> Result<Artifact, CliError> {
    let p = psi(d)?;
    let (rep, rows) = mollified_moments_detailed(q, &p, x, AFEConfig::new(q, d), threshold)
        .map_err(core_err("--q/--D/--X"))?;
    let delta = rep.delta().norm();
    let pass = max_delta.is_none_or(|m| delta <= m);
    let summary = format!(
        "moments q={q} D={d} X={x}: |S1/phi+ - 1| = {delta:.3e}, ratio = {:.4}, {}/{} nonzero",
        rep.ratio, rep.census_nonzero, rep.phi_plus
    );
    let body = match fmt {
        Format::Json => json(&rep),
        Format::Csv => csv_table(
            &["k", "l_re", "l_im", "mollifier_re", "mollifier_im"],
            rows.iter().map(|r| {
                vec![
                    r.k.to_string(),
                    num(r.l_central.re),
                    num(r.l_central.im),
                    num(r.mollifier.re),
                    num(r.mollifier.im),
                ]
            }),
        ),
    };
    Ok(Artifact { body, summary, pass })
}

#[derive(Serialize)]
struct AfeRow {
    k: u64,
    afe: Complex64,
    oracle: Complex64,
    central_diff: f64,
    combo_diff: f64,
}

#[derive(Serialize)]
struct AfeReport {
    q: u64,
    #[serde(rename = "D")]
    d: u64,
    n_max: u64,
    tail_budget: f64,
    tol: f64,
    max_central_diff: f64,
    max_combo_diff: f64,
    pass: bool,
    rows: Vec<AfeRow>,
}

fn run_afe_check(q: u64, d: u64, tol: f64) -> Result<Artifact, CliError> {
    let p = psi(d)?;
    let group = build_group(q).map_err(core_err("--q"))?;
    let cfg = AFEConfig::new(q, d);
    let ev = AfeEvaluator::new(q, &p, cfg).map_err(core_err("--q/--D"))?;
    let chars = enumerate_even_primitive(&group);
    let rows = lcentral::par::map_ordered(&chars, |chi| -> Result<AfeRow, Error> {
        let f = |t: f64| oracle_product_at(Complex64::new(0.5 + t, 0.0), chi, &p);
        let h = 1e-3;
        let f0 = f(0.0)?;
        let deriv = (8.0 * (f(h)? - f(-h)?) - (f(2.0 * h)? - f(-2.0 * h)?)) / (12.0 * h);
        let got = ev.evaluate(chi)?;
        Ok(AfeRow {
            k: chi.index(),
            afe: got.l_central,
            oracle: f0,
            central_diff: (got.l_central - f0).norm(),
            combo_diff: (got.l_combo - (f0 + deriv / (2.0 * cfg.log_q()))).norm(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(core_err("--q/--D"))?;
    let max_central_diff = rows.iter().map(|r| r.central_diff).fold(0.0, f64::max);
    let max_combo_diff = rows.iter().map(|r| r.combo_diff).fold(0.0, f64::max);
    let pass = max_central_diff < tol && max_combo_diff < tol;
    let summary = format!(
        "afe-check q={q} D={d}: {} characters, max diff {max_central_diff:.2e} (combination {max_combo_diff:.2e}), tol {tol:e}",
        rows.len()
    );
    let report = AfeReport {
        q,
        d,
        n_max: cfg.n_max,
        tail_budget: cfg.tail_budget,
        tol,
        max_central_diff,
        max_combo_diff,
        pass,
        rows,
    };
    Ok(Artifact {
        body: json(&report),
        summary,
        pass,
    })
}

#[derive(Serialize)]
struct Suite {
    name: &'static str,
    cases: usize,
    max_residual: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SuiteReport {
    max_q: u64,
    #[serde(rename = "max_D")]
    max_d: u64,
    tol: f64,
    pass: bool,
    suites: Vec<Suite>,
}

fn suite(name: &'static str, residuals: Vec<f64>, tol: f64) -> Suite {
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Suite {
        name,
        cases: residuals.len(),
        max_residual,
        pass: max_residual < tol,
    }
}

fn run_identity_suite(max_q: u64, max_d: u64, tol: f64) -> Result<Artifact, CliError> {
    let primes: Vec<u64> = primes_up_to(max_q).into_iter().filter(|&p| p >= 5).collect();
    // Odd fundamental discriminants; D ≡ 0 (mod 4) is not supported.
    let discs: Vec<RealCharacter> = (5..=max_d).filter_map(|d| RealCharacter::new(d).ok()).collect();
    let u = Complex64::new;

    let mut ortho = Vec::new();
    for &q in &primes {
        let g = build_group(q).map_err(core_err("--max-q"))?;
        for m in 1..q as i64 {
            for n in 1..q as i64 {
                let z = orthogonality_direct(m, n, &g).map_err(core_err("--max-q"))?;
                ortho.push((z - orthogonality_closed(m, n, q) as f64).norm());
            }
        }
    }

    let (mut factorization, mut pair) = (Vec::new(), Vec::new());
    for &q in &primes {
        let g = build_group(q).map_err(core_err("--max-q"))?;
        for p in discs.iter().filter(|p| gcd(q, p.modulus()) == 1) {
            for chi in enumerate_even_primitive(&g) {
                factorization.push(epsilon_factorization_check(&chi, p).map_err(core_err("--max-q"))?);
            }
            pair.push(epsilon_pair_sum(q, p).map_err(core_err("--max-q"))?.residual());
        }
    }

    let shifts = [-0.2, 0.0, 0.3];
    let mut diag = Vec::new();
    for p in &discs {
        for a in shifts {
            for b in shifts {
                diag.push(diagonal_identity_check(p.modulus(), u(a, 0.0), u(b, 0.0)).map_err(core_err("--max-D"))?);
            }
        }
    }

    let mut h = Vec::new();
    for (a, b) in [(0.1, 0.1), (0.2, -0.05), (0.3, 0.15), (-0.1, 0.35), (0.05, 0.4)] {
        let s = h_kernel(u(a, 0.0), u(b, 0.0)).map_err(core_err("--tol"))?;
        let p = h_kernel_product(u(a, 0.0), u(b, 0.0)).map_err(core_err("--tol"))?;
        h.push((s - p).norm());
    }
    for v in [0.1, 0.2] {
        h.push(h_kernel(u(1.0 - v, 0.0), u(v, 0.0)).map_err(core_err("--tol"))?.norm());
    }

    let suites = vec![
        suite("orthogonality", ortho, tol),
        suite("root_number_factorization", factorization, tol),
        suite("root_number_pair_sum", pair, tol),
        suite("diagonal_euler_identity", diag, tol),
        suite("h_kernel", h, tol),
    ];
    let pass = suites.iter().all(|s| s.pass);
    let failed: Vec<_> = suites.iter().filter(|s| !s.pass).map(|s| s.name).collect();
    let summary = format!(
        "identity-suite max-q={max_q} max-D={max_d}: {} suites, {}",
        suites.len(),
        if pass { "all within tolerance".to_string() } else { format!("failed: {}", failed.join(", ")) }
    );
    Ok(Artifact {
        body: json(&SuiteReport {
            max_q,
            max_d,
            tol,
            pass,
            suites,
        }),
        summary,
        pass,
    })
}

#[derive(Serialize)]
struct ShiftedConvRun {
    a: u64,
    b: u64,
    q: u64,
    #[serde(rename = "D")]
    d: u64,
    sign: lcentral::offdiag::Sign,
    max_deviation: Option<f64>,
    pass: bool,
    scales: Vec<lcentral::offdiag::ShiftedConvReport>,
}

fn run_shifted_conv(
    base: ShiftedConvParams,
    scales: &[f64],
    max_deviation: Option<f64>,
) -> Result<Artifact, CliError> {
    let mut reports = Vec::with_capacity(scales.len());
    for &m in scales {
        let p = ShiftedConvParams { m, n: m, ..base.clone() };
        reports.push(compare_scale(&p).map_err(core_err("--a/--b/--q/--D/--scales"))?);
    }
    let worst = reports.iter().map(|r| r.relative_deviation).fold(0.0, f64::max);
    let pass = max_deviation.is_none_or(|m| worst <= m);
    let devs: Vec<String> = reports.iter().map(|r| format!("{:.3e}", r.relative_deviation)).collect();
    let summary = format!(
        "shifted-conv a={} b={} q={} D={}: relative deviations {}",
        base.a,
        base.b,
        base.q,
        base.psi.modulus(),
        devs.join(", ")
    );
    let run = ShiftedConvRun {
        a: base.a,
        b: base.b,
        q: base.q,
        d: base.psi.modulus(),
        sign: base.sign,
        max_deviation,
        pass,
        scales: reports,
    };
    Ok(Artifact {
        body: json(&run),
        summary,
        pass,
    })
}

#[derive(Serialize)]
struct VoronoiReport {
    #[serde(rename = "D")]
    d: u64,
    c: u64,
    a: i64,
    bump: [f64; 2],
    m_max: u64,
    lhs: Complex64,
    rhs: Complex64,
    residual: f64,
    tail_bound: f64,
    m_used: u64,
    converged: bool,
    tol: f64,
    pass: bool,
}

fn run_voronoi(d: u64, c: u64, a: i64, lo: f64, hi: f64, m_max: u64, tol: f64) -> Result<Artifact, CliError> {
    let p = psi(d)?;
    if c == 0 {
        return Err(CliError::usage("--c", "must be positive"));
    }
    let case = factor_character(&p, c, a).map_err(core_err("--D/--c/--a"))?;
    let g = TestFunction::new(lo, hi).map_err(core_err("--bump-lo/--bump-hi"))?;
    let r = voronoi_check(&case, &g, m_max).map_err(core_err("--bump-hi/--m-max"))?;
    let pass = r.residual < tol;
    let summary = format!(
        "voronoi-check D={d} c={c} a={a}: residual {:.3e} with {} dual terms (tail estimate {:.1e})",
        r.residual, r.m_used, r.tail_bound
    );
    let report = VoronoiReport {
        d,
        c,
        a,
        bump: [lo, hi],
        m_max,
        lhs: r.lhs,
        rhs: r.rhs,
        residual: r.residual,
        tail_bound: r.tail_bound,
        m_used: r.m_used,
        converged: r.converged,
        tol,
        pass,
    };
    Ok(Artifact {
        body: json(&report),
        summary,
        pass,
    })
}
