//! Frozen reference values. The CSV was produced by the Hurwitz oracle at two
//! Euler–Maclaurin orders that agreed to 1e-10.

use std::fs::File;
use std::io::BufReader;

use lcentral::arith::RealCharacter;
use lcentral::characters::{build_group, DirichletCharacter};
use lcentral::lvalues::{l_one, read_golden, AFEConfig, AfeEvaluator};
use lcentral::offdiag::{brute_shifted_conv, ShiftedConvParams, Sign};
use lcentral::voronoi::{factor_character, voronoi_lhs, TestFunction};
use num_complex::Complex64;

fn psi5() -> RealCharacter {
    RealCharacter::new(5).unwrap()
}

#[test]
fn afe_matches_golden_central_values() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/central_values_d5.csv");
    let rows = read_golden(BufReader::new(File::open(path).unwrap())).unwrap();
    assert_eq!(rows.len(), 18);
    let psi = psi5();
    for q in [13u64, 29] {
        let g = build_group(q).unwrap();
        let ev = AfeEvaluator::new(q, &psi, AFEConfig::new(q, 5)).unwrap();
        for row in rows.iter().filter(|r| r.q == q) {
            assert_eq!(row.d, 5);
            let chi = DirichletCharacter::new(&g, row.k).unwrap();
            let got = ev.evaluate(&chi).unwrap().l_central;
            let want = Complex64::new(row.re, row.im);
            assert!((got - want).norm() < 1e-8, "q={q} k={}: {got} vs {want}", row.k);
        }
    }
}

#[test]
fn frozen_shifted_convolution() {
    let p = ShiftedConvParams {
        a: 1,
        b: 1,
        m: 500.0,
        n: 500.0,
        q: 101,
        psi: psi5(),
        sign: Sign::Both,
    };
    let v = brute_shifted_conv(&p).unwrap();
    let want = 2.353_561_859_024_497e2;
    assert!(((v - want) / want).abs() < 1e-9, "{v}");
}

#[test]
fn frozen_voronoi_lhs() {
    let case = factor_character(&psi5(), 3, 1).unwrap();
    let g = TestFunction::new(10.0, 100.0).unwrap();
    let v = voronoi_lhs(&case, &g).unwrap();
    let want = Complex64::new(-8.127_244_083_668_26, 7.900_118_066_131_632e-1);
    assert!((v - want).norm() < 1e-9 * want.norm(), "{v}");
}

#[test]
fn l_one_class_number_formula() {
    // h(5) = 1, fundamental unit (1+√5)/2.
    let want = 2.0 / 5f64.sqrt() * ((1.0 + 5f64.sqrt()) / 2.0).ln();
    assert!((l_one(&psi5()) - want).abs() < 1e-12);
    assert!((want - 4.304_089_409_640_039_5e-1).abs() < 1e-15);
}
