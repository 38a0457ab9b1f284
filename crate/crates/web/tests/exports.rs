use lcentral::special::DIGAMMA_QUARTER;
use lcentral_web::{central_values, voronoi_residual, weight_curves};

#[test]
fn weight_curves_shape() {
    let w = weight_curves(5.0, 1e-3, 50.0, 64).unwrap();
    assert_eq!(w.x.len(), 64);
    assert!((w.x[0] - 1e-3).abs() < 1e-15 && (w.x[63] - 50.0).abs() < 1e-12);
    // V falls from near 1 to 0; the derivative parts of W₁ + W₂ sum to −2ψ(1/4)V.
    assert!(w.v[0] > 0.8 && w.v[63] < 1e-15);
    assert!(w.v.windows(2).all(|p| p[1] <= p[0] + 1e-12));
    let k = 1.0 - DIGAMMA_QUARTER / 5.0;
    for i in 0..64 {
        assert!((w.w1[i] + w.w2[i] - k * w.v[i]).abs() < 1e-12);
    }
    assert!(weight_curves(-1.0, 1e-3, 1.0, 10).is_err());
    assert!(weight_curves(5.0, 1.0, 1.0, 10).is_err());
}

#[test]
fn central_values_match_golden_row() {
    let v = central_values(13, 5).unwrap();
    assert_eq!(v.len(), 5);
    let first = &v[0];
    assert_eq!(first.k, 2);
    assert!((first.re - 3.72012681588e-1).abs() < 1e-10 && (first.im - 2.21190180564e-1).abs() < 1e-10);
    assert!(central_values(13, 8).is_err());
    assert!(central_values(401, 5).is_err());
}

#[test]
fn voronoi_residual_small() {
    let r = voronoi_residual(5, 3, 1, 10.0, 100.0, 20_000).unwrap();
    assert!(r.residual < 1e-6, "{r:?}");
    assert!(voronoi_residual(5, 3, 1, 10.0, 2e4, 1000).is_err());
}

#[test]
fn json_field_names() {
    let s = serde_json::to_value(voronoi_residual(5, 3, 1, 10.0, 100.0, 20_000).unwrap()).unwrap();
    for key in ["lhs", "rhs", "residual", "tail_bound", "m_used", "converged"] {
        assert!(s.get(key).is_some(), "{key}");
    }
}
