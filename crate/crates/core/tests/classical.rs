use nclp::classical::{build_classical, criterion, eps_delta_modulus, FiniteMeasureSpace, PointMap};
use nclp::Exponent;

fn e(s: &str) -> Exponent {
    s.parse().unwrap()
}

// Shrinking the mass of the image atom drives f_J up; the measured norm must
// follow the criterion bound all the way.
#[test]
fn norm_blows_up_with_the_criterion() {
    let t = PointMap::new(vec![Some(0), Some(1)], 2).unwrap();
    let m2 = FiniteMeasureSpace::new(vec![0.5, 0.5]).unwrap();
    for (p, q) in [("2", "1"), ("3", "1.5"), ("2", "2")] {
        let mut last = 0.0;
        for k in 1..=6 {
            let eps = 10f64.powi(-k);
            let m1 = FiniteMeasureSpace::new(vec![eps, 1.0]).unwrap();
            let op = build_classical(&t, &m1, &m2, e(p), e(q)).unwrap();
            let bound = op.criterion.bound;
            assert!((op.exact_norm - bound).abs() <= 1e-9 * bound, "({p}, {q}) eps {eps}: {} vs {bound}", op.exact_norm);
            assert!(op.exact_norm > last);
            last = op.exact_norm;
        }
        assert!(last > 30.0, "({p}, {q}): {last}");
    }
    // from L^∞ the norm is m₂(Y)^{1/q} whatever m₁ is
    for k in 1..=6 {
        let m1 = FiniteMeasureSpace::new(vec![10f64.powi(-k), 1.0]).unwrap();
        let op = build_classical(&t, &m1, &m2, Exponent::Infinity, e("2")).unwrap();
        assert!((op.exact_norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn measure_preserving_maps_are_contractions() {
    let m = FiniteMeasureSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let swap = PointMap::new(vec![Some(1), Some(0), Some(2), Some(3)], 4).unwrap();
    let c = criterion(&swap, &m, &m, e("2"), e("2")).unwrap();
    assert!(c.bound > 1.0);
    let t = PointMap::identity(4);
    for p in ["1", "2", "4", "inf"] {
        let c = criterion(&t, &m, &m, e(p), e(p)).unwrap();
        assert!((c.bound - 1.0).abs() < 1e-15);
    }
}

#[test]
fn eps_delta_is_monotone() {
    let phi0 = [0.05, 0.3, 0.15, 0.2, 0.3];
    let phi1 = [0.2, 0.2, 0.2, 0.2, 0.2];
    let mut last = 0.0;
    for eps in [0.05, 0.1, 0.2, 0.3, 0.5] {
        let d = eps_delta_modulus(&phi0, &phi1, eps).unwrap();
        assert!(d >= last);
        last = d;
    }
}
