//! Property tests for the crate-wide invariants: frame roundtrips and ball
//! inclusions, quadrature exactness against the Beta-product oracle,
//! frequency scale invariance, and Lambda monotonicity.

use dinilab::coefficients::{make_frame, CoefficientField};
use dinilab::fields::catalog_homogeneous;
use dinilab::functionals::{energy, height};
use dinilab::geometry::{BoundaryChart, DiniDomain};
use dinilab::num::{Mat2, Vec2};
use dinilab::quadrature::{gauss_jacobi, QuadParams};
use proptest::prelude::*;

fn spd_matrix() -> impl Strategy<Value = Mat2> {
    // A = R D R^T with rotation angle t and positive eigenvalues
    (0.0..std::f64::consts::PI, 0.3f64..3.0, 0.3f64..3.0).prop_map(|(t, d1, d2)| {
        let (c, s) = (t.cos(), t.sin());
        let r = Mat2::new(c, -s, s, c);
        let rt = Mat2::new(c, s, -s, c);
        r.mul_mat(Mat2::diag(d1, d2)).mul_mat(rt)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frame_roundtrip(m in spd_matrix(),
                       zx in -2.0f64..2.0, zy in -2.0f64..2.0,
                       px in -5.0f64..5.0, py in -5.0f64..5.0) {
        let m = Mat2::new(m.a, 0.5 * (m.b + m.c), 0.5 * (m.b + m.c), m.d);
        let coeff = CoefficientField::constant(m).unwrap();
        let f = make_frame(&coeff, Vec2::new(zx, zy)).unwrap();
        let x = Vec2::new(px, py);
        let back = f.inverse(f.forward(x));
        prop_assert!((back - x).norm() <= 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn ball_inclusions(m in spd_matrix(),
                       px in -1.0f64..1.0, py in -1.0f64..1.0,
                       r in 0.01f64..2.0, theta in 0.0f64..std::f64::consts::TAU) {
        let m = Mat2::new(m.a, 0.5 * (m.b + m.c), 0.5 * (m.b + m.c), m.d);
        let coeff = CoefficientField::constant(m).unwrap();
        let lambda = coeff.lambda;
        let f = make_frame(&coeff, Vec2::ZERO).unwrap();
        let p = Vec2::new(px, py);
        let tp = f.forward(p);
        // a point of B_{sqrt(lambda) r}(T p) pulls back into B_r(p)
        let inner = tp + Vec2::from_polar(lambda.sqrt() * r * 0.999, theta);
        prop_assert!((f.inverse(inner) - p).norm() <= r * (1.0 + 1e-12));
        // a point of T(B_r(p)) lands in B_{r/sqrt(lambda)}(T p)
        let image = f.forward(p + Vec2::from_polar(r, theta));
        prop_assert!((image - tp).norm() <= r / lambda.sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn jacobi_moments_exact(alpha in -0.5f64..8.0, k in 0usize..10) {
        // m-point rule integrates t^k (1-t)^alpha exactly for k <= 2m - 1
        let rule = gauss_jacobi(alpha, 0.0, 8).unwrap();
        let got: f64 = rule.nodes.iter().zip(&rule.weights)
            .map(|(t, w)| w * t.powi(k as i32))
            .sum();
        // oracle: B(k+1, alpha+1) by the integer recurrence
        let mut want = 1.0 / (alpha + 1.0);
        for j in 1..=k {
            want *= j as f64 / (alpha + 1.0 + j as f64);
        }
        prop_assert!((got - want).abs() <= 1e-11 * want.max(1e-3));
    }

    #[test]
    fn frequency_scale_invariant(c in prop::sample::select(vec![-100.0, -0.5, 0.3, 7.0, 1e6]),
                                 r in 0.05f64..0.4) {
        let e = catalog_homogeneous(2).unwrap();
        let q = QuadParams::default();
        let h1 = height(&e.solution, &e.coeff, Vec2::ZERO, r, 1.0, &q).unwrap();
        let i1 = energy(&e.solution, &e.coeff, Vec2::ZERO, r, 1.0, &q).unwrap();
        let scaled = e.solution.scaled(c);
        let h2 = height(&scaled, &e.coeff, Vec2::ZERO, r, 1.0, &q).unwrap();
        let i2 = energy(&scaled, &e.coeff, Vec2::ZERO, r, 1.0, &q).unwrap();
        prop_assert!(((i2 / h2) - (i1 / h1)).abs() <= 1e-12 * (i1 / h1).abs());
    }

    #[test]
    fn lambda_monotone(r1 in 1e-6f64..0.37, r2 in 1e-6f64..0.37) {
        let domain = DiniDomain::new(BoundaryChart::power_cusp(0.5, 0.4).unwrap()).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let l_lo = domain.lambda_of(lo).unwrap();
        let l_hi = domain.lambda_of(hi).unwrap();
        prop_assert!(l_lo <= l_hi + 1e-15);
        prop_assert!(l_lo >= lo.sqrt() - 1e-15);
    }

    #[test]
    fn heights_strictly_increase(r in 0.05f64..0.2) {
        let e = catalog_homogeneous(1).unwrap();
        let q = QuadParams::default();
        let h1 = height(&e.solution, &e.coeff, Vec2::ZERO, r, 1.5, &q).unwrap();
        let h2 = height(&e.solution, &e.coeff, Vec2::ZERO, 1.5 * r, 1.5, &q).unwrap();
        prop_assert!(h2 > h1);
    }
}
