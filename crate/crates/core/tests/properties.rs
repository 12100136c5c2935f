use proptest::prelude::*;

use qcx::convexifiability::{
    composed_hessian_indefinite, curvature_on_tangent, lift_tangent, ray_sign_flip, reduced_form,
    CERT_TOL, SIGN_FLIP_TOL,
};
use qcx::eigen::min_eigenvalue;
use qcx::fd::{fd_gradient, StepPolicy};
use qcx::lambda_search::convexification_matrix;
use qcx::monotone::MonotoneF;
use qcx::quasiconvexity::{mu_identity_check, segment_test, SegmentSample};
use qcx::{eval_u, grad_u, hess_u, Alpha, PointE};

fn coord() -> impl Strategy<Value = f64> {
    (0.25f64.ln()..4f64.ln()).prop_map(f64::exp)
}

fn point() -> impl Strategy<Value = PointE> {
    (coord(), coord(), coord()).prop_map(|(x, y, z)| PointE::new(x, y, z).unwrap())
}

fn alpha() -> impl Strategy<Value = Alpha> {
    (0.1f64..3.0).prop_map(|a| Alpha::new(a).unwrap())
}

fn family() -> impl Strategy<Value = MonotoneF> {
    prop::sample::select(MonotoneF::test_families())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn euler_relations(p in point(), a in alpha()) {
        let g = grad_u(&p, a).unwrap();
        let h = hess_u(&p, a).unwrap();
        let v = p.to_vec();
        prop_assert!(g.dot(&v).abs() <= 1e-12 * g.norm() * v.norm());
        let r = h.mul_vec(&v) + g;
        prop_assert!(r.norm() <= 1e-12 * (h.frobenius_norm() * v.norm() + g.norm()));
    }

    #[test]
    fn scaling_laws(p in point(), a in alpha(), s in 0.1f64..10.0) {
        let sp = p.scaled(s).unwrap();
        let (u, us) = (eval_u(&p, a).unwrap(), eval_u(&sp, a).unwrap());
        prop_assert!((u - us).abs() <= 1e-12 * u);
        let (h, hs) = (hess_u(&p, a).unwrap(), hess_u(&sp, a).unwrap());
        prop_assert!((hs.scale(s * s) - h).frobenius_norm() <= 1e-11 * h.frobenius_norm());
    }

    #[test]
    fn gradient_matches_differences(p in point(), a in alpha()) {
        let g = grad_u(&p, a).unwrap();
        let fd = fd_gradient(|q| eval_u(q, a), &p, StepPolicy::GRADIENT).unwrap();
        prop_assert!((g - fd).norm() <= 1e-6 * g.norm());
    }

    #[test]
    fn segments_never_exceed_endpoint_max(p1 in point(), p2 in point(), l in 0.0f64..=1.0, a in alpha()) {
        let o = segment_test(&SegmentSample::new(p1, p2, l).unwrap(), a, 1e-10).unwrap();
        prop_assert!(o.passed, "margin {}", o.margin);
        let mu = mu_identity_check(&p1, &p2, l, a).unwrap();
        prop_assert!(mu.relative <= 1e-10);
    }

    #[test]
    fn tangent_curvature_is_nonnegative_and_matches_reduced_form(
        p in point(), a in alpha(), xi1 in -1.0f64..1.0, xi2 in -1.0f64..1.0,
    ) {
        let xi = lift_tangent(xi1, xi2, &p, a).unwrap();
        let c = curvature_on_tangent(&xi).unwrap();
        let h = hess_u(&p, a).unwrap();
        let v = xi.xi();
        let scale = h.frobenius_norm() * v.dot(&v);
        prop_assert!(c >= -1e-12 * scale);
        let q = reduced_form(&p, a).unwrap();
        let via_q = p.z().powf(a.value()) * q.eval(xi1, xi2);
        prop_assert!((c - via_q).abs() <= 1e-10 * scale);
    }

    #[test]
    fn every_transformation_has_a_sign_flip(p in point(), a in alpha(), f in family()) {
        let u = eval_u(&p, a).unwrap();
        prop_assume!(f.strict_first(u).is_ok() && f.second(u).is_ok());
        let flip = ray_sign_flip(&p, a, &f, SIGN_FLIP_TOL).unwrap();
        prop_assert!(flip.positive.value > 0.0 && flip.negative.value < 0.0);
        for w in [flip.positive, flip.negative] {
            prop_assert!((w.value - w.recomputed).abs() <= 1e-8 * w.value.abs());
        }
    }

    #[test]
    fn composed_hessian_is_indefinite_below_one(
        p in point(), a in (0.1f64..1.0).prop_map(|a| Alpha::new(a).unwrap()), f in family(),
    ) {
        prop_assert!(composed_hessian_indefinite(&p, a, &f, CERT_TOL).unwrap().passed);
    }

    #[test]
    fn radial_direction_stays_null(p in point(), a in alpha(), k in -4i32..10) {
        let lambda = 2f64.powi(k);
        let m = convexification_matrix(&p, a, lambda).unwrap();
        let v = p.to_vec();
        let g = grad_u(&p, a).unwrap();
        prop_assert!(m.quad(&v).abs() <= 1e-12 * m.frobenius_norm() * v.dot(&v));
        prop_assert!((m.mul_vec(&v) + g).norm() <= 1e-12 * (m.frobenius_norm() * v.norm() + g.norm()));
        prop_assert!(min_eigenvalue(&m) < 0.0);
    }

    #[test]
    fn min_eigenvalue_grows_with_lambda(p in point(), a in alpha(), l in 0.0f64..100.0, d in 0.0f64..100.0) {
        let lo = convexification_matrix(&p, a, l).unwrap();
        let hi = convexification_matrix(&p, a, l + d).unwrap();
        prop_assert!(min_eigenvalue(&hi) >= min_eigenvalue(&lo) - 1e-12 * hi.frobenius_norm());
    }
}
