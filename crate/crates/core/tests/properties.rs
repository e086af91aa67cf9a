use std::f64::consts::PI;

use proptest::prelude::*;

use levelmetric::contour::{extract_level, projection_tol};
use levelmetric::evolve::{csf_run, parallel_offset, CsfConfig, StepSize};
use levelmetric::fieldlang::{parse, Kind};
use levelmetric::geom::{Box3, Point2, Polyline, Rect};
use levelmetric::identities::{Check, VerificationReport, VerifyOptions};
use levelmetric::suite::{run_evolve, SuiteRecord};
use levelmetric::surface3d::extract_surface;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn level_sets_of_rotated_ellipses_are_projected_simple_and_oriented(
        a in 0.5f64..3.0,
        b in 0.5f64..3.0,
        theta in 0.0f64..PI,
        cx in -0.3f64..0.3,
        cy in -0.3f64..0.3,
        t in 0.5f64..2.0,
    ) {
        let (c, s) = (theta.cos(), theta.sin());
        let src = format!(
            "{a}*(({c})*(x-({cx}))+({s})*(y-({cy})))^2+{b}*(-({s})*(x-({cx}))+({c})*(y-({cy})))^2"
        );
        let f = parse(&src, Kind::Real2d).unwrap().to_field2().unwrap();
        let ls = extract_level(&*f, t, &Rect::centered(3.0), 512).unwrap();
        prop_assert_eq!(ls.components.len(), 1);
        let comp = &ls.components[0];
        let v = &comp.polyline.vertices;
        prop_assert!(comp.polyline.closed && comp.polyline.is_simple());
        prop_assert_eq!(comp.sigma, Some(1));
        for i in 0..v.len() {
            let (prev, next) = (v[(i + v.len() - 1) % v.len()], v[(i + 1) % v.len()]);
            prop_assert!(v[i].dist(next) > 0.0);
            prop_assert!((f.value(v[i]).unwrap() - t).abs() <= projection_tol(t) * 10.0);
            let g = f.jet(v[i]).unwrap().grad;
            let tangent = Point2::new(next.x - prev.x, next.y - prev.y);
            let normal = Point2::new(-g[0], -g[1]);
            prop_assert!(tangent.cross(normal) > 0.0);
            prop_assert!(comp.grad_norm[i] > 0.0);
        }
        // the exact area of {f <= t} is pi t / sqrt(ab)
        let exact = PI * t / (a * b).sqrt();
        prop_assert!((comp.polyline.area() - exact).abs() / exact < 1e-3);
    }

    #[test]
    fn ellipse_offsets_follow_the_steiner_laws(a in 0.5f64..3.0, ratio in 0.3f64..1.0, t in 0.0f64..2.0) {
        let e = Polyline::ellipse(Point2::default(), a, a * ratio, 2048);
        let o = parallel_offset(&e, t).unwrap();
        let (l0, a0) = (e.length(), e.area());
        prop_assert!((o.length() - (l0 + 2.0 * PI * t)).abs() / (l0 + 2.0 * PI * t) < 1e-4);
        let exact = a0 + l0 * t + PI * t * t;
        prop_assert!((o.area() - exact).abs() / exact < 1e-4);
    }

    #[test]
    fn csf_traces_are_well_formed(a in 1.0f64..2.0, ratio in 0.5f64..1.0) {
        let e = Polyline::ellipse(Point2::default(), a, a * ratio, 128);
        let cfg = CsfConfig { dt: StepSize::Auto, t_end: 0.05, store_every: Some(50), ..Default::default() };
        let trace = csf_run(&e, &cfg).unwrap();
        prop_assert!(trace.times.windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(trace.lengths.len(), trace.times.len());
        prop_assert_eq!(trace.areas.len(), trace.times.len());
        prop_assert!(trace.lengths.windows(2).all(|w| w[1] < w[0]));
        for s in trace.curves.as_ref().unwrap() {
            prop_assert!(s.curve.is_simple());
        }
    }

    #[test]
    fn ellipsoid_meshes_are_closed_spheres(a in 0.6f64..1.5, b in 0.6f64..1.5, c in 0.6f64..1.5) {
        let src = format!("x^2/{}+y^2/{}+z^2/{}", a * a, b * b, c * c);
        let f = parse(&src, Kind::Real3d).unwrap().to_field3().unwrap();
        let mesh = extract_surface(&f, 1.0, &Box3::centered(2.0), 24).unwrap();
        prop_assert!(mesh.check_closed_manifold().is_ok());
        prop_assert_eq!(mesh.euler_characteristic(), 2);
    }

    #[test]
    fn report_pass_iff_within_tolerance(lhs in -10.0f64..10.0, rhs in 0.1f64..10.0, tol in 1e-6f64..1.0) {
        let c = Check::equal("x", lhs, rhs, tol, 0.0);
        prop_assert_eq!(c.pass, c.rel_err <= tol);
        let rep = VerificationReport::new("demo", Default::default(), vec![c.clone()], Vec::new());
        prop_assert_eq!(rep.pass, rep.rel_err <= rep.tolerance);
    }
}

#[test]
fn torus_mesh_has_euler_characteristic_zero_under_refinement() {
    let f = parse("(sqrt(x^2+y^2)-1)^2+z^2", Kind::Real3d).unwrap().to_field3().unwrap();
    for n in [32, 48, 64] {
        let mesh = extract_surface(&f, 0.16, &Box3::centered(1.75), n).unwrap();
        assert!(mesh.check_closed_manifold().is_ok());
        assert_eq!(mesh.euler_characteristic(), 0, "grid {n}");
    }
}

#[test]
fn suite_records_round_trip_through_json() {
    let records = run_evolve(&VerifyOptions::default());
    assert!(records.iter().all(SuiteRecord::ok));
    for r in &records {
        let line = r.to_json();
        let back: SuiteRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(&back, r);
        assert_eq!(back.to_json(), line);
    }
}
