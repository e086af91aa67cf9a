//! The thirteen acceptance criteria. Run with
//! `cargo test -p levelmetric --test acceptance -- --nocapture` to see one line per criterion.

use std::f64::consts::PI;
use std::time::Instant;

use levelmetric::catalog::{planar_field, Preset};
use levelmetric::coarea::{improper_integral, region_integral, sliced_integral, BandRegion, QuadratureConfig};
use levelmetric::contour::{curve_length, extract_level};
use levelmetric::evolve::{resample_uniform, verify_csf_area_law, verify_csf_circle, verify_parallel_offset};
use levelmetric::field::{kappa, GRAD_FLOOR};
use levelmetric::fieldlang::{parse, Jet2, Kind};
use levelmetric::geom::{Point2, Polyline, Rect};
use levelmetric::identities::{self as id, VerificationReport, VerifyOptions};
use levelmetric::suite::run_all;
use levelmetric::surface3d::{surface_options, verify_area_derivative, verify_gauss_identities, Band3};
use levelmetric::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn rel(x: f64, exact: f64) -> f64 {
    (x - exact).abs() / exact.abs()
}

fn with_tol(id: &str, tol: f64) -> VerifyOptions {
    let mut o = VerifyOptions::default();
    o.tolerances.insert(id.into(), tol);
    o
}

/// Largest relative error over the checks whose names start with `prefix`, and whether they all pass.
fn checks_with(rep: &VerificationReport, prefix: &str) -> (bool, f64, usize) {
    let cs: Vec<_> = rep.checks.iter().filter(|c| c.name.starts_with(prefix)).collect();
    let worst = cs.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    (!cs.is_empty() && cs.iter().all(|c| c.pass), worst, cs.len())
}

fn annulus() -> Result<Box<dyn levelmetric::field::ScalarField2>> {
    parse("x^2+y^2", Kind::Real2d)?.to_field2()
}

fn c1_coarea() -> Result<Outcome> {
    let f = annulus()?;
    let band = BandRegion::new(&*f, 1.0, 4.0, Rect::centered(3.0))?;
    let cfg = QuadratureConfig { grid_n: 512, t_subdivisions: 128, ..Default::default() };
    let mut worst: f64 = 0.0;
    let one = |_: Point2, _: &Jet2| 1.0;
    let grad = |_: Point2, j: &Jet2| j.grad_norm();
    for (g, exact) in [(&one as &levelmetric::coarea::Weight<'_>, 3.0 * PI), (&grad, 28.0 * PI / 3.0)] {
        worst = worst.max(rel(region_integral(&band, g, &cfg)?.value, exact));
        worst = worst.max(rel(sliced_integral(&band, g, &cfg)?, exact));
    }
    outcome(worst <= 1e-3, format!("worst relative error {worst:.2e} (tol 1e-3)"))
}

fn c2_main_derivative() -> Result<Outcome> {
    let f = annulus()?;
    let band = BandRegion::new(&*f, 1.0, 4.0, Rect::centered(3.0))?;
    let rep = id::verify_main_a(&band, &|_| 1.0, &with_tol("main_a", 1e-3))?;
    let (pass, worst, n) = checks_with(&rep, "derivative@");
    outcome(pass && n == 16, format!("{n} sampled t, worst relative error {worst:.2e} (tol 1e-3)"))
}

fn c3_curvature_with_critical_point() -> Result<Outcome> {
    let f = planar_field(&Preset::Lemniscate.entry().expr()?)?;
    let (a, b) = (0.25, 2.25);
    let window = Rect::centered(2.0);
    let band = BandRegion::new(&*f, a, b, window)?;
    let cfg = QuadratureConfig::default();
    let crit: Vec<Point2> = band.interior_critical_points().iter().map(|c| c.location).collect();
    let k = |_: Point2, j: &Jet2| kappa(j, GRAD_FLOOR).unwrap_or(f64::NAN);
    let imp = improper_integral(&band.region(), &k, &crit, &cfg.excision_radii, cfg.grid_n, cfg.subdivision_depth)?;
    let diff = curve_length(&extract_level(&*f, b, &window, cfg.grid_n)?) - curve_length(&extract_level(&*f, a, &window, cfg.grid_n)?);
    let e = rel(imp.value, diff);
    outcome(
        !crit.is_empty() && e <= 1e-2 && imp.rel_fit_residual < 0.1,
        format!(
            "{} critical point(s) excised, relative error {e:.2e} (tol 1e-2), fit residual {:.3} (< 0.1)",
            crit.len(),
            imp.rel_fit_residual
        ),
    )
}

fn c4_jordan() -> Result<Outcome> {
    let f = planar_field(&Preset::Lemniscate.entry().expr()?)?;
    let rep = id::verify_jordan_boundary(&*f, 4.0, None, &Rect::centered(2.5), &with_tol("jordan_boundary", 1e-2))?;
    outcome(rep.pass, format!("L = {:.6}, iint kappa = {:.6}, relative error {:.2e} (tol 1e-2)", rep.lhs, rep.rhs, rep.rel_err))
}

fn c5_complex() -> Result<Outcome> {
    let z2 = parse("z^2", Kind::Complex)?;
    let rep = id::verify_complex(&z2, 1.0, 4.0, &Rect::centered(3.0), &with_tol("complex", 1e-3))?;
    let get = |n: &str| rep.check(n).map(|c| c.lhs).unwrap_or(f64::NAN);
    let closed = [rel(get("area"), 3.0 * PI), rel(get("length_integral"), 28.0 * PI / 3.0), rel(get("curvature"), 2.0 * PI)];
    let worst_closed = closed.iter().cloned().fold(0.0, f64::max);
    let lem = parse("z^2-1", Kind::Complex)?;
    let cross = id::verify_complex(&lem, 0.5, 1.5, &Rect::centered(2.0), &with_tol("complex", 1e-2))?;
    outcome(
        rep.pass && worst_closed <= 1e-3 && cross.pass,
        format!("z^2 closed forms worst {worst_closed:.2e} (tol 1e-3); z^2-1 cross-pipeline worst {:.2e} (tol 1e-2)", cross.rel_err),
    )
}

fn c6_saddle() -> Result<Outcome> {
    let f = parse("x^2-y^2", Kind::Real2d)?.to_field2()?;
    let rep = id::verify_saddle_symmetry(&*f, Point2::default(), 1.0, &Rect::centered(1.5), &VerifyOptions::default())?;
    let v = rep.check("curvature_integral").map(|c| c.lhs).unwrap_or(f64::NAN);
    outcome(v.abs() <= 1e-3, format!("|iint kappa| = {:.2e} (tol 1e-3)", v.abs()))
}

fn c7_area_perimeter() -> Result<Outcome> {
    let f = annulus()?;
    let band = BandRegion::new(&*f, 1.0, 4.0, Rect::centered(3.0))?;
    let rep = id::verify_area_perimeter(&band, &with_tol("area_perimeter", 1e-3))?;
    let (grad_ok, grad_worst, n) = checks_with(&rep, "grad_L_of_f@");
    let area = rep.check("area").expect("area check");
    outcome(
        grad_ok && area.pass,
        format!("area relative error {:.2e}; |grad(L o f)| at {n} points worst {grad_worst:.2e} (tol 1e-3)", area.rel_err),
    )
}

fn c8_offsets() -> Result<Outcome> {
    let circle = Polyline::circle(Point2::default(), 1.0, 1024);
    let c = verify_parallel_offset(&circle, &[0.5, 1.0], 1e-4)?;
    let ellipse = resample_uniform(&Polyline::ellipse(Point2::default(), 2.0, 1.0, 4096), 1024);
    let e = verify_parallel_offset(&ellipse, &[0.5, 1.0], 1e-3)?;
    outcome(
        c.pass && e.pass,
        format!("circle worst {:.2e} (tol 1e-4), ellipse worst {:.2e} (tol 1e-3)", c.rel_err, e.rel_err),
    )
}

fn c9_csf() -> Result<Outcome> {
    let circle = verify_csf_circle(1.0, 256, 0.4, 1e-3, 0.02)?;
    let (radius_ok, radius_worst, _) = checks_with(&circle, "radius@");
    let ext = circle.check("extinction").expect("extinction check");
    let ellipse = Polyline::ellipse(Point2::default(), 2.0, 1.0, 256);
    let (law, trace) = verify_csf_area_law(&ellipse, 0.8, 1e-2)?;
    let (area_ok, area_worst, _) = checks_with(&law, "area_law@");
    let decreasing = trace.lengths.windows(2).all(|w| w[1] < w[0]);
    outcome(
        radius_ok && ext.pass && area_ok && decreasing,
        format!(
            "radius law worst {radius_worst:.2e}; extinction {:.4} vs {:.4}; ellipse A+2 pi t worst {area_worst:.2e}; L strictly decreasing over {} steps: {decreasing}",
            ext.lhs,
            ext.rhs,
            trace.len()
        ),
    )
}

fn c10_circle_characterization() -> Result<Outcome> {
    let circle = id::circle_characterization(&Polyline::circle(Point2::default(), 1.0, 256), 1e-3)?;
    let ellipse = id::circle_characterization(&Polyline::ellipse(Point2::default(), 2.0, 1.0, 1024), 1e-3)?;
    let sq: Vec<Point2> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)].iter().map(|&(x, y)| Point2::new(x, y)).collect();
    let square = id::circle_characterization(&Polyline::new(sq, true), 1e-3)?;
    let square_exact = 4.0 / PI - 1.0;
    outcome(
        circle.deficit <= 1e-3 && ellipse.deficit >= 0.07 && (square.deficit - square_exact).abs() <= 1e-3,
        format!("deficits: circle {:.2e}, ellipse {:.4}, square {:.6} (exact {square_exact:.6})", circle.deficit, ellipse.deficit, square.deficit),
    )
}

fn c11_prop42() -> Result<Outcome> {
    let f = parse("2*x^2+y^2", Kind::Real2d)?.to_field2()?;
    let band = BandRegion::new(&*f, 1.0, 4.0, Rect::centered(3.0))?;
    let rep = id::verify_prop42(&band, &with_tol("prop42", 1e-2))?;
    let worst = |n: &str| rep.check(n).map(|c| c.rel_err).unwrap_or(f64::NAN);
    outcome(
        rep.pass,
        format!(
            "kappa f_x {:.2e}, kappa f_y {:.2e} of iint|kappa grad f|; iint kappa|grad f| vs 2 pi (b-a) {:.2e} (tol 1e-2)",
            worst("kappa_fx"),
            worst("kappa_fy"),
            worst("kappa_grad")
        ),
    )
}

fn c12_surfaces() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (preset, a_tol) in [(Preset::Sphere, 1e-3), (Preset::Torus, 2e-2)] {
        let e = preset.entry();
        let field = e.field3()?;
        let band = Band3::new(&field, e.band.0, e.band.1, e.box3())?;
        let mut opts = surface_options();
        opts.tolerances.insert("gauss".into(), 1e-2);
        opts.tolerances.insert("area_derivative".into(), a_tol);
        let g = verify_gauss_identities(&band, &opts)?;
        let (gb_ok, gb, _) = checks_with(&g, "gauss_bonnet@");
        let kg = g.check("k_grad_norm").expect("k_grad_norm check");
        let ad = verify_area_derivative(&band, &opts)?;
        pass &= gb_ok && kg.pass && ad.pass;
        parts.push(format!(
            "{preset}: iint K {gb:.2e}, iiint K|grad f| {:.2e} (tol 1e-2), A' worst {:.2e} (tol {a_tol:.0e})",
            kg.rel_err, ad.rel_err
        ));
    }
    outcome(pass, parts.join("; "))
}

fn suite_json(threads: usize) -> Result<String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    let records = pool.install(|| run_all(&VerifyOptions::default(), &surface_options()))?;
    Ok(records.iter().map(|r| r.to_json() + "\n").collect())
}

fn c13_determinism() -> Result<Outcome> {
    let one = suite_json(1)?;
    let eight = suite_json(8)?;
    let lines = one.lines().count();
    outcome(one == eight && lines > 0, format!("{lines} JSON records, byte-identical across 1 and 8 threads: {}", one == eight))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Result<Outcome>); 13] = [
        ("coarea", c1_coarea),
        ("length as derivative of the gradient flux", c2_main_derivative),
        ("curvature integral across a critical value", c3_curvature_with_critical_point),
        ("jordan boundary", c4_jordan),
        ("analytic fields", c5_complex),
        ("saddle symmetry", c6_saddle),
        ("area and perimeter", c7_area_perimeter),
        ("parallel offsets", c8_offsets),
        ("curve-shortening flow", c9_csf),
        ("circle characterization", c10_circle_characterization),
        ("curvature moments on a regular band", c11_prop42),
        ("surfaces", c12_surfaces),
        ("determinism", c13_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let (pass, detail) = match std::panic::catch_unwind(run) {
            Ok(Ok(o)) => (o.pass, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        println!(
            "criterion {n:>2} {name}: {} ({:.1} s) {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if !pass {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
