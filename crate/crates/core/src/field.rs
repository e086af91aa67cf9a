//! Pointwise services on scalar fields: level-curve curvature, critical points, and the
//! generalized Morse test.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldlang::{FieldExpr, Jet2, Jet3};
use crate::geom::{Point2, Point3, Rect};

/// Gradient norms at or below this are treated as critical.
pub const GRAD_FLOOR: f64 = 1e-9;

/// A planar scalar field with exact second-order jets.
pub trait ScalarField2: Send + Sync {
    fn value(&self, p: Point2) -> Result<f64>;
    fn jet(&self, p: Point2) -> Result<Jet2>;
    fn describe(&self) -> String {
        "<field>".into()
    }
}

/// A scalar field on space with exact second-order jets.
pub trait ScalarField3: Send + Sync {
    fn value(&self, p: Point3) -> Result<f64>;
    fn jet(&self, p: Point3) -> Result<Jet3>;
    fn describe(&self) -> String {
        "<field>".into()
    }
}

impl<T: ScalarField2 + ?Sized> ScalarField2 for &T {
    fn value(&self, p: Point2) -> Result<f64> {
        (**self).value(p)
    }
    fn jet(&self, p: Point2) -> Result<Jet2> {
        (**self).jet(p)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<T: ScalarField2 + ?Sized> ScalarField2 for Box<T> {
    fn value(&self, p: Point2) -> Result<f64> {
        (**self).value(p)
    }
    fn jet(&self, p: Point2) -> Result<Jet2> {
        (**self).jet(p)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<T: ScalarField3 + ?Sized> ScalarField3 for &T {
    fn value(&self, p: Point3) -> Result<f64> {
        (**self).value(p)
    }
    fn jet(&self, p: Point3) -> Result<Jet3> {
        (**self).jet(p)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Signed curvature of the level curve through the jet's point, or `NearCritical`.
///
/// Sign convention: `N = -grad f / |grad f|` and `(T, N)` positively oriented, so the
/// levels of `x^2 + y^2` have curvature `+1/R`.
pub fn kappa(j: &Jet2, grad_floor: f64) -> Result<f64> {
    let g = j.grad_norm();
    if !(g > grad_floor) {
        return Err(Error::NearCritical { x: f64::NAN, y: f64::NAN, grad_norm: g });
    }
    let [fx, fy] = j.grad;
    let [[fxx, fxy], [_, fyy]] = j.hess;
    Ok((fxx * fy * fy - 2.0 * fxy * fx * fy + fyy * fx * fx) / (g * g * g))
}

fn at(e: Error, p: Point2) -> Error {
    match e {
        Error::NearCritical { grad_norm, .. } => Error::NearCritical { x: p.x, y: p.y, grad_norm },
        e => e,
    }
}

pub fn curvature<F: ScalarField2 + ?Sized>(field: &F, p: Point2) -> Result<f64> {
    kappa(&field.jet(p)?, GRAD_FLOOR).map_err(|e| at(e, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: Point2,
    pub kappa: f64,
    pub grad_norm: f64,
}

pub fn curvature_sample<F: ScalarField2 + ?Sized>(field: &F, p: Point2) -> Result<CurvatureSample> {
    let j = field.jet(p)?;
    let k = kappa(&j, GRAD_FLOOR).map_err(|e| at(e, p))?;
    Ok(CurvatureSample { point: p, kappa: k, grad_norm: j.grad_norm() })
}

/// `|div(grad f / |grad f|) - kappa|` at `p`, with the divergence expanded term by term.
pub fn divergence_identity_residual<F: ScalarField2 + ?Sized>(field: &F, p: Point2) -> Result<f64> {
    let j = field.jet(p)?;
    let k = kappa(&j, GRAD_FLOOR).map_err(|e| at(e, p))?;
    let g = j.grad_norm();
    // d_i (f_i / g) = f_ii / g - f_i (sum_k f_k f_ki) / g^3
    let mut div = 0.0;
    for i in 0..2 {
        let hg: f64 = (0..2).map(|k| j.grad[k] * j.hess[k][i]).sum();
        div += j.hess[i][i] / g - j.grad[i] * hg / (g * g * g);
    }
    Ok((div - k).abs())
}

/// Curvature of the level curve of `|f|` through `z`, from `f`, `f'`, `f''` alone.
pub fn complex_curvature(expr: &FieldExpr, z: Complex64) -> Result<f64> {
    let j = expr.eval_complex_jet(z)?;
    let (m, mp) = (j.f.norm(), j.fprime.norm());
    if m == 0.0 {
        return Err(Error::Domain(format!("f vanishes at {z}")));
    }
    if mp == 0.0 {
        return Err(Error::Domain(format!("f' vanishes at {z}")));
    }
    // <grad|f|, grad|f'|> = Re(f f'' conj(f')^2) / (|f| |f'|)
    let inner = (j.f * j.fsecond * j.fprime.conj() * j.fprime.conj()).re / (m * mp);
    Ok(mp / m - inner / (mp * mp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Min,
    Max,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Point2,
    pub value: f64,
    pub kind: CriticalKind,
    pub hess_det: f64,
    /// Smallest degree at which the generalized Morse condition was confirmed.
    pub gm_degree: Option<u32>,
}

/// Result of a critical point search; seeds whose Newton iteration failed are kept.
#[derive(Debug, Clone, Default)]
pub struct CriticalSearch {
    pub points: Vec<CriticalPoint>,
    pub failed_seeds: Vec<Point2>,
}

pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;

pub fn classify(hess: [[f64; 2]; 2]) -> (CriticalKind, f64) {
    let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    let frob2: f64 = hess.iter().flatten().map(|v| v * v).sum();
    let kind = if frob2 == 0.0 || det.abs() <= 1e-8 * frob2 {
        CriticalKind::Degenerate
    } else if det < 0.0 {
        CriticalKind::Saddle
    } else if hess[0][0] + hess[1][1] > 0.0 {
        CriticalKind::Min
    } else {
        CriticalKind::Max
    };
    (kind, det)
}

/// Solve `H x = g` for symmetric `H`, discarding near-null eigendirections.
fn pinv_solve(h: [[f64; 2]; 2], g: [f64; 2]) -> [f64; 2] {
    let (a, b, d) = (h[0][0], h[0][1], h[1][1]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let lams = [mean + rad, mean - rad];
    let lmax = lams[0].abs().max(lams[1].abs());
    if lmax == 0.0 {
        return [0.0, 0.0];
    }
    // eigenvector of the first eigenvalue
    let (vx, vy) = if b.abs() > 1e-300 {
        (lams[0] - d, b)
    } else if a >= d {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let n = vx.hypot(vy);
    let v1 = [vx / n, vy / n];
    let v2 = [-v1[1], v1[0]];
    let mut x = [0.0; 2];
    for (lam, v) in lams.iter().zip([v1, v2]) {
        if lam.abs() > 1e-12 * lmax {
            let c = (v[0] * g[0] + v[1] * g[1]) / lam;
            x[0] += c * v[0];
            x[1] += c * v[1];
        }
    }
    x
}

fn newton<F: ScalarField2 + ?Sized>(field: &F, seed: Point2, window: &Rect, gscale: f64) -> Option<(Point2, Jet2)> {
    let slack = 0.05 * window.diameter();
    let mut p = seed;
    for _ in 0..NEWTON_MAX_ITER {
        let j = field.jet(p).ok()?;
        if j.grad_norm() <= NEWTON_TOL * gscale.max(1.0) {
            return Some((p, j));
        }
        let s = pinv_solve(j.hess, j.grad);
        let step = Point2::new(s[0], s[1]);
        p = p - step;
        if !p.x.is_finite()
            || p.x < window.x0 - slack
            || p.x > window.x1 + slack
            || p.y < window.y0 - slack
            || p.y > window.y1 + slack
        {
            return None;
        }
        if step.norm() <= NEWTON_TOL * (1.0 + p.norm()) {
            let j = field.jet(p).ok()?;
            return (j.grad_norm() <= 1e-8 * gscale.max(1.0)).then_some((p, j));
        }
    }
    let j = field.jet(p).ok()?;
    (j.grad_norm() <= 1e-8 * gscale.max(1.0)).then_some((p, j))
}

/// Locate and classify the critical points of `field` in `window`.
///
/// Seeds are grid nodes where `|grad f|^2` is a local minimum among the 8 neighbours;
/// each seed is refined by Newton's method. Results within `2 * diameter / grid_n` of one
/// another are merged and the list is sorted lexicographically by location.
pub fn find_critical_points<F: ScalarField2 + ?Sized>(
    field: &F,
    window: &Rect,
    grid_n: usize,
) -> Result<CriticalSearch> {
    if grid_n < 16 {
        return Err(Error::Config("grid_n must be at least 16".into()));
    }
    let n = grid_n;
    let (hx, hy) = (window.width() / n as f64, window.height() / n as f64);
    let node = |i: usize, k: usize| Point2::new(window.x0 + i as f64 * hx, window.y0 + k as f64 * hy);
    let g2: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|k| {
            (0..=n)
                .map(|i| field.jet(node(i, k)).map(|j| j.grad_norm().powi(2)).unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    let gscale = g2.iter().flatten().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(*v)).sqrt();

    let mut seeds = Vec::new();
    for k in 0..=n {
        for i in 0..=n {
            let v = g2[k][i];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            let mut strict = false;
            for dk in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dk == 0 {
                        continue;
                    }
                    let (ii, kk) = (i as i64 + di, k as i64 + dk);
                    if ii < 0 || kk < 0 || ii > n as i64 || kk > n as i64 {
                        continue;
                    }
                    let w = g2[kk as usize][ii as usize];
                    if w.is_finite() {
                        if w < v {
                            is_min = false;
                        } else if w > v {
                            strict = true;
                        }
                    }
                }
            }
            if is_min && strict {
                seeds.push(node(i, k));
            }
        }
    }

    let results: Vec<_> = seeds.par_iter().map(|&s| (s, newton(field, s, window, gscale))).collect();
    let mut found = Vec::new();
    let mut failed_seeds = Vec::new();
    for (s, r) in results {
        match r {
            Some((p, j)) if window.contains(p) => found.push((p, j)),
            Some(_) => {}
            None => failed_seeds.push(s),
        }
    }
    found.sort_by(|a, b| a.0.x.total_cmp(&b.0.x).then(a.0.y.total_cmp(&b.0.y)));
    let radius = 2.0 * window.diameter() / n as f64;
    let mut kept: Vec<(Point2, Jet2)> = Vec::new();
    for (p, j) in found {
        if kept.iter().all(|(q, _)| q.dist(p) > radius) {
            kept.push((p, j));
        }
    }
    let points = kept
        .into_iter()
        .map(|(p, j)| {
            let (kind, hess_det) = classify(j.hess);
            let gm_degree = if kind == CriticalKind::Degenerate {
                (3..=6).find(|&d| {
                    let cp = CriticalPoint { location: p, value: j.value, kind, hess_det, gm_degree: None };
                    generalized_morse_check(field, &cp, d).map(|r| r.passes).unwrap_or(false)
                })
            } else {
                Some(2)
            };
            CriticalPoint { location: p, value: j.value, kind, hess_det, gm_degree }
        })
        .collect();
    Ok(CriticalSearch { points, failed_seeds })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseCheck {
    pub passes: bool,
    /// Minimum of `|grad p|^2` on the unit circle.
    pub m: f64,
    /// Maximum of `|grad p|^2` on the unit circle.
    pub max: f64,
}

pub const MORSE_SAMPLES: usize = 1024;

/// Test whether the degree-`n` homogeneous Taylor part `p` of `f` at `cp` has its only
/// critical point at the origin.
///
/// `grad p(u)` is recovered as the scaling limit `grad f(c + s u) / s^(n-1)`, with one
/// Richardson step in `s`.
pub fn generalized_morse_check<F: ScalarField2 + ?Sized>(
    field: &F,
    cp: &CriticalPoint,
    n: u32,
) -> Result<MorseCheck> {
    if n < 2 {
        return Err(Error::Precondition("degree must be at least 2".into()));
    }
    let s = if n == 2 { 1e-3 } else { 2e-2 };
    let c = cp.location;
    let scaled = |u: Point2, s: f64| -> Result<Point2> {
        let j = field.jet(c + u * s)?;
        Ok(j.gradient() * s.powi(1 - n as i32))
    };
    let rows: Vec<Result<(Point2, Point2)>> = (0..MORSE_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / MORSE_SAMPLES as f64;
            let u = Point2::new(th.cos(), th.sin());
            Ok((scaled(u, s)?, scaled(u, 0.5 * s)?))
        })
        .collect();
    let mut m = f64::INFINITY;
    let mut max = 0.0f64;
    let mut gmax = 0.0f64;
    let mut dmax = 0.0f64;
    for r in rows {
        let (g1, g2) = r?;
        gmax = gmax.max(g1.norm()).max(g2.norm());
        dmax = dmax.max((g2 - g1).norm());
        let est = g2 * 2.0 - g1;
        m = m.min(est.norm_sq());
        max = max.max(est.norm_sq());
    }
    if dmax > 0.25 * gmax {
        return Err(Error::DegreeMismatch { degree: n });
    }
    Ok(MorseCheck { passes: m > 1e-6 * max, m, max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldlang::{modulus_fields, parse, Kind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn f2(src: &str) -> Box<dyn ScalarField2> {
        parse(src, Kind::Real2d).unwrap().to_field2().unwrap()
    }

    fn fd_jet(f: &dyn ScalarField2, p: Point2, h: f64) -> Jet2 {
        let v = |dx: f64, dy: f64| f.value(Point2::new(p.x + dx, p.y + dy)).unwrap();
        let mut j = Jet2::constant(v(0.0, 0.0));
        j.grad = [(v(h, 0.0) - v(-h, 0.0)) / (2.0 * h), (v(0.0, h) - v(0.0, -h)) / (2.0 * h)];
        let fxx = (v(h, 0.0) - 2.0 * v(0.0, 0.0) + v(-h, 0.0)) / (h * h);
        let fyy = (v(0.0, h) - 2.0 * v(0.0, 0.0) + v(0.0, -h)) / (h * h);
        let fxy = (v(h, h) - v(h, -h) - v(-h, h) + v(-h, -h)) / (4.0 * h * h);
        j.hess = [[fxx, fxy], [fxy, fyy]];
        j
    }

    #[test]
    fn circle_and_line_curvature() {
        let f = f2("x^2+y^2");
        assert_relative_eq!(curvature(&f, Point2::new(2.0, 0.0)).unwrap(), 0.5, max_relative = 1e-15);
        let f = f2("y");
        assert_eq!(curvature(&f, Point2::new(0.3, -2.0)).unwrap(), 0.0);
    }

    #[test]
    fn saddle_curvature_matches_polar_form() {
        let f = f2("x^2-y^2");
        assert_relative_eq!(curvature(&f, Point2::new(1.0, 0.0)).unwrap(), -1.0, max_relative = 1e-15);
        for &(r, th) in &[(0.5, 0.3), (2.0, 1.1), (1.3, -2.4)] {
            let p = Point2::new(r * f64::cos(th), r * f64::sin(th));
            let expect = -(2.0 * th).cos() / r;
            assert_relative_eq!(curvature(&f, p).unwrap(), expect, max_relative = 1e-12);
            // jet oracle: same formula fed with finite-difference derivatives
            let jfd = fd_jet(&*f, p, 1e-4);
            assert_relative_eq!(kappa(&jfd, GRAD_FLOOR).unwrap(), expect, max_relative = 1e-5);
        }
    }

    #[test]
    fn curvature_refused_at_critical_point() {
        let f = f2("x^2-y^2");
        assert!(matches!(curvature(&f, Point2::new(0.0, 0.0)), Err(Error::NearCritical { .. })));
    }

    #[test]
    fn jet_matches_finite_differences_for_cubic() {
        let f = f2("x^3-3*x*y^2");
        let p = Point2::new(1.0, 1.0);
        let j = f.jet(p).unwrap();
        assert_eq!(j.value, -2.0);
        assert_eq!(j.grad, [0.0, -6.0]);
        assert_eq!(j.hess, [[6.0, -6.0], [-6.0, -6.0]]);
        let jfd = fd_jet(&*f, p, 1e-5);
        for i in 0..2 {
            assert!((j.grad[i] - jfd.grad[i]).abs() < 1e-6);
            for k in 0..2 {
                assert!((j.hess[i][k] - jfd.hess[i][k]).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn divergence_residuals() {
        let r = divergence_identity_residual(&f2("x^2+y^2"), Point2::new(1.0, 1.0)).unwrap();
        assert!(r <= 1e-10);
        let r = divergence_identity_residual(&f2("x^2-y^2"), Point2::new(2.0, 1.0)).unwrap();
        assert!(r <= 1e-10);
        let r = divergence_identity_residual(&f2("x^3-3*x*y^2+x"), Point2::new(0.3, 0.7)).unwrap();
        assert!(r <= 1e-8);
    }

    #[test]
    fn complex_curvature_examples() {
        let z = parse("z", Kind::Complex).unwrap();
        let k = complex_curvature(&z, Complex64::from_polar(2.0, 0.7)).unwrap();
        assert_relative_eq!(k, 0.5, max_relative = 1e-14);
        let z2 = parse("z^2", Kind::Complex).unwrap();
        assert_relative_eq!(complex_curvature(&z2, Complex64::new(1.0, 0.0)).unwrap(), 1.0, max_relative = 1e-14);
        let e = parse("z^2-1", Kind::Complex).unwrap();
        let (_, sq) = modulus_fields(&e).unwrap();
        let p = Point2::new(0.5, 0.5);
        let k1 = complex_curvature(&e, Complex64::new(p.x, p.y)).unwrap();
        let k2 = curvature(&sq, p).unwrap();
        assert!((k1 - k2).abs() <= 1e-8 * k2.abs().max(1.0));
        assert!(complex_curvature(&e, Complex64::new(1.0, 0.0)).is_err());
        assert!(complex_curvature(&e, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn critical_points_of_saddle_and_bowl() {
        let w = Rect::centered(1.0);
        let s = find_critical_points(&f2("x^2-y^2"), &w, 32).unwrap();
        assert_eq!(s.points.len(), 1);
        let cp = s.points[0];
        assert!(cp.location.norm() < 1e-12);
        assert_eq!(cp.kind, CriticalKind::Saddle);
        assert_relative_eq!(cp.hess_det, -4.0);
        let s = find_critical_points(&f2("x^2+y^2"), &w, 32).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].kind, CriticalKind::Min);
        let s = find_critical_points(&f2("-(x^2+y^2)"), &w, 32).unwrap();
        assert_eq!(s.points[0].kind, CriticalKind::Max);
    }

    #[test]
    fn critical_points_of_lemniscate_field() {
        let e = parse("z^2-1", Kind::Complex).unwrap();
        let (_, sq) = modulus_fields(&e).unwrap();
        let s = find_critical_points(&sq, &Rect::centered(2.0), 64).unwrap();
        let kinds: Vec<_> = s.points.iter().map(|c| (c.kind, c.location)).collect();
        assert_eq!(kinds.len(), 3, "{kinds:?}");
        assert_eq!(kinds[0].0, CriticalKind::Min);
        assert!(kinds[0].1.dist(Point2::new(-1.0, 0.0)) < 1e-10);
        assert_eq!(kinds[1].0, CriticalKind::Saddle);
        assert!(kinds[1].1.norm() < 1e-10);
        assert_eq!(kinds[2].0, CriticalKind::Min);
        assert!(kinds[2].1.dist(Point2::new(1.0, 0.0)) < 1e-10);
    }

    #[test]
    fn morse_checks() {
        let origin = |f: &dyn ScalarField2| {
            let j = f.jet(Point2::default()).unwrap();
            let (kind, hess_det) = classify(j.hess);
            CriticalPoint { location: Point2::default(), value: j.value, kind, hess_det, gm_degree: None }
        };
        let f = f2("x^2-y^2");
        let r = generalized_morse_check(&f, &origin(&*f), 2).unwrap();
        assert!(r.passes);
        assert_relative_eq!(r.m, 4.0, max_relative = 1e-9);

        let f = f2("x^2*y");
        let r = generalized_morse_check(&f, &origin(&*f), 3).unwrap();
        assert!(!r.passes);
        assert!(matches!(generalized_morse_check(&f, &origin(&*f), 4), Err(Error::DegreeMismatch { degree: 4 })));

        let e = parse("z^2-1", Kind::Complex).unwrap();
        let (_, sq) = modulus_fields(&e).unwrap();
        let r = generalized_morse_check(&sq, &origin(&sq), 2).unwrap();
        // homogeneous part -2(x^2 - y^2): |grad p|^2 = 16 on the unit circle
        assert!(r.passes);
        assert_relative_eq!(r.m, 16.0, max_relative = 1e-6);
        assert_relative_eq!(r.max, 16.0, max_relative = 1e-6);
    }

    #[test]
    fn cusp_field_is_degenerate_without_degree() {
        // y^3 - x^6: its level through the origin does not cross itself
        let f = f2("y^3-x^6");
        let s = find_critical_points(&f, &Rect::centered(1.0), 32).unwrap();
        assert!(s.points.iter().all(|c| c.kind == CriticalKind::Degenerate && c.gm_degree.is_none()));
    }

    proptest! {
        #[test]
        fn curvature_agrees_with_divergence(x in -2.0f64..2.0, y in -2.0f64..2.0, which in 0usize..5) {
            let srcs = ["x^2+y^2", "x^2-y^2", "x^3-3*x*y^2+x", "2*x^2+y^2", "sin(x)+cos(y)+x*y"];
            let f = f2(srcs[which]);
            let p = Point2::new(x, y);
            let j = f.jet(p).unwrap();
            prop_assume!(j.grad_norm() > 1e-3);
            let r = divergence_identity_residual(&f, p).unwrap();
            let k = curvature(&f, p).unwrap();
            prop_assert!(r < 1e-8 * (1.0 + k.abs()));
        }

        #[test]
        fn complex_curvature_agrees_with_modulus_field(x in -2.0f64..2.0, y in -2.0f64..2.0, which in 0usize..3) {
            let srcs = ["z^2-1", "z^3-1", "z^3+2*z-i"];
            let e = parse(srcs[which], Kind::Complex).unwrap();
            let (_, sq) = modulus_fields(&e).unwrap();
            let p = Point2::new(x, y);
            prop_assume!(sq.jet(p).unwrap().grad_norm() > 1e-3);
            let k1 = complex_curvature(&e, Complex64::new(x, y)).unwrap();
            let k2 = curvature(&sq, p).unwrap();
            prop_assert!((k1 - k2).abs() <= 1e-8 * k2.abs().max(1.0));
        }

        #[test]
        fn modulus_gradient_law(x in -2.0f64..2.0, y in -2.0f64..2.0, which in 0usize..3) {
            let srcs = ["z^2-1", "z^3-1", "exp(z)*z+1"];
            let e = parse(srcs[which], Kind::Complex).unwrap();
            let (_, sq) = modulus_fields(&e).unwrap();
            let cj = e.eval_complex_jet(Complex64::new(x, y)).unwrap();
            let expect = 2.0 * (cj.f * cj.fprime).norm();
            let got = sq.jet(Point2::new(x, y)).unwrap().grad_norm();
            prop_assert!((got - expect).abs() <= 1e-10 * expect.max(1e-300));
        }
    }
}
