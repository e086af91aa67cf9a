//! Verification harness: each integral identity is measured by two independent numerical
//! pipelines (region quadrature against level-curve measurement) and reported.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coarea::{
    critical_values_in, improper_integral, t_integral, BandRegion, QuadratureConfig, Region, Weight,
};
use crate::contour::{curve_length, extract_from_grid, LevelSet, NodeGrid};
use crate::error::{Error, Result};
use crate::field::{complex_curvature, find_critical_points, kappa, ScalarField2, GRAD_FLOOR};
use crate::fieldlang::{modulus_fields, FieldExpr, Jet2};
use crate::geom::{pairwise_sum, Point2, Polyline, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CheckKind {
    /// `|lhs - rhs| <= tolerance * scale`
    Equality,
    /// `lhs < rhs` with `rhs - lhs > margin`
    StrictLess,
}

/// One measured comparison inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    /// For equalities `|lhs - rhs|`; for strict inequalities the slack `rhs - lhs`.
    pub abs_err: f64,
    /// `abs_err` divided by the comparison scale.
    pub rel_err: f64,
    /// Relative tolerance for equalities, relative margin for inequalities.
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Equality relative to `max(|rhs|, scale)`.
    pub fn equal(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64, scale: f64) -> Self {
        let abs_err = (lhs - rhs).abs();
        let denom = rhs.abs().max(scale);
        let rel_err = if denom > 0.0 { abs_err / denom } else { abs_err };
        Self { name: name.into(), kind: CheckKind::Equality, lhs, rhs, abs_err, rel_err, tolerance, pass: rel_err <= tolerance }
    }

    /// `lhs < rhs` with slack above `margin * |rhs|`.
    pub fn less(name: impl Into<String>, lhs: f64, rhs: f64, margin: f64) -> Self {
        let slack = rhs - lhs;
        let rel = slack / rhs.abs().max(f64::MIN_POSITIVE);
        Self { name: name.into(), kind: CheckKind::StrictLess, lhs, rhs, abs_err: slack, rel_err: rel, tolerance: margin, pass: rel > margin }
    }

    fn badness(&self) -> f64 {
        match self.kind {
            CheckKind::Equality => self.rel_err / self.tolerance.max(f64::MIN_POSITIVE),
            CheckKind::StrictLess => self.tolerance / self.rel_err.max(f64::MIN_POSITIVE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity_id: String,
    /// Values of the worst check.
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    /// All checks pass.
    pub pass: bool,
    pub resolution: QuadratureConfig,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(identity_id: &str, resolution: QuadratureConfig, checks: Vec<Check>, notes: Vec<String>) -> Self {
        let worst = checks
            .iter()
            .max_by(|a, b| a.badness().total_cmp(&b.badness()))
            .cloned()
            .unwrap_or_else(|| Check::equal("empty", 0.0, 0.0, 0.0, 1.0));
        Self {
            identity_id: identity_id.into(),
            lhs: worst.lhs,
            rhs: worst.rhs,
            abs_err: worst.abs_err,
            rel_err: worst.rel_err,
            tolerance: worst.tolerance,
            pass: checks.iter().all(|c| c.pass),
            resolution,
            notes,
            checks,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Default relative tolerances (or margins) per identity.
pub fn default_tolerance(identity_id: &str) -> f64 {
    match identity_id {
        "coarea" | "main_a" | "area_perimeter" | "circle_characterization" => 1e-3,
        "complex_lower_bound" | "minmax_estimate" | "saddle_symmetry" => 1e-3,
        "csf_length_law" | "coarea3d" | "area_derivative" => 2e-2,
        "parallel_offset" => 1e-4,
        "parallel_offset_ellipse" | "csf_circle" => 1e-3,
        _ => 1e-2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub cfg: QuadratureConfig,
    /// Overrides of [`default_tolerance`].
    pub tolerances: BTreeMap<String, f64>,
    /// Number of level values sampled by derivative and pointwise checks.
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { cfg: QuadratureConfig::default(), tolerances: BTreeMap::new(), samples: 16 }
    }
}

impl VerifyOptions {
    pub fn tol(&self, id: &str) -> f64 {
        self.tolerances.get(id).copied().unwrap_or_else(|| default_tolerance(id))
    }
}

/// Level sets of one field from a shared sample grid.
pub struct Levels<'a> {
    pub field: &'a dyn ScalarField2,
    pub grid: NodeGrid,
}

impl<'a> Levels<'a> {
    pub fn new(field: &'a dyn ScalarField2, window: &Rect, grid_n: usize) -> Result<Self> {
        Ok(Self { field, grid: NodeGrid::sample(field, window, grid_n)? })
    }

    pub fn level(&self, t: f64) -> Result<LevelSet> {
        let ls = extract_from_grid(self.field, t, &self.grid)?;
        if !ls.is_compact() {
            return Err(Error::NonCompactLevel { t });
        }
        Ok(ls)
    }

    pub fn length(&self, t: f64) -> Result<f64> {
        Ok(curve_length(&self.level(t)?))
    }

    /// `\int_{f = t} w ds` by the trapezoid rule on every component.
    pub fn line_integral(&self, t: f64, w: &(dyn Fn(Point2) -> Result<f64> + Sync)) -> Result<f64> {
        let ls = self.level(t)?;
        let mut parts = Vec::new();
        for c in &ls.components {
            let v = &c.polyline.vertices;
            let vals: Vec<f64> = v.iter().map(|&p| w(p)).collect::<Result<_>>()?;
            let n = v.len();
            let terms: Vec<f64> = (0..n).map(|i| 0.5 * (vals[i] + vals[(i + 1) % n]) * v[i].dist(v[(i + 1) % n])).collect();
            parts.push(pairwise_sum(&terms));
        }
        Ok(pairwise_sum(&parts))
    }
}

fn kappa_weight(_: Point2, j: &Jet2) -> f64 {
    kappa(j, GRAD_FLOOR).unwrap_or(f64::NAN)
}

/// Midpoints of `samples` equal subintervals of `[a, b]`.
pub fn sample_levels(a: f64, b: f64, samples: usize) -> Vec<f64> {
    (0..samples).map(|k| a + (k as f64 + 0.5) * (b - a) / samples as f64).collect()
}

fn crosses(lo: f64, hi: f64, crit: &[f64]) -> bool {
    crit.iter().any(|&c| c >= lo && c <= hi)
}

/// Central difference of `L` at `t` with step `dt`, one-sided when a critical value is near.
fn length_derivative(levels: &Levels<'_>, t: f64, dt: f64, crit: &[f64]) -> Result<f64> {
    if !crosses(t - dt, t + dt, crit) {
        Ok((levels.length(t + dt)? - levels.length(t - dt)?) / (2.0 * dt))
    } else if !crosses(t, t + dt, crit) {
        Ok((levels.length(t + dt)? - levels.length(t)?) / dt)
    } else {
        Ok((levels.length(t)? - levels.length(t - dt)?) / dt)
    }
}

/// Coarea formula: region integral against sliced integral for `g` in `{1, |grad f|, f}`.
pub fn verify_coarea(band: &BandRegion<'_>, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol("coarea");
    let weights: [(&str, &Weight<'_>); 3] =
        [("g=1", &|_, _| 1.0), ("g=|grad f|", &|_, j: &Jet2| j.grad_norm()), ("g=f", &|_, j: &Jet2| j.value)];
    let mut checks = Vec::new();
    for (name, g) in weights {
        let region = crate::coarea::region_integral(band, g, &opts.cfg)?;
        let sliced = crate::coarea::sliced_integral(band, g, &opts.cfg)?;
        checks.push(Check::equal(name, region.value, sliced, tol, 1e-3 * region.abs_value));
    }
    Ok(VerificationReport::new("coarea", opts.cfg.clone(), checks, Vec::new()))
}

/// `\iint (h o f) |grad f| = \int h L`, plus `d/dt \iint_{[a,t]} |grad f| = L(t)` at sampled `t`.
pub fn verify_main_a(
    band: &BandRegion<'_>,
    h: &(dyn Fn(f64) -> f64 + Sync),
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let tol = opts.tol("main_a");
    let cfg = &opts.cfg;
    let levels = Levels::new(band.field, &band.window, cfg.grid_n)?;
    let crit = critical_values_in(band);
    let lhs = band.region().integrate_on(&levels.grid, &|_, j| h(j.value) * j.grad_norm(), cfg.subdivision_depth)?;
    let rhs = t_integral(band.a, band.b, &crit, cfg.t_subdivisions, |t| Ok(h(t) * levels.length(t)?))?;
    let mut checks = vec![Check::equal("weighted", lhs.value, rhs, tol, 1e-3 * lhs.abs_value)];
    let dt = (band.b - band.a) / 512.0;
    for t in sample_levels(band.a, band.b, opts.samples) {
        let (lo, hi) = if crosses(t - dt, t + dt, &crit) { (t, t + dt) } else { (t - dt, t + dt) };
        let flux = Region::band(band.field, lo, hi, band.window).integrate_on(&levels.grid, &|_, j| j.grad_norm(), cfg.subdivision_depth)?;
        checks.push(Check::equal(format!("derivative@{t}"), flux.value / (hi - lo), levels.length(t)?, tol, 0.0));
    }
    Ok(VerificationReport::new("main_a", cfg.clone(), checks, Vec::new()))
}

fn singular_points(band: &BandRegion<'_>) -> Vec<Point2> {
    band.interior_critical_points().iter().map(|c| c.location).collect()
}

/// `L(b) = L(a) + \iint \kappa` (improper across critical points) and
/// `L'(t) = \int \kappa / |grad f| ds` at sampled regular `t`.
pub fn verify_main_b(band: &BandRegion<'_>, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol("main_b");
    let cfg = &opts.cfg;
    let levels = Levels::new(band.field, &band.window, cfg.grid_n)?;
    let crit = critical_values_in(band);
    let sing = singular_points(band);
    let mut notes = Vec::new();
    let imp = improper_integral(&band.region(), &kappa_weight, &sing, &cfg.excision_radii, cfg.grid_n, cfg.subdivision_depth)?;
    if !sing.is_empty() {
        notes.push(format!(
            "excised {} critical point(s); slope {:.6e}, relative fit residual {:.3e}",
            sing.len(),
            imp.slope,
            imp.rel_fit_residual
        ));
    }
    let diff = levels.length(band.b)? - levels.length(band.a)?;
    let mut checks = vec![Check::equal("difference", diff, imp.value, tol, 1e-3 * imp.abs_value)];
    let slice = |t: f64| crate::coarea::slice_on_grid(band.field, &levels.grid, t, &kappa_weight, &crit);
    let integrated = t_integral(band.a, band.b, &crit, cfg.t_subdivisions, slice)?;
    checks.push(Check::equal("derivative_integrated", integrated, diff, 2.0 * tol, 1e-3 * imp.abs_value));
    let dt = (band.b - band.a) / 512.0;
    for t in sample_levels(band.a, band.b, opts.samples) {
        if crit.iter().any(|&c| (c - t).abs() < 1e-9 * (1.0 + t.abs())) {
            continue;
        }
        let fd = length_derivative(&levels, t, dt, &crit)?;
        checks.push(Check::equal(format!("derivative@{t}"), fd, slice(t)?, tol, 0.0));
    }
    Ok(VerificationReport::new("main_b", cfg.clone(), checks, notes))
}

/// Length of a closed level component against `sigma * \iint_R \kappa` over the region it
/// bounds. The component is chosen as the one enclosing the largest area when `component`
/// is `None`.
pub fn verify_jordan_boundary(
    field: &dyn ScalarField2,
    t: f64,
    component: Option<usize>,
    window: &Rect,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let tol = opts.tol("jordan_boundary");
    let cfg = &opts.cfg;
    let levels = Levels::new(field, window, cfg.grid_n)?;
    let ls = crate::contour::extract_from_grid(field, t, &levels.grid)?;
    let idx = match component {
        Some(i) => i,
        None => (0..ls.components.len())
            .max_by(|&i, &j| ls.components[i].polyline.area().total_cmp(&ls.components[j].polyline.area()))
            .ok_or_else(|| Error::NotJordan(format!("level {t} is empty")))?,
    };
    let comp = ls.components.get(idx).ok_or_else(|| Error::NotJordan(format!("no component {idx}")))?;
    if !comp.polyline.closed {
        return Err(Error::NotJordan("component is not closed".into()));
    }
    if !comp.polyline.is_simple() {
        return Err(Error::NotJordan("component self-intersects".into()));
    }
    let sigma = comp.sigma.ok_or(Error::NotClosed)?;
    let region = Region::jordan_interior(field, &comp.polyline, t, sigma, *window)?;
    let crit = find_critical_points(field, window, 64)?;
    let inside: Vec<Point2> = crit.points.iter().map(|c| c.location).filter(|&p| comp.polyline.contains(p)).collect();
    let imp = improper_integral(&region, &kappa_weight, &inside, &cfg.excision_radii, cfg.grid_n, cfg.subdivision_depth)?;
    let length = crate::contour::component_length(comp);
    let notes = vec![format!("sigma {sigma}; {} interior critical point(s)", inside.len())];
    let checks = vec![Check::equal("length", length, sigma as f64 * imp.value, tol, 1e-3 * imp.abs_value)];
    Ok(VerificationReport::new("jordan_boundary", cfg.clone(), checks, notes))
}

/// `min L < (1/(b-a)) \iint |grad f| < max L` over the band.
pub fn verify_minmax_estimate(band: &BandRegion<'_>, opts: &VerifyOptions) -> Result<VerificationReport> {
    let margin = opts.tol("minmax_estimate");
    let cfg = &opts.cfg;
    let levels = Levels::new(band.field, &band.window, cfg.grid_n)?;
    let flux = band.region().integrate_on(&levels.grid, &|_, j| j.grad_norm(), cfg.subdivision_depth)?;
    let mean = flux.value / (band.b - band.a);
    let n = cfg.t_subdivisions.max(2);
    let ts: Vec<f64> = (0..=n).map(|k| band.a + (band.b - band.a) * k as f64 / n as f64).collect();
    let lens: Vec<f64> = ts.iter().map(|&t| levels.length(t)).collect::<Result<_>>()?;
    let min = lens.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = lens.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![Check::less("min_below_mean", min, mean, margin), Check::less("mean_below_max", mean, max, margin)];
    Ok(VerificationReport::new("minmax_estimate", cfg.clone(), checks, Vec::new()))
}

struct ComplexSetup<'e> {
    expr: &'e FieldExpr,
    sq: crate::fieldlang::ModulusSquared,
}

impl ComplexSetup<'_> {
    fn jet(&self, p: Point2) -> Result<crate::fieldlang::ComplexJet> {
        self.expr.eval_complex_jet(Complex64::new(p.x, p.y))
    }
    fn fprime(&self, p: Point2) -> Result<f64> {
        Ok(self.jet(p)?.fprime.norm())
    }
}

/// For `D = {a <= |f| <= b}`: (a) area vs `\int \oint 1/|f'|`, (b) `\int L` vs `\iint |f'|`,
/// (c) `L(b) - L(a)` vs improper `\iint \kappa` with `\kappa` from `f, f', f''`.
///
/// Level curves are traced on `|f|^2`, which has the same levels and is smooth at zeros of `f`.
pub fn verify_complex(expr: &FieldExpr, a: f64, b: f64, window: &Rect, opts: &VerifyOptions) -> Result<VerificationReport> {
    if !(a < b) {
        return Err(Error::Config("band must satisfy a<b".into()));
    }
    if !(a > 0.0) {
        return Err(Error::Precondition("the band must exclude zeros of f (a > 0)".into()));
    }
    let tol = opts.tol("complex");
    let cfg = &opts.cfg;
    let (_, sq) = modulus_fields(expr)?;
    let s = ComplexSetup { expr, sq };
    let levels = Levels::new(&s.sq, window, cfg.grid_n)?;
    let band = BandRegion::with_critical_points(&s.sq, a * a, b * b, *window, find_critical_points(&s.sq, window, 64)?.points)?;
    // critical values of |f| are square roots of those of |f|^2
    let crit: Vec<f64> = critical_values_in(&band).iter().map(|v| v.sqrt()).collect();
    let region = band.region();
    let depth = cfg.subdivision_depth;

    let area = region.integrate_on(&levels.grid, &|_, _| 1.0, depth)?;
    let sliced_area = t_integral(a, b, &crit, cfg.t_subdivisions, |t| {
        levels.line_integral(t * t, &|p| Ok(1.0 / s.fprime(p)?))
    })?;
    let int_l = t_integral(a, b, &crit, cfg.t_subdivisions, |t| levels.length(t * t))?;
    let fprime_flux = region.integrate_on(&levels.grid, &|p, _| s.fprime(p).unwrap_or(f64::NAN), depth)?;

    let sing = singular_points(&band);
    let kappa_c = |p: Point2, _: &Jet2| complex_curvature(expr, Complex64::new(p.x, p.y)).unwrap_or(f64::NAN);
    let imp = improper_integral(&region, &kappa_c, &sing, &cfg.excision_radii, cfg.grid_n, depth)?;
    let diff = levels.length(b * b)? - levels.length(a * a)?;
    let checks = vec![
        Check::equal("area", area.value, sliced_area, tol, 0.0),
        Check::equal("length_integral", int_l, fprime_flux.value, tol, 0.0),
        Check::equal("curvature", diff, imp.value, tol, 1e-3 * imp.abs_value),
    ];
    let mut notes = vec![format!("|f| band [{a}, {b}]")];
    if !sing.is_empty() {
        notes.push(format!("excised {} zero(s) of f'; relative fit residual {:.3e}", sing.len(), imp.rel_fit_residual));
    }
    Ok(VerificationReport::new("complex", cfg.clone(), checks, notes))
}

/// `L(c) > (1/c) \iint_D |f'|` for the region `D` bounded by the level `|f| = c`.
pub fn verify_complex_lower_bound(expr: &FieldExpr, c: f64, window: &Rect, opts: &VerifyOptions) -> Result<VerificationReport> {
    if !(c > 0.0) {
        return Err(Error::Config("level must be positive".into()));
    }
    let margin = opts.tol("complex_lower_bound");
    let cfg = &opts.cfg;
    let (_, sq) = modulus_fields(expr)?;
    let levels = Levels::new(&sq, window, cfg.grid_n)?;
    let ls = levels.level(c * c)?;
    if ls.components.len() != 1 || !ls.components[0].polyline.is_simple() {
        return Err(Error::NotJordan(format!("level |f| = {c} is not a single simple closed curve")));
    }
    let comp = &ls.components[0];
    let mut notes = Vec::new();
    let sigma = comp.sigma.unwrap_or(1);
    // convexity of interior levels: every turning angle shares the orientation sign
    let mut nonconvex = Vec::new();
    for k in 1..=16 {
        let t = c * k as f64 / 16.0;
        let inner = levels.level(t * t)?;
        let convex = inner.components.len() == 1
            && inner.components[0].polyline.turning_angles().iter().all(|&th| th * sigma as f64 >= -1e-12);
        if !convex {
            nonconvex.push(t);
        }
    }
    if nonconvex.is_empty() {
        notes.push("all sampled interior levels are simple closed convex curves".into());
    } else {
        notes.push(format!(
            "convexity precondition fails on {} of 16 sampled interior levels (first at |f| = {}); inequality evaluated regardless",
            nonconvex.len(),
            nonconvex[0]
        ));
    }
    let region = Region::jordan_interior(&sq, &comp.polyline, c * c, sigma, *window)?;
    let flux = region.integrate_on(&levels.grid, &|p, _| {
        expr.eval_complex_jet(Complex64::new(p.x, p.y)).map(|j| j.fprime.norm()).unwrap_or(f64::NAN)
    }, cfg.subdivision_depth)?;
    let length = crate::contour::component_length(comp);
    let checks = vec![Check::less("lower_bound", flux.value / c, length, margin)];
    Ok(VerificationReport::new("complex_lower_bound", cfg.clone(), checks, notes))
}

/// For a band free of critical values: `\iint \kappa f_x = \iint \kappa f_y = 0` and
/// `\iint \kappa |grad f| = sigma 2 pi (b - a)`.
pub fn verify_prop42(band: &BandRegion<'_>, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol("prop42");
    let cfg = &opts.cfg;
    if !band.interior_critical_points().is_empty() {
        return Err(Error::Precondition("band contains critical values".into()));
    }
    let levels = Levels::new(band.field, &band.window, cfg.grid_n)?;
    let la = levels.level(band.a)?;
    let lb = levels.level(band.b)?;
    if la.components.len() != 1 || lb.components.len() != 1 {
        return Err(Error::Precondition("band is not an annulus between two connected levels".into()));
    }
    let sigma = la.components[0].sigma.ok_or(Error::NotClosed)? as f64;
    let region = band.region();
    let depth = cfg.subdivision_depth;
    let fx = region.integrate_on(&levels.grid, &|p, j| kappa_weight(p, j) * j.grad[0], depth)?;
    let fy = region.integrate_on(&levels.grid, &|p, j| kappa_weight(p, j) * j.grad[1], depth)?;
    let total = region.integrate_on(&levels.grid, &|p, j| kappa_weight(p, j) * j.grad_norm(), depth)?;
    let scale = total.abs_value;
    let checks = vec![
        Check::equal("kappa_fx", fx.value, 0.0, tol, scale),
        Check::equal("kappa_fy", fy.value, 0.0, tol, scale),
        Check::equal("kappa_grad", total.value, sigma * 2.0 * PI * (band.b - band.a), tol, 0.0),
    ];
    Ok(VerificationReport::new("prop42", cfg.clone(), checks, vec![format!("sigma {sigma}")]))
}

/// For a field whose gradient norm is constant on each level: `|grad (L o f)| = 2 pi` at
/// sampled points and `area = |L(b)^2 - L(a)^2| / 4 pi`.
pub fn verify_area_perimeter(band: &BandRegion<'_>, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol("area_perimeter");
    let cfg = &opts.cfg;
    let levels = Levels::new(band.field, &band.window, cfg.grid_n)?;
    let crit = critical_values_in(band);
    let dt = (band.b - band.a) / 512.0;
    let mut checks = Vec::new();
    for t in sample_levels(band.a, band.b, opts.samples.min(8)) {
        let ls = levels.level(t)?;
        let g: Vec<f64> = ls.components.iter().flat_map(|c| c.grad_norm.iter().copied()).collect();
        let gmin = g.iter().cloned().fold(f64::INFINITY, f64::min);
        let gmax = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(gmax - gmin <= 1e-6 * gmax) {
            return Err(Error::Precondition(format!(
                "|grad f| is not constant on the level {t} (ranges over [{gmin}, {gmax}])"
            )));
        }
    }
    for t in sample_levels(band.a, band.b, opts.samples) {
        let ls = levels.level(t)?;
        let c = &ls.components[0];
        let lp = length_derivative(&levels, t, dt, &crit)?;
        checks.push(Check::equal(format!("grad_L_of_f@{t}"), lp.abs() * c.grad_norm[0], 2.0 * PI, tol, 0.0));
    }
    let area = band.region().integrate_on(&levels.grid, &|_, _| 1.0, cfg.subdivision_depth)?;
    let (la, lb) = (levels.length(band.a)?, levels.length(band.b)?);
    checks.push(Check::equal("area", area.value, (lb * lb - la * la).abs() / (4.0 * PI), tol, 0.0));
    Ok(VerificationReport::new("area_perimeter", cfg.clone(), checks, Vec::new()))
}

/// Improper `\iint \kappa` over a disc centred at a critical point, against zero. Meant for
/// saddles whose curvature is odd under a symmetry of the disc; the check is absolute.
pub fn verify_saddle_symmetry(
    field: &dyn ScalarField2,
    center: Point2,
    radius: f64,
    window: &Rect,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let tol = opts.tol("saddle_symmetry");
    let cfg = &opts.cfg;
    let region = Region::whole(field, *window).with(crate::coarea::Constraint::InsideDisc { center, radius });
    let imp = improper_integral(&region, &kappa_weight, &[center], &cfg.excision_radii, cfg.grid_n, cfg.subdivision_depth)?;
    let checks = vec![Check::equal("curvature_integral", imp.value, 0.0, tol, 1.0)];
    let notes = vec![format!(
        "disc radius {radius}; slope {:.3e}; relative fit residual {:.3e}; integral of |kappa| {:.6}",
        imp.slope, imp.rel_fit_residual, imp.abs_value
    )];
    Ok(VerificationReport::new("saddle_symmetry", cfg.clone(), checks, notes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleCheck {
    /// Isoperimetric deficit `L^2 / (4 pi A) - 1`.
    pub deficit: f64,
    pub is_circle: bool,
}

/// Only a circle can be filled by a function with `|grad f|` constant on every level; the
/// test is whether the isoperimetric deficit vanishes.
pub fn circle_characterization(curve: &Polyline, tol: f64) -> Result<CircleCheck> {
    if !curve.closed {
        return Err(Error::NotClosed);
    }
    if !curve.is_simple() {
        return Err(Error::NotJordan("curve self-intersects".into()));
    }
    let l = curve.length();
    let deficit = l * l / (4.0 * PI * curve.area()) - 1.0;
    Ok(CircleCheck { deficit, is_circle: deficit <= tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldlang::{parse, Kind};

    fn f2(src: &str) -> Box<dyn ScalarField2> {
        parse(src, Kind::Real2d).unwrap().to_field2().unwrap()
    }

    fn quick() -> VerifyOptions {
        VerifyOptions {
            cfg: QuadratureConfig { grid_n: 128, t_subdivisions: 32, ..Default::default() },
            samples: 4,
            ..Default::default()
        }
    }

    #[test]
    fn check_arithmetic() {
        let c = Check::equal("x", 1.0, 1.001, 1e-2, 0.0);
        assert!(c.pass && (c.rel_err - 0.001 / 1.001).abs() < 1e-15);
        let c = Check::equal("zero", 1e-5, 0.0, 1e-2, 1.0);
        assert!(c.pass && c.rel_err == 1e-5);
        assert!(Check::less("lt", 1.0, 2.0, 1e-3).pass);
        assert!(!Check::less("lt", 2.0, 2.0, 1e-3).pass);
        assert!(!Check::less("lt", 1.9999, 2.0, 1e-3).pass);
    }

    #[test]
    fn report_mirrors_worst_check() {
        let r = VerificationReport::new(
            "demo",
            QuadratureConfig::default(),
            vec![Check::equal("good", 1.0, 1.0, 1e-3, 0.0), Check::equal("bad", 1.1, 1.0, 1e-3, 0.0)],
            vec![],
        );
        assert!(!r.pass);
        assert_eq!(r.lhs, 1.1);
        let json = r.to_json();
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn bowl_identities_at_low_resolution() {
        let f = f2("x^2+y^2");
        let band = BandRegion::new(&*f, 1.0, 4.0, Rect::centered(3.0)).unwrap();
        let opts = quick();
        for r in [
            verify_coarea(&band, &opts).unwrap(),
            verify_main_a(&band, &|_| 1.0, &opts).unwrap(),
            verify_main_b(&band, &opts).unwrap(),
            verify_minmax_estimate(&band, &opts).unwrap(),
            verify_prop42(&band, &opts).unwrap(),
            verify_area_perimeter(&band, &opts).unwrap(),
        ] {
            assert!(r.pass, "{}", r.to_json());
        }
    }

    #[test]
    fn area_perimeter_refuses_anisotropic_field() {
        let f = f2("2*x^2+y^2");
        let band = BandRegion::new(&*f, 1.0, 4.0, Rect::centered(3.0)).unwrap();
        assert!(matches!(verify_area_perimeter(&band, &quick()), Err(Error::Precondition(_))));
    }

    #[test]
    fn distance_field_area_perimeter() {
        let f = f2("sqrt(x^2+y^2)");
        let band = BandRegion::with_critical_points(&*f, 1.0, 2.0, Rect::centered(3.0), vec![]).unwrap();
        let r = verify_area_perimeter(&band, &quick()).unwrap();
        assert!(r.pass, "{}", r.to_json());
    }

    #[test]
    fn jordan_boundary_on_circle_and_inner_ring() {
        let r = verify_jordan_boundary(&*f2("x^2+y^2"), 4.0, None, &Rect::centered(3.0), &quick()).unwrap();
        assert!(r.pass, "{}", r.to_json());
        assert!((r.lhs - 4.0 * PI).abs() < 1e-3);
        let f = f2("(x^2+y^2-1)^2");
        let ls = crate::contour::extract_level(&*f, 0.25, &Rect::centered(2.0), 128).unwrap();
        let inner = (0..2).min_by(|&i, &j| ls.components[i].polyline.area().total_cmp(&ls.components[j].polyline.area())).unwrap();
        let r = verify_jordan_boundary(&*f, 0.25, Some(inner), &Rect::centered(2.0), &quick()).unwrap();
        assert!(r.pass, "{}", r.to_json());
        assert!(r.notes[0].starts_with("sigma -1"));
    }

    #[test]
    fn complex_identity_closed_forms() {
        let e = parse("z", Kind::Complex).unwrap();
        let r = verify_complex(&e, 1.0, 2.0, &Rect::centered(3.0), &quick()).unwrap();
        assert!(r.pass, "{}", r.to_json());
        assert!((r.check("area").unwrap().lhs - 3.0 * PI).abs() < 1e-3);
        let r = verify_complex_lower_bound(&e, 1.0, &Rect::centered(2.0), &quick()).unwrap();
        assert!(r.pass && (r.lhs - PI).abs() < 1e-3 && (r.rhs - 2.0 * PI).abs() < 1e-3, "{}", r.to_json());
        let e = parse("z^2", Kind::Complex).unwrap();
        let r = verify_complex_lower_bound(&e, 1.0, &Rect::centered(2.0), &quick()).unwrap();
        assert!(r.pass && (r.lhs - 4.0 * PI / 3.0).abs() < 1e-3, "{}", r.to_json());
    }

    #[test]
    fn circle_characterization_cases() {
        let c = circle_characterization(&Polyline::circle(Point2::default(), 1.0, 256), 1e-3).unwrap();
        assert!(c.is_circle && c.deficit >= 0.0 && c.deficit <= 1e-3);
        let sq = Polyline::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)],
            true,
        );
        let c = circle_characterization(&sq, 1e-3).unwrap();
        assert!((c.deficit - (4.0 / PI - 1.0)).abs() < 1e-12 && !c.is_circle);
        let e = circle_characterization(&Polyline::ellipse(Point2::default(), 2.0, 1.0, 4096), 1e-3).unwrap();
        assert!(e.deficit > 0.07);
        assert!(matches!(circle_characterization(&Polyline::new(sq.vertices.clone(), false), 1e-3), Err(Error::NotClosed)));
    }
}
