//! Curve evolutions on closed polylines: the parallel (normal offset) family and the
//! curve-shortening flow, with the measured `L(t)`, `A(t)` recorded in a trace.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::coarea::QuadratureConfig;
use crate::contour::discrete_curvature;
use crate::error::{Error, Result};
use crate::geom::{pairwise_sum, Point2, Polyline};
use crate::identities::{default_tolerance, Check, VerificationReport};

fn require_closed_simple(curve: &Polyline) -> Result<()> {
    if !curve.closed {
        return Err(Error::NotClosed);
    }
    if curve.len() < 3 {
        return Err(Error::Precondition("curve needs at least 3 vertices".into()));
    }
    if !curve.is_simple() {
        return Err(Error::SelfIntersection);
    }
    Ok(())
}

/// Move every vertex a distance `t` along the outward angle-bisector normal.
///
/// The outward side is read from the orientation of the input; vertex order is preserved.
pub fn parallel_offset(curve: &Polyline, t: f64) -> Result<Polyline> {
    if !(t >= 0.0) {
        return Err(Error::Precondition(format!("offset distance must be nonnegative, got {t}")));
    }
    require_closed_simple(curve)?;
    let v = &curve.vertices;
    let n = v.len();
    // outward is to the right of travel for a counterclockwise curve
    let out_sign = if curve.signed_area() > 0.0 { -1.0 } else { 1.0 };
    let edge_normal = |i: usize| (v[(i + 1) % n] - v[i]).normalized().perp() * out_sign;
    let vertices: Vec<Point2> = (0..n)
        .map(|i| {
            let bis = edge_normal((i + n - 1) % n) + edge_normal(i);
            v[i] + bis.normalized() * t
        })
        .collect();
    // an edge that flips direction marks a swallowtail even when no two edges cross
    let flipped = (0..n).any(|i| {
        let j = (i + 1) % n;
        (vertices[j] - vertices[i]).dot(v[j] - v[i]) <= 0.0
    });
    let out = Polyline::new(vertices, true);
    if flipped || !out.is_simple() {
        return Err(Error::SelfIntersection);
    }
    Ok(out)
}

/// Time step selection for [`csf_run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepSize {
    /// `0.4 h^2 / max |kappa|`, recomputed every step.
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for StepSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(StepSize::Auto);
        }
        match s.parse::<f64>() {
            Ok(dt) if dt > 0.0 => Ok(StepSize::Fixed(dt)),
            _ => Err(Error::Config(format!("bad step size '{s}': expected 'auto' or a positive number"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsfConfig {
    pub dt: StepSize,
    pub t_end: f64,
    /// Extinction is declared once the area drops below this fraction of `A(0)`.
    pub area_floor: f64,
    /// Keep every `k`-th curve (and the last one) in the trace.
    pub store_every: Option<usize>,
    pub max_steps: usize,
}

impl Default for CsfConfig {
    fn default() -> Self {
        Self { dt: StepSize::Auto, t_end: f64::INFINITY, area_floor: 1e-2, store_every: None, max_steps: 10_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredCurve {
    pub time: f64,
    pub curve: Polyline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub lengths: Vec<f64>,
    pub areas: Vec<f64>,
    /// Total signed turning of each recorded curve.
    pub turning: Vec<f64>,
    pub curves: Option<Vec<StoredCurve>>,
    /// Time at which the area fell below the floor, if it did.
    pub extinction_time: Option<f64>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, c: &Polyline) {
        self.times.push(t);
        self.lengths.push(c.length());
        self.areas.push(c.area());
        self.turning.push(c.turning_angles().iter().sum());
    }

    /// CSV with header `t,L,A`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,L,A")?;
        for i in 0..self.times.len() {
            writeln!(w, "{},{},{}", self.times[i], self.lengths[i], self.areas[i])?;
        }
        Ok(())
    }

    /// Stored curves in the contour CSV layout, one component id per stored curve. The
    /// `grad_norm` column is left empty since there is no underlying field.
    pub fn write_curves_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "component_id,x,y,kappa,grad_norm")?;
        for (id, s) in self.curves.iter().flatten().enumerate() {
            let k = discrete_curvature(&s.curve);
            for (p, kk) in s.curve.vertices.iter().zip(k) {
                writeln!(w, "{id},{},{},{kk},", p.x, p.y)?;
            }
        }
        Ok(())
    }
}

fn counterclockwise(curve: &Polyline) -> Polyline {
    if curve.signed_area() < 0.0 {
        curve.reversed()
    } else {
        curve.clone()
    }
}

/// Reject curves that are not strictly convex: every discrete turning angle must be positive
/// on the counterclockwise orientation.
fn require_convex(ccw: &Polyline) -> Result<()> {
    if ccw.turning_angles().iter().any(|&th| !(th > 0.0)) {
        return Err(Error::NonConvexInput);
    }
    Ok(())
}

/// Redistribute `n` vertices at equal arc length starting from vertex 0. Points between two
/// vertices are placed on the circular arc with the mean curvature of the endpoints, so a
/// convex curve is not shaved by its chords on every resampling.
pub fn resample_uniform(ccw: &Polyline, n: usize) -> Polyline {
    let v = &ccw.vertices;
    let m = v.len();
    let kappa = discrete_curvature(ccw);
    let seg: Vec<f64> = (0..m).map(|i| v[i].dist(v[(i + 1) % m])).collect();
    let total = pairwise_sum(&seg);
    let step = total / n as f64;
    let mut out = Vec::with_capacity(n);
    let (mut i, mut start) = (0usize, 0.0);
    for k in 0..n {
        let s = k as f64 * step;
        while i + 1 < m && start + seg[i] < s {
            start += seg[i];
            i += 1;
        }
        let (p, q, c) = (v[i], v[(i + 1) % m], seg[i]);
        let u = if c > 0.0 { ((s - start) / c).clamp(0.0, 1.0) } else { 0.0 };
        let kbar = 0.5 * (kappa[i] + kappa[(i + 1) % m]);
        let sag = 0.5 * kbar * (u * c) * ((1.0 - u) * c);
        // outward of a counterclockwise curve is the right of the chord
        let outward = if c > 0.0 { -((q - p) * (1.0 / c)).perp() } else { Point2::default() };
        out.push(p.lerp(q, u) + outward * sag);
    }
    Polyline::new(out, true)
}

fn auto_dt(curve: &Polyline, kappa: &[f64]) -> f64 {
    let h = curve.length() / curve.len() as f64;
    let kmax = kappa.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    0.4 * h * h / kmax.max(f64::MIN_POSITIVE)
}

/// Explicit curve-shortening flow: `v_i += dt kappa_i n_i` with `n_i` the inward normal,
/// followed by uniform arc-length resampling. The curve is evolved counterclockwise.
pub fn csf_run(curve: &Polyline, cfg: &CsfConfig) -> Result<EvolutionTrace> {
    require_closed_simple(curve)?;
    if !(cfg.t_end >= 0.0) {
        return Err(Error::Config("t_end must be nonnegative".into()));
    }
    if !(cfg.area_floor > 0.0 && cfg.area_floor < 1.0) {
        return Err(Error::Config("area_floor must lie in (0, 1)".into()));
    }
    let n = curve.len();
    let ccw = counterclockwise(curve);
    require_convex(&ccw)?;
    let mut c = resample_uniform(&ccw, n);
    require_convex(&c)?;
    let a0 = c.area();
    let floor = cfg.area_floor * a0;
    let mut trace = EvolutionTrace {
        times: Vec::new(),
        lengths: Vec::new(),
        areas: Vec::new(),
        turning: Vec::new(),
        curves: cfg.store_every.map(|_| Vec::new()),
        extinction_time: None,
    };
    let mut t = 0.0;
    trace.push(t, &c);
    if let Some(cs) = trace.curves.as_mut() {
        cs.push(StoredCurve { time: t, curve: c.clone() });
    }
    let mut step = 0usize;
    while t < cfg.t_end {
        if step >= cfg.max_steps {
            return Err(Error::Config(format!("step limit {} reached at t = {t}", cfg.max_steps)));
        }
        let kappa = discrete_curvature(&c);
        let mut dt = match cfg.dt {
            StepSize::Auto => auto_dt(&c, &kappa),
            StepSize::Fixed(dt) => dt,
        };
        dt = dt.min(cfg.t_end - t);
        let v = &c.vertices;
        let moved: Vec<Point2> = (0..n)
            .map(|i| {
                let inward = (v[(i + 1) % n] - v[(i + n - 1) % n]).normalized().perp();
                v[i] + inward * (dt * kappa[i])
            })
            .collect();
        let next = resample_uniform(&Polyline::new(moved, true), n);
        let (l_old, l_new) = (c.length(), next.length());
        if !(l_new <= 1.01 * l_old) {
            return Err(Error::StepUnstable { t, growth: l_new / l_old - 1.0 });
        }
        if next.signed_area() <= 0.0 {
            return Err(Error::StepUnstable { t, growth: f64::NAN });
        }
        c = next;
        t += dt;
        step += 1;
        trace.push(t, &c);
        let extinct = c.area() < floor;
        if let (Some(k), Some(cs)) = (cfg.store_every, trace.curves.as_mut()) {
            if step % k.max(1) == 0 || extinct || t >= cfg.t_end {
                cs.push(StoredCurve { time: t, curve: c.clone() });
            }
        }
        if extinct {
            trace.extinction_time = Some(t);
            break;
        }
    }
    Ok(trace)
}

/// `\oint kappa^2 ds` with discrete curvature and vertex-centred arc weights.
pub fn total_squared_curvature(curve: &Polyline) -> f64 {
    let v = &curve.vertices;
    let n = v.len();
    let k = discrete_curvature(curve);
    let terms: Vec<f64> =
        (0..n).map(|i| k[i] * k[i] * 0.5 * (v[i].dist(v[(i + n - 1) % n]) + v[i].dist(v[(i + 1) % n]))).collect();
    pairwise_sum(&terms)
}

/// `L(t) = L(0) - \int_0^t \oint kappa^2 ds d tau` on the stored curves of a trace, trapezoid
/// rule in time.
pub fn csf_length_law_check(trace: &EvolutionTrace, tolerance: Option<f64>) -> Result<VerificationReport> {
    let stored = trace
        .curves
        .as_ref()
        .filter(|c| !c.is_empty())
        .ok_or_else(|| Error::Precondition("trace has no stored curves".into()))?;
    let tol = tolerance.unwrap_or_else(|| default_tolerance("csf_length_law"));
    let l0 = stored[0].curve.length();
    let k2: Vec<f64> = stored.iter().map(|s| total_squared_curvature(&s.curve)).collect();
    let mut acc = 0.0;
    let mut checks = vec![Check::equal(format!("L@{}", stored[0].time), l0, l0, tol, 0.0)];
    for i in 1..stored.len() {
        acc += 0.5 * (k2[i - 1] + k2[i]) * (stored[i].time - stored[i - 1].time);
        checks.push(Check::equal(format!("L@{}", stored[i].time), stored[i].curve.length(), l0 - acc, tol, 0.0));
    }
    let notes = vec![format!("{} stored curves, {} vertices", stored.len(), stored[0].curve.len())];
    let cfg = QuadratureConfig { t_subdivisions: stored.len().saturating_sub(1), ..Default::default() };
    Ok(VerificationReport::new("csf_length_law", cfg, checks, notes))
}

/// Mean distance of the vertices from their centroid.
pub fn mean_radius(curve: &Polyline) -> f64 {
    let n = curve.len() as f64;
    let c = curve.vertices.iter().fold(Point2::default(), |acc, &p| acc + p) * (1.0 / n);
    curve.vertices.iter().map(|p| p.dist(c)).sum::<f64>() / n
}

/// Isoperimetric deficit `L^2 / (4 pi A) - 1`.
pub fn isoperimetric_deficit(curve: &Polyline) -> f64 {
    let l = curve.length();
    l * l / (4.0 * PI * curve.area()) - 1.0
}

/// Offsets at each `t`: measured length and area against `L(0) + 2 pi t` and
/// `A(0) + L(0) t + pi t^2`.
pub fn verify_parallel_offset(curve: &Polyline, ts: &[f64], tolerance: f64) -> Result<VerificationReport> {
    let (l0, a0) = (curve.length(), curve.area());
    let mut checks = Vec::new();
    for &t in ts {
        let o = parallel_offset(curve, t)?;
        checks.push(Check::equal(format!("length@{t}"), o.length(), l0 + 2.0 * PI * t, tolerance, 0.0));
        checks.push(Check::equal(format!("area@{t}"), o.area(), a0 + l0 * t + PI * t * t, tolerance, 0.0));
    }
    let notes = vec![format!("{} vertices; L(0) = {l0}, A(0) = {a0}", curve.len())];
    Ok(VerificationReport::new("parallel_offset", QuadratureConfig::default(), checks, notes))
}

/// Curve-shortening flow of a circle of radius `r0`: `R(t) = sqrt(r0^2 - 2t)` on stored
/// curves up to `t_law`, and extinction near `A(0) / 2 pi`.
pub fn verify_csf_circle(r0: f64, n: usize, t_law: f64, tolerance: f64, extinction_tol: f64) -> Result<VerificationReport> {
    let circle = Polyline::circle(Point2::default(), r0, n);
    let cfg = CsfConfig { t_end: t_law, store_every: Some(100), ..Default::default() };
    let trace = csf_run(&circle, &cfg)?;
    let mut checks = Vec::new();
    for s in trace.curves.iter().flatten() {
        let exact = (r0 * r0 - 2.0 * s.time).sqrt();
        checks.push(Check::equal(format!("radius@{}", s.time), mean_radius(&s.curve), exact, tolerance, 0.0));
    }
    let full = csf_run(&circle, &CsfConfig::default())?;
    let predicted = full.areas[0] / (2.0 * PI);
    let te = full.extinction_time.unwrap_or(f64::INFINITY);
    checks.push(Check::equal("extinction", te, predicted, extinction_tol, 0.0));
    let notes = vec![format!("{n} vertices, {} steps to the area floor", full.len() - 1)];
    Ok(VerificationReport::new("csf_circle", QuadratureConfig::default(), checks, notes))
}

/// `A(t) + 2 pi t = A(0)` up to `fraction` of the predicted extinction time, relative to
/// `A(0)`, together with strict decrease of `L` at every step.
pub fn verify_csf_area_law(curve: &Polyline, fraction: f64, tolerance: f64) -> Result<(VerificationReport, EvolutionTrace)> {
    let a0 = counterclockwise(curve).area();
    let t_end = fraction * a0 / (2.0 * PI);
    let cfg = CsfConfig { t_end, store_every: Some(200), ..Default::default() };
    let trace = csf_run(curve, &cfg)?;
    let a0 = trace.areas[0];
    let (mut worst, mut at) = (0.0f64, 0.0);
    for (t, a) in trace.times.iter().zip(&trace.areas) {
        let dev = (a + 2.0 * PI * t - a0).abs();
        if dev >= worst {
            worst = dev;
            at = *t;
        }
    }
    let mut checks = vec![Check::equal(format!("area_law@{at}"), trace.areas[0] + worst, a0, tolerance, 0.0)];
    let rises = trace.lengths.windows(2).filter(|w| !(w[1] < w[0])).count();
    checks.push(Check::equal("length_increases", rises as f64, 0.0, 0.0, 1.0));
    let deficits: Vec<f64> = trace.curves.iter().flatten().map(|s| isoperimetric_deficit(&s.curve)).collect();
    let deficit_rises = deficits.windows(2).filter(|w| !(w[1] < w[0])).count();
    checks.push(Check::equal("deficit_increases", deficit_rises as f64, 0.0, 0.0, 1.0));
    let notes = vec![format!("{} steps to t = {t_end}; deficit {:?} -> {:?}", trace.len() - 1, deficits.first(), deficits.last())];
    Ok((VerificationReport::new("csf_area_law", QuadratureConfig::default(), checks, notes), trace))
}
