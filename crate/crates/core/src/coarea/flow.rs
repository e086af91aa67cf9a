use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::project;
use crate::error::{Error, Result};
use crate::field::{ScalarField2, GRAD_FLOOR};
use crate::geom::{pairwise_sum, Point2, Polyline};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Step in level value.
    pub step: f64,
    /// Snap back onto the current level after every step.
    pub project: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { step: 1e-3, project: false }
    }
}

pub fn flow_tol(t: f64) -> f64 {
    1e-8 * (1.0 + t.abs())
}

fn velocity(field: &dyn ScalarField2, q: Point2) -> Result<Point2> {
    let j = field.jet(q)?;
    let g = j.grad_norm();
    if !(g > GRAD_FLOOR) {
        return Err(Error::CriticalProximity { grad_norm: g });
    }
    Ok(j.gradient() * (1.0 / (g * g)))
}

fn integrate(field: &dyn ScalarField2, p: Point2, a: f64, t: f64, cfg: &FlowConfig) -> Result<Point2> {
    if t == a {
        return Ok(p);
    }
    let steps = ((t - a).abs() / cfg.step).ceil().max(1.0) as usize;
    let h = (t - a) / steps as f64;
    let mut q = p;
    for i in 0..steps {
        let k1 = velocity(field, q)?;
        let k2 = velocity(field, q + k1 * (0.5 * h))?;
        let k3 = velocity(field, q + k2 * (0.5 * h))?;
        let k4 = velocity(field, q + k3 * h)?;
        q += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if cfg.project {
            let level = a + (i + 1) as f64 * h;
            let cap = (k1 * h).norm().max(1e-12);
            q = project(field, q, level, cap).unwrap_or(q);
        }
    }
    Ok(q)
}

/// Follow `dH/dt = grad f / |grad f|^2` from `p` on level `a` to level `t`.
pub fn flow_map(field: &dyn ScalarField2, p: Point2, a: f64, t: f64, cfg: &FlowConfig) -> Result<Point2> {
    let f0 = field.value(p)?;
    if (f0 - a).abs() > 1e-6 * (1.0 + a.abs()) {
        return Err(Error::Precondition(format!("start point has f = {f0}, expected level {a}")));
    }
    let q = integrate(field, p, a, t, cfg)?;
    let defect = (field.value(q)? - t).abs();
    let tol = flow_tol(t);
    if defect > tol {
        return Err(Error::FlowDefect { defect, tol });
    }
    Ok(q)
}

/// The level-`a` curve transported along the gradient flow: `gamma(u, t) = H(gamma(u, a), t)`
/// with `u` the normalized arc length on the starting curve.
#[derive(Debug, Clone, Serialize)]
pub struct Tube {
    pub a: f64,
    pub u: Vec<f64>,
    pub t: Vec<f64>,
    /// `points[i][j] = gamma(u[j], t[i])`.
    pub points: Vec<Vec<Point2>>,
    pub closed: bool,
}

pub fn tube_parametrization(
    field: &dyn ScalarField2,
    level_a: &Polyline,
    a: f64,
    t_grid: &[f64],
    cfg: &FlowConfig,
) -> Result<Tube> {
    let v = &level_a.vertices;
    if v.len() < 3 {
        return Err(Error::Precondition("starting curve needs at least 3 vertices".into()));
    }
    let seg: Vec<f64> = level_a.segments().map(|(p, q)| p.dist(q)).collect();
    let total = pairwise_sum(&seg);
    let mut u = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    for (i, _) in v.iter().enumerate() {
        u.push(acc / total);
        if i < seg.len() {
            acc += seg[i];
        }
    }
    let columns: Vec<Result<Vec<Point2>>> = v
        .par_iter()
        .map(|&p| {
            let mut out = Vec::with_capacity(t_grid.len());
            let (mut q, mut level) = (p, a);
            for &t in t_grid {
                q = integrate(field, q, level, t, cfg)?;
                level = t;
                let defect = (field.value(q)? - t).abs();
                if defect > flow_tol(t) {
                    return Err(Error::FlowDefect { defect, tol: flow_tol(t) });
                }
                out.push(q);
            }
            Ok(out)
        })
        .collect();
    let columns: Vec<Vec<Point2>> = columns.into_iter().collect::<Result<_>>()?;
    let points = (0..t_grid.len()).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    Ok(Tube { a, u, t: t_grid.to_vec(), points, closed: level_a.closed })
}

impl Tube {
    /// `|d gamma / du|` by central differences (one-sided at the ends of an open curve).
    pub fn speed(&self, it: usize, ju: usize) -> f64 {
        let row = &self.points[it];
        let n = row.len();
        let (jm, jp, du) = if self.closed {
            let jm = (ju + n - 1) % n;
            let jp = (ju + 1) % n;
            let mut du = self.u[jp] - self.u[jm];
            if du <= 0.0 {
                du += 1.0;
            }
            (jm, jp, du)
        } else {
            let jm = ju.saturating_sub(1);
            let jp = (ju + 1).min(n - 1);
            (jm, jp, self.u[jp] - self.u[jm])
        };
        row[jp].dist(row[jm]) / du
    }

    /// `\int |d gamma / du| du` at the `it`-th level, trapezoid in `u`.
    pub fn slice_length(&self, it: usize) -> f64 {
        let n = self.u.len();
        let count = if self.closed { n } else { n - 1 };
        let terms: Vec<f64> = (0..count)
            .map(|j| {
                let k = (j + 1) % n;
                let mut du = self.u[k] - self.u[j];
                if du <= 0.0 {
                    du += 1.0;
                }
                0.5 * (self.speed(it, j) + self.speed(it, k)) * du
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// `(|det d(x,y)/d(u,t)|, |d gamma/du| / |grad f|)` at one grid point; the two agree
    /// because the flow velocity is normal to the level with length `1 / |grad f|`.
    pub fn jacobian_check(&self, field: &dyn ScalarField2, it: usize, ju: usize) -> Result<(f64, f64)> {
        let row = &self.points[it];
        let n = row.len();
        let (jm, jp) = if self.closed { ((ju + n - 1) % n, (ju + 1) % n) } else { (ju.saturating_sub(1), (ju + 1).min(n - 1)) };
        let mut du = self.u[jp] - self.u[jm];
        if du <= 0.0 {
            du += 1.0;
        }
        let gu = (row[jp] - row[jm]) * (1.0 / du);
        let p = row[ju];
        let gt = velocity(field, p)?;
        let grad = field.jet(p)?.grad_norm();
        Ok((gu.cross(gt).abs(), self.speed(it, ju) / grad))
    }
}
