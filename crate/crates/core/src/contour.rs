//! Level-curve extraction by marching squares with Newton projection onto the level.
//!
//! Components are oriented along `T = (-f_y, f_x)`, so the region where `f` exceeds the
//! level lies to the right of the direction of travel.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{kappa, ScalarField2, GRAD_FLOOR};
use crate::geom::{Point2, Polyline, Rect};

/// Field values at the nodes of a uniform `n x n` cell grid over a window.
#[derive(Debug, Clone)]
pub struct NodeGrid {
    pub window: Rect,
    pub n: usize,
    pub hx: f64,
    pub hy: f64,
    /// Row-major, `(n + 1)^2` entries, row index along y.
    pub values: Vec<f64>,
}

impl NodeGrid {
    pub fn sample<F: ScalarField2 + ?Sized>(field: &F, window: &Rect, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config("grid_n must be at least 2".into()));
        }
        let hx = window.width() / n as f64;
        let hy = window.height() / n as f64;
        let rows: Vec<Result<Vec<f64>>> = (0..=n)
            .into_par_iter()
            .map(|k| {
                (0..=n)
                    .map(|i| field.value(Point2::new(window.x0 + i as f64 * hx, window.y0 + k as f64 * hy)))
                    .collect()
            })
            .collect();
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for r in rows {
            values.extend(r?);
        }
        Ok(Self { window: *window, n, hx, hy, values })
    }

    pub fn node(&self, i: usize, k: usize) -> Point2 {
        Point2::new(self.window.x0 + i as f64 * self.hx, self.window.y0 + k as f64 * self.hy)
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[k * (self.n + 1) + i]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Component {
    pub polyline: Polyline,
    /// Leaves the window (so it is an open arc of a possibly longer curve).
    pub open_at_boundary: bool,
    /// Per-vertex signed curvature, NaN where the gradient is below the floor.
    pub kappa: Vec<f64>,
    pub grad_norm: Vec<f64>,
    /// `+1` when the gradient points out of the enclosed region; only for closed components.
    pub sigma: Option<i32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSet {
    pub t: f64,
    pub components: Vec<Component>,
    /// Cells with four sign alternations, resolved by the cell-center sample.
    pub saddle_cells: usize,
    /// Vertices left at their linear-interpolation position because projection failed.
    pub unprojected: usize,
    pub grid_n: usize,
}

impl LevelSet {
    pub fn is_compact(&self) -> bool {
        self.components.iter().all(|c| !c.open_at_boundary)
    }

    pub fn closed_flags(&self) -> Vec<bool> {
        self.components.iter().map(|c| c.polyline.closed).collect()
    }
}

pub fn projection_tol(t: f64) -> f64 {
    1e-10 * (t.abs() + 1.0)
}

/// Move `p` along the gradient onto `f = t`; `None` if that fails.
pub fn project<F: ScalarField2 + ?Sized>(field: &F, p: Point2, t: f64, max_step: f64) -> Option<Point2> {
    let tol = projection_tol(t);
    let mut q = p;
    for _ in 0..12 {
        let j = field.jet(q).ok()?;
        let r = j.value - t;
        if r.abs() <= tol {
            return Some(q);
        }
        let g2 = j.grad[0] * j.grad[0] + j.grad[1] * j.grad[1];
        if !(g2 > GRAD_FLOOR * GRAD_FLOOR) {
            return None;
        }
        let mut step = j.gradient() * (-r / g2);
        let len = step.norm();
        if len > max_step {
            step = step * (max_step / len);
        }
        q += step;
    }
    None
}

#[derive(Clone, Copy)]
struct Crossing {
    edge: u64,
    up: bool,
}

/// Extract the level `f = t` on `window` with a `grid_n x grid_n` background grid.
pub fn extract_level<F: ScalarField2 + ?Sized>(field: &F, t: f64, window: &Rect, grid_n: usize) -> Result<LevelSet> {
    let grid = NodeGrid::sample(field, window, grid_n)?;
    extract_from_grid(field, t, &grid)
}

pub fn extract_from_grid<F: ScalarField2 + ?Sized>(field: &F, t: f64, grid: &NodeGrid) -> Result<LevelSet> {
    let n = grid.n;
    let stride = (n + 1) as u64;
    let hkey = |i: usize, k: usize| 2 * (k as u64 * stride + i as u64);
    let vkey = |i: usize, k: usize| 2 * (k as u64 * stride + i as u64) + 1;
    let above = |i: usize, k: usize| grid.at(i, k) - t > 0.0;

    // segments keyed by start edge, per cell row for parallelism
    let rows: Vec<Result<(Vec<(u64, u64)>, usize)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut segs = Vec::new();
            let mut saddles = 0;
            for i in 0..n {
                let corners = [(i, k), (i + 1, k), (i + 1, k + 1), (i, k + 1)];
                let s: Vec<bool> = corners.iter().map(|&(a, b)| above(a, b)).collect();
                if s.iter().all(|&v| v) || s.iter().all(|&v| !v) {
                    continue;
                }
                let edges = [hkey(i, k), vkey(i + 1, k), hkey(i, k + 1), vkey(i, k)];
                let mut cross: Vec<(usize, Crossing)> = Vec::with_capacity(4);
                for e in 0..4 {
                    let (a, b) = (s[e], s[(e + 1) % 4]);
                    if a != b {
                        cross.push((e, Crossing { edge: edges[e], up: b }));
                    }
                }
                if cross.len() == 2 {
                    let (u, d) = if cross[0].1.up { (cross[0].1, cross[1].1) } else { (cross[1].1, cross[0].1) };
                    segs.push((u.edge, d.edge));
                } else {
                    saddles += 1;
                    let c = grid.window.x0 + (i as f64 + 0.5) * grid.hx;
                    let d = grid.window.y0 + (k as f64 + 0.5) * grid.hy;
                    let center_above = field.value(Point2::new(c, d))? - t > 0.0;
                    for &(e, cr) in cross.iter().filter(|(_, c)| c.up) {
                        let partner = if center_above { (e + 3) % 4 } else { (e + 1) % 4 };
                        segs.push((cr.edge, edges[partner]));
                    }
                }
            }
            Ok((segs, saddles))
        })
        .collect();

    let mut next: BTreeMap<u64, u64> = BTreeMap::new();
    let mut ends: BTreeSet<u64> = BTreeSet::new();
    let mut saddle_cells = 0;
    for r in rows {
        let (segs, s) = r?;
        saddle_cells += s;
        for (a, b) in segs {
            next.insert(a, b);
            ends.insert(b);
        }
    }

    let mut chains: Vec<(Vec<u64>, bool)> = Vec::new();
    let mut used: BTreeSet<u64> = BTreeSet::new();
    let starts: Vec<u64> = next.keys().copied().filter(|k| !ends.contains(k)).collect();
    for s in starts {
        let mut chain = vec![s];
        let mut cur = s;
        used.insert(s);
        while let Some(&nx) = next.get(&cur) {
            chain.push(nx);
            if !used.insert(nx) {
                break;
            }
            cur = nx;
        }
        chains.push((chain, false));
    }
    let keys: Vec<u64> = next.keys().copied().collect();
    for s in keys {
        if used.contains(&s) {
            continue;
        }
        let mut chain = vec![s];
        used.insert(s);
        let mut cur = s;
        loop {
            let nx = next[&cur];
            if nx == s {
                break;
            }
            chain.push(nx);
            used.insert(nx);
            cur = nx;
        }
        chains.push((chain, true));
    }

    let edge_point = |key: u64| -> Point2 {
        let vertical = key % 2 == 1;
        let idx = key / 2;
        let (i, k) = ((idx % stride) as usize, (idx / stride) as usize);
        let (i2, k2) = if vertical { (i, k + 1) } else { (i + 1, k) };
        let (fa, fb) = (grid.at(i, k), grid.at(i2, k2));
        let s = ((t - fa) / (fb - fa)).clamp(0.0, 1.0);
        grid.node(i, k).lerp(grid.node(i2, k2), s)
    };
    let max_step = grid.hx.max(grid.hy);

    let built: Vec<(Component, usize)> = chains
        .par_iter()
        .map(|(keys, closed)| {
            let mut unprojected = 0;
            let mut verts: Vec<Point2> = Vec::with_capacity(keys.len());
            for &k in keys {
                let p = edge_point(k);
                let q = match project(field, p, t, max_step) {
                    Some(q) => q,
                    None => {
                        unprojected += 1;
                        p
                    }
                };
                if verts.last().map_or(true, |l: &Point2| l.dist(q) > 1e-13 * (1.0 + q.norm())) {
                    verts.push(q);
                }
            }
            if *closed && verts.len() > 1 && verts[0].dist(verts[verts.len() - 1]) <= 1e-13 * (1.0 + verts[0].norm()) {
                verts.pop();
            }
            (finish_component(field, verts, *closed), unprojected)
        })
        .collect();

    let mut components = Vec::new();
    let mut unprojected = 0;
    for (c, u) in built {
        unprojected += u;
        if c.polyline.len() >= if c.polyline.closed { 3 } else { 2 } {
            components.push(c);
        }
    }
    Ok(LevelSet { t, components, saddle_cells, unprojected, grid_n: n })
}

fn finish_component<F: ScalarField2 + ?Sized>(field: &F, verts: Vec<Point2>, closed: bool) -> Component {
    let mut polyline = Polyline::new(verts, closed);
    let sample = |poly: &Polyline| -> (Vec<f64>, Vec<f64>, i64) {
        let mut ks = Vec::with_capacity(poly.len());
        let mut gs = Vec::with_capacity(poly.len());
        let mut vote = 0i64;
        let m = poly.len();
        for (idx, &p) in poly.vertices.iter().enumerate() {
            match field.jet(p) {
                Ok(j) => {
                    ks.push(kappa(&j, GRAD_FLOOR).unwrap_or(f64::NAN));
                    gs.push(j.grad_norm());
                    let nxt = if idx + 1 < m { poly.vertices[idx + 1] } else if poly.closed { poly.vertices[0] } else { continue };
                    let tangent = j.gradient().perp();
                    vote += if (nxt - p).dot(tangent) >= 0.0 { 1 } else { -1 };
                }
                Err(_) => {
                    ks.push(f64::NAN);
                    gs.push(f64::NAN);
                }
            }
        }
        (ks, gs, vote)
    };
    let (mut ks, mut gs, vote) = sample(&polyline);
    if vote < 0 {
        // marching-squares orientation disagrees with T; trust the field
        polyline = polyline.reversed();
        ks.reverse();
        gs.reverse();
    }
    let sigma = closed.then(|| if polyline.signed_area() > 0.0 { 1 } else { -1 });
    Component { open_at_boundary: !closed, polyline, kappa: ks, grad_norm: gs, sigma }
}

/// Total length of all components.
pub fn arc_length(ls: &LevelSet) -> f64 {
    let lens: Vec<f64> = ls.components.iter().map(|c| c.polyline.length()).collect();
    crate::geom::pairwise_sum(&lens)
}

/// Length of one component with every chord `c` lengthened to the arc `c (1 + c^2 k^2 / 24)`,
/// `k` the mean analytic curvature of its endpoints. Chords near critical points, where the
/// curvature is unavailable or large, are taken as is.
pub fn component_length(c: &Component) -> f64 {
    let v = &c.polyline.vertices;
    let n = v.len();
    let count = if c.polyline.closed { n } else { n.saturating_sub(1) };
    let terms: Vec<f64> = (0..count)
        .map(|i| {
            let j = (i + 1) % n;
            let chord = v[i].dist(v[j]);
            let k = 0.5 * (c.kappa[i] + c.kappa[j]);
            if k.is_finite() && chord * k.abs() < 0.5 {
                chord * (1.0 + chord * chord * k * k / 24.0)
            } else {
                chord
            }
        })
        .collect();
    crate::geom::pairwise_sum(&terms)
}

/// Total length with the arc-chord correction of [`component_length`].
pub fn curve_length(ls: &LevelSet) -> f64 {
    let lens: Vec<f64> = ls.components.iter().map(component_length).collect();
    crate::geom::pairwise_sum(&lens)
}

/// `+1` when the stipulated tangent traverses the component counterclockwise.
pub fn orientation_sign(ls: &LevelSet, component: usize) -> Result<i32> {
    let c = ls
        .components
        .get(component)
        .ok_or_else(|| Error::Precondition(format!("no component {component}")))?;
    c.sigma.ok_or(Error::NotClosed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthSample {
    pub t: f64,
    pub length: f64,
    pub components: usize,
}

/// Sample `L(t)` on `t_grid`; every level must be compact in the window.
pub fn length_function<F: ScalarField2 + ?Sized>(
    field: &F,
    window: &Rect,
    t_grid: &[f64],
    grid_n: usize,
) -> Result<Vec<LengthSample>> {
    let grid = NodeGrid::sample(field, window, grid_n)?;
    t_grid
        .par_iter()
        .map(|&t| {
            let ls = extract_from_grid(field, t, &grid)?;
            if !ls.is_compact() {
                return Err(Error::NonCompactLevel { t });
            }
            Ok(LengthSample { t, length: arc_length(&ls), components: ls.components.len() })
        })
        .collect()
}

/// Signed discrete curvature at each vertex of a closed polyline: inverse circumradius of
/// the vertex and its neighbours, positive where the curve turns left.
pub fn discrete_curvature(poly: &Polyline) -> Vec<f64> {
    let v = &poly.vertices;
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            let cross = (b - a).cross(c - b);
            let denom = (b - a).norm() * (c - b).norm() * (c - a).norm();
            if denom == 0.0 {
                0.0
            } else {
                2.0 * cross / denom
            }
        })
        .collect()
}

/// CSV dump with header `component_id,x,y,kappa,grad_norm`.
pub fn write_csv<W: Write>(ls: &LevelSet, mut w: W) -> io::Result<()> {
    writeln!(w, "component_id,x,y,kappa,grad_norm")?;
    for (id, c) in ls.components.iter().enumerate() {
        for (idx, p) in c.polyline.vertices.iter().enumerate() {
            writeln!(w, "{id},{},{},{},{}", p.x, p.y, c.kappa[idx], c.grad_norm[idx])?;
        }
    }
    Ok(())
}
