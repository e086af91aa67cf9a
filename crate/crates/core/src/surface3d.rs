//! Level surfaces of fields on R^3: extraction by marching tetrahedra with Newton
//! projection, mean and Gaussian curvature from jets, and the volume/surface identities.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarea::QuadratureConfig;
use crate::error::{Error, Result};
use crate::field::{ScalarField3, GRAD_FLOOR};
use crate::fieldlang::Jet3;
use crate::geom::{pairwise_sum, Box3, Point3};
use crate::identities::{sample_levels, Check, VerificationReport, VerifyOptions};

/// `H = (1/2) div(grad f / |grad f|)`, so that spheres around a minimum have `H = 1/R`.
pub fn mean_curvature_of(j: &Jet3) -> Result<f64> {
    let g = j.grad;
    let n2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
    let n = n2.sqrt();
    if !(n > GRAD_FLOOR) {
        return Err(Error::NearCritical3 { x: f64::NAN, y: f64::NAN, z: f64::NAN, grad_norm: n });
    }
    let h = j.hess;
    let trace = h[0][0] + h[1][1] + h[2][2];
    let mut ghg = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            ghg += g[a] * h[a][b] * g[b];
        }
    }
    Ok((n2 * trace - ghg) / (2.0 * n2 * n))
}

/// `K = (grad f . adj(Hess f) . grad f) / |grad f|^4`.
pub fn gaussian_curvature_of(j: &Jet3) -> Result<f64> {
    let g = j.grad;
    let n2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
    if !(n2.sqrt() > GRAD_FLOOR) {
        return Err(Error::NearCritical3 { x: f64::NAN, y: f64::NAN, z: f64::NAN, grad_norm: n2.sqrt() });
    }
    let h = j.hess;
    let adj = [
        [h[1][1] * h[2][2] - h[1][2] * h[2][1], h[0][2] * h[2][1] - h[0][1] * h[2][2], h[0][1] * h[1][2] - h[0][2] * h[1][1]],
        [h[1][2] * h[2][0] - h[1][0] * h[2][2], h[0][0] * h[2][2] - h[0][2] * h[2][0], h[0][2] * h[1][0] - h[0][0] * h[1][2]],
        [h[1][0] * h[2][1] - h[1][1] * h[2][0], h[0][1] * h[2][0] - h[0][0] * h[2][1], h[0][0] * h[1][1] - h[0][1] * h[1][0]],
    ];
    let mut q = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            q += g[a] * adj[a][b] * g[b];
        }
    }
    Ok(q / (n2 * n2))
}

fn with_location(e: Error, p: Point3) -> Error {
    match e {
        Error::NearCritical3 { grad_norm, .. } => Error::NearCritical3 { x: p.x, y: p.y, z: p.z, grad_norm },
        e => e,
    }
}

pub fn mean_curvature(field: &dyn ScalarField3, p: Point3) -> Result<f64> {
    mean_curvature_of(&field.jet(p)?).map_err(|e| with_location(e, p))
}

pub fn gaussian_curvature(field: &dyn ScalarField3, p: Point3) -> Result<f64> {
    gaussian_curvature_of(&field.jet(p)?).map_err(|e| with_location(e, p))
}

/// Field values at the `(n+1)^3` nodes of a box.
#[derive(Debug, Clone)]
pub struct Grid3 {
    pub window: Box3,
    pub n: usize,
    pub h: [f64; 3],
    pub values: Vec<f64>,
}

impl Grid3 {
    pub fn sample(field: &dyn ScalarField3, window: &Box3, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config("grid_n must be at least 2".into()));
        }
        let h = [
            (window.max.x - window.min.x) / n as f64,
            (window.max.y - window.min.y) / n as f64,
            (window.max.z - window.min.z) / n as f64,
        ];
        let m = n + 1;
        let mut grid = Self { window: *window, n, h, values: Vec::new() };
        let slabs: Vec<Result<Vec<f64>>> = (0..m)
            .into_par_iter()
            .map(|k| {
                let mut out = Vec::with_capacity(m * m);
                for j in 0..m {
                    for i in 0..m {
                        let v = field.value(grid.node(i, j, k))?;
                        if !v.is_finite() {
                            return Err(Error::Domain(format!("field is not finite at grid node ({i}, {j}, {k})")));
                        }
                        out.push(v);
                    }
                }
                Ok(out)
            })
            .collect();
        for s in slabs {
            grid.values.extend(s?);
        }
        Ok(grid)
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> Point3 {
        let w = &self.window;
        Point3::new(w.min.x + i as f64 * self.h[0], w.min.y + j as f64 * self.h[1], w.min.z + k as f64 * self.h[2])
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let m = self.n + 1;
        i + m * (j + m * k)
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    fn boundary_values(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n;
        (0..=n).flat_map(move |k| {
            (0..=n).flat_map(move |j| {
                (0..=n).filter_map(move |i| {
                    let on = i == 0 || j == 0 || k == 0 || i == n || j == n || k == n;
                    on.then(|| self.at(i, j, k))
                })
            })
        })
    }

    fn max_h(&self) -> f64 {
        self.h[0].max(self.h[1]).max(self.h[2])
    }
}

/// Corner `c` of a cube sits at offset `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
const CORNERS: [(usize, usize, usize); 8] =
    [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)];

/// Six tetrahedra around the main diagonal; the split is conforming across cube faces.
const TETS: [[usize; 4]; 6] = [[0, 1, 3, 7], [0, 1, 5, 7], [0, 2, 3, 7], [0, 2, 6, 7], [0, 4, 5, 7], [0, 4, 6, 7]];

/// Closed triangle mesh with per-vertex differential data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub t: f64,
    pub vertices: Vec<Point3>,
    /// Counterclockwise about the unit normal `N = -grad f / |grad f|`.
    pub triangles: Vec<[u32; 3]>,
    pub normals: Vec<Point3>,
    pub mean_curvature: Vec<f64>,
    pub gaussian_curvature: Vec<f64>,
    pub grad_norm: Vec<f64>,
    /// Vertices where Newton projection did not converge and the interpolated point was kept.
    pub unprojected: usize,
}

pub fn projection_tol(t: f64) -> f64 {
    1e-10 * (t.abs() + 1.0)
}

/// Newton steps along the gradient onto `f = t`, each capped at `max_step`.
pub fn project3(field: &dyn ScalarField3, p: Point3, t: f64, max_step: f64) -> Option<Point3> {
    let mut q = p;
    for _ in 0..12 {
        let j = field.jet(q).ok()?;
        let r = j.value - t;
        if r.abs() <= projection_tol(t) {
            return Some(q);
        }
        let g = j.gradient();
        let n2 = g.dot(g);
        if !(n2.sqrt() > GRAD_FLOOR) {
            return None;
        }
        let mut step = g * (-r / n2);
        let len = step.norm();
        if len > max_step {
            step = step * (max_step / len);
        }
        q = q + step;
    }
    let r = field.value(q).ok()? - t;
    (r.abs() <= projection_tol(t)).then_some(q)
}

type EdgeKey = u64;

fn edge_key(a: usize, b: usize) -> EdgeKey {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

fn parity(perm: [usize; 4]) -> i32 {
    let mut inv = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign of the volume of each entry of [`TETS`] on a cube with positive spacing.
fn tet_signs() -> [i32; 6] {
    TETS.map(|tet| {
        let p = tet.map(|c| {
            let (i, j, k) = CORNERS[c];
            Point3::new(i as f64, j as f64, k as f64)
        });
        if (p[1] - p[0]).dot((p[2] - p[0]).cross(p[3] - p[0])) > 0.0 {
            1
        } else {
            -1
        }
    })
}

/// Triangles of one tetrahedron, as (edge key, interpolated point) triples. Winding is fixed
/// combinatorially from the tetrahedron's orientation `sign`, so that triangle normals point
/// toward decreasing `f` even for slivers.
fn tet_triangles(idx: [usize; 4], pos: [Point3; 4], val: [f64; 4], sign: i32, out: &mut Vec<[(EdgeKey, Point3); 3]>) {
    let above: Vec<usize> = (0..4).filter(|&i| val[i] > 0.0).collect();
    let below: Vec<usize> = (0..4).filter(|&i| val[i] <= 0.0).collect();
    let cut = |a: usize, b: usize| {
        let s = val[a] / (val[a] - val[b]);
        (edge_key(idx[a], idx[b]), pos[a] + (pos[b] - pos[a]) * s)
    };
    match above.len() {
        0 | 4 => {}
        1 | 3 => {
            let lone_above = above.len() == 1;
            let (lone, rest) = if lone_above { (above[0], &below) } else { (below[0], &above) };
            let mut tri = [cut(lone, rest[0]), cut(lone, rest[1]), cut(lone, rest[2])];
            // with positive orientation the normal of (r0, r1, r2) points away from `lone`
            let away = sign * parity([lone, rest[0], rest[1], rest[2]]) > 0;
            if away != lone_above {
                tri.swap(1, 2);
            }
            out.push(tri);
        }
        _ => {
            let (a0, a1, b0, b1) = (above[0], above[1], below[0], below[1]);
            let q = [cut(a0, b0), cut(a0, b1), cut(a1, b1), cut(a1, b0)];
            if sign * parity([a0, a1, b0, b1]) > 0 {
                out.push([q[0], q[1], q[2]]);
                out.push([q[0], q[2], q[3]]);
            } else {
                out.push([q[0], q[2], q[1]]);
                out.push([q[0], q[3], q[2]]);
            }
        }
    }
}

/// Marching tetrahedra on a sampled grid, then projection of every vertex onto the level.
pub fn extract_from_grid(field: &dyn ScalarField3, t: f64, grid: &Grid3) -> Result<TriMesh> {
    let mut signs = grid.boundary_values().map(|v| v - t > 0.0);
    if let Some(first) = signs.next() {
        if signs.any(|s| s != first) {
            return Err(Error::OpenSurfaceAtBoundary { t });
        }
    }
    let n = grid.n;
    let signs = tet_signs();
    let slabs: Vec<Vec<[(EdgeKey, Point3); 3]>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut out = Vec::new();
            for j in 0..n {
                for i in 0..n {
                    let mut idx = [0usize; 8];
                    let mut val = [0.0; 8];
                    for (c, &(di, dj, dk)) in CORNERS.iter().enumerate() {
                        idx[c] = grid.index(i + di, j + dj, k + dk);
                        val[c] = grid.values[idx[c]] - t;
                    }
                    let lo = val.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = val.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if lo > 0.0 || hi <= 0.0 {
                        continue;
                    }
                    for (tet, &sign) in TETS.iter().zip(&signs) {
                        let ti = tet.map(|c| idx[c]);
                        let tv = tet.map(|c| val[c]);
                        let tp = tet.map(|c| {
                            let (di, dj, dk) = CORNERS[c];
                            grid.node(i + di, j + dj, k + dk)
                        });
                        tet_triangles(ti, tp, tv, sign, &mut out);
                    }
                }
            }
            out
        })
        .collect();

    let mut ids: HashMap<EdgeKey, u32> = HashMap::new();
    let mut raw = Vec::new();
    let mut triangles = Vec::new();
    for tri in slabs.into_iter().flatten() {
        let mut face = [0u32; 3];
        for (slot, (key, p)) in face.iter_mut().zip(tri) {
            *slot = *ids.entry(key).or_insert_with(|| {
                raw.push(p);
                (raw.len() - 1) as u32
            });
        }
        if face[0] != face[1] && face[1] != face[2] && face[0] != face[2] {
            triangles.push(face);
        }
    }
    let cap = grid.max_h();
    let projected: Vec<(Point3, bool)> = raw
        .par_iter()
        .map(|&p| match project3(field, p, t, cap) {
            Some(q) => (q, true),
            None => (p, false),
        })
        .collect();
    let unprojected = projected.iter().filter(|x| !x.1).count();
    let vertices: Vec<Point3> = projected.into_iter().map(|x| x.0).collect();
    let data: Vec<Result<(Point3, f64, f64, f64)>> = vertices
        .par_iter()
        .map(|&p| {
            let j = field.jet(p)?;
            let g = j.grad_norm();
            let h = mean_curvature_of(&j).map_err(|e| with_location(e, p))?;
            let k = gaussian_curvature_of(&j).map_err(|e| with_location(e, p))?;
            Ok((j.gradient() * (-1.0 / g), h, k, g))
        })
        .collect();
    let mut mesh = TriMesh {
        t,
        vertices,
        triangles,
        normals: Vec::new(),
        mean_curvature: Vec::new(),
        gaussian_curvature: Vec::new(),
        grad_norm: Vec::new(),
        unprojected,
    };
    for d in data {
        let (nv, h, k, g) = d?;
        mesh.normals.push(nv);
        mesh.mean_curvature.push(h);
        mesh.gaussian_curvature.push(k);
        mesh.grad_norm.push(g);
    }
    Ok(mesh)
}

pub fn extract_surface(field: &dyn ScalarField3, t: f64, window: &Box3, grid_n: usize) -> Result<TriMesh> {
    let grid = Grid3::sample(field, window, grid_n)?;
    extract_from_grid(field, t, &grid)
}

impl TriMesh {
    fn corners(&self, tri: &[u32; 3]) -> [Point3; 3] {
        tri.map(|i| self.vertices[i as usize])
    }

    pub fn triangle_areas(&self) -> Vec<f64> {
        self.triangles
            .iter()
            .map(|tri| {
                let [a, b, c] = self.corners(tri);
                0.5 * (b - a).cross(c - a).norm()
            })
            .collect()
    }

    pub fn area(&self) -> f64 {
        pairwise_sum(&self.triangle_areas())
    }

    /// `\iint g dsigma`, one point per triangle with the vertex-averaged integrand.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let areas = self.triangle_areas();
        let terms: Vec<f64> = self
            .triangles
            .iter()
            .zip(&areas)
            .map(|(tri, a)| a * tri.iter().map(|&i| values[i as usize]).sum::<f64>() / 3.0)
            .collect();
        pairwise_sum(&terms)
    }

    fn edge_counts(&self) -> HashMap<(u32, u32), (u32, i32)> {
        let mut edges: HashMap<(u32, u32), (u32, i32)> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let entry = edges.entry(key).or_default();
                entry.0 += 1;
                entry.1 += if a < b { 1 } else { -1 };
            }
        }
        edges
    }

    pub fn edge_count(&self) -> usize {
        self.edge_counts().len()
    }

    /// `V - E + F` from the combinatorics.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Every edge lies on exactly two triangles that traverse it in opposite directions.
    pub fn check_closed_manifold(&self) -> Result<()> {
        for (&(a, b), &(count, balance)) in &self.edge_counts() {
            if count != 2 || balance != 0 {
                return Err(Error::Precondition(format!(
                    "edge ({a}, {b}) has {count} incident triangles (orientation balance {balance})"
                )));
            }
        }
        Ok(())
    }

    /// OFF text: header, counts, vertex lines, face lines.
    pub fn write_off<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "OFF")?;
        writeln!(w, "{} {} {}", self.vertices.len(), self.triangles.len(), self.edge_count())?;
        for p in &self.vertices {
            writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
        }
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// The band `a <= f <= b` of a field on a box.
#[derive(Clone, Copy)]
pub struct Band3<'a> {
    pub field: &'a dyn ScalarField3,
    pub a: f64,
    pub b: f64,
    pub window: Box3,
}

impl<'a> Band3<'a> {
    pub fn new(field: &'a dyn ScalarField3, a: f64, b: f64, window: Box3) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Config("band must satisfy a<b".into()));
        }
        Ok(Self { field, a, b, window })
    }
}

fn tet_volume(p: &[Point3; 4]) -> f64 {
    ((p[1] - p[0]).dot((p[2] - p[0]).cross(p[3] - p[0]))).abs() / 6.0
}

fn tet_centroid(p: &[Point3; 4]) -> Point3 {
    (p[0] + p[1] + p[2] + p[3]) * 0.25
}

/// Volume and centroid of the part of a tetrahedron where the linear interpolant of the
/// vertex values is at most `s`.
fn below_part(p: [Point3; 4], f: [f64; 4], s: f64) -> (f64, Point3) {
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| f[i].total_cmp(&f[j]));
    let pp = order.map(|i| p[i]);
    let ff = order.map(|i| f[i]);
    let count = ff.iter().filter(|&&v| v <= s).count();
    let cut = |lo: usize, hi: usize| pp[lo] + (pp[hi] - pp[lo]) * ((s - ff[lo]) / (ff[hi] - ff[lo]));
    let full = (tet_volume(&pp), tet_centroid(&pp));
    match count {
        0 => (0.0, full.1),
        4 => full,
        1 => {
            let t = [pp[0], cut(0, 1), cut(0, 2), cut(0, 3)];
            (tet_volume(&t), tet_centroid(&t))
        }
        3 => {
            let t = [pp[3], cut(0, 3), cut(1, 3), cut(2, 3)];
            let va = tet_volume(&t);
            let vb = full.0 - va;
            if vb <= 0.0 {
                return (0.0, full.1);
            }
            (vb, (full.1 * full.0 - tet_centroid(&t) * va) * (1.0 / vb))
        }
        _ => {
            // a wedge with triangles (p0, c02, c03) and (p1, c12, c13)
            let (a0, a1, a2) = (pp[0], cut(0, 2), cut(0, 3));
            let (b0, b1, b2) = (pp[1], cut(1, 2), cut(1, 3));
            let parts = [[a0, a1, a2, b2], [a0, a1, b1, b2], [a0, b0, b1, b2]];
            let mut vol = 0.0;
            let mut c = Point3::new(0.0, 0.0, 0.0);
            for t in &parts {
                let v = tet_volume(t);
                vol += v;
                c = c + tet_centroid(t) * v;
            }
            if vol <= 0.0 {
                return (0.0, full.1);
            }
            (vol, c * (1.0 / vol))
        }
    }
}

/// `\iiint g dV` over the band for `M` integrands at once: midpoint rule in cells inside the
/// band, exact linear-interpolant volume fractions in cells it cuts. Also returns
/// `\iiint |g|`.
pub fn volume_integrals<const M: usize>(
    band: &Band3<'_>,
    grid: &Grid3,
    g: &(dyn Fn(Point3, &Jet3) -> Result<[f64; M]> + Sync),
) -> Result<([f64; M], [f64; M])> {
    let (a, b) = (band.a, band.b);
    if grid.boundary_values().any(|v| v >= a && v <= b) {
        return Err(Error::NonCompactBand { a, b });
    }
    let n = grid.n;
    let cell = grid.h[0] * grid.h[1] * grid.h[2];
    let eval = |p: Point3| -> Result<[f64; M]> {
        let v = g(p, &band.field.jet(p)?)?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("integrand is not finite at ({}, {}, {})", p.x, p.y, p.z)));
        }
        Ok(v)
    };
    let slabs: Vec<Result<Vec<[f64; M]>>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rows = Vec::with_capacity(2 * n);
            for j in 0..n {
                let mut sum = [0.0; M];
                let mut abs = [0.0; M];
                for i in 0..n {
                    let mut val = [0.0; 8];
                    let mut pos = [Point3::new(0.0, 0.0, 0.0); 8];
                    for (c, &(di, dj, dk)) in CORNERS.iter().enumerate() {
                        val[c] = grid.at(i + di, j + dj, k + dk);
                        pos[c] = grid.node(i + di, j + dj, k + dk);
                    }
                    let lo = val.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = val.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if hi < a || lo > b {
                        continue;
                    }
                    if lo >= a && hi <= b {
                        let v = eval((pos[0] + pos[7]) * 0.5)?;
                        for m in 0..M {
                            sum[m] += v[m] * cell;
                            abs[m] += v[m].abs() * cell;
                        }
                        continue;
                    }
                    for tet in TETS {
                        let tp = tet.map(|c| pos[c]);
                        let tv = tet.map(|c| val[c]);
                        let (vb, cb) = below_part(tp, tv, b);
                        let (va, ca) = below_part(tp, tv, a);
                        if vb > 0.0 {
                            let v = eval(cb)?;
                            for m in 0..M {
                                sum[m] += v[m] * vb;
                                abs[m] += v[m].abs() * vb;
                            }
                        }
                        if va > 0.0 {
                            let v = eval(ca)?;
                            for m in 0..M {
                                sum[m] -= v[m] * va;
                                abs[m] -= v[m].abs() * va;
                            }
                        }
                    }
                }
                rows.push(sum);
                rows.push(abs);
            }
            Ok(rows)
        })
        .collect();
    let mut sums: Vec<Vec<f64>> = vec![Vec::new(); 2 * M];
    for s in slabs {
        for (r, row) in s?.iter().enumerate() {
            for m in 0..M {
                sums[(r % 2) * M + m].push(row[m]);
            }
        }
    }
    let mut value = [0.0; M];
    let mut abs = [0.0; M];
    for m in 0..M {
        value[m] = pairwise_sum(&sums[m]);
        abs[m] = pairwise_sum(&sums[M + m]);
    }
    Ok((value, abs))
}

/// Verification defaults sized for three dimensions.
pub fn surface_options() -> VerifyOptions {
    VerifyOptions {
        cfg: QuadratureConfig { grid_n: 96, t_subdivisions: 32, ..Default::default() },
        ..Default::default()
    }
}

/// `\iiint g dV` against `\int (\iint g / |grad f| dsigma) dt` for `g` in `{1, |grad f|}`.
pub fn verify_coarea3d(band: &Band3<'_>, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol("coarea3d");
    let cfg = &opts.cfg;
    let grid = Grid3::sample(band.field, &band.window, cfg.grid_n)?;
    let (vol, abs) = volume_integrals(band, &grid, &|_, j| Ok([1.0, j.grad_norm()]))?;
    let sliced: Vec<[f64; 2]> = {
        let nodes = crate::coarea::t_nodes(band.a, band.b, &[], cfg.t_subdivisions);
        let per: Vec<Result<[f64; 2]>> = nodes
            .par_iter()
            .map(|&(t, w)| {
                let m = extract_from_grid(band.field, t, &grid)?;
                let inv: Vec<f64> = m.grad_norm.iter().map(|g| 1.0 / g).collect();
                Ok([w * m.integrate(&inv), w * m.area()])
            })
            .collect();
        per.into_iter().collect::<Result<_>>()?
    };
    let s0 = pairwise_sum(&sliced.iter().map(|s| s[0]).collect::<Vec<_>>());
    let s1 = pairwise_sum(&sliced.iter().map(|s| s[1]).collect::<Vec<_>>());
    let checks = vec![
        Check::equal("g=1", vol[0], s0, tol, 1e-3 * abs[0]),
        Check::equal("g=|grad f|", vol[1], s1, tol, 1e-3 * abs[1]),
    ];
    Ok(VerificationReport::new("coarea3d", cfg.clone(), checks, Vec::new()))
}

/// Gauss-Bonnet on the bounding levels and the band identities for `K`.
pub fn verify_gauss_identities(band: &Band3<'_>, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol("gauss");
    let cfg = &opts.cfg;
    let grid = Grid3::sample(band.field, &band.window, cfg.grid_n)?;
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let mut chi_a = 0;
    for (name, t) in [("a", band.a), ("b", band.b)] {
        let m = extract_from_grid(band.field, t, &grid)?;
        m.check_closed_manifold()?;
        let chi = m.euler_characteristic();
        if name == "a" {
            chi_a = chi;
        }
        notes.push(format!("level {t}: chi {chi}, {} vertices, {} unprojected", m.vertices.len(), m.unprojected));
        let k = &m.gaussian_curvature;
        let abs_k: Vec<f64> = k.iter().map(|x| x.abs()).collect();
        let scale = m.integrate(&abs_k);
        checks.push(Check::equal(format!("gauss_bonnet@{t}"), m.integrate(k), 2.0 * PI * chi as f64, tol, scale));
        let kn: Vec<f64> = (0..3)
            .map(|c| {
                let v: Vec<f64> = k.iter().zip(&m.normals).map(|(k, nv)| k * nv.to_array()[c]).collect();
                m.integrate(&v)
            })
            .collect();
        let norm = (kn[0] * kn[0] + kn[1] * kn[1] + kn[2] * kn[2]).sqrt();
        checks.push(Check::equal(format!("kn@{t}"), norm, 0.0, tol, scale));
    }
    let (v, abs) = volume_integrals(band, &grid, &|p, j| {
        let k = gaussian_curvature_of(j).map_err(|e| with_location(e, p))?;
        Ok([k * j.grad[0], k * j.grad[1], k * j.grad[2], k * j.grad_norm()])
    })?;
    let vnorm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    checks.push(Check::equal("k_grad_vector", vnorm, 0.0, tol, abs[3]));
    checks.push(Check::equal("k_grad_norm", v[3], 2.0 * PI * (band.b - band.a) * chi_a as f64, tol, abs[3]));
    Ok(VerificationReport::new("gauss", cfg.clone(), checks, notes))
}

/// `A'(t) = \iint 2H / |grad f| dsigma` at sampled `t` and `A(b) = A(a) + 2 \iiint H dV`.
pub fn verify_area_derivative(band: &Band3<'_>, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol("area_derivative");
    let cfg = &opts.cfg;
    let grid = Grid3::sample(band.field, &band.window, cfg.grid_n)?;
    let area = |t: f64| -> Result<f64> { Ok(extract_from_grid(band.field, t, &grid)?.area()) };
    let dt = (band.b - band.a) / 64.0;
    let mut checks = Vec::new();
    for t in sample_levels(band.a, band.b, opts.samples.min(8)) {
        let m = extract_from_grid(band.field, t, &grid)?;
        let w: Vec<f64> = m.mean_curvature.iter().zip(&m.grad_norm).map(|(h, g)| 2.0 * h / g).collect();
        let fd = (area(t + dt)? - area(t - dt)?) / (2.0 * dt);
        checks.push(Check::equal(format!("derivative@{t}"), fd, m.integrate(&w), tol, 0.0));
    }
    let (h, abs) = volume_integrals(band, &grid, &|p, j| Ok([mean_curvature_of(j).map_err(|e| with_location(e, p))?]))?;
    let diff = area(band.b)? - area(band.a)?;
    checks.push(Check::equal("difference", diff, 2.0 * h[0], tol, 2e-3 * abs[0]));
    Ok(VerificationReport::new("area_derivative", cfg.clone(), checks, Vec::new()))
}
