use rayon::prelude::*;
use serde::Serialize;

use super::{BandRegion, QuadratureConfig, Weight};
use crate::contour::NodeGrid;
use crate::error::{Error, Result};
use crate::field::ScalarField2;
use crate::geom::{pairwise_sum, Point2, Polyline, Rect};

/// One inequality cutting out part of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Constraint {
    /// `f >= v`
    AtLeast(f64),
    /// `f <= v`
    AtMost(f64),
    OutsideDisc { center: Point2, radius: f64 },
    InsideDisc { center: Point2, radius: f64 },
}

#[derive(Clone, Copy, PartialEq)]
enum Status {
    In,
    Out,
    Partial,
}

impl Constraint {
    /// Signed margin, nonnegative inside.
    fn phi(&self, p: Point2, f: f64) -> f64 {
        match *self {
            Constraint::AtLeast(v) => f - v,
            Constraint::AtMost(v) => v - f,
            Constraint::OutsideDisc { center, radius } => p.dist(center) - radius,
            Constraint::InsideDisc { center, radius } => radius - p.dist(center),
        }
    }

    fn status(&self, r: &Rect, corners: &[Point2; 4], fv: &[f64; 4]) -> Status {
        let from_range = |lo: f64, hi: f64, inside_low: bool| {
            // distance range [lo, hi] from the center to the rectangle
            let (all_in, all_out) = if inside_low { (lo >= 0.0, hi < 0.0) } else { (hi <= 0.0, lo > 0.0) };
            if all_in {
                Status::In
            } else if all_out {
                Status::Out
            } else {
                Status::Partial
            }
        };
        match *self {
            Constraint::AtLeast(_) | Constraint::AtMost(_) => {
                let phis: Vec<f64> = (0..4).map(|i| self.phi(corners[i], fv[i])).collect();
                if phis.iter().all(|&v| v >= 0.0) {
                    Status::In
                } else if phis.iter().all(|&v| v < 0.0) {
                    Status::Out
                } else {
                    Status::Partial
                }
            }
            Constraint::OutsideDisc { center, radius } => {
                let (dmin, dmax) = rect_distance_range(r, center);
                from_range(dmin - radius, dmax - radius, true)
            }
            Constraint::InsideDisc { center, radius } => {
                let (dmin, dmax) = rect_distance_range(r, center);
                from_range(dmin - radius, dmax - radius, false)
            }
        }
    }
}

fn rect_distance_range(r: &Rect, c: Point2) -> (f64, f64) {
    let dx = (r.x0 - c.x).max(0.0).max(c.x - r.x1);
    let dy = (r.y0 - c.y).max(0.0).max(c.y - r.y1);
    let fx = (c.x - r.x0).abs().max((c.x - r.x1).abs());
    let fy = (c.y - r.y0).abs().max((c.y - r.y1).abs());
    (dx.hypot(dy), fx.hypot(fy))
}

/// Interior of a closed level component, given as a polygon plus the side of the level it
/// lies on.
#[derive(Debug, Clone)]
struct Jordan {
    polygon: Polyline,
    side: Constraint,
}

/// A planar region described by constraints on the field and on distances to points.
#[derive(Clone)]
pub struct Region<'a> {
    field: &'a dyn ScalarField2,
    window: Rect,
    constraints: Vec<Constraint>,
    jordan: Option<Jordan>,
}

/// Result of a region quadrature: the integral and the integral of the absolute integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    pub abs_value: f64,
}

impl<'a> Region<'a> {
    /// The whole window.
    pub fn whole(field: &'a dyn ScalarField2, window: Rect) -> Self {
        Self { field, window, constraints: Vec::new(), jordan: None }
    }

    pub fn band(field: &'a dyn ScalarField2, a: f64, b: f64, window: Rect) -> Self {
        Self::whole(field, window).with(Constraint::AtLeast(a)).with(Constraint::AtMost(b))
    }

    /// The bounded region enclosed by a closed level component at value `level`.
    ///
    /// `sigma = +1` means the gradient points out of the region, so `f <= level` inside.
    pub fn jordan_interior(
        field: &'a dyn ScalarField2,
        boundary: &Polyline,
        level: f64,
        sigma: i32,
        window: Rect,
    ) -> Result<Self> {
        if !boundary.closed || boundary.len() < 3 {
            return Err(Error::NotJordan("boundary is not a closed polygon".into()));
        }
        let side = if sigma > 0 { Constraint::AtMost(level) } else { Constraint::AtLeast(level) };
        let mut r = Self::whole(field, window);
        r.jordan = Some(Jordan { polygon: boundary.clone(), side });
        Ok(r)
    }

    pub fn with(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    /// Remove the disc of radius `radius` around `center`.
    pub fn excise(self, center: Point2, radius: f64) -> Self {
        self.with(Constraint::OutsideDisc { center, radius })
    }

    pub fn field(&self) -> &'a dyn ScalarField2 {
        self.field
    }

    pub fn window(&self) -> &Rect {
        &self.window
    }

    fn band_bounds(&self) -> (f64, f64) {
        let mut lo = f64::NAN;
        let mut hi = f64::NAN;
        for c in &self.constraints {
            match *c {
                Constraint::AtLeast(v) => lo = v,
                Constraint::AtMost(v) => hi = v,
                _ => {}
            }
        }
        (lo, hi)
    }

    fn check_compact(&self, grid: &NodeGrid) -> Result<()> {
        if self.jordan.is_some() || !self.constraints.iter().any(|c| matches!(c, Constraint::AtLeast(_) | Constraint::AtMost(_))) {
            return Ok(());
        }
        let n = grid.n;
        let boundary = (0..=n).flat_map(|i| [(i, 0), (i, n), (0, i), (n, i)]);
        for (i, k) in boundary {
            let p = grid.node(i, k);
            let f = grid.at(i, k);
            if self.constraints.iter().all(|c| c.phi(p, f) >= 0.0) {
                let (a, b) = self.band_bounds();
                return Err(Error::NonCompactBand { a, b });
            }
        }
        Ok(())
    }

    /// Integrate `g` over the region on a `grid_n x grid_n` grid, subdividing cells cut by
    /// the boundary up to `depth` times and clipping the leaves linearly.
    pub fn integrate(&self, g: &Weight<'_>, grid_n: usize, depth: u32) -> Result<Integral> {
        let grid = NodeGrid::sample(self.field, &self.window, grid_n)?;
        self.integrate_on(&grid, g, depth)
    }

    pub fn integrate_on(&self, grid: &NodeGrid, g: &Weight<'_>, depth: u32) -> Result<Integral> {
        self.check_compact(grid)?;
        let n = grid.n;
        let mask = self.jordan.as_ref().map(|j| node_mask(&j.polygon, grid));
        let rows: Vec<Result<(f64, f64)>> = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut v = 0.0;
                let mut a = 0.0;
                for i in 0..n {
                    let mut active = self.constraints.clone();
                    if let (Some(mask), Some(j)) = (&mask, &self.jordan) {
                        let m = [mask[k][i], mask[k][i + 1], mask[k + 1][i + 1], mask[k + 1][i]];
                        if m.iter().all(|&b| !b) {
                            continue;
                        }
                        if !m.iter().all(|&b| b) {
                            active.push(j.side);
                        }
                    }
                    let p0 = grid.node(i, k);
                    let p2 = grid.node(i + 1, k + 1);
                    let rect = Rect { x0: p0.x, x1: p2.x, y0: p0.y, y1: p2.y };
                    let fv = [grid.at(i, k), grid.at(i + 1, k), grid.at(i + 1, k + 1), grid.at(i, k + 1)];
                    let (cv, ca) = self.cell(&rect, fv, &active, depth, g)?;
                    v += cv;
                    a += ca;
                }
                Ok((v, a))
            })
            .collect();
        let mut vals = Vec::with_capacity(n);
        let mut abss = Vec::with_capacity(n);
        for r in rows {
            let (v, a) = r?;
            vals.push(v);
            abss.push(a);
        }
        Ok(Integral { value: pairwise_sum(&vals), abs_value: pairwise_sum(&abss) })
    }

    fn eval_g(&self, p: Point2, g: &Weight<'_>) -> Result<f64> {
        let j = self.field.jet(p)?;
        let v = g(p, &j);
        if !v.is_finite() {
            return Err(Error::Domain(format!("integrand is not finite at ({}, {})", p.x, p.y)));
        }
        Ok(v)
    }

    fn gauss(&self, r: &Rect, g: &Weight<'_>) -> Result<(f64, f64)> {
        let (cx, cy) = (0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
        let d = 0.5 / 3f64.sqrt();
        let (dx, dy) = (d * r.width(), d * r.height());
        let w = 0.25 * r.width() * r.height();
        let mut v = 0.0;
        let mut a = 0.0;
        for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
            let gv = self.eval_g(Point2::new(cx + sx * dx, cy + sy * dy), g)?;
            v += w * gv;
            a += w * gv.abs();
        }
        Ok((v, a))
    }

    fn cell(&self, r: &Rect, fv: [f64; 4], active: &[Constraint], depth: u32, g: &Weight<'_>) -> Result<(f64, f64)> {
        let corners = [
            Point2::new(r.x0, r.y0),
            Point2::new(r.x1, r.y0),
            Point2::new(r.x1, r.y1),
            Point2::new(r.x0, r.y1),
        ];
        let mut partial = Vec::new();
        for c in active {
            match c.status(r, &corners, &fv) {
                Status::Out => return Ok((0.0, 0.0)),
                Status::Partial => partial.push(*c),
                Status::In => {}
            }
        }
        if partial.is_empty() {
            return self.gauss(r, g);
        }
        if depth == 0 {
            return self.clip_leaf(&corners, &fv, &partial, g);
        }
        let (xm, ym) = (0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
        let f = |x: f64, y: f64| self.field.value(Point2::new(x, y));
        let (fb, fr, ft, fl, fc) = (f(xm, r.y0)?, f(r.x1, ym)?, f(xm, r.y1)?, f(r.x0, ym)?, f(xm, ym)?);
        let kids = [
            (Rect { x0: r.x0, x1: xm, y0: r.y0, y1: ym }, [fv[0], fb, fc, fl]),
            (Rect { x0: xm, x1: r.x1, y0: r.y0, y1: ym }, [fb, fv[1], fr, fc]),
            (Rect { x0: xm, x1: r.x1, y0: ym, y1: r.y1 }, [fc, fr, fv[2], ft]),
            (Rect { x0: r.x0, x1: xm, y0: ym, y1: r.y1 }, [fl, fc, ft, fv[3]]),
        ];
        let mut v = 0.0;
        let mut a = 0.0;
        for (kr, kf) in kids {
            let (cv, ca) = self.cell(&kr, kf, &partial, depth - 1, g)?;
            v += cv;
            a += ca;
        }
        Ok((v, a))
    }

    fn clip_leaf(&self, corners: &[Point2; 4], fv: &[f64; 4], cons: &[Constraint], g: &Weight<'_>) -> Result<(f64, f64)> {
        let verts: Vec<(Point2, Vec<f64>)> =
            (0..4).map(|i| (corners[i], cons.iter().map(|c| c.phi(corners[i], fv[i])).collect())).collect();
        let mut v = 0.0;
        let mut a = 0.0;
        for tri in [[0, 1, 2], [0, 2, 3]] {
            let mut poly: Vec<(Point2, Vec<f64>)> = tri.iter().map(|&i| verts[i].clone()).collect();
            for j in 0..cons.len() {
                poly = clip(&poly, j);
                if poly.len() < 3 {
                    break;
                }
            }
            if poly.len() < 3 {
                continue;
            }
            let (area, centroid) = area_centroid(&poly);
            if area <= 0.0 {
                continue;
            }
            let gv = self.eval_g(centroid, g)?;
            v += area * gv;
            a += area * gv.abs();
        }
        Ok((v, a))
    }
}

fn clip(poly: &[(Point2, Vec<f64>)], j: usize) -> Vec<(Point2, Vec<f64>)> {
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 2);
    for i in 0..m {
        let (p, q) = (&poly[i], &poly[(i + 1) % m]);
        let (a, b) = (p.1[j], q.1[j]);
        if a >= 0.0 {
            out.push(p.clone());
        }
        if (a >= 0.0) != (b >= 0.0) {
            let s = a / (a - b);
            let phis = p.1.iter().zip(&q.1).map(|(x, y)| x + s * (y - x)).collect();
            out.push((p.0.lerp(q.0, s), phis));
        }
    }
    out
}

fn area_centroid(poly: &[(Point2, Vec<f64>)]) -> (f64, Point2) {
    let m = poly.len();
    let o = poly[0].0;
    let mut area = 0.0;
    let mut c = Point2::default();
    for i in 1..m - 1 {
        let (p, q) = (poly[i].0 - o, poly[i + 1].0 - o);
        let w = 0.5 * p.cross(q);
        area += w;
        c += (p + q) * (w / 3.0);
    }
    if area == 0.0 {
        return (0.0, o);
    }
    (area.abs(), o + c * (1.0 / area))
}

/// Point-in-polygon flags at every grid node, one scanline per row.
fn node_mask(poly: &Polyline, grid: &NodeGrid) -> Vec<Vec<bool>> {
    let segs: Vec<(Point2, Point2)> = poly.segments().collect();
    (0..=grid.n)
        .into_par_iter()
        .map(|k| {
            let y = grid.node(0, k).y;
            let mut xs: Vec<f64> = segs
                .iter()
                .filter(|(a, b)| (a.y > y) != (b.y > y))
                .map(|(a, b)| a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x))
                .collect();
            xs.sort_by(f64::total_cmp);
            (0..=grid.n)
                .map(|i| {
                    let x = grid.node(i, k).x;
                    let right = xs.len() - xs.partition_point(|&v| v <= x);
                    right % 2 == 1
                })
                .collect()
        })
        .collect()
}

/// `\iint g dA` over the band.
pub fn region_integral(band: &BandRegion<'_>, g: &Weight<'_>, cfg: &QuadratureConfig) -> Result<Integral> {
    band.region().integrate(g, cfg.grid_n, cfg.subdivision_depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldlang::{modulus_fields, parse, Kind};
    use std::f64::consts::PI;

    fn f2(src: &str) -> Box<dyn ScalarField2> {
        parse(src, Kind::Real2d).unwrap().to_field2().unwrap()
    }

    #[test]
    fn annulus_area_and_flux() {
        let f = f2("x^2+y^2");
        let r = Region::band(&*f, 1.0, 4.0, Rect::centered(3.0));
        let area = r.integrate(&|_, _| 1.0, 512, 4).unwrap();
        assert!((area.value / (3.0 * PI) - 1.0).abs() < 1e-4, "{}", area.value);
        let flux = r.integrate(&|_, j| j.grad_norm(), 512, 4).unwrap();
        assert!((flux.value / (28.0 * PI / 3.0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn thin_band_area() {
        // 1 <= r^2 <= 1 + 1e-3 has area pi * 1e-3
        let f = f2("x^2+y^2");
        let r = Region::band(&*f, 1.0, 1.001, Rect::centered(2.0));
        let area = r.integrate(&|_, _| 1.0, 256, 4).unwrap();
        assert!((area.value / (PI * 1e-3) - 1.0).abs() < 1e-4, "{}", area.value);
    }

    #[test]
    fn disc_minus_disc() {
        let f = f2("x");
        let c = Point2::new(0.1, -0.2);
        let r = Region::whole(&*f, Rect::centered(2.0))
            .with(Constraint::InsideDisc { center: c, radius: 1.0 })
            .excise(c, 0.25);
        let area = r.integrate(&|_, _| 1.0, 256, 4).unwrap();
        assert!((area.value / (PI * (1.0 - 0.0625)) - 1.0).abs() < 1e-5);
        // polar closed form of \iint 1/r over the unit disc
        let r = Region::whole(&*f, Rect::centered(2.0)).with(Constraint::InsideDisc { center: Point2::default(), radius: 1.0 });
        let v = r.clone().excise(Point2::default(), 0.1).integrate(&|p, _| 1.0 / p.norm(), 256, 4).unwrap();
        assert!((v.value - 2.0 * PI * 0.9).abs() < 1e-4);
    }

    #[test]
    fn band_touching_window_is_rejected() {
        let f = f2("x^2+y^2");
        let r = Region::band(&*f, 1.0, 4.0, Rect::centered(1.5));
        assert!(matches!(r.integrate(&|_, _| 1.0, 64, 2), Err(Error::NonCompactBand { .. })));
    }

    #[test]
    fn jordan_interior_area() {
        let f = f2("x^2+4*y^2");
        let boundary = Polyline::ellipse(Point2::default(), 2.0, 1.0, 2000);
        let r = Region::jordan_interior(&*f, &boundary, 4.0, 1, Rect::centered(3.0)).unwrap();
        let area = r.integrate(&|_, _| 1.0, 256, 4).unwrap();
        assert!((area.value / (2.0 * PI) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn lemniscate_band_area_is_positive_and_stable() {
        let e = parse("z^2-1", Kind::Complex).unwrap();
        let (_, sq) = modulus_fields(&e).unwrap();
        let r = Region::band(&sq, 0.25, 2.25, Rect::centered(2.0));
        let a1 = r.integrate(&|_, _| 1.0, 256, 4).unwrap().value;
        let a2 = r.integrate(&|_, _| 1.0, 512, 4).unwrap().value;
        assert!(a1 > 0.0 && ((a1 - a2) / a2).abs() < 1e-4);
    }

    #[test]
    fn integrand_failures_propagate() {
        let f = f2("x^2+y^2");
        let r = Region::band(&*f, 0.0, 1.0, Rect::centered(2.0));
        assert!(r.integrate(&|_, _| f64::NAN, 32, 1).is_err());
    }
}
