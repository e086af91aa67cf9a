//! Plane and space primitives shared by every module.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    pub fn lerp(self, o: Self, s: f64) -> Self {
        self + (o - self) * s
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn lerp(self, o: Self, s: f64) -> Self {
        self + (o - self) * s
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Point3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let ok = [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1;
        if !ok {
            return Err(Error::Config(format!(
                "window [{x0}, {x1}] x [{y0}, {y1}] must be finite and nonempty"
            )));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    /// The square `[-r, r]^2`.
    pub fn centered(r: f64) -> Self {
        Self { x0: -r, x1: r, y0: -r, y1: r }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

/// Axis-aligned box in space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub min: Point3,
    pub max: Point3,
}

impl Box3 {
    pub fn centered(r: f64) -> Self {
        Self { min: Point3::new(-r, -r, -r), max: Point3::new(r, r, r) }
    }

    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        if !(min.x < max.x && min.y < max.y && min.z < max.z) {
            return Err(Error::Config("box must be nonempty".into()));
        }
        Ok(Self { min, max })
    }
}

/// An ordered chain of vertices; when `closed`, the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub vertices: Vec<Point2>,
    pub closed: bool,
}

impl Polyline {
    pub fn new(vertices: Vec<Point2>, closed: bool) -> Self {
        Self { vertices, closed }
    }

    /// Closed polygon sampling `p(s)` at `n` equally spaced parameters in `[0, 1)`.
    pub fn sample_closed(n: usize, p: impl Fn(f64) -> Point2) -> Self {
        let vertices = (0..n).map(|i| p(i as f64 / n as f64)).collect();
        Self { vertices, closed: true }
    }

    pub fn circle(center: Point2, radius: f64, n: usize) -> Self {
        Self::ellipse(center, radius, radius, n)
    }

    pub fn ellipse(center: Point2, a: f64, b: f64, n: usize) -> Self {
        use std::f64::consts::TAU;
        Self::sample_closed(n, |s| {
            center + Point2::new(a * (TAU * s).cos(), b * (TAU * s).sin())
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as `(start, end)` pairs, including the closing edge when closed.
    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        pairwise_sum(&self.segments().map(|(p, q)| p.dist(q)).collect::<Vec<_>>())
    }

    /// Shoelace area, positive for counterclockwise traversal. Open chains are closed implicitly.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let terms: Vec<f64> = (0..n)
            .map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n]))
            .collect();
        0.5 * pairwise_sum(&terms)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Signed exterior angle at every vertex of a closed polyline, in `(-pi, pi]`.
    pub fn turning_angles(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i] - self.vertices[(i + n - 1) % n];
                let b = self.vertices[(i + 1) % n] - self.vertices[i];
                a.cross(b).atan2(a.dot(b))
            })
            .collect()
    }

    /// Brute-force scan for intersections between non-adjacent edges.
    pub fn is_simple(&self) -> bool {
        let segs: Vec<(Point2, Point2)> = self.segments().collect();
        let m = segs.len();
        for i in 0..m {
            for j in (i + 2)..m {
                if self.closed && i == 0 && j == m - 1 {
                    continue;
                }
                if segments_cross(segs[i], segs[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Ray-casting point-in-polygon test.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.segments() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if x > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self { vertices, closed: self.closed }
    }
}

fn segments_cross((p1, p2): (Point2, Point2), (q1, q2): (Point2, Point2)) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Sum by recursive halving; the tree depends only on the slice length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_measures() {
        let sq = Polyline::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
            true,
        );
        assert_eq!(sq.length(), 4.0);
        assert_eq!(sq.signed_area(), 1.0);
        assert_eq!(sq.reversed().signed_area(), -1.0);
        assert!(sq.is_simple());
        assert!(sq.contains(Point2::new(0.5, 0.5)));
        assert!(!sq.contains(Point2::new(1.5, 0.5)));
        let total: f64 = sq.turning_angles().iter().sum();
        assert!((total - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bow = Polyline::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            true,
        );
        assert!(!bow.is_simple());
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn rect_rejects_empty() {
        assert!(Rect::new(1.0, 0.0, 0.0, 1.0).is_err());
    }
}
