//! Integration over sublevel bands, level slices, the gradient flow between levels, and
//! improper integrals with excised critical points.

mod flow;
mod improper;
mod region;
mod slice;

use serde::{Deserialize, Serialize};

pub use flow::{flow_map, tube_parametrization, FlowConfig, Tube};
pub use improper::{improper_integral, improper_region_integral, ImproperIntegral};
pub use region::{region_integral, Constraint, Integral, Region};
pub use slice::{critical_values_in, slice_integral, slice_on_grid, sliced_integral, t_integral, t_nodes};

use crate::error::{Error, Result};
use crate::field::{find_critical_points, CriticalPoint, ScalarField2};
use crate::fieldlang::Jet2;
use crate::geom::{Point2, Rect};

/// Pointwise integrand, given the point and the field jet there.
pub type Weight<'a> = dyn Fn(Point2, &Jet2) -> f64 + Sync + 'a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub grid_n: usize,
    /// Strictly decreasing radii of the discs excised around singular points.
    pub excision_radii: Vec<f64>,
    /// Panels for the outer integral over level values.
    pub t_subdivisions: usize,
    /// Step in level value for the gradient-flow integrator.
    pub ode_step: f64,
    /// Recursion depth for cells cut by the region boundary.
    pub subdivision_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            grid_n: 512,
            excision_radii: vec![0.2, 0.15, 0.1, 0.05],
            t_subdivisions: 128,
            ode_step: 1e-3,
            subdivision_depth: 4,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self, window: &Rect) -> Result<()> {
        if self.grid_n < 16 {
            return Err(Error::Config("grid_n must be at least 16".into()));
        }
        if self.t_subdivisions < 2 {
            return Err(Error::Config("t_subdivisions must be at least 2".into()));
        }
        if !(self.ode_step > 0.0) {
            return Err(Error::Config("ode_step must be positive".into()));
        }
        let h = window.width().max(window.height()) / self.grid_n as f64;
        for w in self.excision_radii.windows(2) {
            if !(w[0] > w[1]) {
                return Err(Error::Config("excision radii must be strictly decreasing".into()));
            }
        }
        if let Some(&last) = self.excision_radii.last() {
            if last < 2.0 * h {
                return Err(Error::Config(format!(
                    "excision radius {last} is below two cell widths ({})",
                    2.0 * h
                )));
            }
        }
        Ok(())
    }
}

/// The sublevel band `a <= f <= b` inside a window.
#[derive(Clone)]
pub struct BandRegion<'a> {
    pub field: &'a dyn ScalarField2,
    pub a: f64,
    pub b: f64,
    pub window: Rect,
    /// Every critical point found in the window, sorted by location.
    pub critical_points: Vec<CriticalPoint>,
}

impl<'a> BandRegion<'a> {
    /// Build a band, locating critical points on a coarse grid.
    pub fn new(field: &'a dyn ScalarField2, a: f64, b: f64, window: Rect) -> Result<Self> {
        let critical_points = find_critical_points(field, &window, 64)?.points;
        Self::with_critical_points(field, a, b, window, critical_points)
    }

    pub fn with_critical_points(
        field: &'a dyn ScalarField2,
        a: f64,
        b: f64,
        window: Rect,
        critical_points: Vec<CriticalPoint>,
    ) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Config("band must satisfy a<b".into()));
        }
        Ok(Self { field, a, b, window, critical_points })
    }

    /// Critical points whose value lies in `[a, b]`.
    pub fn interior_critical_points(&self) -> Vec<CriticalPoint> {
        self.critical_points.iter().filter(|c| c.value >= self.a && c.value <= self.b).copied().collect()
    }

    pub fn region(&self) -> Region<'a> {
        Region::band(self.field, self.a, self.b, self.window)
    }

    /// The same field and window over another band.
    pub fn sub_band(&self, a: f64, b: f64) -> Result<Self> {
        Self::with_critical_points(self.field, a, b, self.window, self.critical_points.clone())
    }
}
