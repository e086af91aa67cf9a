use serde::Serialize;

use super::{BandRegion, QuadratureConfig, Region, Weight};
use crate::contour::NodeGrid;
use crate::error::{Error, Result};
use crate::geom::Point2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImproperIntegral {
    /// Extrapolation of `I(rho)` to `rho = 0`.
    pub value: f64,
    /// Fitted `dI/drho`.
    pub slope: f64,
    pub radii: Vec<f64>,
    pub samples: Vec<f64>,
    /// RMS deviation from the linear fit, relative to the fitted variation (plus a small
    /// fraction of the absolute integral).
    pub rel_fit_residual: f64,
    /// `\iint |g|` over the region with the smallest excision.
    pub abs_value: f64,
}

pub const MAX_FIT_RESIDUAL: f64 = 0.1;

/// Integrate `g` over `region` with discs of each radius excised around every singular point,
/// then extrapolate linearly in the radius to zero.
pub fn improper_integral(
    region: &Region<'_>,
    g: &Weight<'_>,
    singular: &[Point2],
    radii: &[f64],
    grid_n: usize,
    depth: u32,
) -> Result<ImproperIntegral> {
    let grid = NodeGrid::sample(region_field(region), region.window(), grid_n)?;
    if singular.is_empty() || radii.is_empty() {
        let r = region.integrate_on(&grid, g, depth)?;
        return Ok(ImproperIntegral {
            value: r.value,
            slope: 0.0,
            radii: Vec::new(),
            samples: vec![r.value],
            rel_fit_residual: 0.0,
            abs_value: r.abs_value,
        });
    }
    if radii.len() < 3 {
        return Err(Error::Config("need at least three excision radii".into()));
    }
    let mut samples = Vec::with_capacity(radii.len());
    let mut abs_value = 0.0;
    for &rho in radii {
        let mut r = region.clone();
        for &c in singular {
            r = r.excise(c, rho);
        }
        let res = r.integrate_on(&grid, g, depth)?;
        samples.push(res.value);
        abs_value = res.abs_value;
    }
    let m = radii.len() as f64;
    let rbar = radii.iter().sum::<f64>() / m;
    let ibar = samples.iter().sum::<f64>() / m;
    let sxx: f64 = radii.iter().map(|r| (r - rbar).powi(2)).sum();
    let sxy: f64 = radii.iter().zip(&samples).map(|(r, i)| (r - rbar) * (i - ibar)).sum();
    let slope = sxy / sxx;
    let value = ibar - slope * rbar;
    let rms = (radii.iter().zip(&samples).map(|(r, i)| (i - value - slope * r).powi(2)).sum::<f64>() / m).sqrt();
    let span = radii.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = slope.abs() * span + 1e-3 * abs_value;
    let rel_fit_residual = if scale > 0.0 { rms / scale } else { 0.0 };
    if rel_fit_residual > MAX_FIT_RESIDUAL {
        return Err(Error::DivergenceSuspected { residual: rel_fit_residual });
    }
    Ok(ImproperIntegral { value, slope, radii: radii.to_vec(), samples, rel_fit_residual, abs_value })
}

fn region_field<'a>(region: &Region<'a>) -> &'a dyn crate::field::ScalarField2 {
    region.field()
}

/// Improper `\iint g` over the band, excising the given singular points.
pub fn improper_region_integral(
    band: &BandRegion<'_>,
    g: &Weight<'_>,
    singular_points: &[Point2],
    cfg: &QuadratureConfig,
) -> Result<ImproperIntegral> {
    cfg.validate(&band.window)?;
    improper_integral(&band.region(), g, singular_points, &cfg.excision_radii, cfg.grid_n, cfg.subdivision_depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarea::Constraint;
    use crate::field::{kappa, ScalarField2};
    use crate::fieldlang::{parse, Kind};
    use crate::geom::Rect;
    use std::f64::consts::PI;

    fn f2(src: &str) -> Box<dyn ScalarField2> {
        parse(src, Kind::Real2d).unwrap().to_field2().unwrap()
    }

    #[test]
    fn saddle_curvature_integrates_to_zero() {
        let f = f2("x^2-y^2");
        let o = Point2::default();
        let r = Region::whole(&*f, Rect::centered(1.5)).with(Constraint::InsideDisc { center: o, radius: 1.0 });
        let res = improper_integral(&r, &|_, j| kappa(j, 0.0).unwrap(), &[o], &[0.2, 0.15, 0.1, 0.05], 256, 4).unwrap();
        assert!(res.value.abs() < 1e-6, "{res:?}");
    }

    #[test]
    fn inverse_radius_over_unit_disc() {
        let f = f2("x^2+y^2");
        let o = Point2::default();
        let r = Region::whole(&*f, Rect::centered(1.5)).with(Constraint::InsideDisc { center: o, radius: 1.0 });
        let res = improper_integral(&r, &|_, j| kappa(j, 0.0).unwrap(), &[o], &[0.2, 0.15, 0.1, 0.05], 256, 4).unwrap();
        assert!((res.value - 2.0 * PI).abs() < 1e-4, "{res:?}");
        assert!((res.slope + 2.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn inverse_square_is_flagged() {
        let f = f2("x^2+y^2");
        let o = Point2::default();
        let r = Region::whole(&*f, Rect::centered(1.5)).with(Constraint::InsideDisc { center: o, radius: 1.0 });
        let res = improper_integral(&r, &|p, _| 1.0 / p.norm_sq(), &[o], &[0.4, 0.2, 0.1, 0.05, 0.025], 256, 4);
        assert!(matches!(res, Err(Error::DivergenceSuspected { .. })), "{res:?}");
    }
}
