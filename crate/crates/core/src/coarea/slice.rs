use rayon::prelude::*;

use super::{BandRegion, QuadratureConfig, Weight};
use crate::contour::{extract_from_grid, NodeGrid};
use crate::error::{Error, Result};
use crate::field::ScalarField2;
use crate::geom::pairwise_sum;

/// Sorted critical values of the band's field lying in `[a, b]`, merged within roundoff.
pub fn critical_values_in(band: &BandRegion<'_>) -> Vec<f64> {
    let mut vs: Vec<f64> = band.interior_critical_points().iter().map(|c| c.value).collect();
    vs.sort_by(f64::total_cmp);
    vs.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    vs
}

fn is_critical(t: f64, critical: &[f64]) -> bool {
    critical.iter().any(|&c| (t - c).abs() <= 1e-9 * (1.0 + c.abs()))
}

/// `\int_{f = t} g / |grad f| ds` on a pre-sampled grid.
pub fn slice_on_grid(
    field: &dyn ScalarField2,
    grid: &NodeGrid,
    t: f64,
    g: &Weight<'_>,
    critical: &[f64],
) -> Result<f64> {
    if is_critical(t, critical) {
        return Err(Error::CriticalValue { t });
    }
    let ls = extract_from_grid(field, t, grid)?;
    if !ls.is_compact() {
        return Err(Error::NonCompactLevel { t });
    }
    let mut parts = Vec::new();
    for c in &ls.components {
        let v = &c.polyline.vertices;
        let w: Vec<f64> = v
            .iter()
            .map(|&p| {
                let j = field.jet(p)?;
                Ok(g(p, &j) / j.grad_norm())
            })
            .collect::<Result<_>>()?;
        let n = v.len();
        let terms: Vec<f64> = (0..n).map(|i| 0.5 * (w[i] + w[(i + 1) % n]) * v[i].dist(v[(i + 1) % n])).collect();
        parts.push(pairwise_sum(&terms));
    }
    let s = pairwise_sum(&parts);
    if !s.is_finite() {
        return Err(Error::Domain(format!("slice integral at t = {t} is not finite")));
    }
    Ok(s)
}

/// `\int_{f = t} g / |grad f| ds`, refused at critical values of the band.
pub fn slice_integral(band: &BandRegion<'_>, t: f64, g: &Weight<'_>, cfg: &QuadratureConfig) -> Result<f64> {
    let grid = NodeGrid::sample(band.field, &band.window, cfg.grid_n)?;
    slice_on_grid(band.field, &grid, t, g, &critical_values_in(band))
}

/// Nodes and weights for `\int_a^b F dt` when `F` may be singular (integrably) at the listed
/// critical values. Regular pieces use composite Simpson; next to a critical value `c` the
/// substitution `t = c + D u^2` removes the singularity and the `u = 0` node is dropped.
pub fn t_nodes(a: f64, b: f64, critical: &[f64], panels: usize) -> Vec<(f64, f64)> {
    let mut cuts = vec![(a, is_critical(a, critical))];
    for &c in critical {
        if c > a && c < b && !is_critical(a, &[c]) && !is_critical(b, &[c]) {
            cuts.push((c, true));
        }
    }
    cuts.push((b, is_critical(b, critical)));
    let mut pieces = Vec::new();
    for w in cuts.windows(2) {
        let ((l, lc), (r, rc)) = (w[0], w[1]);
        if lc && rc {
            let m = 0.5 * (l + r);
            pieces.push((l, lc, m, false));
            pieces.push((m, false, r, rc));
        } else {
            pieces.push((l, lc, r, rc));
        }
    }
    let mut out = Vec::new();
    for (l, lc, r, rc) in pieces {
        let share = (panels as f64 * (r - l) / (b - a)).round() as usize;
        let m = (share.max(2) + 1) / 2 * 2;
        let simpson = |i: usize| -> f64 {
            let base = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            base / (3.0 * m as f64)
        };
        if !lc && !rc {
            for i in 0..=m {
                out.push((l + (r - l) * i as f64 / m as f64, (r - l) * simpson(i)));
            }
        } else {
            let (c, d) = if lc { (l, r - l) } else { (r, l - r) };
            for i in 1..=m {
                let u = i as f64 / m as f64;
                out.push((c + d * u * u, 2.0 * d.abs() * u * simpson(i)));
            }
        }
    }
    out
}

/// `\int_a^b F(t) dt` with the node layout of [`t_nodes`], evaluating `F` in parallel.
pub fn t_integral<F>(a: f64, b: f64, critical: &[f64], panels: usize, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let nodes = t_nodes(a, b, critical, panels);
    let vals: Vec<Result<f64>> = nodes.par_iter().map(|&(t, w)| Ok(w * f(t)?)).collect();
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_sum(&vals))
}

/// `\int_a^b (\int_{f = t} g / |grad f| ds) dt`, the sliced side of the coarea formula.
pub fn sliced_integral(band: &BandRegion<'_>, g: &Weight<'_>, cfg: &QuadratureConfig) -> Result<f64> {
    let grid = NodeGrid::sample(band.field, &band.window, cfg.grid_n)?;
    let crit = critical_values_in(band);
    t_integral(band.a, band.b, &crit, cfg.t_subdivisions, |t| slice_on_grid(band.field, &grid, t, g, &crit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldlang::{parse, Kind};
    use crate::geom::Rect;
    use std::f64::consts::PI;

    #[test]
    fn simpson_nodes_integrate_cubics() {
        let v = t_integral(1.0, 4.0, &[], 8, |t| Ok(t * t * t)).unwrap();
        assert!((v - (256.0 - 1.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn log_singularity_at_interior_critical_value() {
        // \int_0^2 ln|t - 1| dt = -2
        let v = t_integral(0.0, 2.0, &[1.0], 128, |t| Ok((t - 1.0).abs().ln())).unwrap();
        assert!((v + 2.0).abs() < 1e-3, "{v}");
        assert!(t_nodes(0.0, 2.0, &[1.0], 128).iter().all(|&(t, _)| t != 1.0));
    }

    #[test]
    fn both_ends_critical() {
        // \int_0^1 ln(t (1 - t)) dt = -2
        let v = t_integral(0.0, 1.0, &[0.0, 1.0], 64, |t| Ok((t * (1.0 - t)).ln())).unwrap();
        assert!((v + 2.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn slice_of_bowl() {
        let f = parse("x^2+y^2", Kind::Real2d).unwrap().to_field2().unwrap();
        let band = BandRegion::new(&*f, 1.0, 4.0, Rect::centered(3.0)).unwrap();
        let cfg = QuadratureConfig::default();
        let s = slice_integral(&band, 4.0, &|_, _| 1.0, &cfg).unwrap();
        assert!((s - PI).abs() < 1e-4);
        let s = slice_integral(&band, 4.0, &|_, j| crate::field::kappa(j, 0.0).unwrap(), &cfg).unwrap();
        assert!((s - PI / 2.0).abs() < 1e-4);
        let crit = BandRegion::new(&*f, 0.0, 4.0, Rect::centered(3.0)).unwrap();
        assert!(matches!(slice_integral(&crit, 0.0, &|_, _| 1.0, &cfg), Err(Error::CriticalValue { .. })));
    }
}
