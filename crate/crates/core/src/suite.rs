//! Identity suites: which checks run on which inputs, and the JSON-lines records they emit.

use serde::{Deserialize, Serialize};

use crate::catalog::{planar_field, Preset};
use crate::coarea::BandRegion;
use crate::error::{Error, Result};
use crate::evolve::{csf_length_law_check, resample_uniform, verify_csf_area_law, verify_csf_circle, verify_parallel_offset};
use crate::field::ScalarField2;
use crate::fieldlang::{parse, FieldExpr, Kind};
use crate::geom::{Box3, Point2, Polyline, Rect};
use crate::identities::{self as id, Check, VerificationReport, VerifyOptions};
use crate::surface3d::{self, Band3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The identity's hypotheses do not hold for this input.
    Skipped,
    Error,
}

/// One line of suite output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub case: String,
    pub identity_id: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<VerificationReport>,
}

impl SuiteRecord {
    fn from_result(case: &str, identity_id: &str, r: Result<VerificationReport>) -> Self {
        match r {
            Ok(rep) => Self {
                case: case.into(),
                identity_id: rep.identity_id.clone(),
                status: if rep.pass { Status::Pass } else { Status::Fail },
                message: None,
                report: Some(rep),
            },
            Err(Error::Precondition(m)) => Self {
                case: case.into(),
                identity_id: identity_id.into(),
                status: Status::Skipped,
                message: Some(m),
                report: None,
            },
            Err(e) => Self {
                case: case.into(),
                identity_id: identity_id.into(),
                status: Status::Error,
                message: Some(e.to_string()),
                report: None,
            },
        }
    }

    /// Skipped records do not count against a suite.
    pub fn ok(&self) -> bool {
        matches!(self.status, Status::Pass | Status::Skipped)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Real planar identities on the band `[a, b]` of `field`.
pub fn run_real(case: &str, field: &dyn ScalarField2, a: f64, b: f64, window: Rect, opts: &VerifyOptions) -> Result<Vec<SuiteRecord>> {
    let band = BandRegion::new(field, a, b, window)?;
    opts.cfg.validate(&window)?;
    let rec = |name: &str, r| SuiteRecord::from_result(case, name, r);
    Ok(vec![
        rec("coarea", id::verify_coarea(&band, opts)),
        rec("main_a", id::verify_main_a(&band, &|_| 1.0, opts)),
        rec("main_b", id::verify_main_b(&band, opts)),
        rec("jordan_boundary", id::verify_jordan_boundary(field, b, None, &window, opts)),
        rec("minmax_estimate", id::verify_minmax_estimate(&band, opts)),
        rec("prop42", id::verify_prop42(&band, opts)),
        rec("area_perimeter", id::verify_area_perimeter(&band, opts)),
    ])
}

/// Identities on a disc around a critical point, for fields without a compact band.
pub fn run_disc(case: &str, field: &dyn ScalarField2, center: Point2, radius: f64, window: Rect, opts: &VerifyOptions) -> Result<Vec<SuiteRecord>> {
    opts.cfg.validate(&window)?;
    Ok(vec![SuiteRecord::from_result(
        case,
        "saddle_symmetry",
        id::verify_saddle_symmetry(field, center, radius, &window, opts),
    )])
}

/// Identities for `a <= |f| <= b` of an analytic `f`.
pub fn run_complex(case: &str, expr: &FieldExpr, a: f64, b: f64, window: Rect, opts: &VerifyOptions) -> Result<Vec<SuiteRecord>> {
    if expr.kind() != Kind::Complex {
        return Err(Error::Config("the complex suite needs a field of kind complex".into()));
    }
    if !(a < b) {
        return Err(Error::Config("band must satisfy a<b".into()));
    }
    opts.cfg.validate(&window)?;
    Ok(vec![
        SuiteRecord::from_result(case, "complex", id::verify_complex(expr, a, b, &window, opts)),
        SuiteRecord::from_result(case, "complex_lower_bound", id::verify_complex_lower_bound(expr, b, &window, opts)),
    ])
}

fn circle_characterization_report(tol: f64) -> Result<VerificationReport> {
    let circle = id::circle_characterization(&Polyline::circle(Point2::default(), 1.0, 256), tol)?;
    let ellipse = id::circle_characterization(&Polyline::ellipse(Point2::default(), 2.0, 1.0, 1024), tol)?;
    let sq: Vec<Point2> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)].iter().map(|&(x, y)| Point2::new(x, y)).collect();
    let square = id::circle_characterization(&Polyline::new(sq, true), tol)?;
    let checks = vec![
        Check::equal("circle", circle.deficit, 0.0, tol, 1.0),
        Check::less("ellipse", 0.07, ellipse.deficit, 0.0),
        Check::equal("square", square.deficit, 4.0 / std::f64::consts::PI - 1.0, tol, 1.0),
    ];
    let notes = vec![format!("is_circle: circle {}, ellipse {}, square {}", circle.is_circle, ellipse.is_circle, square.is_circle)];
    Ok(VerificationReport::new("circle_characterization", Default::default(), checks, notes))
}

/// Parallel offsets, curve-shortening flow and the circle characterization on fixed curves.
pub fn run_evolve(opts: &VerifyOptions) -> Vec<SuiteRecord> {
    let case = "curves";
    let circle = Polyline::circle(Point2::default(), 1.0, 1024);
    let ellipse = resample_uniform(&Polyline::ellipse(Point2::default(), 2.0, 1.0, 4096), 1024);
    let mut out = vec![
        SuiteRecord::from_result(case, "parallel_offset", verify_parallel_offset(&circle, &[0.5, 1.0], opts.tol("parallel_offset"))),
        SuiteRecord::from_result(
            case,
            "parallel_offset",
            verify_parallel_offset(&ellipse, &[0.5, 1.0], opts.tol("parallel_offset_ellipse")).map(|mut r| {
                r.identity_id = "parallel_offset_ellipse".into();
                r
            }),
        ),
        SuiteRecord::from_result(case, "csf_circle", verify_csf_circle(1.0, 256, 0.4, opts.tol("csf_circle"), 0.02)),
    ];
    let csf_ellipse = Polyline::ellipse(Point2::default(), 2.0, 1.0, 256);
    match verify_csf_area_law(&csf_ellipse, 0.8, opts.tol("csf_area_law")) {
        Ok((rep, trace)) => {
            out.push(SuiteRecord::from_result(case, "csf_area_law", Ok(rep)));
            out.push(SuiteRecord::from_result(
                case,
                "csf_length_law",
                csf_length_law_check(&trace, Some(opts.tol("csf_length_law"))),
            ));
        }
        Err(e) => out.push(SuiteRecord::from_result(case, "csf_area_law", Err(e))),
    }
    out.push(SuiteRecord::from_result(
        case,
        "circle_characterization",
        circle_characterization_report(opts.tol("circle_characterization")),
    ));
    out
}

/// Volume and surface identities on the band `[a, b]` of a field on space.
pub fn run_surface(case: &str, expr: &FieldExpr, a: f64, b: f64, window: Box3, opts: &VerifyOptions) -> Result<Vec<SuiteRecord>> {
    let field = expr.to_field3()?;
    let band = Band3::new(&field, a, b, window)?;
    Ok(vec![
        SuiteRecord::from_result(case, "coarea3d", surface3d::verify_coarea3d(&band, opts)),
        SuiteRecord::from_result(case, "gauss", surface3d::verify_gauss_identities(&band, opts)),
        SuiteRecord::from_result(case, "area_derivative", surface3d::verify_area_derivative(&band, opts)),
    ])
}

fn with_tolerance(opts: &VerifyOptions, id: &str, tol: f64) -> VerifyOptions {
    let mut o = opts.clone();
    o.tolerances.entry(id.into()).or_insert(tol);
    o
}

/// Every suite over the built-in catalog, in a fixed order.
pub fn run_all(planar: &VerifyOptions, spatial: &VerifyOptions) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    for preset in [Preset::Annulus, Preset::Lemniscate, Preset::Saddle] {
        let e = preset.entry();
        let field = planar_field(&e.expr()?)?;
        match e.disc {
            Some((c, r)) => out.extend(run_disc(preset.name(), &*field, c, r, e.window(), planar)?),
            None => out.extend(run_real(preset.name(), &*field, e.band.0, e.band.1, e.window(), planar)?),
        }
    }
    let aniso = parse("2*x^2+y^2", Kind::Real2d)?.to_field2()?;
    out.extend(run_real("anisotropic", &*aniso, 1.0, 4.0, Rect::centered(3.0), planar)?);
    let z2 = parse("z^2", Kind::Complex)?;
    out.extend(run_complex("z^2", &z2, 1.0, 4.0, Rect::centered(3.0), &with_tolerance(planar, "complex", 1e-3))?);
    let lem = parse("z^2-1", Kind::Complex)?;
    out.extend(run_complex("z^2-1", &lem, 0.5, 1.5, Rect::centered(2.0), planar)?);
    out.extend(run_evolve(planar));
    for preset in [Preset::Sphere, Preset::Torus] {
        let e = preset.entry();
        let opts = if preset == Preset::Sphere { with_tolerance(spatial, "area_derivative", 1e-3) } else { spatial.clone() };
        out.extend(run_surface(preset.name(), &e.expr()?, e.band.0, e.band.1, e.box3(), &opts)?);
    }
    Ok(out)
}
