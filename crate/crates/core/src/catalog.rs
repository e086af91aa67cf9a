//! Built-in fields with the bands and windows used by the verification suites.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField2;
use crate::fieldlang::{modulus_fields, parse, ExprField3, FieldExpr, Kind};
use crate::geom::{Box3, Point2, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Annulus,
    Lemniscate,
    Saddle,
    Sphere,
    Torus,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Annulus, Preset::Lemniscate, Preset::Saddle, Preset::Sphere, Preset::Torus];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Annulus => "annulus",
            Preset::Lemniscate => "lemniscate",
            Preset::Saddle => "saddle",
            Preset::Sphere => "sphere",
            Preset::Torus => "torus",
        }
    }

    pub fn entry(self) -> CatalogEntry {
        match self {
            Preset::Annulus => CatalogEntry {
                source: "x^2+y^2",
                kind: Kind::Real2d,
                band: (1.0, 4.0),
                half_width: 3.0,
                disc: None,
            },
            // the band is in values of |z^2 - 1|^2
            Preset::Lemniscate => CatalogEntry {
                source: "z^2-1",
                kind: Kind::Complex,
                band: (0.25, 2.25),
                half_width: 2.0,
                disc: None,
            },
            Preset::Saddle => CatalogEntry {
                source: "x^2-y^2",
                kind: Kind::Real2d,
                band: (-1.0, 1.0),
                half_width: 1.5,
                disc: Some((Point2::default(), 1.0)),
            },
            Preset::Sphere => CatalogEntry {
                source: "x^2+y^2+z^2",
                kind: Kind::Real3d,
                band: (1.0, 4.0),
                half_width: 2.5,
                disc: None,
            },
            Preset::Torus => CatalogEntry {
                source: "(sqrt(x^2+y^2)-1)^2+z^2",
                kind: Kind::Real3d,
                band: (0.09, 0.25),
                half_width: 1.75,
                disc: None,
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset '{s}' (expected annulus, lemniscate, saddle, sphere or torus)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub source: &'static str,
    pub kind: Kind,
    pub band: (f64, f64),
    /// The window is the square (or cube) `[-half_width, half_width]`.
    pub half_width: f64,
    /// For fields without a compact band: a disc around a critical point.
    pub disc: Option<(Point2, f64)>,
}

impl CatalogEntry {
    pub fn expr(&self) -> Result<FieldExpr> {
        parse(self.source, self.kind)
    }

    pub fn window(&self) -> Rect {
        Rect::centered(self.half_width)
    }

    pub fn box3(&self) -> Box3 {
        Box3::centered(self.half_width)
    }

    pub fn field3(&self) -> Result<ExprField3> {
        self.expr()?.to_field3()
    }
}

/// The planar field a real suite runs on: the expression itself, or `|f|^2` for a complex
/// expression.
pub fn planar_field(expr: &FieldExpr) -> Result<Box<dyn ScalarField2>> {
    match expr.kind() {
        Kind::Real2d => expr.to_field2(),
        Kind::Complex => Ok(Box::new(modulus_fields(expr)?.1)),
        Kind::Real3d => Err(Error::Config("a planar suite needs a real2d or complex field".into())),
    }
}
