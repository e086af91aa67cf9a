//! A small expression language for scalar fields with exact first and second derivatives.
//!
//! Expressions are parsed into an AST ([`FieldExpr`]) and evaluated on second-order dual
//! numbers ([`jet::Jet`]), giving value, gradient and Hessian in one pass. Three kinds are
//! supported: real fields of `(x, y)`, real fields of `(x, y, z)`, and complex analytic
//! expressions in `z`. A complex expression may be wrapped once at the top level in
//! `abs(..)`, `abs(..)^2`, `re(..)` or `im(..)` to denote the corresponding real field.

pub mod ast;
mod eval;
pub mod jet;
mod parser;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::Zero;

use self::ast::{BinOp, Func, Node};
use self::eval::eval;
use self::jet::{Jet, Scalar};
use crate::error::{Error, Result};
use crate::field::{ScalarField2, ScalarField3};
use crate::geom::{Point2, Point3};

/// Value, gradient and Hessian of a planar field.
pub type Jet2 = Jet<f64, 2>;
/// Value, gradient and Hessian of a spatial field.
pub type Jet3 = Jet<f64, 3>;

impl Jet2 {
    pub fn gradient(&self) -> Point2 {
        Point2::new(self.grad[0], self.grad[1])
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad[0].hypot(self.grad[1])
    }
}

impl Jet3 {
    pub fn gradient(&self) -> Point3 {
        Point3::new(self.grad[0], self.grad[1], self.grad[2])
    }

    pub fn grad_norm(&self) -> f64 {
        self.gradient().norm()
    }
}

/// `f`, `f'`, `f''` of an analytic function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexJet {
    pub f: Complex64,
    pub fprime: Complex64,
    pub fsecond: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Real2d,
    Real3d,
    Complex,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Real2d => "real2d",
            Kind::Real3d => "real3d",
            Kind::Complex => "complex",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real2d" | "real" => Ok(Kind::Real2d),
            "real3d" => Ok(Kind::Real3d),
            "complex" => Ok(Kind::Complex),
            _ => Err(Error::Config(format!("unknown field kind '{s}'"))),
        }
    }
}

/// A parsed field expression together with its kind.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpr {
    kind: Kind,
    root: Node,
}

/// Parse `src` as a field of the given kind.
pub fn parse(src: &str, kind: Kind) -> Result<FieldExpr> {
    FieldExpr::parse(src, kind)
}

/// The real field denoted by a complex expression's top-level wrapper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComplexView<'a> {
    Analytic(&'a Node),
    Modulus(&'a Node),
    ModulusSquared(&'a Node),
    RealPart(&'a Node),
    ImagPart(&'a Node),
}

impl FieldExpr {
    pub fn parse(src: &str, kind: Kind) -> Result<Self> {
        Ok(Self { kind, root: parser::parse_node(src, kind)? })
    }

    /// Build from an AST without parsing; the caller is responsible for kind consistency.
    pub fn from_node(root: Node, kind: Kind) -> Self {
        Self { kind, root }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn complex_view(&self) -> ComplexView<'_> {
        match &self.root {
            Node::Call(Func::Abs, inner) => ComplexView::Modulus(inner),
            Node::Call(Func::Re, inner) => ComplexView::RealPart(inner),
            Node::Call(Func::Im, inner) => ComplexView::ImagPart(inner),
            Node::Bin(BinOp::Pow, base, exp) if exp.as_integer() == Some(2) => match &**base {
                Node::Call(Func::Abs, inner) => ComplexView::ModulusSquared(inner),
                _ => ComplexView::Analytic(&self.root),
            },
            root => ComplexView::Analytic(root),
        }
    }

    fn require(&self, kind: Kind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Domain(format!("expected a {kind} field, got {}", self.kind)));
        }
        Ok(())
    }

    fn analytic_root(&self) -> Result<&Node> {
        self.require(Kind::Complex)?;
        match self.complex_view() {
            ComplexView::Analytic(n) => Ok(n),
            _ => Err(Error::Domain("expression is not analytic".into())),
        }
    }

    pub fn value2(&self, p: Point2) -> Result<f64> {
        self.require(Kind::Real2d)?;
        eval(&self.root, &[p.x, p.y, 0.0])
    }

    pub fn eval_jet2(&self, p: Point2) -> Result<Jet2> {
        self.require(Kind::Real2d)?;
        let vars = [Jet::variable(p.x, 0), Jet::variable(p.y, 1), Jet::constant(0.0)];
        eval(&self.root, &vars)
    }

    pub fn value3(&self, p: Point3) -> Result<f64> {
        self.require(Kind::Real3d)?;
        eval(&self.root, &[p.x, p.y, p.z])
    }

    pub fn eval_jet3(&self, p: Point3) -> Result<Jet3> {
        self.require(Kind::Real3d)?;
        let vars = [Jet::variable(p.x, 0), Jet::variable(p.y, 1), Jet::variable(p.z, 2)];
        eval(&self.root, &vars)
    }

    pub fn complex_value(&self, z: Complex64) -> Result<Complex64> {
        eval(self.analytic_root()?, &[Complex64::zero(), Complex64::zero(), z])
    }

    pub fn eval_complex_jet(&self, z: Complex64) -> Result<ComplexJet> {
        complex_jet(self.analytic_root()?, z)
    }

    /// The real planar field this expression denotes (real2d, or a wrapped complex expression).
    pub fn to_field2(&self) -> Result<Box<dyn ScalarField2>> {
        let text = self.to_string();
        Ok(match self.kind {
            Kind::Real2d => Box::new(ExprField2(self.clone())),
            Kind::Real3d => return Err(Error::Domain("a real3d field is not planar".into())),
            Kind::Complex => match self.complex_view() {
                ComplexView::Modulus(n) => Box::new(Modulus::new(n.clone(), text)),
                ComplexView::ModulusSquared(n) => Box::new(ModulusSquared::new(n.clone(), text)),
                ComplexView::RealPart(n) => Box::new(HarmonicPart::new(n.clone(), false, text)),
                ComplexView::ImagPart(n) => Box::new(HarmonicPart::new(n.clone(), true, text)),
                ComplexView::Analytic(_) => {
                    return Err(Error::Domain(
                        "an analytic expression needs abs(), abs()^2, re() or im() to be a real field"
                            .into(),
                    ))
                }
            },
        })
    }

    pub fn to_field3(&self) -> Result<ExprField3> {
        self.require(Kind::Real3d)?;
        Ok(ExprField3(self.clone()))
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

fn complex_jet(node: &Node, z: Complex64) -> Result<ComplexJet> {
    let zero = Jet::<Complex64, 1>::constant(Complex64::zero());
    let j = eval(node, &[zero, zero, Jet::variable(z, 0)])?;
    Ok(ComplexJet { f: j.value, fprime: j.grad[0], fsecond: j.hess[0][0] })
}

/// Jet of `f(x + iy)` with respect to the real coordinates.
fn complex_jet_xy(node: &Node, p: Point2) -> Result<Jet<Complex64, 2>> {
    let mut z = Jet::<Complex64, 2>::constant(Complex64::new(p.x, p.y));
    z.grad = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
    let zero = Jet::constant(Complex64::zero());
    eval(node, &[zero, zero, z])
}

fn real_jet(j: &Jet<Complex64, 2>, imag: bool) -> Jet2 {
    let pick = |c: Complex64| if imag { c.im } else { c.re };
    let mut out = Jet2::constant(pick(j.value));
    for i in 0..2 {
        out.grad[i] = pick(j.grad[i]);
        for k in 0..2 {
            out.hess[i][k] = pick(j.hess[i][k]);
        }
    }
    out
}

/// A real2d expression as a field.
#[derive(Debug, Clone)]
pub struct ExprField2(pub FieldExpr);

impl ScalarField2 for ExprField2 {
    fn value(&self, p: Point2) -> Result<f64> {
        self.0.value2(p)
    }
    fn jet(&self, p: Point2) -> Result<Jet2> {
        self.0.eval_jet2(p)
    }
    fn describe(&self) -> String {
        self.0.to_string()
    }
}

/// A real3d expression as a field.
#[derive(Debug, Clone)]
pub struct ExprField3(pub FieldExpr);

impl ScalarField3 for ExprField3 {
    fn value(&self, p: Point3) -> Result<f64> {
        self.0.value3(p)
    }
    fn jet(&self, p: Point3) -> Result<Jet3> {
        self.0.eval_jet3(p)
    }
    fn describe(&self) -> String {
        self.0.to_string()
    }
}

/// `|f|^2` for an analytic `f`; smooth everywhere `f` is analytic.
#[derive(Debug, Clone)]
pub struct ModulusSquared {
    f: Node,
    text: String,
}

impl ModulusSquared {
    fn new(f: Node, text: String) -> Self {
        Self { f, text }
    }

    /// The analytic function whose modulus this is.
    pub fn analytic(&self) -> FieldExpr {
        FieldExpr::from_node(self.f.clone(), Kind::Complex)
    }
}

impl ScalarField2 for ModulusSquared {
    fn value(&self, p: Point2) -> Result<f64> {
        let zero = Complex64::zero();
        Ok(eval(&self.f, &[zero, zero, Complex64::new(p.x, p.y)])?.norm_sqr())
    }
    fn jet(&self, p: Point2) -> Result<Jet2> {
        let j = complex_jet_xy(&self.f, p)?;
        Ok(real_jet(&(j * j.conj()), false))
    }
    fn describe(&self) -> String {
        self.text.clone()
    }
}

/// `|f|` for an analytic `f`; not differentiable at zeros of `f`.
#[derive(Debug, Clone)]
pub struct Modulus {
    sq: ModulusSquared,
}

impl Modulus {
    fn new(f: Node, text: String) -> Self {
        Self { sq: ModulusSquared::new(f, text) }
    }

    pub fn analytic(&self) -> FieldExpr {
        self.sq.analytic()
    }
}

impl ScalarField2 for Modulus {
    fn value(&self, p: Point2) -> Result<f64> {
        Ok(self.sq.value(p)?.sqrt())
    }
    fn jet(&self, p: Point2) -> Result<Jet2> {
        let q = self.sq.jet(p)?;
        if q.value == 0.0 {
            return Err(Error::Domain(format!(
                "|f| is not differentiable at the zero ({}, {}) of f",
                p.x, p.y
            )));
        }
        let s = q.value.sqrt();
        Ok(q.chain(s, 0.5 / s, -0.25 / (s * q.value)))
    }
    fn describe(&self) -> String {
        self.sq.text.clone()
    }
}

/// `Re f` or `Im f` of an analytic `f`, a harmonic field.
#[derive(Debug, Clone)]
pub struct HarmonicPart {
    f: Node,
    imag: bool,
    text: String,
}

impl HarmonicPart {
    fn new(f: Node, imag: bool, text: String) -> Self {
        Self { f, imag, text }
    }
}

impl ScalarField2 for HarmonicPart {
    fn value(&self, p: Point2) -> Result<f64> {
        let zero = Complex64::zero();
        let w = eval(&self.f, &[zero, zero, Complex64::new(p.x, p.y)])?;
        Ok(if self.imag { w.im } else { w.re })
    }
    fn jet(&self, p: Point2) -> Result<Jet2> {
        Ok(real_jet(&complex_jet_xy(&self.f, p)?, self.imag))
    }
    fn describe(&self) -> String {
        self.text.clone()
    }
}

/// The fields `|f|` and `|f|^2` of an analytic expression.
pub fn modulus_fields(expr: &FieldExpr) -> Result<(Modulus, ModulusSquared)> {
    let f = expr.analytic_root()?.clone();
    let m = Modulus::new(f.clone(), format!("abs({expr})"));
    let sq = ModulusSquared::new(f, format!("abs({expr})^2"));
    Ok((m, sq))
}
