use num_complex::ComplexFloat;
use num_traits::{One, Zero};

use super::ast::{BinOp, Func, Node, Var};
use super::jet::{Number, Scalar};
use crate::error::{Error, Result};

fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

/// Evaluate `node` with `vars` bound to x, y, z (in that order; complex fields read `z`).
pub(crate) fn eval<S: Scalar>(node: &Node, vars: &[S; 3]) -> Result<S> {
    Ok(match node {
        Node::Num(v) => S::constant(S::Base::from_f64(*v)),
        Node::Pi => S::constant(S::Base::from_f64(std::f64::consts::PI)),
        Node::Imag => match S::Base::imag_unit() {
            Some(i) => S::constant(i),
            None => return domain("imaginary unit in a real field"),
        },
        Node::Var(v) => vars[match v {
            Var::X => 0,
            Var::Y => 1,
            Var::Z => 2,
        }],
        Node::Neg(inner) => -eval(inner, vars)?,
        Node::Bin(op, l, r) => {
            let a = eval(l, vars)?;
            match op {
                BinOp::Add => a + eval(r, vars)?,
                BinOp::Sub => a - eval(r, vars)?,
                BinOp::Mul => a * eval(r, vars)?,
                BinOp::Div => a * recip(eval(r, vars)?)?,
                BinOp::Pow => match r.as_integer() {
                    Some(n) => powi(a, n)?,
                    None => {
                        if !S::Base::IS_REAL {
                            return domain("non-integer exponent on a complex subexpression");
                        }
                        if !a.base().log_ok() {
                            return domain("non-integer power of a nonpositive base");
                        }
                        let e = eval(r, vars)?;
                        exp(e * ln(a)?)
                    }
                },
            }
        }
        Node::Call(func, arg) => {
            let a = eval(arg, vars)?;
            let v = a.base();
            match func {
                Func::Sin => a.chain(v.sin(), v.cos(), -v.sin()),
                Func::Cos => a.chain(v.cos(), -v.sin(), -v.cos()),
                Func::Exp => exp(a),
                Func::Log => ln(a)?,
                Func::Sqrt => {
                    let bad = if S::Base::IS_REAL { v.re() < 0.0 } else { false };
                    if bad || (v.is_zero() && !S::PLAIN) {
                        return domain("sqrt outside its differentiable domain");
                    }
                    let s = v.sqrt();
                    let half = S::Base::from_f64(0.5);
                    let quarter = S::Base::from_f64(0.25);
                    a.chain(s, half / s, -quarter / (s * v))
                }
                Func::Abs | Func::Re | Func::Im => {
                    return domain(format!("{} is not analytic", func.name()))
                }
            }
        }
    })
}

fn exp<S: Scalar>(a: S) -> S {
    let e = a.base().exp();
    a.chain(e, e, e)
}

fn ln<S: Scalar>(a: S) -> Result<S> {
    let v = a.base();
    if !v.log_ok() {
        return domain("log of a nonpositive (or zero) argument");
    }
    Ok(a.chain(v.ln(), v.recip(), -(v * v).recip()))
}

fn recip<S: Scalar>(a: S) -> Result<S> {
    let v = a.base();
    if v.is_zero() {
        return domain("division by zero");
    }
    let r = v.recip();
    Ok(a.chain(r, -r * r, S::Base::from_f64(2.0) * r * r * r))
}

fn powi<S: Scalar>(a: S, n: i32) -> Result<S> {
    let v = a.base();
    if n < 0 && v.is_zero() {
        return domain("negative power of zero");
    }
    let nf = S::Base::from_f64(n as f64);
    let f0 = if n == 0 { S::Base::one() } else { v.powi(n) };
    let f1 = if n == 0 { S::Base::zero() } else { nf * v.powi(n - 1) };
    let f2 = if n == 0 || n == 1 {
        S::Base::zero()
    } else {
        nf * S::Base::from_f64((n - 1) as f64) * v.powi(n - 2)
    };
    Ok(a.chain(f0, f1, f2))
}
