//! Second-order forward-mode dual numbers.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with respect to `N`
//! seed variables. Arithmetic propagates all three exactly (to roundoff), so evaluating an
//! expression on seeded jets yields exact first and second partial derivatives.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::{Complex64, ComplexFloat};
use num_traits::Zero;

/// Scalar base type for jets: `f64` for real fields, `Complex64` for analytic ones.
pub trait Number: ComplexFloat<Real = f64> + Send + Sync + 'static {
    const IS_REAL: bool;
    fn from_f64(v: f64) -> Self;
    fn imag_unit() -> Option<Self>;
    /// Admissible argument for `ln` and non-integer powers.
    fn log_ok(self) -> bool;
    fn conjugate(self) -> Self;
}

impl Number for f64 {
    const IS_REAL: bool = true;
    fn from_f64(v: f64) -> Self {
        v
    }
    fn imag_unit() -> Option<Self> {
        None
    }
    fn log_ok(self) -> bool {
        self > 0.0
    }
    fn conjugate(self) -> Self {
        self
    }
}

impl Number for Complex64 {
    const IS_REAL: bool = false;
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn imag_unit() -> Option<Self> {
        Some(Complex64::i())
    }
    fn log_ok(self) -> bool {
        !self.is_zero()
    }
    fn conjugate(self) -> Self {
        self.conj()
    }
}

/// Anything the evaluator can compute with: plain numbers or jets over them.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    type Base: Number;
    /// True when no derivatives are carried.
    const PLAIN: bool;

    fn constant(c: Self::Base) -> Self;
    fn base(&self) -> Self::Base;
    /// Apply a univariate function given its value and first two derivatives at `base()`.
    fn chain(self, f0: Self::Base, f1: Self::Base, f2: Self::Base) -> Self;
}

impl Scalar for f64 {
    type Base = f64;
    const PLAIN: bool = true;
    fn constant(c: f64) -> Self {
        c
    }
    fn base(&self) -> f64 {
        *self
    }
    fn chain(self, f0: f64, _: f64, _: f64) -> Self {
        f0
    }
}

impl Scalar for Complex64 {
    type Base = Complex64;
    const PLAIN: bool = true;
    fn constant(c: Complex64) -> Self {
        c
    }
    fn base(&self) -> Complex64 {
        *self
    }
    fn chain(self, f0: Complex64, _: Complex64, _: Complex64) -> Self {
        f0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T, const N: usize> {
    pub value: T,
    pub grad: [T; N],
    pub hess: [[T; N]; N],
}

impl<T: Number, const N: usize> Jet<T, N> {
    pub fn constant(value: T) -> Self {
        Self { value, grad: [T::zero(); N], hess: [[T::zero(); N]; N] }
    }

    /// The `i`-th coordinate function evaluated at `value`.
    pub fn variable(value: T, i: usize) -> Self {
        let mut j = Self::constant(value);
        j.grad[i] = T::one();
        j
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let mut out = *self;
        out.value = f(self.value);
        for i in 0..N {
            out.grad[i] = f(self.grad[i]);
            for k in 0..N {
                out.hess[i][k] = f(self.hess[i][k]);
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        self.map(Number::conjugate)
    }

    fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }
}

impl<T: Number, const N: usize> Add for Jet<T, N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        out.value = self.value + o.value;
        for i in 0..N {
            out.grad[i] = self.grad[i] + o.grad[i];
            for k in 0..N {
                out.hess[i][k] = self.hess[i][k] + o.hess[i][k];
            }
        }
        out
    }
}

impl<T: Number, const N: usize> Sub for Jet<T, N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Number, const N: usize> Neg for Jet<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Number, const N: usize> Mul for Jet<T, N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.value * o.value);
        for i in 0..N {
            out.grad[i] = self.grad[i] * o.value + self.value * o.grad[i];
            for k in 0..N {
                out.hess[i][k] = self.hess[i][k] * o.value
                    + self.value * o.hess[i][k]
                    + self.grad[i] * o.grad[k]
                    + o.grad[i] * self.grad[k];
            }
        }
        out
    }
}

impl<T: Number, const N: usize> Scalar for Jet<T, N> {
    type Base = T;
    const PLAIN: bool = false;

    fn constant(c: T) -> Self {
        Jet::constant(c)
    }

    fn base(&self) -> T {
        self.value
    }

    fn chain(self, f0: T, f1: T, f2: T) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..N {
            out.grad[i] = f1 * self.grad[i];
            for k in 0..N {
                out.hess[i][k] = f1 * self.hess[i][k] + f2 * self.grad[i] * self.grad[k];
            }
        }
        out
    }
}
