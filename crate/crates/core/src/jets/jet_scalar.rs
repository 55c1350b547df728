use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::{derivative_ladder, Primitive, Scalar};

/// A value of the truncated algebra `R[εs, εt] / (εs², εt²)`.
///
/// The four slots hold a function value and its partials along two
/// independent parameters `s` and `t` evaluated at `(0, 0)`: `ds`, `dt`
/// and the mixed `dst`. This is exactly the data of a second tangent
/// vector, so every lift to `TTQ` is computed with this type.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct JetScalar {
    pub val: f64,
    pub ds: f64,
    pub dt: f64,
    pub dst: f64,
}

impl JetScalar {
    pub const fn new(val: f64, ds: f64, dt: f64, dst: f64) -> Self {
        Self { val, ds, dt, dst }
    }

    /// Embeds a real constant. This is a ring morphism `R -> jets`.
    pub const fn constant(val: f64) -> Self {
        Self::new(val, 0.0, 0.0, 0.0)
    }

    /// A classical dual number: only the `s` direction is populated.
    pub const fn dual(val: f64, ds: f64) -> Self {
        Self::new(val, ds, 0.0, 0.0)
    }

    /// Exchanges the two parameters.
    pub const fn swapped(self) -> Self {
        Self::new(self.val, self.dt, self.ds, self.dst)
    }

    fn lift(self, primitive: Primitive) -> Self {
        let d = derivative_ladder(primitive, self.val, 2);
        Self {
            val: d[0],
            ds: d[1] * self.ds,
            dt: d[1] * self.dt,
            dst: d[1] * self.dst + d[2] * self.ds * self.dt,
        }
    }
}

impl fmt::Debug for JetScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Jet({} + {}·εs + {}·εt + {}·εsεt)",
            self.val, self.ds, self.dt, self.dst
        )
    }
}

impl Add for JetScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.val + rhs.val,
            self.ds + rhs.ds,
            self.dt + rhs.dt,
            self.dst + rhs.dst,
        )
    }
}

impl Sub for JetScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.val - rhs.val,
            self.ds - rhs.ds,
            self.dt - rhs.dt,
            self.dst - rhs.dst,
        )
    }
}

impl Mul for JetScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.val * rhs.val,
            self.ds * rhs.val + self.val * rhs.ds,
            self.dt * rhs.val + self.val * rhs.dt,
            self.dst * rhs.val + self.ds * rhs.dt + self.dt * rhs.ds + self.val * rhs.dst,
        )
    }
}

impl Div for JetScalar {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Neg for JetScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.val, -self.ds, -self.dt, -self.dst)
    }
}

impl Scalar for JetScalar {
    fn constant(value: f64) -> Self {
        JetScalar::constant(value)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn scale(self, k: f64) -> Self {
        Self::new(self.val * k, self.ds * k, self.dt * k, self.dst * k)
    }
    fn recip(self) -> Self {
        self.lift(Primitive::Recip)
    }
    fn sin(self) -> Self {
        self.lift(Primitive::Sin)
    }
    fn cos(self) -> Self {
        self.lift(Primitive::Cos)
    }
    fn exp(self) -> Self {
        self.lift(Primitive::Exp)
    }
    fn ln(self) -> Self {
        self.lift(Primitive::Ln)
    }
    fn sqrt(self) -> Self {
        self.lift(Primitive::Pow(0.5))
    }
    fn powi(self, n: i32) -> Self {
        self.lift(Primitive::Pow(n as f64))
    }
    fn powf(self, r: f64) -> Self {
        self.lift(Primitive::Pow(r))
    }
}
