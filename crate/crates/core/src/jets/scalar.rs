use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Smooth scalar arithmetic shared by `f64`, [`JetScalar`](super::JetScalar)
/// and [`MultiJet`](super::MultiJet).
///
/// Every generic consumer (the expression evaluator, Gaussian elimination,
/// model functions) only needs this surface. Domain checks (division by a
/// zero value, logarithm of a nonpositive value) are the caller's job: the
/// trait itself follows IEEE semantics.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(value: f64) -> Self;

    /// The real (value) slot.
    fn value(&self) -> f64;

    fn scale(self, k: f64) -> Self {
        self * Self::constant(k)
    }

    fn recip(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, r: f64) -> Self;

    /// `self^exponent` for a jet-valued exponent, via `exp(exponent * ln self)`.
    fn pow(self, exponent: Self) -> Self {
        (exponent * self.ln()).exp()
    }

    fn zero() -> Self {
        Self::constant(0.0)
    }

    fn one() -> Self {
        Self::constant(1.0)
    }
}

impl Scalar for f64 {
    fn constant(value: f64) -> Self {
        value
    }
    fn value(&self) -> f64 {
        *self
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, r: f64) -> Self {
        f64::powf(self, r)
    }
    fn pow(self, exponent: Self) -> Self {
        f64::powf(self, exponent)
    }
}

/// Successive derivatives `f^(k)(x)` for `k = 0..=order` of the supported
/// primitives. Used by both jet types to push a value through a primitive.
pub(crate) fn derivative_ladder(primitive: Primitive, x: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    match primitive {
        Primitive::Sin => {
            let (s, c) = x.sin_cos();
            let cycle = [s, c, -s, -c];
            out.extend((0..=order).map(|k| cycle[k % 4]));
        }
        Primitive::Cos => {
            let (s, c) = x.sin_cos();
            let cycle = [c, -s, -c, s];
            out.extend((0..=order).map(|k| cycle[k % 4]));
        }
        Primitive::Exp => {
            let e = x.exp();
            out.extend(std::iter::repeat_n(e, order + 1));
        }
        Primitive::Ln => {
            out.push(x.ln());
            // d^k/dx^k ln x = (-1)^(k-1) (k-1)! / x^k
            let mut fact = 1.0;
            for k in 1..=order {
                if k > 1 {
                    fact *= (k - 1) as f64;
                }
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                out.push(sign * fact / x.powi(k as i32));
            }
        }
        Primitive::Pow(r) => {
            // falling factorial r (r-1) ... (r-k+1) x^(r-k)
            let mut coeff = 1.0;
            for k in 0..=order {
                if k > 0 {
                    coeff *= r - (k - 1) as f64;
                }
                let v = if coeff == 0.0 {
                    0.0
                } else {
                    coeff * pow_real(x, r - k as f64)
                };
                out.push(v);
            }
        }
        Primitive::Recip => {
            // d^k/dx^k x^-1 = (-1)^k k! x^-(k+1)
            let mut fact = 1.0;
            for k in 0..=order {
                if k > 0 {
                    fact *= k as f64;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                out.push(sign * fact / x.powi(k as i32 + 1));
            }
        }
    }
    out
}

fn pow_real(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Primitive {
    Sin,
    Cos,
    Exp,
    Ln,
    Pow(f64),
    Recip,
}
