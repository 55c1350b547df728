use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::{derivative_ladder, Primitive, Scalar};
use super::JetScalar;

/// Maximum number of nested differentiation levels a [`MultiJet`] carries.
pub const MAX_DEPTH: usize = 5;
const CAPACITY: usize = 1 << MAX_DEPTH;

/// A value of `R[ε0, …, ε(d-1)] / (εi²)` for `d <= MAX_DEPTH`.
///
/// Coefficients are indexed by bitmask: bit `i` set means the monomial
/// contains `εi`. Each generator is a fresh first-order perturbation, so
/// derivatives can be nested: differentiating a function that already
/// takes `MultiJet` arguments of depth `d` seeds generator `d` and reads
/// the coefficients that contain it. This is how exterior derivatives of
/// forms whose coefficients are themselves derivatives stay exact.
#[derive(Clone, Copy, PartialEq)]
pub struct MultiJet {
    depth: u8,
    coeffs: [f64; CAPACITY],
}

impl MultiJet {
    pub fn constant(value: f64) -> Self {
        let mut coeffs = [0.0; CAPACITY];
        coeffs[0] = value;
        Self { depth: 0, coeffs }
    }

    pub fn from_coeffs(depth: usize, coeffs: &[f64]) -> Self {
        assert!(
            depth <= MAX_DEPTH,
            "jet nesting depth {depth} exceeds {MAX_DEPTH}"
        );
        assert_eq!(
            coeffs.len(),
            1 << depth,
            "coefficient count must be 2^depth"
        );
        let mut out = [0.0; CAPACITY];
        out[..coeffs.len()].copy_from_slice(coeffs);
        Self {
            depth: depth as u8,
            coeffs: out,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of the monomial selected by `mask`.
    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..self.len()]
    }

    fn len(&self) -> usize {
        1 << self.depth
    }

    fn with_depth(mut self, depth: usize) -> Self {
        assert!(
            depth <= MAX_DEPTH,
            "jet nesting depth {depth} exceeds {MAX_DEPTH}"
        );
        if depth > self.depth() {
            self.depth = depth as u8;
        }
        self
    }

    /// Returns `self + direction · ε_level`, raising the depth to `level + 1`.
    pub fn perturbed(self, level: usize, direction: f64) -> Self {
        let mut out = self.with_depth(level + 1);
        out.coeffs[1 << level] += direction;
        out
    }

    /// Splits along generator `level`: `self = a + b·ε_level` with `a`, `b`
    /// free of `ε_level`. Both parts come back at depth `level`.
    pub fn split(self, level: usize) -> (Self, Self) {
        let bit = 1 << level;
        let n = 1 << level;
        let mut a = [0.0; CAPACITY];
        let mut b = [0.0; CAPACITY];
        if self.depth() <= level {
            a[..self.len()].copy_from_slice(self.coeffs());
        } else {
            debug_assert_eq!(
                self.depth(),
                level + 1,
                "split must target the top generator"
            );
            a[..n].copy_from_slice(&self.coeffs[..n]);
            b[..n].copy_from_slice(&self.coeffs[bit..bit + n]);
        }
        (
            Self {
                depth: level as u8,
                coeffs: a,
            },
            Self {
                depth: level as u8,
                coeffs: b,
            },
        )
    }

    fn lift(self, primitive: Primitive) -> Self {
        let depth = self.depth();
        let ladder = derivative_ladder(primitive, self.value(), depth);
        if depth == 0 {
            return Self::constant(ladder[0]);
        }
        let mut h = self;
        h.coeffs[0] = 0.0;
        let mut out = Self::constant(ladder[0]).with_depth(depth);
        let mut power = h;
        let mut factorial = 1.0;
        for (k, dk) in ladder.iter().enumerate().skip(1) {
            factorial *= k as f64;
            let c = dk / factorial;
            for m in 0..(1 << depth) {
                out.coeffs[m] += c * power.coeffs[m];
            }
            if k < depth {
                power = power * h;
            }
        }
        out
    }
}

impl Default for MultiJet {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl From<f64> for MultiJet {
    fn from(v: f64) -> Self {
        Self::constant(v)
    }
}

impl From<JetScalar> for MultiJet {
    /// Generator 0 carries `s`, generator 1 carries `t`.
    fn from(j: JetScalar) -> Self {
        Self::from_coeffs(2, &[j.val, j.ds, j.dt, j.dst])
    }
}

impl From<MultiJet> for JetScalar {
    fn from(m: MultiJet) -> Self {
        assert!(
            m.depth() <= 2,
            "a two-parameter jet cannot hold depth {}",
            m.depth()
        );
        JetScalar::new(m.coeffs[0], m.coeffs[1], m.coeffs[2], m.coeffs[3])
    }
}

impl fmt::Debug for MultiJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiJet(depth {}, {:?})", self.depth, self.coeffs())
    }
}

impl Add for MultiJet {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let depth = self.depth.max(rhs.depth);
        let mut out = self.with_depth(depth as usize);
        for m in 0..(1usize << depth) {
            out.coeffs[m] += rhs.coeffs[m];
        }
        out
    }
}

impl Sub for MultiJet {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let depth = self.depth.max(rhs.depth);
        let mut out = self.with_depth(depth as usize);
        for m in 0..(1usize << depth) {
            out.coeffs[m] -= rhs.coeffs[m];
        }
        out
    }
}

impl Mul for MultiJet {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let depth = self.depth.max(rhs.depth);
        if depth == 0 {
            return Self::constant(self.coeffs[0] * rhs.coeffs[0]);
        }
        let mut coeffs = [0.0; CAPACITY];
        for (k, slot) in coeffs.iter_mut().enumerate().take(1 << depth) {
            // sum over submasks i of k
            let mut acc = 0.0;
            let mut i = k;
            loop {
                acc += self.coeffs[i] * rhs.coeffs[k ^ i];
                if i == 0 {
                    break;
                }
                i = (i - 1) & k;
            }
            *slot = acc;
        }
        Self { depth, coeffs }
    }
}

impl Div for MultiJet {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Neg for MultiJet {
    type Output = Self;
    fn neg(mut self) -> Self {
        for c in self.coeffs.iter_mut().take(1 << self.depth) {
            *c = -*c;
        }
        self
    }
}

impl Scalar for MultiJet {
    fn constant(value: f64) -> Self {
        MultiJet::constant(value)
    }
    fn value(&self) -> f64 {
        self.coeffs[0]
    }
    fn scale(mut self, k: f64) -> Self {
        for c in self.coeffs.iter_mut().take(1 << self.depth) {
            *c *= k;
        }
        self
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

/// Evaluates `f` at `x` and at `x` perturbed along `direction`, returning
/// `(f(x), Df(x)·direction)` as jets of the same depth as the input.
pub fn directional<F>(x: &[MultiJet], direction: &[f64], f: F) -> (Vec<MultiJet>, Vec<MultiJet>)
where
    F: FnOnce(&[MultiJet]) -> Vec<MultiJet>,
{
    let level = x.iter().map(MultiJet::depth).max().unwrap_or(0);
    let seeded: Vec<MultiJet> = x
        .iter()
        .zip(direction)
        .map(|(xi, di)| xi.perturbed(level, *di))
        .collect();
    f(&seeded).into_iter().map(|y| y.split(level)).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_level_jet_agrees_with_jet_scalar() {
        let a = JetScalar::new(0.8, 1.5, -0.5, 0.3);
        let b = JetScalar::new(1.7, -0.2, 0.9, 1.1);
        let ma = MultiJet::from(a);
        let mb = MultiJet::from(b);
        let cases: Vec<(JetScalar, MultiJet)> = vec![
            (a * b, ma * mb),
            (a / b, ma / mb),
            (a.sin() + b.cos(), ma.sin() + mb.cos()),
            (b.ln() * a.exp(), mb.ln() * ma.exp()),
            (b.sqrt() - a.powi(3), mb.sqrt() - ma.powi(3)),
            (b.powf(2.5), mb.powf(2.5)),
        ];
        for (j, m) in cases {
            let back = JetScalar::from(m);
            assert!((back.val - j.val).abs() < 1e-12);
            assert!((back.ds - j.ds).abs() < 1e-12);
            assert!((back.dt - j.dt).abs() < 1e-12);
            assert!((back.dst - j.dst).abs() < 1e-12, "{back:?} vs {j:?}");
        }
    }

    #[test]
    fn nested_derivative_of_sin_reaches_third_order() {
        // d^3/dx^3 sin x = -cos x; build by three nested perturbations
        let x0 = 0.4;
        let x = MultiJet::constant(x0)
            .perturbed(0, 1.0)
            .perturbed(1, 1.0)
            .perturbed(2, 1.0);
        let y = x.sin();
        assert!((y.coeff(0b111) + x0.cos()).abs() < 1e-14);
        assert!((y.coeff(0b011) + x0.sin()).abs() < 1e-14);
    }

    #[test]
    fn directional_splits_value_and_derivative() {
        let x = [MultiJet::constant(2.0), MultiJet::constant(3.0)];
        let (v, d) = directional(&x, &[1.0, 0.0], |z| vec![z[0] * z[0] * z[1]]);
        assert_eq!(v[0].value(), 12.0);
        assert_eq!(d[0].value(), 12.0);
        assert_eq!(d[0].depth(), 0);
    }

    proptest! {
        #[test]
        fn exp_ln_roundtrip_at_depth_three(v in 0.2..4.0f64, a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64) {
            let x = MultiJet::constant(v).perturbed(0, a).perturbed(1, b).perturbed(2, c);
            let y = x.ln().exp();
            for m in 0..8 {
                prop_assert!((y.coeff(m) - x.coeff(m)).abs() < 1e-10);
            }
        }
    }
}
