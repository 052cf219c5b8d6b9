//! A minimal scalar abstraction so the closed-form motif formulas can be
//! evaluated either on plain `f64` or on forward-mode dual numbers for
//! analytic gradients.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(x: f64) -> Self;
    fn value(self) -> f64;
    fn powi(self, n: u32) -> Self;
    /// Power with a constant (parameter-independent) exponent.
    fn powf(self, e: f64) -> Self;
    fn exp(self) -> Self;

    /// `min` taking the first argument at exact ties (subgradient convention).
    fn smin(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// `max` taking the first argument at exact ties.
    fn smax(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Scalar for f64 {
    fn constant(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn powi(self, n: u32) -> Self {
        f64::powi(self, n as i32)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
}

/// Forward-mode dual number with a fixed-width gradient.
///
/// `N` is the number of local differentiation slots. Closed-form motif
/// expressions only ever depend on the three node-sampling probabilities and
/// the three edge probabilities of one triple, so `N <= 6` suffices and the
/// per-triple gradients are scattered into the global parameter vector by the
/// caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub d: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(v: f64) -> Self {
        Self { v, d: [0.0; N] }
    }

    /// A variable seeded in differentiation slot `slot`.
    pub fn var(v: f64, slot: usize) -> Self {
        let mut d = [0.0; N];
        d[slot] = 1.0;
        Self { v, d }
    }
}

impl<const N: usize> PartialOrd for Dual<N> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut d = self.d;
        for i in 0..N {
            d[i] += rhs.d[i];
        }
        Self { v: self.v + rhs.v, d }
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut d = self.d;
        for i in 0..N {
            d[i] -= rhs.d[i];
        }
        Self { v: self.v - rhs.v, d }
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = self.d[i] * rhs.v + self.v * rhs.d[i];
        }
        Self { v: self.v * rhs.v, d }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.v;
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = (self.d[i] - self.v * inv * rhs.d[i]) * inv;
        }
        Self { v: self.v * inv, d }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut d = self.d;
        for x in &mut d {
            *x = -*x;
        }
        Self { v: -self.v, d }
    }
}

impl<const N: usize> Scalar for Dual<N> {
    fn constant(x: f64) -> Self {
        Dual::constant(x)
    }

    fn value(self) -> f64 {
        self.v
    }

    fn powi(self, n: u32) -> Self {
        // Repeated squaring keeps the derivative exact.
        let mut base = self;
        let mut n = n;
        let mut acc = Self::constant(1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    fn powf(self, e: f64) -> Self {
        let v = self.v.powf(e);
        let scale = if self.v > 0.0 {
            e * self.v.powf(e - 1.0)
        } else {
            0.0
        };
        let mut d = self.d;
        for x in &mut d {
            *x *= scale;
        }
        Self { v, d }
    }

    fn exp(self) -> Self {
        let v = self.v.exp();
        let mut d = self.d;
        for x in &mut d {
            *x *= v;
        }
        Self { v, d }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_arithmetic_matches_finite_differences() {
        let f = |x: f64| (1.0 - x).powi(5) * x / (x + 2.0);
        let fd = |x: f64| {
            let h = 1e-6;
            (f(x + h) - f(x - h)) / (2.0 * h)
        };
        for &x in &[0.1, 0.4, 0.9] {
            let d = Dual::<1>::var(x, 0);
            let y = (Dual::constant(1.0) - d).powi(5) * d / (d + Dual::constant(2.0));
            assert!((y.v - f(x)).abs() < 1e-12);
            assert!((y.d[0] - fd(x)).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn min_max_take_first_argument_at_ties() {
        let a = Dual::<1>::var(0.5, 0);
        let b = Dual::<1>::constant(0.5);
        assert_eq!(a.smin(b).d[0], 1.0);
        assert_eq!(a.smax(b).d[0], 1.0);
        assert_eq!(b.smin(a).d[0], 0.0);
    }

    #[test]
    fn powf_derivative() {
        let x = Dual::<1>::var(0.3, 0);
        let y = x.powf(1.0 / 7.0);
        let h = 1e-7;
        let fd = ((0.3f64 + h).powf(1.0 / 7.0) - (0.3f64 - h).powf(1.0 / 7.0)) / (2.0 * h);
        assert!((y.d[0] - fd).abs() < 1e-6);
    }
}
