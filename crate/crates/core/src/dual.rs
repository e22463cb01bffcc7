//! First-order forward-mode dual numbers with a fixed-width gradient.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::real::Real;

/// Maximum number of independent variables a dual number can carry.
pub const MAX_VARS: usize = 8;

/// A value together with its partial derivatives with respect to up to
/// [`MAX_VARS`] variables. Only the first `width` slots are meaningful.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    value: T,
    grad: [T; MAX_VARS],
    width: u8,
}

impl<T: Real> Dual<T> {
    pub fn constant(value: T, width: usize) -> Self {
        assert!(width <= MAX_VARS, "dual width {width} exceeds {MAX_VARS}");
        Dual {
            value,
            grad: [T::zero(); MAX_VARS],
            width: width as u8,
        }
    }

    /// A variable seeded with unit derivative in `slot`.
    pub fn variable(value: T, slot: usize, width: usize) -> Self {
        assert!(slot < width, "slot {slot} outside width {width}");
        let mut d = Self::constant(value, width);
        d.grad[slot] = T::one();
        d
    }

    pub fn from_parts(value: T, partials: &[T]) -> Self {
        let mut d = Self::constant(value, partials.len());
        d.grad[..partials.len()].copy_from_slice(partials);
        d
    }

    #[inline]
    pub fn value(&self) -> T {
        self.value
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width as usize
    }

    #[inline]
    pub fn partial(&self, slot: usize) -> T {
        self.grad[slot]
    }

    #[inline]
    pub fn partials(&self) -> &[T] {
        &self.grad[..self.width as usize]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.partials().iter().all(|g| g.is_finite())
    }

    /// Applies a scalar function with known derivative `dvalue` (chain rule).
    #[inline]
    fn chain(self, value: T, dvalue: T) -> Self {
        let mut out = self;
        out.value = value;
        for g in out.grad[..self.width as usize].iter_mut() {
            *g = *g * dvalue;
        }
        out
    }

    #[inline]
    fn zip(self, rhs: Self, value: T, f: impl Fn(T, T) -> T) -> Self {
        let width = self.width.max(rhs.width);
        let mut grad = [T::zero(); MAX_VARS];
        for (i, g) in grad[..width as usize].iter_mut().enumerate() {
            *g = f(self.grad[i], rhs.grad[i]);
        }
        Dual { value, grad, width }
    }

    pub fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }

    pub fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }

    /// Natural logarithm; caller guarantees a positive value.
    pub fn ln(self) -> Self {
        self.chain(self.value.ln(), self.value.recip())
    }

    /// Square root; caller guarantees a positive value.
    pub fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, (T::one() + T::one()).recip() / r)
    }

    /// Absolute value, with derivative 0 taken at the kink.
    pub fn abs(self) -> Self {
        let s = if self.value > T::zero() {
            T::one()
        } else if self.value < T::zero() {
            -T::one()
        } else {
            T::zero()
        };
        self.chain(self.value.abs(), s)
    }

    /// Power with a constant real exponent.
    pub fn powf(self, exponent: T) -> Self {
        let v = self.value.powf(exponent);
        let dv = if exponent == T::zero() {
            T::zero()
        } else {
            exponent * self.value.powf(exponent - T::one())
        };
        self.chain(v, dv)
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        self.zip(rhs, self.value + rhs.value, |a, b| a + b)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self.zip(rhs, self.value - rhs.value, |a, b| a - b)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (u, v) = (self.value, rhs.value);
        self.zip(rhs, u * v, |a, b| a * v + u * b)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let (u, v) = (self.value, rhs.value);
        let inv = v.recip();
        self.zip(rhs, u * inv, |a, b| (a * v - u * b) * inv * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.chain(-self.value, -T::one())
    }
}
