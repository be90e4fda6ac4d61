//! Scalar backends for kernel coefficients.
//!
//! Kernels carry a rational `scale_sq` next to their coefficient array, so a
//! backend only has to say how it multiplies by the square root of a rational.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Arithmetic mode, used in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Rational => f.write_str("rational"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + 'static
{
    const MODE: Mode;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// `self * sqrt(ratio)`, or `None` when the result leaves the backend.
    fn mul_sqrt(&self, ratio: &Rational) -> Option<Self>;

    /// `self += a * b`; the hot loop of every contraction.
    fn mul_add_assign(&mut self, a: &Self, b: &Self);

    fn mul_ref(&self, other: &Self) -> Self;

    /// Coefficient draw for random test kernels.
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Given `‖c‖²` of a coefficient array, return an optional coefficient
    /// multiplier and the `scale_sq` that make the kernel unit-norm.
    fn normalizer(norm_sq: &Self) -> Result<(Option<Self>, Rational)>;

    fn to_json(&self) -> serde_json::Value;

    fn from_json(value: &serde_json::Value) -> Result<Self>;

    /// Absolute value as an `f64`, exact inputs rounded once.
    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Resolve `coeff * sqrt(scale_sq)` into a plain scalar.
    fn resolve(coeff: &Self, scale_sq: &Rational) -> Result<Self> {
        if coeff.is_zero() {
            return Ok(Self::zero());
        }
        coeff
            .mul_sqrt(scale_sq)
            .ok_or_else(|| Error::NotExact(format!("{coeff:?} * sqrt({scale_sq})")))
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Rational;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }

    fn mul_sqrt(&self, ratio: &Rational) -> Option<Self> {
        ratio.sqrt_exact().map(|s| self * &s)
    }

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += &(a * b);
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Rational::from_integer(rng.random_range(-9..=9))
    }

    fn normalizer(norm_sq: &Self) -> Result<(Option<Self>, Rational)> {
        if norm_sq.is_zero() || norm_sq.is_negative() {
            return Err(Error::InvalidInput("cannot normalize a zero kernel".into()));
        }
        Ok((None, norm_sq.recip()?))
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }

    fn from_json(value: &serde_json::Value) -> Result<Self> {
        match value {
            serde_json::Value::String(s) => s.parse(),
            serde_json::Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap())),
            // a finite double is a dyadic rational, so this is exact
            serde_json::Value::Number(n) => n
                .as_f64()
                .and_then(num_rational::BigRational::from_float)
                .map(Rational::from_big)
                .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            other => Err(Error::Parse(format!("expected a \"p/q\" string or number, got {other}"))),
        }
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn mul_sqrt(&self, ratio: &Rational) -> Option<Self> {
        Some(self * ratio.to_f64().sqrt())
    }

    #[inline]
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random_range(-1.0..1.0)
    }

    fn normalizer(norm_sq: &Self) -> Result<(Option<Self>, Rational)> {
        if !(*norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero kernel".into()));
        }
        Ok((Some(1.0 / norm_sq.sqrt()), Rational::one()))
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }

    fn from_json(value: &serde_json::Value) -> Result<Self> {
        match value {
            serde_json::Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            serde_json::Value::String(s) => Ok(s.parse::<Rational>()?.to_f64()),
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }
}
