//! Coefficient fields.
//!
//! Four modes are supported: exact rationals, exact Gaussian rationals, `f64`
//! and complex `f64`. Generic code is written against [`Scalar`]; the mode is
//! carried by the type and reported through [`Scalar::MODE`].

use std::fmt::Debug;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::complex::Complex;
use num::rational::BigRational;
use num::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub type Rational = BigRational;
pub type GaussRational = Complex<BigRational>;
pub type Complex64 = Complex<f64>;

/// Default tolerance for zero tests in floating modes.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Gaussian,
    Float,
    Complex,
}

impl Mode {
    pub fn is_exact(self) -> bool {
        matches!(self, Mode::Rational | Mode::Gaussian)
    }

    pub fn is_complex(self) -> bool {
        matches!(self, Mode::Gaussian | Mode::Complex)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rational => "rational",
            Mode::Gaussian => "gaussian",
            Mode::Float => "float",
            Mode::Complex => "complex",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" | "exact" => Ok(Mode::Rational),
            "gaussian" => Ok(Mode::Gaussian),
            "float" | "real" => Ok(Mode::Float),
            "complex" => Ok(Mode::Complex),
            other => Err(format!("unknown scalar mode `{other}`")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A coefficient field usable by every algorithm in the crate.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    type Real: RealScalar;
    const MODE: Mode;

    fn from_i64(v: i64) -> Self;
    fn from_real(r: Self::Real) -> Self;
    /// `None` when the imaginary part is nonzero and the field is real.
    fn from_parts(re: Self::Real, im: Self::Real) -> Option<Self>;
    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
    fn conj(&self) -> Self;
    fn modulus_sq(&self) -> Self::Real;
    fn modulus(&self) -> f64;
    fn to_complex64(&self) -> Complex64;
    /// Exact modes ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Encode as the `(numerator, denominator)` pair of the series JSON format.
    fn encode(&self) -> (Value, Value);
    fn decode(num: &Value, den: &Value) -> Result<Self, String>;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Parse a standalone value: a number, a `"p/q"` string, or `[re, im]`.
    fn decode_value(v: &Value) -> Result<Self, String> {
        match v {
            Value::Array(parts) if parts.len() == 2 => {
                let re = Self::Real::decode_real(&parts[0])?;
                let im = Self::Real::decode_real(&parts[1])?;
                Self::from_parts(re, im).ok_or_else(|| "complex value given for a real scalar mode".to_string())
            }
            other => Ok(Self::from_real(Self::Real::decode_real(other)?)),
        }
    }

    fn encode_value(&self) -> Value {
        let im = self.im();
        if Self::MODE.is_complex() {
            Value::Array(vec![self.re().encode_real(), im.encode_real()])
        } else {
            self.re().encode_real()
        }
    }
}

/// Ordered real subfield of a [`Scalar`].
pub trait RealScalar: Scalar<Real = Self> + PartialOrd {
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn decode_real(v: &Value) -> Result<Self, String>;
    fn encode_real(&self) -> Value;
}

fn number_text(v: &Value) -> Result<String, String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.trim().to_string()),
        other => Err(format!("expected a number, found {other}")),
    }
}

fn json_number(text: &str) -> Value {
    Value::Number(serde_json::Number::from_str(text).expect("valid JSON number text"))
}

/// Parse `p`, `p/q`, or a decimal with optional exponent, exactly.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let bad = || format!("cannot parse `{text}` as a rational number");
    if let Some((p, q)) = text.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(format!("zero denominator in `{text}`"));
        }
        return Ok(Rational::new(p, q));
    }
    let lower = text.to_ascii_lowercase();
    let (mantissa, exponent) = match lower.split_once('e') {
        Some((m, e)) => (m.to_string(), e.parse::<i64>().map_err(|_| bad())?),
        None => (lower.clone(), 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i.to_string(), f.to_string()),
        None => (mantissa.clone(), String::new()),
    };
    let negative = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = Rational::from_integer(BigInt::from_str(&digits).map_err(|_| bad())?);
    let shift = exponent - frac_part.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    let scale = num::pow::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if negative { -value } else { value })
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Seventeen significant digits, the float format used by all reports.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        return "0.0".to_string();
    }
    format!("{v:.16e}")
}

fn integer_value(i: &BigInt) -> Value {
    json_number(&i.to_string())
}

fn parse_integer(v: &Value) -> Result<BigInt, String> {
    let text = number_text(v)?;
    BigInt::from_str(&text).map_err(|_| format!("expected an integer, found `{text}`"))
}

impl Scalar for Rational {
    type Real = Rational;
    const MODE: Mode = Mode::Rational;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_real(r: Self) -> Self {
        r
    }
    fn from_parts(re: Self, im: Self) -> Option<Self> {
        im.is_zero().then_some(re)
    }
    fn re(&self) -> Self {
        self.clone()
    }
    fn im(&self) -> Self {
        Rational::zero()
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn modulus_sq(&self) -> Self {
        self * self
    }
    fn modulus(&self) -> f64 {
        RealScalar::to_f64(self).abs()
    }
    fn to_complex64(&self) -> Complex64 {
        Complex64::new(RealScalar::to_f64(self), 0.0)
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn encode(&self) -> (Value, Value) {
        (integer_value(self.numer()), integer_value(self.denom()))
    }
    fn decode(num: &Value, den: &Value) -> Result<Self, String> {
        let p = parse_integer(num)?;
        let q = parse_integer(den)?;
        if q.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Rational::new(p, q))
    }
}

impl RealScalar for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn decode_real(v: &Value) -> Result<Self, String> {
        parse_rational(&number_text(v)?)
    }
    fn encode_real(&self) -> Value {
        if self.is_integer() {
            integer_value(self.numer())
        } else {
            Value::String(format_rational(self))
        }
    }
}

impl Scalar for GaussRational {
    type Real = Rational;
    const MODE: Mode = Mode::Gaussian;

    fn from_i64(v: i64) -> Self {
        Complex::new(<Rational as Scalar>::from_i64(v), Rational::zero())
    }
    fn from_real(r: Rational) -> Self {
        Complex::new(r, Rational::zero())
    }
    fn from_parts(re: Rational, im: Rational) -> Option<Self> {
        Some(Complex::new(re, im))
    }
    fn re(&self) -> Rational {
        self.re.clone()
    }
    fn im(&self) -> Rational {
        self.im.clone()
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn modulus_sq(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }
    fn modulus(&self) -> f64 {
        self.to_complex64().norm()
    }
    fn to_complex64(&self) -> Complex64 {
        Complex64::new(RealScalar::to_f64(&self.re), RealScalar::to_f64(&self.im))
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn encode(&self) -> (Value, Value) {
        let den = num::integer::lcm(self.re.denom().clone(), self.im.denom().clone());
        let scale = |r: &Rational| r.numer() * (&den / r.denom());
        (Value::Array(vec![integer_value(&scale(&self.re)), integer_value(&scale(&self.im))]), integer_value(&den))
    }
    fn decode(num: &Value, den: &Value) -> Result<Self, String> {
        let q = parse_integer(den)?;
        if q.is_zero() {
            return Err("zero denominator".into());
        }
        let (re, im) = match num {
            Value::Array(p) if p.len() == 2 => (parse_integer(&p[0])?, parse_integer(&p[1])?),
            other => (parse_integer(other)?, BigInt::zero()),
        };
        Ok(Complex::new(Rational::new(re, q.clone()), Rational::new(im, q)))
    }
}

impl Scalar for f64 {
    type Real = f64;
    const MODE: Mode = Mode::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_real(r: f64) -> Self {
        r
    }
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }
    fn re(&self) -> f64 {
        *self
    }
    fn im(&self) -> f64 {
        0.0
    }
    fn conj(&self) -> Self {
        *self
    }
    fn modulus_sq(&self) -> f64 {
        self * self
    }
    fn modulus(&self) -> f64 {
        f64::abs(*self)
    }
    fn to_complex64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn is_negligible(&self, tol: f64) -> bool {
        f64::abs(*self) <= tol
    }
    fn encode(&self) -> (Value, Value) {
        (self.encode_real(), json_number("1"))
    }
    fn decode(num: &Value, den: &Value) -> Result<Self, String> {
        Ok(Self::decode_real(num)? / Self::decode_real(den)?)
    }
}

impl RealScalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn decode_real(v: &Value) -> Result<Self, String> {
        let text = number_text(v)?;
        match text.parse::<f64>() {
            Ok(x) => Ok(x),
            Err(_) => parse_rational(&text).map(|r| RealScalar::to_f64(&r)),
        }
    }
    fn encode_real(&self) -> Value {
        if self.is_finite() {
            json_number(&format_f64(*self))
        } else {
            Value::String(self.to_string())
        }
    }
}

impl Scalar for Complex64 {
    type Real = f64;
    const MODE: Mode = Mode::Complex;

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex64::new(re, im))
    }
    fn re(&self) -> f64 {
        self.re
    }
    fn im(&self) -> f64 {
        self.im
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn modulus_sq(&self) -> f64 {
        self.norm_sqr()
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn to_complex64(&self) -> Complex64 {
        *self
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn encode(&self) -> (Value, Value) {
        (Value::Array(vec![self.re.encode_real(), self.im.encode_real()]), json_number("1"))
    }
    fn decode(num: &Value, den: &Value) -> Result<Self, String> {
        let d = f64::decode_real(den)?;
        match num {
            Value::Array(p) if p.len() == 2 => {
                Ok(Complex64::new(f64::decode_real(&p[0])? / d, f64::decode_real(&p[1])? / d))
            }
            other => Ok(Complex64::new(f64::decode_real(other)? / d, 0.0)),
        }
    }
}

/// Exact rational from an `f64` (every finite float is a dyadic rational).
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_f64(v)
}

/// `n!` as a scalar.
pub fn factorial<S: Scalar>(n: u32) -> S {
    let mut acc = S::one();
    for k in 2..=n as i64 {
        acc *= &S::from_i64(k);
    }
    acc
}

pub fn factorial_f64(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}
