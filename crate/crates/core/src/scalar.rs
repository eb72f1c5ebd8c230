//! Numeric coefficients carried by jets and frames.
//!
//! A [`Scalar`] is either an exact rational or an `f64`. The mode is fixed when
//! a value is built and every binary operation requires both operands to share
//! it. The `std::ops` impls panic on a mode mix; the `checked_*` methods and
//! the jet layer report [`ScalarError::ModeMismatch`] instead.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::float::Float;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arithmetic mode of a scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Rational,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        }
    }
}

impl core::str::FromStr for Mode {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            other => Err(ScalarError::Parse(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("mixed scalar modes: {0:?} and {1:?}")]
    ModeMismatch(Mode, Mode),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no exact rational square root")]
    Irrational,
    #[error("square root of a negative value")]
    Negative,
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
    #[error("value is not finite")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rational(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Rational => Scalar::Rational(BigRational::zero()),
            Mode::Float => Scalar::Float(0.0),
        }
    }

    pub fn one(mode: Mode) -> Self {
        Self::from_int(mode, 1)
    }

    pub fn from_int(mode: Mode, n: i64) -> Self {
        match mode {
            Mode::Rational => Scalar::Rational(BigRational::from_integer(BigInt::from(n))),
            Mode::Float => Scalar::Float(n as f64),
        }
    }

    /// `num/den` in the given mode. Panics when `den == 0`.
    pub fn ratio(mode: Mode, num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        match mode {
            Mode::Rational => {
                Scalar::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
            }
            Mode::Float => Scalar::Float(num as f64 / den as f64),
        }
    }

    pub fn float(x: f64) -> Self {
        Scalar::Float(x)
    }

    pub fn rational(r: BigRational) -> Self {
        Scalar::Rational(r)
    }

    /// Exact conversion of a finite `f64` into the requested mode.
    pub fn from_f64(mode: Mode, x: f64) -> Result<Self, ScalarError> {
        if !x.is_finite() {
            return Err(ScalarError::NonFinite);
        }
        match mode {
            Mode::Float => Ok(Scalar::Float(x)),
            Mode::Rational => BigRational::from_float(x)
                .map(Scalar::Rational)
                .ok_or(ScalarError::NonFinite),
        }
    }

    /// Parses `"p/q"`, an integer, or a plain decimal such as `"-0.125"` or
    /// `"2.5e-3"`. Decimals are read exactly in rational mode.
    pub fn parse(mode: Mode, text: &str) -> Result<Self, ScalarError> {
        let t = text.trim();
        let err = || ScalarError::Parse(text.to_string());
        let r = if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(ScalarError::DivisionByZero);
            }
            BigRational::new(n, d)
        } else {
            parse_decimal(t).ok_or_else(err)?
        };
        Ok(match mode {
            Mode::Rational => Scalar::Rational(r),
            Mode::Float => Scalar::Float(ratio_to_f64(&r)),
        })
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Rational(_) => Mode::Rational,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => ratio_to_f64(r),
            Scalar::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// Same value re-expressed in `mode`. Float to rational is exact in the
    /// binary sense.
    pub fn to_mode(&self, mode: Mode) -> Result<Scalar, ScalarError> {
        match (self, mode) {
            (Scalar::Rational(_), Mode::Rational) | (Scalar::Float(_), Mode::Float) => {
                Ok(self.clone())
            }
            (Scalar::Rational(r), Mode::Float) => Ok(Scalar::Float(ratio_to_f64(r))),
            (Scalar::Float(x), Mode::Rational) => Scalar::from_f64(Mode::Rational, *x),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(r.abs()),
            Scalar::Float(x) => Scalar::Float(x.abs()),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Rational(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Scalar::Float(x) => {
                if *x == 0.0 {
                    0
                } else if *x > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut out = Scalar::one(self.mode());
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    pub fn recip(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rational(r) => Scalar::Rational(r.recip()),
            Scalar::Float(x) => Scalar::Float(1.0 / x),
        })
    }

    /// Square root. Exact in rational mode when the value is a perfect square
    /// of a rational; otherwise [`ScalarError::Irrational`].
    pub fn sqrt(&self) -> Result<Scalar, ScalarError> {
        if self.signum() < 0 {
            return Err(ScalarError::Negative);
        }
        match self {
            Scalar::Float(x) => Ok(Scalar::Float(Float::sqrt(*x))),
            Scalar::Rational(r) => {
                let n = exact_root(r.numer(), 2).ok_or(ScalarError::Irrational)?;
                let d = exact_root(r.denom(), 2).ok_or(ScalarError::Irrational)?;
                Ok(Scalar::Rational(BigRational::new(n, d)))
            }
        }
    }

    /// Positive real `k`-th root of a non-negative value (exact rational when
    /// possible).
    pub fn nth_root(&self, k: u32) -> Result<Scalar, ScalarError> {
        if self.signum() < 0 {
            return Err(ScalarError::Negative);
        }
        match self {
            Scalar::Float(x) => Ok(Scalar::Float(Float::powf(*x, 1.0 / k as f64))),
            Scalar::Rational(r) => {
                let n = exact_root(r.numer(), k).ok_or(ScalarError::Irrational)?;
                let d = exact_root(r.denom(), k).ok_or(ScalarError::Irrational)?;
                Ok(Scalar::Rational(BigRational::new(n, d)))
            }
        }
    }

    fn check(&self, other: &Scalar) -> Result<(), ScalarError> {
        if self.mode() == other.mode() {
            Ok(())
        } else {
            Err(ScalarError::ModeMismatch(self.mode(), other.mode()))
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(other)?;
        Ok(self + other)
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(other)?;
        Ok(self - other)
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(other)?;
        Ok(self * other)
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(other)?;
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(self / other)
    }

    /// Compares values of the same mode.
    pub fn cmp_value(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => a.cmp(b),
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }
}

fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.nth_root(k);
    if r.pow(k) == *n {
        Some(r)
    } else {
        None
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fallback for huge numerators/denominators.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn parse_decimal(t: &str) -> Option<BigRational> {
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut all = String::with_capacity(int_part.len() + frac_part.len());
    all.push_str(int_part);
    all.push_str(frac_part);
    let mut num: BigInt = all.parse().ok()?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(x) => write!(f, "{x:?}"),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a $op b),
                    (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a $op b),
                    (a, b) => panic!("mixed scalar modes: {:?} and {:?}", a.mode(), b.mode()),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -(self.clone())
    }
}
