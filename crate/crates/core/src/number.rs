//! Exact decimal arithmetic for rule terms and builtin guards.
//!
//! Numbers are stored as reduced `i128` ratios so that every decimal literal
//! written in a rule file (`0.9`, `140630105632`) is represented exactly and
//! comparisons such as `?conf >= 0.7` never suffer from binary rounding.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Number(Ratio<i128>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumberError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("invalid numeric literal `{0}`")]
    Invalid(String),
}

impl Number {
    pub const ZERO: Number = Number(Ratio::new_raw(0, 1));

    pub fn from_int(v: i64) -> Self {
        Number(Ratio::from_integer(v as i128))
    }

    /// Converts through the shortest decimal representation of `v`, so
    /// `0.1_f64` becomes exactly one tenth.
    pub fn from_f64(v: f64) -> Result<Self, NumberError> {
        if !v.is_finite() {
            return Err(NumberError::Invalid(v.to_string()));
        }
        format!("{v}").parse()
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn as_integer(self) -> Option<i128> {
        self.0.is_integer().then(|| *self.0.numer())
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, NumberError> {
        self.0.checked_add(&rhs.0).map(Number).ok_or(NumberError::Overflow)
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, NumberError> {
        self.0.checked_sub(&rhs.0).map(Number).ok_or(NumberError::Overflow)
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self, NumberError> {
        self.0.checked_mul(&rhs.0).map(Number).ok_or(NumberError::Overflow)
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, NumberError> {
        if rhs.is_zero() {
            return Err(NumberError::DivisionByZero);
        }
        self.0.checked_div(&rhs.0).map(Number).ok_or(NumberError::Overflow)
    }

    pub fn checked_neg(self) -> Result<Self, NumberError> {
        let n = self.0.numer().checked_neg().ok_or(NumberError::Overflow)?;
        Ok(Number(Ratio::new_raw(n, *self.0.denom())))
    }

    /// True when the value has a finite decimal expansion.
    fn is_terminating(self) -> bool {
        let mut d = *self.0.denom();
        while d % 2 == 0 {
            d /= 2;
        }
        while d % 5 == 0 {
            d /= 5;
        }
        d == 1
    }
}

impl From<i64> for Number {
    fn from(v: i64) -> Self {
        Number::from_int(v)
    }
}

impl FromStr for Number {
    type Err = NumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || NumberError::Invalid(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        // Rust's float formatting may produce exponents (`1e-7`); accept them.
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = body[pos + 1..].parse().map_err(|_| invalid())?;
                (&body[..pos], exp)
            }
            None => (body, 0),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(invalid());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: i128 = digits.trim_start_matches('0').parse().unwrap_or(0);
        let scale = frac_part.len() as i32 - exponent;
        let pow = |e: i32| -> Result<i128, NumberError> {
            10i128.checked_pow(e as u32).ok_or(NumberError::Overflow)
        };
        let value = if scale >= 0 {
            Ratio::new(numer, pow(scale)?)
        } else {
            Ratio::from_integer(numer.checked_mul(pow(-scale)?).ok_or(NumberError::Overflow)?)
        };
        Ok(Number(if negative { -value } else { value }))
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            return write!(f, "{}", self.0.numer());
        }
        if !self.is_terminating() {
            // Only reachable for values computed by `/`; display approximately.
            return write!(f, "{}", self.to_f64());
        }
        let sign = if self.0.is_negative() { "-" } else { "" };
        let abs = self.0.abs();
        let (int, mut rem) = abs.numer().div_rem(abs.denom());
        let denom = *abs.denom();
        let mut frac = String::new();
        while !rem.is_zero() {
            rem *= 10;
            let (digit, r) = rem.div_rem(&denom);
            frac.push(char::from(b'0' + digit as u8));
            rem = r;
        }
        write!(f, "{sign}{int}.{frac}")
    }
}

impl PartialEq<i64> for Number {
    fn eq(&self, other: &i64) -> bool {
        *self == Number::from_int(*other)
    }
}

impl PartialOrd<i64> for Number {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&Number::from_int(*other)))
    }
}
