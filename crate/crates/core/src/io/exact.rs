//! Exact decimal arithmetic for ranged rows.
//!
//! The far side of a ranged row is `rhs - |range|` (or `lhs + |range|`).
//! Computed in floating point that sum rounds, and for some side pairs no
//! float range lands on the wanted side at all. The writer then prints the
//! exact decimal difference and the reader evaluates the sum exactly,
//! rounding once at the end. For ordinary files this agrees with IEEE
//! arithmetic, which also rounds the exact sum once.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// `digits * 10^-scale`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Decimal {
    digits: BigInt,
    scale: u32,
}

impl Decimal {
    /// Exact value of a finite float.
    pub(crate) fn from_f64(value: f64) -> Decimal {
        debug_assert!(value.is_finite());
        let bits = value.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let fraction = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if biased == 0 {
            (fraction, -1074)
        } else {
            (fraction | (1u64 << 52), biased - 1075)
        };
        let mut digits = BigInt::from(mantissa);
        let scale = if exponent >= 0 {
            digits <<= exponent as usize;
            0
        } else {
            let k = (-exponent) as u32;
            digits *= BigInt::from(5u32).pow(k);
            k
        };
        if negative {
            digits = -digits;
        }
        Decimal { digits, scale }.trimmed()
    }

    /// Parses `[+-]digits[.digits][e[+-]digits]`; `None` for anything else.
    pub(crate) fn parse(token: &str) -> Option<Decimal> {
        let (mantissa, exponent) = match token.find(['e', 'E']) {
            Some(at) => (&token[..at], token[at + 1..].parse::<i32>().ok()?),
            None => (token, 0),
        };
        if exponent.abs() > 20_000 {
            return None;
        }
        let (negative, body) = match mantissa.as_bytes().first()? {
            b'-' => (true, &mantissa[1..]),
            b'+' => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut digits: BigInt = format!("{int}{frac}").parse().ok()?;
        let mut scale = frac.len() as i64 - exponent as i64;
        if scale < 0 {
            digits *= BigInt::from(10u32).pow((-scale) as u32);
            scale = 0;
        }
        if scale > 20_000 {
            return None;
        }
        if negative {
            digits = -digits;
        }
        Some(Decimal {
            digits,
            scale: scale as u32,
        })
    }

    fn rescaled(&self, scale: u32) -> BigInt {
        &self.digits * BigInt::from(10u32).pow(scale - self.scale)
    }

    pub(crate) fn add(&self, other: &Decimal) -> Decimal {
        let scale = self.scale.max(other.scale);
        Decimal {
            digits: self.rescaled(scale) + other.rescaled(scale),
            scale,
        }
        .trimmed()
    }

    pub(crate) fn neg(&self) -> Decimal {
        Decimal {
            digits: -&self.digits,
            scale: self.scale,
        }
    }

    pub(crate) fn abs(&self) -> Decimal {
        Decimal {
            digits: self.digits.abs(),
            scale: self.scale,
        }
    }

    fn trimmed(mut self) -> Decimal {
        let ten = BigInt::from(10u32);
        while self.scale > 0 && !self.digits.is_zero() && (&self.digits % &ten).is_zero() {
            self.digits /= &ten;
            self.scale -= 1;
        }
        if self.digits.is_zero() {
            self.scale = 0;
        }
        self
    }

    /// Plain decimal notation.
    pub(crate) fn to_text(&self) -> String {
        let magnitude = self.digits.abs().to_string();
        let sign = if self.digits.is_negative() { "-" } else { "" };
        let scale = self.scale as usize;
        if scale == 0 {
            return format!("{sign}{magnitude}");
        }
        let padded = format!("{magnitude:0>width$}", width = scale + 1);
        let (int, frac) = padded.split_at(padded.len() - scale);
        format!("{sign}{int}.{frac}")
    }

    /// Nearest float, ties to even.
    pub(crate) fn to_f64(&self) -> f64 {
        self.to_text().parse().expect("decimal text is a valid float")
    }
}
