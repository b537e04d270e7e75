use std::cmp::Ordering;
use std::ops::{Div, Mul, Neg};

use serde::Serialize;

/// A real number stored as `sign · exp(log_magnitude)`.
///
/// Products of many factors (falling factorials, factorials, powers) stay
/// representable far outside the `f64` range; conversion back happens once
/// at the end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedMagnitude {
    sign: i8,
    log_magnitude: f64,
}

impl SignedMagnitude {
    pub const ZERO: Self = Self {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };

    pub const ONE: Self = Self {
        sign: 1,
        log_magnitude: 0.0,
    };

    /// Builds a value from a sign and the natural log of its magnitude.
    /// A sign of zero yields [`SignedMagnitude::ZERO`].
    pub fn from_parts(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                log_magnitude,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::from_parts(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    /// Exponentiates; saturates to `±inf` or `±0` outside the `f64` range.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_magnitude.exp(),
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// `ln |value|`; `-inf` for zero.
    pub fn log_magnitude(self) -> f64 {
        self.log_magnitude
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// Multiplies by `exp(log_factor)`.
    pub fn scale_log(self, log_factor: f64) -> Self {
        Self::from_parts(self.sign, self.log_magnitude + log_factor)
    }

    pub fn abs(self) -> Self {
        Self::from_parts(self.sign.abs(), self.log_magnitude)
    }

    /// True when `to_f64` would overflow to infinity.
    pub fn overflows_f64(self) -> bool {
        self.sign != 0 && self.log_magnitude > f64::MAX.ln()
    }
}

impl From<f64> for SignedMagnitude {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Mul for SignedMagnitude {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self::from_parts(self.sign * rhs.sign, self.log_magnitude + rhs.log_magnitude)
    }
}

impl Div for SignedMagnitude {
    type Output = Self;

    /// Division by zero is a logic error and panics.
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division of SignedMagnitude by zero");
        Self::from_parts(self.sign * rhs.sign, self.log_magnitude - rhs.log_magnitude)
    }
}

impl Neg for SignedMagnitude {
    type Output = Self;

    fn neg(self) -> Self {
        Self::from_parts(-self.sign, self.log_magnitude)
    }
}

impl PartialOrd for SignedMagnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_magnitude.partial_cmp(&other.log_magnitude),
                _ => other.log_magnitude.partial_cmp(&self.log_magnitude),
            },
            ord => Some(ord),
        }
    }
}

/// Falling factorial `[x]ₙ = x(x − 1)⋯(x − n + 1)`, with `[x]₀ = 1`.
pub fn falling_factorial(x: f64, n: u64) -> SignedMagnitude {
    let mut sign: i8 = 1;
    let mut log_magnitude = 0.0;
    for k in 0..n {
        let factor = x - k as f64;
        if factor == 0.0 {
            return SignedMagnitude::ZERO;
        }
        if factor < 0.0 {
            sign = -sign;
        }
        log_magnitude += factor.abs().ln();
    }
    SignedMagnitude::from_parts(sign, log_magnitude)
}
