//! Signed log-domain scalars.
//!
//! A [`LogNum`] stores `sign · exp(log_abs)` so that quantities like
//! `g(r)^{m-1} = exp(-(m-1) r³)` remain exactly representable long after the
//! plain `f64` value has underflowed. Sums are accumulated with
//! log-sum-exp, differences with the complementary `log1p` identity.

use std::cmp::Ordering;

/// `log(exp(a) + exp(b))` without leaving log space.
#[inline]
pub fn logsumexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `log(exp(a) - exp(b))` for `a >= b`. Returns `NEG_INFINITY` when equal.
#[inline]
pub fn logdiffexp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b, "logdiffexp needs a >= b, got {a} < {b}");
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = (b - a).exp();
    if d >= 1.0 {
        return f64::NEG_INFINITY;
    }
    a + (-d).ln_1p()
}

/// Log-sum-exp over a slice, summed in slice order.
pub fn logsumexp_slice(values: &[f64]) -> f64 {
    let max = values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let mut acc = 0.0;
    for &v in values {
        acc += (v - max).exp();
    }
    max + acc.ln()
}

/// A real number as `sign * exp(log_abs)`.
///
/// `sign == 0` encodes exact zero (`log_abs` is then `NEG_INFINITY`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNum {
    pub sign: i8,
    pub log_abs: f64,
}

impl LogNum {
    pub const ZERO: LogNum = LogNum {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            LogNum::ZERO
        } else {
            LogNum { sign, log_abs }
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            LogNum::ZERO
        } else {
            LogNum {
                sign: if v > 0.0 { 1 } else { -1 },
                log_abs: v.abs().ln(),
            }
        }
    }

    /// Plain-domain value; loses range for extreme magnitudes.
    pub fn value(self) -> f64 {
        match self.sign.cmp(&0) {
            Ordering::Equal => 0.0,
            Ordering::Greater => self.log_abs.exp(),
            Ordering::Less => -self.log_abs.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(self) -> bool {
        self.sign > 0
    }

    pub fn is_valid(self) -> bool {
        !self.log_abs.is_nan()
    }

    pub fn neg(self) -> Self {
        LogNum::new(-self.sign, self.log_abs)
    }

    pub fn mul(self, other: Self) -> Self {
        LogNum::new(self.sign * other.sign, self.log_abs + other.log_abs)
    }

    pub fn div(self, other: Self) -> Self {
        if other.sign == 0 {
            return LogNum {
                sign: self.sign,
                log_abs: f64::INFINITY,
            };
        }
        LogNum::new(self.sign * other.sign, self.log_abs - other.log_abs)
    }

    /// Signed addition via log-sum-exp / log-diff-exp.
    pub fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        if self.sign == other.sign {
            return LogNum::new(self.sign, logsumexp(self.log_abs, other.log_abs));
        }
        match self
            .log_abs
            .partial_cmp(&other.log_abs)
            .unwrap_or(Ordering::Equal)
        {
            Ordering::Greater => LogNum::new(self.sign, logdiffexp(self.log_abs, other.log_abs)),
            Ordering::Less => LogNum::new(other.sign, logdiffexp(other.log_abs, self.log_abs)),
            Ordering::Equal => LogNum::ZERO,
        }
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    /// `self^p` for real `p`; requires a positive base unless `p` is an
    /// integer.
    pub fn powf(self, p: f64) -> Self {
        if self.sign == 0 {
            return if p > 0.0 {
                LogNum::ZERO
            } else {
                LogNum {
                    sign: 1,
                    log_abs: f64::INFINITY,
                }
            };
        }
        let sign = if self.sign > 0 {
            1
        } else if p.fract() == 0.0 {
            if (p as i64) % 2 == 0 {
                1
            } else {
                -1
            }
        } else {
            return LogNum {
                sign: 1,
                log_abs: f64::NAN,
            };
        };
        LogNum::new(sign, p * self.log_abs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_survives_extreme_magnitudes() {
        let a = -8000.0;
        let b = -8002.0;
        let r = logsumexp(a, b);
        let expected = -8000.0 + (1.0 + (-2.0f64).exp()).ln();
        assert!((r - expected).abs() < 1e-12);
    }

    #[test]
    fn signed_add_matches_plain_arithmetic_in_range() {
        let cases = [(3.5, -1.25), (-2.0, -7.0), (1e-8, 1e8), (-4.0, 4.0)];
        for (x, y) in cases {
            let got = LogNum::from_value(x).add(LogNum::from_value(y)).value();
            let want = x + y;
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "{x} + {y}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn pow_handles_negative_integer_bases() {
        let v = LogNum::from_value(-2.0).powf(3.0);
        assert!((v.value() + 8.0).abs() < 1e-12);
        let v = LogNum::from_value(-2.0).powf(2.0);
        assert!((v.value() - 4.0).abs() < 1e-12);
    }
}
