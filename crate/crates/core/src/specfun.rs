//! Log-space special functions: `ln Γ`, the regularized incomplete gamma
//! functions, and stable log-sum-exp accumulation.
//!
//! Every routine that feeds a product of many probabilities returns the
//! logarithm directly. The left-tail edge CDF at `N = 250`, `x = 0.3` sits
//! near `exp(-1.4e4)`, far below the smallest subnormal.

use std::ops::{Add, Mul};

use crate::error::{domain, numerical, Result};

const MAX_ITER: usize = 10_000;
const REL_EPS: f64 = 1e-15;
const LENTZ_TINY: f64 = 1e-300;

/// A non-negative real stored by its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub log_magnitude: f64,
    pub is_zero: bool,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { log_magnitude: f64::NEG_INFINITY, is_zero: true };
    pub const ONE: LogValue = LogValue { log_magnitude: 0.0, is_zero: false };

    pub fn from_ln(log_magnitude: f64) -> Self {
        if log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue { log_magnitude, is_zero: false }
        }
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(domain(format!("LogValue requires a finite non-negative value, got {x}")));
        }
        Ok(if x == 0.0 { Self::ZERO } else { Self::from_ln(x.ln()) })
    }

    /// Natural log; `-inf` for zero.
    pub fn ln(self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.log_magnitude
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log_magnitude.exp()
        }
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero || rhs.is_zero {
            LogValue::ZERO
        } else {
            LogValue::from_ln(self.log_magnitude + rhs.log_magnitude)
        }
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        match (self.is_zero, rhs.is_zero) {
            (true, _) => rhs,
            (_, true) => self,
            _ => {
                let (hi, lo) = if self.log_magnitude >= rhs.log_magnitude {
                    (self.log_magnitude, rhs.log_magnitude)
                } else {
                    (rhs.log_magnitude, self.log_magnitude)
                };
                LogValue::from_ln(hi + (lo - hi).exp().ln_1p())
            }
        }
    }
}

impl std::iter::Product for LogValue {
    fn product<I: Iterator<Item = LogValue>>(iter: I) -> LogValue {
        iter.fold(LogValue::ONE, |acc, v| acc * v)
    }
}

/// `ln Σ exp(tᵢ)`, shifted by the running maximum.
pub fn log_sum_weighted(terms: &[f64]) -> Result<f64> {
    if terms.is_empty() {
        return Err(domain("log_sum_weighted needs at least one term"));
    }
    if terms.len() == 1 {
        return Ok(terms[0]);
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(max);
    }
    if max.is_nan() {
        return Err(domain("log_sum_weighted received NaN"));
    }
    // Sort the shifted weights so the result does not depend on input order.
    let mut shifted: Vec<f64> = terms.iter().map(|t| (t - max).exp()).collect();
    shifted.sort_by(f64::total_cmp);
    let sum: f64 = shifted.iter().sum();
    Ok(max + sum.ln())
}

/// `ln Γ(a)` for `a > 0`.
///
/// Delegates to `libm::lgamma`, whose rational fits around `a = 1` and `a = 2`
/// keep the relative error small next to the zeros of `ln Γ`.
pub fn log_gamma(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("log_gamma requires a finite a > 0, got {a}")));
    }
    Ok(libm::lgamma(a))
}

fn check_gamma_args(a: f64, y: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("incomplete gamma requires a finite a > 0, got {a}")));
    }
    if !(y >= 0.0) || y.is_nan() {
        return Err(domain(format!("incomplete gamma requires y >= 0, got {y}")));
    }
    Ok(())
}

/// `ln Σ_{n≥0} yⁿ / ((a+1)…(a+n))`, the series factor of `γ(a, y)`.
pub(crate) fn ln_lower_series(a: f64, y: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= y / ap;
        sum += term;
        if term < sum * REL_EPS {
            return Ok(sum.ln());
        }
    }
    Err(numerical(format!(
        "incomplete gamma series did not converge in {MAX_ITER} iterations (a = {a}, y = {y}, last term {term:e}, sum {sum:e})"
    )))
}

/// `ln` of the continued fraction for `Γ(a, y) e^y y^{-a}` (modified Lentz).
pub(crate) fn ln_upper_cf(a: f64, y: f64) -> Result<f64> {
    let mut b = y + 1.0 - a;
    let mut c = 1.0 / LENTZ_TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = b + an / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < REL_EPS {
            return Ok(h.ln());
        }
    }
    Err(numerical(format!(
        "incomplete gamma continued fraction did not converge in {MAX_ITER} iterations (a = {a}, y = {y})"
    )))
}

fn use_series(a: f64, y: f64) -> bool {
    y < a + 1.0
}

/// `ln P(a, y)` where `P = γ(a, y) / Γ(a)`; `-inf` at `y = 0`.
pub fn ln_reg_lower_gamma(a: f64, y: f64) -> Result<f64> {
    check_gamma_args(a, y)?;
    if y == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if y.is_infinite() {
        return Ok(0.0);
    }
    if use_series(a, y) {
        Ok(a * y.ln() - y - log_gamma(a + 1.0)? + ln_lower_series(a, y)?)
    } else {
        let ln_q = a * y.ln() - y - log_gamma(a)? + ln_upper_cf(a, y)?;
        Ok((-ln_q.exp()).ln_1p())
    }
}

/// `ln Q(a, y)` where `Q = 1 - P`.
pub fn ln_reg_upper_gamma(a: f64, y: f64) -> Result<f64> {
    check_gamma_args(a, y)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    if use_series(a, y) {
        let ln_p = a * y.ln() - y - log_gamma(a + 1.0)? + ln_lower_series(a, y)?;
        Ok((-ln_p.exp()).ln_1p())
    } else {
        Ok(a * y.ln() - y - log_gamma(a)? + ln_upper_cf(a, y)?)
    }
}

/// Regularized lower incomplete gamma `P(a, y) ∈ [0, 1]`.
pub fn reg_lower_gamma(a: f64, y: f64) -> Result<f64> {
    Ok(ln_reg_lower_gamma(a, y)?.exp())
}

/// Regularized upper incomplete gamma `Q(a, y) = 1 - P(a, y)`.
pub fn reg_upper_gamma(a: f64, y: f64) -> Result<f64> {
    Ok(ln_reg_upper_gamma(a, y)?.exp())
}

/// `ln γ(a, y)` (unregularized). The series branch never forms `Γ(a)`, so
/// tiny values such as `γ(1, 1e-300)` stay representable.
pub fn ln_lower_gamma(a: f64, y: f64) -> Result<f64> {
    check_gamma_args(a, y)?;
    if y == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if use_series(a, y) {
        Ok(a * y.ln() - y - a.ln() + ln_lower_series(a, y)?)
    } else {
        Ok(log_gamma(a)? + ln_reg_lower_gamma(a, y)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_examples() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        // next to the zeros of ln Γ (reference at the exact binary arguments)
        assert!(rel(log_gamma(1.0001).unwrap(), -5.771_334_222_047_126_8e-5) < 1e-14);
        assert!(rel(log_gamma(1.9999).unwrap(), -4.227_520_877_215_345_8e-5) < 1e-14);
        assert!(rel(log_gamma(0.999).unwrap(), 5.780_385_328_913_802_4e-4) < 1e-14);
        assert!(rel(log_gamma(5.0).unwrap(), 24f64.ln()) < 1e-14);
        assert!(rel(log_gamma(0.5).unwrap(), 0.5 * PI.ln()) < 1e-14);
    }

    #[test]
    fn log_gamma_reference_values() {
        // mpmath.loggamma at 30 digits
        let cases = [
            (1e-3, 6.907_178_885_383_853_5),
            (0.1, 2.252_712_651_734_206),
            (3.7, 1.428_072_326_665_387_9),
            (12.5, 18.734_347_511_936_446),
            (250.0, 1_128.523_770_872_990_7),
            (1e6, 12_815_504.569_147_612),
        ];
        for (a, want) in cases {
            let got = log_gamma(a).unwrap();
            assert!(rel(got, want) < 1e-14, "a={a}: {got} vs {want}");
        }
    }

    #[test]
    fn log_gamma_rejects_bad_input() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
        assert!(log_gamma(f64::INFINITY).is_err());
    }

    #[test]
    fn reg_lower_gamma_examples() {
        assert!((reg_lower_gamma(1.0, 1.0).unwrap() - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert_eq!(reg_lower_gamma(1.0, 0.0).unwrap(), 0.0);
        let e10 = (-10f64).exp();
        let want = 1.0 - e10 * (1.0 + 10.0 + 50.0 + 500.0 / 3.0 + 1250.0 / 3.0);
        assert!(rel(reg_lower_gamma(5.0, 10.0).unwrap(), want) < 1e-13);
        assert!((want - 0.970_747_311_923_039).abs() < 1e-12);
    }

    #[test]
    fn reg_lower_gamma_domain_errors() {
        assert!(reg_lower_gamma(0.0, 1.0).is_err());
        assert!(reg_lower_gamma(1.0, -1.0).is_err());
        assert!(ln_lower_gamma(-2.0, 1.0).is_err());
    }

    #[test]
    fn ln_lower_gamma_tiny_argument() {
        // γ(1, y) = 1 - e^{-y} ≈ y for tiny y; P form would lose nothing here
        // but ln γ must not underflow.
        let y = 1e-300;
        let got = ln_lower_gamma(1.0, y).unwrap();
        assert!((got - y.ln()).abs() < 1e-12);
        // γ(250, 22.5): deep left tail, about e^{-600}
        let got = ln_lower_gamma(250.0, 22.5).unwrap();
        let want = ln_reg_lower_gamma(250.0, 22.5).unwrap() + log_gamma(250.0).unwrap();
        assert!(rel(got, want) < 1e-13);
    }

    #[test]
    fn integer_shape_matches_poisson_sum() {
        for a in 1..=20u32 {
            for &y in &[0.1, 0.5, 1.0, 3.0, 7.5, 15.0, 21.0, 40.0] {
                let mut term = 1.0;
                let mut sum = 0.0;
                for j in 0..a {
                    if j > 0 {
                        term *= y / j as f64;
                    }
                    sum += term;
                }
                let closed = 1.0 - (-y as f64).exp() * sum;
                let got = reg_lower_gamma(a as f64, y).unwrap();
                assert!((got - closed).abs() < 1e-12, "a={a} y={y}: {got} vs {closed}");
            }
        }
    }

    #[test]
    fn series_and_fraction_paths_are_complementary() {
        // Both expansions converge in this band, so each checks the other.
        for &(a, y) in &[(2.0, 2.5), (5.0, 5.5), (10.0, 11.5), (30.0, 33.0), (3.3, 5.0)] {
            let ln_p = a * f64::ln(y) - y - log_gamma(a + 1.0).unwrap() + ln_lower_series(a, y).unwrap();
            let ln_q = a * f64::ln(y) - y - log_gamma(a).unwrap() + ln_upper_cf(a, y).unwrap();
            assert!((ln_p.exp() + ln_q.exp() - 1.0).abs() < 1e-12, "a={a} y={y}");
        }
    }

    #[test]
    fn log_sum_examples() {
        assert_eq!(log_sum_weighted(&[0.0]).unwrap(), 0.0);
        assert!((log_sum_weighted(&[2f64.ln(), 3f64.ln()]).unwrap() - 5f64.ln()).abs() < 1e-15);
        let got = log_sum_weighted(&[-1000.0, -1000.0]).unwrap();
        assert!((got - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!(log_sum_weighted(&[]).is_err());
        assert_eq!(log_sum_weighted(&[f64::NEG_INFINITY, f64::NEG_INFINITY]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn log_value_arithmetic() {
        let a = LogValue::from_f64(2.0).unwrap();
        let b = LogValue::from_f64(3.0).unwrap();
        assert!(((a * b).to_f64() - 6.0).abs() < 1e-14);
        assert!(((a + b).to_f64() - 5.0).abs() < 1e-14);
        assert_eq!((a * LogValue::ZERO).is_zero, true);
        assert_eq!((a + LogValue::ZERO), a);
        let huge = LogValue::from_ln(1e6);
        assert!(((huge * huge).ln() - 2e6).abs() < 1e-9);
        assert!(((huge + huge).ln() - (1e6 + 2f64.ln())).abs() < 1e-9);
        assert!(LogValue::from_f64(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn p_monotone_in_y(a in 0.05f64..200.0, y1 in 0.0f64..300.0, dy in 0.0f64..50.0) {
            let p1 = reg_lower_gamma(a, y1).unwrap();
            let p2 = reg_lower_gamma(a, y1 + dy).unwrap();
            prop_assert!(p2 >= p1 - 1e-15);
            prop_assert!((0.0..=1.0).contains(&p1));
        }

        #[test]
        fn p_monotone_in_a(a in 0.05f64..200.0, da in 0.0f64..20.0, y in 0.0f64..300.0) {
            let p1 = reg_lower_gamma(a, y).unwrap();
            let p2 = reg_lower_gamma(a + da, y).unwrap();
            prop_assert!(p2 <= p1 + 1e-15);
        }

        #[test]
        fn p_plus_q_is_one(a in 0.01f64..1000.0, y in 0.0f64..2000.0) {
            let p = reg_lower_gamma(a, y).unwrap();
            let q = reg_upper_gamma(a, y).unwrap();
            prop_assert!((p + q - 1.0).abs() < 1e-12);
        }

        #[test]
        fn log_sum_shift_and_permutation(
            mut v in proptest::collection::vec(-50.0f64..50.0, 1..20),
            c in -1e3f64..1e3,
        ) {
            let base = log_sum_weighted(&v).unwrap();
            let shifted: Vec<f64> = v.iter().map(|t| t + c).collect();
            prop_assert!((log_sum_weighted(&shifted).unwrap() - (base + c)).abs() < 1e-12 * (1.0 + c.abs()));
            v.reverse();
            prop_assert_eq!(log_sum_weighted(&v).unwrap(), base);
        }
    }
}
