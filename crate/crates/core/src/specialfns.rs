//! Modified Bessel functions of the first kind and Poisson tails, evaluated
//! from their power series.
//!
//! Only real, non-negative arguments are supported. Every series is summed
//! with incremental term ratios, so no factorial is ever formed explicitly;
//! for `x <= 200` nothing can overflow, and very high orders underflow
//! cleanly to zero.

use crate::error::{Error, Result};

/// Largest Bessel argument accepted. `I_0(200) ~ 1e85`, well inside `f64`.
pub const MAX_BESSEL_ARG: f64 = 200.0;

/// Below this the leading term of a series is treated as exactly zero.
const UNDERFLOW: f64 = 1e-290;

/// Truncation rule for infinite series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTolerance {
    /// A series stops once a term falls below `eps_abs` times the partial sum.
    pub eps_abs: f64,
    /// Hard cap on the number of terms.
    pub max_terms: usize,
}

impl SeriesTolerance {
    pub fn new(eps_abs: f64, max_terms: usize) -> Result<Self> {
        if !(eps_abs > 0.0 && eps_abs.is_finite()) {
            return Err(Error::Precondition(format!("eps_abs must be positive, got {eps_abs}")));
        }
        if max_terms == 0 {
            return Err(Error::Precondition("max_terms must be at least 1".into()));
        }
        Ok(Self { eps_abs, max_terms })
    }
}

impl Default for SeriesTolerance {
    fn default() -> Self {
        Self { eps_abs: 1e-15, max_terms: 10_000 }
    }
}

fn check_arg(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Precondition(format!("Bessel argument must be >= 0, got {x}")));
    }
    if x > MAX_BESSEL_ARG {
        return Err(Error::OutOfRange(format!(
            "Bessel argument {x} exceeds supported maximum {MAX_BESSEL_ARG}"
        )));
    }
    Ok(())
}

/// Sums a positive series given its first term and the ratio of consecutive
/// terms, `term[s+1] = term[s] * ratio(s)`.
fn ratio_series(first: f64, tol: &SeriesTolerance, ratio: impl Fn(f64) -> f64) -> f64 {
    let mut term = first;
    let mut sum = 0.0;
    for s in 0..tol.max_terms {
        sum += term;
        term *= ratio(s as f64);
        if term < tol.eps_abs * sum {
            break;
        }
    }
    sum
}

/// `(x/2)^order / order!`, or `None` once the product has underflowed past
/// the point where it can recover.
fn leading_term(order: usize, half_x: f64) -> Option<f64> {
    let mut t = 1.0;
    for j in 1..=order {
        t *= half_x / j as f64;
        if t < UNDERFLOW && j as f64 >= half_x {
            return None;
        }
    }
    Some(t)
}

/// Modified Bessel function of the first kind,
/// `I_n(x) = sum_s (x/2)^(n+2s) / ((n+s)! s!)`.
pub fn bessel_i(order: usize, x: f64, tol: &SeriesTolerance) -> Result<f64> {
    check_arg(x)?;
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    let Some(first) = leading_term(order, half) else {
        return Ok(0.0);
    };
    let q = half * half;
    let n = order as f64;
    Ok(ratio_series(first, tol, |s| q / ((n + s + 1.0) * (s + 1.0))))
}

/// `(u/v)^n I_n(2uv)`, summed directly as
/// `sum_s u^(2n+2s) v^(2s) / ((n+s)! s!)`.
///
/// The weighted form stays finite when `v -> 0`, where the two factors
/// separately overflow and underflow.
pub fn bessel_i_weighted(order: usize, u: f64, v: f64, tol: &SeriesTolerance) -> Result<f64> {
    if u.is_nan() || v.is_nan() || u < 0.0 || v < 0.0 {
        return Err(Error::Precondition(format!("weights must be >= 0, got u={u}, v={v}")));
    }
    check_arg(2.0 * u * v)?;
    check_arg(u * u)?;
    let u2 = u * u;
    let Some(first) = leading_term(order, u2) else {
        return Ok(0.0);
    };
    if first == 0.0 {
        return Ok(0.0);
    }
    let q = u2 * v * v;
    let n = order as f64;
    Ok(ratio_series(first, tol, |s| q / ((n + s + 1.0) * (s + 1.0))))
}

/// Stripe sum `sum_{k>=1} I_{step*k}(x)`.
///
/// Stops when a term drops below `eps_abs * (sum + 1)`. `I_n(x)` decreases
/// in `n`, so an exactly-zero (underflowed) term ends the sum as well.
pub fn bessel_sum(order_step: usize, x: f64, tol: &SeriesTolerance) -> Result<f64> {
    bessel_sum_with_floor(order_step, x, tol, 1)
}

/// As [`bessel_sum`], but never stops on the relative rule before
/// `min_terms` terms have been added.
pub fn bessel_sum_with_floor(
    order_step: usize,
    x: f64,
    tol: &SeriesTolerance,
    min_terms: usize,
) -> Result<f64> {
    if order_step == 0 {
        return Err(Error::Precondition("stripe period must be >= 1".into()));
    }
    check_arg(x)?;
    let mut sum = 0.0;
    for k in 1..=tol.max_terms {
        let term = bessel_i(order_step * k, x, tol)?;
        sum += term;
        if term == 0.0 || (k >= min_terms && term < tol.eps_abs * (sum + 1.0)) {
            break;
        }
    }
    Ok(sum)
}

/// `e^{-(x^2+y^2)} sum_{k in Z} (x/y)^k I_k(2xy)`, which equals one for all
/// `x, y >= 0` (generating function of `I_k`). At `x = y` it reduces to
/// `e^{-2x^2} (I_0 + 2 sum_{k>=1} I_k)(2x^2)`.
pub fn bessel_generating_sum(x: f64, y: f64, tol: &SeriesTolerance) -> Result<f64> {
    let mut acc = CompensatedSum::default();
    acc.add(bessel_i_weighted(0, x, y, tol)?);
    // terms can grow until k ~ max(x, y)^2 before they decay
    let peak = x.max(y).powi(2);
    for k in 1..=tol.max_terms {
        let term = bessel_i_weighted(k, x, y, tol)? + bessel_i_weighted(k, y, x, tol)?;
        acc.add(term);
        if term == 0.0 || (k as f64 > peak && term < tol.eps_abs * acc.value()) {
            break;
        }
    }
    Ok((-(x * x) - y * y).exp() * acc.value())
}

/// Neumaier-compensated accumulator.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Poisson probability mass `e^-lambda lambda^m / m!` for `lambda > 0`.
fn poisson_pmf(m: usize, lambda: f64) -> f64 {
    if lambda < 600.0 {
        let mut p = (-lambda).exp();
        for j in 1..=m {
            p *= lambda / j as f64;
            if p == 0.0 {
                break;
            }
        }
        p
    } else {
        let ln_fact: f64 = (1..=m).map(|j| (j as f64).ln()).sum();
        (-lambda + m as f64 * lambda.ln() - ln_fact).exp()
    }
}

/// Upper Poisson tail `P(X > n) = sum_{m>n} e^-lambda lambda^m / m!`.
///
/// For `n < lambda` this is one minus the lower sum (which is then the
/// smaller side); otherwise the upper terms are summed directly. Both
/// branches use compensated summation. The result is clamped to `[0, 1]`.
pub fn poisson_tail(n: usize, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0, "negative Poisson mean {lambda}");
    if lambda <= 0.0 {
        return 0.0;
    }
    if (n as f64) < lambda {
        // walk down from m = n, where the lower terms are largest
        let mut acc = CompensatedSum::default();
        let mut p = poisson_pmf(n, lambda);
        let mut m = n;
        loop {
            acc.add(p);
            if m == 0 {
                break;
            }
            p *= m as f64 / lambda;
            m -= 1;
            if p < 1e-18 * acc.value() {
                break;
            }
        }
        (1.0 - acc.value()).clamp(0.0, 1.0)
    } else {
        let mut acc = CompensatedSum::default();
        let mut p = poisson_pmf(n + 1, lambda);
        let mut m = n + 1;
        while p > 0.0 {
            acc.add(p);
            m += 1;
            p *= lambda / m as f64;
            if p < 1e-18 * acc.value() {
                break;
            }
        }
        acc.value().clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> SeriesTolerance {
        SeriesTolerance::default()
    }

    #[test]
    fn bessel_at_zero() {
        assert_eq!(bessel_i(0, 0.0, &tol()).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0, &tol()).unwrap(), 0.0);
        assert_eq!(bessel_i(7, 0.0, &tol()).unwrap(), 0.0);
    }

    #[test]
    fn bessel_rejects_bad_arguments() {
        assert!(matches!(bessel_i(0, 250.0, &tol()), Err(Error::OutOfRange(_))));
        assert!(matches!(bessel_i(0, f64::INFINITY, &tol()), Err(Error::OutOfRange(_))));
        assert!(matches!(bessel_i(0, -1.0, &tol()), Err(Error::Precondition(_))));
        assert!(SeriesTolerance::new(0.0, 10).is_err());
        assert!(SeriesTolerance::new(1e-10, 0).is_err());
    }

    #[test]
    fn bessel_edge_of_range_is_finite() {
        let v = bessel_i(0, MAX_BESSEL_ARG, &tol()).unwrap();
        assert!(v.is_finite() && v > 1e80);
        // very high orders underflow to zero instead of overflowing
        assert_eq!(bessel_i(100_000, 2.0, &tol()).unwrap(), 0.0);
        assert!(bessel_i(500, MAX_BESSEL_ARG, &tol()).unwrap().is_finite());
    }

    #[test]
    fn weighted_matches_product_form() {
        for &(n, u, v) in &[(1usize, 2.0, 1.0), (3, 1.5, 0.5), (5, 2.0, 0.25), (0, 1.0, 1.0)] {
            let direct = (u / v as f64).powi(n as i32) * bessel_i(n, 2.0 * u * v, &tol()).unwrap();
            let w = bessel_i_weighted(n, u, v, &tol()).unwrap();
            assert!((w - direct).abs() <= 1e-13 * direct, "n={n}: {w} vs {direct}");
        }
        // v -> 0 limit is u^(2n)/n!
        let w = bessel_i_weighted(3, 2.0, 0.0, &tol()).unwrap();
        assert!((w - 64.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn stripe_sum_at_zero() {
        for k in 1..6 {
            assert_eq!(bessel_sum(k, 0.0, &tol()).unwrap(), 0.0);
        }
        assert!(bessel_sum(0, 1.0, &tol()).is_err());
    }

    #[test]
    fn stripe_sum_identity_at_four() {
        let x = 4.0;
        let i0 = bessel_i(0, x, &tol()).unwrap();
        let s = bessel_sum(1, x, &tol()).unwrap();
        assert!(((-x as f64).exp() * (i0 + 2.0 * s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stripe_sum_with_floor_matches_plain() {
        let a = bessel_sum(3, 2.0, &tol()).unwrap();
        let b = bessel_sum_with_floor(3, 2.0, &tol(), 30).unwrap();
        assert!((a - b).abs() < 1e-16);
    }

    #[test]
    fn poisson_tail_trivial_cases() {
        for n in 0..10 {
            assert_eq!(poisson_tail(n, 0.0), 0.0);
        }
        assert!((poisson_tail(0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-16);
    }

    #[test]
    fn poisson_tail_both_flanks_agree_with_direct_sums() {
        // lower-complement branch
        let lam = 30.0;
        let direct: f64 = (11..400).map(|m| poisson_pmf(m, lam)).sum();
        assert!((poisson_tail(10, lam) - direct).abs() < 1e-15);
        // large-mean log-domain branch
        let lam = 650.0;
        let t = poisson_tail(650, lam);
        assert!(t > 0.45 && t < 0.5, "{t}");
    }

    #[test]
    fn poisson_tail_far_upper_is_tiny_not_negative() {
        let t = poisson_tail(200, 4.0);
        assert!(t >= 0.0 && t < 1e-200);
    }
}
