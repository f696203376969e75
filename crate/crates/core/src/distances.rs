//! Closed-form Hilbert–Schmidt distances between the disk-mixed state and
//! the encryption ensembles, assembled from modified Bessel series.
//!
//! `D^2 = Tr(I_b^2) - 2 Tr(I_b Phi_N) + Tr(Phi_N^2)`; each trace has its own
//! function so it can be checked against the dense-matrix value on its own.

use serde::Serialize;

use crate::ensembles::{circle_mixture, maximally_mixed, phi_n, ChannelSpec, SimplifiedSpec};
use crate::error::{Error, Result};
use crate::fock::{hs_distance_numeric, CutoffPolicy, FockOperator};
use crate::specialfns::{bessel_i, bessel_i_weighted, SeriesTolerance};

/// Minimum number of terms in every `k`-sum, whatever the relative rule says.
pub const MIN_K_TERMS: usize = 30;

/// Roundoff allowance below zero for a squared distance.
pub const NEGATIVE_D2_TOL: f64 = 1e-12;

/// Sum of `term(k)` over `k >= 1`, stopping on the relative rule once at
/// least [`MIN_K_TERMS`] terms are in, or at the first exactly-zero term of
/// a decreasing sequence.
fn k_sum(tol: &SeriesTolerance, mut term: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
    let mut sum = 0.0;
    for k in 1..=tol.max_terms {
        let t = term(k)?;
        sum += t;
        if k >= MIN_K_TERMS && (t == 0.0 || t < tol.eps_abs * sum) {
            break;
        }
    }
    Ok(sum)
}

/// `I_0(x) + 2 sum_{k>=1} I_{step k}(x)`, scaled by `e^{-x}`-style prefactors
/// by the caller.
fn stripe_bessel(step: usize, x: f64, tol: &SeriesTolerance) -> Result<f64> {
    let i0 = bessel_i(0, x, tol)?;
    let mut sum = 0.0;
    for k in 1..=tol.max_terms {
        let t = bessel_i(step * k, x, tol)?;
        sum += t;
        // I_n decreases in n, so a zero term ends the stripe sum
        if t == 0.0 || (k >= MIN_K_TERMS && t < tol.eps_abs * (i0 + 2.0 * sum)) {
            break;
        }
    }
    Ok(i0 + 2.0 * sum)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn check_b(b: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Precondition(format!("b must be positive, got {b}")));
    }
    Ok(())
}

/// Purity of the disk-mixed state,
/// `Tr(I_b^2) = (e^{2b^2} - I_0(2b^2) - I_1(2b^2)) / (b^2 e^{2b^2})`.
///
/// Evaluated as `e^{-2b^2} (I_1 + 2 sum_{k>=2} I_k) / b^2`, which equals the
/// closed form by the generating-function identity and does not cancel
/// for small `b`.
pub fn trace_unit_sq(b: f64, tol: &SeriesTolerance) -> Result<f64> {
    check_b(b)?;
    let x = 2.0 * b * b;
    let i1 = bessel_i(1, x, tol)?;
    let rest = k_sum(tol, |k| bessel_i(k + 1, x, tol))?;
    Ok((-x).exp() * (i1 + 2.0 * rest) / (b * b))
}

/// `e^{-b^2 - r^2} sum_k (b/r)^k I_k(2rb)`, i.e. `b^2 Tr(I_b rho)` for a
/// circle mixture of radius `r`.
fn cross_series(b: f64, r: f64, tol: &SeriesTolerance) -> Result<f64> {
    let s = k_sum(tol, |k| bessel_i_weighted(k, b, r, tol))?;
    Ok((-(b * b) - r * r).exp() * s)
}

/// Overlap `Tr(I_b Phi_N)`.
pub fn trace_cross(b: f64, n: usize, tol: &SeriesTolerance) -> Result<f64> {
    let spec = ChannelSpec::new(b, n)?;
    let mut acc = 0.0;
    for p in 1..=n {
        acc += p as f64 * cross_series(b, spec.radius(p), tol)?;
    }
    Ok(acc / (spec.operations() as f64 * b * b))
}

/// `Tr(rho_{p1} rho_{p2})` for circle mixtures of radii `r1`, `r2`.
///
/// The two matrices share non-zero stripes where `|m - n|` is a multiple of
/// `lcm(p1, p2)`, so that is the stripe period of the Bessel sum.
pub fn trace_circle_pair(p1: usize, r1: f64, p2: usize, r2: f64, tol: &SeriesTolerance) -> Result<f64> {
    let x = 2.0 * r1 * r2;
    Ok((-(r1 * r1) - r2 * r2).exp() * stripe_bessel(lcm(p1, p2), x, tol)?)
}

/// Purity of the encryption ensemble, `Tr(Phi_N^2)`.
pub fn trace_phi_sq(b: f64, n: usize, tol: &SeriesTolerance) -> Result<f64> {
    let spec = ChannelSpec::new(b, n)?;
    let mut acc = 0.0;
    for p1 in 1..=n {
        let r1 = spec.radius(p1);
        acc += (p1 * p1) as f64 * trace_circle_pair(p1, r1, p1, r1, tol)?;
        for p2 in (p1 + 1)..=n {
            acc += 2.0 * (p1 * p2) as f64 * trace_circle_pair(p1, r1, p2, spec.radius(p2), tol)?;
        }
    }
    let m = spec.operations() as f64;
    Ok(acc / (m * m))
}

/// The three traces making up a squared HS distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceTerms {
    /// `Tr(I_b^2)`
    pub unit_sq: f64,
    /// `Tr(I_b sigma)`
    pub cross: f64,
    /// `Tr(sigma^2)`
    pub other_sq: f64,
}

impl TraceTerms {
    pub fn d2(&self) -> f64 {
        self.unit_sq - 2.0 * self.cross + self.other_sq
    }

    /// Same three traces from dense matrices.
    pub fn from_matrices(unit: &FockOperator, sigma: &FockOperator) -> Result<Self> {
        Ok(Self {
            unit_sq: unit.trace_product(unit)?.re,
            cross: unit.trace_product(sigma)?.re,
            other_sq: sigma.trace_product(sigma)?.re,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum Protocol {
    Full { n: usize },
    Simplified { p: usize, r: f64 },
}

/// Analytic and (optionally) matrix-oracle squared distances for one
/// parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub b: f64,
    pub protocol: Protocol,
    pub d2_exact: f64,
    /// `1/(N+1)^2`; `None` for the simplified protocol.
    pub d2_guess: Option<f64>,
    pub d2_numeric: Option<f64>,
    pub terms: TraceTerms,
    /// Oracle traces, when the oracle was run.
    pub numeric_terms: Option<TraceTerms>,
    /// Fock dimension of the oracle matrices.
    pub oracle_dim: Option<usize>,
}

impl DistanceReport {
    /// `|d2_exact - d2_numeric|`, when the oracle was run.
    pub fn discrepancy(&self) -> Option<f64> {
        self.d2_numeric.map(|n| (self.d2_exact - n).abs())
    }

    /// Runs the dense-matrix oracle at the given tail budget and fills in
    /// the numeric fields.
    pub fn with_oracle(mut self, tail_budget: f64) -> Result<Self> {
        let cut = CutoffPolicy::new(tail_budget, self.b)?;
        let unit = maximally_mixed(self.b, &cut)?;
        let sigma = match self.protocol {
            Protocol::Full { n } => phi_n(&ChannelSpec::new(self.b, n)?, &cut)?,
            Protocol::Simplified { p, r } => circle_mixture(p, r, &cut)?,
        };
        let d = hs_distance_numeric(&unit, &sigma)?;
        self.d2_numeric = Some(d * d);
        self.numeric_terms = Some(TraceTerms::from_matrices(&unit, &sigma)?);
        self.oracle_dim = Some(cut.dim());
        Ok(self)
    }
}

fn clamp_d2(d2: f64) -> Result<f64> {
    if d2 >= 0.0 {
        Ok(d2)
    } else if d2 >= -NEGATIVE_D2_TOL {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!(
            "squared distance {d2:e} is negative beyond roundoff; series truncated too early?"
        )))
    }
}

/// Exact squared HS distance between the disk-mixed state and `Phi_N`.
pub fn hs2_exact(b: f64, n: usize, tol: &SeriesTolerance) -> Result<DistanceReport> {
    let terms = TraceTerms {
        unit_sq: trace_unit_sq(b, tol)?,
        cross: trace_cross(b, n, tol)?,
        other_sq: trace_phi_sq(b, n, tol)?,
    };
    Ok(DistanceReport {
        b,
        protocol: Protocol::Full { n },
        d2_exact: clamp_d2(terms.d2())?,
        d2_guess: Some(hs2_guess(n)),
        d2_numeric: None,
        terms,
        numeric_terms: None,
        oracle_dim: None,
    })
}

/// Large-`N` estimate `1/(N+1)^2` of the squared distance.
pub fn hs2_guess(n: usize) -> f64 {
    let k = (n + 1) as f64;
    1.0 / (k * k)
}

/// Key length in bits needed for a target HS distance, `-1 - 2 log2 d`.
pub fn key_bits(d_hs: f64) -> Result<f64> {
    if !(d_hs > 0.0 && d_hs < 1.0) {
        return Err(Error::Precondition(format!(
            "key-length estimate needs 0 < D_HS < 1, got {d_hs}"
        )));
    }
    Ok(-1.0 - 2.0 * d_hs.log2())
}

/// Exact key length `log2 M` for `N` circles.
pub fn key_bits_exact(n: usize) -> f64 {
    ((n * (n + 1) / 2) as f64).log2()
}

/// Squared distance of the simplified protocol as a function of `(p, r)` at
/// fixed `b`. Caches `Tr(I_b^2)`, which does not depend on `(p, r)`.
#[derive(Debug, Clone, Copy)]
pub struct SimplifiedProfile {
    pub b: f64,
    unit_sq: f64,
    tol: SeriesTolerance,
}

impl SimplifiedProfile {
    pub fn new(b: f64, tol: &SeriesTolerance) -> Result<Self> {
        Ok(Self { b, unit_sq: trace_unit_sq(b, tol)?, tol: *tol })
    }

    pub fn terms(&self, p: usize, r: f64) -> Result<TraceTerms> {
        SimplifiedSpec::new(self.b, p, r)?;
        Ok(TraceTerms {
            unit_sq: self.unit_sq,
            cross: cross_series(self.b, r, &self.tol)? / (self.b * self.b),
            other_sq: trace_circle_pair(p, r, p, r, &self.tol)?,
        })
    }

    pub fn d2(&self, p: usize, r: f64) -> Result<f64> {
        clamp_d2(self.terms(p, r)?.d2())
    }
}

/// Squared HS distance between the disk-mixed state and a single circle
/// mixture of `p` states at radius `r`.
pub fn hs2_simplified(b: f64, p: usize, r: f64, tol: &SeriesTolerance) -> Result<f64> {
    SimplifiedProfile::new(b, tol)?.d2(p, r)
}

/// Full report for the simplified protocol.
pub fn simplified_report(b: f64, p: usize, r: f64, tol: &SeriesTolerance) -> Result<DistanceReport> {
    let terms = SimplifiedProfile::new(b, tol)?.terms(p, r)?;
    Ok(DistanceReport {
        b,
        protocol: Protocol::Simplified { p, r },
        d2_exact: clamp_d2(terms.d2())?,
        d2_guess: None,
        d2_numeric: None,
        terms,
        numeric_terms: None,
        oracle_dim: None,
    })
}
