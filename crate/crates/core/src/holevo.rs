//! Holevo bound of the encrypted channel.
//!
//! The state leaving the sender, averaged over uniformly distributed inputs
//! `beta` and keys `alpha` on the disk of radius `b`, is diagonal in the Fock
//! basis with weights
//!
//! ```text
//! lambda_n ∝ ∫_0^b ∫_0^b ∫_0^{2pi} e^{-R^2} R^{2n}/n! x y dx dy dphi,
//! R^2 = x^2 + y^2 - 2xy cos(phi)
//! ```
//!
//! (the photon-number distribution of `|alpha + beta>` times the polar
//! measure). The bound is then `S(Lambda) - S(I_b)` in bits.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ensembles::disk_diagonal;
use crate::error::{Error, Result};
use crate::fock::{coherent_amplitudes, shannon_entropy_bits, CoherentLabel, CutoffPolicy, C64};

/// Largest refinement disagreement accepted in any `lambda_n`.
pub const MAX_QUAD_DISAGREEMENT: f64 = 1e-6;
/// Slack below zero before a negative Holevo quantity is an error.
pub const NEGATIVE_CHI_TOL: f64 = 1e-6;
/// Fock cutoff used by the Monte Carlo diagonality check.
pub const OFF_DIAGONAL_MAX_DIM: usize = 20;

/// Tensor-product rule: Gauss–Legendre in both radii, periodic trapezoid in
/// the relative angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSettings {
    pub legendre_order: usize,
    /// Must be even.
    pub phi_points: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { legendre_order: 64, phi_points: 256 }
    }
}

impl QuadratureSettings {
    pub fn refined(&self) -> Self {
        Self { legendre_order: 2 * self.legendre_order, phi_points: 2 * self.phi_points }
    }

    fn validate(&self) -> Result<()> {
        if self.legendre_order == 0 || self.phi_points < 2 || self.phi_points % 2 != 0 {
            return Err(Error::Precondition(format!("invalid quadrature settings {self:?}")));
        }
        Ok(())
    }
}

/// Normalized diagonal of the total channel state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSpectrum {
    pub b: f64,
    /// `lambda_n`, `n = 0..dim`, summing to one.
    pub weights: Vec<f64>,
    /// Largest refinement disagreement plus the mass lost beyond `dim`.
    pub quad_error: f64,
    pub dim: usize,
    /// Settings of the finer level, whose weights are reported.
    pub quadrature: QuadratureSettings,
    /// Raw integral over its analytic value `pi b^4 / 2` with the
    /// `R^{2n}` integrand; one up to the truncated tail.
    pub norm_ratio: f64,
    /// Same ratio with an extra factor `R` in the integrand (the
    /// `R^{2n+1}` reading). Not one, which is why that reading is not used.
    pub norm_ratio_extra_r: f64,
}

struct LevelIntegral {
    raw: Vec<f64>,
    total_extra_r: f64,
}

fn integrate_level(b: f64, quad: QuadratureSettings, dim: usize) -> LevelIntegral {
    let order = NonZeroUsize::new(quad.legendre_order).expect("validated");
    let rule = GaussLegendre::new(order);
    let nodes: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(xi, w)| {
            let x = 0.5 * b * (xi + 1.0);
            (x, 0.5 * b * w * x)
        })
        .collect();
    // cos(phi) is even: fold the periodic grid onto [0, pi]
    let half = quad.phi_points / 2;
    let dphi = TAU / quad.phi_points as f64;
    let angles: Vec<(f64, f64)> = (0..=half)
        .map(|k| {
            let w = if k == 0 || k == half { dphi } else { 2.0 * dphi };
            ((dphi * k as f64).cos(), w)
        })
        .collect();

    let mut raw = vec![0.0; dim];
    let mut total_extra_r = 0.0;
    for (i, &(x, wx)) in nodes.iter().enumerate() {
        for (j, &(y, wy)) in nodes.iter().enumerate().skip(i) {
            let sym = if i == j { 1.0 } else { 2.0 };
            for &(c, wphi) in &angles {
                let r2 = (x * x + y * y - 2.0 * x * y * c).max(0.0);
                let w = sym * wx * wy * wphi;
                total_extra_r += w * r2.sqrt();
                let mut p = w * (-r2).exp();
                for (n, slot) in raw.iter_mut().enumerate() {
                    *slot += p;
                    p *= r2 / (n + 1) as f64;
                }
            }
        }
    }
    LevelIntegral { raw, total_extra_r }
}

/// Computes `lambda_n` at two quadrature levels and reports the finer one.
///
/// `cutoff.max_radius` must reach `2b`, the radius the total state covers.
pub fn lambda_spectrum(b: f64, quad: QuadratureSettings, cutoff: &CutoffPolicy) -> Result<LambdaSpectrum> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Precondition(format!("b must be positive, got {b}")));
    }
    quad.validate()?;
    cutoff.admit(2.0 * b)?;
    let dim = cutoff.dim();
    let analytic = PI * b.powi(4) / 2.0;

    let coarse = integrate_level(b, quad, dim);
    let fine_quad = quad.refined();
    let fine = integrate_level(b, fine_quad, dim);

    let normalize = |raw: &[f64]| -> Vec<f64> {
        let s: f64 = raw.iter().sum();
        raw.iter().map(|x| x / s).collect()
    };
    let wc = normalize(&coarse.raw);
    let wf = normalize(&fine.raw);
    let disagreement = wc.iter().zip(&wf).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
    if !(disagreement <= MAX_QUAD_DISAGREEMENT) {
        return Err(Error::Convergence(format!(
            "b={b}: lambda_n differ by {disagreement:e} between {quad:?} and {fine_quad:?}"
        )));
    }
    let norm_ratio = fine.raw.iter().sum::<f64>() / analytic;
    Ok(LambdaSpectrum {
        b,
        weights: wf,
        quad_error: disagreement + (1.0 - norm_ratio).abs(),
        dim,
        quadrature: fine_quad,
        norm_ratio,
        norm_ratio_extra_r: fine.total_extra_r / analytic,
    })
}

impl LambdaSpectrum {
    pub fn entropy_bits(&self) -> f64 {
        shannon_entropy_bits(&self.weights)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolevoBound {
    pub b: f64,
    pub chi_bits: f64,
    /// `S(Lambda)`
    pub total_entropy: f64,
    /// `S(I_b)`
    pub disk_entropy: f64,
    pub spectrum: LambdaSpectrum,
}

/// `chi = S(Lambda) - S(I_b)` in bits. Both states are diagonal, so both
/// entropies come straight from their diagonals.
pub fn holevo_bound(b: f64, quad: QuadratureSettings, cutoff: &CutoffPolicy) -> Result<HolevoBound> {
    let spectrum = lambda_spectrum(b, quad, cutoff)?;
    let total_entropy = spectrum.entropy_bits();
    let disk_entropy = shannon_entropy_bits(&disk_diagonal(b, spectrum.dim));
    let chi = total_entropy - disk_entropy;
    let chi_bits = if chi >= 0.0 {
        chi
    } else if chi >= -NEGATIVE_CHI_TOL {
        0.0
    } else {
        return Err(Error::Consistency(format!("negative Holevo quantity {chi:e} at b={b}")));
    };
    Ok(HolevoBound { b, chi_bits, total_entropy, disk_entropy, spectrum })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolevoSample {
    pub b: f64,
    /// `Err` holds the failure message; the curve keeps the gap.
    pub result: std::result::Result<HolevoBound, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolevoCurve {
    pub samples: Vec<HolevoSample>,
}

/// Holevo bound at every grid point. Points are evaluated concurrently;
/// each one is deterministic, so the curve is too.
pub fn holevo_curve(b_grid: &[f64], quad: QuadratureSettings, tail_budget: f64) -> HolevoCurve {
    let eval = |b: f64| -> HolevoSample {
        let result = CutoffPolicy::new(tail_budget, 2.0 * b)
            .and_then(|cut| holevo_bound(b, quad, &cut))
            .map_err(|e| e.to_string());
        HolevoSample { b, result }
    };
    let samples = std::thread::scope(|s| {
        let handles: Vec<_> = b_grid.iter().map(|&b| s.spawn(move || eval(b))).collect();
        handles.into_iter().map(|h| h.join().expect("holevo worker panicked")).collect()
    });
    HolevoCurve { samples }
}

impl HolevoCurve {
    /// `b,chi_bits,quad_error,dim`; failed points keep their `b` and leave
    /// the other fields empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("b,chi_bits,quad_error,dim\n");
        for s in &self.samples {
            match &s.result {
                Ok(h) => writeln!(out, "{},{},{},{}", s.b, h.chi_bits, h.spectrum.quad_error, h.spectrum.dim),
                Err(_) => writeln!(out, "{},,,", s.b),
            }
            .expect("writing to a String");
        }
        out
    }
}

/// Monte Carlo estimate of the unreordered double mixture
/// `∫ D(alpha) (∫ |beta><beta| d^2beta) D(alpha)^dag d^2alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffDiagonalReport {
    pub b: f64,
    pub dim: usize,
    pub samples: usize,
    /// Largest `|mean|` over off-diagonal entries.
    pub max_abs: f64,
    /// Standard error of the entry attaining `max_abs`.
    pub std_error_at_max: f64,
    /// Largest `|mean| / std_error` over off-diagonal entries.
    pub max_z: f64,
    pub min_diagonal: f64,
}

impl OffDiagonalReport {
    /// True when every off-diagonal mean lies within `k` standard errors of 0.
    pub fn within_sigmas(&self, k: f64) -> bool {
        self.max_z <= k
    }
}

/// Samples `alpha` and `beta` uniformly on the disk, accumulates the
/// projector onto `|alpha + beta>` (the displacement phase cancels in a
/// projector), and reports how far the off-diagonal means are from zero.
pub fn off_diagonal_check(b: f64, samples: usize, seed: u64) -> Result<OffDiagonalReport> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Precondition(format!("b must be positive, got {b}")));
    }
    if samples < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    let dim = CutoffPolicy::for_radius(2.0 * b)?.dim().min(OFF_DIAGONAL_MAX_DIM);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let disk = |rng: &mut ChaCha8Rng| {
        let r = b * rng.random::<f64>().sqrt();
        C64::from_polar(r, TAU * rng.random::<f64>())
    };
    let pairs = dim * (dim - 1) / 2;
    let mut sum = vec![C64::new(0.0, 0.0); pairs];
    let mut sum_sq = vec![0.0; pairs];
    let mut diag = vec![0.0; dim];
    for _ in 0..samples {
        let gamma = disk(&mut rng) + disk(&mut rng);
        let a = coherent_amplitudes(CoherentLabel::from_complex(gamma), dim);
        let mut idx = 0;
        for m in 0..dim {
            diag[m] += a[m].norm_sqr();
            for n in (m + 1)..dim {
                let z = a[m] * a[n].conj();
                sum[idx] += z;
                sum_sq[idx] += z.norm_sqr();
                idx += 1;
            }
        }
    }
    let ns = samples as f64;
    let mut report = OffDiagonalReport {
        b,
        dim,
        samples,
        max_abs: 0.0,
        std_error_at_max: 0.0,
        max_z: 0.0,
        min_diagonal: diag.iter().map(|d| d / ns).fold(f64::INFINITY, f64::min),
    };
    for (s, sq) in sum.iter().zip(&sum_sq) {
        let mean = s / ns;
        let var = ((sq / ns) - mean.norm_sqr()).max(0.0) * ns / (ns - 1.0);
        let se = (var / ns).sqrt();
        let mag = mean.norm();
        if mag > report.max_abs {
            report.max_abs = mag;
            report.std_error_at_max = se;
        }
        if se > 0.0 {
            report.max_z = report.max_z.max(mag / se);
        }
    }
    Ok(report)
}

/// Monte Carlo estimate of `lambda_n`, `n < dim`, with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

impl LambdaEstimate {
    /// Largest `|mean_n - reference_n| / std_error_n` (zero-variance entries
    /// must match to roundoff).
    pub fn max_z(&self, reference: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(&self.std_error)
            .zip(reference)
            .map(|((m, se), r)| {
                let dev = (m - r).abs();
                if *se > 0.0 {
                    dev / se
                } else if dev < 1e-15 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Draws `x`, `y` with density `∝ x` on `[0, b]` and `phi` uniform, and
/// averages the Poisson weights of `R^2`.
pub fn monte_carlo_lambda(b: f64, dim: usize, samples: usize, seed: u64) -> Result<LambdaEstimate> {
    if !(b > 0.0 && b.is_finite()) || samples < 2 || dim == 0 {
        return Err(Error::Precondition(format!("bad Monte Carlo setup b={b} dim={dim} samples={samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; dim];
    let mut sum_sq = vec![0.0; dim];
    for _ in 0..samples {
        let x = b * rng.random::<f64>().sqrt();
        let y = b * rng.random::<f64>().sqrt();
        let c = (TAU * rng.random::<f64>()).cos();
        let r2 = (x * x + y * y - 2.0 * x * y * c).max(0.0);
        let mut p = (-r2).exp();
        for n in 0..dim {
            sum[n] += p;
            sum_sq[n] += p * p;
            p *= r2 / (n + 1) as f64;
        }
    }
    let ns = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / ns).collect();
    let std_error = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| (((sq / ns) - m * m).max(0.0) / (ns - 1.0)).sqrt())
        .collect();
    Ok(LambdaEstimate { mean, std_error })
}
