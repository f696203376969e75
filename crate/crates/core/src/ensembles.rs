//! Constructors for the states of the protocol: the disk-mixed state, the
//! circle mixtures and the full encryption ensemble built from them, and
//! the phase-shift ensemble of the simplified protocol.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{displacement_conjugate, CoherentLabel, CutoffPolicy, FockOperator, C64};
use crate::specialfns::poisson_tail;

/// Full protocol parameters: input disk radius `b` and circle count `n`.
///
/// Circle `p` (1-based) has radius `p b / n` and carries `p` states, for
/// `n(n+1)/2` displacement operations in total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub b: f64,
    pub n: usize,
}

impl ChannelSpec {
    pub fn new(b: f64, n: usize) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Precondition(format!("disk radius b must be positive, got {b}")));
        }
        if n == 0 {
            return Err(Error::Precondition("circle count N must be >= 1".into()));
        }
        Ok(Self { b, n })
    }

    /// Number of encryption operations.
    pub fn operations(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    /// Radius of circle `p`, `1 <= p <= n`.
    pub fn radius(&self, p: usize) -> f64 {
        if p == self.n {
            self.b
        } else {
            p as f64 * self.b / self.n as f64
        }
    }
}

/// Simplified protocol: one displacement of radius `r` followed by `p`
/// equally spaced phase shifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedSpec {
    pub b: f64,
    pub p: usize,
    pub r: f64,
}

impl SimplifiedSpec {
    pub fn new(b: f64, p: usize, r: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Precondition(format!("disk radius b must be positive, got {b}")));
        }
        if p == 0 {
            return Err(Error::Precondition("phase-shift count p must be >= 1".into()));
        }
        if !(r > 0.0 && r <= b) {
            return Err(Error::Precondition(format!("displacement radius must lie in (0, b], got {r}")));
        }
        Ok(Self { b, p, r })
    }

    /// Rotation angles `q 2pi/p`, `q = 1..=p`.
    pub fn rotation_angles(&self) -> Vec<f64> {
        (1..=self.p).map(|q| q as f64 * TAU / self.p as f64).collect()
    }
}

/// Angles of the canonical circle conformation, `2 pi q / p` for
/// `q = 1..=p`. With these the mixture is a real matrix whose stripes are
/// all non-negative.
pub fn canonical_angles(p: usize) -> Vec<f64> {
    (1..=p).map(|q| TAU * q as f64 / p as f64).collect()
}

/// Diagonal of the disk-mixed state, `P(Poisson(b^2) > n) / b^2`.
pub fn disk_diagonal(b: f64, dim: usize) -> Vec<f64> {
    let lam = b * b;
    (0..dim).map(|n| poisson_tail(n, lam) / lam).collect()
}

fn check_b(b: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Precondition(format!("disk radius b must be positive, got {b}")));
    }
    Ok(())
}

/// Uniform mixture of all coherent projectors over the disk of radius `b`.
/// Diagonal in the Fock basis.
pub fn maximally_mixed(b: f64, cutoff: &CutoffPolicy) -> Result<FockOperator> {
    check_b(b)?;
    cutoff.admit(b)?;
    Ok(FockOperator::from_diagonal(&disk_diagonal(b, cutoff.dim())))
}

/// Real amplitudes `e^{-r^2/2} r^n / sqrt(n!)`.
fn real_amplitudes(r: f64, dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim);
    let mut c = (-0.5 * r * r).exp();
    for n in 0..dim {
        out.push(c);
        c *= r / ((n + 1) as f64).sqrt();
    }
    out
}

fn circle_mixture_dim(p: usize, radius: f64, dim: usize) -> FockOperator {
    let a = real_amplitudes(radius, dim);
    FockOperator::from_real_fn(dim, |m, n| if m.abs_diff(n) % p == 0 { a[m] * a[n] } else { 0.0 })
}

/// Uniform mixture of `p` coherent states at radius `radius` in the
/// canonical conformation: entries `e^{-r^2} r^{m+n} / sqrt(m! n!)` where
/// `|m - n|` is a multiple of `p`, exact zeros elsewhere.
pub fn circle_mixture(p: usize, radius: f64, cutoff: &CutoffPolicy) -> Result<FockOperator> {
    if p == 0 {
        return Err(Error::Precondition("p must be >= 1".into()));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(format!("radius must be >= 0, got {radius}")));
    }
    cutoff.admit(radius)?;
    Ok(circle_mixture_dim(p, radius, cutoff.dim()))
}

/// Full encryption ensemble `(1/M) sum_p p rho_p`, assembled from the
/// analytic stripe entries.
pub fn phi_n(spec: &ChannelSpec, cutoff: &CutoffPolicy) -> Result<FockOperator> {
    cutoff.admit(spec.b)?;
    let dim = cutoff.dim();
    let mut acc = nalgebra::DMatrix::<C64>::zeros(dim, dim);
    let norm = spec.operations() as f64;
    for p in 1..=spec.n {
        let rho = circle_mixture_dim(p, spec.radius(p), dim);
        acc += rho.into_matrix() * C64::new(p as f64 / norm, 0.0);
    }
    FockOperator::from_matrix(acc)
}

/// Diagonal of `phi_n` without building the matrix:
/// `(1/M) sum_p p e^{-r_p^2} r_p^{2n} / n!`.
pub fn phi_n_diagonal(spec: &ChannelSpec, dim: usize) -> Vec<f64> {
    let norm = spec.operations() as f64;
    let mut out = vec![0.0; dim];
    for p in 1..=spec.n {
        let a = real_amplitudes(spec.radius(p), dim);
        for (o, x) in out.iter_mut().zip(&a) {
            *o += p as f64 * x * x / norm;
        }
    }
    out
}

/// Encrypted state of the coherent input `|beta>`: `D(beta) Phi_N D(beta)^dag`.
///
/// `cutoff.max_radius` must reach `b + |beta|`.
pub fn encrypt(input: CoherentLabel, spec: &ChannelSpec, cutoff: &CutoffPolicy) -> Result<FockOperator> {
    if input.r > spec.b {
        return Err(Error::Precondition(format!(
            "input |beta| = {} lies outside the disk of radius {}",
            input.r, spec.b
        )));
    }
    cutoff.admit(spec.b + input.r)?;
    let phi = phi_n(spec, cutoff)?;
    displacement_conjugate(&phi, input, cutoff)
}

/// Output of the phase-shift encryption, kept in canonical form.
#[derive(Debug, Clone)]
pub struct PhaseShiftEnsemble {
    /// `circle_mixture(p, |alpha|)`.
    pub canonical: FockOperator,
    /// Angle `phi` such that `U(phi) canonical U(phi)^dag` is the actual
    /// mixture, with `U(phi) = diag(e^{i n phi})`. Reduced to `[0, 2pi/p)`.
    pub rotation: f64,
}

impl PhaseShiftEnsemble {
    /// The mixture actually leaving the sender, `(1/p) sum_q |alpha e^{iq2pi/p}><...|`.
    pub fn realize(&self) -> FockOperator {
        rotate_phase(&self.canonical, self.rotation)
    }
}

/// `U rho U^dag` for the diagonal phase rotation `U = diag(e^{i n phi})`.
pub fn rotate_phase(rho: &FockOperator, phi: f64) -> FockOperator {
    let m = rho.matrix();
    let dim = rho.dim();
    let out = nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
        m[(i, j)] * C64::from_polar(1.0, (i as f64 - j as f64) * phi)
    });
    FockOperator::from_matrix(out).expect("square by construction")
}

/// Phase-shift ensemble of a coherent input, returned as the canonical
/// circle mixture plus the diagonal rotation that realizes it. Distances to
/// any diagonal state are unaffected by that rotation.
pub fn phase_shift_ensemble(
    input: CoherentLabel,
    spec: &SimplifiedSpec,
    cutoff: &CutoffPolicy,
) -> Result<PhaseShiftEnsemble> {
    if input.r > spec.b {
        return Err(Error::Precondition(format!(
            "input |alpha| = {} lies outside the disk of radius {}",
            input.r, spec.b
        )));
    }
    let canonical = circle_mixture(spec.p, input.r, cutoff)?;
    let rotation = input.theta.rem_euclid(TAU / spec.p as f64);
    Ok(PhaseShiftEnsemble { canonical, rotation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::projector_with_dim;

    fn cut(r: f64) -> CutoffPolicy {
        CutoffPolicy::for_radius(r).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(ChannelSpec::new(0.0, 3).is_err());
        assert!(ChannelSpec::new(1.0, 0).is_err());
        let s = ChannelSpec::new(2.0, 4).unwrap();
        assert_eq!(s.operations(), 10);
        assert_eq!(s.radius(4), 2.0);
        assert_eq!(s.radius(1), 0.5);
        assert!(SimplifiedSpec::new(1.0, 3, 1.5).is_err());
        assert!(SimplifiedSpec::new(1.0, 0, 0.5).is_err());
        let sp = SimplifiedSpec::new(1.0, 4, 0.5).unwrap();
        assert_eq!(sp.rotation_angles().len(), 4);
    }

    #[test]
    fn disk_state_vacuum_entry() {
        for &b in &[0.3f64, 1.0, 2.0] {
            let i = maximally_mixed(b, &cut(b)).unwrap();
            let want = (1.0 - (-b * b).exp()) / (b * b);
            assert!((i.get(0, 0).re - want).abs() < 1e-15);
        }
        let i = maximally_mixed(1.0, &cut(1.0)).unwrap();
        assert!((i.get(0, 0).re - 0.632_120_558_828_557_7).abs() < 1e-15);
    }

    #[test]
    fn disk_state_shrinks_to_vacuum() {
        let i = maximally_mixed(1e-4, &cut(1e-4)).unwrap();
        assert!((i.get(0, 0).re - 1.0).abs() < 1e-8);
        assert!(i.diagonal()[1..].iter().all(|&x| x < 1e-8));
    }

    #[test]
    fn disk_state_trace() {
        let c = cut(3.0);
        let i = maximally_mixed(3.0, &c).unwrap();
        assert!(i.diagnostics().trace_deficit.abs() < c.tail_budget);
        assert!(maximally_mixed(3.5, &c).is_err());
    }

    #[test]
    fn circle_mixture_p1_is_coherent_projector() {
        let r = 1.3;
        let c = cut(r);
        let rho = circle_mixture(1, r, &c).unwrap();
        let want = projector_with_dim(CoherentLabel::new(r, 0.0).unwrap(), c.dim());
        assert!((rho.matrix() - want.matrix()).camax() < 1e-15);
        assert!(rho.matrix().iter().all(|z| z.re > 0.0));
    }

    #[test]
    fn circle_mixture_stripes() {
        let r: f64 = 1.1;
        let rho = circle_mixture(4, r, &cut(r)).unwrap();
        assert_eq!(rho.get(0, 2), C64::new(0.0, 0.0));
        assert_eq!(rho.get(0, 1), C64::new(0.0, 0.0));
        let want = (-r * r).exp() * r.powi(4) / 24f64.sqrt();
        assert!((rho.get(0, 4).re - want).abs() < 1e-16);
        assert!(rho.is_real());
    }

    #[test]
    fn phi_single_circle() {
        let spec = ChannelSpec::new(1.5, 1).unwrap();
        let c = cut(1.5);
        assert_eq!(phi_n(&spec, &c).unwrap(), circle_mixture(1, 1.5, &c).unwrap());
    }

    #[test]
    fn phi_trace_and_diagonal() {
        let spec = ChannelSpec::new(2.0, 10).unwrap();
        let c = cut(2.0);
        let phi = phi_n(&spec, &c).unwrap();
        assert!(phi.diagnostics().trace_deficit.abs() < c.tail_budget);
        let d = phi_n_diagonal(&spec, c.dim());
        for (x, y) in phi.diagonal().iter().zip(&d) {
            assert!((x - y).abs() < 1e-16);
        }
    }

    #[test]
    fn encrypt_vacuum_input_is_phi() {
        let spec = ChannelSpec::new(1.0, 3).unwrap();
        let c = cut(1.0);
        let e = encrypt(CoherentLabel::vacuum(), &spec, &c).unwrap();
        assert_eq!(e, phi_n(&spec, &c).unwrap());
    }

    #[test]
    fn encrypt_rejects_inputs_outside_disk() {
        let spec = ChannelSpec::new(1.0, 3).unwrap();
        let r = encrypt(CoherentLabel::new(1.5, 0.0).unwrap(), &spec, &cut(2.5));
        assert!(matches!(r, Err(Error::Precondition(_))));
        let r = encrypt(CoherentLabel::new(0.5, 0.0).unwrap(), &spec, &cut(1.2));
        assert!(matches!(r, Err(Error::Cutoff(_))));
    }

    #[test]
    fn phase_shift_diagonal_ignores_input_phase() {
        let spec = SimplifiedSpec::new(2.0, 5, 1.0).unwrap();
        let c = cut(2.0);
        let a = phase_shift_ensemble(CoherentLabel::new(0.9, 0.1).unwrap(), &spec, &c).unwrap();
        let b = phase_shift_ensemble(CoherentLabel::new(0.9, 2.9).unwrap(), &spec, &c).unwrap();
        assert_eq!(a.realize().diagonal(), b.realize().diagonal());
        assert!(a.rotation < TAU / 5.0);
    }

    #[test]
    fn phase_shift_p1_is_input_projector() {
        let spec = SimplifiedSpec::new(2.0, 1, 1.0).unwrap();
        let c = cut(2.0);
        let label = CoherentLabel::new(1.2, 0.7).unwrap();
        let e = phase_shift_ensemble(label, &spec, &c).unwrap();
        assert_eq!(e.rotation, 0.7);
        let want = projector_with_dim(label, c.dim());
        assert!((e.realize().matrix() - want.matrix()).camax() < 1e-15);
    }
}
