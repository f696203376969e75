//! Dense operators on a truncated Fock space.
//!
//! This is the brute-force side of every cross-check in the crate: states
//! are built as explicit matrices indexed by occupation number, and the
//! analytic formulas elsewhere are compared against traces of these
//! matrices.

use std::f64::consts::TAU;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specialfns::poisson_tail;

pub type C64 = Complex<f64>;

/// Tolerance below zero an eigenvalue may reach before an operator stops
/// counting as a state.
pub const EIGEN_TOL: f64 = 1e-10;

/// Amplitude of the truncated tail used when building displacements. Much
/// tighter than the state cutoff so the inexact top rows of the truncated
/// generator never reach the block that is kept.
const DISPLACEMENT_TAIL: f64 = 1e-30;
const DISPLACEMENT_PAD: usize = 10;

/// Coherent-state label `beta = r e^{i theta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentLabel {
    pub r: f64,
    pub theta: f64,
}

impl CoherentLabel {
    /// Builds a label from polar coordinates; `theta` is reduced to `[0, 2pi)`.
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Precondition(format!("radius must be finite and >= 0, got {r}")));
        }
        if !theta.is_finite() {
            return Err(Error::Precondition(format!("phase must be finite, got {theta}")));
        }
        Ok(Self { r, theta: theta.rem_euclid(TAU) })
    }

    pub fn from_complex(beta: C64) -> Self {
        Self { r: beta.norm(), theta: beta.arg().rem_euclid(TAU) }
    }

    pub fn vacuum() -> Self {
        Self { r: 0.0, theta: 0.0 }
    }

    pub fn amplitude(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }
}

/// Cutoff rule: the Fock dimension is the smallest `d` for which a coherent
/// state of radius `max_radius` leaves less than `tail_budget` of its
/// Poisson population at `n >= d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffPolicy {
    pub tail_budget: f64,
    pub max_radius: f64,
}

impl CutoffPolicy {
    pub const DEFAULT_TAIL_BUDGET: f64 = 1e-10;

    pub fn new(tail_budget: f64, max_radius: f64) -> Result<Self> {
        if !(tail_budget > 0.0 && tail_budget < 1.0) {
            return Err(Error::Precondition(format!("tail budget must be in (0,1), got {tail_budget}")));
        }
        if !(max_radius >= 0.0 && max_radius.is_finite()) {
            return Err(Error::Precondition(format!("max radius must be >= 0, got {max_radius}")));
        }
        Ok(Self { tail_budget, max_radius })
    }

    pub fn for_radius(max_radius: f64) -> Result<Self> {
        Self::new(Self::DEFAULT_TAIL_BUDGET, max_radius)
    }

    pub fn with_radius(&self, max_radius: f64) -> Result<Self> {
        Self::new(self.tail_budget, max_radius)
    }

    pub fn dim(&self) -> usize {
        dim_for(self.max_radius, self.tail_budget)
    }

    /// Fails unless a state of radius `r` fits inside this cutoff.
    pub fn admit(&self, r: f64) -> Result<()> {
        // relative slack so that radii computed as p*b/N still fit at p = N
        if r > self.max_radius * (1.0 + 1e-12) {
            return Err(Error::Cutoff(format!(
                "radius {r} exceeds cutoff radius {}",
                self.max_radius
            )));
        }
        Ok(())
    }
}

pub(crate) fn dim_for(radius: f64, tail: f64) -> usize {
    let lambda = radius * radius;
    let mut d = 1;
    while poisson_tail(d - 1, lambda) >= tail {
        d += 1;
    }
    d
}

/// Size and truncation loss of a built state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BuildDiagnostics {
    pub dim: usize,
    /// `1 - Re Tr(rho)`.
    pub trace_deficit: f64,
}

/// Dense square operator on the truncated Fock space `span{|0>, ..., |dim-1>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    m: DMatrix<C64>,
}

/// JSON form of an operator, `{dim, re[][], im[][]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorDump {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl FockOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { left: m.nrows(), right: m.ncols() });
        }
        Ok(Self { m })
    }

    pub fn from_real_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self { m: DMatrix::from_fn(dim, dim, |i, j| C64::new(f(i, j), 0.0)) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self { m: DMatrix::from_diagonal(&d) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn diagnostics(&self) -> BuildDiagnostics {
        BuildDiagnostics { dim: self.dim(), trace_deficit: 1.0 - self.trace().re }
    }

    pub fn is_real(&self) -> bool {
        self.m.iter().all(|z| z.im == 0.0)
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Operator product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self { m: &self.m * &other.m })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self { m: &self.m - &other.m })
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        same_dim(self, other)?;
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.m[(i, j)] * other.m[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Zero-padded (or truncated) copy of dimension `dim`.
    pub fn resized(&self, dim: usize) -> Self {
        let n = self.dim().min(dim);
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (n, n)).copy_from(&self.m.view((0, 0), (n, n)));
        Self { m }
    }

    /// Eigenvalues, assuming the operator is Hermitian. Ascending order.
    ///
    /// Entries below `1e-64` of the largest one are flushed to zero first;
    /// that moves eigenvalues by at most `dim * 1e-64 * scale`, and entries
    /// spanning more than ~100 decades make the nalgebra solver return NaN
    /// (seen with high-order coherent amplitudes).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let scale = self.m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let floor = scale * 1e-64;
        let m = self.m.map(|z| if z.norm() < floor { C64::new(0.0, 0.0) } else { z });
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn to_dump(&self) -> OperatorDump {
        let n = self.dim();
        OperatorDump {
            dim: n,
            re: (0..n).map(|i| (0..n).map(|j| self.m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| self.m[(i, j)].im).collect()).collect(),
        }
    }

    pub fn from_dump(d: &OperatorDump) -> Result<Self> {
        let n = d.dim;
        let rows_ok = |v: &Vec<Vec<f64>>| v.len() == n && v.iter().all(|r| r.len() == n);
        if !rows_ok(&d.re) || !rows_ok(&d.im) {
            return Err(Error::Precondition(format!("operator dump is not {n}x{n}")));
        }
        Ok(Self { m: DMatrix::from_fn(n, n, |i, j| C64::new(d.re[i][j], d.im[i][j])) })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_dump()).expect("operator dump is always serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: OperatorDump =
            serde_json::from_str(s).map_err(|e| Error::Precondition(format!("bad operator JSON: {e}")))?;
        Self::from_dump(&d)
    }
}

fn same_dim(a: &FockOperator, b: &FockOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

/// Fock amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` of the coherent state |a>.
pub fn coherent_amplitudes(label: CoherentLabel, dim: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(dim);
    let alpha = label.amplitude();
    let mut c = C64::new((-0.5 * label.r * label.r).exp(), 0.0);
    for n in 0..dim {
        out.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// Rank-one projector onto a coherent state, truncated to the cutoff.
pub fn coherent_projector(label: CoherentLabel, cutoff: &CutoffPolicy) -> Result<FockOperator> {
    cutoff.admit(label.r)?;
    Ok(projector_with_dim(label, cutoff.dim()))
}

pub(crate) fn projector_with_dim(label: CoherentLabel, dim: usize) -> FockOperator {
    let a = coherent_amplitudes(label, dim);
    FockOperator { m: DMatrix::from_fn(dim, dim, |i, j| a[i] * a[j].conj()) }
}

/// Truncated displacement `D(beta) = exp(beta a^dag - beta^* a)` on `dim`
/// levels.
///
/// Built from the eigendecomposition of the Hermitian generator
/// `H = i(beta a^dag - beta^* a)`, so the truncated matrix is exactly
/// unitary. Its top rows differ from the true displacement; callers keep a
/// margin above the block they use.
pub fn truncated_displacement(label: CoherentLabel, dim: usize) -> DMatrix<C64> {
    let beta = label.amplitude();
    let i = C64::new(0.0, 1.0);
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..dim.saturating_sub(1) {
        let s = ((n + 1) as f64).sqrt();
        // <n+1| a^dag |n> = sqrt(n+1)
        h[(n + 1, n)] = i * beta * s;
        h[(n, n + 1)] = -i * beta.conj() * s;
    }
    let eig = h.symmetric_eigen();
    let phases = DVector::from_iterator(
        dim,
        eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l)),
    );
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&phases) * v.adjoint()
}

/// `D(beta) rho D(beta)^dag`.
///
/// `cutoff.max_radius` must cover the displaced support, i.e. the support
/// radius of `rho` plus `|beta|`. The result has dimension
/// `max(rho.dim(), cutoff.dim())`; `rho` is zero-padded if it is smaller.
pub fn displacement_conjugate(
    rho: &FockOperator,
    label: CoherentLabel,
    cutoff: &CutoffPolicy,
) -> Result<FockOperator> {
    cutoff.admit(label.r)?;
    let out_dim = rho.dim().max(cutoff.dim());
    if label.r == 0.0 {
        return Ok(rho.resized(out_dim));
    }
    let work = out_dim.max(dim_for(cutoff.max_radius, DISPLACEMENT_TAIL)) + DISPLACEMENT_PAD;
    let d = truncated_displacement(label, work);
    let padded = rho.resized(work);
    let m = &d * padded.matrix() * d.adjoint();
    Ok(FockOperator { m }.resized(out_dim))
}

/// Hilbert–Schmidt distance `sqrt(Tr((a-b)^2))`, i.e. the Frobenius norm of
/// the difference.
pub fn hs_distance_numeric(a: &FockOperator, b: &FockOperator) -> Result<f64> {
    same_dim(a, b)?;
    Ok((&a.m - &b.m).norm())
}

/// Entropy `-sum p log2 p` of a probability vector, with `0 log 0 = 0`.
pub fn shannon_entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Von Neumann entropy in bits.
///
/// Eigenvalues in `[-EIGEN_TOL, 0)` are truncation noise and are clamped
/// to zero; anything more negative is rejected.
pub fn von_neumann_entropy(rho: &FockOperator) -> Result<f64> {
    let ev = rho.eigenvalues();
    if let Some(&min) = ev.first() {
        if min < -EIGEN_TOL {
            return Err(Error::NotAState(min));
        }
    }
    let clamped: Vec<f64> = ev.into_iter().map(|x| x.max(0.0)).collect();
    Ok(shannon_entropy_bits(&clamped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, PI};

    fn policy(r: f64) -> CutoffPolicy {
        CutoffPolicy::for_radius(r).unwrap()
    }

    #[test]
    fn cutoff_dimension_rule() {
        let p = policy(2.0);
        let d = p.dim();
        assert!(poisson_tail(d - 1, 4.0) < p.tail_budget);
        assert!(poisson_tail(d - 2, 4.0) >= p.tail_budget);
        assert_eq!(policy(0.0).dim(), 1);
        assert!(CutoffPolicy::new(0.0, 1.0).is_err());
        assert!(CutoffPolicy::new(1e-10, -1.0).is_err());
    }

    #[test]
    fn vacuum_projector() {
        let p = coherent_projector(CoherentLabel::vacuum(), &policy(1.0)).unwrap();
        assert_eq!(p.get(0, 0), C64::new(1.0, 0.0));
        for i in 0..p.dim() {
            for j in 0..p.dim() {
                if i + j > 0 {
                    assert_eq!(p.get(i, j), C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn unit_radius_populations_are_poisson() {
        let p = coherent_projector(CoherentLabel::new(1.0, 0.0).unwrap(), &policy(1.0)).unwrap();
        let mut fact = 1.0;
        for n in 0..p.dim() {
            if n > 0 {
                fact *= n as f64;
            }
            let want = (-1.0f64).exp() / fact;
            assert!((p.get(n, n).re - want).abs() < 1e-16, "n={n}");
        }
    }

    #[test]
    fn projector_trace_within_budget() {
        let cut = policy(2.0);
        let p = coherent_projector(CoherentLabel::new(2.0, 0.3).unwrap(), &cut).unwrap();
        let deficit = p.diagnostics().trace_deficit;
        assert!((0.0..cut.tail_budget).contains(&deficit), "{deficit}");
    }

    #[test]
    fn projector_outside_cutoff_is_rejected() {
        let err = coherent_projector(CoherentLabel::new(2.5, 0.0).unwrap(), &policy(2.0));
        assert!(matches!(err, Err(Error::Cutoff(_))));
    }

    #[test]
    fn displaced_vacuum_is_coherent_state() {
        for &(r, th) in &[(0.5, 0.0), (1.0, FRAC_PI_3), (0.8, 4.0)] {
            let label = CoherentLabel::new(r, th).unwrap();
            let vac = projector_with_dim(CoherentLabel::vacuum(), 40);
            let cut = CutoffPolicy::new(1e-12, 1.0).unwrap();
            let shifted = displacement_conjugate(&vac, label, &cut).unwrap();
            let want = projector_with_dim(label, shifted.dim());
            let err = (shifted.matrix() - want.matrix()).camax();
            assert!(err < 1e-8, "r={r}: {err}");
        }
    }

    #[test]
    fn zero_displacement_is_identity() {
        let rho = projector_with_dim(CoherentLabel::new(0.7, 1.0).unwrap(), 30);
        let out = displacement_conjugate(&rho, CoherentLabel::vacuum(), &policy(0.7)).unwrap();
        assert_eq!(out.resized(30), rho);
    }

    #[test]
    fn truncated_displacement_is_unitary() {
        let d = truncated_displacement(CoherentLabel::new(1.3, 2.0).unwrap(), 50);
        let id = &d * d.adjoint();
        let err = (id - DMatrix::<C64>::identity(50, 50)).view((0, 0), (30, 30)).camax();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn hs_distance_cases() {
        let a = FockOperator::from_diagonal(&[1.0, 0.0]);
        let b = FockOperator::from_diagonal(&[0.0, 1.0]);
        assert!((hs_distance_numeric(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(hs_distance_numeric(&a, &a).unwrap(), 0.0);
        let c = FockOperator::zeros(3);
        assert!(matches!(hs_distance_numeric(&a, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hs_distance_vacuum_to_coherent() {
        let r: f64 = 1.2;
        let cut = policy(r).with_radius(r).unwrap();
        let vac = coherent_projector(CoherentLabel::vacuum(), &cut).unwrap();
        let coh = coherent_projector(CoherentLabel::new(r, PI / 5.0).unwrap(), &cut).unwrap();
        let want = (2.0 * (1.0 - (-r * r).exp())).sqrt();
        assert!((hs_distance_numeric(&vac, &coh).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn entropy_cases() {
        let pure = coherent_projector(CoherentLabel::new(1.0, 0.5).unwrap(), &policy(1.0)).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-9);
        let half = FockOperator::from_diagonal(&[0.5, 0.5]);
        assert!((von_neumann_entropy(&half).unwrap() - 1.0).abs() < 1e-14);
        let bad = FockOperator::from_diagonal(&[1.1, -0.1]);
        assert!(matches!(von_neumann_entropy(&bad), Err(Error::NotAState(_))));
    }

    #[test]
    fn json_dump_roundtrip() {
        let rho = projector_with_dim(CoherentLabel::new(0.4, 1.0).unwrap(), 5);
        let back = FockOperator::from_json(&rho.to_json()).unwrap();
        assert_eq!(back, rho);
        let v: serde_json::Value = serde_json::from_str(&rho.to_json()).unwrap();
        assert_eq!(v["dim"], 5);
        assert!(FockOperator::from_json(r#"{"dim":2,"re":[[1.0]],"im":[[0.0]]}"#).is_err());
    }
}
