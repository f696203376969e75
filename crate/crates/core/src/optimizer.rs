//! Optimal displacement radius for the simplified protocol, and the
//! phase-shift count at which its minimum distance saturates.

use serde::Serialize;

use crate::distances::SimplifiedProfile;
use crate::error::{Error, Result};
use crate::specialfns::{bessel_i, SeriesTolerance};

/// Largest disk radius `find_rmin` accepts.
pub const MAX_B: f64 = 7.0;

/// Stripe period standing in for `p -> infinity` in the grid cross-check.
pub const LARGE_P: usize = 400;

pub const SCAN_POINTS: usize = 200;
pub const SCAN_START_FRACTION: f64 = 0.01;
pub const BISECTION_TOL: f64 = 1e-12;
pub const GRID_POINTS: usize = 2000;
pub const DEFAULT_SATURATION_TOL: f64 = 1e-4;

/// Stationarity condition for the `p -> infinity` simplified distance:
///
/// `r I_0(2r^2) - r I_1(2r^2) - e^{r^2 - b^2} I_1(2rb) / b`,
///
/// normalized so that `dD^2/dr = -4 e^{-2r^2} * stationarity(b, r)`. It is
/// positive just above `r = 0` (where it vanishes trivially) and negative
/// at `r = b`; the interior sign change is the optimal radius.
pub fn stationarity(b: f64, r: f64, tol: &SeriesTolerance) -> Result<f64> {
    check(b, r)?;
    let x = 2.0 * r * r;
    Ok(r * bessel_i(0, x, tol)? - r * bessel_i(1, x, tol)?
        - (r * r - b * b).exp() * bessel_i(1, 2.0 * r * b, tol)? / b)
}

/// `e^{-2r^2} * stationarity(b, r)`: same sign and roots, but every term is
/// O(1), so it can be driven to a small absolute residual.
pub fn scaled_stationarity(b: f64, r: f64, tol: &SeriesTolerance) -> Result<f64> {
    check(b, r)?;
    let x = 2.0 * r * r;
    let e = (-x).exp();
    Ok(r * e * bessel_i(0, x, tol)? - r * e * bessel_i(1, x, tol)?
        - (-(r * r) - b * b).exp() * bessel_i(1, 2.0 * r * b, tol)? / b)
}

fn check(b: f64, r: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Precondition(format!("b must be positive, got {b}")));
    }
    if !(r > 0.0 && r <= b) {
        return Err(Error::Precondition(format!("r must lie in (0, b], got {r}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RminMethod {
    RootFind,
    GridMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RminResult {
    pub b: f64,
    pub r_min: f64,
    /// Scaled stationarity at `r_min`.
    pub residual: f64,
    pub method: RminMethod,
    /// Independent argmin of the `p = 400` distance on a grid.
    pub grid_r_min: f64,
}

/// A grid minimum, refined by one parabolic step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMinimum {
    pub r: f64,
    pub d2: f64,
}

/// Minimizes `f` over `points` uniform radii `b i / points`, `i = 1..=points`,
/// then fits a parabola through the best point and its neighbours. The
/// vertex is kept only if it actually lowers `f`.
pub fn grid_minimize(
    b: f64,
    points: usize,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<GridMinimum> {
    let h = b / points as f64;
    let values: Vec<f64> = (1..=points).map(|i| f(h * i as f64)).collect::<Result<_>>()?;
    let (best, &fmin) = values
        .iter()
        .enumerate()
        .min_by(|a, c| a.1.total_cmp(c.1))
        .expect("at least one grid point");
    let r0 = h * (best + 1) as f64;
    let mut out = GridMinimum { r: r0, d2: fmin };
    if best > 0 && best + 1 < points {
        let (fl, fr) = (values[best - 1], values[best + 1]);
        let curv = fl - 2.0 * fmin + fr;
        if curv > 0.0 {
            let r = r0 + 0.5 * h * (fl - fr) / curv;
            let v = f(r)?;
            if v < fmin {
                out = GridMinimum { r, d2: v };
            }
        }
    }
    Ok(out)
}

/// Optimal displacement radius for disk radius `b`.
///
/// Scans [`SCAN_POINTS`] points in `(0.01 b, b)` for a sign change of the
/// stationarity condition and bisects it to [`BISECTION_TOL`]. The result is
/// cross-checked against a grid minimization of the `p = 400` distance; if
/// no sign change turns up, the grid minimum is returned instead.
pub fn find_rmin(b: f64, tol: &SeriesTolerance) -> Result<RminResult> {
    if !(b > 0.0 && b <= MAX_B) {
        return Err(Error::Precondition(format!("b must lie in (0, {MAX_B}], got {b}")));
    }
    let profile = SimplifiedProfile::new(b, tol)?;
    let grid = grid_minimize(b, GRID_POINTS, |r| profile.d2(LARGE_P, r))?;

    let lo0 = SCAN_START_FRACTION * b;
    let step = (b - lo0) / (SCAN_POINTS - 1) as f64;
    let g = |r: f64| scaled_stationarity(b, r, tol);
    let mut bracket = None;
    let mut prev = (lo0, g(lo0)?);
    for i in 1..SCAN_POINTS {
        let r = if i + 1 == SCAN_POINTS { b } else { lo0 + step * i as f64 };
        let v = g(r)?;
        if prev.1.signum() != v.signum() || v == 0.0 {
            bracket = Some((prev, (r, v)));
            break;
        }
        prev = (r, v);
    }

    let Some(((mut lo, flo), (mut hi, _))) = bracket else {
        return Ok(RminResult {
            b,
            r_min: grid.r,
            residual: g(grid.r)?,
            method: RminMethod::GridMin,
            grid_r_min: grid.r,
        });
    };
    let lo_sign = flo.signum();
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let v = g(mid)?;
        if v == 0.0 {
            (lo, hi) = (mid, mid);
            break;
        }
        if v.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_min = 0.5 * (lo + hi);
    Ok(RminResult {
        b,
        r_min,
        residual: g(r_min)?,
        method: RminMethod::RootFind,
        grid_r_min: grid.r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationPoint {
    pub p: usize,
    pub r: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationResult {
    pub b: f64,
    /// Smallest `p` whose minimum is within the saturation tolerance of the
    /// minimum at `p_max`.
    pub p_sat: usize,
    pub saturation_tol: f64,
    pub curve: Vec<SaturationPoint>,
}

/// Minimum over `r in (0, b]` of the simplified distance for each
/// `p = 1..=p_max`.
pub fn saturation_sweep(
    b: f64,
    p_max: usize,
    tol: &SeriesTolerance,
    saturation_tol: f64,
) -> Result<SaturationResult> {
    if p_max < 2 {
        return Err(Error::Precondition(format!("p_max must be >= 2, got {p_max}")));
    }
    if !(saturation_tol > 0.0) {
        return Err(Error::Precondition(format!("saturation tolerance must be positive, got {saturation_tol}")));
    }
    let profile = SimplifiedProfile::new(b, tol)?;
    let curve = (1..=p_max)
        .map(|p| {
            let m = grid_minimize(b, GRID_POINTS, |r| profile.d2(p, r))?;
            Ok(SaturationPoint { p, r: m.r, d2: m.d2 })
        })
        .collect::<Result<Vec<_>>>()?;
    let floor = curve.last().expect("p_max >= 2").d2;
    let p_sat = curve
        .iter()
        .find(|pt| pt.d2 - floor < saturation_tol)
        .map(|pt| pt.p)
        .unwrap_or(p_max);
    Ok(SaturationResult { b, p_sat, saturation_tol, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::hs2_simplified;

    fn tol() -> SeriesTolerance {
        SeriesTolerance::default()
    }

    #[test]
    fn stationarity_vanishes_at_origin() {
        let v = stationarity(2.0, 1e-9, &tol()).unwrap();
        assert!(v.abs() < 1e-8);
        assert!(stationarity(2.0, 0.0, &tol()).is_err());
        assert!(stationarity(2.0, 2.5, &tol()).is_err());
    }

    #[test]
    fn sign_change_inside_disk() {
        for &b in &[1.0, 2.0, 4.0] {
            let lo = 0.05 * b;
            let signs: Vec<f64> = (0..200)
                .map(|i| lo + (b - lo) * i as f64 / 199.0)
                .map(|r| stationarity(b, r, &tol()).unwrap().signum())
                .collect();
            assert!(signs.windows(2).any(|w| w[0] != w[1]), "b={b}");
        }
    }

    #[test]
    fn scaled_form_agrees_with_unscaled() {
        for &(b, r) in &[(2.0f64, 1.0f64), (4.0, 3.0), (0.5, 0.2)] {
            let s = stationarity(b, r, &tol()).unwrap() * (-2.0 * r * r).exp();
            let t = scaled_stationarity(b, r, &tol()).unwrap();
            assert!((s - t).abs() <= 1e-13 * s.abs().max(1.0));
        }
    }

    #[test]
    fn tiny_disk_optimum_is_interior() {
        let res = find_rmin(1e-2, &tol()).unwrap();
        assert_eq!(res.method, RminMethod::RootFind);
        assert!(res.r_min > 0.0 && res.r_min < 1e-2);
        let at_min = hs2_simplified(1e-2, LARGE_P, res.r_min, &tol()).unwrap();
        let at_rim = hs2_simplified(1e-2, LARGE_P, 1e-2, &tol()).unwrap();
        assert!(at_min < at_rim);
    }

    #[test]
    fn rmin_domain() {
        assert!(find_rmin(0.0, &tol()).is_err());
        assert!(find_rmin(7.5, &tol()).is_err());
    }

    #[test]
    fn grid_minimize_parabola() {
        let m = grid_minimize(2.0, 100, |r| Ok((r - 0.731).powi(2) + 0.5)).unwrap();
        assert!((m.r - 0.731).abs() < 1e-12);
        assert!((m.d2 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn saturation_rejects_small_pmax() {
        assert!(saturation_sweep(2.0, 1, &tol(), 1e-4).is_err());
    }

    #[test]
    fn one_phase_shift_is_worse_than_two() {
        let s = saturation_sweep(2.0, 3, &tol(), DEFAULT_SATURATION_TOL).unwrap();
        assert!(s.curve[0].d2 > s.curve[1].d2);
    }
}
