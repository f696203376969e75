//! Built-in verification suites. Every check is deterministic for a fixed
//! seed and reports no timings, so two runs give byte-identical reports.

use std::f64::consts::FRAC_PI_4;

use cvpqc::distances::{hs2_exact, hs2_simplified, simplified_report, trace_unit_sq};
use cvpqc::ensembles::{disk_diagonal, encrypt, maximally_mixed, phi_n_diagonal, ChannelSpec};
use cvpqc::fock::{displacement_conjugate, hs_distance_numeric};
use cvpqc::holevo::{holevo_bound, lambda_spectrum, monte_carlo_lambda, off_diagonal_check, QuadratureSettings};
use cvpqc::optimizer::{find_rmin, saturation_sweep, stationarity, RminMethod, DEFAULT_SATURATION_TOL, LARGE_P};
use cvpqc::specialfns::{bessel_generating_sum, bessel_i, bessel_sum, poisson_tail};
use cvpqc::{CoherentLabel, CutoffPolicy, SeriesTolerance};
use rayon::prelude::*;

use crate::args::Suite;
use crate::error::CliError;
use crate::table::Table;

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<(bool, String), CliError>;
type Job = (&'static str, String, Box<dyn Fn() -> Outcome + Send + Sync>);

fn job(suite: &'static str, name: impl Into<String>, f: impl Fn() -> Outcome + Send + Sync + 'static) -> Job {
    (suite, name.into(), Box::new(f))
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub quick: bool,
    pub seed: u64,
    pub tol: SeriesTolerance,
}

pub fn run(suite: Suite, cfg: VerifyConfig) -> Vec<Check> {
    let mut jobs = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        identities(&cfg, &mut jobs);
    }
    if matches!(suite, Suite::Oracles | Suite::All) {
        oracles(&cfg, &mut jobs);
    }
    if matches!(suite, Suite::Limits | Suite::All) {
        limits(&cfg, &mut jobs);
    }
    jobs.par_iter()
        .map(|(suite, name, f)| {
            let (passed, detail) = f().unwrap_or_else(|e| (false, e.to_string()));
            Check { suite, name: name.clone(), passed, detail }
        })
        .collect()
}

pub fn to_table(checks: &[Check]) -> Table {
    let mut t = Table::new("verify", &["suite", "check", "status", "detail"]);
    for c in checks {
        t.push(vec![
            c.suite.into(),
            c.name.as_str().into(),
            (if c.passed { "PASS" } else { "FAIL" }).into(),
            c.detail.as_str().into(),
        ]);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    t.summary.insert("passed".into(), (checks.len() - failed).into());
    t.summary.insert("failed".into(), failed.into());
    t
}

fn identities(cfg: &VerifyConfig, jobs: &mut Vec<Job>) {
    let tol = cfg.tol;
    for x in [0.5f64, 1.0, 2.0, 4.0, 8.0] {
        jobs.push(job("identities", format!("exp-identity x={x}"), move || {
            let v = (-x).exp() * (bessel_i(0, x, &tol)? + 2.0 * bessel_sum(1, x, &tol)?);
            let res = (v - 1.0).abs();
            Ok((res < 1e-12, format!("residual {res:.3e}")))
        }));
    }
    jobs.push(job("identities", "generating-identity 5x5 grid", move || {
        let grid = [0.3, 0.9, 1.5, 2.2, 3.0];
        let mut worst = (0.0, 0.0, 0.0);
        for &x in &grid {
            for &y in &grid {
                let res = (bessel_generating_sum(x, y, &tol)? - 1.0).abs();
                if res >= worst.0 {
                    worst = (res, x, y);
                }
            }
        }
        Ok((worst.0 < 1e-12, format!("max residual {:.3e} at x={} y={}", worst.0, worst.1, worst.2)))
    }));
    jobs.push(job("identities", "bessel-reference I0(2)", move || {
        // sum_s 1/(s!)^2, terms generated by ratio
        let (mut t, mut s) = (1.0, 0.0);
        for k in 1..40 {
            s += t;
            t /= (k * k) as f64;
        }
        let rel = (bessel_i(0, 2.0, &tol)? - s).abs() / s;
        Ok((rel < 1e-14, format!("relative error {rel:.3e}")))
    }));
    jobs.push(job("identities", "poisson-tail reference (5, 4)", move || {
        let (mut t, mut lower) = ((-4.0f64).exp(), 0.0);
        for m in 0..=5 {
            lower += t;
            t *= 4.0 / (m + 1) as f64;
        }
        let rel = (poisson_tail(5, 4.0) - (1.0 - lower)).abs() / (1.0 - lower);
        Ok((rel < 1e-13, format!("relative error {rel:.3e}")))
    }));
    for b in [0.5f64, 1.0, 2.0] {
        jobs.push(job("identities", format!("disk-purity closed form b={b}"), move || {
            let x = 2.0 * b * b;
            let closed = (1.0 - (-x).exp() * (bessel_i(0, x, &tol)? + bessel_i(1, x, &tol)?)) / (b * b);
            let res = (trace_unit_sq(b, &tol)? - closed).abs();
            Ok((res < 1e-12, format!("difference {res:.3e}")))
        }));
    }
}

fn oracles(cfg: &VerifyConfig, jobs: &mut Vec<Job>) {
    let tol = cfg.tol;
    let (bs, ns): (&[f64], &[usize]) =
        if cfg.quick { (&[0.5, 2.0], &[1, 3, 6]) } else { (&[0.5, 1.0, 2.0], &[1, 2, 3, 4, 5, 6]) };
    for &b in bs {
        for &n in ns {
            jobs.push(job("oracles", format!("distance b={b} N={n}"), move || {
                let r = hs2_exact(b, n, &tol)?.with_oracle(1e-12)?;
                let d = r.discrepancy().unwrap_or(f64::INFINITY);
                let t = r.numeric_terms.expect("oracle ran");
                let dt = (t.unit_sq - r.terms.unit_sq)
                    .abs()
                    .max((t.cross - r.terms.cross).abs())
                    .max((t.other_sq - r.terms.other_sq).abs());
                Ok((d < 1e-8 && dt < 1e-9, format!("|d2 diff| {d:.3e}, max trace diff {dt:.3e}")))
            }));
        }
    }
    for (label, beta) in [("0.3", (0.3, 0.0)), ("0.7e^{i pi/4}", (0.7, FRAC_PI_4))] {
        jobs.push(job("oracles", format!("unitary-invariance beta={label}"), move || {
            let (b, n) = (2.0, 4);
            let beta = CoherentLabel::new(beta.0, beta.1)?;
            let cut = CutoffPolicy::new(1e-12, b + beta.r)?;
            let unit = displacement_conjugate(&maximally_mixed(b, &cut)?, beta, &cut)?;
            let enc = encrypt(beta, &ChannelSpec::new(b, n)?, &cut)?;
            let d = hs_distance_numeric(&unit, &enc)?;
            let diff = (d * d - hs2_exact(b, n, &tol)?.d2_exact).abs();
            Ok((diff < 1e-6, format!("difference {diff:.3e}")))
        }));
    }
    jobs.push(job("oracles", "simplified b=2 p=6 r=1.3", move || {
        let r = simplified_report(2.0, 6, 1.3, &tol)?.with_oracle(1e-12)?;
        let d = r.discrepancy().unwrap_or(f64::INFINITY);
        Ok((d < 1e-8, format!("|d2 diff| {d:.3e}")))
    }));
    jobs.push(job("oracles", "stationarity derivative b=2 r=1", move || {
        let (b, r, h) = (2.0, 1.0, 1e-5);
        let f = |x: f64| hs2_simplified(b, LARGE_P, x, &tol);
        let fd = (f(r + h)? - f(r - h)?) / (2.0 * h);
        let an = -4.0 * (-2.0 * r * r).exp() * stationarity(b, r, &tol)?;
        let diff = (fd - an).abs();
        Ok((diff < 1e-5, format!("finite difference {fd:.9}, analytic {an:.9}")))
    }));
    let rmin_bs: &[f64] = if cfg.quick { &[1.0, 2.0, 4.0] } else { &[0.5, 1.0, 2.0, 4.0, 6.0] };
    for &b in rmin_bs {
        jobs.push(job("oracles", format!("rmin b={b}"), move || {
            let r = find_rmin(b, &tol)?;
            let gap = (r.r_min - r.grid_r_min).abs();
            let ok = r.method == RminMethod::RootFind && gap < 1e-3 && r.r_min < b && r.residual.abs() < 1e-10;
            Ok((ok, format!("r_min {:.9}, grid {:.9}, residual {:.3e}", r.r_min, r.grid_r_min, r.residual)))
        }));
    }
    let seed = cfg.seed;
    let mc_samples = if cfg.quick { 100_000 } else { 1_000_000 };
    jobs.push(job("oracles", format!("lambda monte-carlo b=1 samples={mc_samples}"), move || {
        let b = 1.0;
        let spec = lambda_spectrum(b, QuadratureSettings::default(), &CutoffPolicy::for_radius(2.0 * b)?)?;
        let est = monte_carlo_lambda(b, spec.dim, mc_samples, seed)?;
        let z = est.max_z(&spec.weights);
        Ok((z <= 3.0, format!("max deviation {z:.3} standard errors")))
    }));
    let od_samples = if cfg.quick { 20_000 } else { 100_000 };
    jobs.push(job("oracles", format!("lambda diagonality b=0.5 samples={od_samples}"), move || {
        let r = off_diagonal_check(0.5, od_samples, seed)?;
        Ok((r.within_sigmas(5.0), format!("max |off-diagonal| {:.3e}, max z {:.3}", r.max_abs, r.max_z)))
    }));
    jobs.push(job("oracles", "holevo refinement b=2", move || {
        let b = 2.0;
        let q = QuadratureSettings::default();
        let cut = CutoffPolicy::for_radius(2.0 * b)?;
        let base = holevo_bound(b, q, &cut)?.chi_bits;
        let fine = holevo_bound(b, q.refined(), &cut)?.chi_bits;
        let rel = (fine - base).abs() / base;
        Ok((rel < 0.01 && base >= 0.0, format!("chi {base:.9} bits, relative change {rel:.3e}")))
    }));
}

fn limits(cfg: &VerifyConfig, jobs: &mut Vec<Job>) {
    let tol = cfg.tol;
    const NS: [usize; 5] = [5, 10, 20, 40, 80];
    jobs.push(job("limits", "phi diagonal -> disk diagonal, b=1, n<=20", move || {
        let want = disk_diagonal(1.0, 21);
        let errs: Vec<f64> = NS
            .iter()
            .map(|&n| {
                let d = phi_n_diagonal(&ChannelSpec::new(1.0, n)?, 21);
                Ok(d.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            })
            .collect::<Result<_, CliError>>()?;
        let ok = errs.windows(2).all(|w| w[1] < w[0]) && errs[4] < 5e-3;
        let table: Vec<String> = NS.iter().zip(&errs).map(|(n, e)| format!("N={n}: {e:.4e}")).collect();
        Ok((ok, table.join("; ")))
    }));
    for b in [1.0f64, 2.0] {
        jobs.push(job("limits", format!("phi(0,0) -> (1 - e^-b^2)/b^2, b={b}"), move || {
            let limit = (1.0 - (-b * b).exp()) / (b * b);
            let vals: Vec<f64> =
                NS.iter().map(|&n| Ok(phi_n_diagonal(&ChannelSpec::new(b, n)?, 1)[0])).collect::<Result<_, CliError>>()?;
            let errs: Vec<f64> = vals.iter().map(|v| (v - limit).abs()).collect();
            let ok = errs.windows(2).all(|w| w[1] < w[0]);
            let table: Vec<String> = NS.iter().zip(&vals).map(|(n, v)| format!("N={n}: {v:.6}")).collect();
            Ok((ok, format!("limit {limit:.6}; {}", table.join("; "))))
        }));
    }
    jobs.push(job("limits", "holevo vanishes, b=1e-3", move || {
        let b = 1e-3;
        let chi = holevo_bound(b, QuadratureSettings::default(), &CutoffPolicy::for_radius(2.0 * b)?)?.chi_bits;
        Ok((chi >= 0.0 && chi < 0.05, format!("chi {chi:.3e} bits")))
    }));
    let trend: &'static [f64] = if cfg.quick { &[0.5, 1.0, 2.0] } else { &[0.5, 1.0, 2.0, 4.0] };
    jobs.push(job("limits", "holevo increases with b", move || {
        let chis: Vec<f64> = trend
            .iter()
            .map(|&b| Ok(holevo_bound(b, QuadratureSettings::default(), &CutoffPolicy::for_radius(2.0 * b)?)?.chi_bits))
            .collect::<Result<_, CliError>>()?;
        let ok = chis.iter().all(|&c| c >= 0.0) && chis.windows(2).all(|w| w[1] > w[0]);
        let table: Vec<String> = trend.iter().zip(&chis).map(|(b, c)| format!("b={b}: {c:.6}")).collect();
        Ok((ok, table.join("; ")))
    }));
    jobs.push(job("limits", "saturation curve non-increasing, b=2", move || {
        let s = saturation_sweep(2.0, 20, &tol, DEFAULT_SATURATION_TOL)?;
        let ok = s.curve.windows(2).all(|w| w[1].d2 <= w[0].d2 + 1e-12);
        let last = s.curve.last().expect("20 points");
        Ok((ok, format!("min d2 {:.9} at p=20, p_sat {}", last.d2, s.p_sat)))
    }));
}
