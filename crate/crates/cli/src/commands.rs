//! One function per subcommand. Each validates every parameter against the
//! owning module's preconditions before any heavy work, then computes rows
//! concurrently and assembles them in input order.

use cvpqc::distances::{hs2_exact, hs2_guess, key_bits, key_bits_exact, simplified_report, DistanceReport};
use cvpqc::ensembles::{ChannelSpec, SimplifiedSpec};
use cvpqc::holevo::{holevo_bound, off_diagonal_check, HolevoBound, QuadratureSettings};
use cvpqc::optimizer::{find_rmin, saturation_sweep, RminMethod, RminResult, MAX_B};
use cvpqc::{CutoffPolicy, SeriesTolerance};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::args::QuadArgs;
use crate::error::CliError;
use crate::table::{Cell, Table};

/// Largest accepted `|d2_exact - d2_numeric|` when the oracle runs.
pub const ORACLE_TOL: f64 = 1e-8;
pub const EPS_ENV: &str = "CVPQC_EPS";

pub const FIG1B_GRID: &str = "0.25:7:0.25";
pub const FIG2_GRID: &str = "0.001,0.25:4:0.25";

/// A rendered table plus what went wrong, if anything. Rows that failed
/// are kept (with empty fields) so partial sweeps still produce output.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub log: Map<String, Value>,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Self { table, log: Map::new(), failure: None }
    }

    fn fail(&mut self, e: CliError) {
        self.failure = Some(match self.failure.take() {
            Some(prev) => prev.worst(e),
            None => e,
        });
    }
}

/// Default series tolerance, with `CVPQC_EPS` overriding `eps_abs`.
pub fn tolerance() -> Result<SeriesTolerance, CliError> {
    let def = SeriesTolerance::default();
    match std::env::var(EPS_ENV) {
        Ok(s) => {
            let eps: f64 = s
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("{EPS_ENV}={s:?} is not a number")))?;
            Ok(SeriesTolerance::new(eps, def.max_terms)?)
        }
        Err(std::env::VarError::NotPresent) => Ok(def),
        Err(e) => Err(CliError::Validation(format!("{EPS_ENV}: {e}"))),
    }
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be positive, got {x}")))
    }
}

fn quad_settings(q: &QuadArgs) -> Result<QuadratureSettings, CliError> {
    if q.legendre_order == 0 || q.phi_points < 2 || q.phi_points % 2 != 0 {
        return Err(CliError::Validation(format!(
            "need legendre-order >= 1 and an even phi-points >= 2, got {} and {}",
            q.legendre_order, q.phi_points
        )));
    }
    Ok(QuadratureSettings { legendre_order: q.legendre_order, phi_points: q.phi_points })
}

fn distance_cells(r: &DistanceReport) -> Vec<Cell> {
    vec![
        r.d2_exact.into(),
        r.d2_guess.into(),
        r.d2_numeric.into(),
        r.terms.unit_sq.into(),
        r.terms.cross.into(),
        r.terms.other_sq.into(),
    ]
}

fn oracle_check(rep: &DistanceReport, label: &str) -> Option<CliError> {
    let d = rep.discrepancy()?;
    (d >= ORACLE_TOL).then(|| CliError::Consistency(format!("{label}: |d2_exact - d2_numeric| = {d:e}")))
}

pub fn distance(
    bs: &[f64],
    ns: &[usize],
    with_oracle: bool,
    tail_budget: f64,
    tol: &SeriesTolerance,
) -> Result<Outcome, CliError> {
    let points: Vec<(f64, usize)> = bs.iter().flat_map(|&b| ns.iter().map(move |&n| (b, n))).collect();
    for &(b, n) in &points {
        ChannelSpec::new(b, n)?;
        if with_oracle {
            CutoffPolicy::new(tail_budget, b)?;
        }
    }
    let reports: Vec<_> = points
        .par_iter()
        .map(|&(b, n)| {
            let rep = hs2_exact(b, n, tol)?;
            if with_oracle {
                rep.with_oracle(tail_budget)
            } else {
                Ok(rep)
            }
        })
        .collect();

    let mut out = Outcome::new(Table::new(
        "distance",
        &["b", "N", "d2_exact", "d2_guess", "d2_numeric", "tr_unit2", "tr_cross", "tr_phi2"],
    ));
    let mut dims = Vec::new();
    for (&(b, n), rep) in points.iter().zip(reports) {
        let mut row: Vec<Cell> = vec![b.into(), n.into()];
        match rep {
            Ok(rep) => {
                row.extend(distance_cells(&rep));
                dims.push(json!({"b": b, "N": n, "oracle_dim": rep.oracle_dim}));
                if let Some(e) = oracle_check(&rep, &format!("b={b} N={n}")) {
                    out.fail(e);
                }
            }
            Err(e) => {
                row.extend([Cell::Empty, hs2_guess(n).into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                out.fail(CliError::from(e));
            }
        }
        out.table.push(row);
    }
    out.log.insert("with_oracle".into(), json!(with_oracle));
    out.log.insert("tail_budget".into(), json!(tail_budget));
    out.log.insert("dims".into(), json!(dims));
    Ok(out)
}

pub fn keybits_from_n(ns: &[usize], b: Option<f64>, tol: &SeriesTolerance) -> Result<Outcome, CliError> {
    for &n in ns {
        match b {
            Some(b) => {
                ChannelSpec::new(b, n)?;
            }
            None if n == 0 => return Err(CliError::Validation("N must be >= 1".into())),
            None => {}
        }
    }
    let rows: Vec<Result<Vec<Cell>, CliError>> = ns
        .par_iter()
        .map(|&n| {
            let d_guess = 1.0 / (n + 1) as f64;
            let mut row: Vec<Cell> = vec![
                n.into(),
                (n * (n + 1) / 2).into(),
                key_bits_exact(n).into(),
                d_guess.into(),
                key_bits(d_guess)?.into(),
            ];
            match b {
                Some(b) => {
                    let d = hs2_exact(b, n, tol)?.d2_exact.sqrt();
                    row.extend([b.into(), d.into(), key_bits(d)?.into()]);
                }
                None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
            }
            Ok(row)
        })
        .collect();
    let mut out = Outcome::new(Table::new(
        "keybits",
        &["N", "operations", "key_bits_exact", "d_guess", "key_bits_guess", "b", "d_exact", "key_bits_from_exact"],
    ));
    for (&n, row) in ns.iter().zip(rows) {
        match row {
            Ok(r) => out.table.push(r),
            Err(e) => {
                let mut r = vec![Cell::from(n)];
                r.resize(8, Cell::Empty);
                out.table.push(r);
                out.fail(e);
            }
        }
    }
    Ok(out)
}

pub fn keybits_from_d(ds: &[f64]) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(Table::new("keybits", &["d_hs", "key_bits"]));
    for &d in ds {
        out.table.push(vec![d.into(), key_bits(d)?.into()]);
    }
    Ok(out)
}

pub fn simplified(
    b: f64,
    ps: &[usize],
    rs: &[f64],
    with_oracle: bool,
    tail_budget: f64,
    tol: &SeriesTolerance,
) -> Result<Outcome, CliError> {
    let points: Vec<(usize, f64)> = ps.iter().flat_map(|&p| rs.iter().map(move |&r| (p, r))).collect();
    for &(p, r) in &points {
        SimplifiedSpec::new(b, p, r)?;
    }
    if with_oracle {
        CutoffPolicy::new(tail_budget, b)?;
    }
    let reports: Vec<_> = points
        .par_iter()
        .map(|&(p, r)| {
            let rep = simplified_report(b, p, r, tol)?;
            if with_oracle {
                rep.with_oracle(tail_budget)
            } else {
                Ok(rep)
            }
        })
        .collect();
    let mut out = Outcome::new(Table::new(
        "simplified",
        &["b", "p", "r", "d2_exact", "d2_numeric", "tr_unit2", "tr_cross", "tr_phi2"],
    ));
    for (&(p, r), rep) in points.iter().zip(reports) {
        let mut row: Vec<Cell> = vec![b.into(), p.into(), r.into()];
        match rep {
            Ok(rep) => {
                let cells = distance_cells(&rep);
                row.push(cells[0].clone());
                row.extend(cells[2..].iter().cloned());
                if let Some(e) = oracle_check(&rep, &format!("b={b} p={p} r={r}")) {
                    out.fail(e);
                }
            }
            Err(e) => {
                row.resize(8, Cell::Empty);
                out.fail(CliError::from(e));
            }
        }
        out.table.push(row);
    }
    out.log.insert("with_oracle".into(), json!(with_oracle));
    out.log.insert("tail_budget".into(), json!(tail_budget));
    Ok(out)
}

fn check_rmin_b(b: f64) -> Result<(), CliError> {
    if b > 0.0 && b <= MAX_B {
        Ok(())
    } else {
        Err(CliError::Validation(format!("b must lie in (0, {MAX_B}], got {b}")))
    }
}

fn method_name(m: RminMethod) -> &'static str {
    match m {
        RminMethod::RootFind => "root_find",
        RminMethod::GridMin => "grid_min",
    }
}

fn rmin_rows(bs: &[f64], tol: &SeriesTolerance) -> Vec<Result<RminResult, CliError>> {
    bs.par_iter().map(|&b| find_rmin(b, tol).map_err(CliError::from)).collect()
}

pub fn rmin(bs: &[f64], tol: &SeriesTolerance) -> Result<Outcome, CliError> {
    for &b in bs {
        check_rmin_b(b)?;
    }
    let mut out = Outcome::new(Table::new("rmin", &["b", "r_min", "residual", "method", "grid_r_min"]));
    for (&b, res) in bs.iter().zip(rmin_rows(bs, tol)) {
        match res {
            Ok(r) => out.table.push(vec![
                b.into(),
                r.r_min.into(),
                r.residual.into(),
                method_name(r.method).into(),
                r.grid_r_min.into(),
            ]),
            Err(e) => {
                out.table.push(vec![b.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                out.fail(e);
            }
        }
    }
    Ok(out)
}

pub fn saturation(b: f64, p_max: usize, saturation_tol: f64, tol: &SeriesTolerance) -> Result<Outcome, CliError> {
    positive("b", b)?;
    positive("saturation-tol", saturation_tol)?;
    if p_max < 2 {
        return Err(CliError::Validation(format!("p-max must be >= 2, got {p_max}")));
    }
    let s = saturation_sweep(b, p_max, tol, saturation_tol)?;
    let mut out = Outcome::new(Table::new("saturation", &["b", "p", "r_min", "d2_min", "p_sat"]));
    for pt in &s.curve {
        out.table.push(vec![b.into(), pt.p.into(), pt.r.into(), pt.d2.into(), s.p_sat.into()]);
    }
    out.table.summary.insert("p_sat".into(), json!(s.p_sat));
    out.table.summary.insert("saturation_tol".into(), json!(saturation_tol));
    Ok(out)
}

fn holevo_table(command: &str, bs: &[f64], q: &QuadArgs) -> Result<Outcome, CliError> {
    let quad = quad_settings(q)?;
    for &b in bs {
        positive("b", b)?;
        CutoffPolicy::new(q.tail_budget, 2.0 * b)?;
    }
    let results: Vec<Result<HolevoBound, CliError>> = bs
        .par_iter()
        .map(|&b| {
            let cut = CutoffPolicy::new(q.tail_budget, 2.0 * b)?;
            Ok(holevo_bound(b, quad, &cut)?)
        })
        .collect();
    let mut out = Outcome::new(Table::new(command, &["b", "chi_bits", "quad_error", "dim"]));
    let mut spectra = Vec::new();
    for (&b, res) in bs.iter().zip(results) {
        match res {
            Ok(h) => {
                out.table.push(vec![b.into(), h.chi_bits.into(), h.spectrum.quad_error.into(), h.spectrum.dim.into()]);
                spectra.push(json!({
                    "b": b,
                    "weights": h.spectrum.weights,
                    "norm_ratio": h.spectrum.norm_ratio,
                    "norm_ratio_extra_r": h.spectrum.norm_ratio_extra_r,
                }));
            }
            Err(e) => {
                out.table.push(vec![b.into(), Cell::Empty, Cell::Empty, Cell::Empty]);
                spectra.push(json!({"b": b, "error": e.to_string()}));
                out.fail(e);
            }
        }
    }
    out.table.summary.insert("spectra".into(), Value::Array(spectra));
    out.log.insert("quadrature".into(), json!(quad));
    out.log.insert("tail_budget".into(), json!(q.tail_budget));
    Ok(out)
}

pub fn holevo(bs: &[f64], q: &QuadArgs) -> Result<Outcome, CliError> {
    holevo_table("holevo", bs, q)
}

pub fn diagonality(b: f64, samples: usize, seed: u64) -> Result<Outcome, CliError> {
    positive("b", b)?;
    if samples < 2 {
        return Err(CliError::Validation("samples must be >= 2".into()));
    }
    let r = off_diagonal_check(b, samples, seed)?;
    let ok = r.within_sigmas(5.0);
    let mut out = Outcome::new(Table::new(
        "diagonality",
        &["b", "dim", "samples", "max_abs", "std_error_at_max", "max_z", "within_5_sigma"],
    ));
    out.table.push(vec![
        b.into(),
        r.dim.into(),
        samples.into(),
        r.max_abs.into(),
        r.std_error_at_max.into(),
        r.max_z.into(),
        ok.into(),
    ]);
    if !ok {
        out.fail(CliError::Verification(format!("off-diagonal mean {:.3} standard errors from zero", r.max_z)));
    }
    out.log.insert("seed".into(), json!(seed));
    Ok(out)
}

pub fn fig1a(b: f64, p_max: usize, r_points: usize, tol: &SeriesTolerance) -> Result<Outcome, CliError> {
    positive("b", b)?;
    if p_max < 1 || r_points < 2 {
        return Err(CliError::Validation("need p-max >= 1 and r-points >= 2".into()));
    }
    let profile = cvpqc::distances::SimplifiedProfile::new(b, tol)?;
    let rows: Vec<Result<Vec<Vec<Cell>>, CliError>> = (1..=p_max)
        .into_par_iter()
        .map(|p| {
            (1..=r_points)
                .map(|i| {
                    let r = b * i as f64 / r_points as f64;
                    Ok(vec![b.into(), p.into(), r.into(), profile.d2(p, r)?.into()])
                })
                .collect()
        })
        .collect();
    let mut out = Outcome::new(Table::new("fig1a", &["b", "p", "r", "d2"]));
    for block in rows {
        for row in block? {
            out.table.push(row);
        }
    }
    Ok(out)
}

pub fn fig1b(bs: &[f64], tol: &SeriesTolerance) -> Result<Outcome, CliError> {
    for &b in bs {
        check_rmin_b(b)?;
    }
    let mut out = Outcome::new(Table::new("fig1b", &["b", "r_min", "residual", "method"]));
    for (&b, res) in bs.iter().zip(rmin_rows(bs, tol)) {
        match res {
            Ok(r) => out.table.push(vec![b.into(), r.r_min.into(), r.residual.into(), method_name(r.method).into()]),
            Err(e) => {
                out.table.push(vec![b.into(), Cell::Empty, Cell::Empty, Cell::Empty]);
                out.fail(e);
            }
        }
    }
    Ok(out)
}

pub fn fig2(bs: &[f64], q: &QuadArgs) -> Result<Outcome, CliError> {
    holevo_table("fig2", bs, q)
}
