//! Front end for the `cvpqc` binary: argument parsing, dispatch, output and
//! exit codes.

pub mod args;
pub mod commands;
pub mod error;
pub mod grid;
pub mod table;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, Figure};
use commands::Outcome;
use error::CliError;
use grid::{parse_grid, parse_int_grid};

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, &args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("cvpqc: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, args: &[OsString]) -> Result<(), CliError> {
    let tol = commands::tolerance()?;
    let mut outcome = dispatch(&cli.command, &tol)?;

    if let Command::Verify { .. } = cli.command {
        let failed: Vec<String> = outcome
            .table
            .rows
            .iter()
            .filter(|r| r[2] == "FAIL".into())
            .map(|r| match (&r[0], &r[1]) {
                (table::Cell::Text(s), table::Cell::Text(n)) => format!("{s}/{n}"),
                _ => unreachable!("verify rows start with two text cells"),
            })
            .collect();
        if !failed.is_empty() {
            outcome.failure = Some(CliError::Verification(failed.join(", ")));
        }
    }

    let text = outcome.table.render(cli.format)?;
    match &cli.output {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Consistency(format!("stdout: {e}")))?;
        }
    }
    if let Some(path) = &cli.json_log {
        let log = provenance(cli, args, &tol, &outcome);
        let mut s = serde_json::to_string_pretty(&log).expect("json value");
        s.push('\n');
        std::fs::write(path, s).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn dispatch(cmd: &Command, tol: &cvpqc::SeriesTolerance) -> Result<Outcome, CliError> {
    match cmd {
        Command::Distance { b, n, with_oracle, tail_budget } => {
            commands::distance(&parse_grid(b)?, &parse_int_grid(n)?, *with_oracle, *tail_budget, tol)
        }
        Command::Keybits { n: Some(n), b, .. } => commands::keybits_from_n(&parse_int_grid(n)?, *b, tol),
        Command::Keybits { d: Some(d), .. } => commands::keybits_from_d(&parse_grid(d)?),
        Command::Keybits { .. } => Err(CliError::Validation("keybits needs --N or --d".into())),
        Command::Simplified { b, p, r, with_oracle, tail_budget } => {
            commands::simplified(*b, &parse_int_grid(p)?, &parse_grid(r)?, *with_oracle, *tail_budget, tol)
        }
        Command::Rmin { b } => commands::rmin(&parse_grid(b)?, tol),
        Command::Saturation { b, p_max, saturation_tol } => commands::saturation(*b, *p_max, *saturation_tol, tol),
        Command::Holevo { b, quad } => commands::holevo(&parse_grid(b)?, quad),
        Command::Diagonality { b, samples, seed } => commands::diagonality(*b, *samples, *seed),
        Command::Figures { which, b_grid, b, p_max, r_points, quad } => match which {
            Figure::Fig1a => commands::fig1a(*b, *p_max, *r_points, tol),
            Figure::Fig1b => {
                commands::fig1b(&parse_grid(b_grid.as_deref().unwrap_or(commands::FIG1B_GRID))?, tol)
            }
            Figure::Fig2 => commands::fig2(&parse_grid(b_grid.as_deref().unwrap_or(commands::FIG2_GRID))?, quad),
        },
        Command::Verify { suite, quick, seed } => {
            let cfg = verify::VerifyConfig { quick: *quick, seed: *seed, tol: *tol };
            let checks = verify::run(*suite, cfg);
            let mut out = Outcome { table: verify::to_table(&checks), log: Default::default(), failure: None };
            out.log.insert("suite".into(), json!(suite));
            out.log.insert("quick".into(), json!(quick));
            out.log.insert("seed".into(), json!(seed));
            Ok(out)
        }
    }
}

fn provenance(cli: &Cli, args: &[OsString], tol: &cvpqc::SeriesTolerance, outcome: &Outcome) -> Value {
    json!({
        "tool": "cvpqc",
        "version": env!("CARGO_PKG_VERSION"),
        "args": args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "command": outcome.table.command,
        "format": cli.format,
        "series_tolerance": {"eps_abs": tol.eps_abs, "max_terms": tol.max_terms},
        "eps_from_env": std::env::var(commands::EPS_ENV).is_ok(),
        "rows": outcome.table.rows.len(),
        "exit_code": outcome.failure.as_ref().map_or(0, CliError::exit_code),
        "details": outcome.log,
    })
}
