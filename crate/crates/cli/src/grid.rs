//! Grid arguments: comma-separated items, each a number or an inclusive
//! `start:stop:step` range. `0.001,0.5:2:0.5` is `[0.001, 0.5, 1, 1.5, 2]`.

use crate::error::CliError;

const MAX_GRID_POINTS: usize = 100_000;

pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(CliError::Validation(format!("empty item in grid {s:?}")));
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(number(x)?),
            [a, b, c] => range(number(a)?, number(b)?, number(c)?, &mut out)?,
            _ => return Err(CliError::Validation(format!("bad grid item {item:?}, want x or start:stop:step"))),
        }
        if out.len() > MAX_GRID_POINTS {
            return Err(CliError::Validation(format!("grid {s:?} has more than {MAX_GRID_POINTS} points")));
        }
    }
    Ok(out)
}

/// As [`parse_grid`], but every point must be a non-negative integer.
pub fn parse_int_grid(s: &str) -> Result<Vec<usize>, CliError> {
    parse_grid(s)?
        .into_iter()
        .map(|x| {
            if x >= 0.0 && x.fract() == 0.0 && x < u32::MAX as f64 {
                Ok(x as usize)
            } else {
                Err(CliError::Validation(format!("{x} is not a non-negative integer")))
            }
        })
        .collect()
}

fn number(s: &str) -> Result<f64, CliError> {
    let x: f64 = s.trim().parse().map_err(|_| CliError::Validation(format!("not a number: {s:?}")))?;
    if !x.is_finite() {
        return Err(CliError::Validation(format!("not a finite number: {s:?}")));
    }
    Ok(x)
}

fn range(start: f64, stop: f64, step: f64, out: &mut Vec<f64>) -> Result<(), CliError> {
    if !(step > 0.0) || stop < start {
        return Err(CliError::Validation(format!("bad range {start}:{stop}:{step}")));
    }
    let span = (stop - start) / step;
    if span > MAX_GRID_POINTS as f64 {
        return Err(CliError::Validation(format!("range {start}:{stop}:{step} is too long")));
    }
    // points are start + i*step, not accumulated; the stop is kept when it
    // lands on the lattice up to roundoff
    let n = (span + 1e-9).floor() as usize;
    out.extend((0..=n).map(|i| start + step * i as f64));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_grid("0.5:2:0.5").unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("0.5,1,2,4").unwrap(), vec![0.5, 1.0, 2.0, 4.0]);
        assert_eq!(parse_grid("0.001, 1:2:1").unwrap(), vec![0.001, 1.0, 2.0]);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap().len(), 3);
        assert_eq!(parse_grid("-1").unwrap(), vec![-1.0]);
    }

    #[test]
    fn bad_grids() {
        for s in ["", "a", "1:2", "2:1:0.5", "0:1:0", "1,,2", "nan", "0:1e9:1e-9"] {
            assert!(parse_grid(s).is_err(), "{s}");
        }
    }

    #[test]
    fn integer_grids() {
        assert_eq!(parse_int_grid("1:6:1").unwrap(), vec![1, 2, 3, 4, 5, 6]);
        assert!(parse_int_grid("1.5").is_err());
        assert!(parse_int_grid("-2").is_err());
    }
}
