//! Parsers for the compact list and grid notations used by the flags.

use num_complex::Complex64;
use resforge::bragg::gamma_grid;
use resforge::SearchRect;

use crate::error::{usage, CliResult};

fn number(flag: &str, s: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| usage(format!("--{flag}: {s:?} is not a number")))
}

pub fn numbers(flag: &str, s: &str, count: usize) -> CliResult<Vec<f64>> {
    let v = s.split(',').map(|p| number(flag, p)).collect::<CliResult<Vec<_>>>()?;
    if v.len() != count {
        return Err(usage(format!("--{flag} expects {count} comma-separated numbers, got {s:?}")));
    }
    Ok(v)
}

pub fn rect(flag: &str, s: &str) -> CliResult<SearchRect> {
    let v = numbers(flag, s, 4)?;
    SearchRect::new(v[0], v[1], v[2], v[3]).map_err(|e| usage(format!("--{flag}: {e}")))
}

pub fn complex(flag: &str, s: &str) -> CliResult<Complex64> {
    let v = numbers(flag, s, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

pub fn lattice(flag: &str, s: &str) -> CliResult<(usize, usize)> {
    let bad = || usage(format!("--{flag} expects NX,NY with both at least 2, got {s:?}"));
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    match parts[..] {
        [nx, ny] if nx >= 2 && ny >= 2 => Ok((nx, ny)),
        _ => Err(bad()),
    }
}

/// `START:STEP:STOP` (inclusive), a comma list, or a single value.
pub fn grid(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts[..] {
        [a, h, b] => gamma_grid(number(flag, a)?, number(flag, h)?, number(flag, b)?)
            .map_err(|e| usage(format!("--{flag}: {e}"))),
        [_] => s.split(',').map(|p| number(flag, p)).collect(),
        _ => Err(usage(format!("--{flag} expects START:STEP:STOP or a comma list, got {s:?}"))),
    }
}

/// `A:B` (inclusive), a comma list, or a single index.
pub fn indices(flag: &str, s: &str) -> CliResult<Vec<u32>> {
    let int = |p: &str| {
        p.trim()
            .parse::<u32>()
            .map_err(|_| usage(format!("--{flag}: {p:?} is not a nonnegative integer")))
    };
    let v: Vec<u32> = match s.split_once(':') {
        Some((a, b)) => {
            let (a, b) = (int(a)?, int(b)?);
            if b < a {
                return Err(usage(format!("--{flag}: empty range {s:?}")));
            }
            (a..=b).collect()
        }
        None => s.split(',').map(int).collect::<CliResult<_>>()?,
    };
    let mut sorted = v.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != v.len() {
        return Err(usage(format!("--{flag}: repeated index in {s:?}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_and_lists() {
        assert_eq!(grid("g", "0.5:0.25:1").unwrap(), vec![0.5, 0.75, 1.0]);
        assert_eq!(grid("g", "1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(indices("j", "2:4").unwrap(), vec![2, 3, 4]);
        assert_eq!(indices("j", "7").unwrap(), vec![7]);
        assert!(indices("j", "1,1").is_err());
        assert!(grid("g", "1:2").is_err());
    }

    #[test]
    fn rectangles() {
        let r = rect("rect", "0,5,-1,-1e-6").unwrap();
        assert_eq!((r.re_min, r.im_max), (0.0, -1e-6));
        assert!(rect("rect", "0,5,-1").is_err());
        assert!(rect("rect", "0,5,-1,1").is_err());
        assert_eq!(lattice("grid", "12,6").unwrap(), (12, 6));
        assert!(lattice("grid", "1,6").is_err());
    }
}
