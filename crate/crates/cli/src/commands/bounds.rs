use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use resforge::analysis::{
    closed_form_width_bound, in_exclusion_triangle, is_symmetric, lower_bound_width,
};
use resforge::forward::default_grid;
use resforge::{find_resonances, PiecewiseConstantStructure};
use serde::Serialize;

use super::read_structure;
use crate::args::BoundsArgs;
use crate::error::{usage, CliError, CliResult};
use crate::output::{write_csv, Row};
use crate::parse;

#[derive(Debug, Serialize)]
struct CurveRow {
    re_omega: f64,
    lower_bound: f64,
    closed_form: Option<f64>,
}

impl Row for CurveRow {
    const HEADER: &'static [&'static str] = &["re_omega", "lower_bound", "closed_form"];
}

#[derive(Debug, Serialize)]
struct CheckRow {
    structure: usize,
    re_omega: f64,
    im_omega: f64,
    width: f64,
    lower_bound: f64,
    holds: bool,
    /// Empty for structures that are not mirror-symmetric.
    in_triangle: Option<bool>,
}

impl Row for CheckRow {
    const HEADER: &'static [&'static str] =
        &["structure", "re_omega", "im_omega", "width", "lower_bound", "holds", "in_triangle"];
}

fn random_structures(a: &BoundsArgs) -> CliResult<Vec<PiecewiseConstantStructure>> {
    let count = a.random.unwrap_or(0);
    if a.cells == 0 || !(a.nmin >= 1.0 && a.nmin <= a.nmax) {
        return Err(usage("random structures need --cells >= 1 and 1 <= --nmin <= --nmax"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    (0..count)
        .map(|_| {
            let mut v: Vec<f64> = (0..a.cells).map(|_| rng.gen_range(a.nmin..=a.nmax)).collect();
            if a.symmetric {
                for i in 0..a.cells / 2 {
                    v[a.cells - 1 - i] = v[i];
                }
            }
            Ok(PiecewiseConstantStructure::from_values(a.length, &v)?)
        })
        .collect()
}

fn check(index: usize, s: &PiecewiseConstantStructure, a: &BoundsArgs) -> CliResult<Vec<CheckRow>> {
    let rect = parse::rect("rect", &a.rect)?;
    let (nx, ny) = default_grid(s, &rect);
    let set = find_resonances(s, &rect, nx, ny, resforge::forward::DEFAULT_TOL)?;
    if !set.complete {
        eprintln!(
            "warning: structure {index}: found {} resonances, argument principle counts {:?}",
            set.len(),
            set.expected
        );
    }
    let symmetric = is_symmetric(s);
    Ok(set
        .pairs
        .iter()
        .map(|p| {
            let w = p.omega;
            let lower_bound = lower_bound_width(w.re, s.n_max(), s.length());
            CheckRow {
                structure: index,
                re_omega: w.re,
                im_omega: w.im,
                width: -w.im,
                lower_bound,
                holds: w.im.abs() >= lower_bound,
                in_triangle: symmetric.then(|| in_exclusion_triangle(w, s.n_max(), s.length())),
            }
        })
        .collect())
}

pub fn run(a: BoundsArgs) -> CliResult<()> {
    let structures = match (&a.structure, a.random) {
        (Some(p), None) => vec![read_structure(p)?],
        (None, Some(_)) => random_structures(&a)?,
        (Some(_), Some(_)) => return Err(usage("--structure and --random exclude each other")),
        (None, None) => {
            if !(a.nmax > 0.0 && a.length > 0.0) {
                return Err(usage("--nmax and --L must be positive"));
            }
            let rows: Vec<CurveRow> = parse::grid("re", &a.re)?
                .into_iter()
                .map(|re| CurveRow {
                    re_omega: re,
                    lower_bound: lower_bound_width(re, a.nmax, a.length),
                    closed_form: closed_form_width_bound(re, a.nmax, a.length).ok(),
                })
                .collect();
            return write_csv(a.out.as_deref(), &rows);
        }
    };
    let rows: Vec<CheckRow> = structures
        .par_iter()
        .enumerate()
        .map(|(i, s)| check(i, s, &a))
        .collect::<CliResult<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    write_csv(a.out.as_deref(), &rows)?;
    let violations = rows.iter().filter(|r| !r.holds || r.in_triangle == Some(true)).count();
    if violations > 0 {
        return Err(CliError::Domain(format!("{violations} of {} resonances violate a bound", rows.len())));
    }
    Ok(())
}
