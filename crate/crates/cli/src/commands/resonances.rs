use resforge::forward::default_grid;
use resforge::{find_resonances, SearchRect};
use serde::Serialize;

use super::{read_structure, require, trace};
use crate::args::ResonancesArgs;
use crate::error::{CliError, CliResult};
use crate::output::{is_json, write_csv, write_json, Row};
use crate::parse;

#[derive(Debug, Serialize)]
struct ResonanceRow {
    re_omega: f64,
    im_omega: f64,
    residual: f64,
}

impl Row for ResonanceRow {
    const HEADER: &'static [&'static str] = &["re_omega", "im_omega", "residual"];
}

#[derive(Debug, Serialize)]
struct Report {
    schema: u32,
    rect: SearchRect,
    grid: [usize; 2],
    tol: f64,
    expected: Option<usize>,
    complete: bool,
    failed_starts: usize,
    resonances: Vec<ResonanceRow>,
}

pub fn run(a: ResonancesArgs) -> CliResult<()> {
    let s = read_structure(&require(a.structure, "structure")?)?;
    let rect = parse::rect("rect", &a.rect)?;
    let (nx, ny) = match &a.grid {
        Some(g) => parse::lattice("grid", g)?,
        None => default_grid(&s, &rect),
    };
    let trace_out = match a.trace {
        Some(_) => Some(require(a.trace_out, "trace-out")?),
        None => None,
    };
    let set = find_resonances(&s, &rect, nx, ny, a.tol)?;
    if !set.complete {
        eprintln!(
            "warning: found {} resonances, argument principle counts {:?}",
            set.len(),
            set.expected
        );
    }
    let rows: Vec<ResonanceRow> = set
        .pairs
        .iter()
        .map(|p| ResonanceRow { re_omega: p.omega.re, im_omega: p.omega.im, residual: p.residual })
        .collect();

    if let (Some(k), Some(path)) = (a.trace, &trace_out) {
        let pair = set.pairs.get(k).ok_or_else(|| {
            CliError::Domain(format!("--trace {k}: only {} resonances were found", set.len()))
        })?;
        write_csv(Some(path), &trace(&pair.mode, a.samples)?)?;
    }
    if is_json(a.out.as_ref()) {
        let report = Report {
            schema: 1,
            rect,
            grid: [nx, ny],
            tol: a.tol,
            expected: set.expected,
            complete: set.complete,
            failed_starts: set.failed_starts,
            resonances: rows,
        };
        write_json(a.out.as_deref(), &report)
    } else {
        write_csv(a.out.as_deref(), &rows)
    }
}
