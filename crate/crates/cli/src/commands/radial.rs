use rayon::prelude::*;
use resforge::radial::{asymptotic_branch, asymptotic_resonance, find_radial_resonances, RadialCavity};
use serde::Serialize;

use super::require;
use crate::args::RadialArgs;
use crate::error::{usage, CliResult};
use crate::output::{write_csv, Row};
use crate::parse;

#[derive(Debug, Serialize)]
struct ResonanceRow {
    dim: u8,
    ell: u32,
    re_omega: f64,
    im_omega: f64,
    residual: f64,
    multiplicity: usize,
}

impl Row for ResonanceRow {
    const HEADER: &'static [&'static str] =
        &["dim", "ell", "re_omega", "im_omega", "residual", "multiplicity"];
}

#[derive(Debug, Serialize)]
struct BranchRow {
    dim: u8,
    ell: u32,
    j: u32,
    re_omega: f64,
    im_omega: f64,
    re_asymptotic: f64,
    im_asymptotic: f64,
    distance: f64,
}

impl Row for BranchRow {
    const HEADER: &'static [&'static str] = &[
        "dim", "ell", "j", "re_omega", "im_omega", "re_asymptotic", "im_asymptotic", "distance",
    ];
}

fn branches(c: &RadialCavity, js: &[u32]) -> Vec<BranchRow> {
    let mut rows = Vec::new();
    for &j in js {
        let r = asymptotic_resonance(c, j).and_then(|z| asymptotic_branch(c, j).map(|r| (z, r)));
        match r {
            Ok((z, r)) => rows.push(BranchRow {
                dim: c.dim,
                ell: c.ell,
                j,
                re_omega: r.omega.re,
                im_omega: r.omega.im,
                re_asymptotic: z.re,
                im_asymptotic: z.im,
                distance: (r.omega - z).norm(),
            }),
            Err(e) => {
                eprintln!("warning: dim {} ell {} branch {j}: {e}; later branches skipped", c.dim, c.ell);
                break;
            }
        }
    }
    rows
}

pub fn run(a: RadialArgs) -> CliResult<()> {
    let dim = require(a.dim, "dim")?;
    let cavities = parse::indices("ell", &a.ell)?
        .into_iter()
        .map(|ell| RadialCavity::new(dim, a.n0, a.a, ell).map_err(|e| usage(e.to_string())))
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(b) = &a.branches {
        if dim == 1 {
            return Err(usage("--branches needs --dim 2 or 3"));
        }
        let js = parse::indices("branches", b)?;
        let rows: Vec<BranchRow> = cavities.par_iter().flat_map_iter(|c| branches(c, &js)).collect();
        return write_csv(a.out.as_deref(), &rows);
    }
    let rect = parse::rect("rect", &a.rect)?;
    let (nx, ny) = parse::lattice("grid", &a.grid)?;
    let per_ell = cavities
        .par_iter()
        .map(|c| {
            let mut found = find_radial_resonances(c, &rect, nx, ny)?;
            if a.lowest {
                found.truncate(1);
            }
            Ok(found
                .into_iter()
                .map(|r| ResonanceRow {
                    dim,
                    ell: c.ell,
                    re_omega: r.omega.re,
                    im_omega: r.omega.im,
                    residual: r.residual,
                    multiplicity: r.multiplicity,
                })
                .collect::<Vec<_>>())
        })
        .collect::<CliResult<Vec<_>>>()?;
    let rows: Vec<ResonanceRow> = per_ell.into_iter().flatten().collect();
    write_csv(a.out.as_deref(), &rows)
}
