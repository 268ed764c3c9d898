use rayon::prelude::*;
use resforge::transmission;
use serde::Serialize;

use super::{read_run, read_structure};
use crate::args::TransmissionArgs;
use crate::error::{usage, CliError, CliResult};
use crate::output::{write_csv, Row};
use crate::parse;

#[derive(Debug, Serialize)]
struct TransmissionRow {
    omega: f64,
    abs_t: f64,
    abs_r: f64,
}

impl Row for TransmissionRow {
    const HEADER: &'static [&'static str] = &["omega", "abs_t", "abs_r"];
}

pub fn run(a: TransmissionArgs) -> CliResult<()> {
    let (s, band_top) = match (&a.structure, &a.run) {
        (Some(p), None) => (read_structure(p)?, None),
        (None, Some(dir)) => {
            let r = read_run(dir)?;
            (r.structure, Some(2.0 * r.omega.re.abs()))
        }
        (None, None) => return Err(usage("give --structure or --run")),
        (Some(_), Some(_)) => return Err(usage("--structure and --run exclude each other")),
    };
    let omegas = match (&a.omega, band_top) {
        (Some(g), _) => parse::grid("omega", g)?,
        (None, Some(top)) if top > 0.0 => {
            if a.samples < 1 {
                return Err(usage("--samples must be positive"));
            }
            (1..=a.samples).map(|i| top * i as f64 / a.samples as f64).collect()
        }
        (None, Some(_)) => {
            return Err(CliError::Domain(
                "the run's resonance has Re omega = 0, so the band (0, 2 Re omega] is empty; pass --omega".into(),
            ))
        }
        (None, None) => return Err(usage("--omega is required with --structure")),
    };
    let rows = omegas
        .par_iter()
        .map(|&w| {
            let (t, r) = transmission(&s, w)?;
            Ok(TransmissionRow { omega: w, abs_t: t.norm(), abs_r: r.norm() })
        })
        .collect::<CliResult<Vec<_>>>()?;
    write_csv(a.out.as_deref(), &rows)
}
