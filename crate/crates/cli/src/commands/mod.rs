mod bounds;
mod bragg;
mod optimize;
mod radial;
mod resonances;
mod transmission;
mod verify;

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use resforge::{AdmissibleSet, Mode, PiecewiseConstantStructure};
use serde::{Deserialize, Serialize};

use crate::args::Command;
use crate::error::{usage, CliError, CliResult};
use crate::output::Row;

pub fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Resonances(a) => resonances::run(a),
        Command::Optimize(a) => optimize::run(a),
        Command::Transmission(a) => transmission::run(a),
        Command::Bounds(a) => bounds::run(a),
        Command::Bragg(a) => bragg::run(a),
        Command::Radial(a) => radial::run(a),
        Command::Verify(a) => verify::run(a),
    }
}

pub fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| usage(format!("--{flag} is required")))
}

/// Unreadable files are usage errors; malformed contents are domain errors.
pub fn read_structure(path: &Path) -> CliResult<PiecewiseConstantStructure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read structure {}: {e}", path.display())))?;
    PiecewiseConstantStructure::from_json_str(&text)
        .map_err(|e| CliError::Domain(format!("structure {}: {e}", path.display())))
}

pub fn admissible(length: f64, nmin: f64, nmax: f64, rho: f64, symmetric: bool) -> CliResult<AdmissibleSet> {
    AdmissibleSet::new(length, nmin, nmax, rho, symmetric).map_err(|e| usage(e.to_string()))
}

pub const STRUCTURE_FILE: &str = "structure.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";

/// The fields of a run's diagnostics file needed to reload it.
#[derive(Debug, Deserialize)]
struct RunHeader {
    admissible: AdmissibleSet,
    j: Option<usize>,
    re_omega: f64,
    im_omega: f64,
}

/// An optimization run directory read back.
pub struct RunRecord {
    pub structure: PiecewiseConstantStructure,
    pub admissible: AdmissibleSet,
    pub j: Option<usize>,
    pub omega: Complex64,
}

pub fn read_run(dir: &Path) -> CliResult<RunRecord> {
    let file = |name: &str| -> CliResult<PathBuf> {
        let p = dir.join(name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(usage(format!("{} is not a run directory: missing {name}", dir.display())))
        }
    };
    let structure = read_structure(&file(STRUCTURE_FILE)?)?;
    let path = file(DIAGNOSTICS_FILE)?;
    let text = std::fs::read_to_string(&path)?;
    let header: RunHeader = serde_json::from_str(&text)
        .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    Ok(RunRecord {
        structure,
        admissible: header.admissible,
        j: header.j,
        omega: Complex64::new(header.re_omega, header.im_omega),
    })
}

#[derive(Debug, Serialize)]
pub struct TraceRow {
    pub x: f64,
    pub re_u: f64,
    pub im_u: f64,
    pub abs_u: f64,
}

impl Row for TraceRow {
    const HEADER: &'static [&'static str] = &["x", "re_u", "im_u", "abs_u"];
}

pub fn sample_points(length: f64, samples: usize) -> CliResult<Vec<f64>> {
    if samples < 2 {
        return Err(usage("--samples must be at least 2"));
    }
    Ok((0..samples)
        .map(|i| if i + 1 == samples { length } else { length * i as f64 / (samples - 1) as f64 })
        .collect())
}

pub fn trace(mode: &Mode, samples: usize) -> CliResult<Vec<TraceRow>> {
    sample_points(mode.structure().length(), samples)?
        .into_iter()
        .map(|x| {
            let (u, _) = mode.evaluate(x)?;
            Ok(TraceRow { x, re_u: u.re, im_u: u.im, abs_u: u.norm() })
        })
        .collect()
}
