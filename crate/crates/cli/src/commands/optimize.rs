use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use resforge::gradient::switching_function;
use resforge::optimizer::{
    optimize_width, refine_interfaces, Diagnostics, Interval, IterationRecord, OptimizeConfig,
    StopReason, Target,
};
use resforge::{AdmissibleSet, PiecewiseConstantStructure};
use serde::Serialize;

use super::{admissible, read_structure, sample_points, DIAGNOSTICS_FILE, STRUCTURE_FILE};
use crate::args::OptimizeArgs;
use crate::error::{usage, CliError, CliResult};
use crate::output::{write_csv, write_json, Row};
use crate::parse;

impl Row for IterationRecord {
    const HEADER: &'static [&'static str] = &["iter", "width", "re_omega", "step", "pg_norm"];
}

#[derive(Debug, Serialize)]
struct ModeRow {
    x: f64,
    re_u: f64,
    im_u: f64,
    abs_u: f64,
    n: f64,
    switching: f64,
}

impl Row for ModeRow {
    const HEADER: &'static [&'static str] = &["x", "re_u", "im_u", "abs_u", "n", "switching"];
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    j: Option<usize>,
    re_omega: f64,
    im_omega: f64,
    width: f64,
    intervals: Option<usize>,
    stop: StopReason,
}

impl Row for SummaryRow {
    const HEADER: &'static [&'static str] = &["j", "re_omega", "im_omega", "width", "intervals", "stop"];
}

#[derive(Debug, Serialize)]
struct RefinedSummary {
    re_omega: f64,
    im_omega: f64,
    width: f64,
    initial_width: f64,
    iterations: usize,
    last_move: f64,
    switch_residual: f64,
    intervals: Vec<Interval>,
}

#[derive(Debug, Serialize)]
struct RunDiagnostics<'a> {
    schema: u32,
    j: Option<usize>,
    omega_start: Option<[f64; 2]>,
    admissible: AdmissibleSet,
    cells: usize,
    init: &'a str,
    seed: u64,
    polish: bool,
    re_omega: f64,
    im_omega: f64,
    width: f64,
    stop: StopReason,
    iterations: usize,
    /// Number of intervals `N` of the binarized profile and `M` with `N = 4M + 1`.
    intervals: Option<usize>,
    m: Option<usize>,
    diagnostics: &'a Diagnostics,
    refined: Option<RefinedSummary>,
}

fn initial_structure(a: &OptimizeArgs, adm: &AdmissibleSet) -> CliResult<Option<PiecewiseConstantStructure>> {
    match a.init.as_str() {
        "midpoint" => Ok(None),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut v: Vec<f64> = (0..a.cells).map(|_| rng.gen_range(adm.n_minus..=adm.n_plus)).collect();
            if adm.symmetric {
                for i in 0..a.cells / 2 {
                    v[a.cells - 1 - i] = v[i];
                }
            }
            Ok(Some(PiecewiseConstantStructure::from_values(adm.length, &v)?))
        }
        path => read_structure(Path::new(path)).map(Some),
    }
}

fn run_one(cfg: &OptimizeConfig, a: &OptimizeArgs, dir: &Path) -> CliResult<SummaryRow> {
    let run = optimize_width(cfg)?;
    std::fs::create_dir_all(dir)?;
    run.structure.write_json(dir.join(STRUCTURE_FILE))?;
    write_csv(Some(&dir.join("history.csv")), &run.history)?;

    let mode = &run.pair.mode;
    let rows = sample_points(run.structure.length(), a.samples)?
        .into_iter()
        .map(|x| {
            let (u, _) = mode.evaluate(x)?;
            Ok(ModeRow {
                x,
                re_u: u.re,
                im_u: u.im,
                abs_u: u.norm(),
                n: run.structure.n_at(x),
                switching: switching_function(mode, x)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    write_csv(Some(&dir.join("mode.csv")), &rows)?;

    let refined = if a.refine {
        let r = refine_interfaces(&run.structure, &cfg.admissible, run.omega(), 200)?;
        r.structure.write_json(dir.join("refined.json"))?;
        Some(RefinedSummary {
            re_omega: r.pair.omega.re,
            im_omega: r.pair.omega.im,
            width: r.width(),
            initial_width: r.initial_width,
            iterations: r.iterations,
            last_move: r.last_move,
            switch_residual: r.switch_residual,
            intervals: r.transitions.intervals.clone(),
        })
    } else {
        None
    };

    let (j, omega_start) = match run.target {
        Target::Mode(j) => (Some(j), None),
        Target::Omega(w) => (None, Some([w.re, w.im])),
    };
    let intervals = run.diagnostics.transitions.as_ref().map(|t| t.count());
    let w = run.omega();
    let diag = RunDiagnostics {
        schema: 1,
        j,
        omega_start,
        admissible: run.admissible,
        cells: run.cells,
        init: &a.init,
        seed: a.seed,
        polish: cfg.polish,
        re_omega: w.re,
        im_omega: w.im,
        width: run.width(),
        stop: run.stop,
        iterations: run.history.len(),
        intervals,
        m: intervals.filter(|n| n % 4 == 1).map(|n| (n - 1) / 4),
        diagnostics: &run.diagnostics,
        refined,
    };
    write_json(Some(&dir.join(DIAGNOSTICS_FILE)), &diag)?;
    Ok(SummaryRow { j, re_omega: w.re, im_omega: w.im, width: run.width(), intervals, stop: run.stop })
}

pub fn run(a: OptimizeArgs) -> CliResult<()> {
    let out = a.out.clone().ok_or_else(|| usage("--out is required"))?;
    let adm = admissible(a.length, a.nmin, a.nmax, a.rho, a.symmetric)?;
    let targets: Vec<Target> = match (&a.j, &a.omega) {
        (Some(j), None) => parse::indices("j", j)?.into_iter().map(|j| Target::Mode(j as usize)).collect(),
        (None, Some(w)) => vec![Target::Omega(parse::complex("omega", w)?)],
        (None, None) => return Err(usage("give the target with --j or --omega")),
        (Some(_), Some(_)) => return Err(usage("--j and --omega exclude each other")),
    };
    let initial = initial_structure(&a, &adm)?;
    let dir_of = |t: &Target| -> PathBuf {
        match t {
            Target::Mode(j) if targets.len() > 1 => out.join(format!("j{j}")),
            _ => out.clone(),
        }
    };
    let results: Vec<(PathBuf, CliResult<SummaryRow>)> = targets
        .par_iter()
        .map(|t| {
            let mut cfg = OptimizeConfig::new(adm, a.cells, *t);
            cfg.max_iter = a.max_iter;
            cfg.g_tol = a.g_tol;
            cfg.im_floor = a.im_floor;
            cfg.max_change = a.max_change;
            cfg.polish = !a.no_polish;
            cfg.initial = initial.clone();
            let dir = dir_of(t);
            let r = run_one(&cfg, &a, &dir);
            (dir, r)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (dir, r) in results {
        match r {
            Ok(row) => {
                eprintln!(
                    "{}: omega = {:.10}{:+.10}i after {:?}",
                    dir.display(),
                    row.re_omega,
                    row.im_omega,
                    row.stop
                );
                rows.push(row);
            }
            Err(e) => failures.push(format!("{}: {e}", dir.display())),
        }
    }
    if targets.len() > 1 {
        write_csv(Some(&out.join("summary.csv")), &rows)?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Domain(failures.join("; ")))
    }
}
