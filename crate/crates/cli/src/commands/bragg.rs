use resforge::bragg::{
    dispersion_curve, first_gap_edges, quarter_wave_widths, scan_gamma, BandGap, LayeredMedium,
    QuarterWave,
};
use serde::Serialize;

use super::require;
use crate::args::BraggArgs;
use crate::error::{usage, CliResult};
use crate::output::{write_csv, write_json, Row};
use crate::parse;

#[derive(Debug, Serialize)]
struct GammaRow {
    gamma: f64,
    b: f64,
    omega1: Option<f64>,
    omega2: Option<f64>,
    center: Option<f64>,
    width: Option<f64>,
    ratio: Option<f64>,
}

impl Row for GammaRow {
    const HEADER: &'static [&'static str] = &["gamma", "b", "omega1", "omega2", "center", "width", "ratio"];
}

#[derive(Debug, Serialize)]
struct DispersionRow {
    omega: f64,
    rhs: f64,
    kd: Option<f64>,
}

impl Row for DispersionRow {
    const HEADER: &'static [&'static str] = &["omega", "rhs", "kd"];
}

#[derive(Debug, Serialize)]
struct GapReport {
    schema: u32,
    medium: LayeredMedium,
    gamma: f64,
    n_h: f64,
    gap: BandGap,
    /// Quarter-wave layer widths at the gap center.
    quarter_wave: QuarterWave,
}

pub fn run(a: BraggArgs) -> CliResult<()> {
    let n1 = require(a.n1, "n1")?;
    let n2 = require(a.n2, "n2")?;
    let d = require(a.d, "d")?;
    let medium = || -> CliResult<LayeredMedium> {
        match a.b {
            Some(b) => LayeredMedium::new(n1, n2, b, d),
            None => LayeredMedium::bragg(n1, n2, d),
        }
        .map_err(|e| usage(e.to_string()))
    };
    match (&a.gamma, &a.dispersion) {
        (Some(_), Some(_)) => Err(usage("--gamma and --dispersion exclude each other")),
        (Some(g), None) => {
            if a.b.is_some() {
                return Err(usage("--b is set by --gamma"));
            }
            let scan = scan_gamma(n1, n2, d, &parse::grid("gamma", g)?).map_err(|e| usage(e.to_string()))?;
            let rows: Vec<GammaRow> = scan
                .samples
                .iter()
                .map(|s| GammaRow {
                    gamma: s.gamma,
                    b: s.b,
                    omega1: s.gap.map(|g| g.omega1),
                    omega2: s.gap.map(|g| g.omega2),
                    center: s.gap.map(|g| g.center),
                    width: s.gap.map(|g| g.width),
                    ratio: s.gap.map(|g| g.ratio),
                })
                .collect();
            if let Some(g) = scan.argmax_ratio {
                eprintln!("largest gap-to-midgap ratio at gamma = {g:.2}");
            }
            if scan.flagged() > 0 {
                eprintln!("warning: {} gamma values give b outside (0, d)", scan.flagged());
            }
            write_csv(a.out.as_deref(), &rows)
        }
        (None, Some(g)) => {
            let m = medium()?;
            let rows: Vec<DispersionRow> = dispersion_curve(&m, &parse::grid("dispersion", g)?)
                .into_iter()
                .map(|s| DispersionRow { omega: s.omega, rhs: s.rhs, kd: s.kd })
                .collect();
            write_csv(a.out.as_deref(), &rows)
        }
        (None, None) => {
            let m = medium()?;
            let gap = first_gap_edges(&m)?;
            let report = GapReport {
                schema: 1,
                medium: m,
                gamma: m.gamma(),
                n_h: m.n_h(),
                gap,
                quarter_wave: quarter_wave_widths(gap.center, n1.max(n2), n1.min(n2))?,
            };
            write_json(a.out.as_deref(), &report)
        }
    }
}
