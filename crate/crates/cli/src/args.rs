use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use resforge::forward::DEFAULT_TOL;
use serde::{Deserialize, Serialize};

use crate::config::{opt_text, text};

const FIGURE_DATA: &str = "\
Figure data (n0 = 2, a = 1 and L = 1, n in [1, 2] throughout):
  Resonances of the homogeneous cavity in 1, 2 and 3 dimensions:
    resforge radial --dim 1 --ell 0 --out radial_1d.csv
    resforge radial --dim 2 --ell 0:9 --out radial_2d.csv
    resforge radial --dim 3 --ell 0:9 --out radial_3d.csv
  Long-lived whispering-gallery mode (dim 2, ell = 6) and the high-frequency branches:
    resforge radial --dim 2 --ell 6 --lowest --out ell6.csv
    resforge radial --dim 3 --ell 0:3 --branches 0:24 --out branches_3d.csv
  Optimal structures, their modes and widths for j = 0..9 (structure.json and mode.csv
  in each run directory, widths in summary.csv):
    resforge optimize --j 0:9 --cells 512 --L 1 --nmin 1 --nmax 2 --out optima/
  Optimal structure with its switching function Im(alpha omega^2 u^2) (column
  'switching' of mode.csv) and its transitions:
    resforge optimize --j 4 --cells 512 --L 1 --nmin 1 --nmax 2 --refine --out run4/
    resforge verify --run run4/ --out run4/report.json
  Transmission of each optimum over (0, 2 Re omega] (the j = 0 resonance is purely
  imaginary, so its band is empty):
    for j in 1 2 3 4 5 6 7 8 9; do
      resforge transmission --run optima/j$j --out transmission_j$j.csv; done
  Dispersion relation of the quarter-wave stack and the gap-to-midgap ratio R(gamma):
    resforge bragg --n1 1 --n2 2 --d 1 --dispersion 0.01:0.01:6 --out dispersion.csv
    resforge bragg --n1 1 --n2 2 --d 1 --gamma 0.05:0.05:1.95 --out rg.csv

Exit status: 0 on success, 1 when a computation fails or a hard check does not hold,
2 on usage errors.";

/// Resonances, width optimization and benchmark cavities for the Helmholtz
/// equation with piecewise-constant refractive index.
#[derive(Debug, Parser)]
#[command(name = "resforge", version, after_help = FIGURE_DATA)]
pub struct Cli {
    /// Worker threads (default: one per core)
    #[arg(long, global = true, env = "RESFORGE_JOBS", value_name = "N")]
    pub jobs: Option<usize>,

    /// JSON object of option values (keys are flag names); flags on the
    /// command line take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resonances of a structure inside a rectangle of the complex plane
    Resonances(ResonancesArgs),
    /// Minimize the width |Im omega| of one resonance over admissible structures
    Optimize(OptimizeArgs),
    /// Transmission |t| and reflection |r| on a real frequency grid
    Transmission(TransmissionArgs),
    /// A priori lower bound on resonance widths, alone or against resonances
    Bounds(BoundsArgs),
    /// Band gap of a two-layer periodic medium, its dispersion relation and R(gamma)
    Bragg(BraggArgs),
    /// Resonances of a homogeneous ball or disk
    Radial(RadialArgs),
    /// Property checks of a structure or an optimization run, as a JSON report
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct ResonancesArgs {
    /// Structure file: {"L": .., "cells": [{"x0": .., "x1": .., "n": ..}, ...]}
    #[arg(long, value_name = "FILE")]
    pub structure: Option<PathBuf>,

    /// Search rectangle RE_MIN,RE_MAX,IM_MIN,IM_MAX with IM_MAX < 0
    #[arg(long, default_value = "0,10,-3,-1e-6", allow_hyphen_values = true)]
    #[serde(deserialize_with = "text")]
    pub rect: String,

    /// Newton start lattice NX,NY (default: three starts per root spacing)
    #[arg(long, value_name = "NX,NY")]
    #[serde(deserialize_with = "opt_text")]
    pub grid: Option<String>,

    /// Tolerance on the scaled boundary residual
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,

    /// Also write the mode of resonance INDEX (0-based, by increasing Re omega)
    #[arg(long, value_name = "INDEX")]
    pub trace: Option<usize>,

    /// Mode trace file: x, re_u, im_u, abs_u
    #[arg(long, value_name = "FILE")]
    pub trace_out: Option<PathBuf>,

    /// Points of the mode trace
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,

    /// Output file; a .json name writes a report, anything else CSV
    /// (re_omega, im_omega, residual). Default: standard output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct OptimizeArgs {
    /// Target resonance by the number of interior minima of |u|: J, A:B or a list
    #[arg(long, value_name = "J")]
    #[serde(deserialize_with = "opt_text")]
    pub j: Option<String>,

    /// Target the resonance Newton reaches from RE,IM instead
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    #[serde(deserialize_with = "opt_text")]
    pub omega: Option<String>,

    /// Number of equal cells
    #[arg(long, default_value_t = 512)]
    pub cells: usize,

    /// Length of the structure
    #[arg(long = "L", default_value_t = 1.0)]
    pub length: f64,

    /// Lower material bound
    #[arg(long, default_value_t = 1.0)]
    pub nmin: f64,

    /// Upper material bound
    #[arg(long, default_value_t = 2.0)]
    pub nmax: f64,

    /// Only resonances with |Re omega| <= RHO compete for the minimum width
    #[arg(long, default_value_t = 40.0)]
    pub rho: f64,

    /// Restrict to mirror-symmetric structures
    #[arg(long)]
    pub symmetric: bool,

    /// Iteration limit of the descent
    #[arg(long, default_value_t = 3000)]
    pub max_iter: usize,

    /// Stop when the projected-gradient norm falls below this
    #[arg(long, default_value_t = 1e-9)]
    pub g_tol: f64,

    /// Depth of the window searched for the initial resonance
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub im_floor: f64,

    /// Largest change of a cell value per step, as a fraction of NMAX - NMIN
    #[arg(long, default_value_t = 0.02)]
    pub max_change: f64,

    /// Skip the single-cell polishing phase after descent
    #[arg(long)]
    pub no_polish: bool,

    /// Starting structure: 'midpoint', 'random' (uses --seed) or a structure file
    #[arg(long, default_value = "midpoint")]
    pub init: String,

    /// Seed for --init random
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Also move the interfaces off the cell grid (refined.json)
    #[arg(long)]
    pub refine: bool,

    /// Points of the mode trace
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,

    /// Run directory; several targets get one subdirectory jN each
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct TransmissionArgs {
    /// Structure file
    #[arg(long, value_name = "FILE")]
    pub structure: Option<PathBuf>,

    /// Optimization run directory (structure and target resonance)
    #[arg(long, value_name = "DIR")]
    pub run: Option<PathBuf>,

    /// Positive frequencies START:STEP:STOP or a list (default with --run:
    /// SAMPLES points of (0, 2 Re omega])
    #[arg(long, value_name = "GRID")]
    #[serde(deserialize_with = "opt_text")]
    pub omega: Option<String>,

    /// Points of the default band
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,

    /// Output CSV (omega, abs_t, abs_r). Default: standard output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct BoundsArgs {
    /// Upper material bound of the bound curve
    #[arg(long, default_value_t = 2.0)]
    pub nmax: f64,

    /// Length of the structures
    #[arg(long = "L", default_value_t = 1.0)]
    pub length: f64,

    /// Re omega grid of the bound curve
    #[arg(long, default_value = "0:0.05:10")]
    #[serde(deserialize_with = "text")]
    pub re: String,

    /// Check every resonance of this structure in --rect instead
    #[arg(long, value_name = "FILE")]
    pub structure: Option<PathBuf>,

    /// Check every resonance of COUNT random structures in --rect instead
    #[arg(long, value_name = "COUNT")]
    pub random: Option<usize>,

    /// Seed of the random structures
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Cells of each random structure
    #[arg(long, default_value_t = 8)]
    pub cells: usize,

    /// Lower material bound of the random structures
    #[arg(long, default_value_t = 1.0)]
    pub nmin: f64,

    /// Make the random structures mirror-symmetric
    #[arg(long)]
    pub symmetric: bool,

    /// Search rectangle for --structure and --random
    #[arg(long, default_value = "-10,10,-3,-1e-6", allow_hyphen_values = true)]
    #[serde(deserialize_with = "text")]
    pub rect: String,

    /// Output CSV. Default: standard output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct BraggArgs {
    /// Index of the first layer
    #[arg(long)]
    pub n1: Option<f64>,

    /// Index of the second layer
    #[arg(long)]
    pub n2: Option<f64>,

    /// Period
    #[arg(long)]
    pub d: Option<f64>,

    /// Width of the first layer (default: quarter-wave, gamma = 1)
    #[arg(long)]
    pub b: Option<f64>,

    /// Write R(gamma) for b = gamma (n_h / n1) (d / 2) on this grid
    #[arg(long, value_name = "GRID")]
    #[serde(deserialize_with = "opt_text")]
    pub gamma: Option<String>,

    /// Write the dispersion relation on this frequency grid
    #[arg(long, value_name = "GRID")]
    #[serde(deserialize_with = "opt_text")]
    pub dispersion: Option<String>,

    /// Output file: CSV for --gamma and --dispersion, otherwise a JSON report
    /// of the first gap. Default: standard output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct RadialArgs {
    /// Dimension: 1, 2 or 3
    #[arg(long)]
    pub dim: Option<u8>,

    /// Index inside the ball
    #[arg(long, default_value_t = 2.0)]
    pub n0: f64,

    /// Radius
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,

    /// Angular momenta: L, A:B or a list
    #[arg(long, default_value = "0")]
    #[serde(deserialize_with = "text")]
    pub ell: String,

    /// Search rectangle
    #[arg(long, default_value = "0.05,12,-1.5,-1e-9", allow_hyphen_values = true)]
    #[serde(deserialize_with = "text")]
    pub rect: String,

    /// Newton start lattice NX,NY
    #[arg(long, default_value = "24,6")]
    #[serde(deserialize_with = "text")]
    pub grid: String,

    /// Keep only the resonance of smallest Re omega for each ell
    #[arg(long)]
    pub lowest: bool,

    /// Instead, follow the high-frequency branches J (A:B or a list) and
    /// compare with their asymptotic values
    #[arg(long, value_name = "J")]
    #[serde(deserialize_with = "opt_text")]
    pub branches: Option<String>,

    /// Output CSV. Default: standard output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Structure file
    #[arg(long, value_name = "FILE")]
    pub structure: Option<PathBuf>,

    /// Optimization run directory
    #[arg(long, value_name = "DIR")]
    pub run: Option<PathBuf>,

    /// Search rectangle for --structure
    #[arg(long, default_value = "-0.05,10,-3,-1e-6", allow_hyphen_values = true)]
    #[serde(deserialize_with = "text")]
    pub rect: String,

    /// Lower material bound; with --nmax, checks membership of --structure
    #[arg(long)]
    pub nmin: Option<f64>,

    /// Upper material bound
    #[arg(long)]
    pub nmax: Option<f64>,

    /// JSON report. Default: standard output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
