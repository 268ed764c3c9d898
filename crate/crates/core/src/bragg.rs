//! Periodic two-layer media: the Bloch dispersion relation, the first band
//! gap, quarter-wave (Bragg) layer widths, and comparison of optimized
//! profiles against the quarter-wave relation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gradient::alpha_of_mode;
use crate::mode::ResonancePair;
use crate::optimizer::{refine_interfaces, IntervalClass, Level, OptimizationRun, Transitions};

/// Edge tolerance of [`first_gap_edges`].
pub const EDGE_TOL: f64 = 1e-10;
const SCAN_STEPS: usize = 256;

/// Alternating layers of index `n1` (width `b`) and `n2` (width `d - b`)
/// repeated with period `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayeredMedium {
    pub n1: f64,
    pub n2: f64,
    pub b: f64,
    pub d: f64,
}

impl LayeredMedium {
    pub fn new(n1: f64, n2: f64, b: f64, d: f64) -> Result<Self> {
        if !(n1 > 0.0 && n2 > 0.0 && n1.is_finite() && n2.is_finite()) {
            return Err(Error::Precondition(format!("indices must be positive, got {n1}, {n2}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Precondition(format!("period must be positive, got {d}")));
        }
        if !(b > 0.0 && b < d) {
            return Err(Error::Precondition(format!("layer width {b} outside (0, {d})")));
        }
        Ok(Self { n1, n2, b, d })
    }

    /// The quarter-wave medium: both layers have optical thickness
    /// `n_h d / 2`.
    pub fn bragg(n1: f64, n2: f64, d: f64) -> Result<Self> {
        Self::with_gamma(n1, n2, d, 1.0)
    }

    /// `b = gamma (n_h / n1) (d / 2)`; `gamma = 1` is the quarter-wave medium.
    pub fn with_gamma(n1: f64, n2: f64, d: f64, gamma: f64) -> Result<Self> {
        let b = gamma * harmonic_mean(n1, n2) / n1 * d / 2.0;
        Self::new(n1, n2, b, d)
    }

    /// `n_h = 2 / (1/n1 + 1/n2)`.
    pub fn n_h(&self) -> f64 {
        harmonic_mean(self.n1, self.n2)
    }

    /// Inverse of [`LayeredMedium::with_gamma`].
    pub fn gamma(&self) -> f64 {
        2.0 * self.b * self.n1 / (self.n_h() * self.d)
    }

    /// Optical path length of one period.
    pub fn optical_period(&self) -> f64 {
        self.n1 * self.b + self.n2 * (self.d - self.b)
    }
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 / (1.0 / a + 1.0 / b)
}

/// Edges of the first band gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandGap {
    pub omega1: f64,
    pub omega2: f64,
    pub center: f64,
    pub width: f64,
    /// Gap-to-midgap ratio `(omega2 - omega1) / center`.
    pub ratio: f64,
}

impl BandGap {
    fn from_edges(omega1: f64, omega2: f64) -> Self {
        let center = 0.5 * (omega1 + omega2);
        let width = omega2 - omega1;
        Self {
            omega1,
            omega2,
            center,
            width,
            ratio: width.abs() / center,
        }
    }
}

/// Right-hand side of the Bloch relation `cos(k d) = rhs(omega)`.
pub fn dispersion_rhs(m: &LayeredMedium, omega: f64) -> f64 {
    let p1 = omega * m.n1 * m.b;
    let p2 = omega * m.n2 * (m.d - m.b);
    let k = 0.5 * (m.n2 / m.n1 + m.n1 / m.n2);
    p1.cos() * p2.cos() - k * p1.sin() * p2.sin()
}

/// One sample of the dispersion curve; `kd` is present in the bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionSample {
    pub omega: f64,
    pub rhs: f64,
    pub kd: Option<f64>,
}

pub fn dispersion_curve(m: &LayeredMedium, omegas: &[f64]) -> Vec<DispersionSample> {
    omegas
        .iter()
        .map(|&omega| {
            let rhs = dispersion_rhs(m, omega);
            DispersionSample {
                omega,
                rhs,
                kd: (rhs.abs() <= 1.0).then(|| rhs.acos()),
            }
        })
        .collect()
}

/// Locate the first gap. At the frequency where one period has optical path
/// `pi`, `rhs = -1 - (K - 1) sin(p1) sin(p2)` with `K >= 1`, so that
/// frequency lies inside the gap whenever `n1 != n2`; each edge is the
/// nearest crossing of `|rhs| = 1`, found by scanning outward and bisecting.
pub fn first_gap_edges(m: &LayeredMedium) -> Result<BandGap> {
    let inside = PI / m.optical_period();
    let excess = |w: f64| dispersion_rhs(m, w).abs() - 1.0;
    if excess(inside) <= 64.0 * f64::EPSILON {
        return Err(Error::NoGap(2.0 * inside));
    }
    let step = inside / SCAN_STEPS as f64;
    let edge = |dir: f64| -> Result<f64> {
        let mut a = inside;
        for i in 1..=SCAN_STEPS {
            let b = inside + dir * step * i as f64;
            if excess(b) <= 0.0 {
                return Ok(bisect_edge(&excess, a, b));
            }
            a = b;
        }
        Err(Error::NoGap(2.0 * inside))
    };
    Ok(BandGap::from_edges(edge(-1.0)?, edge(1.0)?))
}

/// Bisection between `inside` (`f > 0`) and `outside` (`f <= 0`).
fn bisect_edge(f: &impl Fn(f64) -> f64, mut inside: f64, mut outside: f64) -> f64 {
    while (inside - outside).abs() > 1e-3 * EDGE_TOL * inside.abs().max(1.0) {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if f(mid) > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

/// Quarter-wave layer widths at frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarterWave {
    pub d_plus: f64,
    pub d_minus: f64,
    /// `d_plus + d_minus = pi / (n_h omega)`.
    pub period: f64,
    pub n_h: f64,
}

/// `d_(+/-) = pi / (2 n_(+/-) omega)`, a quarter of the wavelength in each
/// material.
pub fn quarter_wave_widths(omega: f64, n_plus: f64, n_minus: f64) -> Result<QuarterWave> {
    if !(omega > 0.0) {
        return Err(Error::Precondition(format!("frequency must be positive, got {omega}")));
    }
    let d_plus = PI / (2.0 * n_plus * omega);
    let d_minus = PI / (2.0 * n_minus * omega);
    Ok(QuarterWave {
        d_plus,
        d_minus,
        period: d_plus + d_minus,
        n_h: harmonic_mean(n_plus, n_minus),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaSample {
    pub gamma: f64,
    pub b: f64,
    /// `None` when `b` falls outside `(0, d)` for this `gamma`.
    pub gap: Option<BandGap>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaScan {
    pub n1: f64,
    pub n2: f64,
    pub d: f64,
    pub samples: Vec<GammaSample>,
    /// `gamma` of the largest gap-to-midgap ratio.
    pub argmax_ratio: Option<f64>,
    /// `gamma` of the largest absolute gap width.
    pub argmax_width: Option<f64>,
}

impl GammaScan {
    pub fn flagged(&self) -> usize {
        self.samples.iter().filter(|s| s.gap.is_none()).count()
    }
}

/// Gap of the medium with `b = gamma (n_h / n1) (d / 2)` for every `gamma`.
pub fn scan_gamma(n1: f64, n2: f64, d: f64, gammas: &[f64]) -> Result<GammaScan> {
    if n1 == n2 {
        return Err(Error::NoGap(f64::INFINITY));
    }
    let samples: Vec<GammaSample> = gammas
        .par_iter()
        .map(|&gamma| {
            let b = gamma * harmonic_mean(n1, n2) / n1 * d / 2.0;
            let gap = LayeredMedium::new(n1, n2, b, d)
                .and_then(|m| first_gap_edges(&m))
                .ok();
            GammaSample { gamma, b, gap }
        })
        .collect();
    let argmax = |key: fn(&BandGap) -> f64| {
        samples
            .iter()
            .filter_map(|s| s.gap.map(|g| (s.gamma, key(&g))))
            .fold(None, |best: Option<(f64, f64)>, (g, v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((g, v)),
            })
            .map(|(g, _)| g)
    };
    Ok(GammaScan {
        n1,
        n2,
        d,
        argmax_ratio: argmax(|g| g.ratio),
        argmax_width: argmax(|g| g.width),
        samples,
    })
}

/// `gamma` grid from a `start:step:stop` specification, inclusive of `stop`
/// up to rounding.
pub fn gamma_grid(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(Error::Precondition(format!("bad grid {start}:{step}:{stop}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalRatio {
    pub index: usize,
    pub class: IntervalClass,
    pub level: Level,
    pub width: f64,
    /// Quarter of the effective wavelength `2 pi / (n |Re omega|)` in the
    /// interval's material.
    pub quarter_wave: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraggComparison {
    pub omega: num_complex::Complex64,
    pub intervals: Vec<IntervalRatio>,
    /// Largest `|ratio - 1|` over the non-center intervals.
    pub max_deviation: f64,
    pub center_width: Option<f64>,
    /// `2 d_plus` at `|Re omega|`.
    pub center_bound: f64,
    /// Switching function `Im(alpha omega^2 u^2)` at the midpoint.
    pub center_switch: f64,
    /// The same divided by `|alpha omega^2| |u|^2`.
    pub center_switch_relative: f64,
}

impl BraggComparison {
    pub fn center_within_bound(&self) -> Option<bool> {
        self.center_width.map(|w| w < self.center_bound)
    }
}

/// Compare the intervals of a two-level profile with quarter-wave widths at
/// the resonance frequency.
pub fn compare_profile(
    pair: &ResonancePair,
    transitions: &Transitions,
    n_plus: f64,
    n_minus: f64,
) -> Result<BraggComparison> {
    let re = pair.omega.re.abs();
    let q = quarter_wave_widths(re, n_plus, n_minus)?;
    let intervals: Vec<IntervalRatio> = transitions
        .intervals
        .iter()
        .enumerate()
        .map(|(index, iv)| {
            let quarter_wave = if iv.level == Level::Plus { q.d_plus } else { q.d_minus };
            IntervalRatio {
                index,
                class: iv.class,
                level: iv.level,
                width: iv.width(),
                quarter_wave,
                ratio: iv.width() / quarter_wave,
            }
        })
        .collect();
    let max_deviation = intervals
        .iter()
        .filter(|r| r.class != IntervalClass::Center)
        .map(|r| (r.ratio - 1.0).abs())
        .fold(0.0, f64::max);
    let mode = &pair.mode;
    let mid = 0.5 * mode.structure().length();
    let (alpha, _) = alpha_of_mode(mode)?;
    let (u, _) = mode.evaluate(mid)?;
    let c = alpha * pair.omega * pair.omega;
    let center_switch = (c * u * u).im;
    Ok(BraggComparison {
        omega: pair.omega,
        intervals,
        max_deviation,
        center_width: transitions.center().map(|c| c.width()),
        center_bound: 2.0 * q.d_plus,
        center_switch,
        center_switch_relative: center_switch / (c.norm() * u.norm_sqr()),
    })
}

/// Refine the interfaces of an optimized run off the cell grid and compare
/// the refined profile with the quarter-wave relation.
pub fn compare_to_bragg(run: &OptimizationRun) -> Result<BraggComparison> {
    let a = &run.admissible;
    let refined = refine_interfaces(&run.structure, a, run.omega(), 200)?;
    compare_profile(&refined.pair, &refined.transitions, a.n_plus, a.n_minus)
}
