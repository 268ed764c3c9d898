//! Minimization of the width `|Im omega|` of one tracked resonance over the
//! cell values of the index, subject to `n_minus <= n <= n_plus`.
//!
//! The iteration is projected gradient descent with Barzilai-Borwein step
//! lengths and Armijo backtracking. After every trial step the resonance is
//! re-converged from its previous position and accepted only if it stayed on
//! the same branch.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{
    build_mode, find_resonances, newton_root, width_rect, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::gradient::{alpha_of_mode, gradient_of_mode, GradientVector};
use crate::mode::{Mode, ResonancePair};
use crate::structure::{AdmissibleSet, Cell, PiecewiseConstantStructure};

const ARMIJO_SIGMA: f64 = 1e-4;
const MAX_TRACKING_FAILURES: usize = 20;
const MAX_BACKTRACKS: usize = 60;
const NEIGHBOR_REFRESH: usize = 25;
/// Relative narrowing a discrete move must achieve to be kept.
const FLIP_GAIN: f64 = 1e-10;
/// Descent iterations allowed after each restart of the polishing phase.
const HOP_ITERATIONS: usize = 150;

/// Which resonance to optimize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Target {
    /// The resonance whose mode modulus has `j` interior minima (for `j = 0`,
    /// one minimum and a purely imaginary frequency).
    Mode(usize),
    /// The resonance Newton reaches from this starting frequency.
    Omega(Complex64),
}

#[derive(Debug, Clone)]
pub struct OptimizeConfig {
    pub admissible: AdmissibleSet,
    pub cells: usize,
    pub target: Target,
    pub max_iter: usize,
    /// Stop once the projected-gradient norm falls below this.
    pub g_tol: f64,
    /// Depth of the search window used to select the initial resonance.
    pub im_floor: f64,
    /// Starting structure; uniform midpoint value when absent.
    pub initial: Option<PiecewiseConstantStructure>,
    /// Largest change of any cell value in one step, as a fraction of
    /// `n_plus - n_minus`.
    pub max_change: f64,
    /// Follow descent with single-cell moves to the opposite bound.
    pub polish: bool,
}

impl OptimizeConfig {
    pub fn new(admissible: AdmissibleSet, cells: usize, target: Target) -> Self {
        Self {
            admissible,
            cells,
            target,
            max_iter: 3000,
            g_tol: 1e-9,
            im_floor: -3.0,
            initial: None,
            max_change: 0.02,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub width: f64,
    pub re_omega: f64,
    pub step: f64,
    pub pg_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    Stationary,
    LineSearchStalled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BangBangMetrics {
    pub fraction_at_bounds: f64,
    pub max_interior_deviation: f64,
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub bangbang: BangBangMetrics,
    /// Largest violation of the first-order sign conditions, relative to the
    /// largest gradient entry.
    pub kkt_violation: f64,
    pub within_rho: bool,
    pub transitions: Option<Transitions>,
}

#[derive(Debug, Clone)]
pub struct OptimizationRun {
    pub initial: PiecewiseConstantStructure,
    pub cells: usize,
    pub target: Target,
    pub admissible: AdmissibleSet,
    pub history: Vec<IterationRecord>,
    pub structure: PiecewiseConstantStructure,
    pub pair: ResonancePair,
    pub gradient: GradientVector,
    pub stop: StopReason,
    pub diagnostics: Diagnostics,
}

impl OptimizationRun {
    pub fn omega(&self) -> Complex64 {
        self.pair.omega
    }

    pub fn width(&self) -> f64 {
        self.pair.omega.im.abs()
    }
}

/// Number of strict interior local minima of `|u|` sampled on `samples`
/// equispaced points.
pub fn count_modulus_minima(mode: &Mode, samples: usize) -> usize {
    let l = mode.structure().length();
    let vals: Vec<f64> = (0..samples)
        .map(|i| {
            let x = l * i as f64 / (samples - 1) as f64;
            mode.evaluate(x).map(|(u, _)| u.norm()).unwrap_or(f64::NAN)
        })
        .collect();
    // collapse neighbours equal up to round-off so a minimum that falls
    // between two symmetric samples is still seen as one strict minimum
    let mut plateaus: Vec<f64> = Vec::with_capacity(vals.len());
    for v in vals {
        match plateaus.last() {
            Some(&p) if (v - p).abs() <= 1e-12 * p.abs().max(v.abs()) => {}
            _ => plateaus.push(v),
        }
    }
    plateaus
        .windows(3)
        .filter(|w| w[1] < w[0] && w[1] < w[2])
        .count()
}

fn minima_samples(s: &PiecewiseConstantStructure, omega: Complex64) -> usize {
    let waves = omega.re.abs() * s.n_max() * s.length() / PI;
    (64.0 * waves).max(2000.0) as usize
}

/// True when `omega` is purely imaginary up to solver round-off.
fn on_imaginary_axis(omega: Complex64) -> bool {
    omega.re.abs() <= 1e-8 * (1.0 + omega.norm())
}

/// The resonance of `s0` whose mode modulus has `j` interior minima.
pub fn select_mode(
    s0: &PiecewiseConstantStructure,
    a: &AdmissibleSet,
    j: i64,
    im_floor: f64,
) -> Result<ResonancePair> {
    if j < 0 {
        return Err(Error::Precondition(format!("mode index {j} must be nonnegative")));
    }
    let j = j as usize;
    let merged = s0.merge_cells(0.0);
    let rect = width_rect(a, im_floor)?;
    let (nx, ny) = crate::forward::default_grid(&merged, &rect);
    let set = find_resonances(&merged, &rect, nx, ny, DEFAULT_TOL)?;
    let mut available = Vec::new();
    let mut chosen = None;
    for p in set.pairs.iter().filter(|p| p.omega.re >= -1e-8 * (1.0 + p.omega.norm())) {
        let minima = count_modulus_minima(&p.mode, minima_samples(&merged, p.omega));
        let axis = on_imaginary_axis(p.omega);
        let matches = if j == 0 {
            minima == 1 && axis
        } else {
            minima == j && !axis
        };
        available.push(minima);
        if matches && chosen.is_none() {
            chosen = Some(p.omega);
        }
    }
    let omega = chosen.ok_or(Error::SelectorFailure { wanted: j, available })?;
    let omega = if j == 0 { Complex64::new(0.0, omega.im) } else { omega };
    resolve_on(s0, omega)
}

/// Newton from `omega` on `s` and attach the mode.
fn resolve_on(s: &PiecewiseConstantStructure, omega: Complex64) -> Result<ResonancePair> {
    let (omega, residual) = newton_root(s, omega, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let mode = build_mode(Arc::new(s.clone()), omega)?;
    Ok(ResonancePair {
        omega,
        mode,
        residual,
    })
}

/// Roots near `omega` other than `omega` itself, found by Newton from a ring
/// of starts. Used as the competing branches when tracking.
pub fn neighbor_roots(s: &PiecewiseConstantStructure, omega: Complex64) -> Vec<Complex64> {
    let r = 0.5 * PI / (s.n_max() * s.length());
    let mut found: Vec<Complex64> = Vec::new();
    for k in 0..8 {
        let z = omega + Complex64::from_polar(r, 2.0 * PI * k as f64 / 8.0 + 0.1);
        if let Ok((w, _)) = newton_root(s, z, DEFAULT_TOL, DEFAULT_MAX_ITER) {
            let distinct = (w - omega).norm() > 1e-6 * (1.0 + omega.norm());
            if distinct && found.iter().all(|f| (f - w).norm() > 1e-6 * (1.0 + w.norm())) {
                found.push(w);
            }
        }
    }
    found
}

/// Radius within which a re-converged root counts as the same branch.
fn tracking_radius(s: &PiecewiseConstantStructure, omega: Complex64, neighbors: &[Complex64]) -> f64 {
    let nearest = neighbors
        .iter()
        .map(|w| (w - omega).norm())
        .fold(f64::INFINITY, f64::min);
    if nearest.is_finite() {
        0.5 * nearest
    } else {
        0.5 * PI / (s.n_max() * s.length())
    }
}

/// Re-converge `omega_prev` on `s_new`, rejecting jumps to another branch.
pub fn track_resonance(
    s_new: &PiecewiseConstantStructure,
    omega_prev: Complex64,
    neighbors: &[Complex64],
) -> Result<ResonancePair> {
    let radius = tracking_radius(s_new, omega_prev, neighbors);
    let (omega, residual) = newton_root(s_new, omega_prev, DEFAULT_TOL, DEFAULT_MAX_ITER)
        .map_err(|e| Error::TrackingLoss(e.to_string()))?;
    let jump = (omega - omega_prev).norm();
    if jump > radius {
        return Err(Error::TrackingLoss(format!(
            "root moved by {jump:.3e} from {omega_prev}, beyond the branch radius {radius:.3e}"
        )));
    }
    let mode = build_mode(Arc::new(s_new.clone()), omega)?;
    Ok(ResonancePair {
        omega,
        mode,
        residual,
    })
}

fn symmetrize_values(x: &mut [f64]) {
    let m = x.len();
    for k in 0..m / 2 {
        let v = 0.5 * (x[k] + x[m - 1 - k]);
        x[k] = v;
        x[m - 1 - k] = v;
    }
}

fn project(x: &[f64], a: &AdmissibleSet) -> Vec<f64> {
    let mut p: Vec<f64> = x.iter().map(|v| v.clamp(a.n_minus, a.n_plus)).collect();
    if a.symmetric {
        symmetrize_values(&mut p);
    }
    p
}

/// Gradient of the objective `-Im omega` per cell.
fn objective_gradient(g: &GradientVector) -> Vec<f64> {
    g.d_omega.iter().map(|z| -z.im).collect()
}

/// Current iterate of the optimizer with everything derived from it.
struct Iterate {
    x: Vec<f64>,
    s: PiecewiseConstantStructure,
    pair: ResonancePair,
    grad: GradientVector,
    gf: Vec<f64>,
    dens: Vec<f64>,
}

impl Iterate {
    fn new(x: Vec<f64>, s: PiecewiseConstantStructure, pair: ResonancePair, widths: &[f64]) -> Result<Self> {
        let grad = gradient_of_mode(&pair.mode)?;
        let gf = objective_gradient(&grad);
        let dens = gf.iter().zip(widths).map(|(g, w)| g / w).collect();
        Ok(Self { x, s, pair, grad, gf, dens })
    }

    fn width(&self) -> f64 {
        -self.pair.omega.im
    }
}

struct Descent<'a> {
    cfg: &'a OptimizeConfig,
    a: AdmissibleSet,
    widths: Vec<f64>,
    history: Vec<IterationRecord>,
    iter: usize,
    budget: usize,
}

impl Descent<'_> {
    fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.widths).map(|((p, q), w)| p * q * w).sum()
    }

    fn pg_norm(&self, x: &[f64], dens: &[f64]) -> f64 {
        let trial: Vec<f64> = x.iter().zip(dens).map(|(v, d)| v - d).collect();
        let p = project(&trial, &self.a);
        let diff: Vec<f64> = p.iter().zip(x).map(|(p, q)| p - q).collect();
        self.dot(&diff, &diff).sqrt()
    }

    fn record(&mut self, it: &Iterate, step: f64) {
        let pg_norm = self.pg_norm(&it.x, &it.dens);
        self.history.push(IterationRecord {
            iter: self.iter,
            width: it.width(),
            re_omega: it.pair.omega.re,
            step,
            pg_norm,
        });
    }

    /// Projected-gradient iterations until a stopping rule fires.
    fn run(&mut self, it: &mut Iterate) -> Result<StopReason> {
        let a = self.a;
        let span = a.n_plus - a.n_minus;
        let dmax = it.dens.iter().map(|d| d.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut step = 0.05 * span / dmax;
        let mut neighbors = neighbor_roots(&it.s, it.pair.omega);
        let mut tracking_failures = 0;
        let mut local = 0;
        while self.iter < self.budget {
            if self.pg_norm(&it.x, &it.dens) <= self.cfg.g_tol {
                return Ok(StopReason::GradientTolerance);
            }
            local += 1;
            if local % NEIGHBOR_REFRESH == 0 {
                neighbors = neighbor_roots(&it.s, it.pair.omega);
            }
            let free_max = free_gradient_max(&it.x, &it.dens, &a);
            let mut t = step.min(self.cfg.max_change * span / free_max);
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let trial: Vec<f64> = it.x.iter().zip(&it.dens).map(|(v, d)| v - t * d).collect();
                let x_new = project(&trial, &a);
                let dx: Vec<f64> = x_new.iter().zip(&it.x).map(|(p, q)| p - q).collect();
                if dx.iter().all(|d| *d == 0.0) {
                    return Ok(StopReason::Stationary);
                }
                let s_new = it.s.with_values(&x_new)?;
                match track_resonance(&s_new, it.pair.omega, &neighbors) {
                    Ok(p_new) => {
                        tracking_failures = 0;
                        let decrease: f64 = it.gf.iter().zip(&dx).map(|(g, d)| g * d).sum();
                        if -p_new.omega.im <= it.width() + ARMIJO_SIGMA * decrease {
                            accepted = Some((x_new, s_new, p_new, dx, t));
                            break;
                        }
                    }
                    Err(Error::TrackingLoss(_)) => {
                        tracking_failures += 1;
                        if tracking_failures > MAX_TRACKING_FAILURES {
                            return Err(Error::TrackingLoss(format!(
                                "{tracking_failures} consecutive failures at iteration {}",
                                self.iter + 1
                            )));
                        }
                    }
                    Err(e) => return Err(e),
                }
                t *= 0.5;
            }
            let Some((x_new, s_new, p_new, dx, t_used)) = accepted else {
                return Ok(StopReason::LineSearchStalled);
            };
            let next = Iterate::new(x_new, s_new, p_new, &self.widths)?;
            let y: Vec<f64> = next.dens.iter().zip(&it.dens).map(|(p, q)| p - q).collect();
            let sy = self.dot(&dx, &y);
            let ss = self.dot(&dx, &dx);
            step = if sy > 0.0 { ss / sy } else { 4.0 * t_used };
            step = step.clamp(1e-14 * span / dmax, 1e6 * span / dmax);
            *it = next;
            self.iter += 1;
            self.record(it, t_used);
        }
        Ok(StopReason::MaxIterations)
    }

    /// Cells worth moving to the opposite bound: those next to an interface
    /// and those strictly between the bounds, alone and together with their
    /// mirror cell.
    fn flip_candidates(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let a = self.a;
        let m = x.len();
        let mid = a.midpoint();
        let level = |v: f64| v > mid;
        let mut out = Vec::new();
        let limit = if a.symmetric { m.div_ceil(2) } else { m };
        for k in 0..limit {
            let interior = x[k] > a.n_minus && x[k] < a.n_plus;
            let edge = (k > 0 && level(x[k - 1]) != level(x[k]))
                || (k + 1 < m && level(x[k + 1]) != level(x[k]));
            if !(interior || edge) {
                continue;
            }
            let targets: &[f64] = if interior {
                &[a.n_minus, a.n_plus]
            } else if level(x[k]) {
                &[a.n_minus]
            } else {
                &[a.n_plus]
            };
            for &v in targets {
                let mut y = x.to_vec();
                y[k] = v;
                if a.symmetric {
                    y[m - 1 - k] = v;
                    out.push(y);
                    continue;
                }
                let mirror = m - 1 - k;
                if mirror != k && x[mirror] != v {
                    let mut z = y.clone();
                    z[mirror] = v;
                    out.push(z);
                }
                out.push(y);
            }
        }
        out
    }

    /// Best single-cell flip that narrows the tracked resonance, if any.
    fn best_flip(&self, it: &Iterate) -> Result<Option<Iterate>> {
        let neighbors = neighbor_roots(&it.s, it.pair.omega);
        let base = it.width();
        let best = self
            .flip_candidates(&it.x)
            .into_par_iter()
            .filter_map(|y| {
                let s = it.s.with_values(&y).ok()?;
                let p = track_resonance(&s, it.pair.omega, &neighbors).ok()?;
                (-p.omega.im < base - FLIP_GAIN * base.abs()).then_some((y, s, p))
            })
            .min_by(|l, r| (-l.2.omega.im).total_cmp(&(-r.2.omega.im)));
        best.map(|(y, s, p)| Iterate::new(y, s, p, &self.widths)).transpose()
    }
}

impl Descent<'_> {
    /// Restarts from mirrored pair flips and from the symmetrized iterate,
    /// each followed by a short descent. Returns the best restart that ends
    /// narrower than `it`, with the iterations it consumed.
    fn best_hop(&self, it: &Iterate) -> Result<Option<(Iterate, usize)>> {
        let a = self.a;
        let m = it.x.len();
        let mut starts: Vec<Vec<f64>> = self
            .flip_candidates(&it.x)
            .into_iter()
            .filter(|y| {
                let changed: Vec<usize> = (0..m).filter(|&k| y[k] != it.x[k]).collect();
                changed.len() == 2 || (changed.len() == 1 && changed[0] == m - 1 - changed[0])
            })
            .collect();
        let mut sym = it.x.clone();
        symmetrize_values(&mut sym);
        if sym != it.x {
            starts.push(sym);
        }
        let base = it.width();
        let remaining = self.budget.saturating_sub(self.iter);
        let hop_budget = HOP_ITERATIONS.min(remaining);
        if hop_budget == 0 {
            return Ok(None);
        }
        let best = starts
            .into_par_iter()
            .filter_map(|y| {
                let s = it.s.with_values(&y).ok()?;
                let neighbors = neighbor_roots(&it.s, it.pair.omega);
                let p = track_resonance(&s, it.pair.omega, &neighbors).ok()?;
                let mut start = Iterate::new(y, s, p, &self.widths).ok()?;
                let mut sub = Descent {
                    cfg: self.cfg,
                    a,
                    widths: self.widths.clone(),
                    history: Vec::new(),
                    iter: 0,
                    budget: hop_budget,
                };
                sub.run(&mut start).ok()?;
                (start.width() < base - FLIP_GAIN * base.abs()).then_some((start, sub.iter))
            })
            .min_by(|l, r| l.0.width().total_cmp(&r.0.width()));
        Ok(best)
    }
}

/// Run the optimization described by `cfg`.
///
/// Projected-gradient descent is followed by a discrete polishing phase:
/// single cells next to an interface are moved to the opposite bound, the
/// best improvement is kept and descent resumes, until no move helps.
pub fn optimize_width(cfg: &OptimizeConfig) -> Result<OptimizationRun> {
    let a = cfg.admissible;
    a.check()?;
    if cfg.cells < 16 {
        return Err(Error::Precondition(format!("need at least 16 cells, got {}", cfg.cells)));
    }
    let initial = match &cfg.initial {
        Some(s) => s.clone(),
        None => PiecewiseConstantStructure::uniform(a.length, cfg.cells, a.midpoint())?,
    };
    if initial.len() != cfg.cells {
        return Err(Error::Precondition(format!(
            "initial structure has {} cells, config says {}",
            initial.len(),
            cfg.cells
        )));
    }
    let mut pair = match cfg.target {
        Target::Mode(j) => select_mode(&initial, &a, j as i64, cfg.im_floor)?,
        Target::Omega(w) => resolve_on(&initial, w)?,
    };
    let widths: Vec<f64> = initial.cells().iter().map(Cell::width).collect();
    let x = project(&initial.values(), &a);
    let s = initial.with_values(&x)?;
    if s != initial {
        pair = resolve_on(&s, pair.omega)?;
    }
    let mut it = Iterate::new(x, s, pair, &widths)?;
    let mut descent = Descent {
        cfg,
        a,
        widths,
        history: Vec::new(),
        iter: 0,
        budget: cfg.max_iter,
    };
    descent.record(&it, 0.0);

    let mut stop = descent.run(&mut it)?;
    if cfg.polish {
        while descent.iter < cfg.max_iter {
            if let Some(next) = descent.best_flip(&it)? {
                it = next;
            } else if let Some((next, used)) = descent.best_hop(&it)? {
                it = next;
                descent.iter += used;
            } else {
                break;
            }
            descent.iter += 1;
            descent.record(&it, 0.0);
            stop = descent.run(&mut it)?;
        }
    }

    let diagnostics = diagnose(&it.s, &a, &it.pair, &it.grad);
    Ok(OptimizationRun {
        initial,
        cells: cfg.cells,
        target: cfg.target,
        admissible: a,
        history: descent.history,
        structure: it.s,
        pair: it.pair,
        gradient: it.grad,
        stop,
        diagnostics,
    })
}

/// Largest descent-direction magnitude over cells the projection does not
/// block.
fn free_gradient_max(x: &[f64], dens: &[f64], a: &AdmissibleSet) -> f64 {
    x.iter()
        .zip(dens)
        .filter(|(v, d)| !((**v >= a.n_plus && **d < 0.0) || (**v <= a.n_minus && **d > 0.0)))
        .map(|(_, d)| d.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
}

fn diagnose(
    s: &PiecewiseConstantStructure,
    a: &AdmissibleSet,
    pair: &ResonancePair,
    grad: &GradientVector,
) -> Diagnostics {
    let tol = 1e-3 * (a.n_plus - a.n_minus);
    let bangbang = bangbang_metrics(s, a, tol);
    let transitions = extract_transitions(s, a, None).ok();
    Diagnostics {
        kkt_violation: kkt_violation(s, a, grad, tol),
        within_rho: pair.omega.re.abs() <= a.rho,
        bangbang,
        transitions,
    }
}

/// Largest violation of the sign conditions `d Im omega / d n >= 0` on cells
/// at `n_plus` and `<= 0` on cells at `n_minus`, relative to the largest
/// gradient magnitude.
pub fn kkt_violation(
    s: &PiecewiseConstantStructure,
    a: &AdmissibleSet,
    grad: &GradientVector,
    tol: f64,
) -> f64 {
    let dens: Vec<f64> = grad.density().iter().map(|z| z.im).collect();
    let scale = dens.iter().map(|d| d.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    s.cells()
        .iter()
        .zip(&dens)
        .map(|(c, d)| {
            if (c.n - a.n_plus).abs() <= tol {
                (-d).max(0.0)
            } else if (c.n - a.n_minus).abs() <= tol {
                d.max(0.0)
            } else {
                d.abs()
            }
        })
        .fold(0.0, f64::max)
        / scale
}

/// Fraction of length at the bounds, the largest deviation from the nearest
/// bound elsewhere, and the mirror asymmetry.
pub fn bangbang_metrics(s: &PiecewiseConstantStructure, a: &AdmissibleSet, tol: f64) -> BangBangMetrics {
    let mut at_bounds = 0.0;
    let mut max_dev: f64 = 0.0;
    for c in s.cells() {
        let dev = (c.n - a.n_minus).abs().min((c.n - a.n_plus).abs());
        if dev <= tol {
            at_bounds += c.width();
        } else {
            max_dev = max_dev.max(dev);
        }
    }
    BangBangMetrics {
        fraction_at_bounds: at_bounds / s.length(),
        max_interior_deviation: max_dev,
        asymmetry: s.asymmetry(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalClass {
    Leftmost,
    Rightmost,
    Center,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub x_lo: f64,
    pub x_hi: f64,
    pub level: Level,
    pub class: IntervalClass,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }
}

/// Discontinuity points `x_0 < ... < x_N` of a binarized two-level profile
/// and the `N` intervals between them. Intervals run from the first to the
/// last `n_plus` plateau; segments at `n_minus` outside that range are
/// reported separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transitions {
    pub points: Vec<f64>,
    pub intervals: Vec<Interval>,
    pub leading_minus: Option<(f64, f64)>,
    pub trailing_minus: Option<(f64, f64)>,
    pub fraction_at_bounds: f64,
}

impl Transitions {
    /// Number of intervals `N`.
    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn plus_plateaus(&self) -> usize {
        self.intervals.iter().filter(|i| i.level == Level::Plus).count()
    }

    pub fn center(&self) -> Option<&Interval> {
        self.intervals.iter().find(|i| i.class == IntervalClass::Center)
    }
}

/// Binarize `s` at `threshold` (midpoint of the bounds by default; values
/// exactly at the threshold go to `n_minus`) and extract its transitions.
///
/// A cell whose value lies strictly between the bounds next to a level change
/// is read as partially filled: the interface is placed inside it so that the
/// `n_plus` share of the cell equals `(n - n_minus) / (n_plus - n_minus)`.
pub fn extract_transitions(
    s: &PiecewiseConstantStructure,
    a: &AdmissibleSet,
    threshold: Option<f64>,
) -> Result<Transitions> {
    let tol = 1e-3 * (a.n_plus - a.n_minus);
    let fraction = bangbang_metrics(s, a, tol).fraction_at_bounds;
    if fraction <= 0.95 {
        return Err(Error::Inapplicable(format!(
            "structure is not bang-bang: fraction at bounds {fraction:.4}"
        )));
    }
    let threshold = threshold.unwrap_or_else(|| a.midpoint());
    let level = |n: f64| if n > threshold { Level::Plus } else { Level::Minus };
    let cells = s.cells();
    // binarized segments as (x_lo, x_hi, level)
    let mut segs: Vec<(f64, f64, Level)> = Vec::new();
    for c in cells {
        let lv = level(c.n);
        match segs.last_mut() {
            Some(last) if last.2 == lv => last.1 = c.x1,
            _ => segs.push((c.x0, c.x1, lv)),
        }
    }
    // move each interface inside a partially filled boundary cell
    let span = a.n_plus - a.n_minus;
    let fill = |n: f64| ((n - a.n_minus) / span).clamp(0.0, 1.0);
    for i in 0..segs.len().saturating_sub(1) {
        let x = segs[i].1;
        let k = s.cell_index(x).expect("interior breakpoint");
        let (left, right) = (cells[k - 1], cells[k]);
        let plus_on_left = segs[i].2 == Level::Plus;
        let mut pos = x;
        // the cell on each side of the breakpoint may be the intermediate one
        let right_dev = (right.n - a.n_minus).abs().min((right.n - a.n_plus).abs());
        let left_dev = (left.n - a.n_minus).abs().min((left.n - a.n_plus).abs());
        if right_dev > tol && right_dev >= left_dev {
            // right cell belongs to the segment after x
            let share = if plus_on_left { fill(right.n) } else { 1.0 - fill(right.n) };
            pos = right.x0 + share * right.width();
        } else if left_dev > tol {
            let share = if plus_on_left { 1.0 - fill(left.n) } else { fill(left.n) };
            pos = left.x1 - share * left.width();
        }
        segs[i].1 = pos;
        segs[i + 1].0 = pos;
    }
    let first_plus = segs.iter().position(|g| g.2 == Level::Plus);
    let last_plus = segs.iter().rposition(|g| g.2 == Level::Plus);
    let (Some(lo), Some(hi)) = (first_plus, last_plus) else {
        return Err(Error::Inapplicable("no n_plus plateau".into()));
    };
    let leading_minus = (lo > 0).then(|| (segs[0].0, segs[lo - 1].1));
    let trailing_minus = (hi + 1 < segs.len()).then(|| (segs[hi + 1].0, segs[segs.len() - 1].1));
    let core = &segs[lo..=hi];
    let n = core.len();
    let center = (n % 2 == 1).then_some((n - 1) / 2);
    let intervals: Vec<Interval> = core
        .iter()
        .enumerate()
        .map(|(i, &(x_lo, x_hi, level))| Interval {
            x_lo,
            x_hi,
            level,
            class: if Some(i) == center {
                IntervalClass::Center
            } else if i == 0 {
                IntervalClass::Leftmost
            } else if i == n - 1 {
                IntervalClass::Rightmost
            } else {
                IntervalClass::Interior
            },
        })
        .collect();
    let mut points: Vec<f64> = intervals.iter().map(|i| i.x_lo).collect();
    points.push(intervals[n - 1].x_hi);
    Ok(Transitions {
        points,
        intervals,
        leading_minus,
        trailing_minus,
        fraction_at_bounds: fraction,
    })
}

/// A two-level profile with one layer per interval and interfaces placed
/// off the cell grid, from [`refine_interfaces`].
#[derive(Debug, Clone)]
pub struct RefinedProfile {
    pub structure: PiecewiseConstantStructure,
    pub transitions: Transitions,
    pub pair: ResonancePair,
    /// Width of the resonance on the cell profile before refinement.
    pub initial_width: f64,
    pub iterations: usize,
    /// Largest interface move in the last iteration.
    pub last_move: f64,
    /// Largest `|sin(2 arg u(x_j) + arg(alpha omega^2))|` over interior
    /// interfaces at exit.
    pub switch_residual: f64,
}

impl RefinedProfile {
    pub fn width(&self) -> f64 {
        -self.pair.omega.im
    }
}

fn layered(length: f64, points: &[f64], levels: &[f64]) -> Result<PiecewiseConstantStructure> {
    let cells = levels
        .iter()
        .enumerate()
        .map(|(i, &n)| Cell {
            x0: points[i],
            x1: points[i + 1],
            n,
        })
        .collect();
    PiecewiseConstantStructure::new(length, cells)
}

/// Unit-modulus `alpha omega^2`, whose product with `u^2` has imaginary part
/// of the sign of the switching function.
fn switch_coefficient(pair: &ResonancePair) -> Result<Complex64> {
    let (alpha, _) = alpha_of_mode(&pair.mode)?;
    let c = alpha * pair.omega * pair.omega;
    Ok(c / c.norm())
}

/// Zero of `Im(c u^2)` nearest to `p` within `[lo, hi]`, or `p` itself when
/// there is none.
fn nearest_switch(mode: &Mode, c: Complex64, p: f64, lo: f64, hi: f64) -> Result<f64> {
    const STEPS: usize = 64;
    let f = |x: f64| -> Result<f64> {
        let u = mode.evaluate(x)?.0;
        Ok((c * u * u).im)
    };
    let fp = f(p)?;
    if fp == 0.0 {
        return Ok(p);
    }
    let bracket = |end: f64| -> Result<Option<(f64, f64)>> {
        let mut prev = p;
        for i in 1..=STEPS {
            let x = p + (end - p) * i as f64 / STEPS as f64;
            if f(x)? * fp <= 0.0 {
                return Ok(Some((prev, x)));
            }
            prev = x;
        }
        Ok(None)
    };
    let candidates = [bracket(lo)?, bracket(hi)?];
    let Some((mut a, mut b)) = candidates
        .into_iter()
        .flatten()
        .min_by(|x, y| (x.1 - p).abs().total_cmp(&(y.1 - p).abs()))
    else {
        return Ok(p);
    };
    let fa = f(a)?;
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if f(m)? * fa > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// `sin(2 arg u(p) + arg(alpha omega^2))` at every interior interface: the
/// switching function at `p` divided by its modulus.
fn switch_residuals(pair: &ResonancePair, points: &[f64]) -> Result<Vec<f64>> {
    let c = switch_coefficient(pair)?;
    points[1..points.len() - 1]
        .iter()
        .map(|&p| {
            let u = pair.mode.evaluate(p)?.0;
            Ok((c * u * u / u.norm_sqr()).im)
        })
        .collect()
}

/// Solves `m x = b` in place by Gaussian elimination with partial pivoting.
fn solve_dense(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

/// Moves the interfaces of a bang-bang optimum off the cell grid.
///
/// The profile is binarized into one layer per interval. Each interior
/// interface is first moved repeatedly to the nearest zero of the switching
/// function until the moves are below `1e-7 L`; Newton's method with a
/// finite-difference Jacobian then drives the switching function to zero.
/// Every step is halved until it does not widen the resonance (Newton steps
/// must also shrink the residual and stay within one grid cell). The cell
/// grid can only satisfy this first-order condition to within a cell.
pub fn refine_interfaces(
    s: &PiecewiseConstantStructure,
    a: &AdmissibleSet,
    omega: Complex64,
    max_iter: usize,
) -> Result<RefinedProfile> {
    const FD_STEP: f64 = 1e-7;
    const WIDTH_SLACK: f64 = 1e-10;
    const SETTLED: f64 = 1e-7;
    const HANDOFF: f64 = 1e-3;
    let tr = extract_transitions(s, a, None)?;
    let length = s.length();
    let cell = length / s.len() as f64;
    let level_n = |lv: Level| if lv == Level::Plus { a.n_plus } else { a.n_minus };
    let mut points = vec![0.0];
    let mut levels = Vec::new();
    if let Some((_, hi)) = tr.leading_minus {
        points.push(hi);
        levels.push(a.n_minus);
    }
    for iv in &tr.intervals {
        points.push(iv.x_hi);
        levels.push(level_n(iv.level));
    }
    if tr.trailing_minus.is_some() {
        points.push(length);
        levels.push(a.n_minus);
    }
    let last = points.len() - 1;
    points[last] = length;

    let solve = |pts: &[f64], near: Complex64| -> Result<(PiecewiseConstantStructure, ResonancePair)> {
        let layers = layered(length, pts, &levels)?;
        let pair = track_resonance(&layers, near, &[])?;
        Ok((layers, pair))
    };
    let (mut layers, mut pair) = solve(&points, omega)?;
    let initial_width = -pair.omega.im;
    let mut iterations = 0;
    let mut last_move = f64::INFINITY;
    // move each interface to the nearest switching point, halving the move
    // while it widens the resonance
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    while iterations < max_iter && last_move > SETTLED * length {
        if norm(&switch_residuals(&pair, &points)?) < HANDOFF {
            break;
        }
        iterations += 1;
        let c = switch_coefficient(&pair)?;
        let mut target = points.clone();
        for i in 1..last {
            let lo = 0.5 * (points[i - 1] + points[i]);
            let hi = 0.5 * (points[i] + points[i + 1]);
            target[i] = nearest_switch(&pair.mode, c, points[i], lo, hi)?;
        }
        let mut t = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = points.iter().zip(&target).map(|(p, q)| p + t * (q - p)).collect();
            if let Ok((l_new, p_new)) = solve(&trial, pair.omega) {
                if -p_new.omega.im <= -pair.omega.im * (1.0 + WIDTH_SLACK) {
                    break Some((trial, l_new, p_new));
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                break None;
            }
        };
        let Some((trial, l_new, p_new)) = accepted else {
            break;
        };
        last_move = trial.iter().zip(&points).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        points = trial;
        layers = l_new;
        pair = p_new;
    }
    let mut r = switch_residuals(&pair, &points)?;
    let mut newton = 0;
    while newton < max_iter && norm(&r) > 1e-12 {
        newton += 1;
        let free = last - 1;
        let h = FD_STEP * length;
        let mut jac = vec![vec![0.0; free]; free];
        for j in 0..free {
            let mut pts = points.clone();
            pts[j + 1] += h;
            let (_, pj) = solve(&pts, pair.omega)?;
            let rj = switch_residuals(&pj, &pts)?;
            for i in 0..free {
                jac[i][j] = (rj[i] - r[i]) / h;
            }
        }
        let Some(step) = solve_dense(jac, r.iter().map(|v| -v).collect()) else {
            break;
        };
        // trust region of one grid cell, and every layer keeps at least half
        // its current width
        let mut t: f64 = 1.0;
        let max_d = step.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if max_d > cell {
            t = cell / max_d;
        }
        for (j, d) in step.iter().enumerate() {
            let room = if *d > 0.0 {
                points[j + 2] - points[j + 1]
            } else {
                points[j + 1] - points[j]
            };
            if d.abs() > 0.0 {
                t = t.min(0.5 * room / d.abs());
            }
        }
        let current = norm(&r);
        let accepted = loop {
            let mut trial = points.clone();
            for (j, d) in step.iter().enumerate() {
                trial[j + 1] += t * d;
            }
            if let Ok((l_new, p_new)) = solve(&trial, pair.omega) {
                let r_new = switch_residuals(&p_new, &trial)?;
                let widened = -p_new.omega.im > -pair.omega.im * (1.0 + WIDTH_SLACK);
                if norm(&r_new) < current && !widened {
                    break Some((trial, l_new, p_new, r_new));
                }
            }
            t *= 0.5;
            if t < 1e-8 {
                break None;
            }
        };
        let Some((trial, l_new, p_new, r_new)) = accepted else {
            break;
        };
        last_move = trial
            .iter()
            .zip(&points)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        points = trial;
        layers = l_new;
        pair = p_new;
        r = r_new;
    }
    iterations += newton;
    let switch_residual = norm(&r);

    let offset = usize::from(tr.leading_minus.is_some());
    let intervals: Vec<Interval> = tr
        .intervals
        .iter()
        .enumerate()
        .map(|(i, iv)| Interval {
            x_lo: points[offset + i],
            x_hi: points[offset + i + 1],
            ..*iv
        })
        .collect();
    let n = intervals.len();
    let transitions = Transitions {
        points: std::iter::once(intervals[0].x_lo)
            .chain(intervals.iter().map(|iv| iv.x_hi))
            .collect(),
        leading_minus: tr.leading_minus.map(|_| (0.0, intervals[0].x_lo)),
        trailing_minus: tr.trailing_minus.map(|_| (intervals[n - 1].x_hi, length)),
        intervals,
        fraction_at_bounds: 1.0,
    };
    Ok(RefinedProfile {
        structure: layers,
        transitions,
        pair,
        initial_width,
        iterations,
        last_move,
        switch_residual,
    })
}
