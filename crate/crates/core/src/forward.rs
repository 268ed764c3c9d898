//! Resonances of 1D piecewise-constant structures.
//!
//! The outgoing state `(u, u') = (1, -i omega)` is carried across the cells by
//! exact transfer matrices; resonances are the zeros of
//! `F(omega) = u'(L) - i omega u(L)`. Zeros are located by Newton's method
//! started from a grid and certified by an argument-principle count.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mode::{Mode, ResonancePair, SearchRect};
use crate::structure::{AdmissibleSet, PiecewiseConstantStructure};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default Newton tolerance on the scaled residual.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration cap for Newton.
pub const DEFAULT_MAX_ITER: usize = 60;
/// Distance kept between search rectangles and the real axis.
pub const EPS_TOP: f64 = 1e-6;
/// Roots closer to the origin than this are the trivial zero of `F`.
const ORIGIN_GUARD: f64 = 1e-8;
/// Residual slack accepted by [`reconstruct_mode`] for a supplied root.
const ROOT_CHECK_TOL: f64 = 1e-8;

/// Solution and its frequency derivative at `x = L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryState {
    pub u: Complex64,
    pub up: Complex64,
    pub du_domega: Complex64,
    pub dup_domega: Complex64,
    /// Frobenius norm of the accumulated transfer matrix.
    pub matrix_norm: f64,
}

/// Transfer matrix across one cell, `[[c, s/k], [-k s, c]]` with `k = omega n`.
#[derive(Debug, Clone, Copy)]
pub struct CellTransfer {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl CellTransfer {
    pub fn new(omega: Complex64, n: f64, width: f64) -> Self {
        let k = omega * n;
        let theta = k * width;
        let (c, s) = (theta.cos(), theta.sin());
        Self {
            m11: c,
            m12: s / k,
            m21: -k * s,
            m22: c,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn apply(&self, u: Complex64, up: Complex64) -> (Complex64, Complex64) {
        (self.m11 * u + self.m12 * up, self.m21 * u + self.m22 * up)
    }
}

fn check_omega(omega: Complex64) -> Result<()> {
    if omega == Complex64::new(0.0, 0.0) {
        Err(Error::DegenerateFrequency)
    } else {
        Ok(())
    }
}

/// Carry the left outgoing state across the structure.
pub fn propagate(s: &PiecewiseConstantStructure, omega: Complex64) -> Result<BoundaryState> {
    check_omega(omega)?;
    let mut u = Complex64::new(1.0, 0.0);
    let mut up = -I * omega;
    let mut du = Complex64::new(0.0, 0.0);
    let mut dup = -I;
    // accumulated matrix, for residual scaling
    let mut m = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
    for cell in s.cells() {
        let n = cell.n;
        let w = cell.width();
        let k = omega * n;
        let theta = k * w;
        let (c, sn) = (theta.cos(), theta.sin());
        let m12 = sn / k;
        let m21 = -k * sn;
        // derivatives of the entries with respect to omega
        let dc = -sn * n * w;
        let dm12 = c * w / omega - sn / (omega * omega * n);
        let dm21 = -n * sn - k * c * n * w;

        let nu = c * u + m12 * up;
        let nup = m21 * u + c * up;
        let ndu = dc * u + c * du + dm12 * up + m12 * dup;
        let ndup = dm21 * u + m21 * du + dc * up + c * dup;
        u = nu;
        up = nup;
        du = ndu;
        dup = ndup;

        m = [
            [c * m[0][0] + m12 * m[1][0], c * m[0][1] + m12 * m[1][1]],
            [m21 * m[0][0] + c * m[1][0], m21 * m[0][1] + c * m[1][1]],
        ];
    }
    let matrix_norm = m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(BoundaryState {
        u,
        up,
        du_domega: du,
        dup_domega: dup,
        matrix_norm,
    })
}

/// `F(omega) = u'(L) - i omega u(L)` and its derivative.
pub fn resonance_residual(
    s: &PiecewiseConstantStructure,
    omega: Complex64,
) -> Result<(Complex64, Complex64)> {
    let b = propagate(s, omega)?;
    Ok(residual_from_state(&b, omega))
}

fn residual_from_state(b: &BoundaryState, omega: Complex64) -> (Complex64, Complex64) {
    let f = b.up - I * omega * b.u;
    let df = b.dup_domega - I * b.u - I * omega * b.du_domega;
    (f, df)
}

fn residual_scale(b: &BoundaryState, omega: Complex64) -> f64 {
    1.0 + omega.norm() * b.matrix_norm
}

/// Newton's method on `F`, returning a certified pair with its mode.
pub fn newton_resonance(
    s: &PiecewiseConstantStructure,
    omega0: Complex64,
    tol: f64,
    max_iter: usize,
) -> Result<ResonancePair> {
    newton_root(s, omega0, tol, max_iter).and_then(|(omega, residual)| {
        let mode = build_mode(Arc::new(s.clone()), omega)?;
        Ok(ResonancePair {
            omega,
            mode,
            residual,
        })
    })
}

/// Newton iteration without mode reconstruction; returns `(omega, |F|)`.
pub fn newton_root(
    s: &PiecewiseConstantStructure,
    omega0: Complex64,
    tol: f64,
    max_iter: usize,
) -> Result<(Complex64, f64)> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance {tol} must be positive")));
    }
    let max_step = 4.0 * PI / (s.n_max() * s.length());
    let mut omega = omega0;
    let mut last_residual = f64::INFINITY;
    for iter in 0..=max_iter {
        let b = propagate(s, omega)?;
        let (f, df) = residual_from_state(&b, omega);
        let residual = f.norm();
        last_residual = residual;
        if !residual.is_finite() {
            break;
        }
        if residual <= tol * residual_scale(&b, omega) {
            // one polishing step once inside the basin
            let polished = if df.norm() > 0.0 { omega - f / df } else { omega };
            let (omega, residual) = match resonance_residual(s, polished) {
                Ok((fp, _)) if fp.norm() <= residual => (polished, fp.norm()),
                _ => (omega, residual),
            };
            if omega.im >= 0.0 || omega.norm() < ORIGIN_GUARD {
                return Err(Error::SpuriousRoot { omega });
            }
            return Ok((omega, residual));
        }
        if iter == max_iter || df.norm() == 0.0 {
            break;
        }
        let mut step = f / df;
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        omega -= step;
        if omega == Complex64::new(0.0, 0.0) {
            return Err(Error::SpuriousRoot { omega });
        }
    }
    Err(Error::Divergence {
        last: omega,
        residual: last_residual,
        iterations: max_iter,
    })
}

/// `(u, u')` at the left end of every cell, starting from `(1, -i omega)`.
pub(crate) fn cell_entry_states(
    s: &PiecewiseConstantStructure,
    omega: Complex64,
) -> Vec<(Complex64, Complex64)> {
    let mut u = Complex64::new(1.0, 0.0);
    let mut up = -I * omega;
    let mut states = Vec::with_capacity(s.len());
    for cell in s.cells() {
        states.push((u, up));
        (u, up) = CellTransfer::new(omega, cell.n, cell.width()).apply(u, up);
    }
    states
}

pub(crate) fn build_mode(s: Arc<PiecewiseConstantStructure>, omega: Complex64) -> Result<Mode> {
    check_omega(omega)?;
    let states = cell_entry_states(&s, omega);
    Ok(Mode::from_cell_states(s, omega, &states))
}

/// Mode of a certified root.
pub fn reconstruct_mode(s: &PiecewiseConstantStructure, omega: Complex64) -> Result<Mode> {
    let b = propagate(s, omega)?;
    let (f, _) = residual_from_state(&b, omega);
    if f.norm() > ROOT_CHECK_TOL * residual_scale(&b, omega) {
        return Err(Error::NotAResonance {
            omega,
            residual: f.norm(),
        });
    }
    build_mode(Arc::new(s.clone()), omega)
}

/// `(u(x), u'(x))` of a mode; thin wrapper over [`Mode::evaluate_extended`].
pub fn evaluate_mode(m: &Mode, x: f64, exterior: bool) -> Result<(Complex64, Complex64)> {
    m.evaluate_extended(x, exterior)
}

/// Winding number of `F` around the boundary of `rect`.
///
/// Each edge starts with `n_boundary_samples` points and is bisected wherever
/// the phase of `F` moves by more than `pi/4` between neighbours. The total is
/// recomputed with doubled sampling until it lies within 0.01 of an integer.
pub fn count_zeros(
    s: &PiecewiseConstantStructure,
    rect: &SearchRect,
    n_boundary_samples: usize,
) -> Result<usize> {
    let corners = [
        Complex64::new(rect.re_min, rect.im_min),
        Complex64::new(rect.re_max, rect.im_min),
        Complex64::new(rect.re_max, rect.im_max),
        Complex64::new(rect.re_min, rect.im_max),
    ];
    let mut samples = n_boundary_samples.max(4);
    for _ in 0..6 {
        let pieces: Vec<f64> = (0..4)
            .into_par_iter()
            .map(|e| edge_winding(s, corners[e], corners[(e + 1) % 4], samples))
            .collect::<Result<Vec<_>>>()?;
        let total = pieces.iter().sum::<f64>() / (2.0 * PI);
        let rounded = total.round();
        if (total - rounded).abs() <= 0.01 {
            if rounded < 0.0 {
                return Err(Error::Precondition(format!(
                    "negative winding number {rounded}: F has poles or the contour is inverted"
                )));
            }
            return Ok(rounded as usize);
        }
        samples *= 2;
    }
    Err(Error::Precondition(
        "argument-principle sum did not settle near an integer".into(),
    ))
}

const PHASE_STEP: f64 = PI / 4.0;
const MAX_BISECTIONS: usize = 48;
/// `|F|` below this fraction of the residual scale on the contour means the
/// contour passes through (or numerically onto) a zero.
const CONTOUR_FLOOR: f64 = 1e-11;

fn edge_winding(
    s: &PiecewiseConstantStructure,
    a: Complex64,
    b: Complex64,
    samples: usize,
) -> Result<f64> {
    let eval = |z: Complex64| -> Result<Complex64> {
        let st = propagate(s, z)?;
        let (f, _) = residual_from_state(&st, z);
        if !(f.norm() > CONTOUR_FLOOR * residual_scale(&st, z)) {
            return Err(Error::ContourHitsZero {
                omega: z,
                residual: f.norm(),
            });
        }
        Ok(f)
    };
    let mut total = 0.0;
    let mut z0 = a;
    let mut f0 = eval(a)?;
    for i in 1..=samples {
        let z1 = a + (b - a) * (i as f64 / samples as f64);
        let f1 = eval(z1)?;
        total += segment_phase(&eval, z0, f0, z1, f1, 0)?;
        z0 = z1;
        f0 = f1;
    }
    Ok(total)
}

fn segment_phase<E>(
    eval: &E,
    z0: Complex64,
    f0: Complex64,
    z1: Complex64,
    f1: Complex64,
    depth: usize,
) -> Result<f64>
where
    E: Fn(Complex64) -> Result<Complex64>,
{
    let d = (f1 / f0).arg();
    if d.abs() <= PHASE_STEP || depth >= MAX_BISECTIONS {
        return Ok(d);
    }
    let zm = 0.5 * (z0 + z1);
    let fm = eval(zm)?;
    Ok(segment_phase(eval, z0, f0, zm, fm, depth + 1)? + segment_phase(eval, zm, fm, z1, f1, depth + 1)?)
}

/// Resonances found inside a rectangle, with the completeness certificate.
#[derive(Debug, Clone)]
pub struct ResonanceSet {
    /// Distinct roots sorted by real part.
    pub pairs: Vec<ResonancePair>,
    /// Argument-principle count on the rectangle, when it could be evaluated.
    pub expected: Option<usize>,
    /// `true` when the number of distinct roots equals `expected`.
    pub complete: bool,
    /// Newton starts that failed (diverged, left the rectangle, or hit a
    /// spurious root).
    pub failed_starts: usize,
}

impl ResonanceSet {
    pub fn omegas(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.omega).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Grid dimensions giving a few starts per expected root spacing.
pub fn default_grid(s: &PiecewiseConstantStructure, rect: &SearchRect) -> (usize, usize) {
    let spacing = PI / (s.n_max() * s.length());
    let nx = ((rect.re_max - rect.re_min) / spacing * 3.0).ceil() as usize;
    let ny = ((rect.im_max - rect.im_min) / spacing * 3.0).ceil() as usize;
    (nx.clamp(4, 4000), ny.clamp(3, 400))
}

/// Boundary samples per edge used by [`find_resonances`].
pub const BOUNDARY_SAMPLES: usize = 64;

/// Newton from a `grid_nx` by `grid_ny` lattice of starts, deduplicated and
/// checked against [`count_zeros`]. A count mismatch triggers one refinement
/// of the lattice; if the mismatch persists, `complete` is false.
///
/// Roots lie strictly inside the rectangle. When a root sits on the contour
/// itself, every edge is moved inward by the deduplication radius and the
/// search and count run on that rectangle, so the root is excluded.
pub fn find_resonances(
    s: &PiecewiseConstantStructure,
    rect: &SearchRect,
    grid_nx: usize,
    grid_ny: usize,
    tol: f64,
) -> Result<ResonanceSet> {
    if grid_nx < 2 || grid_ny < 2 {
        return Err(Error::Precondition(format!(
            "grid {grid_nx}x{grid_ny} must be at least 2x2"
        )));
    }
    let (rect, expected) = match count_zeros(s, rect, BOUNDARY_SAMPLES) {
        Err(Error::ContourHitsZero { .. }) => {
            let scale = [rect.re_min, rect.re_max, rect.im_min, rect.im_max]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let inner = rect.shrunk(1e-8 * (1.0 + scale))?;
            let expected = count_zeros(s, &inner, BOUNDARY_SAMPLES).ok();
            (inner, expected)
        }
        counted => (*rect, counted.ok()),
    };
    let rect = &rect;
    let (mut roots, mut failed) = grid_newton(s, rect, grid_nx, grid_ny, 0.5, tol);
    if expected.is_none_or(|e| e != roots.len()) {
        let (more, more_failed) = grid_newton(s, rect, 2 * grid_nx + 1, 2 * grid_ny + 1, 0.25, tol);
        roots.extend(more);
        failed += more_failed;
        roots = dedup(roots);
    }
    let complete = expected.is_some_and(|e| e == roots.len());
    let shared = Arc::new(s.clone());
    let pairs = roots
        .into_iter()
        .map(|(omega, residual)| {
            build_mode(Arc::clone(&shared), omega).map(|mode| ResonancePair {
                omega,
                mode,
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResonanceSet {
        pairs,
        expected,
        complete,
        failed_starts: failed,
    })
}

fn grid_newton(
    s: &PiecewiseConstantStructure,
    rect: &SearchRect,
    nx: usize,
    ny: usize,
    offset: f64,
    tol: f64,
) -> (Vec<(Complex64, f64)>, usize) {
    let starts: Vec<Complex64> = (0..nx)
        .flat_map(|i| {
            (0..ny).map(move |j| {
                Complex64::new(
                    rect.re_min + (i as f64 + offset) / nx as f64 * (rect.re_max - rect.re_min),
                    rect.im_min + (j as f64 + offset) / ny as f64 * (rect.im_max - rect.im_min),
                )
            })
        })
        .collect();
    let results: Vec<Option<(Complex64, f64)>> = starts
        .par_iter()
        .map(|&z| {
            newton_root(s, z, tol, DEFAULT_MAX_ITER)
                .ok()
                .filter(|(w, _)| rect.contains(*w))
        })
        .collect();
    let failed = results.iter().filter(|r| r.is_none()).count();
    (dedup(results.into_iter().flatten().collect()), failed)
}

fn dedup(mut roots: Vec<(Complex64, f64)>) -> Vec<(Complex64, f64)> {
    roots.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let mut out: Vec<(Complex64, f64)> = Vec::with_capacity(roots.len());
    for r in roots {
        let dup = out
            .iter_mut()
            .find(|o| (o.0 - r.0).norm() <= 1e-8 * (1.0 + r.0.norm()));
        match dup {
            Some(o) => {
                if r.1 < o.1 {
                    *o = r;
                }
            }
            None => out.push(r),
        }
    }
    out
}

/// Rectangle used by [`min_width`]: real parts `[-delta, rho]` so that purely
/// imaginary roots sit strictly inside.
pub fn width_rect(a: &AdmissibleSet, im_floor: f64) -> Result<SearchRect> {
    let delta = (0.05 * a.rho).min(0.05);
    SearchRect::new(-delta, a.rho, im_floor, -EPS_TOP)
}

/// Result of [`min_width`].
#[derive(Debug, Clone)]
pub struct MinWidth {
    pub gamma: f64,
    pub pair: ResonancePair,
    pub rect: SearchRect,
    pub complete: bool,
}

/// Smallest `|Im omega|` over resonances with `|Re omega| <= rho` above
/// `im_floor`. `None` means no resonance in the searched window.
pub fn min_width(
    s: &PiecewiseConstantStructure,
    a: &AdmissibleSet,
    im_floor: f64,
) -> Result<Option<MinWidth>> {
    if !(im_floor < -EPS_TOP) {
        return Err(Error::Precondition(format!("im_floor {im_floor} must be below -{EPS_TOP}")));
    }
    let rect = width_rect(a, im_floor)?;
    let (nx, ny) = default_grid(s, &rect);
    let set = find_resonances(s, &rect, nx, ny, DEFAULT_TOL)?;
    let complete = set.complete;
    let best = set
        .pairs
        .into_iter()
        .filter(|p| p.omega.re.abs() <= a.rho)
        .min_by(|x, y| x.omega.im.abs().total_cmp(&y.omega.im.abs()));
    Ok(best.map(|pair| MinWidth {
        gamma: pair.omega.im.abs(),
        pair,
        rect,
        complete,
    }))
}

/// Transmission and reflection coefficients for a wave `e^{i omega x}`
/// incident from the left, at real `omega > 0`.
pub fn transmission(s: &PiecewiseConstantStructure, omega_real: f64) -> Result<(Complex64, Complex64)> {
    if !(omega_real > 0.0) {
        return Err(Error::Precondition(format!(
            "transmission needs a positive real frequency, got {omega_real}"
        )));
    }
    let w = Complex64::new(omega_real, 0.0);
    let mut p = (Complex64::new(1.0, 0.0), I * w);
    let mut q = (Complex64::new(1.0, 0.0), -I * w);
    for cell in s.cells() {
        let t = CellTransfer::new(w, cell.n, cell.width());
        p = t.apply(p.0, p.1);
        q = t.apply(q.0, q.1);
    }
    let r = -(p.1 - I * w * p.0) / (q.1 - I * w * q.0);
    let t = (p.0 + r * q.0) * (-I * w * s.length()).exp();
    Ok((t, r))
}
