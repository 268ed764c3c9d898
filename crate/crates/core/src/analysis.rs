//! Identities, width bounds and structural properties of resonances, as
//! checks that can be run on computed pairs.
//!
//! Integrals of `|u|^2`, `|u'|^2` and `n^2 |u|^2` come from the closed forms
//! in [`Mode`]; Gauss-Legendre quadrature is available as an independent
//! cross-check through [`quadrature_integrals`].

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::ResonanceSet;
use crate::mode::{Mode, ResonancePair, SearchRect};
use crate::optimizer::{IntervalClass, Transitions};
use crate::structure::PiecewiseConstantStructure;

/// Score below which a mode counts as even or odd.
pub const PARITY_TOL: f64 = 1e-6;
/// Largest `|n(x) - n(L - x)|`, relative to `max n`, for a structure to be
/// treated as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Samples per shortest effective wavelength for sampled checks.
const SAMPLES_PER_WAVELENGTH: f64 = 16.0;
/// `|Re omega|` below this multiple of `|omega|` counts as zero.
const RE_ZERO: f64 = 1e-10;
/// `|u(x)|` below this multiple of `max |u|` counts as a zero of the mode.
const MODULUS_FLOOR: f64 = 1e-10;
const MAX_PHASE_BISECTIONS: usize = 30;

/// Relative residuals of the real-part, imaginary-part and width identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub re_residual: f64,
    pub im_residual: f64,
    /// Absent when `Re omega = 0`, where the width identity does not apply.
    pub width_identity_residual: Option<f64>,
}

impl IdentityReport {
    pub fn worst(&self) -> f64 {
        self.re_residual
            .max(self.im_residual)
            .max(self.width_identity_residual.unwrap_or(0.0))
    }
}

struct Integrals {
    grad: f64,
    weighted: f64,
    boundary: f64,
}

fn integrals(mode: &Mode) -> Integrals {
    let n = mode.structure().len();
    Integrals {
        grad: (0..n).map(|k| mode.cell_int_abs_up2(k)).sum(),
        weighted: mode.weighted_norm_sqr(),
        boundary: mode.u_left().norm_sqr() + mode.u_right().norm_sqr(),
    }
}

fn re_is_zero(omega: Complex64) -> bool {
    omega.re.abs() <= RE_ZERO * omega.norm()
}

/// Residuals of
/// `Re(omega^2) int n^2|u|^2 = int |u'|^2 + Im(omega) (|u(0)|^2 + |u(L)|^2)`,
/// `Im(omega^2) int n^2|u|^2 = -Re(omega) (|u(0)|^2 + |u(L)|^2)` and
/// `|Im omega| = (|u(0)|^2 + |u(L)|^2) / (2 int n^2|u|^2)`.
pub fn variational_residuals(pair: &ResonancePair) -> IdentityReport {
    let w = pair.omega;
    let q = integrals(&pair.mode);
    let w2 = w * w;

    let lhs = w2.re * q.weighted;
    let rhs = q.grad + w.im * q.boundary;
    let scale = lhs.abs().max(q.grad).max(w.im.abs() * q.boundary);
    let re_residual = (lhs - rhs).abs() / scale;

    let lhs = w2.im * q.weighted;
    let rhs = -w.re * q.boundary;
    let scale = if re_is_zero(w) {
        w.norm_sqr() * q.weighted
    } else {
        lhs.abs().max(rhs.abs())
    };
    let im_residual = (lhs - rhs).abs() / scale;

    let width_identity_residual =
        (!re_is_zero(w)).then(|| (q.boundary / (2.0 * q.weighted) - w.im.abs()).abs() / w.im.abs());
    IdentityReport {
        re_residual,
        im_residual,
        width_identity_residual,
    }
}

/// `(|u(0)|^2 + |u(L)|^2) / (2 int n^2 |u|^2)`, which equals `|Im omega|`.
pub fn width_from_identity(pair: &ResonancePair) -> Result<f64> {
    if re_is_zero(pair.omega) {
        return Err(Error::Inapplicable(format!(
            "width identity needs Re omega != 0, got omega = {}",
            pair.omega
        )));
    }
    let q = integrals(&pair.mode);
    Ok(q.boundary / (2.0 * q.weighted))
}

/// Nodes and weights of the `order`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if order == 1 {
                p0 = 1.0;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(int |u'|^2, int n^2 |u|^2)` by an `order`-point Gauss-Legendre rule on
/// each cell.
pub fn quadrature_integrals(mode: &Mode, order: usize) -> (f64, f64) {
    let (nodes, weights) = gauss_legendre(order);
    let mut grad = 0.0;
    let mut weighted = 0.0;
    for (k, c) in mode.structure().cells().iter().enumerate() {
        let h = 0.5 * c.width();
        for (t, w) in nodes.iter().zip(&weights) {
            let (u, up) = mode.cell_value(k, h * (1.0 + t));
            grad += w * h * up.norm_sqr();
            weighted += w * h * c.n * c.n * u.norm_sqr();
        }
    }
    (grad, weighted)
}

/// The expression `f(xi)` of the a priori width bound:
/// `3 exp(-(Re^2 + xi^2) n+^2 L^2) / (n+^2 L (3 + L^2 (Re^2 + xi^2)))`.
pub fn bound_function(xi: f64, re_omega: f64, n_plus: f64, length: f64) -> f64 {
    let r2 = re_omega * re_omega + xi * xi;
    let np2 = n_plus * n_plus;
    3.0 * (-r2 * np2 * length * length).exp() / (np2 * length * (3.0 + length * length * r2))
}

/// Closed-form bound obtained with `xi = 1/(n+ L)`; requires `n+ > 1/e`.
pub fn closed_form_width_bound(re_omega: f64, n_plus: f64, length: f64) -> Result<f64> {
    if !(n_plus > (-1.0f64).exp()) {
        return Err(Error::Inapplicable(format!("closed-form bound needs n_plus > 1/e, got {n_plus}")));
    }
    let a = n_plus * n_plus * length * length * re_omega * re_omega;
    Ok(3.0 * (-a).exp() / (std::f64::consts::E * length * (1.0 + 3.0 * n_plus * n_plus + a)))
}

/// Best lower bound on `|Im omega|` over `xi > 0`: the fixed point
/// `xi0 = f(xi0)`, found by bisection.
pub fn lower_bound_width(re_omega: f64, n_plus: f64, length: f64) -> f64 {
    let f = |xi: f64| bound_function(xi, re_omega, n_plus, length);
    let (mut lo, mut hi) = (0.0, f(0.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid < f(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `int_0^x (x - y) n(y)^2 dy`, exact for piecewise-constant `n`.
fn moment(s: &PiecewiseConstantStructure, x: f64) -> f64 {
    s.cells()
        .iter()
        .take_while(|c| c.x0 < x)
        .map(|c| {
            let b = c.x1.min(x);
            c.n * c.n * 0.5 * ((x - c.x0).powi(2) - (x - b).powi(2))
        })
        .sum()
}

/// `sqrt(1 + |omega|^2 x^2) exp(|omega|^2 int_0^x (x - y) n^2 dy)`, which
/// bounds `|u(x)|` for a mode normalized to `u(0) = 1`.
pub fn pointwise_bound(x: f64, omega: Complex64, s: &PiecewiseConstantStructure) -> Result<f64> {
    let l = s.length();
    if !(0.0..=l).contains(&x) {
        return Err(Error::OutsideDomain { x, length: l });
    }
    let w2 = omega.norm_sqr();
    Ok((1.0 + w2 * x * x).sqrt() * (w2 * moment(s, x)).exp())
}

/// Largest ratio `|u(x)| / (|u(0)| bound(x))` over `samples + 1` points,
/// after reflecting so that `|u(0)| <= |u(L)|`. At most 1 when the bound holds.
pub fn pointwise_bound_ratio(mode: &Mode, samples: usize) -> Result<f64> {
    let s = mode.structure();
    let l = s.length();
    let flip = mode.u_right().norm() < mode.u_left().norm();
    let reference = if flip { s.reversed() } else { s.clone() };
    let u0 = if flip { mode.u_right() } else { mode.u_left() }.norm();
    let mut worst: f64 = 0.0;
    for i in 0..=samples {
        let x = l * i as f64 / samples as f64;
        let (u, _) = mode.evaluate(if flip { l - x } else { x })?;
        worst = worst.max(u.norm() / (u0 * pointwise_bound(x, mode.omega(), &reference)?));
    }
    Ok(worst)
}

/// Whether `omega` lies in `{|Im| > |Re|, |Im| <= 1/(n+^2 L)}`, a region
/// free of resonances for symmetric structures.
pub fn in_exclusion_triangle(omega: Complex64, n_plus: f64, length: f64) -> bool {
    let im = omega.im.abs();
    im > omega.re.abs() && im <= 1.0 / (n_plus * n_plus * length)
}

/// `Q = |Re omega| / (2 |Im omega|)`.
pub fn quality_factor(omega: Complex64) -> Result<f64> {
    if !(omega.im < 0.0) {
        return Err(Error::Precondition(format!(
            "quality factor needs Im omega < 0, got {omega}"
        )));
    }
    Ok(omega.re.abs() / (2.0 * omega.im.abs()))
}

pub fn is_symmetric(s: &PiecewiseConstantStructure) -> bool {
    s.asymmetry() <= SYMMETRY_TOL * s.n_max()
}

fn require_symmetric(s: &PiecewiseConstantStructure) -> Result<()> {
    if is_symmetric(s) {
        Ok(())
    } else {
        Err(Error::Inapplicable(format!(
            "structure is not symmetric about L/2 (asymmetry {:e})",
            s.asymmetry()
        )))
    }
}

/// Sample count giving [`SAMPLES_PER_WAVELENGTH`] points per shortest
/// effective wavelength over a span, never fewer than `min`.
fn sample_count(mode: &Mode, span: f64, min: usize) -> usize {
    let k = mode.omega().re.abs().max(mode.omega().norm()) * mode.structure().n_max();
    let wavelength = 2.0 * PI / k;
    ((SAMPLES_PER_WAVELENGTH * span / wavelength).ceil() as usize).max(min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "parity", content = "score")]
pub enum Parity {
    Even,
    Odd,
    Neither(f64),
}

/// Parity of a mode about `L/2`: `sup |u(x) -/+ u(L - x)| / sup |u|` on a
/// grid, compared with [`PARITY_TOL`].
pub fn classify_parity(mode: &Mode) -> Result<Parity> {
    let (even, odd) = parity_scores(mode)?;
    Ok(if even < PARITY_TOL {
        Parity::Even
    } else if odd < PARITY_TOL {
        Parity::Odd
    } else {
        Parity::Neither(even.min(odd))
    })
}

/// The two parity scores `(even, odd)`; the smaller one is the distance of
/// the mode from the nearest parity class.
pub fn parity_scores(mode: &Mode) -> Result<(f64, f64)> {
    let s = mode.structure();
    require_symmetric(s)?;
    let l = s.length();
    let m = sample_count(mode, l, 512);
    let (mut even, mut odd, mut sup) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..=m {
        let x = l * i as f64 / m as f64;
        let (u, _) = mode.evaluate(x)?;
        let (v, _) = mode.evaluate(l - x)?;
        even = even.max((u - v).norm());
        odd = odd.max((u + v).norm());
        sup = sup.max(u.norm());
    }
    Ok((even / sup, odd / sup))
}

/// `d/dx arg u(x) = 2 Re(omega) |Im omega| |u(x)|^-2 int_{L/2}^x n^2 |u|^2`.
pub fn phase_derivative(mode: &Mode, x: f64) -> Result<f64> {
    let s = mode.structure();
    require_symmetric(s)?;
    let l = s.length();
    let (u, _) = mode.evaluate(x)?;
    let scale = mode.u_left().norm().max(mode.u_right().norm());
    if u.norm() <= MODULUS_FLOOR * scale {
        return Err(Error::NearZero { x, modulus: u.norm() });
    }
    let half = 0.5 * l;
    let integral = if x >= half {
        mode.weighted_norm_sqr_between(half, x)
    } else {
        -mode.weighted_norm_sqr_between(x, half)
    };
    let w = mode.omega();
    Ok(2.0 * w.re * w.im.abs() * integral / u.norm_sqr())
}

/// Change of `arg u` from `x0` to `x1`, accumulated from principal-value
/// increments that are bisected until each is at most `pi/2`.
pub fn phase_change(mode: &Mode, x0: f64, x1: f64) -> Result<f64> {
    let steps = sample_count(mode, (x1 - x0).abs(), 8);
    let mut total = 0.0;
    let mut prev = (x0, mode.evaluate(x0)?.0);
    for i in 1..=steps {
        let x = x0 + (x1 - x0) * i as f64 / steps as f64;
        let u = mode.evaluate(x)?.0;
        total += phase_increment(mode, prev, (x, u), 0)?;
        prev = (x, u);
    }
    Ok(total)
}

fn phase_increment(
    mode: &Mode,
    a: (f64, Complex64),
    b: (f64, Complex64),
    depth: usize,
) -> Result<f64> {
    let d = (b.1 / a.1).arg();
    if d.abs() <= FRAC_PI_2 || depth >= MAX_PHASE_BISECTIONS {
        return Ok(d);
    }
    let xm = 0.5 * (a.0 + b.0);
    let m = (xm, mode.evaluate(xm)?.0);
    Ok(phase_increment(mode, a, m, depth + 1)? + phase_increment(mode, m, b, depth + 1)?)
}

/// Sampled `arg u` on each half of `[0, L]`, checked for monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseMonotonicity {
    /// `arg u` is nonincreasing on `[0, L/2)` (for `Re omega > 0`).
    pub left_monotone: bool,
    /// `arg u` is nondecreasing on `(L/2, L]` (for `Re omega > 0`).
    pub right_monotone: bool,
    /// Largest sampled step against the expected direction, in radians.
    pub worst_reversal: f64,
    pub samples: usize,
}

impl PhaseMonotonicity {
    pub fn holds(&self) -> bool {
        self.left_monotone && self.right_monotone
    }
}

/// Unwraps `arg u` along a grid on each half-interval and checks that it
/// moves monotonically away from `L/2`, in the direction of `sign(Re omega)`.
pub fn phase_monotonicity(mode: &Mode) -> Result<PhaseMonotonicity> {
    const SLACK: f64 = 1e-9;
    let s = mode.structure();
    require_symmetric(s)?;
    let half = 0.5 * s.length();
    let m = sample_count(mode, half, 256);
    let dir = mode.omega().re.signum();
    let mut reversal = [0.0f64; 2];
    for (side, reversal) in reversal.iter_mut().enumerate() {
        // walk away from the centre, stopping one sample short of it
        let point = |i: usize| {
            let t = half * i as f64 / m as f64;
            if side == 0 { half - t } else { half + t }
        };
        let mut prev = (point(1), mode.evaluate(point(1))?.0);
        for i in 2..=m {
            let x = point(i);
            let next = (x, mode.evaluate(x)?.0);
            let d = phase_increment(mode, prev, next, 0)?;
            *reversal = reversal.max(-dir * d);
            prev = next;
        }
    }
    Ok(PhaseMonotonicity {
        left_monotone: reversal[0] <= SLACK,
        right_monotone: reversal[1] <= SLACK,
        worst_reversal: reversal[0].max(reversal[1]).max(0.0),
        samples: 2 * m,
    })
}

/// Both sides of the interior-interval length bound
/// `x_{j+1} - x_j >= (min_{I_j} |u|^2 / |u(0)|^2) pi / (2 |Re omega|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalBound {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl IntervalBound {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

/// The length bound for interval `j` of `transitions`, which must be
/// classified interior.
pub fn interior_interval_bound(
    pair: &ResonancePair,
    transitions: &Transitions,
    j: usize,
) -> Result<IntervalBound> {
    let iv = transitions.intervals.get(j).ok_or_else(|| {
        Error::Inapplicable(format!(
            "interval {j} does not exist ({} intervals)",
            transitions.intervals.len()
        ))
    })?;
    if iv.class != IntervalClass::Interior {
        return Err(Error::Inapplicable(format!("interval {j} is {:?}, not interior", iv.class)));
    }
    if re_is_zero(pair.omega) {
        return Err(Error::Inapplicable("interval bound needs Re omega != 0".into()));
    }
    let mode = &pair.mode;
    let m = sample_count(mode, iv.width(), 256);
    let mut min_u2 = f64::INFINITY;
    for i in 0..=m {
        let x = iv.x_lo + iv.width() * i as f64 / m as f64;
        min_u2 = min_u2.min(mode.evaluate(x)?.0.norm_sqr());
    }
    let rhs = min_u2 / mode.u_left().norm_sqr() * PI / (2.0 * pair.omega.re.abs());
    Ok(IntervalBound {
        index: j,
        lhs: iv.width(),
        rhs,
    })
}

/// The bound for every interior interval; empty when there are none.
pub fn interval_bounds(pair: &ResonancePair, transitions: &Transitions) -> Result<Vec<IntervalBound>> {
    transitions
        .intervals
        .iter()
        .enumerate()
        .filter(|(_, iv)| iv.class == IntervalClass::Interior)
        .map(|(j, _)| interior_interval_bound(pair, transitions, j))
        .collect()
}

/// Checks of one resonance of a structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceCheck {
    pub omega: Complex64,
    pub residual: f64,
    pub identities: IdentityReport,
    pub lower_bound: f64,
    pub bound_holds: bool,
    pub pointwise_ratio: f64,
    pub quality_factor: f64,
    /// Only evaluated for symmetric structures.
    pub in_exclusion_triangle: Option<bool>,
    pub parity: Option<Parity>,
    pub phase: Option<PhaseMonotonicity>,
}

/// Identity tolerance used by [`verify_structure`].
pub const IDENTITY_TOL: f64 = 1e-8;

/// Verification report for all resonances of a structure in a rectangle.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub length: f64,
    pub cells: usize,
    pub n_min: f64,
    pub n_max: f64,
    pub symmetric: bool,
    pub rect: SearchRect,
    pub expected: Option<usize>,
    pub complete: bool,
    pub resonances: Vec<ResonanceCheck>,
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn check_resonance(pair: &ResonancePair) -> Result<ResonanceCheck> {
    let s = pair.mode.structure();
    let symmetric = is_symmetric(s);
    let lower_bound = lower_bound_width(pair.omega.re, s.n_max(), s.length());
    Ok(ResonanceCheck {
        omega: pair.omega,
        residual: pair.residual,
        identities: variational_residuals(pair),
        lower_bound,
        bound_holds: pair.omega.im.abs() >= lower_bound,
        pointwise_ratio: pointwise_bound_ratio(&pair.mode, sample_count(&pair.mode, s.length(), 1000))?,
        quality_factor: quality_factor(pair.omega)?,
        in_exclusion_triangle: symmetric
            .then(|| in_exclusion_triangle(pair.omega, s.n_max(), s.length())),
        parity: if symmetric { Some(classify_parity(&pair.mode)?) } else { None },
        phase: if symmetric && !re_is_zero(pair.omega) {
            Some(phase_monotonicity(&pair.mode)?)
        } else {
            None
        },
    })
}

/// Hard assertions of one [`ResonanceCheck`] that fail, as messages.
pub fn resonance_failures(c: &ResonanceCheck) -> Vec<String> {
    let w = c.omega;
    let mut failures = Vec::new();
    if c.identities.worst() >= IDENTITY_TOL {
        failures.push(format!("identity residual {:e} at {w}", c.identities.worst()));
    }
    if !c.bound_holds {
        failures.push(format!("width below a priori bound {} at {w}", c.lower_bound));
    }
    if c.pointwise_ratio > 1.0 + 1e-9 {
        failures.push(format!("pointwise bound exceeded by ratio {} at {w}", c.pointwise_ratio));
    }
    if c.in_exclusion_triangle == Some(true) {
        failures.push(format!("resonance {w} inside the exclusion triangle"));
    }
    if let Some(Parity::Neither(score)) = c.parity {
        failures.push(format!("mode at {w} neither even nor odd (score {score:e})"));
    }
    if c.phase.is_some_and(|p| !p.holds()) {
        failures.push(format!("phase of mode at {w} not monotone on each half"));
    }
    failures
}

/// Runs [`check_resonance`] on every pair of `set` and collects failures of
/// the hard assertions.
pub fn verify_structure(
    s: &PiecewiseConstantStructure,
    rect: &SearchRect,
    set: &ResonanceSet,
) -> Result<VerificationReport> {
    let mut failures = Vec::new();
    let mut resonances = Vec::with_capacity(set.len());
    for pair in &set.pairs {
        let c = check_resonance(pair)?;
        failures.extend(resonance_failures(&c));
        resonances.push(c);
    }
    if !set.complete {
        failures.push(format!(
            "found {} resonances, argument principle counts {:?}",
            set.len(),
            set.expected
        ));
    }
    Ok(VerificationReport {
        schema: 1,
        length: s.length(),
        cells: s.len(),
        n_min: s.n_min(),
        n_max: s.n_max(),
        symmetric: is_symmetric(s),
        rect: *rect,
        expected: set.expected,
        complete: set.complete,
        resonances,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 22 is within reach of a 12-point rule
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((integral - 2.0 / 23.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(1);
        assert_eq!((x[0], w[0]), (0.0, 2.0));
    }

    #[test]
    fn fixed_point_dominates_closed_form() {
        for re in [0.0, 0.5, 2.0, 5.0] {
            let xi0 = lower_bound_width(re, 2.0, 1.0);
            let f = bound_function(xi0, re, 2.0, 1.0);
            assert!((xi0 - f).abs() <= 1e-14 * f.max(1e-300));
            assert!(xi0 >= closed_form_width_bound(re, 2.0, 1.0).unwrap());
        }
    }

    #[test]
    fn moment_of_uniform_index() {
        let s = PiecewiseConstantStructure::from_values(1.0, &[1.5, 1.5, 1.5]).unwrap();
        let x: f64 = 0.7;
        assert!((moment(&s, x) - 1.5 * 1.5 * x * x / 2.0).abs() < 1e-15);
        assert_eq!(moment(&s, 0.0), 0.0);
    }

    #[test]
    fn exclusion_triangle_and_quality_factor() {
        assert!(in_exclusion_triangle(Complex64::new(0.1, -0.2), 2.0, 1.0));
        assert!(!in_exclusion_triangle(Complex64::new(1.0, -0.2), 2.0, 1.0));
        assert!(!in_exclusion_triangle(Complex64::new(0.1, -0.3), 2.0, 1.0));
        assert_eq!(quality_factor(Complex64::new(1.0, -0.5)).unwrap(), 1.0);
        assert!(quality_factor(Complex64::new(1.0, 0.0)).is_err());
    }
}
