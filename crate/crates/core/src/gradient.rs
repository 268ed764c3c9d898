//! Derivatives of a resonance with respect to the cell values of the index.
//!
//! For a simple resonance the first variation is
//! `d omega = -2 alpha omega^2 int n u^2 dn`, with the normalization
//! `1/alpha = 2 omega int n^2 u^2 + i (u(0)^2 + u(L)^2)`. Per-cell entries are
//! the derivative against a uniform shift of `n` on that cell.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{newton_root, DEFAULT_MAX_ITER};
use crate::mode::Mode;
use crate::structure::PiecewiseConstantStructure;
use crate::ResonancePair;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `|1/alpha|` below this multiple of its natural scale is treated as a
/// degenerate resonance.
const ALPHA_FLOOR: f64 = 1e-10;

/// Per-cell derivatives of `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    pub d_omega: Vec<Complex64>,
    /// Cell widths, for converting to a density.
    pub widths: Vec<f64>,
}

impl GradientVector {
    pub fn d_re(&self) -> Vec<f64> {
        self.d_omega.iter().map(|z| z.re).collect()
    }

    pub fn d_im(&self) -> Vec<f64> {
        self.d_omega.iter().map(|z| z.im).collect()
    }

    /// Pointwise density of `d omega / d n`, i.e. entries divided by width.
    pub fn density(&self) -> Vec<Complex64> {
        self.d_omega
            .iter()
            .zip(&self.widths)
            .map(|(g, w)| g / w)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.d_omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d_omega.is_empty()
    }
}

/// Both expressions for `alpha`: from the boundary form and from the energy
/// form `(1/omega) int (u'^2 + omega^2 n^2 u^2)`.
pub fn compute_alpha(pair: &ResonancePair) -> Result<(Complex64, Complex64)> {
    alpha_of_mode(&pair.mode)
}

pub fn alpha_of_mode(mode: &Mode) -> Result<(Complex64, Complex64)> {
    let s = mode.structure();
    let w = mode.omega();
    let mut int_n2u2 = Complex64::new(0.0, 0.0);
    let mut int_up2 = Complex64::new(0.0, 0.0);
    for (k, c) in s.cells().iter().enumerate() {
        int_n2u2 += c.n * c.n * mode.cell_int_u2(k);
        int_up2 += mode.cell_int_up2(k);
    }
    let u0 = mode.u_left();
    let ul = mode.u_right();
    let inv1 = 2.0 * w * int_n2u2 + I * (u0 * u0 + ul * ul);
    let inv2 = (int_up2 + w * w * int_n2u2) / w;
    let scale = 2.0 * w.norm() * mode.weighted_norm_sqr() + u0.norm_sqr() + ul.norm_sqr();
    if inv1.norm() < ALPHA_FLOOR * scale {
        return Err(Error::DegenerateNormalization(inv1.norm()));
    }
    Ok((1.0 / inv1, 1.0 / inv2))
}

/// `d omega / d n_k` for every cell.
pub fn gradient_cells(pair: &ResonancePair) -> Result<GradientVector> {
    gradient_of_mode(&pair.mode)
}

pub fn gradient_of_mode(mode: &Mode) -> Result<GradientVector> {
    let (alpha, _) = alpha_of_mode(mode)?;
    let w = mode.omega();
    let factor = -2.0 * alpha * w * w;
    let cells = mode.structure().cells();
    let d_omega = cells
        .iter()
        .enumerate()
        .map(|(k, c)| factor * c.n * mode.cell_int_u2(k))
        .collect();
    Ok(GradientVector {
        d_omega,
        widths: cells.iter().map(|c| c.width()).collect(),
    })
}

/// `Im(alpha omega^2 u(x)^2)`: the switching function whose sign locates the
/// two material levels at a local optimum.
pub fn switching_function(mode: &Mode, x: f64) -> Result<f64> {
    let (alpha, _) = alpha_of_mode(mode)?;
    let (u, _) = mode.evaluate(x)?;
    let w = mode.omega();
    Ok((alpha * w * w * u * u).im)
}

/// Central difference `(omega(n_k + h) - omega(n_k - h)) / 2h`, each side
/// re-converged by Newton from `omega_root`.
pub fn finite_difference_gradient(
    s: &PiecewiseConstantStructure,
    omega_root: Complex64,
    cell_index: usize,
    h: f64,
) -> Result<Complex64> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::Precondition(format!("step {h} outside [1e-7, 1e-3]")));
    }
    if cell_index >= s.len() {
        return Err(Error::Precondition(format!(
            "cell {cell_index} out of range for {} cells",
            s.len()
        )));
    }
    let solve = |sign: f64| -> Result<Complex64> {
        let mut values = s.values();
        values[cell_index] += sign * h;
        let p = s.with_values(&values)?;
        newton_root(&p, omega_root, 1e-14, DEFAULT_MAX_ITER)
            .map(|(w, _)| w)
            .map_err(|e| Error::OracleFailure(format!("cell {cell_index}, step {}: {e}", sign * h)))
    };
    let (plus, minus) = rayon::join(|| solve(1.0), || solve(-1.0));
    let (plus, minus) = (plus?, minus?);
    // both sides must stay on the branch of the original root
    let drift = (plus - omega_root).norm().max((minus - omega_root).norm());
    if drift > 1e3 * h * (1.0 + omega_root.norm()) {
        return Err(Error::OracleFailure(format!(
            "perturbed roots moved by {drift:e}; reduce h"
        )));
    }
    Ok((plus - minus) / (2.0 * h))
}

/// Finite-difference gradient for all cells.
pub fn finite_difference_all(
    s: &PiecewiseConstantStructure,
    omega_root: Complex64,
    h: f64,
) -> Result<Vec<Complex64>> {
    (0..s.len())
        .into_par_iter()
        .map(|k| finite_difference_gradient(s, omega_root, k, h))
        .collect()
}
