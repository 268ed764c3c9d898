//! Outgoing modes stored cell by cell in the exponential basis, with the
//! closed-form integrals the identities and gradients are built from.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::PiecewiseConstantStructure;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Rectangle in the lower half of the complex frequency plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchRect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let all_finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Rect("non-finite bound".into()));
        }
        if re_min >= re_max {
            return Err(Error::Rect(format!("re_min {re_min} >= re_max {re_max}")));
        }
        if im_min >= im_max {
            return Err(Error::Rect(format!("im_min {im_min} >= im_max {im_max}")));
        }
        if im_max > 0.0 {
            return Err(Error::Rect(format!("im_max {im_max} lies in the upper half plane")));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.re_min && z.re < self.re_max && z.im > self.im_min && z.im < self.im_max
    }

    /// The rectangle with every edge moved inward by `margin`.
    pub fn shrunk(&self, margin: f64) -> Result<Self> {
        Self::new(
            self.re_min + margin,
            self.re_max - margin,
            self.im_min + margin,
            self.im_max - margin,
        )
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }
}

/// `u(x) = A_k exp(i k t) + B_k exp(-i k t)` on cell `k`, with `k = omega n_k`
/// and `t = x - x_lo`.
#[derive(Debug, Clone)]
pub struct Mode {
    structure: Arc<PiecewiseConstantStructure>,
    omega: Complex64,
    coeffs: Vec<(Complex64, Complex64)>,
}

impl Mode {
    /// Build from the values `(u, u')` at the left end of every cell.
    pub(crate) fn from_cell_states(
        structure: Arc<PiecewiseConstantStructure>,
        omega: Complex64,
        states: &[(Complex64, Complex64)],
    ) -> Self {
        let coeffs = structure
            .cells()
            .iter()
            .zip(states)
            .map(|(c, &(u, up))| {
                let ik = I * omega * c.n;
                let v = up / ik;
                (0.5 * (u + v), 0.5 * (u - v))
            })
            .collect();
        Self {
            structure,
            omega,
            coeffs,
        }
    }

    pub fn structure(&self) -> &PiecewiseConstantStructure {
        &self.structure
    }

    pub fn shared_structure(&self) -> Arc<PiecewiseConstantStructure> {
        Arc::clone(&self.structure)
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    pub fn coeffs(&self) -> &[(Complex64, Complex64)] {
        &self.coeffs
    }

    /// The same mode multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            structure: Arc::clone(&self.structure),
            omega: self.omega,
            coeffs: self.coeffs.iter().map(|&(a, b)| (c * a, c * b)).collect(),
        }
    }

    fn wavenumber(&self, k: usize) -> Complex64 {
        self.omega * self.structure.cells()[k].n
    }

    /// `(u, u')` at local coordinate `t` of cell `k`.
    pub fn cell_value(&self, k: usize, t: f64) -> (Complex64, Complex64) {
        let (a, b) = self.coeffs[k];
        let kk = self.wavenumber(k);
        let ep = (I * kk * t).exp();
        let em = (-I * kk * t).exp();
        (a * ep + b * em, I * kk * (a * ep - b * em))
    }

    /// `(u(x), u'(x))` for `x` in `[0, L]`.
    pub fn evaluate(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let s = &self.structure;
        let k = s.cell_index(x).ok_or(Error::OutsideDomain {
            x,
            length: s.length(),
        })?;
        Ok(self.cell_value(k, x - s.cells()[k].x0))
    }

    /// Like [`Mode::evaluate`], but continues `u` outside `[0, L]` by its
    /// outgoing tails when `exterior` is set. The tails grow exponentially
    /// away from the structure because `Im omega < 0`.
    pub fn evaluate_extended(&self, x: f64, exterior: bool) -> Result<(Complex64, Complex64)> {
        let l = self.structure.length();
        if (0.0..=l).contains(&x) || !exterior {
            return self.evaluate(x);
        }
        let w = self.omega;
        if x < 0.0 {
            let u0 = self.u_left();
            let u = u0 * (-I * w * x).exp();
            Ok((u, -I * w * u))
        } else {
            let ul = self.u_right();
            let u = ul * (I * w * (x - l)).exp();
            Ok((u, I * w * u))
        }
    }

    pub fn u_left(&self) -> Complex64 {
        let (a, b) = self.coeffs[0];
        a + b
    }

    pub fn u_right(&self) -> Complex64 {
        let last = self.coeffs.len() - 1;
        self.cell_value(last, self.structure.cells()[last].width()).0
    }

    /// `int u^2` over cell `k`.
    pub fn cell_int_u2(&self, k: usize) -> Complex64 {
        let (a, b) = self.coeffs[k];
        let kk = self.wavenumber(k);
        let w = self.structure.cells()[k].width();
        a * a * phi(2.0 * I * kk, 0.0, w) + 2.0 * a * b * w + b * b * phi(-2.0 * I * kk, 0.0, w)
    }

    /// `int u'^2` over cell `k`.
    pub fn cell_int_up2(&self, k: usize) -> Complex64 {
        let (a, b) = self.coeffs[k];
        let kk = self.wavenumber(k);
        let w = self.structure.cells()[k].width();
        -kk * kk
            * (a * a * phi(2.0 * I * kk, 0.0, w) - 2.0 * a * b * w
                + b * b * phi(-2.0 * I * kk, 0.0, w))
    }

    /// `int |u|^2` over local coordinates `[t0, t1]` of cell `k`.
    pub fn cell_int_abs_u2_between(&self, k: usize, t0: f64, t1: f64) -> f64 {
        let (a, b) = self.coeffs[k];
        let kk = self.wavenumber(k);
        let g = Complex64::new(-2.0 * kk.im, 0.0);
        let cross = a * b.conj() * phi(Complex64::new(0.0, 2.0 * kk.re), t0, t1);
        a.norm_sqr() * phi(g, t0, t1).re + b.norm_sqr() * phi(-g, t0, t1).re + 2.0 * cross.re
    }

    pub fn cell_int_abs_u2(&self, k: usize) -> f64 {
        self.cell_int_abs_u2_between(k, 0.0, self.structure.cells()[k].width())
    }

    /// `int |u'|^2` over cell `k`.
    pub fn cell_int_abs_up2(&self, k: usize) -> f64 {
        let (a, b) = self.coeffs[k];
        let kk = self.wavenumber(k);
        let w = self.structure.cells()[k].width();
        let g = Complex64::new(-2.0 * kk.im, 0.0);
        let cross = a * b.conj() * phi(Complex64::new(0.0, 2.0 * kk.re), 0.0, w);
        kk.norm_sqr() * (a.norm_sqr() * phi(g, 0.0, w).re + b.norm_sqr() * phi(-g, 0.0, w).re - 2.0 * cross.re)
    }

    /// `int_0^L n^2 |u|^2`.
    pub fn weighted_norm_sqr(&self) -> f64 {
        self.structure
            .cells()
            .iter()
            .enumerate()
            .map(|(k, c)| c.n * c.n * self.cell_int_abs_u2(k))
            .sum()
    }

    /// `int_a^b n^2 |u|^2` for `0 <= a <= b <= L`, exact per cell.
    pub fn weighted_norm_sqr_between(&self, a: f64, b: f64) -> f64 {
        let s = &self.structure;
        s.cells()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.x1 > a && c.x0 < b)
            .map(|(k, c)| {
                let t0 = a.max(c.x0) - c.x0;
                let t1 = b.min(c.x1) - c.x0;
                c.n * c.n * self.cell_int_abs_u2_between(k, t0, t1)
            })
            .sum()
    }

    /// Largest mismatch of `(u, u')` across interior breakpoints, relative to
    /// the largest cell-entry magnitude.
    pub fn continuity_residual(&self) -> f64 {
        let cells = self.structure.cells();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in 0..cells.len() {
            let (u, up) = self.cell_value(k, 0.0);
            scale = scale.max(u.norm()).max(up.norm() / self.omega.norm().max(1.0));
            if k + 1 < cells.len() {
                let (ul, upl) = self.cell_value(k, cells[k].width());
                let (ur, upr) = self.cell_value(k + 1, 0.0);
                let d = (ul - ur).norm().max((upl - upr).norm() / self.omega.norm().max(1.0));
                worst = worst.max(d);
            }
        }
        worst / scale
    }
}

/// `int_{t0}^{t1} exp(c t) dt`, accurate for small `|c (t1 - t0)|`.
pub(crate) fn phi(c: Complex64, t0: f64, t1: f64) -> Complex64 {
    let h = t1 - t0;
    let z = c * h;
    let core = if z.norm() < 0.5 {
        // (e^z - 1)/z as a power series
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for j in 2..30 {
            term *= z / j as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum * h
    } else {
        (z.exp() - 1.0) / c
    };
    if t0 == 0.0 {
        core
    } else {
        (c * t0).exp() * core
    }
}

/// A resonance together with its outgoing mode, normalized so `u(0) = 1`.
#[derive(Debug, Clone)]
pub struct ResonancePair {
    pub omega: Complex64,
    pub mode: Mode,
    pub residual: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_matches_direct_formula_and_series_branch() {
        for &c in &[
            Complex64::new(0.3, -0.2),
            Complex64::new(1e-9, 2e-9),
            Complex64::new(-4.0, 7.0),
        ] {
            let direct = ((c * 1.3).exp() - (c * 0.4).exp()) / c;
            let got = phi(c, 0.4, 1.3);
            assert!((got - direct).norm() <= 1e-7 * direct.norm(), "{c}");
        }
        let tiny = phi(Complex64::new(1e-12, 0.0), 0.0, 2.0);
        assert!((tiny.re - 2.0).abs() < 1e-11);
    }

    #[test]
    fn rect_validation() {
        assert!(SearchRect::new(0.0, 1.0, -1.0, 0.5).is_err());
        assert!(SearchRect::new(1.0, 0.0, -1.0, -0.1).is_err());
        assert!(SearchRect::new(0.0, 1.0, -0.1, -0.2).is_err());
        let r = SearchRect::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert!(r.contains(Complex64::new(0.5, -0.5)));
        assert!(!r.contains(Complex64::new(0.5, 0.0)));
    }

    #[test]
    fn integrals_match_midpoint_quadrature() {
        let s = Arc::new(PiecewiseConstantStructure::from_values(1.0, &[1.4, 2.0]).unwrap());
        let omega = Complex64::new(3.1, -0.7);
        let states = vec![
            (Complex64::new(1.0, 0.0), Complex64::new(0.2, -1.0)),
            (Complex64::new(-0.4, 0.3), Complex64::new(1.5, 0.1)),
        ];
        let m = Mode::from_cell_states(s.clone(), omega, &states);
        let n = 20_000;
        for k in 0..2 {
            let w = s.cells()[k].width();
            let h = w / n as f64;
            let (mut u2, mut up2, mut au2, mut aup2) = (
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                0.0,
                0.0,
            );
            for i in 0..n {
                let (u, up) = m.cell_value(k, (i as f64 + 0.5) * h);
                u2 += u * u * h;
                up2 += up * up * h;
                au2 += u.norm_sqr() * h;
                aup2 += up.norm_sqr() * h;
            }
            assert!((m.cell_int_u2(k) - u2).norm() < 1e-6 * u2.norm().max(1.0));
            assert!((m.cell_int_up2(k) - up2).norm() < 1e-6 * up2.norm().max(1.0));
            assert!((m.cell_int_abs_u2(k) - au2).abs() < 1e-6 * au2);
            assert!((m.cell_int_abs_up2(k) - aup2).abs() < 1e-6 * aup2);
        }
        assert!((m.cell_value(0, 0.0).0 - states[0].0).norm() < 1e-14);
        assert!((m.cell_value(0, 0.0).1 - states[0].1).norm() < 1e-14);
    }
}
