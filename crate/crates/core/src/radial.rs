//! Homogeneous cavities `n = n0` on `|x| < a` in one, two and three
//! dimensions. In 2D and 3D each angular momentum `ell` gives a scalar
//! resonance condition built from Bessel and Hankel functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mode::SearchRect;
use crate::specfun::{cyl_bessel_j, cyl_hankel1, sph_bessel_j, sph_hankel1, BesselResult, MAX_ORDER};

const I: Complex64 = Complex64::new(0.0, 1.0);
const NEWTON_MAX_ITER: usize = 80;
/// Relative size of the determinant, compared with its two products, below
/// which a Newton limit counts as a root.
const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialCavity {
    pub dim: u8,
    pub n0: f64,
    pub a: f64,
    pub ell: u32,
}

impl RadialCavity {
    pub fn new(dim: u8, n0: f64, a: f64, ell: u32) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Precondition(format!("dimension {dim} not in 1..=3")));
        }
        if !(n0 > 1.0 && n0.is_finite()) {
            return Err(Error::Precondition(format!("n0 = {n0} must exceed 1")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Precondition(format!("radius a = {a} must be positive")));
        }
        if dim == 1 && ell != 0 {
            return Err(Error::Precondition("angular momentum must be 0 in one dimension".into()));
        }
        if ell > MAX_ORDER {
            return Err(Error::Precondition(format!("angular momentum {ell} above {MAX_ORDER}")));
        }
        Ok(Self { dim, n0, a, ell })
    }

    /// Degeneracy of each resonance: `2 ell + 1` spherical harmonics in 3D,
    /// the pair `e^{+/- i ell theta}` in 2D.
    pub fn multiplicity(&self) -> usize {
        match self.dim {
            3 => 2 * self.ell as usize + 1,
            2 if self.ell > 0 => 2,
            _ => 1,
        }
    }

    /// Common width `ln((n0 + 1) / (n0 - 1)) / (2 n0 a)` of the 1D resonances.
    pub fn slab_width(&self) -> f64 {
        ((self.n0 + 1.0) / (self.n0 - 1.0)).ln() / (2.0 * self.n0 * self.a)
    }
}

/// Resonances `pi m / (2 n0 a) - i ln((n0 + 1) / (n0 - 1)) / (2 n0 a)` of the
/// slab of half-width `a`.
pub fn slab_resonances(n0: f64, a: f64, ms: &[u32]) -> Result<Vec<Complex64>> {
    if n0 == 1.0 {
        return Err(Error::Inapplicable("a slab with n0 = 1 has no resonances".into()));
    }
    let c = RadialCavity::new(1, n0, a, 0)?;
    let width = c.slab_width();
    Ok(ms
        .iter()
        .map(|&m| Complex64::new(PI * m as f64 / (2.0 * n0 * a), -width))
        .collect())
}

/// Interior and exterior radial functions with their first and second
/// derivatives at `n0 omega a` and `omega a`.
struct Radial {
    inner: [Complex64; 3],
    outer: [Complex64; 3],
}

fn second(dim: u8, ell: u32, z: Complex64, f: BesselResult) -> [Complex64; 3] {
    let l = ell as f64;
    let (damp, centrifugal) = if dim == 2 { (1.0, l * l) } else { (2.0, l * (l + 1.0)) };
    let f2 = -damp * f.derivative / z - (1.0 - centrifugal / (z * z)) * f.value;
    [f.value, f.derivative, f2]
}

fn radial_functions(c: &RadialCavity, omega: Complex64) -> Result<Radial> {
    let zi = c.n0 * omega * c.a;
    let zo = omega * c.a;
    let (fi, fo) = match c.dim {
        2 => (cyl_bessel_j(c.ell, zi)?, cyl_hankel1(c.ell, zo)?),
        3 => (sph_bessel_j(c.ell, zi)?, sph_hankel1(c.ell, zo)?),
        _ => unreachable!("called for dimensions 2 and 3"),
    };
    Ok(Radial {
        inner: second(c.dim, c.ell, zi, fi),
        outer: second(c.dim, c.ell, zo, fo),
    })
}

/// The resonance condition and its `omega`-derivative, with the scale
/// `|J H'| + n0 |H J'|` it is measured against.
fn determinant_parts(c: &RadialCavity, omega: Complex64) -> Result<(Complex64, Complex64, f64)> {
    if c.dim == 1 {
        // (n0 + 1)^2 - (n0 - 1)^2 exp(4 i n0 omega a)
        let e = (4.0 * I * c.n0 * omega * c.a).exp();
        let p = (c.n0 + 1.0).powi(2);
        let m = (c.n0 - 1.0).powi(2);
        let d = p - m * e;
        let dd = -m * e * 4.0 * I * c.n0 * c.a;
        return Ok((d, dd, p + (m * e).norm()));
    }
    let r = radial_functions(c, omega)?;
    let [j, jp, jpp] = r.inner;
    let [h, hp, hpp] = r.outer;
    let d = j * hp - c.n0 * h * jp;
    let dd = c.a * (j * hpp - c.n0 * c.n0 * h * jpp);
    Ok((d, dd, (j * hp).norm() + c.n0 * (h * jp).norm()))
}

/// `J_ell(n0 omega a) H'_ell(omega a) - n0 H_ell(omega a) J'_ell(n0 omega a)`
/// with cylindrical functions in 2D and spherical ones in 3D. In 1D it is
/// `(n0 + 1)^2 - (n0 - 1)^2 exp(4 i n0 omega a)`.
pub fn radial_determinant(c: &RadialCavity, omega: Complex64) -> Result<Complex64> {
    determinant_parts(c, omega).map(|(d, _, _)| d)
}

/// The determinant and its derivative in `omega`, the second derivatives of
/// the radial functions coming from their differential equations.
pub fn radial_determinant_with_derivative(
    c: &RadialCavity,
    omega: Complex64,
) -> Result<(Complex64, Complex64)> {
    determinant_parts(c, omega).map(|(d, dd, _)| (d, dd))
}

/// High-frequency approximation of the `j`-th resonance:
/// `pi (j + 1/4 + ell/2) / (n0 a)` in 2D and `pi (j + 1/2 + ell/2) / (n0 a)`
/// in 3D, with the slab width as imaginary part.
pub fn asymptotic_resonance(c: &RadialCavity, j: u32) -> Result<Complex64> {
    let shift = match c.dim {
        2 => 0.25,
        3 => 0.5,
        _ => return Err(Error::Precondition("asymptotics are defined in 2D and 3D".into())),
    };
    let re = PI / (c.n0 * c.a) * (j as f64 + shift + 0.5 * c.ell as f64);
    Ok(Complex64::new(re, -c.slab_width()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialResonance {
    pub omega: Complex64,
    /// `|det|` relative to the size of its two products.
    pub residual: f64,
    pub multiplicity: usize,
}

/// Newton's method on the determinant from `omega0`.
pub fn radial_newton(c: &RadialCavity, omega0: Complex64) -> Result<RadialResonance> {
    let max_step = 0.5 * PI / (c.n0 * c.a);
    let mut omega = omega0;
    let mut residual = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let (d, dd, scale) = determinant_parts(c, omega)?;
        residual = d.norm() / scale;
        if !residual.is_finite() || dd.norm() == 0.0 {
            break;
        }
        let mut step = d / dd;
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        omega -= step;
        if step.norm() <= 1e-14 * (1.0 + omega.norm()) {
            let (d, _, scale) = determinant_parts(c, omega)?;
            residual = d.norm() / scale;
            if residual > ROOT_TOL {
                break;
            }
            if omega.im >= 0.0 {
                return Err(Error::SpuriousRoot { omega });
            }
            return Ok(RadialResonance {
                omega,
                residual,
                multiplicity: c.multiplicity(),
            });
        }
    }
    Err(Error::Divergence {
        last: omega,
        residual,
        iterations: NEWTON_MAX_ITER,
    })
}

/// Resonances inside `rect`, sorted by real part, from Newton started at the
/// asymptotic values and on a `grid_nx` by `grid_ny` lattice of the
/// rectangle. Starts that leave the domain of the special functions or
/// diverge are dropped.
pub fn find_radial_resonances(
    c: &RadialCavity,
    rect: &SearchRect,
    grid_nx: usize,
    grid_ny: usize,
) -> Result<Vec<RadialResonance>> {
    if grid_nx < 1 || grid_ny < 1 {
        return Err(Error::Precondition("empty start grid".into()));
    }
    let mut starts = Vec::new();
    if c.dim > 1 {
        for j in 0u32.. {
            let z = asymptotic_resonance(c, j)?;
            if z.re > rect.re_max {
                break;
            }
            if z.re >= rect.re_min {
                starts.push(Complex64::new(z.re, z.im.clamp(rect.im_min, rect.im_max)));
            }
        }
    }
    for i in 0..grid_nx {
        for k in 0..grid_ny {
            starts.push(Complex64::new(
                rect.re_min + (i as f64 + 0.5) / grid_nx as f64 * (rect.re_max - rect.re_min),
                rect.im_min + (k as f64 + 0.5) / grid_ny as f64 * (rect.im_max - rect.im_min),
            ));
        }
    }
    let mut found: Vec<RadialResonance> = starts
        .par_iter()
        .filter_map(|&z| radial_newton(c, z).ok())
        .filter(|r| rect.contains(r.omega))
        .collect();
    found.sort_by(|a, b| a.omega.re.total_cmp(&b.omega.re).then(a.omega.im.total_cmp(&b.omega.im)));
    let mut out: Vec<RadialResonance> = Vec::with_capacity(found.len());
    for r in found {
        match out
            .iter_mut()
            .find(|o| (o.omega - r.omega).norm() <= 1e-8 * (1.0 + r.omega.norm()))
        {
            Some(o) if r.residual < o.residual => *o = r,
            Some(_) => {}
            None => out.push(r),
        }
    }
    Ok(out)
}

/// Root reached by Newton from the `j`-th asymptotic value.
pub fn asymptotic_branch(c: &RadialCavity, j: u32) -> Result<RadialResonance> {
    radial_newton(c, asymptotic_resonance(c, j)?)
}
