use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_order, BesselResult, RESCALE_ABOVE};
use crate::error::{Error, Result};

const MAX_ABS: f64 = 60.0;
const SINGULAR_FLOOR: f64 = 0.05;
/// Bound on `|Im z|` for `Y` and `H`: upward recurrence in the order
/// amplifies rounding by up to `e^{2 |Im z|}`.
const MAX_ABS_IM: f64 = 5.0;
/// Below this modulus the ascending series are summed directly; above it
/// the series cancel too strongly and backward recurrence takes over.
const SERIES_RADIUS: f64 = 8.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const I: Complex64 = Complex64::new(0.0, 1.0);

fn domain(function: &'static str, z: Complex64, reason: &'static str) -> Error {
    Error::UnsupportedDomain { function, z, reason }
}

/// `J_n(z)` from the ascending series, stopped once the terms have started
/// to shrink and no longer change the sum.
fn series_j(n: u32, z: Complex64) -> Complex64 {
    let h = z / 2.0;
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        term *= h / k as f64;
    }
    let q = -h * h;
    let mut sum = term;
    for k in 1u32.. {
        let d = (k * (k + n)) as f64;
        term *= q / d;
        sum += term;
        if d > q.norm() && term.norm() <= f64::EPSILON * sum.norm() {
            break;
        }
    }
    sum
}

/// `Y_n(z)` for `n` in `{0, 1}` from the ascending series with the
/// logarithmic term and digamma coefficients.
fn series_y(n: u32, z: Complex64, jn: Complex64) -> Complex64 {
    debug_assert!(n <= 1);
    let h = z / 2.0;
    let q = -h * h;
    let mut term = if n == 0 { Complex64::new(1.0, 0.0) } else { h };
    let mut psi_a = -EULER_GAMMA;
    let mut psi_b = -EULER_GAMMA + if n == 0 { 0.0 } else { 1.0 };
    let mut sum = term * (psi_a + psi_b);
    for k in 1u32.. {
        let d = (k * (k + n)) as f64;
        term *= q / d;
        psi_a += 1.0 / k as f64;
        psi_b += 1.0 / (k + n) as f64;
        let t = term * (psi_a + psi_b);
        sum += t;
        if d > q.norm() && t.norm() <= f64::EPSILON * sum.norm() {
            break;
        }
    }
    let finite = if n == 0 { Complex64::new(0.0, 0.0) } else { -1.0 / (PI * h) };
    finite + 2.0 / PI * h.ln() * jn - sum / PI
}

/// `J_0 .. J_top` by backward recurrence, normalized with the generating
/// function `e^{isz} = J_0 + 2 sum (is)^k J_k` where `s = ±1` is chosen so
/// that the left side carries the full growth `e^{|Im z|}`.
fn miller(z: Complex64, nmax: usize) -> Vec<Complex64> {
    let r = z.norm();
    let top = ((nmax as f64).max(r) + 40.0 + 0.5 * r).ceil() as usize;
    let mut f = vec![Complex64::new(0.0, 0.0); top + 2];
    f[top] = Complex64::new(1.0, 0.0);
    let inv = 2.0 / z;
    for k in (1..=top).rev() {
        f[k - 1] = inv * k as f64 * f[k] - f[k + 1];
        if f[k - 1].norm() > RESCALE_ABOVE {
            for v in &mut f[k - 1..] {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let m = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for v in &mut f {
        *v /= m;
    }
    let s = if z.im <= 0.0 { I } else { -I };
    let mut sum = f[0];
    let mut power = Complex64::new(1.0, 0.0);
    for v in &f[1..=top] {
        power *= s;
        sum += 2.0 * power * v;
    }
    let scale = (s * z).exp() / sum;
    f.truncate(top + 1);
    for v in &mut f {
        *v *= scale;
    }
    f
}

/// `J_0 .. J_nmax` (at least) by the method suited to `|z|`.
fn j_orders(z: Complex64, nmax: usize) -> Vec<Complex64> {
    if z.norm() <= SERIES_RADIUS {
        (0..=nmax as u32).map(|n| series_j(n, z)).collect()
    } else {
        miller(z, nmax)
    }
}

/// `Y_0 .. Y_nmax` by upward recurrence from `Y_0, Y_1`.
fn y_orders(z: Complex64, j: &[Complex64], nmax: usize) -> Vec<Complex64> {
    let (y0, y1) = if z.norm() <= SERIES_RADIUS {
        (series_y(0, z, j[0]), series_y(1, z, j[1]))
    } else {
        neumann_y01(z, j)
    };
    let mut y = Vec::with_capacity(nmax + 1);
    y.push(y0);
    y.push(y1);
    for k in 1..nmax {
        let next = 2.0 * k as f64 / z * y[k] - y[k - 1];
        y.push(next);
    }
    y.truncate(nmax + 1);
    y
}

/// Neumann expansions of `Y_0` and `Y_1` in the `J_k`.
fn neumann_y01(z: Complex64, j: &[Complex64]) -> (Complex64, Complex64) {
    let log = (z / 2.0).ln();
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut sign = -1.0;
    for k in 1..j.len() {
        if 2 * k < j.len() {
            s0 += sign * j[2 * k] / k as f64;
        }
        if 2 * k + 1 < j.len() {
            s1 += sign * (2 * k + 1) as f64 * j[2 * k + 1] / (k * (k + 1)) as f64;
        }
        sign = -sign;
    }
    let y0 = 2.0 / PI * ((log + EULER_GAMMA) * j[0] - 2.0 * s0);
    let y1 = -2.0 / (PI * z) * j[0] + 2.0 / PI * (log + EULER_GAMMA - 1.0) * j[1] - 2.0 / PI * s1;
    (y0, y1)
}

/// `J_ell(z)` and `J'_ell(z)` for `ell <= 30`, `|z| <= 60`.
pub fn cyl_bessel_j(ell: u32, z: Complex64) -> Result<BesselResult> {
    check_order("cyl_bessel_j", ell, z)?;
    if z.norm() > MAX_ABS {
        return Err(domain("cyl_bessel_j", z, "|z| above 60"));
    }
    let l = ell as usize;
    let j = j_orders(z, l + 1);
    let derivative = if l == 0 { -j[1] } else { 0.5 * (j[l - 1] - j[l + 1]) };
    Ok(BesselResult {
        value: j[l],
        derivative,
    })
}

fn check_singular(function: &'static str, ell: u32, z: Complex64) -> Result<()> {
    check_order(function, ell, z)?;
    let r = z.norm();
    if r < SINGULAR_FLOOR {
        return Err(domain(function, z, "|z| below 0.05, logarithmic and pole terms dominate"));
    }
    if r > MAX_ABS {
        return Err(domain(function, z, "|z| above 60"));
    }
    if z.im.abs() > MAX_ABS_IM {
        return Err(domain(function, z, "|Im z| above 5"));
    }
    Ok(())
}

/// `Y_ell(z)` and `Y'_ell(z)` for `ell <= 30`, `0.05 <= |z| <= 60`,
/// `|Im z| <= 5`.
pub fn cyl_bessel_y(ell: u32, z: Complex64) -> Result<BesselResult> {
    check_singular("cyl_bessel_y", ell, z)?;
    let l = ell as usize;
    let j = j_orders(z, l + 1);
    let y = y_orders(z, &j, l + 1);
    let derivative = if l == 0 { -y[1] } else { y[l - 1] - l as f64 / z * y[l] };
    Ok(BesselResult {
        value: y[l],
        derivative,
    })
}

/// `H^(1)_ell(z) = J_ell(z) + i Y_ell(z)` and its derivative, for
/// `ell <= 30`, `0.05 <= |z| <= 60` and `|Im z| <= 5`.
pub fn cyl_hankel1(ell: u32, z: Complex64) -> Result<BesselResult> {
    check_singular("cyl_hankel1", ell, z)?;
    let l = ell as usize;
    let j = j_orders(z, l + 1);
    let y = y_orders(z, &j, l + 1);
    let h: Vec<Complex64> = (0..=l + 1).map(|k| j[k] + I * y[k]).collect();
    let derivative = if l == 0 { -h[1] } else { h[l - 1] - l as f64 / z * h[l] };
    Ok(BesselResult {
        value: h[l],
        derivative,
    })
}
