use num_complex::Complex64;

use super::{check_order, BesselResult, RESCALE_ABOVE};
use crate::error::{Error, Result};

const MAX_ABS: f64 = 100.0;
const J_FLOOR: f64 = 1e-8;
const H_FLOOR: f64 = 0.05;
/// Lowest `Im z` for `h`: below it the upward recurrence amplifies
/// rounding by up to `e^{2 |Im z|}`.
const H_MIN_IM: f64 = -5.0;
const I: Complex64 = Complex64::new(0.0, 1.0);

fn check(function: &'static str, ell: u32, z: Complex64, floor: f64) -> Result<()> {
    check_order(function, ell, z)?;
    let r = z.norm();
    if r < floor {
        return Err(Error::UnsupportedDomain {
            function,
            z,
            reason: "|z| below the floor, use the small-argument limit",
        });
    }
    if r > MAX_ABS {
        return Err(Error::UnsupportedDomain {
            function,
            z,
            reason: "|z| above 100",
        });
    }
    Ok(())
}

/// `j_0 .. j_nmax` by backward recurrence, scaled to match the closed forms
/// of `j_0` and `j_1`.
fn backward(z: Complex64, nmax: usize) -> Vec<Complex64> {
    let r = z.norm();
    let top = ((nmax as f64).max(r) + 40.0 + 0.5 * r).ceil() as usize;
    let mut f = vec![Complex64::new(0.0, 0.0); top + 2];
    f[top] = Complex64::new(1.0, 0.0);
    for k in (1..=top).rev() {
        f[k - 1] = (2 * k + 1) as f64 / z * f[k] - f[k + 1];
        if f[k - 1].norm() > RESCALE_ABOVE {
            for v in &mut f[k - 1..] {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let m = f[0].norm().max(f[1].norm());
    for v in &mut f {
        *v /= m;
    }
    let j0 = z.sin() / z;
    let scale = if r < 1.0 {
        j0 / f[0]
    } else {
        // least-squares match on both closed forms so that a zero of either
        // one does not spoil the scale
        let j1 = z.sin() / (z * z) - z.cos() / z;
        (f[0].conj() * j0 + f[1].conj() * j1) / (f[0].norm_sqr() + f[1].norm_sqr())
    };
    f.truncate(nmax + 1);
    for v in &mut f {
        *v *= scale;
    }
    f
}

/// `j_ell(z)` and `j'_ell(z)` for `ell <= 30`, `1e-8 <= |z| <= 100`.
pub fn sph_bessel_j(ell: u32, z: Complex64) -> Result<BesselResult> {
    check("sph_bessel_j", ell, z, J_FLOOR)?;
    let l = ell as usize;
    let j = backward(z, l + 1);
    let derivative = if l == 0 { -j[1] } else { j[l - 1] - (l + 1) as f64 / z * j[l] };
    Ok(BesselResult {
        value: j[l],
        derivative,
    })
}

/// `h^(1)_ell(z)` and its derivative for `ell <= 30`, `0.05 <= |z| <= 100`,
/// `Im z >= -5`,
/// by upward recurrence from the closed forms of orders 0 and 1.
pub fn sph_hankel1(ell: u32, z: Complex64) -> Result<BesselResult> {
    check("sph_hankel1", ell, z, H_FLOOR)?;
    if z.im < H_MIN_IM {
        return Err(Error::UnsupportedDomain {
            function: "sph_hankel1",
            z,
            reason: "Im z below -5",
        });
    }
    let l = ell as usize;
    let e = (I * z).exp() / z;
    let mut h = Vec::with_capacity(l + 2);
    h.push(-I * e);
    h.push(-(1.0 + I / z) * e);
    for k in 1..=l {
        let next = (2 * k + 1) as f64 / z * h[k] - h[k - 1];
        h.push(next);
    }
    let derivative = if l == 0 { -h[1] } else { h[l - 1] - (l + 1) as f64 / z * h[l] };
    Ok(BesselResult {
        value: h[l],
        derivative,
    })
}
