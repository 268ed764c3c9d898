//! Integer-order Bessel and Hankel functions of complex argument, in the
//! cylindrical and spherical flavours, together with their derivatives.
//!
//! Every function checks its argument against a validated domain and returns
//! [`Error::UnsupportedDomain`](crate::Error::UnsupportedDomain) outside it.

mod cylindrical;
mod spherical;

use num_complex::Complex64;
use serde::Serialize;

pub use cylindrical::{cyl_bessel_j, cyl_bessel_y, cyl_hankel1};
pub use spherical::{sph_bessel_j, sph_hankel1};

use crate::error::{Error, Result};

/// Largest order accepted by every function in this module.
pub const MAX_ORDER: u32 = 30;

/// A function value together with its derivative in the argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselResult {
    pub value: Complex64,
    pub derivative: Complex64,
}

pub(crate) fn check_order(function: &'static str, ell: u32, z: Complex64) -> Result<()> {
    if ell > MAX_ORDER {
        return Err(Error::UnsupportedDomain {
            function,
            z,
            reason: "order above 30",
        });
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::UnsupportedDomain {
            function,
            z,
            reason: "non-finite argument",
        });
    }
    Ok(())
}

/// Rescaling threshold for backward recurrences.
pub(crate) const RESCALE_ABOVE: f64 = 1e250;
