//! Digamma and log-gamma for positive real arguments.
//!
//! Both use the same scheme: shift the argument upward with the recurrence
//! until the asymptotic (Stirling-type) series converges to machine precision,
//! then undo the shift.

use crate::error::{Error, Result};

/// B_{2k} / (2k), k = 1..7.
const DIGAMMA_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// B_{2k} / (2k (2k - 1)), k = 1..8.
const STIRLING_SERIES: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const DIGAMMA_SHIFT: f64 = 6.0;
const LGAMMA_SHIFT: f64 = 15.0;
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// ψ(x) = d/dx ln Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            function: "digamma",
            x,
        });
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut z = x;
    while z < DIGAMMA_SHIFT {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    // Horner over 1/z^2, highest order first.
    let tail = DIGAMMA_SERIES
        .iter()
        .rev()
        .fold(0.0, |s, &c| (s + c) * inv2);
    acc + z.ln() - 0.5 / z - tail
}

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            function: "log_gamma",
            x,
        });
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    // Γ(1) = Γ(2) = 1 exactly; the shifted series only reaches ~1e-15 there.
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let mut z = x;
    let mut prod = 1.0;
    while z < LGAMMA_SHIFT {
        prod *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let tail = STIRLING_SERIES
        .iter()
        .rev()
        .fold(0.0, |s, &c| s * inv2 + c)
        * inv;
    let stirling = (z - 0.5) * z.ln() - z + HALF_LN_TWO_PI + tail;
    if prod == 1.0 {
        stirling
    } else {
        stirling - prod.ln()
    }
}
