//! Effect size of the designated genes.

use crate::dist::{f_quantile, f_sf, FParams};
use crate::error::{Error, Result};
use crate::model::WishartPrior;

/// Upper end of the bracket searched by [`solve_theta`].
pub const THETA_MAX: f64 = 1e3;
const THETA_TOL: f64 = 1e-8;

/// Power of the level-`alpha` central-F test when the statistic is
/// noncentral F with noncentrality `multiplier * theta`.
pub fn power_at(theta: f64, alpha: f64, df1: f64, df2: f64, multiplier: f64) -> Result<f64> {
    let crit = f_quantile(1.0 - alpha, &FParams::central(df1, df2)?)?;
    Ok(f_sf(
        crit,
        &FParams::noncentral(df1, df2, multiplier * theta)?,
    ))
}

/// Solves `power = 1 - F_{df1,df2,multiplier·θ}(F^{-1}_{df1,df2}(1 - alpha))`
/// for `θ` by bisection on `[0, THETA_MAX]`.
pub fn solve_theta(power: f64, alpha: f64, df1: f64, df2: f64, multiplier: f64) -> Result<f64> {
    if !(power > 0.0 && power < 1.0 && alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("power and alpha must lie in (0, 1)"));
    }
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(Error::domain(format!(
            "multiplier must be positive, got {multiplier}"
        )));
    }
    let crit = f_quantile(1.0 - alpha, &FParams::central(df1, df2)?)?;
    let excess = |theta: f64| -> Result<f64> {
        Ok(f_sf(crit, &FParams::noncentral(df1, df2, multiplier * theta)?) - power)
    };
    let (mut lo, mut hi) = (0.0, THETA_MAX);
    let at_lo = excess(lo)?;
    if at_lo.abs() <= 1e-10 {
        return Ok(0.0);
    }
    if at_lo > 0.0 || excess(hi)? < 0.0 {
        return Err(Error::NoRoot { lo, hi });
    }
    while hi - lo > THETA_TOL {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mean vector of a designated gene: every component equals `θ` times the
/// per-condition prior standard deviation `sqrt(Λ_kk/(ν-2d-2))` averaged over
/// conditions.
pub fn designate_means(prior: &WishartPrior, theta: f64, d: usize) -> Result<Vec<f64>> {
    if prior.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: prior.dim(),
        });
    }
    let mean = prior
        .mean_covariance()
        .ok_or_else(|| Error::domain("designated means need nu > 2d + 2"))?;
    let sd = (0..d).map(|k| mean[(k, k)].sqrt()).sum::<f64>() / d as f64;
    Ok(vec![theta * sd; d])
}
