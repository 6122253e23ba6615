//! Theoretical existence-time and norm bounds. Every value carries an
//! unquantified constant `C` supplied by the caller.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};

fn check_inputs(us0: f64, eps: f64, c: f64) -> Result<()> {
    if !(us0 > 0.0) {
        return Err(Error::NonPositiveEnergy(us0));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::ConfigInvalid(format!(
            "bound constant C must be positive, got {c}"
        )));
    }
    Ok(())
}

/// `T_short = ln(1 + 1/U_s(0)) / (√ε · C · H*)` with `H* = max(1, H)`.
pub fn existence_time_lower_bound(us0: f64, h: f64, eps: f64, c: f64) -> Result<f64> {
    check_inputs(us0, eps, c)?;
    let h_star = h.max(1.0);
    Ok((1.0 + 1.0 / us0).ln() / (eps.sqrt() * c * h_star))
}

/// `F(x) = min{(1+2|x|)^{1/2}x/(CH²), ln2/(C(1+H²)(1+16x²))}`; the first
/// term is `+∞` when `H = 0`.
pub fn theory_f(x: f64, h: f64, c: f64) -> f64 {
    let root = (1.0 + 2.0 * x.abs()).sqrt();
    let first = if h == 0.0 {
        f64::INFINITY
    } else {
        root * x / (c * h * h)
    };
    let second = LN_2 / (c * (1.0 + h * h) * (1.0 + 16.0 * x * x));
    first.min(second)
}

/// `G(x) = max{2((1+2|x|)^{1/2}x + ln2/(1+16x²)), 4(1+2|x|)^{1/2}x}`.
pub fn theory_g(x: f64) -> f64 {
    let root = (1.0 + 2.0 * x.abs()).sqrt();
    (2.0 * (root * x + LN_2 / (1.0 + 16.0 * x * x))).max(4.0 * root * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongTimeBounds {
    /// `N₀ = (1 + 2ε‖η₀‖_∞)^{1/2} U_s(0)`
    pub n0: f64,
    /// `F(N₀)/ε`
    pub t_long: f64,
    /// `G(U_s(0))`
    pub norm_cap: f64,
}

pub fn long_time_bounds(us0: f64, eta0_sup: f64, h: f64, eps: f64, c: f64) -> Result<LongTimeBounds> {
    check_inputs(us0, eps, c)?;
    let n0 = (1.0 + 2.0 * eps * eta0_sup.abs()).sqrt() * us0;
    Ok(LongTimeBounds {
        n0,
        t_long: theory_f(n0, h, c) / eps,
        norm_cap: theory_g(us0),
    })
}
