//! Three-sphere inequalities derived from the adjusted monotonicity: one for
//! the weighted height H, one for sup norms, both with fitted constants.
//!
//! The exponents are built from Cbar, the fitted constant of the window
//! inequality N(r) <= Cbar (N(s) + C2 M) for r < s; the reports then record
//! the smallest multiplicative constant that closes the displayed
//! inequality, split into its e^C and shape-power readings.

use super::{fit_monotonicity, geometric_radii, sup_norm};
use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::fields::SolutionField;
use crate::functionals::{frequency_trace, height, plain_height, DIM, H_UNDERFLOW};
use crate::num::Vec2;
use crate::quadrature::QuadParams;

#[derive(Debug, Clone, serde::Serialize)]
pub struct ThreeSphereReport {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// Inner log-gap exponent (alpha0 for H, alpha1 for sup).
    pub alpha_exp: f64,
    /// Outer log-gap exponent scaled by Cbar^2.
    pub beta_exp: f64,
    /// Weight on the outer norm; inner weight is 1 - w_outer exactly.
    pub w_outer: f64,
    pub w_inner: f64,
    /// Fitted window constants feeding the exponents.
    pub cbar: f64,
    pub c2: f64,
    /// Log of the middle quantity and of the weighted geometric mean.
    pub lhs_log: f64,
    pub mean_log: f64,
    /// max(0, lhs_log - mean_log - structural terms): the log of the minimal
    /// multiplicative constant still needed.
    pub needed_log_constant: f64,
    /// needed_log_constant read as C' in (r3/(2 r2))^{C' sqrt(M)} (H case)
    /// or C'' in the sup-norm shape factor.
    pub c_prime: f64,
    /// Fitted constant of the h-to-sup bridge (sup variant only).
    pub bridge_constant: Option<f64>,
    pub pass: bool,
}

fn validate_radii(r1: f64, r2: f64, r3: f64) -> Result<()> {
    if !(0.0 < r1 && r1 < r2 && 2.0 * r2 < r3) {
        return Err(Error::domain(format!(
            "three-sphere radii must satisfy 0 < r1 < r2 < 2 r2 < r3 (got {r1}, {r2}, {r3})"
        )));
    }
    Ok(())
}

/// Fits Cbar >= 1 with N(r) <= Cbar (N(s) + C2 M) over r < s in the window.
#[allow(clippy::too_many_arguments)]
fn fit_cbar(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    r_lo: f64,
    r_hi: f64,
    alpha: f64,
    m: f64,
    params: &QuadParams,
) -> Result<(f64, f64)> {
    let radii = geometric_radii(r_lo, r_hi, 12);
    let tr = frequency_trace(u, coeff, z0, &radii, alpha, false, params)?;
    let fit = fit_monotonicity(&tr, m, 1e-6)?;
    let c2 = if fit.pass { fit.c2 } else { 0.0 };
    let mut cbar = 1.0f64;
    for i in 0..tr.n.len() {
        for j in (i + 1)..tr.n.len() {
            if !(tr.valid[i] && tr.valid[j]) {
                continue;
            }
            let denom = tr.n[j] + c2 * m;
            if denom > 0.0 && tr.n[i] > 0.0 {
                cbar = cbar.max(tr.n[i] / denom);
            }
        }
    }
    Ok((cbar, c2))
}

/// Three-sphere inequality for the height H at radii (r1, 2 r2, r3).
#[allow(clippy::too_many_arguments)]
pub fn three_sphere_h(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    r1: f64,
    r2: f64,
    r3: f64,
    alpha: f64,
    m: f64,
    params: &QuadParams,
) -> Result<ThreeSphereReport> {
    validate_radii(r1, r2, r3)?;
    let h1 = height(u, coeff, z0, r1, alpha, params)?;
    let h2 = height(u, coeff, z0, 2.0 * r2, alpha, params)?;
    let h3 = height(u, coeff, z0, r3, alpha, params)?;
    if h1 <= H_UNDERFLOW || h2 <= H_UNDERFLOW || h3 <= H_UNDERFLOW {
        return Err(Error::domain(
            "three_sphere_h: vacuous case, u vanishes on the window",
        ));
    }
    let (cbar, c2) = fit_cbar(u, coeff, z0, r1, r3, alpha, m, params)?;
    let alpha_exp = (r3 / (2.0 * r2)).ln();
    let beta_exp = cbar * cbar * (2.0 * r2 / r1).ln();
    let w_outer = beta_exp / (alpha_exp + beta_exp);
    let w_inner = 1.0 - w_outer;
    let lhs_log = h2.ln();
    let mean_log = w_outer * h3.ln() + w_inner * h1.ln();
    let needed = (lhs_log - mean_log).max(0.0);
    Ok(ThreeSphereReport {
        r1,
        r2,
        r3,
        alpha_exp,
        beta_exp,
        w_outer,
        w_inner,
        cbar,
        c2,
        lhs_log,
        mean_log,
        needed_log_constant: needed,
        c_prime: needed / (m.sqrt() * alpha_exp),
        bridge_constant: None,
        pass: w_outer.is_finite() && (0.0..=1.0).contains(&w_outer),
    })
}

/// Three-sphere inequality for sup norms at radii (r1, r2, r3), including
/// the structural factor (r3/(r3 - 2 r2))^{n/2} and the h-to-sup bridge.
#[allow(clippy::too_many_arguments)]
pub fn three_sphere_sup(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    r1: f64,
    r2: f64,
    r3: f64,
    alpha: f64,
    m: f64,
    params: &QuadParams,
) -> Result<ThreeSphereReport> {
    validate_radii(r1, r2, r3)?;
    let mid = 2.0 * (r2 + r3) / 3.0;
    let sup1 = sup_norm(u, z0, r1);
    let sup2 = sup_norm(u, z0, r2);
    let sup3 = sup_norm(u, z0, r3);
    if sup1 == 0.0 || sup2 == 0.0 || sup3 == 0.0 {
        return Err(Error::domain(
            "three_sphere_sup: vacuous case, u vanishes on the window",
        ));
    }
    let (cbar, c2) = fit_cbar(u, coeff, z0, r1, r3, alpha, m, params)?;
    let alpha_exp = (r3 / mid).ln();
    let beta_exp = cbar * cbar * (mid / r1).ln();
    let w_outer = beta_exp / (alpha_exp + beta_exp);
    let w_inner = 1.0 - w_outer;
    let lhs_log = sup2.ln();
    let mean_log = w_outer * sup3.ln() + w_inner * sup1.ln();
    let structural = (DIM / 2.0) * (r3 / (r3 - 2.0 * r2)).ln();
    let needed = (lhs_log - mean_log - structural).max(0.0);

    // h-to-sup bridge: sup over B_{r2} <= C (1 + ||V||_inf)^{n/2}
    // (rho - r2)^{-n/2} h(rho)^{1/2} with rho = (r2 + r3)/3
    let rho = (r2 + r3) / 3.0;
    let h_rho = plain_height(u, coeff, z0, rho, params)?;
    let v_inf = u.potential.at(z0).abs();
    let bridge_constant =
        sup2 / ((1.0 + v_inf).powf(DIM / 2.0) * (rho - r2).powf(-DIM / 2.0) * h_rho.sqrt());
    Ok(ThreeSphereReport {
        r1,
        r2,
        r3,
        alpha_exp,
        beta_exp,
        w_outer,
        w_inner,
        cbar,
        c2,
        lhs_log,
        mean_log,
        needed_log_constant: needed,
        c_prime: needed / (m.sqrt() * alpha_exp),
        bridge_constant: Some(bridge_constant),
        pass: w_outer.is_finite() && (0.0..=1.0).contains(&w_outer),
    })
}
