//! The weighted functionals of the frequency machinery:
//!
//!   H(r) = integral of u^2 (r^2 - |x - z0|^2)^alpha mu        (height)
//!   I(r) = integral of (<A Du, Du> + V u^2)(r^2 - |x|^2)^{alpha+1} (energy)
//!   N(r) = I(r) / H(r)                                        (frequency)
//!   h(r) = integral of u^2 mu                                 (plain height)
//!   G(s) = integral of u^2 (s^2 - |x|^2)^alpha                (no mu factor)
//!
//! plus the alternative energy identity and numerical first-variation
//! checks. For a degree-kappa homogeneous harmonic with A = I the frequency
//! is exactly 2 (alpha + 1) kappa at every radius, which is the analytic
//! oracle used throughout the tests.

use crate::coefficients::{mu, z_field, CoefficientField};
use crate::error::{Error, Result};
use crate::fields::SolutionField;
use crate::geometry::Region;
use crate::num::Vec2;
use crate::quadrature::{integrate_ball, QuadParams};

/// Ambient dimension of the numerics.
pub const DIM: f64 = 2.0;

fn mu_at(coeff: &CoefficientField, z0: Vec2, x: Vec2) -> f64 {
    if coeff.is_identity() {
        return 1.0;
    }
    mu(coeff, z0, x).unwrap_or(1.0)
}

/// H(r): weighted height with exponent alpha and conformal factor mu.
pub fn height(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    r: f64,
    alpha: f64,
    params: &QuadParams,
) -> Result<f64> {
    integrate_ball(&u.region, z0, r, alpha, params, &|x| {
        let v = u.eval(x);
        v * v * mu_at(coeff, z0, x)
    })
}

/// I(r): Dirichlet plus potential energy, both at exponent alpha + 1.
pub fn energy(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    r: f64,
    alpha: f64,
    params: &QuadParams,
) -> Result<f64> {
    integrate_ball(&u.region, z0, r, alpha + 1.0, params, &|x| {
        let g = u.grad(x);
        let v = u.eval(x);
        coeff.at(x).mul_vec(g).dot(g) + u.potential.at(x) * v * v
    })
}

/// The right-hand side of the alternative energy identity:
/// 2 (alpha + 1) integral of u <A Du, x - z0> (r^2 - |x - z0|^2)^alpha.
pub fn alt_energy(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    r: f64,
    alpha: f64,
    params: &QuadParams,
) -> Result<f64> {
    let v = integrate_ball(&u.region, z0, r, alpha, params, &|x| {
        u.eval(x) * coeff.at(x).mul_vec(u.grad(x)).dot(x - z0)
    })?;
    Ok(2.0 * (alpha + 1.0) * v)
}

/// h(r): the weight-free height integral of u^2 mu.
pub fn plain_height(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    r: f64,
    params: &QuadParams,
) -> Result<f64> {
    integrate_ball(&u.region, z0, r, 0.0, params, &|x| {
        let v = u.eval(x);
        v * v * mu_at(coeff, z0, x)
    })
}

/// G(s): the weighted mass without the mu factor, the growth-iteration
/// quantity.
pub fn plain_g(
    u: &SolutionField,
    z0: Vec2,
    s: f64,
    alpha: f64,
    params: &QuadParams,
) -> Result<f64> {
    integrate_ball(&u.region, z0, s, alpha, params, &|x| {
        let v = u.eval(x);
        v * v
    })
}

/// Sampled r -> (H, I, N) with quadrature metadata.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FrequencyTrace {
    pub z0: Vec2,
    pub alpha: f64,
    pub radii: Vec<f64>,
    pub h: Vec<f64>,
    pub i: Vec<f64>,
    pub n: Vec<f64>,
    /// False where H underflowed (below 1e-300); such radii are skipped by
    /// downstream fits rather than erroring.
    pub valid: Vec<bool>,
    /// Whether a normalization frame was applied before tracing.
    pub framed: bool,
    pub quad_angular: usize,
    pub quad_radial: usize,
    pub quad_tol: f64,
}

pub const H_UNDERFLOW: f64 = 1e-300;

/// Vectorized H, I, N over an ascending radius grid.
pub fn frequency_trace(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    radii: &[f64],
    alpha: f64,
    framed: bool,
    params: &QuadParams,
) -> Result<FrequencyTrace> {
    if radii.is_empty() {
        return Err(Error::domain("frequency_trace needs at least one radius"));
    }
    for w in radii.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::domain("frequency_trace radii must be ascending"));
        }
    }
    let mut hs = Vec::with_capacity(radii.len());
    let mut is = Vec::with_capacity(radii.len());
    let mut ns = Vec::with_capacity(radii.len());
    let mut valid = Vec::with_capacity(radii.len());
    for &r in radii {
        let hv = height(u, coeff, z0, r, alpha, params)?;
        let iv = energy(u, coeff, z0, r, alpha, params)?;
        let ok = hv > H_UNDERFLOW;
        hs.push(hv);
        is.push(iv);
        ns.push(if ok { iv / hv } else { f64::NAN });
        valid.push(ok);
    }
    Ok(FrequencyTrace {
        z0,
        alpha,
        radii: radii.to_vec(),
        h: hs,
        i: is,
        n: ns,
        valid,
        framed,
        quad_angular: params.angular,
        quad_radial: params.radial,
        quad_tol: params.tol,
    })
}

impl FrequencyTrace {
    /// CSV rows `r,H,I,N,valid`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,H,I,N,valid\n");
        for k in 0..self.radii.len() {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
                self.radii[k], self.h[k], self.i[k], self.n[k], self.valid[k]
            ));
        }
        out
    }
}

/// Normalized residual of the first variation of the height:
/// [H(r+dr) - H(r-dr)]/(2 dr) - (2 alpha + n)/r H - I/((alpha+1) r),
/// divided by H(r). Exactly the O(1) H term of the identity when A varies;
/// pure central-difference noise O(dr^2) when A = I.
pub fn height_variation_residual(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    r: f64,
    alpha: f64,
    dr: f64,
    params: &QuadParams,
) -> Result<f64> {
    let hp = height(u, coeff, z0, r + dr, alpha, params)?;
    let hm = height(u, coeff, z0, r - dr, alpha, params)?;
    let h0 = height(u, coeff, z0, r, alpha, params)?;
    if h0 <= H_UNDERFLOW {
        return Err(Error::numerical("height underflow in variation residual"));
    }
    let i0 = energy(u, coeff, z0, r, alpha, params)?;
    let dh = (hp - hm) / (2.0 * dr);
    Ok((dh - (2.0 * alpha + DIM) / r * h0 - i0 / ((alpha + 1.0) * r)) / h0)
}

/// Default differentiation step for the variation checks.
pub fn variation_step(r: f64, quad_tol: f64) -> f64 {
    r * (1e-4f64).max(2.0 * quad_tol.powf(1.0 / 3.0))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EnergyVariationReport {
    pub r: f64,
    /// Central-difference I'(r) after one Richardson step.
    pub lhs: f64,
    /// (2 alpha + n)/r I(r) + 4(alpha+1)/r * integral of (Zu)^2 mu w^alpha.
    pub rhs_core: f64,
    /// lhs - rhs_core; the first-variation inequality asks this to be
    /// >= -C M r H with universal C.
    pub slack: f64,
    /// Minimal C >= 0 with slack >= -C M r H(r) at this radius.
    pub c_witness: f64,
}

/// Checks the first-variation inequality for the energy at one radius.
/// The generalized star-shapedness hypothesis is verified by sampling
/// <Z, nu> on the boundary portion inside B_r when the ball meets it.
pub fn energy_variation_check(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    r: f64,
    alpha: f64,
    dr: f64,
    params: &QuadParams,
) -> Result<EnergyVariationReport> {
    let h0 = height(u, coeff, z0, r, alpha, params)?;
    if h0 <= H_UNDERFLOW {
        return Err(Error::domain(
            "energy_variation_check: u vanishes on the ball (H = 0)",
        ));
    }
    check_star_shape_hypothesis(u, coeff, z0, r)?;
    let d = |step: f64| -> Result<f64> {
        let ip = energy(u, coeff, z0, r + step, alpha, params)?;
        let im = energy(u, coeff, z0, r - step, alpha, params)?;
        Ok((ip - im) / (2.0 * step))
    };
    let coarse = d(dr)?;
    let fine = d(0.5 * dr)?;
    let lhs = (4.0 * fine - coarse) / 3.0;
    let i0 = energy(u, coeff, z0, r, alpha, params)?;
    let zu_term = integrate_ball(&u.region, z0, r, alpha, params, &|x| {
        let m = mu_at(coeff, z0, x);
        let a_e = coeff.at(x).mul_vec(x - z0);
        let zu = a_e.dot(u.grad(x)) / m;
        zu * zu * m
    })?;
    let rhs_core = (2.0 * alpha + DIM) / r * i0 + 4.0 * (alpha + 1.0) / r * zu_term;
    let slack = lhs - rhs_core;
    let c_witness = (-slack).max(0.0) / (u.m_bound * r * h0);
    Ok(EnergyVariationReport {
        r,
        lhs,
        rhs_core,
        slack,
        c_witness,
    })
}

/// Samples <Z(x), nu(x)> over the boundary portion inside B_r(z0); errors
/// if the generalized star-shapedness hypothesis fails.
fn check_star_shape_hypothesis(
    u: &SolutionField,
    coeff: &CoefficientField,
    z0: Vec2,
    r: f64,
) -> Result<()> {
    let Region::Chart(domain) = &u.region else {
        // disks/whole plane: interior balls are star-shaped through Z by
        // construction (<Z, nu> = r on spheres)
        return Ok(());
    };
    if u.region.level(z0) < -r {
        return Ok(()); // ball does not reach the boundary
    }
    let samples = 64;
    for i in 0..samples {
        let t = z0.x + r * (2.0 * i as f64 / (samples - 1) as f64 - 1.0);
        if t.abs() > domain.chart.usable_radius() {
            continue;
        }
        let x = Vec2::new(t, domain.chart.phi(t));
        if (x - z0).norm() > r || (x - z0).norm() == 0.0 {
            continue;
        }
        let nu = crate::geometry::normal_at(&domain.chart, t)?;
        let z = z_field(coeff, z0, x)?;
        if z.dot(nu) < -1e-10 * r {
            return Err(Error::domain(format!(
                "energy_variation_check: star-shape hypothesis violated at x' = {t} (<Z, nu> = {})",
                z.dot(nu)
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Potential;
    use crate::fields::{catalog_disk_eigen, catalog_homogeneous, ConstField, FieldKind};
    use crate::num::beta;
    use std::sync::Arc;

    fn const_one(region: Region) -> SolutionField {
        SolutionField {
            field: Arc::new(ConstField(1.0)),
            region,
            potential: Potential::Zero,
            m_bound: 1.0,
            kind: FieldKind::ClosedForm,
        }
    }

    fn q() -> QuadParams {
        QuadParams::default()
    }

    #[test]
    fn height_const_full_disk() {
        // u = 1, alpha = 1, r = 1 on the whole plane: pi/2
        let u = const_one(Region::WholePlane);
        let id = CoefficientField::identity();
        let h = height(&u, &id, Vec2::ZERO, 1.0, 1.0, &q()).unwrap();
        assert!((h - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn height_homogeneous_beta_closed_form() {
        // u = Im z^2 on the half-plane, alpha = 1, r = 1: pi/48
        let e = catalog_homogeneous(2).unwrap();
        let h = height(&e.solution, &e.coeff, Vec2::ZERO, 1.0, 1.0, &q()).unwrap();
        assert!((h - std::f64::consts::PI / 48.0).abs() < 1e-10);
        // general closed form (pi/4) B(kappa+1, alpha+1) r^{2kappa+2alpha+2}
        let want = std::f64::consts::FRAC_PI_4 * beta(3.0, 2.0);
        assert!((h - want).abs() < 1e-12);
    }

    #[test]
    fn height_scaling_homogeneous() {
        let e = catalog_homogeneous(3).unwrap();
        let alpha = 1.5;
        let h1 = height(&e.solution, &e.coeff, Vec2::ZERO, 0.1, alpha, &q()).unwrap();
        let h2 = height(&e.solution, &e.coeff, Vec2::ZERO, 0.2, alpha, &q()).unwrap();
        let expo = 2.0 * 3.0 + DIM + 2.0 * alpha;
        assert!((h2 / h1 - 2f64.powf(expo)).abs() < 1e-7 * 2f64.powf(expo));
    }

    #[test]
    fn frequency_constant_for_homogeneous_harmonics() {
        for (kappa, alpha) in [(2u32, 1.0), (3, 2.0), (1, 1.0)] {
            let e = catalog_homogeneous(kappa).unwrap();
            let radii: Vec<f64> = (1..=8).map(|i| 0.05 * i as f64).collect();
            let tr = frequency_trace(
                &e.solution,
                &e.coeff,
                Vec2::ZERO,
                &radii,
                alpha,
                false,
                &q(),
            )
            .unwrap();
            let want = 2.0 * (alpha + 1.0) * kappa as f64;
            for (k, &n) in tr.n.iter().enumerate() {
                assert!(
                    (n - want).abs() <= 1e-8 * want,
                    "kappa {kappa} alpha {alpha} r {}: N = {n}, want {want}",
                    radii[k]
                );
            }
        }
    }

    #[test]
    fn energy_const_is_zero() {
        let u = const_one(Region::WholePlane);
        let id = CoefficientField::identity();
        let i = energy(&u, &id, Vec2::ZERO, 1.0, 1.0, &q()).unwrap();
        assert!(i.abs() < 1e-12);
    }

    #[test]
    fn alt_energy_identity_homogeneous() {
        let e = catalog_homogeneous(3).unwrap();
        let alpha = 2.0;
        let r = 0.4;
        let i = energy(&e.solution, &e.coeff, Vec2::ZERO, r, alpha, &q()).unwrap();
        let alt = alt_energy(&e.solution, &e.coeff, Vec2::ZERO, r, alpha, &q()).unwrap();
        assert!((i - alt).abs() <= 1e-9 * i.abs());
        // Euler identity route: alt = 2 (alpha+1) kappa H
        let h = height(&e.solution, &e.coeff, Vec2::ZERO, r, alpha, &q()).unwrap();
        assert!((alt - 2.0 * (alpha + 1.0) * 3.0 * h).abs() < 1e-9 * alt.abs());
    }

    #[test]
    fn alt_energy_identity_disk_eigen() {
        let e = catalog_disk_eigen(1, 1).unwrap();
        let alpha = e.solution.alpha_default();
        let r = 0.35;
        let i = energy(&e.solution, &e.coeff, Vec2::ZERO, r, alpha, &q()).unwrap();
        let alt = alt_energy(&e.solution, &e.coeff, Vec2::ZERO, r, alpha, &q()).unwrap();
        assert!(
            (i - alt).abs() <= 1e-8 * (i.abs() + 1.0),
            "energy {i} vs alt {alt}"
        );
        assert!(i > 0.0, "N positive for small r");
    }

    #[test]
    fn alt_energy_interior_constant_is_zero() {
        let u = const_one(Region::WholePlane);
        let id = CoefficientField::identity();
        let alt = alt_energy(&u, &id, Vec2::ZERO, 0.8, 1.0, &q()).unwrap();
        assert!(alt.abs() < 1e-12);
    }

    #[test]
    fn plain_height_closed_forms() {
        let id = CoefficientField::identity();
        // u = 1 on the full unit disk: area pi
        let u = const_one(Region::WholePlane);
        let h = plain_height(&u, &id, Vec2::ZERO, 1.0, &q()).unwrap();
        assert!((h - std::f64::consts::PI).abs() < 1e-10);
        // u = Im z on the half-plane, r = 1: pi/8
        let e = catalog_homogeneous(1).unwrap();
        let h1 = plain_height(&e.solution, &e.coeff, Vec2::ZERO, 1.0, &q()).unwrap();
        assert!((h1 - std::f64::consts::PI / 8.0).abs() < 1e-10);
    }

    #[test]
    fn plain_height_sandwich() {
        let e = catalog_homogeneous(2).unwrap();
        let alpha = 1.5;
        let (r, rho) = (0.2, 0.3);
        let h_small = height(&e.solution, &e.coeff, Vec2::ZERO, r, alpha, &q()).unwrap();
        let h_big = height(&e.solution, &e.coeff, Vec2::ZERO, rho, alpha, &q()).unwrap();
        let ph = plain_height(&e.solution, &e.coeff, Vec2::ZERO, r, &q()).unwrap();
        assert!(h_small <= r.powf(2.0 * alpha) * ph * (1.0 + 1e-9));
        assert!(ph <= h_big / (rho * rho - r * r).powf(alpha) * (1.0 + 1e-9));
    }

    #[test]
    fn plain_g_equals_height_for_identity_coefficients() {
        let e = catalog_homogeneous(2).unwrap();
        let alpha = 1.0;
        let g = plain_g(&e.solution, Vec2::ZERO, 0.3, alpha, &q()).unwrap();
        let h = height(&e.solution, &e.coeff, Vec2::ZERO, 0.3, alpha, &q()).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn plain_g_sup_norm_bound() {
        // G(s) <= ||u||_inf^2 * pi s^{2 alpha + 2} / (alpha + 1)
        let e = catalog_homogeneous(2).unwrap();
        let alpha = 1.0;
        let s = 0.4;
        let g = plain_g(&e.solution, Vec2::ZERO, s, alpha, &q()).unwrap();
        let sup = s * s; // |Im z^2| <= |z|^2
        let bound = sup * sup * std::f64::consts::PI * s.powf(2.0 * alpha + 2.0) / (alpha + 1.0);
        assert!(g <= bound);
    }

    #[test]
    fn frequency_invariant_under_scaling() {
        let e = catalog_homogeneous(2).unwrap();
        let scaled = e.solution.scaled(-37.5);
        let radii = [0.1, 0.2, 0.3];
        let t1 =
            frequency_trace(&e.solution, &e.coeff, Vec2::ZERO, &radii, 1.0, false, &q()).unwrap();
        let t2 = frequency_trace(&scaled, &e.coeff, Vec2::ZERO, &radii, 1.0, false, &q()).unwrap();
        for (a, b) in t1.n.iter().zip(&t2.n) {
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }

    #[test]
    fn height_variation_residual_rate_dr_squared() {
        let e = catalog_homogeneous(2).unwrap();
        let tight = QuadParams { tol: 1e-12, ..q() };
        let r = 0.25;
        let r1 = height_variation_residual(&e.solution, &e.coeff, Vec2::ZERO, r, 1.0, 4e-3, &tight)
            .unwrap();
        let r2 = height_variation_residual(&e.solution, &e.coeff, Vec2::ZERO, r, 1.0, 2e-3, &tight)
            .unwrap();
        let rate = r1.abs() / r2.abs();
        assert!(
            (3.3..=4.7).contains(&rate),
            "rate {rate} (residuals {r1:.3e}, {r2:.3e})"
        );
    }

    #[test]
    fn height_variation_exact_for_quadratic_weight() {
        // u = 1 interior, alpha = 0: H = pi r^2 so the central difference is
        // exact and the residual is pure quadrature noise
        let u = const_one(Region::WholePlane);
        let id = CoefficientField::identity();
        let res = height_variation_residual(&u, &id, Vec2::ZERO, 0.5, 0.0, 1e-3, &q()).unwrap();
        assert!(res.abs() < 1e-8, "residual {res}");
    }

    #[test]
    fn energy_variation_slack_vanishes_for_flat_harmonic() {
        let e = catalog_homogeneous(2).unwrap();
        let r = 0.25;
        let dr = variation_step(r, 1e-9);
        let rep =
            energy_variation_check(&e.solution, &e.coeff, Vec2::ZERO, r, 1.0, dr, &q()).unwrap();
        assert!(
            rep.slack.abs() <= 1e-8 * rep.lhs.abs().max(1.0),
            "slack {} vs lhs {}",
            rep.slack,
            rep.lhs
        );
        assert!(rep.c_witness < 1e-6);
    }

    #[test]
    fn energy_variation_disk_eigen_bounded_witness() {
        let e = catalog_disk_eigen(1, 1).unwrap();
        let alpha = e.solution.alpha_default();
        let r = 0.3;
        let dr = variation_step(r, 1e-9);
        let rep =
            energy_variation_check(&e.solution, &e.coeff, Vec2::ZERO, r, alpha, dr, &q()).unwrap();
        assert!(
            rep.slack >= -1e-6 * rep.lhs.abs().max(1.0) - rep.c_witness * e.solution.m_bound * r,
            "slack {}",
            rep.slack
        );
        assert!(rep.c_witness.is_finite());
        assert!(rep.c_witness < 10.0, "witness C = {}", rep.c_witness);
    }

    #[test]
    fn energy_variation_refuses_zero_field() {
        let u = SolutionField {
            field: Arc::new(ConstField(0.0)),
            region: Region::WholePlane,
            potential: Potential::Zero,
            m_bound: 1.0,
            kind: FieldKind::ClosedForm,
        };
        let id = CoefficientField::identity();
        assert!(energy_variation_check(&u, &id, Vec2::ZERO, 0.3, 1.0, 1e-3, &q()).is_err());
    }

    #[test]
    fn trace_csv_schema() {
        let e = catalog_homogeneous(1).unwrap();
        let tr = frequency_trace(
            &e.solution,
            &e.coeff,
            Vec2::ZERO,
            &[0.1, 0.2],
            1.0,
            false,
            &q(),
        )
        .unwrap();
        let csv = tr.to_csv();
        assert!(csv.starts_with("r,H,I,N,valid\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
