//! The verification layer: adjusted-frequency monotonicity, three-sphere
//! inequalities, the growth lemma and its dyadic iteration, vanishing-order
//! estimation, and the constants ledger.
//!
//! Universal constants are existential in the underlying theory; the policy
//! here is fit-and-record. Every report carries the minimal constants that
//! make the claimed display hold on the tested data, and the acceptance
//! suite pins those fitted values with headroom.

pub mod growth;
pub mod ledger;
pub mod three_sphere;

pub use growth::{growth_step, GrowthReport};
pub use ledger::{constants_ledger, ConstantsLedger};
pub use three_sphere::{three_sphere_h, three_sphere_sup, ThreeSphereReport};

use crate::error::{Error, Result};
use crate::fields::{CatalogEntry, SolutionField};
use crate::functionals::{plain_g, FrequencyTrace, DIM};
use crate::geometry::{DiniDomain, Region};
use crate::num::Vec2;
use crate::quadrature::QuadParams;

// ---------------------------------------------------------------------------
// Adjusted-frequency monotonicity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct MonotonicityReport {
    pub c1: f64,
    pub c2: f64,
    /// Worst normalized decrease of the adjusted frequency at (c1, c2).
    pub max_violation: f64,
    /// Worst normalized decrease of the bare N(r).
    pub raw_violation: f64,
    pub slack: f64,
    pub pass: bool,
}

fn adjusted_violation(rs: &[f64], ns: &[f64], c1: f64, c2: f64, m: f64) -> f64 {
    let g: Vec<f64> = rs
        .iter()
        .zip(ns)
        .map(|(&r, &n)| (c1 * r).exp() * (n + c2 * m * r * r))
        .collect();
    let mut worst = f64::NEG_INFINITY;
    for w in g.windows(2) {
        let scale = w[0].abs().max(w[1].abs()).max(1e-300);
        worst = worst.max((w[0] - w[1]) / scale);
    }
    worst
}

/// Finds minimal (C1, C2) in [0, 1e3]^2 making r -> e^{C1 r}(N + C2 M r^2)
/// nondecreasing up to `slack` relative: C1 scans a logarithmic grid from
/// zero upward and C2 is bisected at the first feasible C1.
pub fn fit_monotonicity(trace: &FrequencyTrace, m: f64, slack: f64) -> Result<MonotonicityReport> {
    let mut rs = Vec::new();
    let mut ns = Vec::new();
    for k in 0..trace.radii.len() {
        if trace.valid[k] && trace.n[k].is_finite() {
            rs.push(trace.radii[k]);
            ns.push(trace.n[k]);
        }
    }
    if rs.len() < 8 {
        return Err(Error::domain(format!(
            "fit_monotonicity needs >= 8 valid radii, have {}",
            rs.len()
        )));
    }
    let raw_violation = adjusted_violation(&rs, &ns, 0.0, 0.0, m);
    const C_MAX: f64 = 1e3;
    let mut c1_grid = vec![0.0];
    for i in 0..=30 {
        c1_grid.push(10f64.powf(-3.0 + 6.0 * i as f64 / 30.0));
    }
    let mut best: Option<(f64, f64)> = None;
    let mut min_violation_seen = raw_violation;
    for &c1 in &c1_grid {
        let v_max = adjusted_violation(&rs, &ns, c1, C_MAX, m);
        min_violation_seen = min_violation_seen.min(v_max);
        if !v_max.is_finite() || v_max > slack {
            continue;
        }
        // violation is nonincreasing in c2; bisect the minimal feasible c2
        let (mut lo, mut hi) = (0.0, C_MAX);
        if adjusted_violation(&rs, &ns, c1, 0.0, m) <= slack {
            hi = 0.0;
        }
        for _ in 0..60 {
            if hi - lo <= 1e-6 * (1.0 + hi) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if adjusted_violation(&rs, &ns, c1, mid, m) <= slack {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        best = Some((c1, hi));
        break;
    }
    match best {
        Some((c1, c2)) => Ok(MonotonicityReport {
            c1,
            c2,
            max_violation: adjusted_violation(&rs, &ns, c1, c2, m),
            raw_violation,
            slack,
            pass: true,
        }),
        None => Ok(MonotonicityReport {
            c1: f64::NAN,
            c2: f64::NAN,
            max_violation: min_violation_seen,
            raw_violation,
            slack,
            pass: false,
        }),
    }
}

// ---------------------------------------------------------------------------
// Sup norms by dense sampling
// ---------------------------------------------------------------------------

/// Sup of |u| over region cap B_r(z0) by polar sampling (boundary ring
/// included) with doubling refinement until stable to 1e-4 relative.
pub fn sup_norm(u: &SolutionField, z0: Vec2, r: f64) -> f64 {
    let mut n_theta = 256;
    let mut n_s = 48;
    let mut prev = sup_norm_fixed(u, z0, r, n_theta, n_s);
    loop {
        n_theta *= 2;
        n_s *= 2;
        let cur = sup_norm_fixed(u, z0, r, n_theta, n_s);
        if (cur - prev).abs() <= 1e-4 * cur.abs().max(1e-300) || n_theta >= 2048 {
            return cur;
        }
        prev = cur;
    }
}

fn sup_norm_fixed(u: &SolutionField, z0: Vec2, r: f64, n_theta: usize, n_s: usize) -> f64 {
    let mut best = 0.0f64;
    for j in 0..=n_s {
        let s = r * j as f64 / n_s as f64;
        for i in 0..n_theta {
            let th = std::f64::consts::TAU * i as f64 / n_theta as f64;
            let p = z0 + Vec2::from_polar(s, th);
            if u.region.level(p) <= 0.0 {
                best = best.max(u.eval(p).abs());
            }
        }
    }
    best
}

/// Witness for the small-scale sup lower bound: epsilon = sup over
/// Omega cap B_{r0/4}(z0) of |u|, requiring sup over Omega cap B_1 >= 1.
pub fn small_sup_bound(u: &SolutionField, z0: Vec2, r0: f64) -> Result<f64> {
    let unit_sup = sup_norm(u, z0, 1.0);
    if unit_sup < 1.0 - 1e-6 {
        return Err(Error::domain(format!(
            "small_sup_bound requires sup over the unit ball >= 1 (got {unit_sup}); rescale u first"
        )));
    }
    let eps = sup_norm(u, z0, 0.25 * r0);
    if eps == 0.0 {
        return Err(Error::domain("small_sup_bound: u vanishes on the ball"));
    }
    Ok(eps)
}

/// Least-squares fit of log eps = log L1 - L2 (sqrt(M) + 1) over a family.
pub fn fit_small_sup_family(points: &[(f64, f64)]) -> (f64, f64) {
    // x = sqrt(M) + 1, y = log eps
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(sqrt_m, eps) in points {
        let x = sqrt_m + 1.0;
        let y = eps.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (intercept.exp(), -slope)
}

// ---------------------------------------------------------------------------
// Dyadic iteration and vanishing order
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct OrderEstimate {
    pub anchor: Vec2,
    pub alpha: f64,
    pub radii: Vec<f64>,
    pub g_values: Vec<f64>,
    /// Least-squares slope of log G against log r.
    pub slope: f64,
    pub intercept: f64,
    /// Max absolute residual of the log-log fit.
    pub residual: f64,
    /// (slope - n - 2 alpha)/2: the vanishing order read off G.
    pub fitted_order: f64,
    /// Max over scales of log(G(s)/G(s/2)) / sqrt(M).
    pub cbar_witness: f64,
    /// exp(c2 sum Lambda(r0 / 2^i)); 1 for interior anchors.
    pub k0: f64,
}

/// Computes G at r0 / 2^q for q = 0..=q_max, checks the successive
/// log-ratios, and reads the vanishing order off the log-log slope.
#[allow(clippy::too_many_arguments)]
pub fn dyadic_iteration(
    u: &SolutionField,
    z0: Vec2,
    r0: f64,
    q_max: usize,
    alpha: f64,
    m_bound: f64,
    domain_for_k0: Option<(&DiniDomain, f64)>,
    params: &QuadParams,
) -> Result<OrderEstimate> {
    if !r0.is_finite() || r0 <= 0.0 {
        return Err(Error::domain("dyadic_iteration requires r0 > 0"));
    }
    let mut radii = Vec::new();
    let mut gs = Vec::new();
    for q in 0..=q_max {
        let s = r0 * 2f64.powi(-(q as i32));
        let g = plain_g(u, z0, s, alpha, params)?;
        if g <= 1e-290 {
            break; // underflow: stop the cascade early
        }
        radii.push(s);
        gs.push(g);
    }
    if gs.len() < 4 {
        return Err(Error::domain(format!(
            "dyadic_iteration: only {} usable scales before underflow",
            gs.len()
        )));
    }
    let xs: Vec<f64> = radii.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = gs.iter().map(|g| g.ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    let sqrt_m = m_bound.sqrt();
    let mut cbar_witness = 0.0f64;
    for w in gs.windows(2) {
        cbar_witness = cbar_witness.max((w[0] / w[1]).ln() / sqrt_m);
    }
    let k0 = match domain_for_k0 {
        None => 1.0,
        Some((domain, c2_slope)) => {
            let mut sum = 0.0;
            let mut s = r0;
            for _ in 0..200 {
                match domain.lambda_of(s) {
                    Ok(l) => sum += l,
                    Err(_) => break,
                }
                s *= 0.5;
                if s < 1e-300 {
                    break;
                }
            }
            (c2_slope * sum).exp()
        }
    };
    Ok(OrderEstimate {
        anchor: z0,
        alpha,
        radii,
        g_values: gs,
        slope,
        intercept,
        residual,
        fitted_order: (slope - DIM - 2.0 * alpha) / 2.0,
        cbar_witness,
        k0,
    })
}

/// One row of the order-versus-M family scan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OrderScanRow {
    pub name: String,
    pub kappa: f64,
    pub m: f64,
    pub sqrt_m: f64,
    pub fitted_order: f64,
    /// fitted_order / (1 + sqrt(M)).
    pub ratio: f64,
}

/// Runs the dyadic iteration per entry and tabulates
/// fitted_order / (1 + sqrt(M)).
pub fn order_vs_m_scan(
    family: &[CatalogEntry],
    r0: f64,
    q_max: usize,
) -> Result<Vec<OrderScanRow>> {
    let mut rows = Vec::with_capacity(family.len());
    for e in family {
        let alpha = e.solution.alpha_default();
        let est = dyadic_iteration(
            &e.solution,
            e.anchor,
            r0,
            q_max,
            alpha,
            e.solution.m_bound,
            None,
            &e.solution.quad_params(),
        )?;
        let sqrt_m = e.solution.m_bound.sqrt();
        rows.push(OrderScanRow {
            name: e.name.clone(),
            kappa: e.kappa as f64,
            m: e.solution.m_bound,
            sqrt_m,
            fitted_order: est.fitted_order,
            ratio: est.fitted_order / (1.0 + sqrt_m),
        });
    }
    Ok(rows)
}

/// CSV for the family scan: kappa,M,sqrtM,fitted_order,ratio.
pub fn order_scan_csv(rows: &[OrderScanRow]) -> String {
    let data: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.kappa, r.m, r.sqrt_m, r.fitted_order, r.ratio])
        .collect();
    crate::report::csv_table(&["kappa", "M", "sqrtM", "fitted_order", "ratio"], &data)
}

/// Log-spaced radius grid used by trace-based fits.
pub fn geometric_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    let mut r = lo;
    (0..count)
        .map(|_| {
            let v = r;
            r *= ratio;
            v
        })
        .collect()
}

/// True when an interior anchor's ball stays inside the region.
pub fn interior_ball_ok(region: &Region, z0: Vec2, r: f64) -> bool {
    region.level(z0) < -r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CoefficientField;
    use crate::fields::{catalog_disk_eigen, catalog_homogeneous};
    use crate::functionals::frequency_trace;

    fn q() -> QuadParams {
        QuadParams::default()
    }

    #[test]
    fn monotonicity_constant_n_needs_nothing() {
        let e = catalog_homogeneous(2).unwrap();
        let radii = geometric_radii(0.05, 0.4, 12);
        let tr =
            frequency_trace(&e.solution, &e.coeff, Vec2::ZERO, &radii, 1.0, false, &q()).unwrap();
        let rep = fit_monotonicity(&tr, 1.0, 1e-8).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.c1, 0.0);
        assert!(rep.c2 <= 1e-5, "c2 = {}", rep.c2);
    }

    #[test]
    fn monotonicity_disk_eigen_finds_constants() {
        let e = catalog_disk_eigen(1, 1).unwrap();
        let alpha = e.solution.alpha_default();
        let radii = geometric_radii(0.04, 0.45, 14);
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
        let rep = fit_monotonicity(&tr, e.solution.m_bound, 1e-8).unwrap();
        assert!(rep.pass, "violation {}", rep.max_violation);
        assert!(rep.c1 < 1e3 && rep.c2 < 1e3);
    }

    #[test]
    fn monotonicity_adversarial_reports_failure() {
        // a fabricated strongly decreasing trace that no (C1, C2) in the box
        // can repair
        let radii: Vec<f64> = (1..=10).map(|i| 1e-4 * i as f64).collect();
        let tr = FrequencyTrace {
            z0: Vec2::ZERO,
            alpha: 1.0,
            radii: radii.clone(),
            h: vec![1.0; 10],
            i: vec![0.0; 10],
            n: radii.iter().map(|r| -1e6 * r).collect(),
            valid: vec![true; 10],
            framed: false,
            quad_angular: 64,
            quad_radial: 24,
            quad_tol: 1e-9,
        };
        let rep = fit_monotonicity(&tr, 1.0, 1e-8).unwrap();
        assert!(!rep.pass);
        assert!(rep.max_violation > 0.0);
    }

    #[test]
    fn monotonicity_scale_invariance() {
        let e = catalog_disk_eigen(2, 1).unwrap();
        let alpha = e.solution.alpha_default();
        let radii = geometric_radii(0.05, 0.4, 10);
        let t1 = frequency_trace(
            &e.solution,
            &e.coeff,
            Vec2::ZERO,
            &radii,
            alpha,
            false,
            &q(),
        )
        .unwrap();
        let scaled = e.solution.scaled(123.0);
        let t2 =
            frequency_trace(&scaled, &e.coeff, Vec2::ZERO, &radii, alpha, false, &q()).unwrap();
        let r1 = fit_monotonicity(&t1, e.solution.m_bound, 1e-8).unwrap();
        let r2 = fit_monotonicity(&t2, e.solution.m_bound, 1e-8).unwrap();
        assert!((r1.c1 - r2.c1).abs() <= 1e-9 + 1e-6 * r1.c1.abs());
        assert!((r1.c2 - r2.c2).abs() <= 1e-4 + 1e-3 * r1.c2.abs());
    }

    #[test]
    fn sup_norm_homogeneous_closed_form() {
        // sup |Im z^kappa| over the half-plane ball is r^kappa
        for kappa in [1u32, 3] {
            let e = catalog_homogeneous(kappa).unwrap();
            for &r in &[0.3, 1.0] {
                let got = sup_norm(&e.solution, Vec2::ZERO, r);
                let want = r.powi(kappa as i32);
                assert!(
                    (got - want).abs() <= 5e-4 * want,
                    "kappa {kappa} r {r}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn small_sup_bound_homogeneous_exact() {
        let e = catalog_homogeneous(3).unwrap();
        let r0 = 0.2;
        let eps = small_sup_bound(&e.solution, Vec2::ZERO, r0).unwrap();
        let want = (0.25 * r0).powi(3);
        assert!((eps - want).abs() <= 1e-3 * want);
    }

    #[test]
    fn small_sup_bound_const_one() {
        use crate::coefficients::Potential;
        use crate::fields::{ConstField, FieldKind};
        use std::sync::Arc;
        let u = SolutionField {
            field: Arc::new(ConstField(1.0)),
            region: Region::WholePlane,
            potential: Potential::Zero,
            m_bound: 1.0,
            kind: FieldKind::ClosedForm,
        };
        let eps = small_sup_bound(&u, Vec2::ZERO, 0.1).unwrap();
        assert!((eps - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dyadic_iteration_exact_power_law() {
        let e = catalog_homogeneous(3).unwrap();
        let est = dyadic_iteration(&e.solution, Vec2::ZERO, 0.2, 6, 1.0, 1.0, None, &q()).unwrap();
        assert!(
            (est.fitted_order - 3.0).abs() < 1e-6,
            "order {}",
            est.fitted_order
        );
        assert!(est.residual < 1e-8);
    }

    #[test]
    fn dyadic_iteration_constant_field_order_zero() {
        use crate::coefficients::Potential;
        use crate::fields::{ConstField, FieldKind};
        use std::sync::Arc;
        let u = SolutionField {
            field: Arc::new(ConstField(2.5)),
            region: Region::WholePlane,
            potential: Potential::Zero,
            m_bound: 1.0,
            kind: FieldKind::ClosedForm,
        };
        let est = dyadic_iteration(&u, Vec2::ZERO, 0.3, 5, 1.0, 1.0, None, &q()).unwrap();
        assert!(est.fitted_order.abs() < 1e-8);
    }

    #[test]
    fn dyadic_iteration_disk_eigen_near_kappa() {
        let e = catalog_disk_eigen(2, 1).unwrap();
        let alpha = e.solution.alpha_default();
        let est = dyadic_iteration(
            &e.solution,
            Vec2::ZERO,
            0.1,
            6,
            alpha,
            e.solution.m_bound,
            None,
            &q(),
        )
        .unwrap();
        assert!(
            (est.fitted_order - 2.0).abs() <= 0.05,
            "order {}",
            est.fitted_order
        );
    }

    #[test]
    fn order_scan_eigenfamily_ratios_below_one() {
        let family: Vec<_> = (1..=4u32)
            .map(|k| catalog_disk_eigen(k, 1).unwrap())
            .collect();
        let rows = order_vs_m_scan(&family, 0.1, 6).unwrap();
        for row in &rows {
            assert!(row.ratio < 1.0, "{}: ratio {}", row.name, row.ratio);
            assert!((row.fitted_order - row.kappa).abs() <= 0.05);
        }
        // kappa = 1: ratio = 1/(1 + j_{1,1}) ~ 0.207
        assert!((rows[0].ratio - 1.0 / (1.0 + 3.8317059702)).abs() < 5e-3);
    }

    #[test]
    fn small_sup_family_regression() {
        // eigenfamily: log eps should be close to linear in sqrt(M) + 1
        let mut pts = Vec::new();
        for k in 1..=4u32 {
            let e = catalog_disk_eigen(k, 1).unwrap();
            let eps = {
                // rescale so sup over B_1 equals 1
                let s = sup_norm(&e.solution, Vec2::ZERO, 1.0);
                let u = e.solution.scaled(1.0 / s);
                small_sup_bound(&u, Vec2::ZERO, 0.2).unwrap()
            };
            pts.push((e.solution.m_bound.sqrt(), eps));
        }
        let (l1, l2) = fit_small_sup_family(&pts);
        assert!(l1 > 0.0 && l2 > 0.0, "L1 {l1} L2 {l2}");
        // every family member obeys eps >= L1 exp(-L2 (sqrt M + 1)) with a
        // modest safety factor on the fitted pair
        for &(sm, eps) in &pts {
            assert!(eps >= 0.5 * l1 * (-l2 * (sm + 1.0)).exp());
        }
    }

    #[test]
    fn radii_helper_and_interior_check() {
        let rs = geometric_radii(0.01, 0.16, 5);
        assert_eq!(rs.len(), 5);
        assert!((rs[4] - 0.16).abs() < 1e-12);
        let e = catalog_homogeneous(1).unwrap();
        let id = CoefficientField::identity();
        let _ = id;
        assert!(!interior_ball_ok(&e.solution.region, Vec2::ZERO, 0.1));
        assert!(interior_ball_ok(
            &e.solution.region,
            Vec2::new(0.0, -0.5),
            0.1
        ));
    }
}
