//! Weighted quadrature over Omega cap B_r(z0) for integrands carrying the
//! degenerate factor (r^2 - |x - z0|^2)^alpha, alpha > -1.
//!
//! The rule is polar about z0. On rays that reach the sphere the substitution
//! s^2 = r^2 t turns the radial integral into a Gauss-Jacobi form with weight
//! (1 - t)^alpha, which the rule integrates exactly; on rays clipped by the
//! boundary the weight is smooth and is evaluated pointwise under
//! Gauss-Legendre. Angular integration is composite Gauss-Legendre on 16
//! fixed segments of [0, 2pi). Resolution doubles until two successive
//! refinements agree to the requested relative tolerance.

use crate::error::{Error, Result};
use crate::geometry::Region;
use crate::num::{beta, bisect, pairwise_sum, Vec2};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights on (0, 1) against the weight (1 - t)^alpha t^beta.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Builds the m-point Gauss-Jacobi rule on (0, 1) for the weight
/// (1 - t)^alpha t^beta_exp, exact for polynomials of degree <= 2m - 1.
/// Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal
/// recurrence matrix (found by Sturm bisection), weights come from inverse
/// iteration on the first eigenvector component.
pub fn gauss_jacobi(alpha: f64, beta_exp: f64, m: usize) -> Result<Arc<GaussRule>> {
    if m == 0 {
        return Err(Error::domain("gauss_jacobi needs at least one node"));
    }
    if alpha <= -1.0 || beta_exp <= -1.0 || !alpha.is_finite() || !beta_exp.is_finite() {
        return Err(Error::domain("gauss_jacobi exponents must exceed -1"));
    }
    type RuleCache = Mutex<HashMap<(u64, u64, usize), Arc<GaussRule>>>;
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (alpha.to_bits(), beta_exp.to_bits(), m);
    if let Some(rule) = cache.lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build_jacobi_rule(alpha, beta_exp, m)?);
    cache.lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// Gauss-Legendre on (0, 1): the alpha = beta = 0 case.
pub fn gauss_legendre(m: usize) -> Result<Arc<GaussRule>> {
    gauss_jacobi(0.0, 0.0, m)
}

#[allow(clippy::needless_range_loop)]
fn build_jacobi_rule(a: f64, b: f64, m: usize) -> Result<GaussRule> {
    // monic three-term recurrence for Jacobi polynomials on [-1, 1]
    // with weight (1 - x)^a (1 + x)^b
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m]; // off[k] couples k-1 and k, off[0] unused
    diag[0] = (b - a) / (a + b + 2.0);
    for k in 1..m {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        diag[k] = (b * b - a * a) / (s * (s + 2.0));
        let bk = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0))
        };
        if !bk.is_finite() || bk <= 0.0 {
            return Err(Error::numerical(format!(
                "jacobi recurrence breakdown at k = {k} (a = {a}, b = {b})"
            )));
        }
        off[k] = bk.sqrt();
    }
    // total mass of the (0,1) weight
    let mu0 = beta(b + 1.0, a + 1.0);
    if m == 1 {
        return Ok(GaussRule {
            nodes: vec![(diag[0] + 1.0) / 2.0],
            weights: vec![mu0],
        });
    }
    let eigs = tridiag_eigenvalues(&diag, &off);
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for &lambda in &eigs {
        let v = tridiag_inverse_iteration(&diag, &off, lambda);
        nodes.push((lambda + 1.0) / 2.0);
        weights.push(mu0 * v[0] * v[0]);
    }
    for &w in &weights {
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::numerical("non-positive quadrature weight"));
        }
    }
    Ok(GaussRule { nodes, weights })
}

/// All eigenvalues (ascending) of a symmetric tridiagonal matrix by Sturm
/// sequence bisection.
#[allow(clippy::needless_range_loop)]
fn tridiag_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let radius =
            off.get(i).copied().unwrap_or(0.0).abs() + off.get(i + 1).copied().unwrap_or(0.0).abs();
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let span = (hi - lo).max(1e-300);
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..m {
            if q == 0.0 {
                q = 1e-300;
            }
            q = diag[i] - x - off[i] * off[i] / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    (0..m)
        .map(|k| {
            let (mut a, mut b) = (lo - 1e-12 * span, hi + 1e-12 * span);
            for _ in 0..120 {
                let mid = 0.5 * (a + b);
                if count_below(mid) <= k {
                    a = mid;
                } else {
                    b = mid;
                }
                if b - a <= 1e-15 * span {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Tridiagonal inverse iteration: three solves of (T - lambda I) v = b with
/// partial pivoting, from a seeded pseudo-random start (a constant start is
/// exactly orthogonal to the antisymmetric eigenvectors of symmetric rules).
#[allow(clippy::manual_swap, clippy::needless_range_loop)]
fn tridiag_inverse_iteration(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let m = diag.len();
    let scale: f64 = diag.iter().map(|d| d.abs()).fold(0.0, f64::max) + 1.0;
    let mut rng = crate::num::SplitMix64::new(0x51ab ^ (m as u64) ^ lambda.to_bits());
    let mut v: Vec<f64> = (0..m).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let n0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= n0;
    }
    for _ in 0..3 {
        // bands: sub[i] (i,i-1), d0[i] (i,i), d1[i] (i,i+1), d2 fill-in (i,i+2)
        let mut sub = vec![0.0; m];
        let mut d0 = vec![0.0; m];
        let mut d1 = vec![0.0; m];
        let mut d2 = vec![0.0; m];
        for i in 0..m {
            d0[i] = diag[i] - lambda;
            if d0[i].abs() < 1e-16 * scale {
                d0[i] = 1e-16 * scale * if d0[i] < 0.0 { -1.0 } else { 1.0 };
            }
            if i + 1 < m {
                d1[i] = off[i + 1];
                sub[i + 1] = off[i + 1];
            }
        }
        let mut x = v.clone();
        // forward elimination with row swaps
        for i in 0..m - 1 {
            if sub[i + 1].abs() > d0[i].abs() {
                std::mem::swap(&mut d0[i], &mut sub[i + 1]);
                let tmp = d1[i];
                d1[i] = d0[i + 1];
                d0[i + 1] = tmp;
                let tmp = d2[i];
                d2[i] = d1[i + 1];
                d1[i + 1] = tmp;
                x.swap(i, i + 1);
            }
            if d0[i].abs() < 1e-16 * scale {
                d0[i] = 1e-16 * scale * if d0[i] < 0.0 { -1.0 } else { 1.0 };
            }
            let factor = sub[i + 1] / d0[i];
            d0[i + 1] -= factor * d1[i];
            d1[i + 1] -= factor * d2[i];
            x[i + 1] -= factor * x[i];
        }
        // back substitution
        let mut sol = vec![0.0; m];
        for i in (0..m).rev() {
            let mut rhs = x[i];
            if i + 1 < m {
                rhs -= d1[i] * sol[i + 1];
            }
            if i + 2 < m {
                rhs -= d2[i] * sol[i + 2];
            }
            if d0[i].abs() < 1e-16 * scale {
                d0[i] = 1e-16 * scale * if d0[i] < 0.0 { -1.0 } else { 1.0 };
            }
            sol[i] = rhs / d0[i];
        }
        let norm = sol.iter().map(|s| s * s).sum::<f64>().sqrt();
        for (vi, si) in v.iter_mut().zip(&sol) {
            *vi = si / norm;
        }
    }
    v
}

// ---------------------------------------------------------------------------
// Ray clipping
// ---------------------------------------------------------------------------

/// First boundary crossing along the ray z0 + s (cos theta, sin theta),
/// s in (0, r]. Returns (rho_max, clipped).
pub fn ray_clip(region: &Region, z0: Vec2, theta: f64, r: f64) -> Result<(f64, bool)> {
    let dir = Vec2::new(theta.cos(), theta.sin());
    let g = |s: f64| region.level(z0 + dir * s);
    let g0 = g(0.0);
    if g0 > 1e-12 * r {
        return Err(Error::domain(
            "ray_clip: center lies outside the closed region",
        ));
    }
    const STEPS: usize = 192;
    let mut sign_changes = 0;
    let mut first_cross: Option<(f64, f64)> = None;
    let mut prev_s = 0.0;
    let mut prev_g = g0;
    for i in 1..=STEPS {
        let s = r * i as f64 / STEPS as f64;
        let gs = g(s);
        if prev_g.signum() != gs.signum() && gs != 0.0 && prev_g != 0.0 {
            sign_changes += 1;
            if first_cross.is_none() && gs > 0.0 {
                first_cross = Some((prev_s, s));
            }
        } else if prev_g <= 0.0 && gs > 0.0 && first_cross.is_none() {
            first_cross = Some((prev_s, s));
            sign_changes += 1;
        }
        prev_s = s;
        prev_g = gs;
    }
    if sign_changes > 4 {
        return Err(Error::numerical(format!(
            "ray_clip: {sign_changes} boundary crossings at theta = {theta}; chart too wild at this scale"
        )));
    }
    match first_cross {
        None => Ok((r, false)),
        Some((a, b)) => {
            let rho = bisect(a, b, 1e-12 * r, g);
            Ok((rho, true))
        }
    }
}

/// Per-angle clipping table for a polar rule about z0.
#[derive(Debug, Clone)]
pub struct RayTable {
    pub angles: Vec<f64>,
    pub ang_weights: Vec<f64>,
    pub rho_max: Vec<f64>,
    pub clipped: Vec<bool>,
}

const ANGULAR_SEGMENTS: usize = 16;

/// Builds the composite-Gauss-Legendre angular nodes and their clipped radii.
pub fn build_ray_table(region: &Region, z0: Vec2, r: f64, angular: usize) -> Result<RayTable> {
    let per_seg = (angular / ANGULAR_SEGMENTS).max(1);
    let gl = gauss_legendre(per_seg)?;
    let seg_width = std::f64::consts::TAU / ANGULAR_SEGMENTS as f64;
    let mut angles = Vec::with_capacity(per_seg * ANGULAR_SEGMENTS);
    let mut ang_weights = Vec::with_capacity(per_seg * ANGULAR_SEGMENTS);
    for seg in 0..ANGULAR_SEGMENTS {
        let base = seg as f64 * seg_width;
        for (t, w) in gl.nodes.iter().zip(&gl.weights) {
            angles.push(base + t * seg_width);
            ang_weights.push(w * seg_width);
        }
    }
    // fast paths: regions where clipping is available in closed form
    let unclipped = match region {
        Region::WholePlane => true,
        Region::Disk { center, radius } => (z0 - *center).norm() + r <= *radius,
        _ => false,
    };
    let flat_depth = match region {
        Region::Chart(d) if d.chart.flat => {
            if z0.y > 1e-12 * r {
                return Err(Error::domain(
                    "ray_clip: center lies outside the closed region",
                ));
            }
            Some(-z0.y)
        }
        _ => None,
    };
    let mut rho_max = Vec::with_capacity(angles.len());
    let mut clipped = Vec::with_capacity(angles.len());
    for &th in &angles {
        let (rho, c) = if unclipped {
            (r, false)
        } else if let Some(depth) = flat_depth {
            let sin_th = th.sin();
            if sin_th > 0.0 && depth < r * sin_th {
                ((depth / sin_th).max(0.0), true)
            } else {
                (r, false)
            }
        } else {
            ray_clip(region, z0, th, r)?
        };
        rho_max.push(rho);
        clipped.push(c);
    }
    Ok(RayTable {
        angles,
        ang_weights,
        rho_max,
        clipped,
    })
}

/// Resolution knobs for the ball integrator.
#[derive(Debug, Clone, Copy)]
pub struct QuadParams {
    pub angular: usize,
    pub radial: usize,
    pub tol: f64,
    pub max_angular: usize,
    pub max_radial: usize,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            angular: 64,
            radial: 24,
            tol: 1e-9,
            max_angular: 1024,
            max_radial: 192,
        }
    }
}

impl QuadParams {
    /// Params suitable for grid-backed fields: the refinement is capped at
    /// the grid's own accuracy.
    pub fn for_grid() -> Self {
        QuadParams {
            angular: 128,
            radial: 48,
            tol: 1e-6,
            max_angular: 512,
            max_radial: 96,
        }
    }
}

/// Integral of f(x) (r^2 - |x - z0|^2)^alpha over Omega cap B_r(z0),
/// refined by doubling until two successive levels agree to `tol` relative.
pub fn integrate_ball(
    region: &Region,
    z0: Vec2,
    r: f64,
    alpha: f64,
    params: &QuadParams,
    f: &dyn Fn(Vec2) -> f64,
) -> Result<f64> {
    if !alpha.is_finite() || alpha <= -1.0 {
        return Err(Error::domain("integrate_ball requires alpha > -1"));
    }
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::domain("integrate_ball requires r > 0"));
    }
    let mut angular = params.angular;
    let mut radial = params.radial;
    let mut prev = integrate_ball_fixed(region, z0, r, alpha, angular, radial, f)?;
    loop {
        let next_a = (angular * 2).min(params.max_angular);
        let next_r = (radial * 2).min(params.max_radial);
        if next_a == angular && next_r == radial {
            return Ok(prev);
        }
        angular = next_a;
        radial = next_r;
        let cur = integrate_ball_fixed(region, z0, r, alpha, angular, radial, f)?;
        if (cur - prev).abs() <= params.tol * (cur.abs() + 1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
}

/// Single-resolution evaluation of the weighted ball integral.
pub fn integrate_ball_fixed(
    region: &Region,
    z0: Vec2,
    r: f64,
    alpha: f64,
    angular: usize,
    radial: usize,
    f: &dyn Fn(Vec2) -> f64,
) -> Result<f64> {
    let table = build_ray_table(region, z0, r, angular)?;
    let jac = gauss_jacobi(alpha, 0.0, radial)?;
    let gl = gauss_legendre(radial)?;
    let full_factor = 0.5 * r.powf(2.0 * alpha + 2.0);
    let mut contributions = Vec::with_capacity(table.angles.len());
    for idx in 0..table.angles.len() {
        let th = table.angles[idx];
        let dir = Vec2::new(th.cos(), th.sin());
        let value = if !table.clipped[idx] {
            // s^2 = r^2 t maps the weighted radial integral to Jacobi form
            let mut acc = Vec::with_capacity(jac.nodes.len());
            for (t, w) in jac.nodes.iter().zip(&jac.weights) {
                let s = r * t.sqrt();
                acc.push(w * f(z0 + dir * s));
            }
            full_factor * pairwise_sum(&acc)
        } else {
            let rho = table.rho_max[idx];
            if rho <= 0.0 {
                0.0
            } else {
                let mut acc = Vec::with_capacity(gl.nodes.len());
                for (t, w) in gl.nodes.iter().zip(&gl.weights) {
                    let s = rho * t;
                    let weight = (r * r - s * s).max(0.0).powf(alpha);
                    acc.push(w * rho * f(z0 + dir * s) * weight * s);
                }
                pairwise_sum(&acc)
            }
        };
        contributions.push(table.ang_weights[idx] * value);
    }
    Ok(pairwise_sum(&contributions))
}

/// Closed form of the full-ball weighted volume in the plane:
/// integral over B_r of (r^2 - |x|^2)^alpha dx = pi r^{2 alpha + 2}/(alpha+1).
pub fn full_ball_weighted_volume(r: f64, alpha: f64) -> f64 {
    std::f64::consts::PI * r.powf(2.0 * alpha + 2.0) / (alpha + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryChart, DiniDomain, PowerCuspShape};
    use std::sync::Arc;

    /// Independent beta oracle: B(k+1, a+1) = k! / prod_{j=0..k} (a+1+j).
    fn beta_int_oracle(k: usize, a: f64) -> f64 {
        let mut v = 1.0 / (a + 1.0);
        for j in 1..=k {
            v *= j as f64 / (a + 1.0 + j as f64);
        }
        v
    }

    #[test]
    fn jacobi_m1_linear_weight_moment() {
        // alpha = 1, beta = 0, m = 1: integral of (1 - t) dt = 1/2
        let rule = gauss_jacobi(1.0, 0.0, 1).unwrap();
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 0.5).abs() < 1e-14);
    }

    #[test]
    fn legendre_m2_integrates_t_squared() {
        let rule = gauss_legendre(2).unwrap();
        let got: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(t, w)| w * t * t)
            .sum();
        assert!((got - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_moments_match_beta_oracle() {
        // alpha = 3.2, m = 8: moments t^k (1-t)^{3.2} for k <= 15
        let rule = gauss_jacobi(3.2, 0.0, 8).unwrap();
        for k in 0..=15usize {
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(t, w)| w * t.powi(k as i32))
                .sum();
            let want = beta_int_oracle(k, 3.2);
            assert!(
                (got - want).abs() < 1e-12,
                "k = {k}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn jacobi_nodes_inside_and_weights_positive() {
        for &(a, b, m) in &[
            (0.0, 0.0, 24),
            (3.0, 0.0, 48),
            (10.5, 0.0, 96),
            (0.5, 0.5, 16),
        ] {
            let rule = gauss_jacobi(a, b, m).unwrap();
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                assert!(t > 0.0 && t < 1.0);
                assert!(w > 0.0);
            }
        }
    }

    #[test]
    fn ray_clip_flat_chart() {
        let domain = Arc::new(DiniDomain::new(BoundaryChart::flat(10.0)).unwrap());
        let region = Region::Chart(domain);
        let a = 0.25;
        let z0 = Vec2::new(0.0, -a);
        // straight up exits at distance a
        let (rho, clipped) = ray_clip(&region, z0, std::f64::consts::FRAC_PI_2, 1.0).unwrap();
        assert!(clipped);
        assert!((rho - a).abs() < 1e-12);
        // straight down never exits
        let (rho, clipped) = ray_clip(&region, z0, -std::f64::consts::FRAC_PI_2, 1.0).unwrap();
        assert!(!clipped);
        assert_eq!(rho, 1.0);
    }

    #[test]
    fn ray_clip_cusp_matches_dense_scan() {
        let chart = BoundaryChart::new(
            Arc::new(PowerCuspShape {
                beta: 0.5,
                coef: 1.0,
            }),
            crate::geometry::DiniModulus::custom(
                (0..40)
                    .map(|i| {
                        let r = 1e-9 * (1e9f64).powf(i as f64 / 39.0);
                        (r, 2.2 * r.sqrt())
                    })
                    .collect(),
                0.4,
            )
            .unwrap(),
            0.4,
        )
        .unwrap();
        let domain = Arc::new(DiniDomain::new(chart).unwrap());
        let r = 0.001; // small enough that the anchor depth 4 Lambda r << r
        let z0 = domain.interior_anchor(r).unwrap();
        let region = Region::Chart(domain);
        let theta = 1.1;
        let (rho, clipped) = ray_clip(&region, z0, theta, r).unwrap();
        assert!(clipped);
        // dense oracle: one million samples
        let dir = Vec2::new(theta.cos(), theta.sin());
        let mut oracle = r;
        for i in 1..=1_000_000 {
            let s = r * i as f64 / 1e6;
            if region.level(z0 + dir * s) > 0.0 {
                oracle = s;
                break;
            }
        }
        assert!((rho - oracle).abs() < 1e-6 * r + 1e-10);
    }

    #[test]
    fn full_ball_weighted_volumes() {
        let region = Region::WholePlane;
        for &alpha in &[0.0, 1.0, 2.5, 10f64.sqrt()] {
            for &r in &[1.0, 0.3] {
                let got = integrate_ball(
                    &region,
                    Vec2::ZERO,
                    r,
                    alpha,
                    &QuadParams::default(),
                    &|_| 1.0,
                )
                .unwrap();
                let want = full_ball_weighted_volume(r, alpha);
                assert!(
                    (got - want).abs() < 1e-10 * want,
                    "alpha {alpha} r {r}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn unweighted_area_is_pi() {
        let got = integrate_ball(
            &Region::WholePlane,
            Vec2::ZERO,
            1.0,
            0.0,
            &QuadParams::default(),
            &|_| 1.0,
        )
        .unwrap();
        assert!((got - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn half_plane_halves_the_weighted_volume() {
        // flat boundary through the center: alpha = 1, r = 1 gives pi/4
        let domain = Arc::new(DiniDomain::new(BoundaryChart::flat(10.0)).unwrap());
        let region = Region::Chart(domain);
        let got = integrate_ball(
            &region,
            Vec2::ZERO,
            1.0,
            1.0,
            &QuadParams::default(),
            &|_| 1.0,
        )
        .unwrap();
        assert!((got - std::f64::consts::FRAC_PI_4).abs() < 1e-10);
    }

    #[test]
    fn monotone_in_radius_for_nonnegative_integrands() {
        let region = Region::Disk {
            center: Vec2::ZERO,
            radius: 1.0,
        };
        let f = |p: Vec2| 1.0 + p.x * p.x;
        let mut prev = 0.0;
        for i in 1..=6 {
            let r = 0.15 * i as f64;
            let v =
                integrate_ball(&region, Vec2::ZERO, r, 1.5, &QuadParams::default(), &f).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn refinement_is_stable_at_default_resolution() {
        // doubling the resolution changes a catalog-style integral by < 1e-9
        let region = Region::WholePlane;
        let f = |p: Vec2| (3.0 * p.x).cos().powi(2) + p.y * p.y;
        let coarse = integrate_ball_fixed(&region, Vec2::ZERO, 0.8, 2.0, 64, 24, &f).unwrap();
        let fine = integrate_ball_fixed(&region, Vec2::ZERO, 0.8, 2.0, 128, 48, &f).unwrap();
        assert!((fine - coarse).abs() <= 1e-9 * fine.abs());
    }

    #[test]
    fn ray_table_invariants() {
        let domain = Arc::new(DiniDomain::new(BoundaryChart::flat(10.0)).unwrap());
        let region = Region::Chart(domain);
        let z0 = Vec2::new(0.0, -0.05);
        let r = 0.3;
        let table = build_ray_table(&region, z0, r, 64).unwrap();
        for i in 0..table.angles.len() {
            assert!(table.rho_max[i] <= r + 1e-15);
            assert!(table.ang_weights[i] > 0.0);
            // clip flag iff the ray exits before r
            let dir = Vec2::new(table.angles[i].cos(), table.angles[i].sin());
            let exits = region.level(z0 + dir * r) > 0.0;
            if exits {
                assert!(table.clipped[i]);
            }
            // nodes at rho_max stay inside the closed region
            let x = z0 + dir * (table.rho_max[i] * 0.999);
            assert!(region.level(x) <= 1e-9);
        }
    }

    #[test]
    fn center_outside_region_is_rejected() {
        let region = Region::Disk {
            center: Vec2::ZERO,
            radius: 1.0,
        };
        assert!(ray_clip(&region, Vec2::new(2.0, 0.0), 0.0, 1.0).is_err());
    }
}
