//! Boundary geometry of planar C1-Dini domains given by a graph chart
//! Omega = { x2 < phi(x1) } near the origin, with phi(0) = 0, phi'(0) = 0.
//!
//! Provides the Dini modulus psi and its integral, the outward normal, the
//! normal-oscillation majorant Lambda(r) (floored at sqrt(r)), the interior
//! anchor y0 = -4 Lambda(r) r e_n, and the quantitative star-shapedness
//! margins, plus the generalized (coefficient-weighted) variant.

use crate::coefficients::{make_frame, push_matrix, CoefficientField, NormalizationFrame};
use crate::error::{Error, Result};
use crate::num::Vec2;
use std::sync::Arc;

/// Cap used when deriving the effective radius from Lambda alone.
pub const LAMBDA_GEOMETRY_CAP: f64 = 1e-3;

// ---------------------------------------------------------------------------
// Dini moduli
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum ModulusKind {
    /// psi(r) = r^beta, beta in (0, 1].
    Power { beta: f64 },
    /// psi(r) = (log(2e/r))^{-(1+delta)}, delta > 0.
    LogPower { delta: f64 },
    /// Tabulated nondecreasing (r, psi) pairs, interpolated linearly in log r.
    Custom { table: Vec<(f64, f64)> },
}

/// A nondecreasing modulus of continuity with a finite Dini integral.
#[derive(Debug, Clone)]
pub struct DiniModulus {
    pub kind: ModulusKind,
    /// Upper limit of validity.
    pub r0_cap: f64,
}

impl DiniModulus {
    pub fn power(beta: f64, r0_cap: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::domain("power modulus requires beta in (0, 1]"));
        }
        Ok(DiniModulus {
            kind: ModulusKind::Power { beta },
            r0_cap,
        })
    }

    pub fn log_power(delta: f64, r0_cap: f64) -> Result<Self> {
        if delta <= 0.0 {
            return Err(Error::domain("log-power modulus requires delta > 0"));
        }
        Ok(DiniModulus {
            kind: ModulusKind::LogPower { delta },
            r0_cap,
        })
    }

    pub fn custom(table: Vec<(f64, f64)>, r0_cap: f64) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::domain("custom modulus needs at least two nodes"));
        }
        for w in table.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::domain("custom modulus radii must be increasing"));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::domain("custom modulus must be nondecreasing"));
            }
        }
        if table[0].0 <= 0.0 || table[0].1 < 0.0 {
            return Err(Error::domain("custom modulus nodes must be positive"));
        }
        Ok(DiniModulus {
            kind: ModulusKind::Custom { table },
            r0_cap,
        })
    }

    pub fn psi(&self, r: f64) -> f64 {
        match &self.kind {
            ModulusKind::Power { beta } => r.powf(*beta),
            ModulusKind::LogPower { delta } => {
                (2.0 * std::f64::consts::E / r).ln().powf(-(1.0 + delta))
            }
            ModulusKind::Custom { table } => {
                let t = r.ln();
                let first = table.first().unwrap();
                let last = table.last().unwrap();
                if r <= first.0 {
                    // extrapolate below with the first segment's log-slope
                    let (r0, p0) = table[0];
                    let (r1, p1) = table[1];
                    let m = (p1 - p0) / (r1.ln() - r0.ln());
                    return (p0 + m * (t - r0.ln())).max(0.0);
                }
                if r >= last.0 {
                    return last.1;
                }
                let idx = table.partition_point(|&(rn, _)| rn <= r) - 1;
                let (ra, pa) = table[idx];
                let (rb, pb) = table[idx + 1];
                let w = (t - ra.ln()) / (rb.ln() - ra.ln());
                pa + w * (pb - pa)
            }
        }
    }

    /// Integral of psi(r)/r over [eps, upper]; closed form for the catalog
    /// kinds, exact piecewise (linear in log r) for tabulated data.
    pub fn dini_integral(&self, eps: f64, upper: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < upper) {
            return Err(Error::domain("dini_integral requires 0 < eps < upper"));
        }
        Ok(match &self.kind {
            ModulusKind::Power { beta } => (upper.powf(*beta) - eps.powf(*beta)) / beta,
            ModulusKind::LogPower { delta } => {
                let l = |r: f64| (2.0 * std::f64::consts::E / r).ln();
                (l(upper).powf(-delta) - l(eps).powf(-delta)) / delta
            }
            ModulusKind::Custom { .. } => {
                // psi is piecewise linear in t = log r, so psi/r dr = psi dt
                // integrates to exact trapezoids between breakpoints
                let (ta, tb) = (eps.ln(), upper.ln());
                let mut knots = vec![ta];
                if let ModulusKind::Custom { table } = &self.kind {
                    for &(r, _) in table {
                        let t = r.ln();
                        if t > ta && t < tb {
                            knots.push(t);
                        }
                    }
                }
                knots.push(tb);
                let mut acc = 0.0;
                for w in knots.windows(2) {
                    let (p0, p1) = (self.psi(w[0].exp()), self.psi(w[1].exp()));
                    acc += 0.5 * (p0 + p1) * (w[1] - w[0]);
                }
                acc
            }
        })
    }

    /// The eps -> 0 limit of the Dini integral, available in closed form for
    /// the catalog kinds.
    pub fn dini_integral_limit(&self, upper: f64) -> Option<f64> {
        match &self.kind {
            ModulusKind::Power { beta } => Some(upper.powf(*beta) / beta),
            ModulusKind::LogPower { delta } => {
                Some((2.0 * std::f64::consts::E / upper).ln().powf(-delta) / delta)
            }
            ModulusKind::Custom { .. } => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Chart shapes
// ---------------------------------------------------------------------------

pub trait ChartShape: Send + Sync + std::fmt::Debug {
    fn phi(&self, t: f64) -> f64;
    fn dphi(&self, t: f64) -> f64;
}

#[derive(Debug)]
pub struct FlatShape;

impl ChartShape for FlatShape {
    fn phi(&self, _t: f64) -> f64 {
        0.0
    }
    fn dphi(&self, _t: f64) -> f64 {
        0.0
    }
}

/// phi(t) = coef |t|^{1+beta}. With coef = 1/((1+beta) 2^{1-beta}) the
/// gradient modulus is exactly r^beta.
#[derive(Debug)]
pub struct PowerCuspShape {
    pub beta: f64,
    pub coef: f64,
}

impl PowerCuspShape {
    pub fn canonical_coef(beta: f64) -> f64 {
        1.0 / ((1.0 + beta) * 2f64.powf(1.0 - beta))
    }
}

impl ChartShape for PowerCuspShape {
    fn phi(&self, t: f64) -> f64 {
        self.coef * t.abs().powf(1.0 + self.beta)
    }
    fn dphi(&self, t: f64) -> f64 {
        self.coef * (1.0 + self.beta) * t.abs().powf(self.beta) * t.signum()
    }
}

/// Chart built from an odd gradient profile dphi(t) = sign(t) g(|t|) with
/// phi recovered by cumulative quadrature on a fine log grid.
pub struct ProfileShape {
    g: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    ts: Vec<f64>,
    cum: Vec<f64>,
}

impl std::fmt::Debug for ProfileShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProfileShape")
            .field("nodes", &self.ts.len())
            .finish()
    }
}

impl ProfileShape {
    pub fn new(g: Box<dyn Fn(f64) -> f64 + Send + Sync>, t_max: f64) -> Self {
        let n = 4096;
        let t_min = t_max * 1e-9;
        let ratio = (t_max / t_min).powf(1.0 / (n - 1) as f64);
        let mut ts = Vec::with_capacity(n);
        let mut t = t_min;
        for _ in 0..n {
            ts.push(t);
            t *= ratio;
        }
        let mut cum = vec![0.0; n];
        // below t_min the contribution is at most g(t_min) * t_min
        cum[0] = 0.5 * g(t_min) * t_min;
        for i in 1..n {
            let (a, b) = (ts[i - 1], ts[i]);
            let m = 0.5 * (a + b);
            cum[i] = cum[i - 1] + (b - a) / 6.0 * (g(a) + 4.0 * g(m) + g(b));
        }
        ProfileShape { g, ts, cum }
    }
}

impl ChartShape for ProfileShape {
    fn phi(&self, t: f64) -> f64 {
        let a = t.abs();
        if a == 0.0 {
            return 0.0;
        }
        if a <= self.ts[0] {
            return self.cum[0] * a / self.ts[0];
        }
        let i = self.ts.partition_point(|&x| x <= a).max(1);
        let lo = self.ts[i - 1];
        let base = self.cum[i - 1];
        let m = 0.5 * (lo + a);
        base + (a - lo) / 6.0 * ((self.g)(lo) + 4.0 * (self.g)(m) + (self.g)(a))
    }
    fn dphi(&self, t: f64) -> f64 {
        (self.g)(t.abs()) * t.signum()
    }
}

// ---------------------------------------------------------------------------
// Boundary chart and domain
// ---------------------------------------------------------------------------

/// A normalized boundary graph chart on |x'| <= r0.
#[derive(Debug, Clone)]
pub struct BoundaryChart {
    pub shape: Arc<dyn ChartShape>,
    pub modulus: DiniModulus,
    pub r0: f64,
    /// Set when phi is identically zero, enabling analytic ray clipping.
    pub flat: bool,
}

impl BoundaryChart {
    pub fn new(shape: Arc<dyn ChartShape>, modulus: DiniModulus, r0: f64) -> Result<Self> {
        if r0 <= 0.0 {
            return Err(Error::domain("chart radius must be positive"));
        }
        if shape.phi(0.0).abs() > 1e-12 || shape.dphi(0.0).abs() > 1e-12 {
            return Err(Error::domain("chart must satisfy phi(0) = dphi(0) = 0"));
        }
        let n = 257;
        for i in 0..n {
            let t = r0 * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
            let slope = shape.dphi(t);
            if (1.0 + slope * slope).sqrt() > 1.5 + 1e-12 {
                return Err(Error::domain(format!(
                    "chart slope bound sqrt(1+|dphi|^2) <= 3/2 violated at x' = {t}"
                )));
            }
        }
        // sampled falsification of the modulus majorization
        for i in 0..64 {
            for j in (i + 1)..64 {
                let a = r0 * (2.0 * i as f64 / 63.0 - 1.0);
                let b = r0 * (2.0 * j as f64 / 63.0 - 1.0);
                let gap = (shape.dphi(a) - shape.dphi(b)).abs();
                let bound = modulus.psi((a - b).abs());
                if gap > bound * (1.0 + 1e-9) + 1e-15 {
                    return Err(Error::domain(format!(
                        "gradient modulus violated: |dphi({a}) - dphi({b})| = {gap} > psi = {bound}"
                    )));
                }
            }
        }
        Ok(BoundaryChart {
            shape,
            modulus,
            r0,
            flat: false,
        })
    }

    pub fn flat(r0: f64) -> Self {
        BoundaryChart {
            shape: Arc::new(FlatShape),
            modulus: DiniModulus::power(1.0, r0).unwrap(),
            r0,
            flat: true,
        }
    }

    /// Canonical power-cusp chart whose gradient modulus is exactly r^beta.
    pub fn power_cusp(beta: f64, r0: f64) -> Result<Self> {
        let shape = PowerCuspShape {
            beta,
            coef: PowerCuspShape::canonical_coef(beta),
        };
        BoundaryChart::new(Arc::new(shape), DiniModulus::power(beta, r0)?, r0)
    }

    /// Canonical log-power chart: dphi(t) = sign(t) psi(|t|)/2.
    pub fn log_power(delta: f64, r0: f64) -> Result<Self> {
        let modulus = DiniModulus::log_power(delta, r0)?;
        let m = modulus.clone();
        let shape = ProfileShape::new(Box::new(move |t| 0.5 * m.psi(t)), r0);
        BoundaryChart::new(Arc::new(shape), modulus, r0)
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.shape.phi(t)
    }

    pub fn dphi(&self, t: f64) -> f64 {
        self.shape.dphi(t)
    }

    /// Usable chart width: sampling is clipped away from the chart edge.
    pub fn usable_radius(&self) -> f64 {
        0.95 * self.r0
    }
}

/// Outward unit normal at the boundary point (x', phi(x')).
pub fn normal_at(chart: &BoundaryChart, xprime: f64) -> Result<Vec2> {
    if xprime.abs() > chart.r0 {
        return Err(Error::domain(format!(
            "point x' = {xprime} outside chart of radius {}",
            chart.r0
        )));
    }
    let d = chart.dphi(xprime);
    let den = (1.0 + d * d).sqrt();
    Ok(Vec2::new(-d / den, 1.0 / den))
}

#[derive(Debug, Clone, Copy)]
struct LambdaScale {
    r: f64,
    dev: f64,
}

/// A C1-Dini domain with its eagerly built Lambda cache.
#[derive(Debug, Clone)]
pub struct DiniDomain {
    pub chart: BoundaryChart,
    scales: Vec<LambdaScale>,
    /// Largest dyadic radius with Lambda(r) < 1/1000 (and < 1).
    pub r0_effective: f64,
}

pub const LAMBDA_SAMPLES_PER_SCALE: usize = 512;
const LAMBDA_SCALE_COUNT: usize = 56;

impl DiniDomain {
    pub fn new(chart: BoundaryChart) -> Result<Self> {
        let top = chart.usable_radius();
        let mut scales = Vec::with_capacity(LAMBDA_SCALE_COUNT);
        for j in 0..LAMBDA_SCALE_COUNT {
            let r = top * 2f64.powi(-(j as i32));
            scales.push(LambdaScale {
                r,
                dev: sampled_normal_deviation(&chart, r),
            });
        }
        // monotone rearrangement: deviation over a larger ball majorizes
        for j in (0..LAMBDA_SCALE_COUNT - 1).rev() {
            scales[j].dev = scales[j].dev.max(scales[j + 1].dev);
        }
        let mut domain = DiniDomain {
            chart,
            scales,
            r0_effective: 0.0,
        };
        domain.r0_effective = domain
            .r0_effective_for_cap(LAMBDA_GEOMETRY_CAP)
            .ok_or_else(|| Error::domain("chart normal deviation does not drop below 1/1000"))?;
        Ok(domain)
    }

    /// Largest cached dyadic radius r < 1 with Lambda(r) <= cap.
    pub fn r0_effective_for_cap(&self, cap: f64) -> Option<f64> {
        self.scales
            .iter()
            .find(|s| s.r < 1.0 && self.lambda_of(s.r).map(|l| l < cap).unwrap_or(false))
            .map(|s| s.r)
    }

    /// Lambda(r): the sampled normal-oscillation majorant over the smallest
    /// cached scale >= r, floored by sqrt(r).
    pub fn lambda_of(&self, r: f64) -> Result<f64> {
        if !r.is_finite() || r <= 0.0 || r > self.chart.usable_radius() {
            return Err(Error::domain(format!(
                "lambda_of radius {r} outside (0, {}]",
                self.chart.usable_radius()
            )));
        }
        // scales are descending; pick the last scale with scale.r >= r
        let mut dev = self.scales.last().unwrap().dev;
        for s in &self.scales {
            if s.r >= r {
                dev = s.dev;
            } else {
                break;
            }
        }
        Ok(dev.max(r.sqrt()))
    }

    /// Interior anchor y0 = -a nu(0) = (0, -a) with a = 4 Lambda(r) r.
    pub fn interior_anchor(&self, r: f64) -> Result<Vec2> {
        Ok(anchor_from(r, self.lambda_of(r)?))
    }

    /// Quantitative star-shapedness margin: (min, max) of
    /// <x - y0, nu(x)> / (r Lambda(r)) over boundary samples in B_r,
    /// expected inside [1/2, 10].
    pub fn star_shape_margin(&self, r: f64, samples: usize) -> Result<MarginReport> {
        if samples < 16 {
            return Err(Error::domain("star_shape_margin needs at least 16 samples"));
        }
        let lam = self.lambda_of(r)?;
        let y0 = anchor_from(r, lam);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut used = 0;
        for i in 0..samples {
            let t = r * (2.0 * i as f64 / (samples - 1) as f64 - 1.0);
            if t.abs() > self.chart.usable_radius() {
                continue;
            }
            let x = Vec2::new(t, self.chart.phi(t));
            if x.norm() > r {
                continue;
            }
            let nu = normal_at(&self.chart, t)?;
            let v = (x - y0).dot(nu) / (r * lam);
            lo = lo.min(v);
            hi = hi.max(v);
            used += 1;
        }
        if used == 0 {
            return Err(Error::domain(
                "star_shape_margin: no boundary samples inside the ball",
            ));
        }
        Ok(MarginReport {
            min: lo,
            max: hi,
            pass: lo >= 0.5 && hi <= 10.0,
        })
    }

    /// Generalized star-shapedness through the matrix A: minimum over
    /// transformed boundary samples of <A_{y0}(y) y, N~(y)> where
    /// N~(y) = A(y0)^{1/2} N(T^{-1}(y)) and N is the non-unit outer normal.
    pub fn generalized_star_margin(
        &self,
        coeff: &CoefficientField,
        r: f64,
        samples: usize,
    ) -> Result<GenMarginReport> {
        if samples < 16 {
            return Err(Error::domain(
                "generalized_star_margin needs at least 16 samples",
            ));
        }
        let lam = self.lambda_of(r)?;
        let a = 4.0 * lam * r;
        let y0 = Vec2::new(0.0, -a);
        let frame = make_frame(coeff, y0)?;
        let pushed = push_matrix(coeff, &frame);
        let window = coeff.lambda.sqrt() * (r - a);
        if window <= 0.0 {
            return Err(Error::domain(
                "generalized_star_margin: window sqrt(lambda)(r - a) is empty",
            ));
        }
        let mut lo = f64::INFINITY;
        let mut used = 0;
        for i in 0..samples {
            let t = r * (2.0 * i as f64 / (samples - 1) as f64 - 1.0);
            if t.abs() > self.chart.usable_radius() {
                continue;
            }
            let x = Vec2::new(t, self.chart.phi(t));
            let y = frame.forward(x);
            if y.norm() > window {
                continue;
            }
            let n_outer = Vec2::new(-self.chart.dphi(t), 1.0);
            let n_tilde = frame.s.mul_vec(n_outer);
            let v = pushed.at(y).mul_vec(y).dot(n_tilde);
            lo = lo.min(v);
            used += 1;
        }
        if used == 0 {
            return Err(Error::domain(
                "generalized_star_margin: no transformed samples inside the window",
            ));
        }
        Ok(GenMarginReport {
            min: lo,
            pass: lo >= -1e-12 * r * lam,
        })
    }
}

/// The anchor formula a = 4 Lambda r on its own, for arithmetic checks.
pub fn anchor_from(r: f64, lambda_r: f64) -> Vec2 {
    Vec2::new(0.0, -(4.0 * (lambda_r * r)))
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MarginReport {
    pub min: f64,
    pub max: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GenMarginReport {
    pub min: f64,
    pub pass: bool,
}

fn sampled_normal_deviation(chart: &BoundaryChart, r: f64) -> f64 {
    // normals live in an arc of width < pi, so the pairwise max chord is
    // 2 sin((theta_max - theta_min)/2)
    let n = LAMBDA_SAMPLES_PER_SCALE;
    let mut th_min = f64::INFINITY;
    let mut th_max = f64::NEG_INFINITY;
    for i in 0..n {
        let t = r * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
        if t.abs() > chart.usable_radius() {
            continue;
        }
        if Vec2::new(t, chart.phi(t)).norm() > r {
            continue;
        }
        let th = (-chart.dphi(t)).atan();
        th_min = th_min.min(th);
        th_max = th_max.max(th);
    }
    if th_min > th_max {
        return 0.0;
    }
    2.0 * (0.5 * (th_max - th_min)).sin()
}

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

/// The integration region: level(x) < 0 inside, > 0 outside.
#[derive(Debug, Clone)]
pub enum Region {
    /// Omega = { x2 < phi(x1) } from a chart domain.
    Chart(Arc<DiniDomain>),
    Disk {
        center: Vec2,
        radius: f64,
    },
    WholePlane,
    /// Image of `base` under `frame.forward`.
    Transformed {
        frame: NormalizationFrame,
        base: Arc<Region>,
    },
}

impl Region {
    pub fn level(&self, x: Vec2) -> f64 {
        match self {
            Region::Chart(d) => {
                let t = x.x.clamp(-d.chart.r0, d.chart.r0);
                x.y - d.chart.phi(t)
            }
            Region::Disk { center, radius } => (x - *center).norm() - radius,
            Region::WholePlane => -1.0,
            Region::Transformed { frame, base } => base.level(frame.inverse(x)),
        }
    }

    pub fn contains(&self, x: Vec2) -> bool {
        self.level(x) < 0.0
    }

    pub fn transformed(self, frame: NormalizationFrame) -> Region {
        if frame.is_identity() {
            return self;
        }
        Region::Transformed {
            frame,
            base: Arc::new(self),
        }
    }
}
