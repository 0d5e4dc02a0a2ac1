//! Solution fields: the closed-form catalog (the analytic oracles of the
//! test suite), grid-backed fields from the finite-difference solver, and
//! pushforwards through normalization frames.
//!
//! Chart convention throughout: the domain lies below the graph,
//! Omega = { x2 < phi(x1) }, so the half-plane catalog stores
//! u(x1, x2) = Im((x1 + i(-x2))^kappa), which vanishes on the flat boundary
//! and is positive just below it.

pub mod bessel;
pub mod solver;

use crate::coefficients::{CoefficientField, NormalizationFrame, Potential};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryChart, DiniDomain, Region};
use crate::num::Vec2;
use crate::quadrature::QuadParams;
use std::sync::Arc;

/// A scalar field with gradient access.
pub trait Field: Send + Sync {
    fn eval(&self, p: Vec2) -> f64;
    fn grad(&self, p: Vec2) -> Vec2;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    ClosedForm,
    Grid,
}

/// A solution u of div(A Du) = V u with its region, potential and bound M.
#[derive(Clone)]
pub struct SolutionField {
    pub field: Arc<dyn Field>,
    pub region: Region,
    pub potential: Potential,
    /// M >= max(1, ||V||_{W^{1,inf}}).
    pub m_bound: f64,
    pub kind: FieldKind,
}

impl SolutionField {
    pub fn eval(&self, p: Vec2) -> f64 {
        self.field.eval(p)
    }

    pub fn grad(&self, p: Vec2) -> Vec2 {
        self.field.grad(p)
    }

    /// Default alpha = sqrt(M).
    pub fn alpha_default(&self) -> f64 {
        self.m_bound.sqrt()
    }

    /// Quadrature resolution appropriate for this field's smoothness.
    pub fn quad_params(&self) -> QuadParams {
        match self.kind {
            FieldKind::ClosedForm => QuadParams::default(),
            FieldKind::Grid => QuadParams::for_grid(),
        }
    }

    /// Pushforward through a normalization frame: u_{z0}(y) = u(T^{-1} y).
    pub fn pushed(&self, frame: &NormalizationFrame, coeff_lambda: f64) -> SolutionField {
        let (potential, m_bound) =
            crate::coefficients::push_potential(&self.potential, coeff_lambda);
        SolutionField {
            field: Arc::new(PushedField {
                base: self.field.clone(),
                frame: *frame,
            }),
            region: self.region.clone().transformed(*frame),
            potential,
            m_bound: m_bound.max(self.m_bound),
            kind: self.kind,
        }
    }

    /// Rescaled copy c * u (the frequency is invariant under this).
    pub fn scaled(&self, c: f64) -> SolutionField {
        SolutionField {
            field: Arc::new(ScaledField {
                base: self.field.clone(),
                c,
            }),
            region: self.region.clone(),
            potential: self.potential,
            m_bound: self.m_bound,
            kind: self.kind,
        }
    }
}

/// u = c.
pub struct ConstField(pub f64);

impl Field for ConstField {
    fn eval(&self, _p: Vec2) -> f64 {
        self.0
    }
    fn grad(&self, _p: Vec2) -> Vec2 {
        Vec2::ZERO
    }
}

struct ScaledField {
    base: Arc<dyn Field>,
    c: f64,
}

impl Field for ScaledField {
    fn eval(&self, p: Vec2) -> f64 {
        self.c * self.base.eval(p)
    }
    fn grad(&self, p: Vec2) -> Vec2 {
        self.base.grad(p) * self.c
    }
}

struct PushedField {
    base: Arc<dyn Field>,
    frame: NormalizationFrame,
}

impl Field for PushedField {
    fn eval(&self, p: Vec2) -> f64 {
        self.base.eval(self.frame.inverse(p))
    }
    fn grad(&self, p: Vec2) -> Vec2 {
        // chain rule with symmetric S
        self.frame.s.mul_vec(self.base.grad(self.frame.inverse(p)))
    }
}

/// u = Im((x1 + i(-x2))^kappa): degree-kappa homogeneous harmonic vanishing
/// on the flat boundary { x2 = 0 }, positive in the lower half-plane wedge.
pub struct HomogeneousHarmonic {
    pub kappa: u32,
}

impl Field for HomogeneousHarmonic {
    fn eval(&self, p: Vec2) -> f64 {
        let rho = p.norm();
        if rho == 0.0 {
            return 0.0;
        }
        let theta = (-p.y).atan2(p.x);
        rho.powi(self.kappa as i32) * (self.kappa as f64 * theta).sin()
    }
    fn grad(&self, p: Vec2) -> Vec2 {
        // with z = x1 - i x2: Du = (kappa Im z^{kappa-1}, -kappa Re z^{kappa-1})
        let k = self.kappa as f64;
        let rho = p.norm();
        if rho == 0.0 {
            if self.kappa == 1 {
                return Vec2::new(0.0, -1.0);
            }
            return Vec2::ZERO;
        }
        let theta = (-p.y).atan2(p.x);
        let m = k * rho.powi(self.kappa as i32 - 1);
        Vec2::new(
            m * ((k - 1.0) * theta).sin(),
            -m * ((k - 1.0) * theta).cos(),
        )
    }
}

/// u = J_kappa(j s) sin(kappa theta) on the unit disk (cos branch at
/// kappa = 0), a Dirichlet eigenfunction with V = -j^2.
pub struct DiskEigenfunction {
    pub kappa: u32,
    pub j: f64,
}

impl Field for DiskEigenfunction {
    fn eval(&self, p: Vec2) -> f64 {
        let s = p.norm();
        let radial = bessel::bessel_j(self.kappa, self.j * s);
        if self.kappa == 0 {
            return radial;
        }
        let theta = p.y.atan2(p.x);
        radial * (self.kappa as f64 * theta).sin()
    }
    fn grad(&self, p: Vec2) -> Vec2 {
        let s = p.norm();
        let k = self.kappa as f64;
        if s < 1e-14 {
            return match self.kappa {
                0 => Vec2::ZERO,
                1 => Vec2::new(0.0, 0.5 * self.j),
                _ => Vec2::ZERO,
            };
        }
        let theta = p.y.atan2(p.x);
        let e_s = p / s;
        let e_t = Vec2::new(-e_s.y, e_s.x);
        let du_ds = self.j * bessel::bessel_j_prime(self.kappa, self.j * s);
        if self.kappa == 0 {
            return e_s * du_ds;
        }
        let radial = bessel::bessel_j(self.kappa, self.j * s);
        e_s * (du_ds * (k * theta).sin()) + e_t * (k / s * radial * (k * theta).cos())
    }
}

/// Where the vanishing-order analysis is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorKind {
    Boundary,
    Interior,
}

/// A catalog case: solution, coefficients, known vanishing order and anchor.
#[derive(Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub kappa: u32,
    pub anchor: Vec2,
    pub anchor_kind: AnchorKind,
    pub solution: SolutionField,
    pub coeff: CoefficientField,
    /// Chart domain when the case is boundary-anchored.
    pub domain: Option<Arc<DiniDomain>>,
}

/// Half-plane harmonic Im((x1 + i(-x2))^kappa) anchored at the boundary
/// origin of a flat chart; A = I, V = 0, M = 1.
pub fn catalog_homogeneous(kappa: u32) -> Result<CatalogEntry> {
    if kappa == 0 {
        return Err(Error::domain("catalog_homogeneous requires kappa >= 1"));
    }
    let domain = Arc::new(DiniDomain::new(BoundaryChart::flat(8.0))?);
    let solution = SolutionField {
        field: Arc::new(HomogeneousHarmonic { kappa }),
        region: Region::Chart(domain.clone()),
        potential: Potential::Zero,
        m_bound: 1.0,
        kind: FieldKind::ClosedForm,
    };
    Ok(CatalogEntry {
        name: format!("imz_kappa{kappa}"),
        kappa,
        anchor: Vec2::ZERO,
        anchor_kind: AnchorKind::Boundary,
        solution,
        coeff: CoefficientField::identity(),
        domain: Some(domain),
    })
}

/// Unit-disk Dirichlet eigenfunction J_kappa(j_{kappa,m} s) sin(kappa theta)
/// anchored at the center; A = I, V = -j^2, M = j^2.
pub fn catalog_disk_eigen(kappa: u32, m: usize) -> Result<CatalogEntry> {
    let j = bessel::bessel_zero(kappa, m)?;
    let solution = SolutionField {
        field: Arc::new(DiskEigenfunction { kappa, j }),
        region: Region::Disk {
            center: Vec2::ZERO,
            radius: 1.0,
        },
        potential: Potential::Const(-j * j),
        m_bound: (j * j).max(1.0),
        kind: FieldKind::ClosedForm,
    };
    Ok(CatalogEntry {
        name: format!("disk_eigen_k{kappa}_m{m}"),
        kappa,
        anchor: Vec2::ZERO,
        anchor_kind: AnchorKind::Interior,
        solution,
        coeff: CoefficientField::identity(),
        domain: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::SplitMix64;

    #[test]
    fn harmonic_kappa1_is_minus_x2() {
        let e = catalog_homogeneous(1).unwrap();
        let mut rng = SplitMix64::new(2);
        for _ in 0..100 {
            let p = Vec2::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 0.0));
            assert!((e.solution.eval(p) - (-p.y)).abs() < 1e-14);
            assert!((e.solution.grad(p).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn harmonic_kappa2_is_minus_2x1x2() {
        let e = catalog_homogeneous(2).unwrap();
        let p = Vec2::new(0.3, -0.2);
        assert!((e.solution.eval(p) - (-2.0 * p.x * p.y)).abs() < 1e-14);
        // vanishes on the boundary x2 = 0
        assert!(e.solution.eval(Vec2::new(0.7, 0.0)).abs() < 1e-14);
    }

    #[test]
    fn harmonic_gradient_consistent_with_central_differences() {
        let e = catalog_homogeneous(5).unwrap();
        let mut rng = SplitMix64::new(3);
        let h = 1e-5;
        for _ in 0..1000 {
            let p = Vec2::new(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, -0.01));
            let g = e.solution.grad(p);
            let fx = (e.solution.eval(p + Vec2::new(h, 0.0))
                - e.solution.eval(p - Vec2::new(h, 0.0)))
                / (2.0 * h);
            let fy = (e.solution.eval(p + Vec2::new(0.0, h))
                - e.solution.eval(p - Vec2::new(0.0, h)))
                / (2.0 * h);
            assert!((g.x - fx).abs() < 1e-8 && (g.y - fy).abs() < 1e-8);
        }
    }

    #[test]
    fn harmonic_kappa5_laplace_residual_analytic() {
        // second differences of the closed form at tight step: the exact
        // Laplacian is zero, so the residual is pure truncation noise
        let e = catalog_homogeneous(5).unwrap();
        let mut rng = SplitMix64::new(5);
        let h = 1e-4;
        for _ in 0..1000 {
            let p = Vec2::new(rng.uniform(-0.5, 0.5), rng.uniform(-0.9, -0.1));
            let u = |q: Vec2| e.solution.eval(q);
            let lap = (u(p + Vec2::new(h, 0.0))
                + u(p - Vec2::new(h, 0.0))
                + u(p + Vec2::new(0.0, h))
                + u(p - Vec2::new(0.0, h))
                - 4.0 * u(p))
                / (h * h);
            assert!(lap.abs() < 1e-5, "residual {lap} at {p:?}");
        }
    }

    #[test]
    fn disk_eigen_vanishes_on_unit_circle() {
        let e = catalog_disk_eigen(2, 1).unwrap();
        for i in 0..64 {
            let th = std::f64::consts::TAU * i as f64 / 64.0;
            let p = Vec2::from_polar(1.0, th);
            assert!(e.solution.eval(p).abs() < 1e-10);
        }
    }

    #[test]
    fn disk_eigen_satisfies_equation() {
        // div(Du) - V u = Laplacian u + j^2 u = 0 via five-point differences
        let e = catalog_disk_eigen(3, 1).unwrap();
        let j2 = -e.solution.potential.at(Vec2::ZERO);
        let u = |q: Vec2| e.solution.eval(q);
        let h = 1e-4;
        let mut rng = SplitMix64::new(7);
        for _ in 0..300 {
            let p = Vec2::from_polar(
                rng.uniform(0.05, 0.8),
                rng.uniform(0.0, std::f64::consts::TAU),
            );
            let lap = (u(p + Vec2::new(h, 0.0))
                + u(p - Vec2::new(h, 0.0))
                + u(p + Vec2::new(0.0, h))
                + u(p - Vec2::new(0.0, h))
                - 4.0 * u(p))
                / (h * h);
            let res = lap + j2 * u(p);
            assert!(res.abs() < 1e-4 * (1.0 + j2), "residual {res}");
        }
    }

    #[test]
    fn disk_eigen_gradient_matches_differences() {
        let e = catalog_disk_eigen(4, 2).unwrap();
        let mut rng = SplitMix64::new(9);
        let h = 1e-6;
        for _ in 0..500 {
            let p = Vec2::from_polar(
                rng.uniform(0.05, 0.9),
                rng.uniform(0.0, std::f64::consts::TAU),
            );
            let g = e.solution.grad(p);
            let fx = (e.solution.eval(p + Vec2::new(h, 0.0))
                - e.solution.eval(p - Vec2::new(h, 0.0)))
                / (2.0 * h);
            let fy = (e.solution.eval(p + Vec2::new(0.0, h))
                - e.solution.eval(p - Vec2::new(0.0, h)))
                / (2.0 * h);
            assert!((g.x - fx).abs() < 1e-7 && (g.y - fy).abs() < 1e-7);
        }
    }

    #[test]
    fn pushed_field_identity_frame_is_noop() {
        let e = catalog_homogeneous(3).unwrap();
        let f = NormalizationFrame::identity();
        let pushed = e.solution.pushed(&f, 1.0);
        let p = Vec2::new(0.2, -0.3);
        assert_eq!(pushed.eval(p), e.solution.eval(p));
    }

    #[test]
    fn pushed_field_composes_with_frame() {
        // u(x) = x1, S = diag(2, 1), z0 = (z1, z2): pushed u(y) = 2 y1 + z1
        use crate::num::Mat2;
        struct X1;
        impl Field for X1 {
            fn eval(&self, p: Vec2) -> f64 {
                p.x
            }
            fn grad(&self, _p: Vec2) -> Vec2 {
                Vec2::new(1.0, 0.0)
            }
        }
        let coeff = CoefficientField::constant(Mat2::diag(4.0, 1.0)).unwrap();
        let z0 = Vec2::new(0.7, -0.1);
        let frame = crate::coefficients::make_frame(&coeff, z0).unwrap();
        let sol = SolutionField {
            field: Arc::new(X1),
            region: Region::WholePlane,
            potential: Potential::Zero,
            m_bound: 1.0,
            kind: FieldKind::ClosedForm,
        };
        let pushed = sol.pushed(&frame, coeff.lambda);
        let y = Vec2::new(0.25, 0.5);
        assert!((pushed.eval(y) - (2.0 * y.x + z0.x)).abs() < 1e-14);
        let g = pushed.grad(y);
        assert!((g.x - 2.0).abs() < 1e-14 && g.y.abs() < 1e-14);
    }

    #[test]
    fn kappa_zero_homogeneous_rejected() {
        assert!(catalog_homogeneous(0).is_err());
    }

    #[test]
    fn harmonic_kappa5_laplace_residual_symbolic() {
        // analytic Hessian oracle: with z = x1 - i x2 and u = Im z^kappa,
        // u_xx = Im(kappa (kappa-1) z^{kappa-2}) and u_yy is its negative,
        // so the closed-form Laplacian cancels exactly
        let kappa = 5i32;
        let mut rng = SplitMix64::new(21);
        for _ in 0..1000 {
            let p = Vec2::new(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, -0.01));
            let rho = p.norm();
            let theta = (-p.y).atan2(p.x);
            let m = (kappa * (kappa - 1)) as f64 * rho.powi(kappa - 2);
            let u_xx = m * ((kappa - 2) as f64 * theta).sin();
            let u_yy = -u_xx;
            let scale = m.abs().max(1.0);
            assert!((u_xx + u_yy).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn pushed_field_solves_pushed_equation() {
        // u = sin(x) sinh(sqrt(2) y) solves div(diag(2,1) Du) = 0; pushed
        // through the frame at z0 it must solve the pushed (here: Laplace)
        // equation, with FD residual converging at order >= 1
        use crate::num::Mat2;
        struct Aniso;
        impl Field for Aniso {
            fn eval(&self, p: Vec2) -> f64 {
                p.x.sin() * (2f64.sqrt() * p.y).sinh()
            }
            fn grad(&self, p: Vec2) -> Vec2 {
                Vec2::new(
                    p.x.cos() * (2f64.sqrt() * p.y).sinh(),
                    2f64.sqrt() * p.x.sin() * (2f64.sqrt() * p.y).cosh(),
                )
            }
        }
        let coeff = CoefficientField::constant(Mat2::diag(2.0, 1.0)).unwrap();
        let z0 = Vec2::new(0.3, -0.4);
        let frame = crate::coefficients::make_frame(&coeff, z0).unwrap();
        let pushed_coeff = crate::coefficients::push_matrix(&coeff, &frame);
        assert!(pushed_coeff.is_identity() || pushed_coeff.at(Vec2::ZERO).b.abs() < 1e-12);
        let sol = SolutionField {
            field: Arc::new(Aniso),
            region: Region::WholePlane,
            potential: Potential::Zero,
            m_bound: 1.0,
            kind: FieldKind::ClosedForm,
        };
        let pushed = sol.pushed(&frame, coeff.lambda);
        let residual = |h: f64| -> f64 {
            let mut worst = 0.0f64;
            let mut rng = SplitMix64::new(23);
            for _ in 0..200 {
                let y = Vec2::new(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
                let u = |q: Vec2| pushed.eval(q);
                let lap = (u(y + Vec2::new(h, 0.0))
                    + u(y - Vec2::new(h, 0.0))
                    + u(y + Vec2::new(0.0, h))
                    + u(y - Vec2::new(0.0, h))
                    - 4.0 * u(y))
                    / (h * h);
                worst = worst.max(lap.abs());
            }
            worst
        };
        let r1 = residual(1e-3);
        let r2 = residual(5e-4);
        let order = (r1 / r2).log2();
        assert!(
            order >= 1.0,
            "observed order {order} (residuals {r1:.2e}, {r2:.2e})"
        );
    }
}
