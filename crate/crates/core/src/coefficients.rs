//! Coefficient matrices A(x), potentials V, and the normalizing affine
//! change of coordinates T(x) = A(z0)^{-1/2} (x - z0) that maps a chosen
//! point to the origin and the matrix there to the identity.
//!
//! Also hosts the two geometric fields built from A: the conformal factor
//! mu(x) = <A(x) e, e> with e the radial unit vector, and
//! Z(x) = A(x)(x - z0) / mu(x), which satisfies <Z, nu> = r on spheres.

use crate::error::{Error, Result};
use crate::num::{Mat2, Vec2};
use std::sync::Arc;

/// Matrix field kinds. Both are closed under the normalization pushforward.
#[derive(Debug, Clone)]
pub enum CoeffKind {
    /// A(x) = m for all x.
    Constant(Mat2),
    /// A(x) = a0 + (g . x) e with e symmetric.
    Affine { a0: Mat2, g: Vec2, e: Mat2 },
}

/// A symmetric, uniformly elliptic, Lipschitz matrix field.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub kind: CoeffKind,
    /// Ellipticity constant: lambda |v|^2 <= <A v, v> <= lambda^{-1} |v|^2.
    pub lambda: f64,
    /// Lipschitz constant of x -> A(x) in operator norm.
    pub lipschitz: f64,
}

impl CoefficientField {
    pub fn identity() -> Self {
        CoefficientField {
            kind: CoeffKind::Constant(Mat2::IDENTITY),
            lambda: 1.0,
            lipschitz: 0.0,
        }
    }

    pub fn constant(m: Mat2) -> Result<Self> {
        if m.symmetry_defect() > 1e-14 * (1.0 + m.sym_norm()) {
            return Err(Error::domain("coefficient matrix must be symmetric"));
        }
        let (lo, hi) = m.sym_eigenvalues();
        if lo <= 0.0 {
            return Err(Error::domain(format!(
                "coefficient matrix not positive definite (min eigenvalue {lo})"
            )));
        }
        Ok(CoefficientField {
            kind: CoeffKind::Constant(m),
            lambda: lo.min(1.0 / hi),
            lipschitz: 0.0,
        })
    }

    /// A(x) = a0 + (g . x) e, validated for ellipticity on |x| <= window.
    pub fn affine(a0: Mat2, g: Vec2, e: Mat2, window: f64) -> Result<Self> {
        if a0.symmetry_defect() > 1e-14 || e.symmetry_defect() > 1e-14 {
            return Err(Error::domain("affine coefficient parts must be symmetric"));
        }
        let field = CoefficientField {
            kind: CoeffKind::Affine { a0, g, e },
            lambda: 0.0,
            lipschitz: g.norm() * e.sym_norm(),
        };
        // ellipticity over the window by corner/edge sampling; linear in x so
        // extremes are attained on the boundary of the box
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in -8..=8 {
            for j in -8..=8 {
                let x = Vec2::new(window * i as f64 / 8.0, window * j as f64 / 8.0);
                let (l, h) = field.at(x).sym_eigenvalues();
                lo = lo.min(l);
                hi = hi.max(h);
            }
        }
        if lo <= 0.0 {
            return Err(Error::domain(format!(
                "affine coefficient loses ellipticity on window (min eigenvalue {lo})"
            )));
        }
        Ok(CoefficientField {
            lambda: lo.min(1.0 / hi).min(1.0),
            ..field
        })
    }

    pub fn at(&self, x: Vec2) -> Mat2 {
        match &self.kind {
            CoeffKind::Constant(m) => *m,
            CoeffKind::Affine { a0, g, e } => a0.add_mat(e.scale(g.dot(x))),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(&self.kind, CoeffKind::Constant(m) if *m == Mat2::IDENTITY)
    }
}

/// Zeroth-order potential V with its W^{1,inf} bound M >= 1.
#[derive(Debug, Clone, Copy)]
pub enum Potential {
    Zero,
    Const(f64),
}

impl Potential {
    pub fn at(&self, _x: Vec2) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Const(c) => *c,
        }
    }

    /// M = max(1, ||V||_{W^{1,inf}}).
    pub fn m_bound(&self) -> f64 {
        match self {
            Potential::Zero => 1.0,
            Potential::Const(c) => c.abs().max(1.0),
        }
    }
}

/// The affine normalization frame at z0: forward map T(x) = S^{-1}(x - z0)
/// with S = A(z0)^{1/2}, inverse T^{-1}(y) = z0 + S y.
#[derive(Debug, Clone, Copy)]
pub struct NormalizationFrame {
    pub z0: Vec2,
    pub s: Mat2,
    pub s_inv: Mat2,
    /// Ellipticity of A(z0) alone: lambda_z0 |v|^2 <= <A(z0)v,v>.
    pub lambda_z0: f64,
}

impl NormalizationFrame {
    pub fn identity() -> Self {
        NormalizationFrame {
            z0: Vec2::ZERO,
            s: Mat2::IDENTITY,
            s_inv: Mat2::IDENTITY,
            lambda_z0: 1.0,
        }
    }

    pub fn forward(&self, x: Vec2) -> Vec2 {
        self.s_inv.mul_vec(x - self.z0)
    }

    pub fn inverse(&self, y: Vec2) -> Vec2 {
        self.z0 + self.s.mul_vec(y)
    }

    pub fn is_identity(&self) -> bool {
        self.z0 == Vec2::ZERO && self.s == Mat2::IDENTITY
    }
}

/// SPD square root with the failing eigenvalue reported on error.
pub fn sqrt_spd(m: Mat2) -> Result<Mat2> {
    m.sqrt_spd().map_err(|min_eig| {
        Error::domain(format!(
            "matrix is not symmetric positive definite (min eigenvalue {min_eig})"
        ))
    })
}

/// Builds the normalization frame at z0.
pub fn make_frame(coeff: &CoefficientField, z0: Vec2) -> Result<NormalizationFrame> {
    let a_z0 = coeff.at(z0);
    let s = sqrt_spd(a_z0)?;
    let s_inv = s
        .inverse()
        .ok_or_else(|| Error::numerical("frame matrix not invertible"))?;
    let (lo, hi) = a_z0.sym_eigenvalues();
    Ok(NormalizationFrame {
        z0,
        s,
        s_inv,
        lambda_z0: lo.min(1.0 / hi).min(1.0),
    })
}

/// Pushes the matrix field through the frame:
/// A_{z0}(y) = S^{-1} A(z0 + S y) S^{-1}, so A_{z0}(0) = I exactly.
/// Ellipticity degrades to lambda^2 and the Lipschitz constant to
/// lambda^{-3/2} K.
pub fn push_matrix(coeff: &CoefficientField, frame: &NormalizationFrame) -> CoefficientField {
    let lambda = coeff.lambda;
    let kind = match &coeff.kind {
        CoeffKind::Constant(m) => CoeffKind::Constant(frame.s_inv.mul_mat(*m).mul_mat(frame.s_inv)),
        CoeffKind::Affine { a0, g, e } => {
            // A(z0 + S y) = A(z0) + (g . S y) e = A(z0) + ((S g) . y) e
            let a_z0 = a0.add_mat(e.scale(g.dot(frame.z0)));
            CoeffKind::Affine {
                a0: frame.s_inv.mul_mat(a_z0).mul_mat(frame.s_inv),
                g: frame.s.mul_vec(*g),
                e: frame.s_inv.mul_mat(*e).mul_mat(frame.s_inv),
            }
        }
    };
    CoefficientField {
        kind,
        lambda: lambda * lambda,
        lipschitz: coeff.lipschitz * lambda.powf(-1.5),
    }
}

/// Pushes a potential: V_{z0}(y) = V(z0 + S y). For the kinds carried here
/// the composition leaves the values unchanged; the W^{1,inf} bound becomes
/// C(lambda) M with C(lambda) = max(1, lambda^{-1/2}) from the chain rule.
pub fn push_potential(v: &Potential, coeff_lambda: f64) -> (Potential, f64) {
    let c = coeff_lambda.powf(-0.5).max(1.0);
    (*v, c * v.m_bound())
}

/// Conformal factor mu(x) = <A(x)(x - z0), x - z0> / |x - z0|^2.
/// At x = z0 the value is defined by continuity only when A(z0) = I.
pub fn mu(coeff: &CoefficientField, z0: Vec2, x: Vec2) -> Result<f64> {
    let d = x - z0;
    let rsq = d.norm_sq();
    if rsq == 0.0 {
        let a = coeff.at(z0);
        let defect = a.add_mat(Mat2::IDENTITY.scale(-1.0)).sym_norm();
        if defect <= 1e-12 {
            return Ok(1.0);
        }
        return Err(Error::domain(
            "mu at the center point requires A(z0) = I; evaluate after normalization",
        ));
    }
    Ok(coeff.at(x).mul_vec(d).dot(d) / rsq)
}

/// The vector field Z(x) = A(x)(x - z0) / mu(x).
pub fn z_field(coeff: &CoefficientField, z0: Vec2, x: Vec2) -> Result<Vec2> {
    let m = mu(coeff, z0, x)?;
    let d = x - z0;
    if d.norm_sq() == 0.0 {
        return Ok(Vec2::ZERO);
    }
    Ok(coeff.at(x).mul_vec(d) / m)
}

/// Central-difference divergence of Z at x with step h.
pub fn div_z(coeff: &CoefficientField, z0: Vec2, x: Vec2, h: f64) -> Result<f64> {
    let zxp = z_field(coeff, z0, x + Vec2::new(h, 0.0))?;
    let zxm = z_field(coeff, z0, x - Vec2::new(h, 0.0))?;
    let zyp = z_field(coeff, z0, x + Vec2::new(0.0, h))?;
    let zym = z_field(coeff, z0, x - Vec2::new(0.0, h))?;
    Ok((zxp.x - zxm.x) / (2.0 * h) + (zyp.y - zym.y) / (2.0 * h))
}

/// Wraps a pushed-field context so downstream code can carry one handle.
#[derive(Clone)]
pub struct PushedContext {
    pub frame: NormalizationFrame,
    pub coeff: Arc<CoefficientField>,
    pub potential: Potential,
    pub m_bound: f64,
}
