//! Named catalog of test cases plus the JSON catalog file formats for
//! domains and coefficient fields.

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::fields::{catalog_disk_eigen, catalog_homogeneous, CatalogEntry};
use crate::geometry::{BoundaryChart, DiniDomain, DiniModulus};
use crate::num::{Mat2, Vec2};
use serde::Deserialize;
use std::sync::Arc;

/// Resolves a named solution case:
/// `imz_kappa<k>` or `disk_eigen_k<k>_m<m>`.
pub fn entry(name: &str) -> Result<CatalogEntry> {
    if let Some(k) = name.strip_prefix("imz_kappa") {
        let kappa: u32 = k
            .parse()
            .map_err(|_| Error::config(format!("bad catalog name {name}")))?;
        return catalog_homogeneous(kappa);
    }
    if let Some(rest) = name.strip_prefix("disk_eigen_k") {
        let (k, m) = rest
            .split_once("_m")
            .ok_or_else(|| Error::config(format!("bad catalog name {name}")))?;
        let kappa: u32 = k
            .parse()
            .map_err(|_| Error::config(format!("bad catalog name {name}")))?;
        let m: usize = m
            .parse()
            .map_err(|_| Error::config(format!("bad catalog name {name}")))?;
        return catalog_disk_eigen(kappa, m);
    }
    Err(Error::config(format!(
        "unknown catalog case {name}; expected imz_kappa<k> or disk_eigen_k<k>_m<m>"
    )))
}

/// Domain catalog file format.
#[derive(Debug, Clone, Deserialize)]
pub struct DomainSpec {
    pub kind: String,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(rename = "R0", default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub table: Option<Vec<(f64, f64)>>,
}

pub fn domain_from_spec(spec: &DomainSpec) -> Result<Arc<DiniDomain>> {
    let r0 = spec.r0.unwrap_or(0.4);
    let chart = match spec.kind.as_str() {
        "flat" => BoundaryChart::flat(r0),
        "power" => {
            let beta = spec
                .beta
                .ok_or_else(|| Error::config("power domain needs beta"))?;
            BoundaryChart::power_cusp(beta, r0)?
        }
        "log_power" => {
            let delta = spec
                .delta
                .ok_or_else(|| Error::config("log_power domain needs delta"))?;
            BoundaryChart::log_power(delta, r0)?
        }
        "custom" => {
            let table = spec
                .table
                .clone()
                .ok_or_else(|| Error::config("custom domain needs a table"))?;
            let modulus = DiniModulus::custom(table, r0)?;
            // canonical chart from the modulus: dphi(t) = sign(t) psi(|t|)/2
            let m = modulus.clone();
            let shape = crate::geometry::ProfileShape::new(Box::new(move |t| 0.5 * m.psi(t)), r0);
            BoundaryChart::new(Arc::new(shape), modulus, r0)?
        }
        other => return Err(Error::config(format!("unknown domain kind {other}"))),
    };
    Ok(Arc::new(DiniDomain::new(chart)?))
}

/// The named domain catalog exercised by the geometry acceptance suite.
pub fn domain_catalog() -> Result<Vec<(String, Arc<DiniDomain>)>> {
    Ok(vec![
        (
            "flat".into(),
            Arc::new(DiniDomain::new(BoundaryChart::flat(0.4))?),
        ),
        (
            "power_beta05".into(),
            Arc::new(DiniDomain::new(BoundaryChart::power_cusp(0.5, 0.4)?)?),
        ),
        (
            "power_beta1".into(),
            Arc::new(DiniDomain::new(BoundaryChart::power_cusp(1.0, 0.4)?)?),
        ),
        (
            "log_power_delta1".into(),
            Arc::new(DiniDomain::new(BoundaryChart::log_power(1.0, 0.25)?)?),
        ),
    ])
}

/// Coefficient catalog file format.
#[derive(Debug, Clone, Deserialize)]
pub struct CoeffSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Option<serde_json::Value>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(rename = "K", default)]
    pub k: Option<f64>,
}

pub fn coeff_from_spec(spec: &CoeffSpec) -> Result<CoefficientField> {
    match spec.kind.as_str() {
        "identity" => Ok(CoefficientField::identity()),
        "diag" => {
            let p = spec
                .params
                .as_ref()
                .ok_or_else(|| Error::config("diag coefficient needs params [d1, d2]"))?;
            let d: Vec<f64> = serde_json::from_value(p.clone())?;
            if d.len() != 2 {
                return Err(Error::config("diag coefficient needs two entries"));
            }
            CoefficientField::constant(Mat2::diag(d[0], d[1]))
        }
        "affine_perturbation" => {
            #[derive(Deserialize)]
            struct AffineParams {
                #[serde(default)]
                base: Option<[[f64; 2]; 2]>,
                g: [f64; 2],
                e: [[f64; 2]; 2],
                #[serde(default)]
                window: Option<f64>,
            }
            let p = spec
                .params
                .as_ref()
                .ok_or_else(|| Error::config("affine_perturbation needs params"))?;
            let ap: AffineParams = serde_json::from_value(p.clone())?;
            let base = ap
                .base
                .map(|b| Mat2::new(b[0][0], b[0][1], b[1][0], b[1][1]))
                .unwrap_or(Mat2::IDENTITY);
            CoefficientField::affine(
                base,
                Vec2::new(ap.g[0], ap.g[1]),
                Mat2::new(ap.e[0][0], ap.e[0][1], ap.e[1][0], ap.e[1][1]),
                ap.window.unwrap_or(1.0),
            )
        }
        other => Err(Error::config(format!("unknown coefficient kind {other}"))),
    }
}

/// The coefficient fields exercised by the geometry acceptance suite.
pub fn coeff_catalog() -> Result<Vec<(String, CoefficientField)>> {
    Ok(vec![
        ("identity".into(), CoefficientField::identity()),
        (
            "diag_2_1".into(),
            CoefficientField::constant(Mat2::diag(2.0, 1.0))?,
        ),
        (
            "affine_x1".into(),
            CoefficientField::affine(
                Mat2::IDENTITY,
                Vec2::new(0.1, 0.0),
                Mat2::new(1.0, 0.5, 0.5, -1.0),
                1.0,
            )?,
        ),
    ])
}
