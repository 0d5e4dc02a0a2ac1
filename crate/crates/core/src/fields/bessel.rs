//! Bessel functions of the first kind by power series, and their zeros by
//! scan-and-bisect on the series. No special-function dependency: the
//! catalog envelope (order <= 12, zero index <= 3) keeps arguments small
//! enough that the truncated series retains well over single precision
//! after cancellation.

use crate::error::{Error, Result};
use crate::num::bisect;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

pub const MAX_ORDER: u32 = 12;
pub const MAX_ZERO_INDEX: usize = 3;
const SERIES_TERMS: usize = 60;

/// J_kappa(x) via the ascending power series.
pub fn bessel_j(kappa: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // leading factor (x/2)^kappa / kappa!
    let mut term = 1.0;
    for k in 1..=kappa {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = half * half;
    for m in 1..SERIES_TERMS {
        term *= -q / (m as f64 * (m as f64 + kappa as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

/// d/dx J_kappa(x).
pub fn bessel_j_prime(kappa: u32, x: f64) -> f64 {
    if kappa == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(kappa - 1, x) - bessel_j(kappa + 1, x))
    }
}

/// The m-th positive zero j_{kappa,m} of J_kappa, m >= 1.
pub fn bessel_zero(kappa: u32, m: usize) -> Result<f64> {
    if kappa > MAX_ORDER || m == 0 || m > MAX_ZERO_INDEX {
        return Err(Error::domain(format!(
            "bessel_zero outside series envelope: kappa = {kappa} (max {MAX_ORDER}), m = {m} (max {MAX_ZERO_INDEX})"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&z) = cache.lock().unwrap().get(&(kappa, m)) {
        return Ok(z);
    }
    let mut found = 0;
    let mut prev_x = 0.5;
    let mut prev_f = bessel_j(kappa, prev_x);
    let mut x = prev_x;
    let step = 0.05;
    let zero = loop {
        x += step;
        if x > 45.0 {
            return Err(Error::numerical(format!(
                "bessel_zero scan exhausted for kappa = {kappa}, m = {m}"
            )));
        }
        let f = bessel_j(kappa, x);
        if prev_f * f < 0.0 {
            found += 1;
            if found == m {
                break bisect(prev_x, x, 1e-13, |t| bessel_j(kappa, t));
            }
        }
        prev_x = x;
        prev_f = f;
    };
    cache.lock().unwrap().insert((kappa, m), zero);
    Ok(zero)
}
