//! The constants ledger: every named constant of the growth machinery with
//! its provenance, plus numerical verification of the radius-chain
//! inequalities at sampled scales.
//!
//! Formula-derived entries:
//!   K1 = lambda^{-3/2} K,   K2 = 1 + K1,
//!   k  = 8 K2 (K2/K1 + 3)   for K1 > 0,
//!   k  = 24 = 8 K2 (0 + 3)  at K1 = 0, where the normalizing map is exact
//!                           and the K2/K1 terms (which dominate the shifted
//!                           center p') drop out,
//!   Lambda-cap = min(1/(24 K1 + 64 k), 1/1000),
//!   ratio bounds c1 = 2, c2 = 2056 (1 + K1), c3 = 75/72, c4 = 2.
//!
//! Fitted entries: the bracket slope c2 (max |f'| on [0, C~]) and the
//! product constant K0 = exp(c2 sum Lambda(r0/2^i)).

use crate::error::{Error, Result};
use crate::geometry::DiniDomain;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Formula,
    Fitted,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Entry {
    pub value: f64,
    pub provenance: Provenance,
}

fn formula(value: f64) -> Entry {
    Entry {
        value,
        provenance: Provenance::Formula,
    }
}

fn fitted(value: f64) -> Entry {
    Entry {
        value,
        provenance: Provenance::Fitted,
    }
}

/// Per-radius verification of the chain inequalities.
#[derive(Debug, Clone, Serialize)]
pub struct ChainCheck {
    pub r: f64,
    pub lambda_r: f64,
    pub a: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r1p: f64,
    pub r2p: f64,
    pub r3p: f64,
    pub r1pp: f64,
    pub r2pp: f64,
    pub r3pp: f64,
    pub r1ppp: f64,
    pub r2ppp: f64,
    pub r3ppp: f64,
    pub ordering_ok: bool,
    pub window_ok: bool,
    pub ratio_ok: bool,
    pub a1_ok: bool,
    pub a2_ok: bool,
    pub a3_ok: bool,
    pub cv5_ok: bool,
    pub cv6_ok: bool,
    pub cv7_ok: bool,
    pub cont3_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsLedger {
    pub n: f64,
    pub lambda: f64,
    pub lipschitz_k: f64,
    pub k1: Entry,
    pub k2: Entry,
    pub k_const: Entry,
    pub lambda_cap: Entry,
    /// Which constraint bound the cap: "fr3" or "thousand".
    pub binding: String,
    /// Largest dyadic radius of the domain obeying the cap.
    pub r0_star: f64,
    /// (rs) ratio bounds: c1 <= r2/r1 <= c2, c3 <= r3/r2 <= c4.
    pub c1_ratio: Entry,
    pub c2_ratio: Entry,
    pub c3_ratio: Entry,
    pub c4_ratio: Entry,
    /// Domain of the bracket function f: [0, C~].
    pub c_tilde: Entry,
    /// Fitted max |f'| on [0, C~].
    pub c2_slope: Entry,
    /// exp(c2 sum_i Lambda(r0_star/4 / 2^i)).
    pub k0: Entry,
    pub f_table: Vec<(f64, f64)>,
    pub chain_checks: Vec<ChainCheck>,
    pub pass: bool,
}

/// The bracket appearing in the growth display, as a function of
/// y = Lambda(r):
/// f(y) = log[(1+4 K1 y)(2+16 k y) / ((1-4 K1 y)(1-16 k y))]
///      / log[(1-4 K1 y)(2-8 k y) / ((1+4 K1 y)(1+8 k y))].
pub fn growth_bracket(k1: f64, k: f64, y: f64) -> f64 {
    let num = ((1.0 + 4.0 * k1 * y) * (2.0 + 16.0 * k * y)).ln()
        - ((1.0 - 4.0 * k1 * y) * (1.0 - 16.0 * k * y)).ln();
    let den = ((1.0 - 4.0 * k1 * y) * (2.0 - 8.0 * k * y)).ln()
        - ((1.0 + 4.0 * k1 * y) * (1.0 + 8.0 * k * y)).ln();
    num / den
}

/// k from the formula, with the exact-normalization reduction at K1 = 0.
pub fn k_formula(k1: f64) -> f64 {
    let k2 = 1.0 + k1;
    if k1 > 0.0 {
        8.0 * k2 * (k2 / k1 + 3.0)
    } else {
        8.0 * k2 * 3.0
    }
}

const CHAIN_SAMPLES: usize = 64;

fn check_chain(r: f64, lambda_r: f64, k1: f64, k2: f64, k: f64) -> ChainCheck {
    let a = 4.0 * lambda_r * r;
    let lambda1 = 1.0 - k1 * a;
    let lambda2 = 1.0 + k1 * a;
    let r1 = (r / 4.0 - k * a) / lambda2;
    let r2 = (r / 2.0 + k * a) / lambda1;
    let r3 = (r - k * a) / lambda2;
    let r1p = (r / 4.0 - k * a / 2.0) / lambda2;
    let r2p = (r / 2.0 + k * a / 2.0) / lambda1;
    let r3p = (r - k * a / 2.0) / lambda2;
    let r1pp = r / 4.0 - k * a / 2.0;
    let r2pp = r / 2.0 + k * a / 2.0;
    let r3pp = r - k * a / 2.0;
    let r1ppp = r / 4.0 - k * a / 3.0;
    let r2ppp = (r / 2.0 + k * a / 3.0) / lambda1;
    let r3ppp = r - k * a / 3.0;

    let tol = 1e-12 * r;
    let ordering_ok = r1 > 0.0 && r1 < r2 && r2 < r3 && lambda1 > 0.0;
    // r3 < sqrt(lambda_{y0}) (r - a), worst case sqrt(lambda_{y0}) = lambda1
    let window_ok = r3 <= lambda1 * (r - a) + tol;
    let (c1, c2c) = (2.0, 2056.0 * (1.0 + k1));
    let (c3, c4) = (75.0 / 72.0, 2.0);
    let ratio_ok = {
        let q21 = r2 / r1;
        let q32 = r3 / r2;
        q21 >= c1 - 1e-12 && q21 <= c2c + 1e-12 && q32 >= c3 - 1e-12 && q32 <= c4 + 1e-12
    };
    let p = k2 * a; // worst-case |p'|
    let sample = |top: f64, f: &dyn Fn(f64) -> bool| -> bool {
        (0..CHAIN_SAMPLES).all(|i| f(top * i as f64 / CHAIN_SAMPLES as f64))
    };
    // weight comparisons under worst-case shifted centers |p'| <= K2 a
    let a1_ok = sample(r2p, &|t| {
        r2p * r2p - t * t <= r2 * r2 - (t + p) * (t + p) + tol && r2 >= t + p
    });
    let a2_ok = sample(r1, &|t| {
        r1 * r1 - t * t <= r1p * r1p - (t + p) * (t + p) + tol
    });
    let a3_ok = sample(r3, &|t| {
        r3 * r3 - t * t <= r3p * r3p - (t + p) * (t + p) + tol
    });
    // weight comparisons under the near-identity map |Tx - p'| within
    // [lambda1 |x|, lambda2 |x|]
    let cv5_ok = sample(r1pp, &|s| {
        r1ppp * r1ppp - lambda1 * lambda1 * s * s <= (r / 4.0 - k * a / 6.0).powi(2) - s * s + tol
            && r1ppp >= lambda2 * s - tol
    });
    let cv6_ok = sample(r / 2.0 + k * a / 3.0, &|s| {
        r2p * r2p - lambda2 * lambda2 * s * s >= (r / 2.0 + k * a / 3.0).powi(2) - s * s - tol
            && r2p >= lambda2 * s - tol
    });
    let cv7_ok = sample(r3pp, &|s| {
        r3ppp * r3ppp - lambda1 * lambda1 * s * s <= (r - k * a / 6.0).powi(2) - s * s + tol
            && r3ppp >= lambda2 * s - tol
    });
    // ball inclusions after mapping back: lambda2 r1' <= r1'',
    // (r/2 + ka/3)/lambda1 <= r2''', lambda2 r3' <= r3''
    let cont3_ok = lambda2 * r1p <= r1pp + tol
        && (r / 2.0 + k * a / 3.0) / lambda1 <= r2ppp + tol
        && lambda2 * r3p <= r3pp + tol;
    let pass = ordering_ok
        && window_ok
        && ratio_ok
        && a1_ok
        && a2_ok
        && a3_ok
        && cv5_ok
        && cv6_ok
        && cv7_ok
        && cont3_ok;
    ChainCheck {
        r,
        lambda_r,
        a,
        lambda1,
        lambda2,
        r1,
        r2,
        r3,
        r1p,
        r2p,
        r3p,
        r1pp,
        r2pp,
        r3pp,
        r1ppp,
        r2ppp,
        r3ppp,
        ordering_ok,
        window_ok,
        ratio_ok,
        a1_ok,
        a2_ok,
        a3_ok,
        cv5_ok,
        cv6_ok,
        cv7_ok,
        cont3_ok,
        pass,
    }
}

/// Builds the ledger for ellipticity lambda and Lipschitz bound K over the
/// given domain, verifying every chain inequality at 16 log-spaced radii.
pub fn constants_ledger(
    lambda: f64,
    lipschitz_k: f64,
    domain: &DiniDomain,
) -> Result<ConstantsLedger> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::domain("ledger requires lambda in (0, 1]"));
    }
    if lipschitz_k < 0.0 {
        return Err(Error::domain("ledger requires K >= 0"));
    }
    let k1 = lambda.powf(-1.5) * lipschitz_k;
    let k2 = 1.0 + k1;
    let k = k_formula(k1);
    let fr3 = 1.0 / (24.0 * k1 + 64.0 * k);
    let lambda_cap = fr3.min(1e-3);
    let binding = if fr3 < 1e-3 { "fr3" } else { "thousand" };
    let r0_star = domain
        .r0_effective_for_cap(lambda_cap)
        .ok_or_else(|| Error::domain("ledger: no dyadic radius satisfies the Lambda cap"))?;

    // chain checks at 16 log-spaced radii in (0, r0_star]
    let mut chain_checks = Vec::with_capacity(16);
    for i in 0..16 {
        let r = r0_star * (1.0 / 256.0f64).powf(i as f64 / 15.0);
        let lam = domain.lambda_of(r)?;
        chain_checks.push(check_chain(r, lam, k1, k2, k));
    }
    for c in &chain_checks {
        if !c.pass {
            return Err(Error::numerical(format!(
                "ledger chain inequality failed at r = {} (ordering {}, window {}, ratios {}, A1 {}, A2 {}, A3 {}, cv5 {}, cv6 {}, cv7 {}, cont3 {})",
                c.r,
                c.ordering_ok,
                c.window_ok,
                c.ratio_ok,
                c.a1_ok,
                c.a2_ok,
                c.a3_ok,
                c.cv5_ok,
                c.cv6_ok,
                c.cv7_ok,
                c.cont3_ok
            )));
        }
    }

    // bracket table and max-slope fit on [0, C~]
    let c_tilde = if k1 > 0.0 {
        (1.0 / (24.0 * k1)).min(1.0 / (64.0 * k))
    } else {
        1.0 / (64.0 * k)
    };
    let grid = 64;
    let mut f_table = Vec::with_capacity(grid + 1);
    for i in 0..=grid {
        let y = c_tilde * i as f64 / grid as f64;
        f_table.push((y, growth_bracket(k1, k, y)));
    }
    if (f_table[0].1 - 1.0).abs() > 1e-15 {
        return Err(Error::numerical("ledger: f(0) != 1"));
    }
    let mut c2_slope = 0.0f64;
    for w in f_table.windows(2) {
        c2_slope = c2_slope.max(((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs());
    }
    for &(y, f) in &f_table {
        if !(0.0 <= f && f <= (c2_slope * y).exp() + 1e-12) {
            return Err(Error::numerical(format!(
                "ledger: bracket bound 0 <= f <= exp(c2 y) fails at y = {y}"
            )));
        }
    }

    // K0 from the dyadic Lambda sum at r0 = r0_star / 4
    let mut lambda_sum = 0.0;
    let mut s = r0_star / 4.0;
    for _ in 0..200 {
        match domain.lambda_of(s) {
            Ok(l) => lambda_sum += l,
            Err(_) => break,
        }
        s *= 0.5;
        if s < 1e-300 {
            break;
        }
    }
    let k0 = (c2_slope * lambda_sum).exp();

    Ok(ConstantsLedger {
        n: crate::functionals::DIM,
        lambda,
        lipschitz_k,
        k1: formula(k1),
        k2: formula(k2),
        k_const: formula(k),
        lambda_cap: formula(lambda_cap),
        binding: binding.to_string(),
        r0_star,
        c1_ratio: formula(2.0),
        c2_ratio: formula(2056.0 * (1.0 + k1)),
        c3_ratio: formula(75.0 / 72.0),
        c4_ratio: formula(2.0),
        c_tilde: formula(c_tilde),
        c2_slope: fitted(c2_slope),
        k0: fitted(k0),
        f_table,
        chain_checks,
        pass: true,
    })
}
