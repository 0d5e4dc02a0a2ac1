//! Config-driven experiment runner. Every subcommand reads a JSON config,
//! runs one analysis pipeline, and writes plot-ready CSV plus a JSON report
//! that embeds the resolved config (re-running a sidecar reproduces the
//! outputs byte for byte).
//!
//! Exit codes: 0 ok, 2 config error, 3 numerical error. Errors are emitted
//! as JSON on stderr.

use clap::{Parser, Subcommand};
use dinilab::analysis::{
    constants_ledger, dyadic_iteration, fit_monotonicity, geometric_radii, order_scan_csv,
    order_vs_m_scan, three_sphere_h, three_sphere_sup,
};
use dinilab::catalog::{self, CoeffSpec, DomainSpec};
use dinilab::coefficients::CoefficientField;
use dinilab::error::Error;
use dinilab::fields::solver::{fd_solve_with_grid, save_grid, SolveWindow};
use dinilab::functionals::frequency_trace;
use dinilab::num::Vec2;
use dinilab::quadrature::QuadParams;
use dinilab::report::{write_json, write_text};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "dinilab", version, about = "frequency-function laboratory")]
struct Cli {
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed recorded in sidecars (all sampling is deterministic).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Angular node count override.
    #[arg(long, global = true)]
    angular: Option<usize>,
    /// Radial node count override.
    #[arg(long, global = true)]
    radial: Option<usize>,
    /// Quadrature refinement tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frequency trace r -> (H, I, N) as CSV + JSON sidecar.
    Trace,
    /// Adjusted-frequency monotonicity fit.
    Monotone,
    /// Three-sphere inequalities (height and sup-norm variants).
    ThreeSphere,
    /// Dyadic iteration and vanishing-order estimation.
    Order,
    /// Star-shapedness margins over a domain catalog entry.
    Domain,
    /// Constants ledger for (lambda, K) over a domain.
    Ledger,
    /// Finite-difference solve; writes the grid-field file.
    Solve,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    case: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radii: Option<RadiiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quadrature: Option<QuadSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeff: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    three_sphere: Option<ThreeSphereSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<OrderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solve: Option<SolveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RadiiSpec {
    Grid { min: f64, max: f64, count: usize },
    Dyadic { base: f64, levels: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct QuadSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angular: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radial: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ThreeSphereSpec {
    r1: f64,
    r2: f64,
    r3: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OrderSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q_max: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SolveSpec {
    half_width: f64,
    depth: f64,
    h: f64,
    /// Boundary data: a catalog case name imposed on the window edges, or
    /// "zero".
    data: String,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let kind = match &e {
                Error::Config(_) | Error::Json(_) | Error::Io(_) => "config",
                _ => "numeric",
            };
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "kind": kind })
            );
            if kind == "config" {
                2
            } else {
                3
            }
        }
    };
    std::process::exit(code);
}

fn load_config(cli: &Cli) -> Result<Config, Error> {
    let Some(path) = &cli.config else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path)?;
    let cfg: Config = serde_json::from_str(&text)?;
    Ok(cfg)
}

fn quad_params(cli: &Cli, cfg: &Config) -> QuadParams {
    let mut p = QuadParams::default();
    if let Some(q) = &cfg.quadrature {
        if let Some(a) = q.angular {
            p.angular = a;
        }
        if let Some(r) = q.radial {
            p.radial = r;
        }
        if let Some(t) = q.tol {
            p.tol = t;
        }
    }
    if let Some(a) = cli.angular {
        p.angular = a;
    }
    if let Some(r) = cli.radial {
        p.radial = r;
    }
    if let Some(t) = cli.tol {
        p.tol = t;
    }
    p
}

fn resolve_radii(cfg: &Config) -> Result<Vec<f64>, Error> {
    match &cfg.radii {
        None => Ok(geometric_radii(0.05, 0.4, 16)),
        Some(RadiiSpec::Grid { min, max, count }) => {
            if !(*min > 0.0 && max > min && *count >= 2) {
                return Err(Error::config(
                    "radii grid requires 0 < min < max, count >= 2",
                ));
            }
            Ok(geometric_radii(*min, *max, *count))
        }
        Some(RadiiSpec::Dyadic { base, levels }) => {
            if !(*base > 0.0 && *levels >= 1) {
                return Err(Error::config("dyadic radii require base > 0, levels >= 1"));
            }
            let mut v: Vec<f64> = (0..*levels)
                .map(|i| base * 2f64.powi(-(i as i32)))
                .collect();
            v.reverse();
            Ok(v)
        }
    }
}

fn case_entry(cfg: &Config) -> Result<dinilab::fields::CatalogEntry, Error> {
    let name = cfg
        .case
        .as_deref()
        .ok_or_else(|| Error::config("config needs a `case` catalog name"))?;
    catalog::entry(name)
}

fn anchor_of(cfg: &Config, entry: &dinilab::fields::CatalogEntry) -> Vec2 {
    cfg.anchor
        .map(|a| Vec2::new(a[0], a[1]))
        .unwrap_or(entry.anchor)
}

fn resolve_domain(cfg: &Config) -> Result<std::sync::Arc<dinilab::geometry::DiniDomain>, Error> {
    let spec_value = cfg
        .domain
        .clone()
        .ok_or_else(|| Error::config("config needs a `domain` spec"))?;
    let spec: DomainSpec = serde_json::from_value(spec_value)?;
    catalog::domain_from_spec(&spec)
}

fn resolve_coeff(cfg: &Config) -> Result<CoefficientField, Error> {
    match &cfg.coeff {
        None => Ok(CoefficientField::identity()),
        Some(v) => {
            let spec: CoeffSpec = serde_json::from_value(v.clone())?;
            catalog::coeff_from_spec(&spec)
        }
    }
}

fn sidecar(cli: &Cli, cfg: &Config, body: serde_json::Value) -> serde_json::Value {
    serde_json::json!({
        "config": cfg,
        "seed": cfg.seed.unwrap_or(cli.seed),
        "report": body,
    })
}

fn run(cli: &Cli) -> Result<(), Error> {
    std::fs::create_dir_all(&cli.out)?;
    let cfg = load_config(cli)?;
    let params = quad_params(cli, &cfg);
    match cli.command {
        Command::Trace => cmd_trace(cli, &cfg, &params),
        Command::Monotone => cmd_monotone(cli, &cfg, &params),
        Command::ThreeSphere => cmd_three_sphere(cli, &cfg, &params),
        Command::Order => cmd_order(cli, &cfg, &params),
        Command::Domain => cmd_domain(cli, &cfg),
        Command::Ledger => cmd_ledger(cli, &cfg),
        Command::Solve => cmd_solve(cli, &cfg),
    }
}

fn cmd_trace(cli: &Cli, cfg: &Config, params: &QuadParams) -> Result<(), Error> {
    let entry = case_entry(cfg)?;
    let z0 = anchor_of(cfg, &entry);
    let radii = resolve_radii(cfg)?;
    let alpha = cfg.alpha.unwrap_or_else(|| entry.solution.alpha_default());
    let tr = frequency_trace(
        &entry.solution,
        &entry.coeff,
        z0,
        &radii,
        alpha,
        false,
        params,
    )?;
    write_text(&cli.out.join("trace.csv"), &tr.to_csv())?;
    write_json(
        &cli.out.join("trace.json"),
        &sidecar(cli, cfg, serde_json::to_value(&tr)?),
    )?;
    Ok(())
}

fn cmd_monotone(cli: &Cli, cfg: &Config, params: &QuadParams) -> Result<(), Error> {
    let entry = case_entry(cfg)?;
    let z0 = anchor_of(cfg, &entry);
    let radii = resolve_radii(cfg)?;
    let alpha = cfg.alpha.unwrap_or_else(|| entry.solution.alpha_default());
    let tr = frequency_trace(
        &entry.solution,
        &entry.coeff,
        z0,
        &radii,
        alpha,
        false,
        params,
    )?;
    let rep = fit_monotonicity(&tr, entry.solution.m_bound, 1e-8)?;
    let body = serde_json::json!({
        "case": entry.name,
        "constants": {"C1": rep.c1, "C2": rep.c2},
        "pass": rep.pass,
        "witnesses": [
            {"max_violation": rep.max_violation, "raw_violation": rep.raw_violation}
        ],
    });
    write_json(&cli.out.join("monotone.json"), &sidecar(cli, cfg, body))?;
    Ok(())
}

fn cmd_three_sphere(cli: &Cli, cfg: &Config, params: &QuadParams) -> Result<(), Error> {
    let entry = case_entry(cfg)?;
    let z0 = anchor_of(cfg, &entry);
    let spec = cfg.three_sphere.clone().unwrap_or(ThreeSphereSpec {
        r1: 0.05,
        r2: 0.1,
        r3: 0.3,
    });
    let alpha = cfg.alpha.unwrap_or_else(|| entry.solution.alpha_default());
    let m = entry.solution.m_bound;
    let h_rep = three_sphere_h(
        &entry.solution,
        &entry.coeff,
        z0,
        spec.r1,
        spec.r2,
        spec.r3,
        alpha,
        m,
        params,
    )?;
    let sup_rep = three_sphere_sup(
        &entry.solution,
        &entry.coeff,
        z0,
        spec.r1,
        spec.r2,
        spec.r3,
        alpha,
        m,
        params,
    )?;
    let pass = h_rep.pass && sup_rep.pass;
    let body = serde_json::json!({
        "case": entry.name,
        "height": h_rep,
        "sup": sup_rep,
        "pass": pass,
    });
    write_json(&cli.out.join("three_sphere.json"), &sidecar(cli, cfg, body))?;
    Ok(())
}

fn cmd_order(cli: &Cli, cfg: &Config, params: &QuadParams) -> Result<(), Error> {
    let spec = cfg.order.clone().unwrap_or(OrderSpec {
        r0: None,
        q_max: None,
    });
    let q_max = spec.q_max.unwrap_or(6);
    if let Some(named) = &cfg.family {
        let mut family = Vec::new();
        for name in named {
            family.push(catalog::entry(name)?);
        }
        let r0 = spec.r0.unwrap_or(0.1);
        let rows = order_vs_m_scan(&family, r0, q_max)?;
        write_text(&cli.out.join("order.csv"), &order_scan_csv(&rows))?;
        let max_ratio = rows
            .iter()
            .map(|r| r.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        let body = serde_json::json!({
            "rows": rows,
            "max_ratio": max_ratio,
        });
        write_json(&cli.out.join("order.json"), &sidecar(cli, cfg, body))?;
        return Ok(());
    }
    let entry = case_entry(cfg)?;
    let z0 = anchor_of(cfg, &entry);
    let alpha = cfg.alpha.unwrap_or_else(|| entry.solution.alpha_default());
    let r0 = spec.r0.unwrap_or(0.1);
    let est = dyadic_iteration(
        &entry.solution,
        z0,
        r0,
        q_max,
        alpha,
        entry.solution.m_bound,
        None,
        params,
    )?;
    let body = serde_json::json!({"case": entry.name, "estimate": est});
    write_json(&cli.out.join("order.json"), &sidecar(cli, cfg, body))?;
    Ok(())
}

fn cmd_domain(cli: &Cli, cfg: &Config) -> Result<(), Error> {
    let domain = resolve_domain(cfg)?;
    let coeff = resolve_coeff(cfg)?;
    let mut rows = Vec::new();
    let mut all_pass = true;
    for j in 0..8 {
        let r = domain.r0_effective * 2f64.powi(-j);
        let star = domain.star_shape_margin(r, 256)?;
        let gen = domain.generalized_star_margin(&coeff, r, 256)?;
        all_pass &= star.pass && gen.pass;
        rows.push(serde_json::json!({
            "r": r,
            "lambda": domain.lambda_of(r)?,
            "star_min": star.min,
            "star_max": star.max,
            "star_pass": star.pass,
            "generalized_min": gen.min,
            "generalized_pass": gen.pass,
        }));
    }
    let body = serde_json::json!({
        "r0_effective": domain.r0_effective,
        "dyadic_checks": rows,
        "pass": all_pass,
    });
    write_json(&cli.out.join("domain.json"), &sidecar(cli, cfg, body))?;
    Ok(())
}

fn cmd_ledger(cli: &Cli, cfg: &Config) -> Result<(), Error> {
    let domain = resolve_domain(cfg)?;
    let lambda = cfg.lambda.unwrap_or(1.0);
    let k = cfg.k.unwrap_or(0.0);
    let ledger = constants_ledger(lambda, k, &domain)?;
    write_json(
        &cli.out.join("ledger.json"),
        &sidecar(cli, cfg, serde_json::to_value(&ledger)?),
    )?;
    Ok(())
}

fn cmd_solve(cli: &Cli, cfg: &Config) -> Result<(), Error> {
    let domain = resolve_domain(cfg)?;
    let coeff = resolve_coeff(cfg)?;
    let spec = cfg
        .solve
        .clone()
        .ok_or_else(|| Error::config("solve needs a `solve` spec"))?;
    let data_entry = if spec.data == "zero" {
        None
    } else {
        Some(catalog::entry(&spec.data)?)
    };
    let data = |p: Vec2| -> f64 {
        data_entry
            .as_ref()
            .map(|e| e.solution.eval(p))
            .unwrap_or(0.0)
    };
    let potential = dinilab::coefficients::Potential::Zero;
    let (_, grid) = fd_solve_with_grid(
        &domain,
        &coeff,
        &potential,
        SolveWindow {
            half_width: spec.half_width,
            depth: spec.depth,
        },
        &data,
        spec.h,
    )?;
    save_grid(&grid, &cli.out.join("field.json"))?;
    let body = serde_json::json!({
        "nx": grid.nx,
        "ny": grid.ny,
        "h": grid.h,
        "origin": grid.origin,
    });
    write_json(&cli.out.join("solve.json"), &sidecar(cli, cfg, body))?;
    Ok(())
}
