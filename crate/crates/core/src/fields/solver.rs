//! Conservative five-point finite differences for div(A Du) = V u on a
//! rectangular window below a boundary chart, with u = 0 on the chart
//! portion and Dirichlet data on the remaining window edges. The linear
//! system is solved matrix-free by Jacobi-preconditioned conjugate
//! gradients.
//!
//! The scheme carries the diagonal of A through harmonic-mean face
//! coefficients; off-diagonal coefficient entries are outside the stencil
//! and are rejected.

use super::{Field, FieldKind, SolutionField};
use crate::coefficients::{CoefficientField, Potential};
use crate::error::{Error, Result};
use crate::geometry::{DiniDomain, Region};
use crate::num::Vec2;
use std::sync::Arc;

/// Rectangular computational window [-half_width, half_width] x [-depth, 0]
/// in chart coordinates.
#[derive(Debug, Clone, Copy)]
pub struct SolveWindow {
    pub half_width: f64,
    pub depth: f64,
}

/// Node-centered scalar samples with bilinear interpolation off-grid and
/// centered-difference gradients.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GridField {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: Vec2,
    /// Row-major: values[jy * nx + jx].
    pub values: Vec<f64>,
}

impl GridField {
    fn clamp_cell(&self, p: Vec2) -> (usize, usize, f64, f64) {
        let fx = ((p.x - self.origin.x) / self.h).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((p.y - self.origin.y) / self.h).clamp(0.0, (self.ny - 1) as f64);
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        (ix, iy, fx - ix as f64, fy - iy as f64)
    }

    fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    fn bilinear(&self, p: Vec2, v: &[f64]) -> f64 {
        let (ix, iy, tx, ty) = self.clamp_cell(p);
        let idx = |jx: usize, jy: usize| v[jy * self.nx + jx];
        (1.0 - tx) * (1.0 - ty) * idx(ix, iy)
            + tx * (1.0 - ty) * idx(ix + 1, iy)
            + (1.0 - tx) * ty * idx(ix, iy + 1)
            + tx * ty * idx(ix + 1, iy + 1)
    }

    /// Centered-difference gradient samples (one-sided at the edges).
    fn gradient_grids(&self) -> (Vec<f64>, Vec<f64>) {
        let mut gx = vec![0.0; self.values.len()];
        let mut gy = vec![0.0; self.values.len()];
        for jy in 0..self.ny {
            for jx in 0..self.nx {
                let i = jy * self.nx + jx;
                gx[i] = if jx == 0 {
                    (self.at(1, jy) - self.at(0, jy)) / self.h
                } else if jx == self.nx - 1 {
                    (self.at(jx, jy) - self.at(jx - 1, jy)) / self.h
                } else {
                    (self.at(jx + 1, jy) - self.at(jx - 1, jy)) / (2.0 * self.h)
                };
                gy[i] = if jy == 0 {
                    (self.at(jx, 1) - self.at(jx, 0)) / self.h
                } else if jy == self.ny - 1 {
                    (self.at(jx, jy) - self.at(jx, jy - 1)) / self.h
                } else {
                    (self.at(jx, jy + 1) - self.at(jx, jy - 1)) / (2.0 * self.h)
                };
            }
        }
        (gx, gy)
    }
}

/// GridField plus cached gradient grids, implementing `Field`.
pub struct GridBackedField {
    pub grid: GridField,
    gx: Vec<f64>,
    gy: Vec<f64>,
}

impl GridBackedField {
    pub fn new(grid: GridField) -> Self {
        let (gx, gy) = grid.gradient_grids();
        GridBackedField { grid, gx, gy }
    }
}

impl Field for GridBackedField {
    fn eval(&self, p: Vec2) -> f64 {
        self.grid.bilinear(p, &self.grid.values)
    }
    fn grad(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            self.grid.bilinear(p, &self.gx),
            self.grid.bilinear(p, &self.gy),
        )
    }
}

/// Writes the grid-field file format: header {nx, ny, h, origin} plus
/// row-major values, as JSON.
pub fn save_grid(grid: &GridField, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer(std::io::BufWriter::new(file), grid)?;
    Ok(())
}

pub fn load_grid(path: &std::path::Path) -> Result<GridField> {
    let file = std::fs::File::open(path)?;
    let grid: GridField = serde_json::from_reader(std::io::BufReader::new(file))?;
    if grid.values.len() != grid.nx * grid.ny {
        return Err(Error::config("grid file: values length != nx * ny"));
    }
    Ok(grid)
}

/// Solves div(A Du) = V u on the window with u = 0 at nodes on or above the
/// chart boundary and u = data on the left/right/bottom window edges.
pub fn fd_solve(
    domain: &Arc<DiniDomain>,
    coeff: &CoefficientField,
    potential: &Potential,
    window: SolveWindow,
    data: &dyn Fn(Vec2) -> f64,
    h: f64,
) -> Result<SolutionField> {
    fd_solve_with_grid(domain, coeff, potential, window, data, h).map(|(sol, _)| sol)
}

/// `fd_solve` variant that also returns the raw grid for serialization.
pub fn fd_solve_with_grid(
    domain: &Arc<DiniDomain>,
    coeff: &CoefficientField,
    potential: &Potential,
    window: SolveWindow,
    data: &dyn Fn(Vec2) -> f64,
    h: f64,
) -> Result<(SolutionField, GridField)> {
    if !h.is_finite() || h <= 0.0 || h > window.half_width / 8.0 || h > window.depth / 8.0 {
        return Err(Error::domain(
            "fd_solve: spacing must satisfy h <= window extent / 8",
        ));
    }
    if window.half_width > domain.chart.usable_radius() {
        return Err(Error::domain(
            "fd_solve: window exceeds the chart's usable width",
        ));
    }
    let nx = (2.0 * window.half_width / h).round() as usize + 1;
    // the grid must reach above the chart graph so every unknown has its
    // north neighbor on the grid
    let mut phi_max = 0.0f64;
    for i in 0..=256 {
        let t = window.half_width * (2.0 * i as f64 / 256.0 - 1.0);
        phi_max = phi_max.max(domain.chart.phi(t));
    }
    let top_rows = (phi_max / h).ceil() as usize + 1;
    let ny = (window.depth / h).round() as usize + 1 + top_rows;
    let origin = Vec2::new(-window.half_width, -window.depth);
    let node = |jx: usize, jy: usize| -> Vec2 {
        Vec2::new(origin.x + jx as f64 * h, origin.y + jy as f64 * h)
    };

    // off-diagonal coefficients cannot be carried by a five-point stencil
    for &p in &[
        Vec2::ZERO,
        Vec2::new(window.half_width, -window.depth),
        Vec2::new(-window.half_width, -0.5 * window.depth),
    ] {
        if coeff.at(p).b.abs() > 1e-14 {
            return Err(Error::domain(
                "fd_solve supports diagonal coefficient fields only",
            ));
        }
    }

    // classify nodes: 0 = unknown, 1 = Dirichlet
    let n_nodes = nx * ny;
    let mut dirichlet = vec![false; n_nodes];
    let mut values = vec![0.0; n_nodes];
    for jy in 0..ny {
        for jx in 0..nx {
            let i = jy * nx + jx;
            let p = node(jx, jy);
            let on_gamma = p.y >= domain.chart.phi(p.x) - 1e-14 * h.max(1.0);
            let on_edge = jx == 0 || jx == nx - 1 || jy == 0;
            if on_gamma {
                dirichlet[i] = true;
                values[i] = 0.0;
            } else if on_edge {
                dirichlet[i] = true;
                values[i] = data(p);
            }
        }
    }
    let unknowns: Vec<usize> = (0..n_nodes).filter(|&i| !dirichlet[i]).collect();
    if unknowns.is_empty() {
        return Err(Error::domain("fd_solve: window contains no unknowns"));
    }
    let index_of: Vec<i64> = {
        let mut m = vec![-1i64; n_nodes];
        for (k, &i) in unknowns.iter().enumerate() {
            m[i] = k as i64;
        }
        m
    };

    // harmonic-mean face coefficients from the diagonal of A
    let face = |a: f64, b: f64| 2.0 * a * b / (a + b);
    let h2 = h * h;
    // per-unknown stencil: (diag, [(neighbor node, coeff)])
    let mut diag = vec![0.0; unknowns.len()];
    let mut rhs = vec![0.0; unknowns.len()];
    let mut links: Vec<[(i64, f64); 4]> = vec![[(-1, 0.0); 4]; unknowns.len()];
    for (k, &i) in unknowns.iter().enumerate() {
        let (jx, jy) = (i % nx, i / nx);
        let p = node(jx, jy);
        let a_p = coeff.at(p);
        let neighbors = [
            (jx.wrapping_sub(1), jy, true),
            (jx + 1, jy, true),
            (jx, jy.wrapping_sub(1), false),
            (jx, jy + 1, false),
        ];
        let mut d = potential.at(p);
        for (slot, &(nxj, nyj, horizontal)) in neighbors.iter().enumerate() {
            if nxj >= nx || nyj >= ny {
                return Err(Error::numerical(
                    "fd_solve: unknown node touches the window exterior",
                ));
            }
            let q = node(nxj, nyj);
            let a_q = coeff.at(q);
            let w = if horizontal {
                face(a_p.a, a_q.a)
            } else {
                face(a_p.d, a_q.d)
            } / h2;
            d += w;
            let ni = nyj * nx + nxj;
            if dirichlet[ni] {
                rhs[k] += w * values[ni];
            } else {
                links[k][slot] = (index_of[ni], w);
            }
        }
        diag[k] = d;
    }

    // -div(A D u) + V u = 0 in SPD form; CG with Jacobi preconditioning
    let apply = |x: &[f64], out: &mut [f64]| {
        for k in 0..x.len() {
            let mut v = diag[k] * x[k];
            for &(ni, w) in &links[k] {
                if ni >= 0 {
                    v -= w * x[ni as usize];
                }
            }
            out[k] = v;
        }
    };
    let n = unknowns.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.clone();
    let rhs_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rhs_norm == 0.0 {
        // zero data everywhere: u = 0 by uniqueness
        let grid = GridField {
            nx,
            ny,
            h,
            origin,
            values,
        };
        return Ok((grid_solution(domain, potential, grid.clone()), grid));
    }
    let precond: Vec<f64> = diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut z: Vec<f64> = r.iter().zip(&precond).map(|(ri, pi)| ri * pi).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let max_iters = 10 * n;
    let mut residual_history = Vec::new();
    let mut converged = false;
    for it in 0..max_iters {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::numerical(
                "fd_solve: indefinite discrete operator (V too negative); use a smaller window",
            ));
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if it % 32 == 0 || rnorm <= 1e-10 * rhs_norm {
            residual_history.push(rnorm / rhs_norm);
        }
        if rnorm <= 1e-10 * rhs_norm {
            converged = true;
            break;
        }
        for k in 0..n {
            z[k] = r[k] * precond[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    if !converged {
        return Err(Error::numerical(format!(
            "fd_solve: CG did not reach 1e-10 in {max_iters} iterations; residual history {residual_history:?}"
        )));
    }
    for (k, &i) in unknowns.iter().enumerate() {
        values[i] = x[k];
    }
    let grid = GridField {
        nx,
        ny,
        h,
        origin,
        values,
    };
    Ok((grid_solution(domain, potential, grid.clone()), grid))
}

fn grid_solution(
    domain: &Arc<DiniDomain>,
    potential: &Potential,
    grid: GridField,
) -> SolutionField {
    SolutionField {
        field: Arc::new(GridBackedField::new(grid)),
        region: Region::Chart(domain.clone()),
        potential: *potential,
        m_bound: potential.m_bound(),
        kind: FieldKind::Grid,
    }
}
