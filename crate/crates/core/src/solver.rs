//! Boundary polynomial, generating functions and blocking probabilities.
//!
//! The unknown polynomial `P2^-(y) = sum_{n<=a} p(0,n) y^n` is fixed by an
//! `a x a` linear system whose coefficients are integrals over the angle
//! `theta` parametrizing the circle of radius `r2`:
//!
//! ```text
//! r2^n p(0,n+1) = beta_n p(0,0) + sum_k alpha_{n,k} p(0,k),   n = 0..a-1
//! ```
//!
//! The system is homogeneous in `p(0,0)`, and so are `P1` and `P2`. The solver
//! seeds `p(0,0) = 1`, solves, and rescales everything once with the rate
//! conservation law `lambda1 B1 + lambda2 B2 = lambda1 + lambda2 - mu1c1 - mu2c2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryCache, Phi2Table};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::model::{BlockingPair, Model, ModelParams};
use crate::quadrature::{cosine_grid, gauss_grid, pairwise_sum, Grid, QuadConfig};

/// Condition estimate above which the boundary system is rejected.
pub const MAX_CONDITION: f64 = 1e12;
/// Entries more negative than this after scaling are a hard error.
pub const NEGATIVE_TOLERANCE: f64 = 1e-8;
/// Uniform samples on the circle of radius `r2` in [`AnalyticSolver::eval_p2`].
pub const CONTOUR_POINTS: usize = 4096;

/// `p(0,0..=a)`, the coefficients of `P2^-`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryVector {
    pub p: Vec<f64>,
    /// The `p(0,0)` fixed by normalization.
    pub seed_scale: f64,
}

impl BoundaryVector {
    /// `P2^-(y)` by Horner's rule.
    pub fn eval(&self, y: f64) -> f64 {
        self.p.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    pub fn eval_complex(&self, y: Complex64) -> Complex64 {
        self.p
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * y + c)
    }
}

/// Coefficients of the boundary system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMatrix {
    /// `alpha[n][k] = alpha1_{n,k} + alpha2_{n,k}`, `n < a`, `k <= a`.
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    /// `r2^n` for `n < a`.
    pub r2_powers: Vec<f64>,
}

impl CoefficientMatrix {
    pub fn threshold(&self) -> usize {
        self.beta.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub grid_size: usize,
    pub contour_points: usize,
    /// 1-norm condition estimate of the equilibrated boundary system.
    pub condition_estimate: f64,
    /// Negative roundoff entries of the boundary vector set to zero.
    pub clamped_entries: usize,
    /// Change of `(B1, B2)` against the half-size grid, plus tolerance floor.
    pub quadrature_error: BlockingPair,
    /// `(B_analytic - B_oracle)` when an oracle run was attached.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_delta: Option<BlockingPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockingReport {
    pub params: ModelParams,
    pub blocking: BlockingPair,
    pub p00: f64,
    pub boundary: BoundaryVector,
    pub baseline_inf: BlockingPair,
    pub baseline_a0: BlockingPair,
    pub normalization_residual: f64,
    pub diagnostics: Diagnostics,
}

/// Functions of `theta in [0, pi]` shared by every coefficient.
#[derive(Debug, Clone)]
struct ThetaTables {
    grid: Grid,
    x: Vec<f64>,
    phi1: Vec<f64>,
    /// `lambda1 + lambda2 - (mu1c1 + mu2c2) x(theta)`
    denom: Vec<f64>,
}

/// Unscaled output of one boundary solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SeededSolution {
    /// `p(0,0..=a)` with `p(0,0)` equal to the seed.
    pub p: Vec<f64>,
    /// `sum_n p(0,n)`
    pub b1: f64,
    /// `P1(1)`
    pub b2: f64,
    pub condition_estimate: f64,
}

/// Analytic pipeline for one set of rates; reusable across thresholds.
#[derive(Debug, Clone)]
pub struct AnalyticSolver {
    model: Model,
    cache: BoundaryCache,
    theta: ThetaTables,
    cfg: QuadConfig,
}

impl AnalyticSolver {
    pub fn new(model: &Model, cfg: &QuadConfig) -> Result<Self> {
        cfg.validate()?;
        let kernel = Kernel::new(model)?;
        let cache = BoundaryCache::new(&kernel, cfg)?;
        Self::with_cache(model, cache)
    }

    pub fn with_cache(model: &Model, cache: BoundaryCache) -> Result<Self> {
        let cfg = *cache.config();
        let kernel = cache.kernel();
        let grid = gauss_grid(0.0, std::f64::consts::PI, cfg.grid_size);
        let x = grid
            .nodes
            .iter()
            .map(|&t| kernel.x_of_theta(t))
            .collect::<Result<Vec<f64>>>()?;
        let phi1 = x.iter().map(|&v| cache.phi1(v)).collect::<Result<Vec<f64>>>()?;
        let denom = x
            .iter()
            .map(|&v| model.lambda1() + model.lambda2() - (model.mu1c1() + model.mu2c2()) * v)
            .collect();
        Ok(AnalyticSolver {
            model: *model,
            theta: ThetaTables {
                grid,
                x,
                phi1,
                denom,
            },
            cache,
            cfg,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn cache(&self) -> &BoundaryCache {
        &self.cache
    }

    pub fn config(&self) -> &QuadConfig {
        &self.cfg
    }

    fn kernel(&self) -> &Kernel {
        self.cache.kernel()
    }

    /// `J_k(theta_i)` for every theta node, `k = 0..=a`; indexed `[k][i]`.
    fn j_table(&self, a: usize) -> Vec<Vec<f64>> {
        let m = &self.model;
        let sq = (m.mu2c2() * m.lambda2()).sqrt();
        let grid = self.cache.grid();
        let weights = self.cache.weight_values();
        let columns: Vec<Vec<f64>> = self
            .theta
            .grid
            .nodes
            .par_iter()
            .map(|&t| {
                let c = t.cos();
                let base: Vec<f64> = grid
                    .nodes
                    .iter()
                    .zip(&grid.weights)
                    .zip(weights)
                    .map(|((&y, &w), &se)| {
                        w * (m.lambda2() - m.mu2c2() * y * y) * se
                            / (y * (m.mu2c2() * y * y - 2.0 * y * sq * c + m.lambda2()))
                    })
                    .collect();
                let mut out = Vec::with_capacity(a + 1);
                let mut terms = base;
                for _ in 0..=a {
                    out.push(pairwise_sum(&terms));
                    for (term, &y) in terms.iter_mut().zip(&grid.nodes) {
                        *term *= y;
                    }
                }
                out
            })
            .collect();
        (0..=a)
            .map(|k| columns.iter().map(|col| col[k]).collect())
            .collect()
    }

    /// `alpha_{n,k}` and `beta_n` for threshold `a`.
    pub fn assemble(&self, a: usize) -> Result<CoefficientMatrix> {
        let m = &self.model;
        let pi = std::f64::consts::PI;
        let r2 = m.r2();
        let th = &self.theta;
        let jt = self.j_table(a);
        let sin_t: Vec<f64> = th.grid.nodes.iter().map(|t| t.sin()).collect();
        // x phi1 sin(theta) / denom, shared by alpha1 and beta.
        let common: Vec<f64> = (0..th.x.len())
            .map(|i| th.grid.weights[i] * th.x[i] * th.phi1[i] * sin_t[i] / th.denom[i])
            .collect();
        let j_small = |k: usize, i: usize| -> f64 {
            let (t, x) = (th.grid.nodes[i], th.x[i]);
            let kf = k as f64;
            ((r2 * r2 + x) * (kf * t).sin()
                - x * r2 * ((kf + 1.0) * t).sin()
                - r2 * ((kf - 1.0) * t).sin())
                / ((1.0 - x) * th.denom[i])
        };
        let rows: Vec<(Vec<f64>, f64)> = (0..a)
            .into_par_iter()
            .map(|n| {
                let harmonic: Vec<f64> = th
                    .grid
                    .nodes
                    .iter()
                    .map(|t| ((n as f64 + 1.0) * t).sin())
                    .collect();
                let beta_terms: Vec<f64> = common.iter().zip(&harmonic).map(|(c, h)| c * h).collect();
                let beta = 2.0 * m.mu2c2() * m.lambda2() / (m.lambda1() * pi) * pairwise_sum(&beta_terms);
                let row = (0..=a)
                    .map(|k| {
                        let t1: Vec<f64> = (0..th.x.len())
                            .map(|i| common[i] * jt[k][i] * harmonic[i])
                            .collect();
                        let t2: Vec<f64> = (0..th.x.len())
                            .map(|i| th.grid.weights[i] * th.x[i] * j_small(k, i) * harmonic[i])
                            .collect();
                        let a1 = 2.0 * m.mu2c2() / (pi * pi) * pairwise_sum(&t1);
                        let a2 = 2.0 * r2.powi(k as i32 - 1) * m.mu2c2() / pi * pairwise_sum(&t2);
                        a1 + a2
                    })
                    .collect();
                (row, beta)
            })
            .collect();
        let mut alpha = Vec::with_capacity(a);
        let mut beta = Vec::with_capacity(a);
        for (n, (row, b)) in rows.into_iter().enumerate() {
            if let Some(k) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Coefficient {
                    n,
                    k,
                    source: Box::new(Error::NoConvergence {
                        subdivisions: self.cfg.grid_size,
                        estimate: row[k],
                        error: f64::INFINITY,
                    }),
                });
            }
            alpha.push(row);
            beta.push(b);
        }
        Ok(CoefficientMatrix {
            alpha,
            beta,
            r2_powers: (0..a).map(|n| r2.powi(n as i32)).collect(),
        })
    }

    /// Solve the boundary system with `p(0,0) = seed`, before normalization.
    pub fn solve_seeded(&self, coeffs: &CoefficientMatrix, seed: f64) -> Result<SeededSolution> {
        let a = coeffs.threshold();
        let mut p = vec![seed];
        let mut condition = 1.0;
        if a > 0 {
            let mut mat = DMatrix::<f64>::zeros(a, a);
            let mut rhs = DVector::<f64>::zeros(a);
            for n in 0..a {
                for k in 1..=a {
                    let diag = if k == n + 1 { coeffs.r2_powers[n] } else { 0.0 };
                    mat[(n, k - 1)] = diag - coeffs.alpha[n][k];
                }
                rhs[n] = seed * (coeffs.beta[n] + coeffs.alpha[n][0]);
            }
            let (sol, cond) = equilibrated_solve(mat, rhs)?;
            condition = cond;
            p.extend(sol.iter());
        }
        let b1 = pairwise_sum(&p);
        let b2 = self.eval_p1_with(&p, 1.0)?;
        Ok(SeededSolution {
            p,
            b1,
            b2,
            condition_estimate: condition,
        })
    }

    /// Normalized boundary vector for threshold `a`, with the condition estimate.
    pub fn solve_boundary(&self, a: usize) -> Result<(BoundaryVector, f64, usize)> {
        let coeffs = self.assemble(a)?;
        let seeded = self.solve_seeded(&coeffs, 1.0)?;
        let scale =
            self.model.excess_load() / (self.model.lambda1() * seeded.b1 + self.model.lambda2() * seeded.b2);
        let mut clamped = 0;
        let mut p = Vec::with_capacity(seeded.p.len());
        for (index, v) in seeded.p.iter().map(|v| v * scale).enumerate() {
            if v < -NEGATIVE_TOLERANCE || !v.is_finite() {
                return Err(Error::NegativeProbability { index, value: v });
            }
            if v < 0.0 {
                clamped += 1;
                p.push(0.0);
            } else {
                p.push(v);
            }
        }
        if p[0] <= 0.0 {
            return Err(Error::NegativeProbability {
                index: 0,
                value: p[0],
            });
        }
        Ok((
            BoundaryVector {
                seed_scale: p[0],
                p,
            },
            seeded.condition_estimate,
            clamped,
        ))
    }

    fn eval_p1_with(&self, p: &[f64], x: f64) -> Result<f64> {
        let m = &self.model;
        let kernel = self.kernel();
        let phi = self.cache.phi1(x)?;
        let grid = self.cache.grid();
        let poly = |y: f64| p.iter().rev().fold(0.0, |acc, c| acc * y + c);
        let vals: Vec<f64> = grid
            .nodes
            .iter()
            .zip(self.cache.weight_values())
            .map(|(&y, &se)| {
                (m.lambda2() - m.mu2c2() * y * y) * poly(y) * se / (y * kernel.value_real(x, y))
            })
            .collect();
        let (integral, _) = grid.sum_values(&vals);
        Ok(phi * p[0]
            + x * m.lambda1() * phi / (m.lambda2() * std::f64::consts::PI) * integral)
    }

    /// `P1(x)` for real `|x| < r1`.
    pub fn eval_p1(&self, bvec: &BoundaryVector, x: f64) -> Result<f64> {
        let r1 = self.model.r1();
        if x.abs() >= r1 {
            return Err(Error::Domain {
                value: x,
                lo: -r1,
                hi: r1,
            });
        }
        self.eval_p1_with(&bvec.p, x)
    }

    /// Evaluator for `P2` bound to a boundary vector; tabulates `P1` on `[x1, x2]`
    /// and `X0` on the circle of radius `r2` once.
    pub fn p2_evaluator<'a>(&'a self, bvec: &'a BoundaryVector) -> Result<P2Evaluator<'a>> {
        let kernel = self.kernel();
        let (x1, x2) = kernel.branch_points().x_cut();
        let xgrid = cosine_grid(x1, x2, self.cfg.grid_size);
        let m = &self.model;
        let x_weight = xgrid
            .nodes
            .iter()
            .zip(&xgrid.weights)
            .map(|(&x, &w)| {
                let p1 = self.eval_p1_with(&bvec.p, x)?;
                let denom = m.lambda1() + m.lambda2() - (m.mu1c1() + m.mu2c2()) * x;
                Ok(w * p1 * (m.lambda1() - m.mu1c1() * x * x) * (-kernel.delta2(x)).max(0.0).sqrt()
                    / (x * denom))
            })
            .collect::<Result<Vec<f64>>>()?;
        let r2 = m.r2();
        let mut contour = Vec::with_capacity(CONTOUR_POINTS);
        for j in 0..CONTOUR_POINTS {
            let z = Complex64::from_polar(r2, std::f64::consts::TAU * j as f64 / CONTOUR_POINTS as f64);
            let (x0, _) = kernel.x_roots(z, None)?;
            // (z - 1)(lambda2 - mu2c2 z^2) X0^2 P2^-(z) / (z^2 (z - X0)) * z, the last
            // factor from dz = i z dphi.
            let numer = (z - 1.0) * (m.lambda2() - m.mu2c2() * z * z) * x0 * x0 * bvec.eval_complex(z);
            contour.push((x0, numer / (z * (z - x0))));
        }
        Ok(P2Evaluator {
            solver: self,
            p00: bvec.p[0],
            xgrid,
            x_weight,
            contour,
        })
    }

    /// `P2(y)` for real `|y| < r2`.
    pub fn eval_p2(&self, bvec: &BoundaryVector, y: f64) -> Result<f64> {
        Ok(self.p2_evaluator(bvec)?.eval(Complex64::new(y, 0.0))?.re)
    }

    /// Blocking probabilities for threshold `a` at this solver's grid only.
    pub fn blocking_pair(&self, a: usize) -> Result<(BlockingPair, BoundaryVector, f64, usize)> {
        let (bvec, cond, clamped) = self.solve_boundary(a)?;
        let b1 = pairwise_sum(&bvec.p);
        let b2 = self.eval_p1(&bvec, 1.0)?;
        Ok((BlockingPair { b1, b2 }, bvec, cond, clamped))
    }

    /// `B0`, the threshold-free baseline, on this solver's grid.
    pub fn baseline_a0(&self) -> Result<BlockingPair> {
        baseline_a0(&self.model, &self.cfg)
    }
}

/// `P2` on the disk of radius `r2`, from the two-term integral representation.
pub struct P2Evaluator<'a> {
    solver: &'a AnalyticSolver,
    p00: f64,
    xgrid: Grid,
    x_weight: Vec<f64>,
    contour: Vec<(Complex64, Complex64)>,
}

impl P2Evaluator<'_> {
    pub fn eval(&self, y: Complex64) -> Result<Complex64> {
        let m = self.solver.model();
        let kernel = self.solver.kernel();
        let r2 = m.r2();
        if y.norm() >= r2 {
            return Err(Error::Domain {
                value: y.norm(),
                lo: 0.0,
                hi: r2,
            });
        }
        let scale = kernel.coefficient_scale();
        let mut re = Vec::with_capacity(self.xgrid.len());
        let mut im = Vec::with_capacity(self.xgrid.len());
        for (&x, &w) in self.xgrid.nodes.iter().zip(&self.x_weight) {
            let t = w / kernel.value(Complex64::new(x, 0.0), y);
            re.push(t.re);
            im.push(t.im);
        }
        let line = Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
            * (y * m.lambda2() / (std::f64::consts::TAU * m.lambda1()));
        let mut re = Vec::with_capacity(self.contour.len());
        let mut im = Vec::with_capacity(self.contour.len());
        for &(x0, f) in &self.contour {
            let k = kernel.value(x0, y);
            if k.norm() < 1e-9 * scale {
                return Err(Error::KernelZeroOnCut(x0));
            }
            let t = f / k;
            re.push(t.re);
            im.push(t.im);
        }
        // y/(2 pi i) * sum f(z_j)/K * i * (2 pi / N)
        let circle = Complex64::new(pairwise_sum(&re), pairwise_sum(&im)) * y
            / self.contour.len() as f64;
        Ok(line + circle + self.p00)
    }

    /// Power-series coefficients `p(0,0..=n_max)` of `P2` by a discrete Fourier
    /// transform of samples on the circle of radius `radius < r2`.
    pub fn coefficients(&self, n_max: usize, radius: f64, samples: usize) -> Result<Vec<f64>> {
        let vals = (0..samples)
            .map(|j| {
                let w = Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / samples as f64);
                self.eval(w)
            })
            .collect::<Result<Vec<Complex64>>>()?;
        Ok((0..=n_max)
            .map(|n| {
                let terms: Vec<f64> = vals
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let angle = -std::f64::consts::TAU * (j * n % samples) as f64 / samples as f64;
                        (v * Complex64::from_polar(1.0, angle)).re
                    })
                    .collect();
                pairwise_sum(&terms) / samples as f64 / radius.powi(n as i32)
            })
            .collect())
    }
}

/// Row/column equilibration, LU with partial pivoting, and a 1-norm
/// condition estimate of the equilibrated matrix.
fn equilibrated_solve(mat: DMatrix<f64>, rhs: DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let n = mat.nrows();
    let row_scale: Vec<f64> = (0..n)
        .map(|i| {
            let m = mat.row(i).amax();
            if m > 0.0 { 1.0 / m } else { 1.0 }
        })
        .collect();
    let mut scaled = mat;
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] *= row_scale[i];
        }
    }
    let col_scale: Vec<f64> = (0..n)
        .map(|j| {
            let m = scaled.column(j).amax();
            if m > 0.0 { 1.0 / m } else { 1.0 }
        })
        .collect();
    for j in 0..n {
        for i in 0..n {
            scaled[(i, j)] *= col_scale[j];
        }
    }
    let b = DVector::from_iterator(n, (0..n).map(|i| rhs[i] * row_scale[i]));
    let norm1 = |m: &DMatrix<f64>| {
        (0..m.ncols())
            .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let lu = scaled.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::SingularSystem(f64::INFINITY))?;
    let cond = norm1(&scaled) * norm1(&inv);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::SingularSystem(cond));
    }
    let z = scaled.lu().solve(&b).ok_or(Error::SingularSystem(cond))?;
    let x = DVector::from_iterator(n, (0..n).map(|j| z[j] * col_scale[j]));
    Ok((x, cond))
}

/// Coefficients of the boundary system for `model.threshold()`.
pub fn assemble(model: &Model, cache: &BoundaryCache) -> Result<CoefficientMatrix> {
    AnalyticSolver::with_cache(model, cache.clone())?.assemble(model.threshold())
}

/// Normalized `p(0,0..=a)`.
pub fn solve_boundary(model: &Model, cfg: &QuadConfig) -> Result<BoundaryVector> {
    Ok(AnalyticSolver::new(model, cfg)?
        .solve_boundary(model.threshold())?
        .0)
}

/// Threshold-free baseline from the `phi2` representation.
pub fn baseline_a0(model: &Model, cfg: &QuadConfig) -> Result<BlockingPair> {
    cfg.validate()?;
    let kernel = Kernel::new(model)?;
    let phi2 = Phi2Table::new(&kernel, cfg.grid_size).phi2(1.0)?;
    let numer = if model.lambda2() > model.mu2c2() {
        model.lambda1() - model.mu1c1()
    } else {
        model.excess_load()
    };
    let p00 = numer / (model.lambda1() * phi2);
    Ok(BlockingPair {
        b1: p00,
        b2: (model.lambda2() + model.lambda1() * (1.0 - p00) - model.mu1c1() - model.mu2c2())
            / model.lambda2(),
    })
}

/// Full report for `model.threshold()`: the main grid plus a half-size grid
/// for the quadrature error estimate.
pub fn blocking(model: &Model, cfg: &QuadConfig) -> Result<BlockingReport> {
    let fine = AnalyticSolver::new(model, cfg)?;
    let coarse = AnalyticSolver::new(model, &cfg.with_grid_size(cfg.grid_size / 2))?;
    report_from(&fine, &coarse, model.threshold())
}

/// Report for threshold `a` from prebuilt solvers on a grid and its half.
pub fn report_from(fine: &AnalyticSolver, coarse: &AnalyticSolver, a: usize) -> Result<BlockingReport> {
    let model = fine.model().with_threshold(a);
    let cfg = fine.config();
    let (pair, bvec, cond, clamped) = fine.blocking_pair(a)?;
    let (coarse_pair, _, _, _) = coarse.blocking_pair(a)?;
    let residual = (model.lambda1() * pair.b1 + model.lambda2() * pair.b2 - model.excess_load()).abs();
    Ok(BlockingReport {
        params: *model.params(),
        blocking: pair,
        p00: bvec.p[0],
        boundary: bvec,
        baseline_inf: model.isolated_limits(),
        baseline_a0: fine.baseline_a0()?,
        normalization_residual: residual,
        diagnostics: Diagnostics {
            grid_size: cfg.grid_size,
            contour_points: CONTOUR_POINTS,
            condition_estimate: cond,
            clamped_entries: clamped,
            quadrature_error: BlockingPair {
                b1: (pair.b1 - coarse_pair.b1).abs() + cfg.floor(pair.b1, 1.0),
                b2: (pair.b2 - coarse_pair.b2).abs() + cfg.floor(pair.b2, 1.0),
            },
            oracle_delta: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    fn solver(p: ModelParams, grid: usize) -> AnalyticSolver {
        AnalyticSolver::new(&p.validate().unwrap(), &QuadConfig::default().with_grid_size(grid)).unwrap()
    }

    #[test]
    fn threshold_zero_is_a_single_entry() {
        let s = solver(presets::fig3(0), 128);
        let c = s.assemble(0).unwrap();
        assert!(c.alpha.is_empty() && c.beta.is_empty());
        let (b, cond, _) = s.solve_boundary(0).unwrap();
        assert_eq!(b.p.len(), 1);
        assert_eq!(cond, 1.0);
        assert!(b.p[0] > 0.0 && b.p[0] < 1.0);
    }

    #[test]
    fn seed_linearity() {
        let s = solver(presets::fig3(3), 128);
        let c = s.assemble(3).unwrap();
        let one = s.solve_seeded(&c, 1.0).unwrap();
        let two = s.solve_seeded(&c, 2.0).unwrap();
        for (a, b) in one.p.iter().zip(&two.p) {
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        assert!((2.0 * one.b1 - two.b1).abs() < 1e-12);
        assert!((2.0 * one.b2 - two.b2).abs() < 1e-12);
    }

    #[test]
    fn p1_and_p2_at_origin() {
        let s = solver(presets::fig3(2), 128);
        let (b, _, _) = s.solve_boundary(2).unwrap();
        assert!((s.eval_p1(&b, 0.0).unwrap() - b.p[0]).abs() < 1e-15);
        assert!((s.eval_p2(&b, 0.0).unwrap() - b.p[0]).abs() < 1e-15);
        assert!(s.eval_p1(&b, 2.0).is_err());
        assert!(s.eval_p2(&b, 1.6).is_err());
    }

    #[test]
    fn normalization_holds_by_construction() {
        for p in [presets::fig3(2), presets::fig4(2), presets::fig5(2)] {
            let r = blocking(&p.validate().unwrap(), &QuadConfig::default().with_grid_size(128)).unwrap();
            assert!(r.normalization_residual < 1e-8, "{}", r.normalization_residual);
        }
    }

    #[test]
    fn baseline_identity() {
        for p in [presets::fig3(0), presets::fig4(0), presets::fig5(0)] {
            let m = p.validate().unwrap();
            let b = baseline_a0(&m, &QuadConfig::default().with_grid_size(128)).unwrap();
            let lhs = m.lambda1() * b.b1 + m.lambda2() * b.b2;
            assert!((lhs - m.excess_load()).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_system_detected() {
        let mat = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let rhs = DVector::from_vec(vec![1.0, 2.0]);
        assert!(matches!(equilibrated_solve(mat, rhs), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn homogeneity_of_coefficients() {
        let a = 3;
        let base = solver(presets::fig3(a), 128).assemble(a).unwrap();
        let scaled = solver(presets::fig3(a).scaled(0.37), 128).assemble(a).unwrap();
        for n in 0..a {
            assert!((base.beta[n] - scaled.beta[n]).abs() < 1e-9);
            for k in 0..=a {
                assert!((base.alpha[n][k] - scaled.alpha[n][k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn boundary_polynomial_horner() {
        let b = BoundaryVector {
            p: vec![0.5, 0.25, 0.125],
            seed_scale: 0.5,
        };
        assert!((b.eval(2.0) - (0.5 + 0.5 + 0.5)).abs() < 1e-15);
        let z = b.eval_complex(Complex64::new(0.0, 1.0));
        assert!((z - Complex64::new(0.375, 0.25)).norm() < 1e-15);
    }
}
