//! Boundary functions of the two Riemann-Hilbert problems.
//!
//! On the cut `[y1, y2]`, `X0(y +- 0i)` runs over the circle of radius `r1`.
//! The coefficient of the homogeneous problem for `P1` on that circle is
//! `alpha1(x) = exp(-2i Theta1(y))`, and its index is zero, so the canonical
//! solution `phi1` is the exponential of a Cauchy integral that collapses to
//! a real integral over the cut. `Phi1` is the modulus part of its interior
//! boundary value: `phi1(X0(y + 0i)) = exp(Phi1(y) - i Theta1(y))`.
//!
//! `Theta2` and `phi2` play the same roles on `[x1, x2]` for the threshold-free
//! (`a = 0`) system.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{BranchPoints, Kernel};
use crate::quadrature::{cosine_grid, integrate_pv, Estimate, Grid, QuadConfig};

/// Relative slack when checking that a point belongs to a cut.
const CUT_SLACK: f64 = 1e-12;

fn check_in(value: f64, lo: f64, hi: f64) -> Result<f64> {
    let slack = CUT_SLACK * hi.abs().max(1.0);
    if value >= lo - slack && value <= hi + slack {
        Ok(value.clamp(lo, hi))
    } else {
        Err(Error::Domain { value, lo, hi })
    }
}

/// `Theta1(y)` on `[y1, y2]`, in `[0, pi]`.
///
/// The angle of `(mu2c2 y^2 - S y + 2 lambda1 + lambda2, sqrt(-Delta1(y)))`,
/// taken with `atan2` so the branch stays continuous where the first
/// component changes sign.
pub fn theta1(kernel: &Kernel, y: f64) -> Result<f64> {
    let (y1, y2) = kernel.branch_points().y_cut();
    let y = check_in(y, y1, y2)?;
    Ok(theta1_unchecked(kernel, y))
}

fn theta1_unchecked(kernel: &Kernel, y: f64) -> f64 {
    let m = kernel.model();
    let denom = kernel.q1(y) + 2.0 * m.lambda1();
    (-kernel.delta1(y)).max(0.0).sqrt().atan2(denom)
}

/// `Theta2(x)` on `[x1, x2]`, in `[0, pi]`.
pub fn theta2(kernel: &Kernel, x: f64) -> Result<f64> {
    let (x1, x2) = kernel.branch_points().x_cut();
    let x = check_in(x, x1, x2)?;
    Ok(theta2_unchecked(kernel, x))
}

fn theta2_unchecked(kernel: &Kernel, x: f64) -> f64 {
    let m = kernel.model();
    let denom = (x + 1.0) * (m.lambda1() - x * m.mu1c1()) + x * (m.lambda2() - m.mu2c2());
    (-kernel.delta2(x)).max(0.0).sqrt().atan2(denom)
}

/// `alpha1(x) = lambda1 (Y0(x) - x) / (x (mu1c1 x Y0(x) - lambda1))` for `x` on
/// the circle of radius `r1`.
pub fn alpha1(kernel: &Kernel, x: Complex64) -> Result<Complex64> {
    let m = kernel.model();
    let (y0, _) = kernel.y_roots(x, None)?;
    Ok(m.lambda1() * (y0 - x) / (x * (m.mu1c1() * x * y0 - m.lambda1())))
}

/// Winding number of `alpha1` around the origin along the circle of radius `r1`,
/// from the sum of `points` argument increments.
pub fn alpha1_winding(kernel: &Kernel, points: usize) -> Result<f64> {
    let r1 = kernel.model().r1();
    let mut total = 0.0;
    let mut prev = alpha1(kernel, Complex64::new(r1, 0.0))?;
    for j in 1..=points {
        let t = std::f64::consts::TAU * j as f64 / points as f64;
        let cur = alpha1(kernel, Complex64::from_polar(r1, t))?;
        total += (cur / prev).arg();
        prev = cur;
    }
    Ok(total / std::f64::consts::TAU)
}

/// `Phi1(y)` for `y` strictly inside `(y1, y2)`, by a principal-value integral.
pub fn phi1_exponent_big(kernel: &Kernel, y: f64, cfg: &QuadConfig) -> Result<Estimate> {
    let m = kernel.model();
    let (y1, y2) = kernel.branch_points().y_cut();
    let secondary = m.lambda2() / (m.mu2c2() * y);
    if (y1..=y2).contains(&secondary) {
        return Err(Error::SecondaryPole(y));
    }
    let f = |xi: f64| {
        let th = theta1_unchecked(kernel, xi.clamp(y1, y2));
        y * (m.lambda2() - m.mu2c2() * xi * xi) * th / (xi * (m.mu2c2() * y * xi - m.lambda2()))
    };
    let pv = integrate_pv(f, y1, y2, y, cfg)?;
    Ok(Estimate {
        value: pv.value / std::f64::consts::PI,
        error: pv.error / std::f64::consts::PI,
    })
}

fn kernel_guard(kernel: &Kernel, x: Complex64, k: Complex64) -> Result<Complex64> {
    if k.norm() < 1e-12 * kernel.coefficient_scale() {
        Err(Error::KernelZeroOnCut(x))
    } else {
        Ok(k)
    }
}

/// Tabulated boundary functions on a cosine grid over `[y1, y2]`.
///
/// Built once per `(model, grid_size)` and read-only afterwards.
#[derive(Debug, Clone)]
pub struct BoundaryCache {
    kernel: Kernel,
    cfg: QuadConfig,
    grid: Grid,
    theta1: Vec<f64>,
    phi1_big: Vec<f64>,
    /// `sin(Theta1) * exp(-Phi1)` at the grid nodes.
    sin_exp: Vec<f64>,
}

impl BoundaryCache {
    pub fn new(kernel: &Kernel, cfg: &QuadConfig) -> Result<Self> {
        cfg.validate()?;
        let (y1, y2) = kernel.branch_points().y_cut();
        let grid = cosine_grid(y1, y2, cfg.grid_size);
        let theta1: Vec<f64> = grid.nodes.iter().map(|&y| theta1_unchecked(kernel, y)).collect();
        let phi1_big = grid
            .nodes
            .par_iter()
            .map(|&y| phi1_exponent_big(kernel, y, cfg).map(|e| e.value))
            .collect::<Result<Vec<f64>>>()?;
        let sin_exp = theta1
            .iter()
            .zip(&phi1_big)
            .map(|(t, p)| t.sin() * (-p).exp())
            .collect();
        Ok(BoundaryCache {
            kernel: kernel.clone(),
            cfg: *cfg,
            grid,
            theta1,
            phi1_big,
            sin_exp,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn branch_points(&self) -> &BranchPoints {
        self.kernel.branch_points()
    }

    pub fn config(&self) -> &QuadConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn theta1_values(&self) -> &[f64] {
        &self.theta1
    }

    pub fn phi1_big_values(&self) -> &[f64] {
        &self.phi1_big
    }

    /// `sin(Theta1(y_j)) exp(-Phi1(y_j))` at the grid nodes.
    pub fn weight_values(&self) -> &[f64] {
        &self.sin_exp
    }

    /// `log phi1(z)` for `|z| < r1`.
    pub fn log_phi1_complex(&self, z: Complex64) -> Result<Complex64> {
        let m = self.kernel.model();
        let mut re = Vec::with_capacity(self.grid.len());
        let mut im = Vec::with_capacity(self.grid.len());
        for ((&y, &w), &th) in self.grid.nodes.iter().zip(&self.grid.weights).zip(&self.theta1) {
            let k = kernel_guard(&self.kernel, z, self.kernel.value(z, Complex64::new(y, 0.0)))?;
            let term = w * (m.lambda2() - m.mu2c2() * y * y) * th / (y * k);
            re.push(term.re);
            im.push(term.im);
        }
        let s = Complex64::new(
            crate::quadrature::pairwise_sum(&re),
            crate::quadrature::pairwise_sum(&im),
        );
        Ok(z * s / std::f64::consts::PI)
    }

    pub fn phi1_complex(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.log_phi1_complex(z)?.exp())
    }

    /// `phi1(x)` for real `x in (-r1, r1)`; real and positive there.
    pub fn phi1(&self, x: f64) -> Result<f64> {
        Ok(self.log_phi1_real(x)?.exp())
    }

    fn log_phi1_real(&self, x: f64) -> Result<f64> {
        let m = self.kernel.model();
        let mut vals = Vec::with_capacity(self.grid.len());
        for (&y, &th) in self.grid.nodes.iter().zip(&self.theta1) {
            let k = self.kernel.value_real(x, y);
            kernel_guard(&self.kernel, Complex64::new(x, 0.0), Complex64::new(k, 0.0))?;
            vals.push((m.lambda2() - m.mu2c2() * y * y) * th / (y * k));
        }
        let (s, _) = self.grid.sum_values(&vals);
        Ok(x * s / std::f64::consts::PI)
    }

    /// `phi1(x)` with an error estimate from the half-size grid.
    pub fn phi1_estimate(&self, x: f64) -> Result<Estimate> {
        let fine = self.log_phi1_real(x)?;
        let (y1, y2) = self.branch_points().y_cut();
        let half = cosine_grid(y1, y2, self.cfg.grid_size / 2);
        let m = self.kernel.model();
        let coarse = x / std::f64::consts::PI
            * half.integrate(|y| {
                (m.lambda2() - m.mu2c2() * y * y) * theta1_unchecked(&self.kernel, y)
                    / (y * self.kernel.value_real(x, y))
            });
        let value = fine.exp();
        Ok(Estimate::from_refinement(value, coarse.exp(), value, &self.cfg))
    }
}

/// `Theta2` tabulated on a cosine grid over `[x1, x2]`, for `phi2`.
#[derive(Debug, Clone)]
pub struct Phi2Table {
    kernel: Kernel,
    grid: Grid,
    theta2: Vec<f64>,
}

impl Phi2Table {
    pub fn new(kernel: &Kernel, grid_size: usize) -> Self {
        let (x1, x2) = kernel.branch_points().x_cut();
        let grid = cosine_grid(x1, x2, grid_size);
        let theta2 = grid.nodes.iter().map(|&x| theta2_unchecked(kernel, x)).collect();
        Phi2Table {
            kernel: kernel.clone(),
            grid,
            theta2,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn theta2_values(&self) -> &[f64] {
        &self.theta2
    }

    /// `phi2(y) = exp((y/pi) int_{x1}^{x2} (lambda1 - mu1c1 x^2) Theta2(x) / (x K(x, y)) dx)`.
    pub fn phi2(&self, y: f64) -> Result<f64> {
        let m = self.kernel.model();
        let mut vals = Vec::with_capacity(self.grid.len());
        for (&x, &th) in self.grid.nodes.iter().zip(&self.theta2) {
            let k = self.kernel.value_real(x, y);
            kernel_guard(&self.kernel, Complex64::new(y, 0.0), Complex64::new(k, 0.0))?;
            vals.push((m.lambda1() - m.mu1c1() * x * x) * th / (x * k));
        }
        let (s, _) = self.grid.sum_values(&vals);
        Ok((y * s / std::f64::consts::PI).exp())
    }
}

/// `phi2(y)` together with the tabulated `Theta2`.
pub fn phi2_and_theta2(kernel: &Kernel, y: f64, cfg: &QuadConfig) -> Result<(f64, Phi2Table)> {
    cfg.validate()?;
    let table = Phi2Table::new(kernel, cfg.grid_size);
    let value = table.phi2(y)?;
    Ok((value, table))
}

/// `phi2(y)` with an error estimate from the half-size grid.
pub fn phi2_estimate(kernel: &Kernel, y: f64, cfg: &QuadConfig) -> Result<Estimate> {
    let fine = Phi2Table::new(kernel, cfg.grid_size).phi2(y)?;
    let coarse = Phi2Table::new(kernel, cfg.grid_size / 2).phi2(y)?;
    Ok(Estimate::from_refinement(fine, coarse, fine, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Side;
    use crate::model::{presets, ModelParams};

    fn kernel(p: ModelParams) -> Kernel {
        Kernel::new(&p.validate().unwrap()).unwrap()
    }

    fn small_cfg() -> QuadConfig {
        QuadConfig::default().with_grid_size(128)
    }

    #[test]
    fn theta1_at_interior_point() {
        let k = kernel(presets::fig3(0));
        let t = theta1(&k, 0.61).unwrap();
        let num = (-k.delta1(0.61)).sqrt();
        let den = 2.0 * 0.61 * 0.61 - 11.0 * 0.61 + 11.0;
        assert!((t - (num / den).atan()).abs() < 1e-14);
        assert!((num - 1.8795).abs() < 1e-4 && (den - 5.0342).abs() < 1e-4);
        assert!((t - 0.3573).abs() < 1e-4);
    }

    #[test]
    fn theta_endpoints_and_domain() {
        let k = kernel(presets::fig3(0));
        let bp = *k.branch_points();
        for y in [bp.y[0], bp.y[1]] {
            let t = theta1(&k, y).unwrap();
            assert!(t.abs() < 1e-6 || (t - std::f64::consts::PI).abs() < 1e-6);
        }
        for x in [bp.x[0], bp.x[1]] {
            let t = theta2(&k, x).unwrap();
            assert!(t.abs() < 1e-6 || (t - std::f64::consts::PI).abs() < 1e-6);
        }
        assert!(matches!(theta1(&k, 0.2), Err(Error::Domain { .. })));
        assert!(matches!(theta2(&k, 0.9), Err(Error::Domain { .. })));
    }

    #[test]
    fn alpha1_matches_theta1() {
        let k = kernel(presets::fig3(0));
        let (y1, y2) = k.branch_points().y_cut();
        for j in 1..50 {
            let y = y1 + (y2 - y1) * j as f64 / 50.0;
            let (x, _) = k.x_roots(Complex64::new(y, 0.0), Some(Side::Above)).unwrap();
            let a = alpha1(&k, x).unwrap();
            let e = Complex64::from_polar(1.0, -2.0 * theta1(&k, y).unwrap());
            assert!((a - e).norm() < 1e-9, "y = {y}: {a} vs {e}");
        }
    }

    #[test]
    fn index_is_zero() {
        for p in [presets::fig3(0), presets::fig4(0), presets::fig5(0)] {
            let w = alpha1_winding(&kernel(p), 2000).unwrap();
            assert!(w.abs() < 0.01, "winding {w}");
        }
    }

    #[test]
    fn phi1_basic_properties() {
        let k = kernel(presets::fig3(0));
        let cache = BoundaryCache::new(&k, &small_cfg()).unwrap();
        assert_eq!(cache.phi1(0.0).unwrap(), 1.0);
        let v = cache.phi1(1.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
        let z = cache.phi1_complex(Complex64::new(1.0, 0.0)).unwrap();
        assert!((z.re - v).abs() < 1e-13 && z.im.abs() < 1e-14);
    }

    #[test]
    fn phi1_positive_on_unit_interval() {
        for p in [presets::fig3(0), presets::fig4(0), presets::fig5(0)] {
            let cache = BoundaryCache::new(&kernel(p), &small_cfg()).unwrap();
            for j in 0..=10 {
                assert!(cache.phi1(j as f64 / 10.0).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn theta_tables_in_range_and_continuous() {
        let k = kernel(presets::fig3(0));
        let cache = BoundaryCache::new(&k, &small_cfg()).unwrap();
        let n = cache.theta1_values().len() as f64;
        for w in cache.theta1_values().windows(2) {
            assert!((0.0..=std::f64::consts::PI).contains(&w[0]));
            assert!((w[1] - w[0]).abs() < 10.0 / n);
        }
        let t2 = Phi2Table::new(&k, 128);
        for w in t2.theta2_values().windows(2) {
            assert!((0.0..=std::f64::consts::PI).contains(&w[0]));
            assert!((w[1] - w[0]).abs() < 10.0 / 128.0);
        }
    }

    #[test]
    fn secondary_pole_absent_for_fig3() {
        let k = kernel(presets::fig3(0));
        let (y1, y2) = k.branch_points().y_cut();
        assert!(y2 * y2 < 2.5);
        for j in 1..100 {
            let y = y1 + (y2 - y1) * j as f64 / 100.0;
            assert!(phi1_exponent_big(&k, y, &QuadConfig::default()).is_ok());
        }
    }

    #[test]
    fn phi1_big_continuous_on_interior() {
        let k = kernel(presets::fig3(0));
        let (y1, y2) = k.branch_points().y_cut();
        let vals: Vec<f64> = (1..100)
            .map(|j| {
                let y = y1 + (y2 - y1) * j as f64 / 100.0;
                phi1_exponent_big(&k, y, &QuadConfig::default()).unwrap().value
            })
            .collect();
        for w in vals.windows(2) {
            assert!(w[0].is_finite());
            assert!((w[1] - w[0]).abs() < 0.1, "{w:?}");
        }
    }

    #[test]
    fn phi2_basic_properties() {
        let k = kernel(presets::fig3(0));
        let (v0, _) = phi2_and_theta2(&k, 0.0, &small_cfg()).unwrap();
        assert_eq!(v0, 1.0);
        let e = phi2_estimate(&k, 1.0, &QuadConfig::default().with_grid_size(256)).unwrap();
        let finer = phi2_estimate(&k, 1.0, &QuadConfig::default().with_grid_size(512)).unwrap();
        assert!(e.value > 0.0 && e.value.is_finite());
        assert!((finer.value - e.value).abs() < 1e-8);
    }

    #[test]
    fn homogeneity_of_boundary_functions() {
        let base = kernel(presets::fig3(0));
        let scaled = kernel(presets::fig3(0).scaled(3.7));
        let (y1, y2) = base.branch_points().y_cut();
        let cfg = QuadConfig::default();
        for j in 1..10 {
            let y = y1 + (y2 - y1) * j as f64 / 10.0;
            assert!((theta1(&base, y).unwrap() - theta1(&scaled, y).unwrap()).abs() < 1e-12);
            let a = phi1_exponent_big(&base, y, &cfg).unwrap().value;
            let b = phi1_exponent_big(&scaled, y, &cfg).unwrap().value;
            assert!((a - b).abs() < 1e-9);
        }
        let cb = BoundaryCache::new(&base, &small_cfg()).unwrap();
        let cs = BoundaryCache::new(&scaled, &small_cfg()).unwrap();
        for x in [0.2, 0.5, 1.0] {
            assert!((cb.phi1(x).unwrap() - cs.phi1(x).unwrap()).abs() < 1e-12);
        }
        let pb = Phi2Table::new(&base, 128).phi2(1.0).unwrap();
        let ps = Phi2Table::new(&scaled, 128).phi2(1.0).unwrap();
        assert!((pb - ps).abs() < 1e-12);
    }
}
