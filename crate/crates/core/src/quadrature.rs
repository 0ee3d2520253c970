//! Integration engine: adaptive Gauss-Kronrod on real intervals, Cauchy
//! principal values by singularity subtraction, and fixed Gauss-Legendre
//! grids (plain, and in the cosine variable for integrands with square-root
//! behavior at both endpoints).
//!
//! Every routine is deterministic: panel sums are reduced in left-to-right
//! order through a pairwise tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Node count of the fixed grids; must be even and at least 16.
    pub grid_size: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_subdivisions: 2000,
            grid_size: 512,
        }
    }
}

impl QuadConfig {
    pub fn with_grid_size(self, grid_size: usize) -> Self {
        QuadConfig { grid_size, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.grid_size < 16 || !self.grid_size.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "grid_size must be even and >= 16, got {}",
                self.grid_size
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidConfig("max_subdivisions must be positive".into()));
        }
        Ok(())
    }

    /// Error floor attached to a value: the requested tolerance or the
    /// roundoff level of a sum with absolute magnitude `scale`.
    pub fn floor(&self, value: f64, scale: f64) -> f64 {
        self.abs_tol
            .max(self.rel_tol * value.abs())
            .max(64.0 * f64::EPSILON * scale)
    }
}

/// A value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    /// Pair a fine-grid value with its half-grid counterpart.
    pub fn from_refinement(fine: f64, coarse: f64, scale: f64, cfg: &QuadConfig) -> Self {
        Estimate {
            value: fine,
            error: (fine - coarse).abs() + cfg.floor(fine, scale),
        }
    }
}

/// Sum in a fixed pairwise tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// 7-point Gauss weights, on XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Panel {
        a,
        b,
        value: kron * h,
        error: ((kron - gauss) * h).abs(),
    }
}

/// Adaptive 7/15-point Gauss-Kronrod with bisection of the worst panel.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut panels = vec![gk15(&f, a, b)];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if !value.is_finite() {
            return Err(Error::NoConvergence {
                subdivisions: panels.len(),
                estimate: value,
                error,
            });
        }
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            break;
        }
        if panels.len() >= cfg.max_subdivisions {
            return Err(Error::NoConvergence {
                subdivisions: panels.len(),
                estimate: value,
                error,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel at machine resolution; nothing left to refine.
            panels.push(p);
            let value: f64 = panels.iter().map(|p| p.value).sum();
            return Err(Error::NoConvergence {
                subdivisions: panels.len(),
                estimate: value,
                error,
            });
        }
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
    }
    panels.sort_by(|l, r| l.a.total_cmp(&r.a));
    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = panels.iter().map(|p| p.error).collect();
    Ok(Estimate {
        value: pairwise_sum(&values),
        error: pairwise_sum(&errors),
    })
}

/// Principal value of `int_a^b f(t) / (t - pole) dt`.
///
/// After `t = mid - half cos(psi)` the integral becomes
/// `int_0^pi (g(psi) - g(psi0)) / (cos psi0 - cos psi) dpsi` with
/// `g(psi) = f(t(psi)) sin(psi)`; the removable point at `psi0` is patched with
/// a fourth-order central difference.
pub fn integrate_pv<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    pole: f64,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    let width = b - a;
    if !(pole - a > 1e-12 * width && b - pole > 1e-12 * width) {
        return Err(Error::PoleAtEndpoint { pole, a, b });
    }
    // t = mid - half cos(psi) smooths square-root behaviour at both ends, and
    // PV int_0^pi dpsi / (cos psi0 - cos psi) = 0 removes the pole exactly.
    let mid = 0.5 * (a + b);
    let half = 0.5 * width;
    let psi0 = ((mid - pole) / half).clamp(-1.0, 1.0).acos();
    let (c0, s0) = (psi0.cos(), psi0.sin());
    let g = |psi: f64| f(mid - half * psi.cos()) * psi.sin();
    let g0 = g(psi0);
    let h = 1e-3 * psi0.min(std::f64::consts::PI - psi0);
    let quotient = |psi: f64| {
        let d = psi - psi0;
        if d.abs() < 1e-7 {
            let step = |k: f64| g(psi0 + k * h) - g(psi0 - k * h);
            (8.0 * step(1.0) - step(2.0)) / (12.0 * h * s0)
        } else {
            (g(psi) - g0) / (c0 - psi.cos())
        }
    };
    integrate(quotient, 0.0, std::f64::consts::PI, cfg)
}

/// Nodes and weights of a fixed quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_j w_j f(t_j)` in pairwise order.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .collect();
        pairwise_sum(&terms)
    }

    /// Same as [`Grid::integrate`] on already tabulated values; also returns
    /// `sum |w_j v_j|` for roundoff floors.
    pub fn sum_values(&self, values: &[f64]) -> (f64, f64) {
        debug_assert_eq!(values.len(), self.weights.len());
        let terms: Vec<f64> = values.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        let scale = terms.iter().map(|t| t.abs()).sum();
        (pairwise_sum(&terms), scale)
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Grid {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Grid { nodes, weights }
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_grid(a: f64, b: f64, n: usize) -> Grid {
    let gl = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    Grid {
        nodes: gl.nodes.iter().map(|u| mid + half * u).collect(),
        weights: gl.weights.iter().map(|w| half * w).collect(),
    }
}

/// Rule on `[a, b]` through `t = mid - half * cos(psi)`, Gauss-Legendre in
/// `psi in [0, pi]`. Integrands behaving like `sqrt(t - a) sqrt(b - t)` become
/// smooth in `psi`, so the rule keeps spectral accuracy for them.
pub fn cosine_grid(a: f64, b: f64, n: usize) -> Grid {
    assert!(n >= 2 && n.is_multiple_of(2), "cosine grid size must be even, got {n}");
    let gl = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let quarter_turn = std::f64::consts::FRAC_PI_2;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (u, w) in gl.nodes.iter().zip(&gl.weights) {
        let psi = (u + 1.0) * quarter_turn;
        nodes.push(mid - half * psi.cos());
        weights.push(w * quarter_turn * half * psi.sin());
    }
    Grid { nodes, weights }
}
