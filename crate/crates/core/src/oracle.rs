//! Brute-force stationary distributions used as ground truth.
//!
//! Two chains are solved here:
//!
//! * the limiting walk on idle servers `(n1, n2)`, truncated to a box with
//!   outward transitions suppressed at the rim;
//! * the finite pre-limit chain on busy servers `(N1, N2)` at scale `nu`.
//!
//! Both are quasi-birth-death processes when states are grouped by the second
//! coordinate, so the default solver is an exact block level reduction. A
//! lexicographic Gauss–Seidel sweep is kept as an independent cross-check.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlockingPair, Model, ModelConfig, ModelParams};
use crate::quadrature::pairwise_sum;

/// Rim mass above which a box is rejected outright.
pub const MAX_BOUNDARY_MASS: f64 = 1e-4;
/// Rim mass [`auto_solve`] aims for.
pub const TARGET_BOUNDARY_MASS: f64 = 1e-9;
/// Largest state space either solver accepts.
pub const MAX_STATES: usize = 4_000_000;
/// Unnormalized stationary vectors can span more than the exponent range of
/// `f64` when rates are large; they are shrunk once an entry exceeds this.
const RESCALE_LIMIT: f64 = 1e150;
/// Default tolerance on the balance-equation residual.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Outgoing rates of one state. Rates leaving the state space must be zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Rates {
    /// To `(i, level + 1)`.
    pub up: f64,
    /// To `(i, level - 1)`.
    pub down: f64,
    /// To `(i + 1, level)`.
    pub right: f64,
    /// To `(i - 1, level)`.
    pub left: f64,
}

impl Rates {
    pub fn total(&self) -> f64 {
        self.up + self.down + self.right + self.left
    }
}

/// A quasi-birth-death chain on `levels x width` states.
pub trait LevelChain: Sync {
    fn levels(&self) -> usize;
    fn width(&self) -> usize;
    fn rates(&self, level: usize, i: usize) -> Rates;

    fn states(&self) -> usize {
        self.levels() * self.width()
    }
}

/// Solution method for [`LevelChain`]s.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Block level reduction; exact up to roundoff.
    #[default]
    Direct,
    /// Lexicographic Gauss–Seidel sweeps until the residual meets the tolerance.
    GaussSeidel,
}

/// Truncation box for the limiting walk: `0 <= n1 <= n1_max`, `0 <= n2 <= n2_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBox {
    pub n1_max: usize,
    pub n2_max: usize,
}

impl OracleBox {
    pub fn new(n1_max: usize, n2_max: usize) -> Self {
        OracleBox { n1_max, n2_max }
    }

    pub fn states(&self) -> usize {
        (self.n1_max + 1) * (self.n2_max + 1)
    }
}

/// The limiting walk restricted to a box.
#[derive(Debug, Clone, Copy)]
pub struct LimitingWalk {
    pub model: Model,
    pub bounds: OracleBox,
}

impl LevelChain for LimitingWalk {
    fn levels(&self) -> usize {
        self.bounds.n2_max + 1
    }

    fn width(&self) -> usize {
        self.bounds.n1_max + 1
    }

    fn rates(&self, n2: usize, n1: usize) -> Rates {
        let m = &self.model;
        let overflow = if n1 == 0 && n2 > m.threshold() {
            m.lambda1()
        } else {
            0.0
        };
        Rates {
            up: if n2 < self.bounds.n2_max { m.mu2c2() } else { 0.0 },
            down: if n2 > 0 { m.lambda2() + overflow } else { 0.0 },
            right: if n1 < self.bounds.n1_max { m.mu1c1() } else { 0.0 },
            left: if n1 > 0 { m.lambda1() } else { 0.0 },
        }
    }
}

/// Busy-server chain at scale `nu` with `C_i` servers and arrival rates `nu lambda_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrelimitChain {
    pub arrival1: f64,
    pub arrival2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub servers1: usize,
    pub servers2: usize,
    pub a: usize,
}

impl PrelimitChain {
    /// Scale a per-server configuration by `nu`. `nu c_i` is rounded to the
    /// nearest integer; the second value reports whether rounding occurred.
    pub fn from_config(cfg: &ModelConfig, nu: f64) -> Result<(Self, bool)> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidPrelimit(format!("nu must be positive, got {nu}")));
        }
        let mut rounded = false;
        let mut servers = [0usize; 2];
        for (slot, c) in servers.iter_mut().zip([cfg.c1, cfg.c2]) {
            let exact = nu * c;
            let n = exact.round();
            if n.is_nan() || n < 1.0 {
                return Err(Error::InvalidPrelimit(format!("nu * c = {exact} rounds below one server")));
            }
            rounded |= (n - exact).abs() > 1e-9 * exact.max(1.0);
            *slot = n as usize;
        }
        let chain = PrelimitChain {
            arrival1: nu * cfg.lambda1,
            arrival2: nu * cfg.lambda2,
            mu1: cfg.mu1,
            mu2: cfg.mu2,
            servers1: servers[0],
            servers2: servers[1],
            a: cfg.a,
        };
        for (name, v) in [
            ("lambda1", chain.arrival1),
            ("lambda2", chain.arrival2),
            ("mu1", chain.mu1),
            ("mu2", chain.mu2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonPositiveRate { name, value: v });
            }
        }
        if chain.a > chain.servers2 {
            return Err(Error::InvalidPrelimit(format!(
                "threshold {} exceeds the {} servers of DC 2",
                chain.a, chain.servers2
            )));
        }
        Ok((chain, rounded))
    }
}

impl LevelChain for PrelimitChain {
    fn levels(&self) -> usize {
        self.servers2 + 1
    }

    fn width(&self) -> usize {
        self.servers1 + 1
    }

    fn rates(&self, busy2: usize, busy1: usize) -> Rates {
        let (c1, c2) = (self.servers1, self.servers2);
        let mut up = if busy2 < c2 { self.arrival2 } else { 0.0 };
        if busy1 == c1 && busy2 + self.a < c2 {
            up += self.arrival1;
        }
        Rates {
            up,
            down: self.mu2 * busy2 as f64,
            right: if busy1 < c1 { self.arrival1 } else { 0.0 },
            left: self.mu1 * busy1 as f64,
        }
    }
}

/// Stationary law of the truncated limiting walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedDistribution {
    pub n1_max: usize,
    pub n2_max: usize,
    /// Row-major in `n2`: entry `n2 * (n1_max + 1) + n1`.
    pub probs: Vec<f64>,
    /// Mass on states with `n1 = n1_max` or `n2 = n2_max`.
    pub boundary_mass: f64,
    /// Largest absolute balance-equation violation.
    pub residual: f64,
}

impl TruncatedDistribution {
    pub fn bounds(&self) -> OracleBox {
        OracleBox::new(self.n1_max, self.n2_max)
    }

    pub fn get(&self, n1: usize, n2: usize) -> f64 {
        self.probs[n2 * (self.n1_max + 1) + n1]
    }

    /// `P(n1 = j)`.
    pub fn marginal_n1(&self, j: usize) -> f64 {
        let terms: Vec<f64> = (0..=self.n2_max).map(|n2| self.get(j, n2)).collect();
        pairwise_sum(&terms)
    }

    /// `P(n2 = j)`.
    pub fn marginal_n2(&self, j: usize) -> f64 {
        let w = self.n1_max + 1;
        pairwise_sum(&self.probs[j * w..(j + 1) * w])
    }
}

/// Stationary law of the pre-limit chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrelimitDistribution {
    pub chain: PrelimitChain,
    /// Row-major in `N2`: entry `N2 * (C1 + 1) + N1`.
    pub probs: Vec<f64>,
    pub residual: f64,
    /// Whether `nu c_i` had to be rounded to an integer.
    pub rounded: bool,
}

impl PrelimitDistribution {
    pub fn get(&self, busy1: usize, busy2: usize) -> f64 {
        self.probs[busy2 * (self.chain.servers1 + 1) + busy1]
    }

    /// `B1 = P(N1 = C1, N2 >= C2 - a)`, `B2 = P(N2 = C2)`.
    pub fn blocking(&self) -> BlockingPair {
        let (c1, c2, a) = (self.chain.servers1, self.chain.servers2, self.chain.a);
        let b1: Vec<f64> = (c2 - a..=c2).map(|n2| self.get(c1, n2)).collect();
        let w = c1 + 1;
        BlockingPair {
            b1: pairwise_sum(&b1),
            b2: pairwise_sum(&self.probs[c2 * w..(c2 + 1) * w]),
        }
    }
}

/// Largest absolute entry of `pi Q`.
pub fn balance_residual<C: LevelChain>(chain: &C, pi: &[f64]) -> f64 {
    let (levels, width) = (chain.levels(), chain.width());
    let mut flow = vec![0.0; pi.len()];
    for l in 0..levels {
        for i in 0..width {
            let s = l * width + i;
            let r = chain.rates(l, i);
            let p = pi[s];
            flow[s] -= p * r.total();
            if r.up > 0.0 {
                flow[s + width] += p * r.up;
            }
            if r.down > 0.0 {
                flow[s - width] += p * r.down;
            }
            if r.right > 0.0 {
                flow[s + 1] += p * r.right;
            }
            if r.left > 0.0 {
                flow[s - 1] += p * r.left;
            }
        }
    }
    flow.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Stationary vector of a [`LevelChain`], normalized to one.
pub fn stationary<C: LevelChain>(chain: &C, method: Method, tol: f64) -> Result<Vec<f64>> {
    if chain.states() > MAX_STATES {
        return Err(Error::StateSpaceTooLarge(chain.states()));
    }
    match method {
        Method::Direct => level_reduction(chain),
        Method::GaussSeidel => gauss_seidel(chain, tol, 1_000_000),
    }
}

/// Block level reduction from the top level down, then forward recursion
/// `pi_l = pi_{l-1} R_{l-1}`.
///
/// With `S_L = A_L`, `R_{l-1} = -U_{l-1} S_l^{-1}` and
/// `S_{l-1} = A_{l-1} + R_{l-1} D_l`. Diagonals of every `S_l` are rebuilt
/// from the zero-row-sum property of the censored generator so that no
/// subtraction of nearly equal rates ever happens.
fn level_reduction<C: LevelChain>(chain: &C) -> Result<Vec<f64>> {
    let (levels, width) = (chain.levels(), chain.width());
    let rates = |l: usize| -> Vec<Rates> { (0..width).map(|i| chain.rates(l, i)).collect() };
    let within = |r: &[Rates]| -> DMatrix<f64> {
        let mut a = DMatrix::zeros(width, width);
        for (i, ri) in r.iter().enumerate() {
            if i + 1 < width {
                a[(i, i + 1)] = ri.right;
            }
            if i > 0 {
                a[(i, i - 1)] = ri.left;
            }
        }
        a
    };
    // Sets the diagonal to minus the off-diagonal row sum and downward leak.
    let fix_diagonal = |s: &mut DMatrix<f64>, down: &[f64]| {
        for i in 0..width {
            let off: f64 = (0..width).filter(|&j| j != i).map(|j| s[(i, j)]).sum();
            s[(i, i)] = -(off + down[i]);
        }
    };

    let mut upper = rates(levels - 1);
    let mut s = within(&upper);
    fix_diagonal(&mut s, &upper.iter().map(|r| r.down).collect::<Vec<_>>());
    let mut r_store: Vec<DMatrix<f64>> = Vec::with_capacity(levels.saturating_sub(1));
    for l in (1..levels).rev() {
        let below = rates(l - 1);
        let inv = s
            .clone()
            .try_inverse()
            .ok_or(Error::SingularSystem(f64::INFINITY))?;
        let mut r = inv;
        for (i, ri) in below.iter().enumerate() {
            let u = ri.up;
            for j in 0..width {
                r[(i, j)] *= -u;
            }
        }
        // R has nonnegative entries in exact arithmetic.
        r.apply(|v| *v = v.max(0.0));
        let mut next = within(&below);
        for i in 0..width {
            for (j, rj) in upper.iter().enumerate() {
                next[(i, j)] += r[(i, j)] * rj.down;
            }
        }
        fix_diagonal(&mut next, &below.iter().map(|r| r.down).collect::<Vec<_>>());
        r_store.push(r);
        s = next;
        upper = below;
    }
    r_store.reverse();

    let mut pi = Vec::with_capacity(levels * width);
    pi.extend(gth_stationary(s));
    for r in &r_store {
        let prev = &pi[pi.len() - width..];
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let terms: Vec<f64> = (0..width).map(|i| prev[i] * r[(i, j)]).collect();
                pairwise_sum(&terms)
            })
            .collect();
        let newest = next.iter().fold(0.0f64, |m, v| m.max(*v));
        pi.extend(next);
        if newest > RESCALE_LIMIT {
            pi.iter_mut().for_each(|v| *v /= newest);
        }
    }
    let total = pairwise_sum(&pi);
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::SingularSystem(total));
    }
    pi.iter_mut().for_each(|p| *p /= total);
    Ok(pi)
}

/// Stationary vector of a small dense generator by Grassmann–Taksar–Heyman
/// elimination (subtraction-free).
fn gth_stationary(mut q: DMatrix<f64>) -> Vec<f64> {
    let n = q.nrows();
    for k in (1..n).rev() {
        let s: f64 = (0..k).map(|j| q[(k, j)]).sum();
        if s <= 0.0 {
            continue;
        }
        for i in 0..k {
            let f = q[(i, k)] / s;
            if f == 0.0 {
                continue;
            }
            for j in 0..k {
                if i != j {
                    q[(i, j)] += f * q[(k, j)];
                }
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        let s: f64 = (0..k).map(|j| q[(k, j)]).sum();
        let num: f64 = (0..k).map(|i| pi[i] * q[(i, k)]).sum();
        pi[k] = if s > 0.0 { num / s } else { 0.0 };
        if pi[k] > RESCALE_LIMIT {
            let top = pi[k];
            pi[..=k].iter_mut().for_each(|v| *v /= top);
        }
    }
    pi
}

/// Lexicographic Gauss–Seidel on `pi Q = 0`.
fn gauss_seidel<C: LevelChain>(chain: &C, tol: f64, max_sweeps: usize) -> Result<Vec<f64>> {
    let (levels, width) = (chain.levels(), chain.width());
    let n = levels * width;
    let all: Vec<Rates> = (0..levels)
        .flat_map(|l| (0..width).map(move |i| (l, i)))
        .map(|(l, i)| chain.rates(l, i))
        .collect();
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for sweep in 0..max_sweeps {
        for s in 0..n {
            let (l, i) = (s / width, s % width);
            let mut inflow = 0.0;
            if l > 0 {
                inflow += pi[s - width] * all[s - width].up;
            }
            if l + 1 < levels {
                inflow += pi[s + width] * all[s + width].down;
            }
            if i > 0 {
                inflow += pi[s - 1] * all[s - 1].right;
            }
            if i + 1 < width {
                inflow += pi[s + 1] * all[s + 1].left;
            }
            let out = all[s].total();
            if out > 0.0 {
                pi[s] = inflow / out;
            }
        }
        let total = pairwise_sum(&pi);
        pi.iter_mut().for_each(|p| *p /= total);
        if sweep % 16 == 15 {
            residual = balance_residual(chain, &pi);
            if residual <= tol {
                return Ok(pi);
            }
        }
    }
    Err(Error::OracleNoConvergence { residual, tol })
}

fn rim_mass(probs: &[f64], bounds: OracleBox) -> f64 {
    let w = bounds.n1_max + 1;
    let mut terms: Vec<f64> = probs[bounds.n2_max * w..].to_vec();
    terms.extend((0..bounds.n2_max).map(|n2| probs[n2 * w + bounds.n1_max]));
    pairwise_sum(&terms)
}

/// Stationary law of the limiting walk in `bounds`.
pub fn solve_limiting_walk(
    model: &Model,
    bounds: OracleBox,
    method: Method,
    tol: f64,
) -> Result<TruncatedDistribution> {
    let chain = LimitingWalk {
        model: *model,
        bounds,
    };
    let probs = stationary(&chain, method, tol)?;
    let residual = balance_residual(&chain, &probs);
    if residual > tol.max(DEFAULT_TOL) {
        return Err(Error::OracleNoConvergence { residual, tol });
    }
    let boundary_mass = rim_mass(&probs, bounds);
    if boundary_mass > MAX_BOUNDARY_MASS {
        return Err(Error::BoxTooSmall(boundary_mass));
    }
    Ok(TruncatedDistribution {
        n1_max: bounds.n1_max,
        n2_max: bounds.n2_max,
        probs,
        boundary_mass,
        residual,
    })
}

/// `B1 = P(n1 = 0, n2 <= a)`, `B2 = P(n2 = 0)`.
pub fn blocking_from_distribution(dist: &TruncatedDistribution, a: usize) -> BlockingPair {
    let b1: Vec<f64> = (0..=a.min(dist.n2_max)).map(|n2| dist.get(0, n2)).collect();
    BlockingPair {
        b1: pairwise_sum(&b1),
        b2: dist.marginal_n2(0),
    }
}

/// Geometric-tail estimate of a box whose rim mass is near `target`.
///
/// Along `n1` the walk decays like `(mu1c1 / lambda1)^n1`. Above the threshold
/// the `n2` drift is set by `lambda2` plus the overflow `lambda1 P(n1 = 0)`.
pub fn estimate_box(model: &Model, target: f64) -> OracleBox {
    let axis = |rho: f64| -> usize {
        let guideline = 20.0 / (1.0 - rho);
        let tail = target.ln() / rho.ln();
        guideline.max(tail).max(16.0).ceil() as usize
    };
    let rho1 = model.mu1c1() / model.lambda1();
    let rho2 = model.mu2c2() / (model.lambda2() + model.lambda1() * (1.0 - rho1));
    // Below the threshold the walk may grow along n2 at ratio mu2c2 / lambda2.
    OracleBox::new(axis(rho1), model.threshold() + axis(rho2))
}

/// Solve on [`estimate_box`] and enlarge the axes whose rim carries more than
/// `target` until it does not or the state limit is reached.
pub fn auto_solve(model: &Model, target: f64) -> Result<TruncatedDistribution> {
    let mut bounds = estimate_box(model, target);
    loop {
        if bounds.states() > MAX_STATES {
            return Err(Error::StateSpaceTooLarge(bounds.states()));
        }
        let chain = LimitingWalk {
            model: *model,
            bounds,
        };
        let probs = stationary(&chain, Method::Direct, DEFAULT_TOL)?;
        let w = bounds.n1_max + 1;
        let top = pairwise_sum(&probs[bounds.n2_max * w..]);
        let side: Vec<f64> = (0..=bounds.n2_max).map(|n2| probs[n2 * w + bounds.n1_max]).collect();
        let side = pairwise_sum(&side);
        if top <= target && side <= target {
            return solve_limiting_walk(model, bounds, Method::Direct, DEFAULT_TOL);
        }
        let grow = |n: usize| n + n / 2 + 1;
        bounds = OracleBox::new(
            if side > target { grow(bounds.n1_max) } else { bounds.n1_max },
            if top > target { grow(bounds.n2_max) } else { bounds.n2_max },
        );
    }
}

/// Stationary law of the pre-limit chain at scale `nu`.
pub fn solve_prelimit(cfg: &ModelConfig, nu: f64, method: Method, tol: f64) -> Result<PrelimitDistribution> {
    let (chain, rounded) = PrelimitChain::from_config(cfg, nu)?;
    let probs = stationary(&chain, method, tol)?;
    let residual = balance_residual(&chain, &probs);
    if residual > tol.max(DEFAULT_TOL) * nu.max(1.0) {
        return Err(Error::OracleNoConvergence { residual, tol });
    }
    Ok(PrelimitDistribution {
        chain,
        probs,
        residual,
        rounded,
    })
}

/// Oracle record in the golden-file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub params: ModelParams,
    pub a: usize,
    #[serde(rename = "box")]
    pub bounds: OracleBox,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    pub boundary_mass: f64,
    pub residual: f64,
}

impl OracleRecord {
    pub fn from_distribution(model: &Model, dist: &TruncatedDistribution) -> Self {
        let b = blocking_from_distribution(dist, model.threshold());
        OracleRecord {
            params: *model.params(),
            a: model.threshold(),
            bounds: dist.bounds(),
            b1: b.b1,
            b2: b.b2,
            boundary_mass: dist.boundary_mass,
            residual: dist.residual,
        }
    }

    pub fn blocking(&self) -> BlockingPair {
        BlockingPair {
            b1: self.b1,
            b2: self.b2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    fn model(p: ModelParams) -> Model {
        p.validate().unwrap()
    }

    #[test]
    fn gth_two_state() {
        let q = DMatrix::from_row_slice(2, 2, &[-2.0, 2.0, 3.0, -3.0]);
        let pi = gth_stationary(q);
        assert!((pi[1] / pi[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn prelimit_hand_solved_four_states() {
        // C1 = C2 = 1, a = 0: states (N1, N2) in {0,1}^2. Overflow from (1,0)
        // moves to (1,1) at rate lambda1.
        let cfg = ModelConfig {
            lambda1: 1.0,
            lambda2: 2.0,
            mu1: 3.0,
            mu2: 4.0,
            c1: 1.0,
            c2: 1.0,
            a: 0,
        };
        let d = solve_prelimit(&cfg, 1.0, Method::Direct, DEFAULT_TOL).unwrap();
        // Balance equations solved by hand:
        // (0,0): 3 p10 + 4 p01 = 3 p00
        // (1,0): 1 p00 + 4 p11 = (3 + 2 + 1) p10
        // (0,1): 2 p00 + 3 p11 = (4 + 1) p01
        // (1,1): 2 p10 + 1 p10 + 1 p01 = 7 p11
        let (p00, p10, p01, p11) = (d.get(0, 0), d.get(1, 0), d.get(0, 1), d.get(1, 1));
        assert!((3.0 * p10 + 4.0 * p01 - 3.0 * p00).abs() < 1e-15);
        assert!((p00 + 4.0 * p11 - 6.0 * p10).abs() < 1e-15);
        assert!((2.0 * p00 + 3.0 * p11 - 5.0 * p01).abs() < 1e-15);
        assert!((3.0 * p10 + p01 - 7.0 * p11).abs() < 1e-15);
        assert!((p00 + p10 + p01 + p11 - 1.0).abs() < 1e-15);
        let b = d.blocking();
        assert!((b.b1 - p11).abs() < 1e-15);
        assert!((b.b2 - (p01 + p11)).abs() < 1e-15);
    }

    #[test]
    fn product_form_when_coupling_unreachable() {
        let m = model(presets::fig3(60));
        let bounds = OracleBox::new(40, 50);
        let d = solve_limiting_walk(&m, bounds, Method::Direct, DEFAULT_TOL).unwrap();
        let rho1 = m.mu1c1() / m.lambda1();
        let rho2 = m.mu2c2() / m.lambda2();
        let z1 = (1.0 - rho1.powi(41)) / (1.0 - rho1);
        let z2 = (1.0 - rho2.powi(51)) / (1.0 - rho2);
        for n2 in [0, 1, 7, 50] {
            for n1 in [0, 2, 9, 40] {
                let exact = rho1.powi(n1 as i32) * rho2.powi(n2 as i32) / (z1 * z2);
                assert!((d.get(n1, n2) - exact).abs() < 1e-8 * exact.max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn gauss_seidel_agrees_with_direct() {
        let m = model(presets::fig3(2));
        let bounds = OracleBox::new(24, 24);
        let d = solve_limiting_walk(&m, bounds, Method::Direct, DEFAULT_TOL).unwrap();
        let g = solve_limiting_walk(&m, bounds, Method::GaussSeidel, 1e-13).unwrap();
        let diff = d.probs.iter().zip(&g.probs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-11, "{diff}");
    }

    #[test]
    fn rate_scaling_leaves_law_unchanged() {
        let bounds = OracleBox::new(30, 30);
        let a = solve_limiting_walk(&model(presets::fig3(2)), bounds, Method::Direct, DEFAULT_TOL).unwrap();
        let b = solve_limiting_walk(&model(presets::fig3(2).scaled(7.5)), bounds, Method::Direct, 1e-11).unwrap();
        let diff = a.probs.iter().zip(&b.probs).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff < 1e-13, "{diff}");
    }

    #[test]
    fn deterministic() {
        let m = model(presets::fig5(3));
        let bounds = OracleBox::new(60, 60);
        let a = solve_limiting_walk(&m, bounds, Method::Direct, DEFAULT_TOL);
        let b = solve_limiting_walk(&m, bounds, Method::Direct, DEFAULT_TOL);
        assert_eq!(a, b);
    }

    #[test]
    fn small_box_rejected() {
        let m = model(presets::fig4(2));
        let r = solve_limiting_walk(&m, OracleBox::new(20, 20), Method::Direct, DEFAULT_TOL);
        assert!(matches!(r, Err(Error::BoxTooSmall(_))));
    }

    #[test]
    fn state_limit_enforced() {
        let m = model(presets::fig3(0));
        let r = solve_limiting_walk(&m, OracleBox::new(2000, 2000), Method::Direct, DEFAULT_TOL);
        assert!(matches!(r, Err(Error::StateSpaceTooLarge(_))));
    }

    #[test]
    fn prelimit_rounding_and_validation() {
        let cfg = ModelConfig {
            lambda1: 3.0,
            lambda2: 5.0,
            mu1: 1.0,
            mu2: 2.0,
            c1: 1.0,
            c2: 1.0,
            a: 2,
        };
        let (c, rounded) = PrelimitChain::from_config(&cfg, 10.0).unwrap();
        assert!(!rounded);
        assert_eq!((c.servers1, c.servers2), (10, 10));
        let (c, rounded) = PrelimitChain::from_config(&cfg, 10.4).unwrap();
        assert!(rounded);
        assert_eq!(c.servers1, 10);
        assert!(PrelimitChain::from_config(&cfg, 1.0).is_err());
        assert!(PrelimitChain::from_config(&cfg, -1.0).is_err());
    }

    #[test]
    fn first_marginal_is_geometric() {
        let m = model(presets::fig3(3));
        let d = auto_solve(&m, TARGET_BOUNDARY_MASS).unwrap();
        assert!((d.marginal_n1(0) - 2.0 / 3.0).abs() < 1e-8);
    }
}
