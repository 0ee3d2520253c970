//! The kernel `K(x, y)` of the functional equation and its algebraic roots.
//!
//! `K(x, y) = mu1c1 x^2 y + mu2c2 x y^2 - S x y + lambda1 y + lambda2 x` with
//! `S = lambda1 + lambda2 + mu1c1 + mu2c2`. For fixed `y` it is quadratic in
//! `x` with roots `X0(y)` (the one vanishing at the origin) and `X1(y)`;
//! symmetrically for `Y0`, `Y1`. The square roots of the discriminants are
//! built from products of principal square roots over the four real branch
//! points, which pins the branch without any path continuation.
//!
//! One-sided boundary values on a cut are requested with [`Side`]. With this
//! convention `X0(y + 0i)` has negative imaginary part on `(y1, y2)` and
//! `Y0(x + 0i) = r2 * exp(-i theta2(x))` on `(x1, x2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;

/// Distance to a cut below which a point is treated as lying on it.
pub const CUT_PROXIMITY: f64 = 1e-9;

/// Side from which a point of a branch cut is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `z + 0i`
    Above,
    /// `z - 0i`
    Below,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Above => 1.0,
            Side::Below => -1.0,
        }
    }
}

/// Real zeros of the two discriminants and the two circle radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoints {
    /// Zeros of `Delta1`, sorted: `0 < y1 < y2 < 1 < y3 < y4`.
    pub y: [f64; 4],
    /// Zeros of `Delta2`, sorted: `0 < x1 < x2 < 1 < x3 < x4`.
    pub x: [f64; 4],
    pub r1: f64,
    pub r2: f64,
}

impl BranchPoints {
    /// The cut `[y1, y2]` mapped by `X0` onto the circle of radius `r1`.
    pub fn y_cut(&self) -> (f64, f64) {
        (self.y[0], self.y[1])
    }

    /// The cut `[x1, x2]` mapped by `Y0` onto the circle of radius `r2`.
    pub fn x_cut(&self) -> (f64, f64) {
        (self.x[0], self.x[1])
    }
}

/// `K(x, y)` evaluated directly from the rates.
pub fn kernel_value(model: &Model, x: Complex64, y: Complex64) -> Complex64 {
    let s = model.total_rate();
    model.mu1c1() * x * x * y + model.mu2c2() * x * y * y - s * x * y
        + model.lambda1() * y
        + model.lambda2() * x
}

/// `(Delta1(z), Delta2(z))`.
pub fn discriminants(model: &Model, z: Complex64) -> (Complex64, Complex64) {
    let s = model.total_rate();
    let q1 = model.mu2c2() * z * z - s * z + model.lambda2();
    let q2 = model.mu1c1() * z * z - s * z + model.lambda1();
    let d1 = q1 * q1 - 4.0 * model.mu1c1() * model.lambda1() * z * z;
    let d2 = q2 * q2 - 4.0 * model.mu2c2() * model.lambda2() * z * z;
    (d1, d2)
}

/// Real roots of `lead z^2 - b z + c`, ascending, computed without cancellation.
fn quadratic_roots(lead: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * lead * c;
    if disc < 0.0 {
        return None;
    }
    // b > 0 for every caller: the sum of rates dominates.
    let q = 0.5 * (b + b.signum() * disc.sqrt());
    let (r, s) = (q / lead, c / q);
    Some(if r < s { (r, s) } else { (s, r) })
}

/// Zeros of `(lead z^2 - S z + c)^2 - 4 d z^2` via the difference of squares.
fn quartic_roots(lead: f64, s: f64, c: f64, d: f64) -> Result<[f64; 4]> {
    let shift = 2.0 * d.sqrt();
    let mut roots = [0.0; 4];
    for (i, b) in [s - shift, s + shift].into_iter().enumerate() {
        let (lo, hi) = quadratic_roots(lead, b, c).ok_or(Error::DegenerateBranchPoints(b, b))?;
        roots[2 * i] = lo;
        roots[2 * i + 1] = hi;
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    for w in roots.windows(2) {
        if (w[1] - w[0]).abs() < 1e-12 * w[1].abs().max(1.0) {
            return Err(Error::DegenerateBranchPoints(w[0], w[1]));
        }
    }
    Ok(roots)
}

/// Branch points of `Delta1` and `Delta2`, plus `r1` and `r2`.
pub fn branch_points(model: &Model) -> Result<BranchPoints> {
    let s = model.total_rate();
    let y = quartic_roots(model.mu2c2(), s, model.lambda2(), model.mu1c1() * model.lambda1())?;
    let x = quartic_roots(model.mu1c1(), s, model.lambda1(), model.mu2c2() * model.lambda2())?;
    Ok(BranchPoints {
        y,
        x,
        r1: model.r1(),
        r2: model.r2(),
    })
}

/// Chebyshev polynomial of the second kind by the three-term recurrence.
pub fn chebyshev_u(n: usize, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * t);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Kernel bound to a validated model, with cached branch points.
#[derive(Debug, Clone)]
pub struct Kernel {
    model: Model,
    bp: BranchPoints,
}

impl Kernel {
    pub fn new(model: &Model) -> Result<Self> {
        Ok(Kernel {
            model: *model,
            bp: branch_points(model)?,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn branch_points(&self) -> &BranchPoints {
        &self.bp
    }

    pub fn value(&self, x: Complex64, y: Complex64) -> Complex64 {
        kernel_value(&self.model, x, y)
    }

    /// `K(x, y)` for real arguments.
    pub fn value_real(&self, x: f64, y: f64) -> f64 {
        let m = &self.model;
        m.mu1c1() * x * x * y + m.mu2c2() * x * y * y - m.total_rate() * x * y
            + m.lambda1() * y
            + m.lambda2() * x
    }

    /// Sum of absolute values of the kernel's coefficients, used to scale residuals.
    pub fn coefficient_scale(&self) -> f64 {
        let m = &self.model;
        m.mu1c1() + m.mu2c2() + m.total_rate() + m.lambda1() + m.lambda2()
    }

    /// `mu2c2 y^2 - S y + lambda2`.
    pub fn q1(&self, y: f64) -> f64 {
        self.model.mu2c2() * y * y - self.model.total_rate() * y + self.model.lambda2()
    }

    /// `mu1c1 x^2 - S x + lambda1`.
    pub fn q2(&self, x: f64) -> f64 {
        self.model.mu1c1() * x * x - self.model.total_rate() * x + self.model.lambda1()
    }

    pub fn delta1(&self, y: f64) -> f64 {
        let q = self.q1(y);
        q * q - 4.0 * self.model.mu1c1() * self.model.lambda1() * y * y
    }

    pub fn delta2(&self, x: f64) -> f64 {
        let q = self.q2(x);
        q * q - 4.0 * self.model.mu2c2() * self.model.lambda2() * x * x
    }

    pub fn discriminants(&self, z: Complex64) -> (Complex64, Complex64) {
        discriminants(&self.model, z)
    }

    /// `X0(y)` and `X1(y)`. Points within [`CUT_PROXIMITY`] of `[y1, y2]` or
    /// `[y3, y4]` need an explicit `side`.
    pub fn x_roots(&self, y: Complex64, side: Option<Side>) -> Result<(Complex64, Complex64)> {
        let sigma = branch_sqrt(y, &self.bp.y, self.model.mu2c2(), side)?;
        let q = self.model.mu2c2() * y * y - self.model.total_rate() * y + self.model.lambda2();
        let x0 = small_root(q, sigma, self.model.mu1c1(), self.model.lambda1(), y);
        let x1 = self.model.lambda1() / (self.model.mu1c1() * x0);
        Ok((x0, x1))
    }

    /// `Y0(x)` and `Y1(x)`, mirror of [`Kernel::x_roots`].
    pub fn y_roots(&self, x: Complex64, side: Option<Side>) -> Result<(Complex64, Complex64)> {
        let sigma = branch_sqrt(x, &self.bp.x, self.model.mu1c1(), side)?;
        let q = self.model.mu1c1() * x * x - self.model.total_rate() * x + self.model.lambda1();
        let y0 = small_root(q, sigma, self.model.mu2c2(), self.model.lambda2(), x);
        let y1 = self.model.lambda2() / (self.model.mu2c2() * y0);
        Ok((y0, y1))
    }

    /// The point `x(theta)` of `[x1, x2]` with `Y0(x(theta) + 0i) = r2 exp(-i theta)`.
    pub fn x_of_theta(&self, theta: f64) -> Result<f64> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::Domain {
                value: theta,
                lo: 0.0,
                hi: std::f64::consts::PI,
            });
        }
        let m = &self.model;
        let c = m.total_rate() - 2.0 * (m.mu2c2() * m.lambda2()).sqrt() * theta.cos();
        let delta = c * c - 4.0 * m.mu1c1() * m.lambda1();
        if delta < -1e-12 * c * c {
            return Err(Error::NegativeDiscriminant {
                theta,
                value: delta,
            });
        }
        // Smaller root of mu1c1 x^2 - c x + lambda1, in product form.
        Ok(2.0 * m.lambda1() / (c + delta.max(0.0).sqrt()))
    }

    /// Angle `theta2(x) in [0, pi]`, inverse of [`Kernel::x_of_theta`].
    pub fn theta2_of_x(&self, x: f64) -> Result<f64> {
        let (x1, x2) = self.bp.x_cut();
        let slack = 1e-12 * x2;
        if !(x >= x1 - slack && x <= x2 + slack) {
            return Err(Error::Domain {
                value: x,
                lo: x1,
                hi: x2,
            });
        }
        let m = &self.model;
        let denom = 2.0 * x * (m.mu2c2() * m.lambda2()).sqrt();
        let cos = -self.q2(x) / denom;
        let sin = (-self.delta2(x)).max(0.0).sqrt() / denom;
        Ok(sin.atan2(cos.clamp(-1.0, 1.0)))
    }
}

/// The root of `lead * y * z^2 + q z + lambda * y = 0` that vanishes at `y = 0`,
/// choosing between the two algebraically equivalent forms to avoid cancellation.
fn small_root(q: Complex64, sigma: Complex64, lead: f64, lambda: f64, y: Complex64) -> Complex64 {
    let plus = q + sigma;
    let minus = sigma - q;
    if plus.norm() >= minus.norm() {
        -2.0 * lambda * y / plus
    } else {
        minus / (2.0 * lead * y)
    }
}

/// `sqrt(Delta(z))` continued analytically from `Delta(0) > 0` off the two cuts
/// `[r0, r1]` and `[r2, r3]`; `lead` is the square root of the quartic's
/// leading coefficient.
fn branch_sqrt(z: Complex64, roots: &[f64; 4], lead: f64, side: Option<Side>) -> Result<Complex64> {
    let near_real = z.im.abs() < CUT_PROXIMITY;
    if near_real {
        let on_cut = |lo: f64, hi: f64| z.re >= lo - CUT_PROXIMITY && z.re <= hi + CUT_PROXIMITY;
        let cut = on_cut(roots[0], roots[1]) || on_cut(roots[2], roots[3]);
        if cut {
            let side = side.ok_or(Error::OnCut(z))?;
            return Ok(real_axis_limit(z.re, roots, lead, side));
        }
        // Off the cuts the real axis is approached identically from both sides.
        return Ok(real_axis_limit(z.re, roots, lead, Side::Above));
    }
    let f = |r: f64| (z - r).sqrt();
    Ok(lead * (f(roots[0]) * f(roots[1])) * (f(roots[2]) * f(roots[3])))
}

/// Boundary value of the product of square roots at a real point, one factor
/// at a time: `sqrt(t - r)` is real for `t >= r` and `+-i sqrt(r - t)` below.
fn real_axis_limit(t: f64, roots: &[f64; 4], lead: f64, side: Side) -> Complex64 {
    let mut acc = Complex64::new(lead, 0.0);
    for &r in roots {
        let d = t - r;
        acc *= if d >= 0.0 {
            Complex64::new(d.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, side.sign() * (-d).sqrt())
        };
    }
    acc
}
