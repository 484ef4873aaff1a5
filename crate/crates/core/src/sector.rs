//! Self-similar solutions `w = r A(θ)` of the Chaplygin equation in a
//! planar sector of aperture `α`.
//!
//! `A` satisfies `A(1+A²)(A''+A) + 2(1+A²+A'²) = 0` with `A(0) = A(α) = 0`.
//! Its first integral `A⁴(1+A²+A'²) = C(1+A²)²` gives `A'² = F_C(A)`, and the
//! half-aperture `ℓ(C) = ∫₀^{A*} dA/√F_C` is increasing from 0 to π/2, so
//! `2ℓ(C) = α` fixes `C`. With `A = A* sin φ` the quadrature is regular:
//!
//! ```text
//! θ(φ) = A*³ ∫₀^φ sin²ψ dψ / √((1 + A*² sin²ψ)(C + A*⁴ sin²ψ))
//! ```

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Nodes per half-aperture (inclusive of both ends) in the `A(θ)` table.
pub const HALF_TABLE_NODES: usize = 2049;

/// Default relative step of the centered differences in [`SectorSolution::ode_residual`].
pub const DEFAULT_FD_STEP: f64 = 1e-3;

const SHOOTING_TOL: f64 = 1e-10;
const QUAD_RTOL: f64 = 1e-13;

/// `A* = √((C + √(C² + 4C))/2)`, the positive root of `F_C`.
pub fn a_star(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok((0.5 * (c + (c * c + 4.0 * c).sqrt())).sqrt())
}

/// `F_C(A) = A'²` along a solution, `= (C(1+A²)² − A⁴(1+A²))/A⁴`.
pub fn f_c(c: f64, a: f64) -> f64 {
    let a2 = a * a;
    (c * (1.0 + a2) * (1.0 + a2) - a2 * a2 * (1.0 + a2)) / (a2 * a2)
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("sector constant C must be positive and finite, got {c}")))
    }
}

/// `dθ/dφ`.
fn jacobian(c: f64, astar: f64, phi: f64) -> f64 {
    let s = phi.sin();
    let s2 = s * s;
    let a2 = astar * astar;
    astar * a2 * s2 / ((1.0 + a2 * s2) * (c + a2 * a2 * s2)).sqrt()
}

fn theta_increment(c: f64, astar: f64, from: f64, to: f64) -> f64 {
    integrate(|p| jacobian(c, astar, p), from, to, 0.0, QUAD_RTOL, 2000).value
}

/// `ℓ(C) = θ(π/2)`, the half-aperture of the solution with constant `C`.
pub fn ell(c: f64) -> Result<f64> {
    let astar = a_star(c)?;
    Ok(theta_increment(c, astar, 0.0, FRAC_PI_2))
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorSolution {
    pub aperture: f64,
    pub c: f64,
    pub a_star: f64,
    pub ell: f64,
    /// Ascending nodes on `[0, α]`.
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
    /// `A'(θ)`; infinite at the two endpoints.
    pub slopes: Vec<f64>,
    /// `sup |A⁴(1+A²+A'²) − C(1+A²)²|` over interior nodes.
    pub first_integral_residual: f64,
    /// Relative residual of the second-order equation, see [`SectorSolution::ode_residual`].
    pub ode_residual: f64,
    #[serde(skip)]
    phi: Vec<f64>,
}

/// Shoots on `C` so that `2ℓ(C) = α`, then tabulates `A` on Chebyshev-spaced
/// nodes of each half-aperture.
pub fn solve_sector(alpha: f64) -> Result<SectorSolution> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::Domain(format!("sector aperture must lie in (0, pi), got {alpha}")));
    }
    let (mut lo, mut hi) = (1e-12f64.ln(), 1e12f64.ln());
    let gap = |logc: f64| -> Result<f64> { Ok(2.0 * ell(logc.exp())? - alpha) };
    if gap(lo)? > 0.0 || gap(hi)? < 0.0 {
        return Err(Error::Domain(format!("aperture {alpha} is outside the range reachable with C in [1e-12, 1e12]")));
    }
    let mut iterations = 0;
    while hi - lo > 1e-15 * hi.abs().max(1.0) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let (g_lo, g_hi) = (gap(lo)?, gap(hi)?);
    let logc = if g_hi.abs() < g_lo.abs() { hi } else { lo };
    let c = logc.exp();
    let astar = a_star(c)?;
    let half = ell(c)?;
    if (2.0 * half - alpha).abs() > SHOOTING_TOL {
        return Err(Error::NonConvergence {
            stage: None,
            iterations,
            detail: format!("shooting reached |2l - alpha| = {:e}", (2.0 * half - alpha).abs()),
            iterate: Some(vec![c]),
        });
    }

    // Half table: θ_j = (α/4)(1 − cos(π j / (N−1))) on [0, α/2].
    let n = HALF_TABLE_NODES;
    let mut th = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    th.push(0.0);
    phi.push(0.0);
    let mut theta_prev = 0.0;
    for j in 1..n {
        let target = if j == n - 1 { half } else { 0.25 * alpha * (1.0 - (PI * j as f64 / (n - 1) as f64).cos()) };
        let p = if j == n - 1 {
            FRAC_PI_2
        } else {
            invert_theta(c, astar, phi[j - 1], theta_prev, target)
        };
        theta_prev += theta_increment(c, astar, phi[j - 1], p);
        th.push(target);
        phi.push(p);
    }

    let mut sol = SectorSolution {
        aperture: alpha,
        c,
        a_star: astar,
        ell: half,
        theta: Vec::with_capacity(2 * n - 1),
        values: Vec::with_capacity(2 * n - 1),
        slopes: Vec::with_capacity(2 * n - 1),
        first_integral_residual: 0.0,
        ode_residual: 0.0,
        phi: phi.clone(),
    };
    let slope = |p: f64| if p == 0.0 { f64::INFINITY } else { astar * p.cos() / jacobian(c, astar, p) };
    for j in 0..n {
        sol.theta.push(th[j]);
        sol.values.push(astar * phi[j].sin());
        sol.slopes.push(slope(phi[j]));
    }
    for j in (0..n - 1).rev() {
        sol.theta.push(alpha - th[j]);
        sol.values.push(astar * phi[j].sin());
        sol.slopes.push(-slope(phi[j]));
    }
    sol.first_integral_residual = sol.first_integral_sup();
    sol.ode_residual = sol.ode_residual(DEFAULT_FD_STEP);
    Ok(sol)
}

/// Solves `θ(φ) = target` for `φ ≥ φ₀`, where `θ(φ₀) = θ₀`.
fn invert_theta(c: f64, astar: f64, phi0: f64, theta0: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (phi0, FRAC_PI_2);
    let mut p = phi0 + (target - theta0) / jacobian(c, astar, phi0).max(1e-300);
    if !(p > lo && p < hi) {
        p = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let f = theta0 + theta_increment(c, astar, phi0, p) - target;
        if f == 0.0 {
            return p;
        }
        if f > 0.0 {
            hi = p;
        } else {
            lo = p;
        }
        let mut next = p - f / jacobian(c, astar, p);
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - p).abs() <= 2.0 * f64::EPSILON * p || hi - lo <= 2.0 * f64::EPSILON * p {
            return next;
        }
        p = next;
    }
    p
}

impl SectorSolution {
    fn half_nodes(&self) -> usize {
        self.phi.len()
    }

    /// `A(θ)` by inverting the quadrature map; zero outside `[0, α]`.
    pub fn eval(&self, theta: f64) -> f64 {
        self.a_star * self.phi_at(theta).sin()
    }

    /// `A'(θ)`.
    pub fn slope(&self, theta: f64) -> f64 {
        let p = self.phi_at(theta);
        let s = if theta > 0.5 * self.aperture { -1.0 } else { 1.0 };
        s * self.a_star * p.cos() / jacobian(self.c, self.a_star, p)
    }

    fn phi_at(&self, theta: f64) -> f64 {
        if !(theta > 0.0 && theta < self.aperture) {
            return 0.0;
        }
        let t = if theta > 0.5 * self.aperture { self.aperture - theta } else { theta };
        let n = self.half_nodes();
        let j = self.theta[..n].partition_point(|&x| x <= t).saturating_sub(1).min(n - 2);
        if self.theta[j] == t {
            return self.phi[j];
        }
        invert_theta(self.c, self.a_star, self.phi[j], self.theta[j], t)
    }

    fn first_integral_sup(&self) -> f64 {
        let n = self.theta.len();
        (1..n - 1)
            .map(|j| {
                let a = self.values[j];
                let a2 = a * a;
                let d = self.slopes[j];
                (a2 * a2 * (1.0 + a2 + d * d) - self.c * (1.0 + a2) * (1.0 + a2)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Pointwise relative residual `|A(1+A²)(A''+A) + 2(1+A²+A'²)| / (2(1+A²+A'²))`
    /// with `A''` from centered differences of step `κ·min(θ, α−θ)`.
    pub fn ode_residual_at(&self, theta: f64, kappa: f64) -> f64 {
        let h = kappa * theta.min(self.aperture - theta);
        let a = self.eval(theta);
        let d2 = (self.eval(theta + h) - 2.0 * a + self.eval(theta - h)) / (h * h);
        let d1 = self.slope(theta);
        let scale = 2.0 * (1.0 + a * a + d1 * d1);
        (a * (1.0 + a * a) * (d2 + a) + scale).abs() / scale
    }

    /// Supremum of [`Self::ode_residual_at`] over table nodes at least
    /// `10⁻³·α` from the endpoints.
    pub fn ode_residual(&self, kappa: f64) -> f64 {
        let delta = 1e-3 * self.aperture;
        let n = self.half_nodes();
        // The table is symmetric, so the first half suffices.
        (0..n)
            .map(|j| self.theta[j])
            .filter(|&t| t >= delta)
            .map(|t| self.ode_residual_at(t, kappa))
            .fold(0.0, f64::max)
    }
}

/// The ODE residual of a solution with the default difference step.
pub fn sector_residual_ode(sol: &SectorSolution) -> f64 {
    sol.ode_residual(DEFAULT_FD_STEP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn a_star_examples() {
        assert_abs_diff_eq!(a_star(1.0).unwrap(), ((1.0 + 5f64.sqrt()) / 2.0).sqrt(), epsilon = 1e-15);
        for c in [1e-6, 0.3, 1.0, 40.0, 1e6] {
            let a = a_star(c).unwrap();
            assert!(f_c(c, a).abs() <= 1e-10 * (1.0 + c));
        }
        assert_relative_eq!(a_star(1e-8).unwrap() / 1e-2, 1.0, max_relative = 0.01);
        assert_relative_eq!(a_star(1e8).unwrap().powi(2) / 1e8, 1.0, max_relative = 0.01);
        assert!(a_star(0.0).is_err());
    }

    #[test]
    fn ell_limits() {
        assert!(ell(1e-8).unwrap() <= 0.01);
        assert_abs_diff_eq!(ell(1e8).unwrap(), FRAC_PI_2, epsilon = 0.01);
        assert!(ell(-1.0).is_err());
    }

    #[test]
    fn quarter_plane() {
        let sol = solve_sector(FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(2.0 * sol.ell, FRAC_PI_2, epsilon = 1e-10);
        assert!(sol.first_integral_residual <= 1e-8);
        assert!(sol.ode_residual <= 1e-5, "ode residual {}", sol.ode_residual);
        assert!(sol.ode_residual_at(FRAC_PI_4, DEFAULT_FD_STEP) <= 1e-6);
        assert_eq!(sol.values[0], 0.0);
        assert!(sol.values.last().unwrap().abs() < 1e-15);
        let n = sol.values.len();
        for j in 0..n {
            assert_abs_diff_eq!(sol.values[j], sol.values[n - 1 - j], epsilon = 1e-8);
            assert_abs_diff_eq!(sol.theta[j] + sol.theta[n - 1 - j], sol.aperture, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(sol.values[n / 2], sol.a_star, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.eval(0.3), sol.eval(FRAC_PI_2 - 0.3), epsilon = 1e-12);
    }

    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn residual_is_second_order() {
        let sol = solve_sector(FRAC_PI_2).unwrap();
        let coarse = sol.ode_residual(2e-3);
        let fine = sol.ode_residual(1e-3);
        let ratio = coarse / fine;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn wide_aperture_needs_large_c() {
        let sol = solve_sector(PI - 1e-3).unwrap();
        assert!(sol.c >= 1e3);
        assert!(solve_sector(PI).is_err());
        assert!(solve_sector(0.0).is_err());
    }
}
