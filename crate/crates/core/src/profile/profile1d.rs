use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, GaussLegendre};

use super::gtable::{g_rate, GTable};
use super::hermite::Quintic;
use super::CoefficientFamily;

/// Numerical knobs of the profile construction.
#[derive(Clone, Copy, Debug)]
pub struct ProfileOptions {
    /// Node spacing in `asinh(r)`, where `r = W'` is the slope.
    pub delta: f64,
    /// Stop once the estimated remaining tail drops below this fraction.
    pub tail_rtol: f64,
    /// Slope beyond which the tail is declared divergent.
    pub r_limit: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { delta: 1.0 / 128.0, tail_rtol: 1e-17, r_limit: 1e100 }
    }
}

/// The symmetric solution `W` of `(b(W'))' + F(W')/W = 0` on `(0, 1)` with
/// `W(0) = W(1) = 0`.
///
/// Along the increasing branch the slope `r = W'` parametrizes everything:
/// `W = e^{-G(r)}/(2x̄)` and `t = x(r)/(2x̄)` with
/// `x(r) = ∫_r^∞ e^{-G} b'/F dρ`, `x̄ = x(0)`. The table stores
/// `v = log W` against `u = log t` with exact first and second derivatives,
/// interpolated by quintic Hermite pieces.
#[derive(Clone, Debug)]
pub struct Profile1D {
    gtable: GTable,
    xbar: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    dv: Vec<f64>,
    d2v: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub w: f64,
    pub dw: f64,
}

pub fn solve_profile_w(coeffs: &CoefficientFamily) -> Result<Profile1D> {
    Profile1D::build(coeffs, ProfileOptions::default())
}

impl Profile1D {
    pub fn build(coeffs: &CoefficientFamily, opts: ProfileOptions) -> Result<Self> {
        coeffs.validate(100.0, 2000)?;
        let gl = GaussLegendre::new(20);
        let rate = |s: f64| g_rate(coeffs, s);
        let weight = |s: f64| coeffs.db(s) / coeffs.f(s);

        let mut nodes = vec![0.0];
        let mut g = vec![0.0];
        let mut dx: Vec<f64> = Vec::new();
        let mut sum = 0.0;
        let per_doubling = (std::f64::consts::LN_2 / opts.delta).ceil() as usize;
        let remainder;
        let mut k = 0usize;
        loop {
            let a = (k as f64 * opts.delta).sinh();
            let b = ((k + 1) as f64 * opts.delta).sinh();
            let dg = integrate(rate, a, b, 0.0, 1e-13, 400).value;
            if !(dg > 0.0 && dg.is_finite()) {
                return Err(Error::Ellipticity { r: a, detail: format!("G increment {dg} on [{a}, {b}]") });
            }
            let g0 = g[k];
            let inner = |rho: f64| (-(g0 + gl.integrate(rate, a, rho))).exp() * weight(rho);
            let ddx = integrate(inner, a, b, 0.0, 1e-13, 400).value;
            if !ddx.is_finite() || ddx < 0.0 {
                return Err(Error::Domain(format!("profile integrand not finite on [{a}, {b}]")));
            }
            nodes.push(b);
            g.push(g0 + dg);
            dx.push(ddx);
            sum += ddx;
            k += 1;

            if (-g[k]).exp() == 0.0 || (ddx == 0.0 && b >= 1.0) {
                remainder = 0.0;
                break;
            }
            if b >= 1.0 && k >= 2 {
                let q = ddx / dx[k - 2];
                if q < 1.0 {
                    let rem = ddx * q / (1.0 - q);
                    if rem <= opts.tail_rtol * sum {
                        remainder = rem;
                        break;
                    }
                }
            }
            if b > opts.r_limit {
                let m = per_doubling.min(dx.len() / 2).max(1);
                let last: f64 = dx[dx.len() - m..].iter().sum();
                let prev: f64 = dx[dx.len() - 2 * m..dx.len() - m].iter().sum();
                return Err(Error::TailDivergence { r: b, ratio: last / prev });
            }
        }

        // Suffix sums from the far end avoid cancellation in x(r).
        let n = nodes.len();
        let mut x = vec![0.0; n];
        x[n - 1] = remainder;
        for j in (0..n - 1).rev() {
            x[j] = x[j + 1] + dx[j];
        }
        let xbar = x[0];
        let log2x = (2.0 * xbar).ln();

        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        let mut dv = Vec::with_capacity(n);
        let mut d2v = Vec::with_capacity(n);
        for j in (0..n).rev() {
            if x[j] <= 0.0 {
                continue;
            }
            let r = nodes[j];
            let uj = x[j].ln() - log2x;
            let vj = -g[j] - log2x;
            let ratio = (uj - vj).exp();
            let d1 = r * ratio;
            let d2 = d1 * (1.0 - d1) - coeffs.f(r) / coeffs.db(r) * ratio * ratio;
            u.push(uj);
            v.push(vj);
            dv.push(d1);
            d2v.push(d2);
        }
        let gtable = GTable::from_parts(coeffs, nodes, g);
        Ok(Profile1D { gtable, xbar, u, v, dv, d2v })
    }

    pub fn coefficients(&self) -> &CoefficientFamily {
        self.gtable.coefficients()
    }

    /// The `G` table built along the way, covering every slope in the profile.
    pub fn g_table(&self) -> &GTable {
        &self.gtable
    }

    /// Half-width of the unscaled profile `W₀`.
    pub fn xbar(&self) -> f64 {
        self.xbar
    }

    /// `W(1/2) = 1/(2x̄)`.
    pub fn max_value(&self) -> f64 {
        1.0 / (2.0 * self.xbar)
    }

    /// Smallest tabulated `t`; below it the profile follows its terminal power law.
    pub fn t_min(&self) -> f64 {
        self.u[0].exp()
    }

    fn piece(&self, j: usize) -> Quintic {
        Quintic {
            x0: self.u[j],
            width: self.u[j + 1] - self.u[j],
            y0: [self.v[j], self.dv[j], self.d2v[j]],
            y1: [self.v[j + 1], self.dv[j + 1], self.d2v[j + 1]],
        }
    }

    /// `(v, v', v'')` at `u = log t`, `t ≤ 1/2`.
    fn log_eval(&self, u: f64) -> [f64; 3] {
        if u <= self.u[0] {
            return [self.v[0] + self.dv[0] * (u - self.u[0]), self.dv[0], 0.0];
        }
        let j = self.u.partition_point(|&x| x <= u).saturating_sub(1).min(self.u.len() - 2);
        self.piece(j).eval(u)
    }

    /// `(W, W', W'')` at `t`; zero outside `(0, 1)`.
    pub fn eval_all(&self, t: f64) -> [f64; 3] {
        if !(t > 0.0 && t < 1.0) {
            return [0.0; 3];
        }
        let (tt, sign) = if t > 0.5 { (1.0 - t, -1.0) } else { (t, 1.0) };
        let [v, dv, d2v] = self.log_eval(tt.ln());
        let w = v.exp();
        let dw = w * dv / tt;
        let d2w = w / (tt * tt) * (d2v - dv * (1.0 - dv));
        [w, sign * dw, d2w]
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval_all(t)[0]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval_all(t)[1]
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        self.eval_all(t)[2]
    }

    /// `s = W⁻¹(ε)` on the increasing branch `[0, 1/2]`.
    pub fn inverse(&self, eps: f64) -> Result<f64> {
        let wmax = self.max_value();
        if !(eps < wmax) || eps.is_nan() {
            return Err(Error::Range { value: eps, lo: 0.0, hi: wmax });
        }
        if eps <= 0.0 {
            return Ok(0.0);
        }
        let target = eps.ln();
        if target <= self.v[0] {
            return Ok((self.u[0] + (target - self.v[0]) / self.dv[0]).exp());
        }
        let j = self.v.partition_point(|&x| x <= target).saturating_sub(1).min(self.v.len() - 2);
        Ok(self.piece(j).solve_increasing(target).exp().min(0.5))
    }

    /// `G(W'(t)) + log W(t)`, constant (`= −log 2x̄`) for the exact profile.
    pub fn first_integral(&self, t: f64) -> Result<f64> {
        let [w, dw, _] = self.eval_all(t);
        Ok(self.gtable.eval(dw)? + w.ln())
    }

    /// Pointwise residual `b'(W') W'' + F(W')/W` of the profile equation.
    pub fn ode_residual(&self, t: f64) -> f64 {
        let c = self.coefficients();
        let [w, dw, d2w] = self.eval_all(t);
        c.db(dw) * d2w + c.f(dw) / w
    }

    /// Table nodes on `(0, 1)`, both branches, ascending in `t`.
    pub fn table(&self) -> Vec<ProfilePoint> {
        let mut out: Vec<ProfilePoint> = self
            .u
            .iter()
            .map(|&u| {
                let t = u.exp();
                let [w, dw, _] = self.eval_all(t);
                ProfilePoint { t, w, dw }
            })
            .collect();
        let mirrored: Vec<ProfilePoint> = out
            .iter()
            .rev()
            .skip(1)
            .map(|p| ProfilePoint { t: 1.0 - p.t, w: p.w, dw: -p.dw })
            .collect();
        out.extend(mirrored);
        out
    }
}

/// `W'(W⁻¹(ε))`: the gradient bound carried by the relaxed barrier of a unit-width slab.
pub fn gradient_bound(prof: &Profile1D, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Range { value: eps, lo: 0.0, hi: prof.max_value() });
    }
    let s = prof.inverse(eps)?;
    Ok(prof.derivative(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// `∫₀¹ W² (1−W⁴)^{-1/2} dW` with `W = sin^{1/2} φ`, then `φ = τ²`,
    /// which leaves a smooth integrand.
    fn chaplygin_xbar_oracle() -> f64 {
        let gl = GaussLegendre::new(40);
        let top = (std::f64::consts::FRAC_PI_2).sqrt();
        let n = 64;
        (0..n)
            .map(|k| {
                let a = top * k as f64 / n as f64;
                let b = top * (k + 1) as f64 / n as f64;
                gl.integrate(|tau| 0.5 * (tau * tau).sin().sqrt() * 2.0 * tau, a, b)
            })
            .sum()
    }

    #[test]
    fn chaplygin_xbar() {
        let p = solve_profile_w(&CoefficientFamily::chaplygin()).unwrap();
        let oracle = chaplygin_xbar_oracle();
        assert_abs_diff_eq!(oracle, 0.599070117, epsilon = 1e-8);
        assert_abs_diff_eq!(p.xbar(), oracle, epsilon = 1e-10);
        assert_abs_diff_eq!(p.max_value(), 1.0 / (2.0 * oracle), epsilon = 1e-10);
    }

    #[test]
    fn unit_xbar() {
        let p = solve_profile_w(&CoefficientFamily::unit()).unwrap();
        assert_abs_diff_eq!(p.xbar(), (std::f64::consts::PI / 2.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn boundary_and_symmetry() {
        let p = solve_profile_w(&CoefficientFamily::chaplygin()).unwrap();
        assert_eq!(p.value(0.0), 0.0);
        assert_eq!(p.value(1.0), 0.0);
        for k in 1..100 {
            let t = k as f64 / 200.0;
            assert_abs_diff_eq!(p.value(t), p.value(1.0 - t), epsilon = 1e-10);
            assert!(p.value(t) < p.value(t + 0.005));
        }
        assert_abs_diff_eq!(p.derivative(0.5), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(p.value(0.3), p.value(0.7), epsilon = 1e-12);
    }

    #[test]
    fn first_integral_and_residual() {
        for coeffs in [CoefficientFamily::chaplygin(), CoefficientFamily::unit()] {
            let p = solve_profile_w(&coeffs).unwrap();
            let c = -(2.0 * p.xbar()).ln();
            for k in 0..=400 {
                let t = 1e-3 + (0.5 - 1e-3) * k as f64 / 400.0;
                assert_abs_diff_eq!(p.first_integral(t).unwrap(), c, epsilon = 1e-8);
            }
            for k in 0..=400 {
                let t = 1e-3 + (1.0 - 2e-3) * k as f64 / 400.0;
                assert!(p.ode_residual(t).abs() <= 1e-6, "{}: residual {} at {t}", coeffs.name(), p.ode_residual(t));
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let p = solve_profile_w(&CoefficientFamily::chaplygin()).unwrap();
        for k in 1..100 {
            let eps = p.max_value() * k as f64 / 100.0;
            let s = p.inverse(eps).unwrap();
            assert_abs_diff_eq!(p.value(s), eps, epsilon = 1e-13);
        }
        for eps in [1e-12, 1e-8, 1e-4] {
            let s = p.inverse(eps).unwrap();
            assert!((p.value(s) / eps - 1.0).abs() < 1e-10);
        }
        assert!(p.inverse(p.max_value()).is_err());
        assert_eq!(p.inverse(0.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_family_logarithmic_slope() {
        // W ~ C t √(−2 log W) as t → 0.
        let p = solve_profile_w(&CoefficientFamily::unit()).unwrap();
        let ratio = |t: f64| {
            let w = p.value(t);
            w / (t * (-2.0 * w.ln()).sqrt())
        };
        let samples: Vec<f64> = (0..=20).map(|k| ratio(1e-6 * 100f64.powf(k as f64 / 20.0))).collect();
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo - 1.0 < 0.05, "ratio spread {lo}..{hi}");
    }

    #[test]
    fn gradient_bounds() {
        let p = solve_profile_w(&CoefficientFamily::chaplygin()).unwrap();
        let b = gradient_bound(&p, 0.1).unwrap();
        let s = p.inverse(0.1).unwrap();
        let h = 1e-5 * s;
        let fd = (p.value(s + h) - p.value(s - h)) / (2.0 * h);
        assert_abs_diff_eq!(b, fd, epsilon = 1e-6 * b.max(1.0));
        let mut last = f64::INFINITY;
        for k in 1..50 {
            let g = gradient_bound(&p, p.max_value() * k as f64 / 50.0).unwrap();
            assert!(g <= last);
            last = g;
        }
        assert!(gradient_bound(&p, p.max_value() * (1.0 - 1e-12)).unwrap() < 1e-3);
        assert!(gradient_bound(&p, 1.0).is_err());
    }
}
