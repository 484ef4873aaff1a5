use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{solve_profile_w, CoefficientFamily};

/// Radial solution on the unit disk, `w(1) = ε`, `w'(0) = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialSolution {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    pub eps: f64,
    pub iterations: usize,
    pub residual: f64,
    /// `w'(0)` from a one-sided cubic through the first four nodes.
    pub slope_at_center: f64,
}

impl RadialSolution {
    /// Piecewise-linear interpolation; `r` is clamped to `[0, 1]`.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, 1.0);
        let k = self.r.partition_point(|&x| x <= r).saturating_sub(1).min(self.r.len() - 2);
        let t = (r - self.r[k]) / (self.r[k + 1] - self.r[k]);
        self.w[k] + t * (self.w[k + 1] - self.w[k])
    }

    /// `sup |w(r_i) − exact(r_i)|` over nodes with `r_i ≤ r_max`.
    pub fn sup_error(&self, exact: impl Fn(f64) -> f64, r_max: f64) -> f64 {
        self.r
            .iter()
            .zip(&self.w)
            .filter(|(&r, _)| r <= r_max)
            .map(|(&r, &w)| (w - exact(r)).abs())
            .fold(0.0, f64::max)
    }
}

/// Finite-volume Newton solve of `(r a(|w'|) w')'/r + F(|w'|)/w = 0` on the
/// grid `r_i = 1 − (1 − i/n)²`, which resolves the square-root boundary layer.
pub fn radial_solve_disk(coeffs: &CoefficientFamily, n: usize, eps: f64) -> Result<RadialSolution> {
    if n < 100 {
        return Err(Error::Config(format!("radial solve needs n >= 100, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Range { value: eps, lo: 0.0, hi: 1.0 });
    }
    let prof = solve_profile_w(coeffs)?;
    let r: Vec<f64> = (0..=n)
        .map(|i| {
            let s = 1.0 - i as f64 / n as f64;
            1.0 - s * s
        })
        .collect();
    let mut w: Vec<f64> = r.iter().map(|&x| (2.0 * prof.value(0.5 * (1.0 + x))).max(eps)).collect();
    w[n] = eps;
    let sys = Radial::new(coeffs, &r);

    let mut res = sys.residual(&w);
    let mut rnorm = max_abs(&res);
    let mut iterations = 0;
    while rnorm > 1e-10 {
        if iterations >= 200 {
            return Err(Error::NonConvergence {
                stage: None,
                iterations,
                detail: format!("radial Newton stalled at residual {rnorm:e}"),
                iterate: Some(w),
            });
        }
        iterations += 1;
        let (lo, di, up) = sys.jacobian(&w);
        let rhs: Vec<f64> = res.iter().map(|x| -x).collect();
        let delta = thomas(&lo, &di, &up, &rhs)?;
        let mut alpha = 1.0f64;
        for i in 0..n {
            if delta[i] < 0.0 {
                alpha = alpha.min(-0.5 * w[i] / delta[i]);
            }
        }
        let base = w.clone();
        loop {
            for i in 0..n {
                w[i] = base[i] + alpha * delta[i];
            }
            let trial = sys.residual(&w);
            let tn = max_abs(&trial);
            if tn < rnorm || alpha < 1e-6 {
                res = trial;
                rnorm = tn;
                break;
            }
            alpha *= 0.5;
        }
    }
    // One-sided cubic through (r_0..r_3): derivative of the Lagrange form at 0.
    let (x1, x2, x3) = (r[1], r[2], r[3]);
    let slope = w[0] * -(1.0 / x1 + 1.0 / x2 + 1.0 / x3)
        + w[1] * (x2 * x3) / (x1 * (x2 - x1) * (x3 - x1))
        + w[2] * (x1 * x3) / (x2 * (x1 - x2) * (x3 - x2))
        + w[3] * (x1 * x2) / (x3 * (x1 - x3) * (x2 - x3));
    Ok(RadialSolution { r, w, eps, iterations, residual: rnorm, slope_at_center: slope })
}

struct Radial<'a> {
    coeffs: &'a CoefficientFamily,
    r: &'a [f64],
    face: Vec<f64>,
    dr: Vec<f64>,
    vol_left: Vec<f64>,
    vol_right: Vec<f64>,
}

impl<'a> Radial<'a> {
    fn new(coeffs: &'a CoefficientFamily, r: &'a [f64]) -> Self {
        let n = r.len() - 1;
        let face: Vec<f64> = (0..n).map(|k| 0.5 * (r[k] + r[k + 1])).collect();
        let dr: Vec<f64> = (0..n).map(|k| r[k + 1] - r[k]).collect();
        let vol_left = (0..n).map(|i| if i == 0 { 0.0 } else { 0.5 * (r[i] * r[i] - face[i - 1] * face[i - 1]) }).collect();
        let vol_right = (0..n).map(|i| 0.5 * (face[i] * face[i] - r[i] * r[i])).collect();
        Radial { coeffs, r, face, dr, vol_left, vol_right }
    }

    fn slopes(&self, w: &[f64]) -> Vec<f64> {
        (0..self.dr.len()).map(|k| (w[k + 1] - w[k]) / self.dr[k]).collect()
    }

    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let n = self.r.len() - 1;
        let d = self.slopes(w);
        let flux = |k: usize| self.face[k] * self.coeffs.a(d[k]) * d[k];
        (0..n)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { flux(i - 1) };
                let mut src = self.vol_right[i] * self.coeffs.f(d[i]);
                if i > 0 {
                    src += self.vol_left[i] * self.coeffs.f(d[i - 1]);
                }
                flux(i) - left + src / w[i]
            })
            .collect()
    }

    /// Sub-, main and super-diagonals of the Jacobian.
    fn jacobian(&self, w: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.r.len() - 1;
        let d = self.slopes(w);
        let c = self.coeffs;
        // dq_k/dw_{k+1} = -dq_k/dw_k.
        let dq: Vec<f64> = (0..n).map(|k| self.face[k] * c.db(d[k]) / self.dr[k]).collect();
        let (mut lo, mut di, mut up) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let wi = w[i];
            let mut src = self.vol_right[i] * c.f(d[i]);
            di[i] += -dq[i] - self.vol_right[i] * c.df(d[i]) / self.dr[i] / wi;
            if i + 1 < n {
                up[i] = dq[i] + self.vol_right[i] * c.df(d[i]) / self.dr[i] / wi;
            }
            if i > 0 {
                src += self.vol_left[i] * c.f(d[i - 1]);
                lo[i] = dq[i - 1] - self.vol_left[i] * c.df(d[i - 1]) / self.dr[i - 1] / wi;
                di[i] += -dq[i - 1] + self.vol_left[i] * c.df(d[i - 1]) / self.dr[i - 1] / wi;
            }
            di[i] -= src / (wi * wi);
        }
        (lo, di, up)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Tridiagonal solve without pivoting.
fn thomas(lo: &[f64], di: &[f64], up: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = di.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = di[0];
    for i in 0..n {
        if i > 0 {
            piv = di[i] - lo[i] * c[i - 1];
        }
        if piv.abs() < 1e-300 || !piv.is_finite() {
            return Err(Error::LinearSolve(format!("zero pivot in tridiagonal solve at row {i}")));
        }
        c[i] = up[i] / piv;
        d[i] = (rhs[i] - if i > 0 { lo[i] * d[i - 1] } else { 0.0 }) / piv;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves() {
        let lo = [0.0, -1.0, -1.0];
        let di = [2.0, 2.0, 2.0];
        let up = [-1.0, -1.0, 0.0];
        let x = thomas(&lo, &di, &up, &[1.0, 0.0, 1.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let c = CoefficientFamily::chaplygin();
        let r: Vec<f64> = (0..=200).map(|i| 1.0 - (1.0 - i as f64 / 200.0).powi(2)).collect();
        let sys = Radial::new(&c, &r);
        let w: Vec<f64> = r.iter().map(|&x| 0.01 + (1.0 - x * x).sqrt()).collect();
        let (lo, di, up) = sys.jacobian(&w);
        for j in [0, 1, 100, 199] {
            let h = 1e-6 * w[j];
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[j] += h;
            wm[j] -= h;
            let (rp, rm) = (sys.residual(&wp), sys.residual(&wm));
            let fd = |i: usize| (rp[i] - rm[i]) / (2.0 * h);
            let close = |a: f64, b: f64| (a - b).abs() < 1e-6 * b.abs().max(1.0);
            assert!(close(fd(j), di[j]));
            if j > 0 {
                assert!(close(fd(j - 1), up[j - 1]));
            }
            if j + 1 < 200 {
                assert!(close(fd(j + 1), lo[j + 1]), "{j}: {} vs {}", fd(j + 1), lo[j + 1]);
            }
        }
    }

    #[test]
    fn chaplygin_disk() {
        let sol = radial_solve_disk(&CoefficientFamily::chaplygin(), 2000, 1e-6).unwrap();
        let err = sol.sup_error(|r| (1.0 - r * r).sqrt(), 0.99);
        assert!(err <= 1e-4, "sup error {err}");
        assert!((sol.w[0] - 1.0).abs() <= 1e-4);
        assert!(sol.slope_at_center.abs() <= 1e-8, "w'(0) = {}", sol.slope_at_center);
        assert!(sol.residual <= 1e-10);
    }
}
