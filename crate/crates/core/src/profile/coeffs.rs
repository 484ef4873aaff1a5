use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::integrate;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Spacing of the fourth-order central differences used when a derivative
/// has no registered closed form.
pub const FD_STEP: f64 = 1e-5;

/// The coefficient pair `(a, F)` of `div(a(|∇w|)∇w) + F(|∇w|)/w = 0`.
///
/// Both functions are even; they are evaluated at `|r|`.
#[derive(Clone)]
pub struct CoefficientFamily {
    name: String,
    a: ScalarFn,
    f: ScalarFn,
    da: Option<ScalarFn>,
    df: Option<ScalarFn>,
    db: Option<ScalarFn>,
    g_closed: Option<ScalarFn>,
}

impl fmt::Debug for CoefficientFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientFamily").field("name", &self.name).finish_non_exhaustive()
    }
}

impl CoefficientFamily {
    pub fn new(
        name: impl Into<String>,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CoefficientFamily { name: name.into(), a: Arc::new(a), f: Arc::new(f), da: None, df: None, db: None, g_closed: None }
    }

    /// Registers closed-form derivatives `a'` and `F'` on `r ≥ 0`.
    pub fn with_derivatives(
        mut self,
        da: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.da = Some(Arc::new(da));
        self.df = Some(Arc::new(df));
        self
    }

    /// Registers a closed-form `G`, used only for validation.
    pub fn with_closed_form_g(mut self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.g_closed = Some(Arc::new(g));
        self
    }

    /// `a(r) = (1+r²)^{-1/2}`, `F = 2a`.
    pub fn chaplygin() -> Self {
        Self::minimal_surface_scaled(2.0).renamed("chaplygin")
    }

    /// `a ≡ 1`, `F ≡ 1`: the equation `Δw + 1/w = 0`.
    pub fn unit() -> Self {
        Self::new("unit", |_| 1.0, |_| 1.0)
            .with_derivatives(|_| 0.0, |_| 0.0)
            .with_closed_form_g(|r| 0.5 * r * r)
    }

    /// Minimal-surface principal part `a(r) = (1+r²)^{-1/2}` with a
    /// user-supplied lower-order coefficient.
    pub fn minimal_surface(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new("minimal-surface", minimal_a, f).with_a_derivative(minimal_da).with_b_derivative(minimal_db)
    }

    /// Minimal-surface principal part with `F = k·a`.
    pub fn minimal_surface_scaled(k: f64) -> Self {
        Self::new("minimal-surface", minimal_a, move |r| k * minimal_a(r))
            .with_derivatives(minimal_da, move |r| k * minimal_da(r))
            .with_b_derivative(minimal_db)
            .with_closed_form_g(move |r| (0.5 / k) * (r * r).ln_1p())
    }

    /// Pair of piecewise polynomials in `|r|`.
    pub fn piecewise(a: PiecewisePolynomial, f: PiecewisePolynomial) -> Self {
        let (da, df) = (a.derivative(), f.derivative());
        Self::new("piecewise", move |r| a.eval(r), move |r| f.eval(r))
            .with_derivatives(move |r| da.eval(r), move |r| df.eval(r))
    }

    /// Built-in family by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "chaplygin" => Ok(Self::chaplygin()),
            "unit" | "laplacian-inverse" => Ok(Self::unit()),
            "minimal-surface" => Ok(Self::minimal_surface_scaled(2.0)),
            other => Err(Error::Config(format!(
                "unknown coefficient family '{other}' (expected chaplygin, unit or minimal-surface)"
            ))),
        }
    }

    /// Registers a closed form of `b' = a + r a'`, which otherwise cancels
    /// badly when `a` decays like `1/r`.
    pub fn with_b_derivative(mut self, db: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.db = Some(Arc::new(db));
        self
    }

    fn with_a_derivative(mut self, da: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.da = Some(Arc::new(da));
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn a(&self, r: f64) -> f64 {
        (self.a)(r.abs())
    }

    pub fn f(&self, r: f64) -> f64 {
        (self.f)(r.abs())
    }

    /// `a'(r)`, odd in `r`.
    pub fn da(&self, r: f64) -> f64 {
        let d = match &self.da {
            Some(da) => da(r.abs()),
            None => central_difference(&*self.a, r.abs()),
        };
        if r < 0.0 { -d } else { d }
    }

    /// `F'(r)`, odd in `r`.
    pub fn df(&self, r: f64) -> f64 {
        let d = match &self.df {
            Some(df) => df(r.abs()),
            None => central_difference(&*self.f, r.abs()),
        };
        if r < 0.0 { -d } else { d }
    }

    /// `b(r) = r a(r)`.
    pub fn b(&self, r: f64) -> f64 {
        r * self.a(r)
    }

    /// `b'(r) = a(r) + r a'(r)`.
    pub fn db(&self, r: f64) -> f64 {
        match &self.db {
            Some(db) => db(r.abs()),
            None => self.a(r) + r * self.da(r),
        }
    }

    pub fn closed_form_g(&self, r: f64) -> Option<f64> {
        self.g_closed.as_ref().map(|g| g(r.abs()))
    }

    /// Checks `a > 0`, `b' > 0` and `F ≥ 0` on a grid of `[0, r_max]`, and `F(0) > 0`.
    pub fn validate(&self, r_max: f64, n: usize) -> Result<()> {
        let f0 = self.f(0.0);
        if !(f0 > 0.0 && f0.is_finite()) {
            return Err(Error::SingularTermVanishes(f0));
        }
        let n = n.max(2);
        for i in 0..=n {
            let s = i as f64 / n as f64;
            let r = r_max * s * s;
            let (a, db, f) = (self.a(r), self.db(r), self.f(r));
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Ellipticity { r, detail: format!("a(r) = {a} is not positive") });
            }
            if !(db > 0.0 && db.is_finite()) {
                return Err(Error::Ellipticity { r, detail: format!("b'(r) = a + r a' = {db} is not positive") });
            }
            if !(f >= 0.0 && f.is_finite()) {
                return Err(Error::Ellipticity { r, detail: format!("F(r) = {f} is negative or not finite") });
            }
        }
        Ok(())
    }

    /// Integrals of `e^{-G} b'/F` over the doubling panels `[2^k, 2^{k+1}]`.
    ///
    /// Convergence of the improper integral shows up as panel ratios that
    /// settle below one.
    pub fn tail_diagnostic(&self, panels: usize) -> TailDiagnostic {
        let g_rate = |s: f64| s * self.db(s) / self.f(s);
        let tail = |s: f64| self.db(s) / self.f(s);
        let mut g = integrate(g_rate, 0.0, 1.0, 0.0, 1e-13, 200).value;
        let mut out = Vec::with_capacity(panels);
        for k in 0..panels {
            let lo = (k as f64).exp2();
            let hi = 2.0 * lo;
            let g0 = g;
            let inner = |rho: f64| {
                let dg = integrate(g_rate, lo, rho, 0.0, 1e-12, 100).value;
                (-(g0 + dg)).exp() * tail(rho)
            };
            let value = integrate(inner, lo, hi, 0.0, 1e-10, 100).value;
            g += integrate(g_rate, lo, hi, 0.0, 1e-13, 200).value;
            out.push(TailPanel { r: lo, integral: value });
        }
        TailDiagnostic::from_panels(out)
    }
}

fn minimal_a(r: f64) -> f64 {
    1.0 / r.mul_add(r, 1.0).sqrt()
}

fn minimal_da(r: f64) -> f64 {
    -r / r.mul_add(r, 1.0).powf(1.5)
}

fn minimal_db(r: f64) -> f64 {
    r.mul_add(r, 1.0).powf(-1.5)
}

fn central_difference(f: &(dyn Fn(f64) -> f64 + Send + Sync), r: f64) -> f64 {
    let h = FD_STEP * r.max(1.0);
    // The function is even, so evaluating at |r ± k h| is exact near 0.
    let e = |x: f64| f(x.abs());
    (-e(r + 2.0 * h) + 8.0 * e(r + h) - 8.0 * e(r - h) + e(r - 2.0 * h)) / (12.0 * h)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailPanel {
    pub r: f64,
    pub integral: f64,
}

/// Doubling-panel evidence for the convergence of `∫^∞ e^{-G} b'/F`.
#[derive(Clone, Debug, Serialize)]
pub struct TailDiagnostic {
    pub panels: Vec<TailPanel>,
    /// `I_{k+1} / I_k`; zero once both panels underflow.
    pub ratios: Vec<f64>,
    pub converging: bool,
}

impl TailDiagnostic {
    fn from_panels(panels: Vec<TailPanel>) -> Self {
        let ratios: Vec<f64> = panels
            .windows(2)
            .map(|w| if w[0].integral > 0.0 { w[1].integral / w[0].integral } else { 0.0 })
            .collect();
        let tail = &ratios[ratios.len().saturating_sub(4)..];
        let converging = !tail.is_empty() && tail.iter().all(|&q| q < 0.95);
        TailDiagnostic { panels, ratios, converging }
    }

    pub fn last_ratio(&self) -> f64 {
        self.ratios.last().copied().unwrap_or(0.0)
    }
}

/// Piecewise polynomial on `[0, ∞)`. Piece `i` applies on
/// `[breaks[i], breaks[i+1])` and is expanded about `breaks[i]`; the last
/// piece extends to infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() != coeffs.len() {
            return Err(Error::Config("piecewise polynomial needs one coefficient list per break".into()));
        }
        if breaks[0] != 0.0 || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("breaks must start at 0 and increase strictly".into()));
        }
        Ok(PiecewisePolynomial { breaks, coeffs })
    }

    pub fn constant(c: f64) -> Self {
        PiecewisePolynomial { breaks: vec![0.0], coeffs: vec![vec![c]] }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let i = self.breaks.partition_point(|&b| b <= r).saturating_sub(1);
        let x = r - self.breaks[i];
        self.coeffs[i].iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.iter().enumerate().skip(1).map(|(k, &v)| k as f64 * v).collect())
            .collect();
        PiecewisePolynomial { breaks: self.breaks.clone(), coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn chaplygin_values() {
        let c = CoefficientFamily::chaplygin();
        assert_abs_diff_eq!(c.a(1.0), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.f(-1.0), 2.0 * 0.5f64.sqrt(), epsilon = 1e-15);
        // b' = (1+r²)^{-3/2}
        assert_abs_diff_eq!(c.db(2.0), 5f64.powf(-1.5), epsilon = 1e-15);
        assert_abs_diff_eq!(c.closed_form_g(1.0).unwrap(), 0.25 * 2f64.ln(), epsilon = 1e-15);
        assert!(c.validate(100.0, 1000).is_ok());
    }

    #[test]
    fn finite_difference_derivative() {
        let c = CoefficientFamily::minimal_surface(|r| 1.0 + r * r);
        for r in [0.0, 0.3, 1.0, 7.0] {
            assert_abs_diff_eq!(c.df(r), 2.0 * r, epsilon = 1e-9);
        }
        let plain = CoefficientFamily::new("plain", |r| (1.0 + r * r).powf(-0.5), |_| 1.0);
        for r in [0.1, 0.5, 2.0, 30.0] {
            assert_abs_diff_eq!(plain.da(r), minimal_da(r), epsilon = 1e-10);
        }
        assert_eq!(plain.da(0.0), 0.0);
        assert!(plain.da(-1.0) > 0.0);
    }

    #[test]
    fn validation_errors() {
        let bad_f = CoefficientFamily::new("bad", |_| 1.0, |r| r);
        assert!(matches!(bad_f.validate(10.0, 10), Err(Error::SingularTermVanishes(_))));
        // b(r) = r(1+r²)^{-1} has b' < 0 for r > 1.
        let bad_a = CoefficientFamily::new("bad", |r| 1.0 / (1.0 + r * r), |_| 1.0);
        assert!(matches!(bad_a.validate(10.0, 100), Err(Error::Ellipticity { .. })));
    }

    #[test]
    fn chaplygin_tail_ratio() {
        let diag = CoefficientFamily::chaplygin().tail_diagnostic(30);
        assert!(diag.converging);
        assert_abs_diff_eq!(diag.last_ratio(), 2f64.powf(-1.5), epsilon = 1e-3);
        let unit = CoefficientFamily::unit().tail_diagnostic(12);
        assert!(unit.converging);
    }

    #[test]
    fn stalled_ratios_are_flagged() {
        let panels = (0..8).map(|k| TailPanel { r: (k as f64).exp2(), integral: 1.0 }).collect();
        let diag = TailDiagnostic::from_panels(panels);
        assert!(!diag.converging);
        assert_eq!(diag.last_ratio(), 1.0);
    }

    #[test]
    fn piecewise_eval() {
        let p = PiecewisePolynomial::new(vec![0.0, 1.0], vec![vec![1.0, 2.0], vec![3.0, 0.0, 1.0]]).unwrap();
        assert_eq!(p.eval(0.5), 2.0);
        assert_eq!(p.eval(-0.5), 2.0);
        assert_eq!(p.eval(3.0), 7.0);
        assert_eq!(p.derivative().eval(3.0), 4.0);
        let fam = CoefficientFamily::piecewise(PiecewisePolynomial::constant(1.0), PiecewisePolynomial::constant(1.0));
        assert!(fam.validate(10.0, 10).is_ok());
    }
}
