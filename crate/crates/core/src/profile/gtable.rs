use crate::error::{Error, Result};
use crate::quadrature::{integrate, GaussLegendre};

use super::CoefficientFamily;

const PANEL_RTOL: f64 = 1e-13;

/// Tabulated `G(r) = ∫₀ʳ s b'(s)/F(s) ds` with inverse `H = G⁻¹`.
///
/// Nodes are `rᵢ = sinh(i δ)`, dense near zero and geometric for large `r`.
/// Off-node values add a Gauss–Legendre correction from the left node.
#[derive(Clone, Debug)]
pub struct GTable {
    coeffs: CoefficientFamily,
    nodes: Vec<f64>,
    values: Vec<f64>,
    gl: GaussLegendre,
}

/// `s b'(s) / F(s)`.
pub(crate) fn g_rate(coeffs: &CoefficientFamily, s: f64) -> f64 {
    s * coeffs.db(s) / coeffs.f(s)
}

/// `G(r)` with nodes `sinh(i δ)`, `δ = asinh(r_max)/n`.
pub fn build_g(coeffs: &CoefficientFamily, r_max: f64, n: usize) -> Result<GTable> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::Config(format!("r_max must be positive, got {r_max}")));
    }
    if n < 64 {
        return Err(Error::Config(format!("G table needs at least 64 panels, got {n}")));
    }
    let delta = r_max.asinh() / n as f64;
    let mut nodes: Vec<f64> = (0..=n).map(|i| (i as f64 * delta).sinh()).collect();
    nodes[n] = r_max;
    GTable::from_nodes(coeffs, nodes)
}

impl GTable {
    /// Tabulates `G` on the given ascending nodes, which must start at zero.
    pub fn from_nodes(coeffs: &CoefficientFamily, nodes: Vec<f64>) -> Result<Self> {
        if nodes.first() != Some(&0.0) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("G table nodes must start at 0 and increase".into()));
        }
        let f0 = coeffs.f(0.0);
        if !(f0 > 0.0 && f0.is_finite()) {
            return Err(Error::SingularTermVanishes(f0));
        }
        let gl = GaussLegendre::new(20);
        let mut values = Vec::with_capacity(nodes.len());
        values.push(0.0);
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            for k in 0..=4 {
                let s = a + (b - a) * k as f64 / 4.0;
                let db = coeffs.db(s);
                if !(db > 0.0) {
                    return Err(Error::Ellipticity { r: s, detail: format!("b'(r) = {db}; G would not be increasing") });
                }
            }
            let est = integrate(|s| g_rate(coeffs, s), a, b, 0.0, PANEL_RTOL, 400);
            if !est.value.is_finite() || est.value <= 0.0 {
                return Err(Error::Ellipticity { r: a, detail: format!("G increment {} on [{a}, {b}]", est.value) });
            }
            values.push(values.last().unwrap() + est.value);
        }
        Ok(GTable { coeffs: coeffs.clone(), nodes, values, gl })
    }

    pub(crate) fn from_parts(coeffs: &CoefficientFamily, nodes: Vec<f64>, values: Vec<f64>) -> Self {
        GTable { coeffs: coeffs.clone(), nodes, values, gl: GaussLegendre::new(20) }
    }

    pub fn coefficients(&self) -> &CoefficientFamily {
        &self.coeffs
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn g_max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `G'(r) = r b'(r)/F(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        g_rate(&self.coeffs, r.abs()) * r.signum()
    }

    /// `G(r)` for `|r| ≤ r_max` (`G` is even).
    pub fn eval(&self, r: f64) -> Result<f64> {
        let r = r.abs();
        if r > self.r_max() {
            return Err(Error::OutOfRange { value: r, required_r_max: r });
        }
        let i = self.nodes.partition_point(|&x| x <= r).saturating_sub(1).min(self.nodes.len() - 2);
        Ok(self.values[i] + self.panel_partial(i, r))
    }

    fn panel_partial(&self, i: usize, r: f64) -> f64 {
        let a = self.nodes[i];
        if r == a {
            return 0.0;
        }
        let b = self.nodes[i + 1];
        // A full-panel GL rule is essentially exact for smooth rates; split the
        // panel otherwise.
        let pieces = if r - a > 0.5 * (b - a) { 2 } else { 1 };
        let h = (r - a) / pieces as f64;
        (0..pieces)
            .map(|k| {
                let lo = a + k as f64 * h;
                self.gl.integrate(|s| g_rate(&self.coeffs, s), lo, lo + h)
            })
            .sum()
    }

    /// `H(y) = G⁻¹(y)` for `0 ≤ y ≤ G(r_max)`.
    pub fn eval_h(&self, y: f64) -> Result<f64> {
        if y < 0.0 || y.is_nan() {
            return Err(Error::Range { value: y, lo: 0.0, hi: self.g_max() });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        if y > self.g_max() {
            return Err(Error::OutOfRange { value: y, required_r_max: self.required_r_max(y) });
        }
        let i = self.values.partition_point(|&g| g <= y).saturating_sub(1).min(self.nodes.len() - 2);
        let (mut lo, mut hi) = (self.nodes[i], self.nodes[i + 1]);
        let (g_lo, g_hi) = (self.values[i], self.values[i + 1]);
        if y == g_lo {
            return Ok(lo);
        }
        let mut r = lo + (hi - lo) * (y - g_lo) / (g_hi - g_lo);
        for _ in 0..100 {
            let resid = self.values[i] + self.panel_partial(i, r) - y;
            if resid == 0.0 {
                break;
            }
            if resid > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let slope = g_rate(&self.coeffs, r);
            let mut next = r - resid / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 4.0 * f64::EPSILON * r.max(f64::MIN_POSITIVE) {
                r = next;
                break;
            }
            r = next;
        }
        Ok(r)
    }

    /// Smallest doubling of `r_max` whose `G` reaches `y`.
    fn required_r_max(&self, y: f64) -> f64 {
        let mut r = self.r_max();
        let mut g = self.g_max();
        while g < y && r < 1e300 {
            let next = 2.0 * r;
            g += integrate(|s| g_rate(&self.coeffs, s), r, next, 0.0, 1e-10, 200).value;
            r = next;
        }
        if g >= y { r } else { f64::INFINITY }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn chaplygin_closed_form() {
        let c = CoefficientFamily::chaplygin();
        let t = build_g(&c, 5.0, 256).unwrap();
        assert_eq!(t.eval(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(t.eval(1.0).unwrap(), 0.25 * 2f64.ln(), epsilon = 1e-12);
        for k in 0..=500 {
            let r = 5.0 * k as f64 / 500.0;
            assert_abs_diff_eq!(t.eval(r).unwrap(), 0.25 * (r * r).ln_1p(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(t.eval_h(0.25 * 2f64.ln()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_closed_form() {
        let c = CoefficientFamily::unit();
        let t = build_g(&c, 4.0, 64).unwrap();
        assert_abs_diff_eq!(t.eval(2.0).unwrap(), 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(t.eval_h(2.0).unwrap(), 2.0, epsilon = 1e-13);
        assert_eq!(t.eval_h(0.0).unwrap(), 0.0);
    }

    #[test]
    fn interpolation_against_refined_quadrature() {
        let c = CoefficientFamily::minimal_surface(|r| 1.0 + 0.5 * r * r / (1.0 + r * r));
        let t = build_g(&c, 20.0, 64).unwrap();
        let nodes = t.nodes().to_vec();
        for w in nodes.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let exact = integrate(|s| g_rate(&c, s), 0.0, mid, 0.0, 1e-14, 2000).value;
            assert!((t.eval(mid).unwrap() - exact).abs() <= 1e-10 * exact.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn inverse_round_trip_and_range() {
        let c = CoefficientFamily::chaplygin();
        let t = build_g(&c, 1e6, 512).unwrap();
        let mut last = 0.0;
        for k in 1..200 {
            let y = t.g_max() * k as f64 / 200.0;
            let r = t.eval_h(y).unwrap();
            assert!(r > last);
            last = r;
            assert!((t.eval(r).unwrap() - y).abs() <= 1e-10);
        }
        match t.eval_h(t.g_max() + 1.0) {
            Err(Error::OutOfRange { required_r_max, .. }) => {
                assert!(0.25 * (required_r_max * required_r_max).ln_1p() >= t.g_max() + 1.0);
            }
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(matches!(t.eval(2e6), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn rejects_nonmonotone_g() {
        let bad = CoefficientFamily::new("bad", |r| 1.0 / (1.0 + r * r), |_| 1.0);
        assert!(matches!(build_g(&bad, 10.0, 64), Err(Error::Ellipticity { .. })));
    }
}
