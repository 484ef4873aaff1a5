use serde::Serialize;

use super::mesh::Mesh;
use super::sparse::{minimum_degree, CsrMatrix, SymbolicLu};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::profile::CoefficientFamily;

/// Coefficients of the relaxed equation `div(ā(|∇w|)∇w) + g_ε(w)F(|∇w|) = 0`.
///
/// `ā = a` on `[0, R]`; beyond it `ā(r) = a(R) + a'(R)ψ(r − R)` with
/// `ψ(u) = u − u²/2` on `[0, 1]` and `1/2` after, so `ā` is C¹ and constant
/// beyond `1 + R`. `g_ε(w) = 1/w` for `w ≥ ε`, continued linearly below.
#[derive(Clone, Debug)]
pub struct ModifiedCoefficients {
    base: CoefficientFamily,
    cap: f64,
    eps: f64,
    a_cap: f64,
    da_cap: f64,
}

impl ModifiedCoefficients {
    pub fn new(base: &CoefficientFamily, cap: f64, eps: f64) -> Result<Self> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::Config(format!("gradient cap must be positive and finite, got {cap}")));
        }
        if !(eps > 0.0) {
            return Err(Error::Range { value: eps, lo: 0.0, hi: f64::INFINITY });
        }
        let m = ModifiedCoefficients { base: base.clone(), cap, eps, a_cap: base.a(cap), da_cap: base.da(cap) };
        m.check(256)?;
        Ok(m)
    }

    pub fn base(&self) -> &CoefficientFamily {
        &self.base
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `ā(r)` for `r ≥ 0`.
    pub fn abar(&self, r: f64) -> f64 {
        if r <= self.cap {
            self.base.a(r)
        } else {
            let u = (r - self.cap).min(1.0);
            self.a_cap + self.da_cap * (u - 0.5 * u * u)
        }
    }

    pub fn dabar(&self, r: f64) -> f64 {
        if r <= self.cap {
            self.base.da(r)
        } else {
            self.da_cap * (1.0 - (r - self.cap).min(1.0))
        }
    }

    pub fn g(&self, w: f64) -> f64 {
        if w >= self.eps {
            1.0 / w
        } else {
            1.0 / self.eps + (self.eps - w) / (self.eps * self.eps)
        }
    }

    pub fn dg(&self, w: f64) -> f64 {
        if w >= self.eps {
            -1.0 / (w * w)
        } else {
            -1.0 / (self.eps * self.eps)
        }
    }

    /// Checks `ā > 0` and that `r ā(r)` does not decrease on a grid reaching past the
    /// constant region.
    pub fn check(&self, n: usize) -> Result<()> {
        let top = 2.0 * (self.cap + 1.0);
        let mut last = 0.0;
        for k in 1..=n {
            let r = top * k as f64 / n as f64;
            let a = self.abar(r);
            if !(a > 0.0) {
                return Err(Error::Ellipticity { r, detail: format!("capped coefficient {a} is not positive") });
            }
            // b(r) saturates at large r, so allow rounding-level ties.
            if r * a < last * (1.0 - 8.0 * f64::EPSILON) {
                return Err(Error::Ellipticity { r, detail: "r * capped coefficient is not increasing".into() });
            }
            last = r * a;
        }
        Ok(())
    }
}

/// Element data and the interior-unknown numbering of a mesh.
#[derive(Clone, Debug)]
pub(crate) struct Assembly {
    pub grads: Vec<[Point; 3]>,
    pub areas: Vec<f64>,
    /// Node → unknown index for interior nodes.
    pub unknown: Vec<Option<usize>>,
    pub interior: Vec<usize>,
    pub pattern: CsrMatrix,
    pub symbolic: SymbolicLu,
}

impl Assembly {
    pub fn new(mesh: &Mesh) -> Self {
        let mut grads = Vec::with_capacity(mesh.num_triangles());
        let mut areas = Vec::with_capacity(mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            let (g, a) = mesh.shape_gradients(t);
            grads.push(g);
            areas.push(a);
        }
        let mut unknown = vec![None; mesh.num_nodes()];
        let mut interior = Vec::new();
        for i in 0..mesh.num_nodes() {
            if !mesh.is_boundary(i) {
                unknown[i] = Some(interior.len());
                interior.push(i);
            }
        }
        let mut adj = vec![Vec::new(); interior.len()];
        for tri in mesh.triangles() {
            for &a in tri {
                for &b in tri {
                    if let (Some(ua), Some(ub)) = (unknown[a], unknown[b]) {
                        if ua != ub {
                            adj[ua].push(ub);
                        }
                    }
                }
            }
        }
        adj.iter_mut().for_each(|r| {
            r.sort_unstable();
            r.dedup();
        });
        let pattern = CsrMatrix::from_adjacency(&adj);
        let symbolic = SymbolicLu::analyze(&pattern, &minimum_degree(&adj));
        Assembly { grads, areas, unknown, interior, pattern, symbolic }
    }

    pub fn gradient(&self, mesh: &Mesh, t: usize, w: &[f64]) -> Point {
        let tri = mesh.triangles()[t];
        let g = &self.grads[t];
        g[0] * w[tri[0]] + g[1] * w[tri[1]] + g[2] * w[tri[2]]
    }

    /// Nodal weak residual `∫ ā∇w·∇φ_i − ∫ g(w)F φ_i` (edge-midpoint
    /// quadrature on the second term) for every node, boundary included.
    pub fn residual(&self, mesh: &Mesh, c: &ModifiedCoefficients, w: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; mesh.num_nodes()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let gw = self.gradient(mesh, t, w);
            let s = gw.norm();
            let (a, f) = (c.abar(s), c.base().f(s));
            let area = self.areas[t];
            let load = midpoint_load(tri.map(|i| w[i]), |v| c.g(v));
            for k in 0..3 {
                r[tri[k]] += area * (a * gw.dot(self.grads[t][k]) - f * load[k]);
            }
        }
        r
    }

    /// Residual with the unmodified `a` and `1/w`.
    pub fn plain_residual(&self, mesh: &Mesh, coeffs: &CoefficientFamily, w: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; mesh.num_nodes()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let gw = self.gradient(mesh, t, w);
            let s = gw.norm();
            let (a, f) = (coeffs.a(s), coeffs.f(s));
            let area = self.areas[t];
            let load = midpoint_load(tri.map(|i| w[i]), |v| 1.0 / v);
            for k in 0..3 {
                r[tri[k]] += area * (a * gw.dot(self.grads[t][k]) - f * load[k]);
            }
        }
        r
    }

    /// Interior rows of `residual` in unknown order.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&i| full[i]).collect()
    }

    /// Matrix and load of the frozen-coefficient map `T`:
    /// `∫ ā(|∇w|)∇z·∇φ_i = ∫ g(w)F(|∇w|)φ_i`, `z = ε` on `∂Ω`.
    pub fn picard_system(&self, mesh: &Mesh, c: &ModifiedCoefficients, w: &[f64], bc: f64) -> (CsrMatrix, Vec<f64>) {
        let mut k = self.pattern.clone();
        k.clear();
        let mut rhs = vec![0.0; self.interior.len()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let gw = self.gradient(mesh, t, w);
            let s = gw.norm();
            let (a, f) = (c.abar(s), c.base().f(s));
            let area = self.areas[t];
            let g = &self.grads[t];
            let load = midpoint_load(tri.map(|i| w[i]), |v| c.g(v));
            for p in 0..3 {
                let Some(ui) = self.unknown[tri[p]] else { continue };
                rhs[ui] += area * f * load[p];
                for q in 0..3 {
                    let v = area * a * g[p].dot(g[q]);
                    match self.unknown[tri[q]] {
                        Some(uj) => k.add(ui, uj, v),
                        None => rhs[ui] -= v * bc,
                    }
                }
            }
        }
        (k, rhs)
    }

    /// Jacobian of the interior residual with respect to interior values.
    pub fn jacobian(&self, mesh: &Mesh, c: &ModifiedCoefficients, w: &[f64]) -> CsrMatrix {
        let mut j = self.pattern.clone();
        j.clear();
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let gw = self.gradient(mesh, t, w);
            let s = gw.norm();
            let (a, f) = (c.abar(s), c.base().f(s));
            let (da_over_s, df_over_s) = if s > 0.0 { (c.dabar(s) / s, c.base().df(s) / s) } else { (0.0, 0.0) };
            let area = self.areas[t];
            let g = &self.grads[t];
            let wt = tri.map(|i| w[i]);
            let load = midpoint_load(wt, |v| c.g(v));
            for p in 0..3 {
                let Some(ui) = self.unknown[tri[p]] else { continue };
                let gi = gw.dot(g[p]);
                let (p1, p2) = ((p + 1) % 3, (p + 2) % 3);
                let dg1 = c.dg(0.5 * (wt[p] + wt[p1])) / 12.0;
                let dg2 = c.dg(0.5 * (wt[p] + wt[p2])) / 12.0;
                for q in 0..3 {
                    let Some(uj) = self.unknown[tri[q]] else { continue };
                    let gj = gw.dot(g[q]);
                    let mut v = a * g[p].dot(g[q]) + da_over_s * gi * gj;
                    v -= load[p] * df_over_s * gj;
                    let dload = if q == p { dg1 + dg2 } else if q == p1 { dg1 } else { dg2 };
                    v -= f * dload;
                    j.add(ui, uj, area * v);
                }
            }
        }
        j
    }
}

/// `∫ g(w) φ_k / |T|` for each vertex `k` by the edge-midpoint rule, where
/// `φ_k` is one half at the two adjacent midpoints.
fn midpoint_load(w: [f64; 3], g: impl Fn(f64) -> f64) -> [f64; 3] {
    let m = [g(0.5 * (w[0] + w[1])), g(0.5 * (w[1] + w[2])), g(0.5 * (w[2] + w[0]))];
    [(m[0] + m[2]) / 6.0, (m[0] + m[1]) / 6.0, (m[1] + m[2]) / 6.0]
}

/// Per-triangle gradient magnitudes of a nodal field.
pub fn triangle_gradients(mesh: &Mesh, w: &[f64]) -> Vec<f64> {
    (0..mesh.num_triangles())
        .map(|t| {
            let (g, _) = mesh.shape_gradients(t);
            let tri = mesh.triangles()[t];
            (g[0] * w[tri[0]] + g[1] * w[tri[1]] + g[2] * w[tri[2]]).norm()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Picard,
    Newton,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IterationRecord {
    pub kind: StepKind,
    /// Sup norm of the nodal update.
    pub update: f64,
    pub residual: f64,
    /// Line-search step length; one for Picard steps.
    pub step: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexDomain;
    use crate::solver::mesh::mesh_domain;

    #[test]
    fn capped_coefficient_contract() {
        let c = CoefficientFamily::chaplygin();
        for cap in [0.1, 1.0, 10.0, 1e4] {
            let m = ModifiedCoefficients::new(&c, cap, 0.01).unwrap();
            assert_eq!(m.abar(0.5 * cap), c.a(0.5 * cap));
            assert_eq!(m.abar(cap + 1.0), m.abar(cap + 7.0));
            // C¹ at the cap.
            let h = 1e-7 * cap.max(1.0);
            let slope = (m.abar(cap + h) - m.abar(cap)) / h;
            assert!((slope - c.da(cap)).abs() < 1e-5 * c.da(cap).abs().max(1e-3));
        }
        let m = ModifiedCoefficients::new(&c, 1.0, 0.01).unwrap();
        assert_eq!(m.g(0.5), 2.0);
        assert_eq!(m.g(0.01), 100.0);
        assert!(m.g(0.005) > m.g(0.01));
        assert!(m.g(0.0) > m.g(0.005));
    }

    #[test]
    fn jacobian_matches_differences() {
        let sq = ConvexDomain::unit_square();
        let mesh = mesh_domain(&sq, 0.2, None).unwrap();
        let asm = Assembly::new(&mesh);
        let c = ModifiedCoefficients::new(&CoefficientFamily::chaplygin(), 3.0, 0.05).unwrap();
        let w: Vec<f64> = mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, p)| if mesh.is_boundary(i) { 0.05 } else { 0.05 + p.x * (1.0 - p.x) + 0.3 * p.y * (1.0 - p.y) })
            .collect();
        let jac = asm.jacobian(&mesh, &c, &w);
        let base = asm.restrict(&asm.residual(&mesh, &c, &w));
        let n = asm.interior.len();
        for uj in [0, n / 2, n - 1] {
            let mut wp = w.clone();
            let h = 1e-7;
            wp[asm.interior[uj]] += h;
            let pert = asm.restrict(&asm.residual(&mesh, &c, &wp));
            for ui in 0..n {
                let fd = (pert[ui] - base[ui]) / h;
                let exact: f64 = jac.row(ui).filter(|&(j, _)| j == uj).map(|(_, v)| v).sum();
                assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "({ui},{uj}): {fd} vs {exact}");
            }
        }
    }
}
