use crate::error::{Error, Result};
use crate::geometry::{ConvexDomain, Direction, Point};

use super::{CoefficientFamily, Profile1D};

/// Uniform directions added to the face normals by default.
pub const DEFAULT_DIRECTIONS: usize = 128;

/// Slabs `α₋(ν) < x·ν < α₊(ν)` for every face normal plus `n_dirs`
/// uniform angles in `[0, π)`.
#[derive(Clone, Debug)]
pub struct SlabFamily {
    dirs: Vec<Direction>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SlabFamily {
    pub fn new(domain: &ConvexDomain, n_dirs: usize) -> Self {
        let mut dirs: Vec<Direction> = domain.face_normals().to_vec();
        dirs.extend((0..n_dirs).map(|k| Direction::from_angle(std::f64::consts::PI * k as f64 / n_dirs as f64)));
        let (lo, hi) = dirs.iter().map(|&nu| domain.slab(nu)).unzip();
        SlabFamily { dirs, lo, hi }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn direction(&self, i: usize) -> Direction {
        self.dirs[i]
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.lo[i], self.hi[i])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn min_width(&self) -> f64 {
        (0..self.len()).map(|i| self.width(i)).fold(f64::INFINITY, f64::min)
    }
}

/// `w₊(x) = min_ν L_ν W((x·ν − α₋(ν))/L_ν)` with `L_ν` the slab width.
#[derive(Clone, Debug)]
pub struct UpperBarrier<'a> {
    prof: &'a Profile1D,
    slabs: SlabFamily,
}

impl<'a> UpperBarrier<'a> {
    pub fn new(domain: &ConvexDomain, prof: &'a Profile1D, n_dirs: usize) -> Self {
        UpperBarrier { prof, slabs: SlabFamily::new(domain, n_dirs) }
    }

    pub fn slabs(&self) -> &SlabFamily {
        &self.slabs
    }

    pub fn eval(&self, x: Point) -> f64 {
        // W is concave, so L·W(τ) ≥ 2·max W·(distance to the nearer slab face);
        // slabs whose bound already exceeds the running minimum are skipped.
        let two_wmax = 2.0 * self.prof.max_value();
        let mut best = f64::INFINITY;
        for i in 0..self.slabs.len() {
            let (lo, hi) = self.slabs.bounds(i);
            let xn = self.slabs.direction(i).dot(x);
            let dist = (xn - lo).min(hi - xn);
            if two_wmax * dist >= best {
                continue;
            }
            let l = hi - lo;
            best = best.min(l * self.prof.value((xn - lo) / l));
        }
        best.max(0.0)
    }
}

pub fn upper_barrier(domain: &ConvexDomain, prof: &Profile1D, x: Point, n_dirs: usize) -> f64 {
    UpperBarrier::new(domain, prof, n_dirs).eval(x)
}

/// One relaxed slab barrier `z(x) = λ W((x·ν − α)/λ)`.
#[derive(Clone, Copy, Debug)]
pub struct RelaxedSlab {
    pub dir: Direction,
    pub lambda: f64,
    pub alpha: f64,
    /// Support values `(min, max)` of `x·ν` over the domain.
    pub faces: (f64, f64),
    /// Offset `s` with `λ W(s) = ε`, so `z = ε` on both faces.
    pub s: f64,
    /// `W'(s)`, the largest slope of `z` inside the slab.
    pub slope: f64,
}

/// `w_{+,ε}(x) = min_ν z_{ε,ν}(x)`.
///
/// For a slab of width `L`, `λ = L/(1−2s)` and `α = α₋ − sλ`. The offset
/// solves `L W(s)/(1−2s) = ε`, which makes `z = ε` exactly on both faces.
#[derive(Clone, Debug)]
pub struct RelaxedUpperBarrier<'a> {
    prof: &'a Profile1D,
    eps: f64,
    slabs: Vec<RelaxedSlab>,
    lambda_min: f64,
}

impl<'a> RelaxedUpperBarrier<'a> {
    pub fn new(domain: &ConvexDomain, prof: &'a Profile1D, eps: f64, n_dirs: usize) -> Result<Self> {
        Self::from_slabs(&SlabFamily::new(domain, n_dirs), prof, eps)
    }

    pub fn from_slabs(family: &SlabFamily, prof: &'a Profile1D, eps: f64) -> Result<Self> {
        let limit = prof.max_value() * family.min_width();
        if !(eps > 0.0) {
            return Err(Error::Range { value: eps, lo: 0.0, hi: limit });
        }
        if eps >= limit {
            return Err(Error::EpsilonTooLarge { eps, limit });
        }
        let slabs = (0..family.len())
            .map(|i| {
                let (lo, hi) = family.bounds(i);
                let l = hi - lo;
                let s = relaxed_offset(prof, l, eps);
                let lambda = l / (1.0 - 2.0 * s);
                RelaxedSlab { dir: family.direction(i), lambda, alpha: lo - s * lambda, faces: (lo, hi), s, slope: prof.derivative(s) }
            })
            .collect::<Vec<RelaxedSlab>>();
        let lambda_min = slabs.iter().map(|s| s.lambda).fold(f64::INFINITY, f64::min);
        Ok(RelaxedUpperBarrier { prof, eps, slabs, lambda_min })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn slabs(&self) -> &[RelaxedSlab] {
        &self.slabs
    }

    /// Largest slope of any slab barrier; bounds `|∇w_ε|`.
    pub fn gradient_cap(&self) -> f64 {
        self.slabs.iter().map(|s| s.slope).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.eval_with_argmin(x).0
    }

    /// Value and index of the minimizing slab.
    pub fn eval_with_argmin(&self, x: Point) -> (f64, usize) {
        // Measured from the nearer face so that values near a face keep
        // full relative precision.
        let dists: Vec<f64> = self
            .slabs
            .iter()
            .map(|slab| {
                let xv = slab.dir.dot(x);
                (xv - slab.faces.0).min(slab.faces.1 - xv) + slab.s * slab.lambda
            })
            .collect();
        let z = |i: usize| self.slabs[i].lambda * self.prof.value(dists[i] / self.slabs[i].lambda);
        let mut arg = (0..dists.len()).min_by(|&i, &j| dists[i].total_cmp(&dists[j])).expect("at least one slab");
        let mut best = z(arg);
        // `W(t)/t` decreases, so `λ W(d/λ) ≥ λ_min W(d/λ_min)`, which grows
        // with `d`; slabs beyond the distance where it reaches `best` lose.
        let cutoff = self
            .prof
            .inverse(best / self.lambda_min)
            .map_or(f64::INFINITY, |t| t * self.lambda_min);
        for (i, &d) in dists.iter().enumerate() {
            if i == arg || d >= cutoff {
                continue;
            }
            let v = z(i);
            if v < best {
                best = v;
                arg = i;
            }
        }
        (best, arg)
    }
}

/// Solves `L W(s) = ε (1 − 2s)` for `s ∈ (0, 1/2)`.
fn relaxed_offset(prof: &Profile1D, l: f64, eps: f64) -> f64 {
    let phi = |s: f64| l * prof.value(s) - eps * (1.0 - 2.0 * s);
    let (mut lo, mut hi) = (0.0, 0.5);
    let mut s = prof.inverse((eps / l).min(0.5 * prof.max_value())).unwrap_or(0.25).clamp(lo, hi);
    for _ in 0..200 {
        let f = phi(s);
        if f == 0.0 {
            return s;
        }
        if f > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let df = l * prof.derivative(s) + 2.0 * eps;
        let mut next = s - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 2.0 * f64::EPSILON * s || hi - lo <= 2.0 * f64::EPSILON * s {
            return next;
        }
        s = next;
    }
    s
}

pub fn relaxed_upper_barrier(
    domain: &ConvexDomain,
    prof: &Profile1D,
    eps: f64,
    x: Point,
    n_dirs: usize,
) -> Result<f64> {
    Ok(RelaxedUpperBarrier::new(domain, prof, eps, n_dirs)?.eval(x))
}

/// Largest `ε₀ ≤ 1/2` with `(ε₀²/2)(B + (d−1)A) ≤ min_{[0,ε₀]} F`, where
/// `A = sup a` and `B = max(sup b, sup b')` over `[0, 1]`.
pub fn lower_barrier_eps(coeffs: &CoefficientFamily, d: usize) -> f64 {
    const GRID: usize = 4096;
    let grid = |k: usize| k as f64 / GRID as f64;
    let a_sup = (0..=GRID).map(|k| coeffs.a(grid(k))).fold(0.0, f64::max);
    let b_sup = (0..=GRID).map(|k| coeffs.b(grid(k)).max(coeffs.db(grid(k)))).fold(0.0, f64::max);
    let k = b_sup + (d as f64 - 1.0) * a_sup;
    let f_min = |eps: f64| (0..=256).map(|j| coeffs.f(eps * j as f64 / 256.0)).fold(f64::INFINITY, f64::min);
    let ok = |eps: f64| 0.5 * eps * eps * k <= f_min(eps);
    if ok(0.5) {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `w₋(x) = max Z_{x₀,ρ}(x)` over a finite family of inscribed balls, with
/// `Z_{x₀,ρ}(x) = (ε₀/2)(ρ − |x − x₀|²/ρ)`.
///
/// The family holds the largest ball centered at `x`, the Chebyshev ball,
/// and the largest balls centered at eight stations between `x` and the
/// Chebyshev center.
#[derive(Clone, Debug)]
pub struct LowerBarrier<'a> {
    domain: &'a ConvexDomain,
    eps0: f64,
    center: Point,
    radius: f64,
}

impl<'a> LowerBarrier<'a> {
    pub fn new(domain: &'a ConvexDomain, coeffs: &CoefficientFamily) -> Self {
        Self::with_eps0(domain, lower_barrier_eps(coeffs, 2))
    }

    pub fn with_eps0(domain: &'a ConvexDomain, eps0: f64) -> Self {
        let (center, radius) = domain.chebyshev_center();
        LowerBarrier { domain, eps0, center, radius }
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn eval(&self, x: Point) -> Result<f64> {
        let rho = self.domain.distance_to_boundary(x)?;
        let z = |x0: Point, rho: f64| 0.5 * self.eps0 * (rho - (x - x0).norm_squared() / rho);
        let mut best = z(x, rho);
        best = best.max(z(self.center, self.radius));
        for j in 1..=8 {
            let x0 = x.lerp(self.center, j as f64 / 9.0);
            let r0 = self.domain.signed_distance(x0);
            if r0 > 0.0 {
                best = best.max(z(x0, r0));
            }
        }
        Ok(best)
    }
}

pub fn lower_barrier(domain: &ConvexDomain, coeffs: &CoefficientFamily, x: Point) -> Result<f64> {
    LowerBarrier::new(domain, coeffs).eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::solve_profile_w;
    use approx::assert_abs_diff_eq;

    fn chaplygin() -> (CoefficientFamily, Profile1D) {
        let c = CoefficientFamily::chaplygin();
        let p = solve_profile_w(&c).unwrap();
        (c, p)
    }

    #[test]
    fn upper_barrier_examples() {
        let (_, p) = chaplygin();
        let sq = ConvexDomain::unit_square();
        let v = upper_barrier(&sq, &p, Point::new(0.5, 1e-9), 128);
        assert!(v <= p.value(1e-9) + 1e-12);
        let rect = ConvexDomain::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 100.0)).unwrap();
        assert_abs_diff_eq!(upper_barrier(&rect, &p, Point::new(0.5, 50.0), 128), p.value(0.5), epsilon = 1e-9);
        for k in 0..50 {
            let x = Point::new(k as f64 / 49.0, 0.3);
            assert!(upper_barrier(&sq, &p, x, 32) >= 0.0);
        }
    }

    #[test]
    fn relaxed_barrier_examples() {
        let (_, p) = chaplygin();
        let sq = ConvexDomain::unit_square();
        let eps = 0.01;
        let rb = RelaxedUpperBarrier::new(&sq, &p, eps, 128).unwrap();
        // Boundary of the minimizing slab.
        assert_abs_diff_eq!(rb.eval(Point::new(0.0, 0.5)), eps, epsilon = 1e-14);
        assert_abs_diff_eq!(rb.eval(Point::new(0.3, 1.0)), eps, epsilon = 1e-14);

        // Hand-assembled slab ν = (1, 0): L = 1.
        let s = {
            let (mut lo, mut hi) = (0.0f64, 0.5f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if p.value(mid) / (1.0 - 2.0 * mid) < eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let lambda = 1.0 / (1.0 - 2.0 * s);
        let alpha = -s * lambda;
        let direct = lambda * p.value((0.5 - alpha) / lambda);
        assert_abs_diff_eq!(rb.eval(Point::new(0.5, 0.5)), direct, epsilon = 1e-12);

        // ε → 0 recovers the plain upper barrier.
        let tiny = RelaxedUpperBarrier::new(&sq, &p, 1e-10, 128).unwrap();
        for x in [Point::new(0.5, 0.5), Point::new(0.2, 0.7), Point::new(0.01, 0.5)] {
            assert_abs_diff_eq!(tiny.eval(x), upper_barrier(&sq, &p, x, 128), epsilon = 1e-8);
        }

        assert!(matches!(RelaxedUpperBarrier::new(&sq, &p, p.max_value(), 128), Err(Error::EpsilonTooLarge { .. })));
    }

    #[test]
    fn relaxed_barrier_decreases_with_eps() {
        let (_, p) = chaplygin();
        let dom = ConvexDomain::polygon([(0.0, 0.0), (2.0, 0.0), (1.5, 1.0), (0.2, 0.8)]).unwrap();
        let xs = [Point::new(1.0, 0.4), Point::new(0.3, 0.3), Point::new(1.6, 0.5)];
        let mut last = vec![f64::INFINITY; xs.len()];
        for eps in [0.2, 0.1, 0.05, 0.01, 1e-3, 1e-5] {
            let rb = RelaxedUpperBarrier::new(&dom, &p, eps, 64).unwrap();
            for (i, &x) in xs.iter().enumerate() {
                let v = rb.eval(x);
                assert!(v <= last[i] + 1e-14);
                assert!(v >= upper_barrier(&dom, &p, x, 64) - 1e-14);
                last[i] = v;
            }
        }
    }

    #[test]
    fn lower_barrier_eps_examples() {
        assert_eq!(lower_barrier_eps(&CoefficientFamily::chaplygin(), 2), 0.5);
        assert_eq!(lower_barrier_eps(&CoefficientFamily::unit(), 2), 0.5);
        // F small enough that the cap is inactive: ε² (1 + 1)/2 = 0.01.
        let weak = CoefficientFamily::new("weak", |_| 1.0, |_| 0.01);
        assert_abs_diff_eq!(lower_barrier_eps(&weak, 2), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn lower_barrier_examples() {
        let c = CoefficientFamily::chaplygin();
        let sq = ConvexDomain::unit_square();
        let lb = LowerBarrier::new(&sq, &c);
        for x in [Point::new(0.5, 0.5), Point::new(0.1, 0.9), Point::new(0.99, 0.5)] {
            let d = sq.distance_to_boundary(x).unwrap();
            assert!(lb.eval(x).unwrap() >= 0.5 * lb.eps0() * d - 1e-15);
        }
        let disk = ConvexDomain::unit_disk();
        assert!(lower_barrier(&disk, &c, Point::ORIGIN).unwrap() >= 0.25 - 1e-12);
        assert!(lb.eval(Point::new(1.5, 0.5)).is_err());

        let big = ConvexDomain::rectangle(Point::new(-1.0, -1.0), Point::new(2.0, 2.0)).unwrap();
        let lb_big = LowerBarrier::new(&big, &c);
        for k in 0..100 {
            let x = Point::new(0.01 + 0.98 * ((k * 37) % 100) as f64 / 100.0, 0.01 + 0.98 * k as f64 / 100.0);
            assert!(lb_big.eval(x).unwrap() >= lb.eval(x).unwrap());
        }
    }

    #[test]
    fn barrier_ordering() {
        let (c, p) = chaplygin();
        let dom = ConvexDomain::polygon([(0.0, 0.0), (3.0, 0.2), (2.0, 1.5), (0.5, 1.2)]).unwrap();
        let lb = LowerBarrier::new(&dom, &c);
        let ub = UpperBarrier::new(&dom, &p, 128);
        for i in 1..30 {
            for j in 1..30 {
                let x = Point::new(3.0 * i as f64 / 30.0, 1.5 * j as f64 / 30.0);
                if dom.is_interior(x) {
                    assert!(lb.eval(x).unwrap() <= ub.eval(x) + 1e-12);
                }
            }
        }
    }
}
