//! Diagnostics on solved fields: Hilbert-metric Lipschitz estimates for
//! `log w`, comparison with sector solutions at corners, and barrier checks.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConvexDomain, Direction, DomainKind, Point};
use crate::hilbert::{hilbert_distance, thompson_distance};
use crate::profile::{
    solve_profile_w, CoefficientFamily, LowerBarrier, Profile1D, RelaxedUpperBarrier, SlabFamily, DEFAULT_DIRECTIONS,
};
use crate::sector::SectorSolution;
use crate::solver::{
    continuation_solve, default_schedule, mesh_domain, radial_solve_disk, Grading, Mesh, ScalarField, SolveOptions,
    StageReport,
};

/// Diagnostic points stay this many local mesh sizes away from the boundary.
pub const BOUNDARY_MARGIN: f64 = 5.0;
pub const HISTOGRAM_BINS: usize = 24;
pub const HISTOGRAM_WIDTH: f64 = 0.05;

/// Point location and linear interpolation on a mesh.
pub struct FieldSampler<'a> {
    field: &'a ScalarField,
    lo: Point,
    cell: f64,
    nx: i64,
    ny: i64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> FieldSampler<'a> {
    pub fn new(field: &'a ScalarField) -> Self {
        let mesh = &field.mesh;
        let (lo, hi) = mesh.domain().bounding_box();
        let n = (mesh.num_triangles() as f64).sqrt().ceil().max(1.0);
        let cell = (hi.x - lo.x).max(hi.y - lo.y) / n;
        let nx = ((hi.x - lo.x) / cell).ceil() as i64 + 1;
        let ny = ((hi.y - lo.y) / cell).ceil() as i64 + 1;
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let key = |p: Point| (((p.x - lo.x) / cell).floor() as i64, ((p.y - lo.y) / cell).floor() as i64);
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let v = tri.map(|i| mesh.nodes()[i]);
            let (a, b) = (
                key(Point::new(v[0].x.min(v[1].x).min(v[2].x), v[0].y.min(v[1].y).min(v[2].y))),
                key(Point::new(v[0].x.max(v[1].x).max(v[2].x), v[0].y.max(v[1].y).max(v[2].y))),
            );
            for i in a.0..=b.0 {
                for j in a.1..=b.1 {
                    buckets.entry((i, j)).or_default().push(t);
                }
            }
        }
        FieldSampler { field, lo, cell, nx, ny, buckets }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.field.mesh
    }

    /// Containing triangle and barycentric coordinates of `p`.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let i = ((p.x - self.lo.x) / self.cell).floor() as i64;
        let j = ((p.y - self.lo.y) / self.cell).floor() as i64;
        if i < 0 || j < 0 || i >= self.nx || j >= self.ny {
            return None;
        }
        let mesh = self.mesh();
        let tol = 1e-12;
        for &t in self.buckets.get(&(i, j))? {
            let [a, b, c] = mesh.triangles()[t].map(|k| mesh.nodes()[k]);
            let det = (b - a).cross(c - a);
            let l1 = (p - a).cross(c - a) / det;
            let l2 = (b - a).cross(p - a) / det;
            let l0 = 1.0 - l1 - l2;
            if l0 >= -tol && l1 >= -tol && l2 >= -tol {
                return Some((t, [l0, l1, l2]));
            }
        }
        None
    }

    pub fn eval(&self, p: Point) -> Option<f64> {
        let (t, l) = self.locate(p)?;
        let tri = self.mesh().triangles()[t];
        Some((0..3).map(|k| l[k] * self.field.values[tri[k]]).sum())
    }

    /// Value and containing-triangle diameter, or `None` outside the mesh.
    fn eval_with_size(&self, p: Point) -> Option<(f64, f64)> {
        let (t, l) = self.locate(p)?;
        let tri = self.mesh().triangles()[t];
        Some(((0..3).map(|k| l[k] * self.field.values[tri[k]]).sum(), self.mesh().diameter(t)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PairStrategy {
    /// Random pairs of interior nodes.
    UniformPairs { count: usize, seed: u64 },
    /// Stations along the inward normal chord from a boundary point, at the
    /// given depths; all pairs of stations.
    RadialPairs { boundary_point: Point, depths: Vec<f64> },
    /// Stations on the bisector of a polygon vertex at the given distances.
    CornerPairs { corner: usize, depths: Vec<f64> },
}

impl PairStrategy {
    pub fn tag(&self) -> &'static str {
        match self {
            PairStrategy::UniformPairs { .. } => "uniform-pairs",
            PairStrategy::RadialPairs { .. } => "radial-pairs",
            PairStrategy::CornerPairs { .. } => "corner-pairs",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    pub strategy: String,
    pub samples: usize,
    pub pairs: usize,
    /// `max |log w(q) − log w(p)| / d_H(p, q)`.
    pub max_ratio: f64,
    pub argmax: Option<(Point, Point)>,
    /// Counts of ratios in bins of width [`HISTOGRAM_WIDTH`]; the last bin
    /// collects everything beyond.
    pub histogram: Vec<usize>,
    /// `max (|log w(q) − log w(p)| − d_T(p, q))` over the same pairs.
    pub max_thompson_excess: f64,
}

/// Lipschitz constant of `log w` with respect to the Hilbert metric of
/// `domain`, estimated on the pairs given by `strategy`.
pub fn lipschitz_estimate(domain: &ConvexDomain, field: &ScalarField, strategy: &PairStrategy) -> Result<LipschitzReport> {
    let sampler = FieldSampler::new(field);
    let mesh = &field.mesh;
    let keep = |p: Point, size: f64| domain.is_interior(p) && domain.signed_distance(p) >= BOUNDARY_MARGIN * size;

    let mut stations: Vec<(Point, f64)> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    match strategy {
        PairStrategy::UniformPairs { count, seed } => {
            let sizes = mesh.local_sizes();
            for (i, &p) in mesh.nodes().iter().enumerate() {
                if !mesh.is_boundary(i) && keep(p, sizes[i]) && field.values[i] > 0.0 {
                    stations.push((p, field.values[i]));
                }
            }
            if stations.len() >= 2 {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                while pairs.len() < *count {
                    let i = rng.random_range(0..stations.len());
                    let j = rng.random_range(0..stations.len());
                    if i != j {
                        pairs.push((i, j));
                    }
                }
            }
        }
        PairStrategy::RadialPairs { boundary_point, depths } => {
            let inward = inward_normal(domain, *boundary_point)?;
            for &d in depths {
                collect(&sampler, *boundary_point + inward.as_point() * d, &keep, &mut stations);
            }
            pairs = all_pairs(stations.len());
        }
        PairStrategy::CornerPairs { corner, depths } => {
            let (c, bisector, _) = corner_frame(domain, *corner)?;
            for &d in depths {
                collect(&sampler, c + bisector.as_point() * d, &keep, &mut stations);
            }
            pairs = all_pairs(stations.len());
        }
    }
    if stations.len() < 2 {
        return Err(Error::Sampling(format!(
            "{} produced {} valid interior samples, need at least 2",
            strategy.tag(),
            stations.len()
        )));
    }

    let mut report = LipschitzReport {
        strategy: strategy.tag().into(),
        samples: stations.len(),
        pairs: 0,
        max_ratio: 0.0,
        argmax: None,
        histogram: vec![0; HISTOGRAM_BINS + 1],
        max_thompson_excess: f64::NEG_INFINITY,
    };
    for (i, j) in pairs {
        let ((p, wp), (q, wq)) = (stations[i], stations[j]);
        let dh = hilbert_distance(domain, p, q)?;
        if !(dh > 0.0) {
            continue;
        }
        let dlog = (wq.ln() - wp.ln()).abs();
        let ratio = dlog / dh;
        report.pairs += 1;
        let bin = ((ratio / HISTOGRAM_WIDTH) as usize).min(HISTOGRAM_BINS);
        report.histogram[bin] += 1;
        if ratio > report.max_ratio || report.argmax.is_none() {
            report.max_ratio = ratio;
            report.argmax = Some((p, q));
        }
        report.max_thompson_excess = report.max_thompson_excess.max(dlog - thompson_distance(domain, p, q)?);
    }
    if report.pairs == 0 {
        return Err(Error::Sampling("no pair of distinct samples".into()));
    }
    Ok(report)
}

fn collect(sampler: &FieldSampler, p: Point, keep: &impl Fn(Point, f64) -> bool, out: &mut Vec<(Point, f64)>) {
    if let Some((w, size)) = sampler.eval_with_size(p) {
        if w > 0.0 && keep(p, size) {
            out.push((p, w));
        }
    }
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Unit inward normal at a boundary point, averaged over the active faces
/// of polygons.
fn inward_normal(domain: &ConvexDomain, b: Point) -> Result<Direction> {
    if let DomainKind::Disk { center, radius } = domain.kind() {
        if ((b - center).norm() - radius).abs() <= 1e-9 * radius {
            return Direction::new(center - b).ok_or_else(|| Error::Degenerate("zero radius".into()));
        }
        return Err(Error::Config(format!("point ({}, {}) is not on the boundary", b.x, b.y)));
    }
    let poly = domain.polygonal();
    let tol = 1e-9 * poly.diameter();
    let mut sum = Point::ORIGIN;
    for (n, &a) in poly.face_normals().iter().zip(poly.face_offsets()) {
        if (a - n.dot(b)).abs() <= tol {
            sum = sum - n.as_point();
        }
    }
    Direction::new(sum).ok_or_else(|| Error::Config(format!("point ({}, {}) is not on the boundary", b.x, b.y)))
}

/// Vertex, unit bisector and interior angle of polygon vertex `i`.
fn corner_frame(domain: &ConvexDomain, i: usize) -> Result<(Point, Direction, f64)> {
    let v = domain.vertices();
    if !domain.is_polygon() || i >= v.len() {
        return Err(Error::Config(format!("corner index {i} does not name a polygon vertex")));
    }
    let n = v.len();
    let c = v[i];
    let e1 = Direction::new(v[(i + 1) % n] - c).ok_or_else(|| Error::Degenerate("repeated vertex".into()))?;
    let e2 = Direction::new(v[(i + n - 1) % n] - c).ok_or_else(|| Error::Degenerate("repeated vertex".into()))?;
    let bis = Direction::new(e1.as_point() + e2.as_point()).ok_or_else(|| Error::Degenerate("flat vertex".into()))?;
    Ok((c, bis, domain.interior_angle(i)))
}

#[derive(Clone, Debug, Serialize)]
pub struct CornerSample {
    pub distance: f64,
    pub w: f64,
    pub v: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CornerReport {
    pub corner: Point,
    pub aperture: f64,
    /// Largest diameter among triangles touching the corner.
    pub corner_mesh_size: f64,
    pub samples: Vec<CornerSample>,
    /// Requested distances below `5 · corner_mesh_size` or off the mesh.
    pub skipped: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl CornerReport {
    pub fn max_deviation(&self) -> f64 {
        self.samples.iter().map(|s| (s.ratio - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Ratios `w(x) / V(x)` along the bisector of vertex `corner`, with
/// `V(x) = |x − corner| A(θ)` the sector solution of matching aperture.
pub fn corner_asymptote_check(
    field: &ScalarField,
    corner: usize,
    sector: &SectorSolution,
    distances: &[f64],
) -> Result<CornerReport> {
    let domain = field.mesh.domain();
    let (c, bis, angle) = corner_frame(domain, corner)?;
    if (angle - sector.aperture).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "corner angle {angle} does not match sector aperture {}",
            sector.aperture
        )));
    }
    let mesh = &field.mesh;
    let node = mesh
        .nodes()
        .iter()
        .position(|&p| (p - c).norm() <= 1e-12 * domain.diameter())
        .ok_or_else(|| Error::Mesh("corner is not a mesh node".into()))?;
    let corner_mesh_size = mesh.node_triangles()[node].iter().map(|&t| mesh.diameter(t)).fold(0.0, f64::max);

    let e1 = Direction::new(domain.vertices()[(corner + 1) % domain.vertices().len()] - c).expect("checked above");
    let sampler = FieldSampler::new(field);
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for &d in distances {
        let x = c + bis.as_point() * d;
        let w = if d >= BOUNDARY_MARGIN * corner_mesh_size { sampler.eval(x) } else { None };
        let Some(w) = w else {
            skipped.push(d);
            continue;
        };
        let rel = x - c;
        let theta = e1.as_point().cross(rel).atan2(e1.dot(rel));
        let v = rel.norm() * sector.eval(theta);
        samples.push(CornerSample { distance: d, w, v, ratio: w / v });
    }
    let min_ratio = samples.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = samples.iter().map(|s| s.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(CornerReport { corner: c, aperture: angle, corner_mesh_size, samples, skipped, min_ratio, max_ratio })
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierViolation {
    pub node: usize,
    pub point: Point,
    pub value: f64,
    pub bound: f64,
    /// Amount by which the bound is exceeded, beyond the slack.
    pub excess: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierReport {
    pub eps: f64,
    pub slack: f64,
    pub nodes: usize,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub worst_lower: Option<BarrierViolation>,
    pub worst_upper: Option<BarrierViolation>,
    /// Smallest `w₊,ε − w` and `w − max(w₋, ε)` over all nodes.
    pub upper_margin: f64,
    pub lower_margin: f64,
}

impl BarrierReport {
    pub fn violations(&self) -> usize {
        self.lower_violations + self.upper_violations
    }
}

/// Checks `max(w₋, ε) − slack ≤ w ≤ w₊,ε + slack` at every node.
pub fn barrier_check(
    domain: &ConvexDomain,
    coeffs: &CoefficientFamily,
    prof: &Profile1D,
    field: &ScalarField,
    eps: f64,
    slack: f64,
) -> Result<BarrierReport> {
    let upper = RelaxedUpperBarrier::from_slabs(&SlabFamily::new(domain, DEFAULT_DIRECTIONS), prof, eps)?;
    let lower = LowerBarrier::new(domain, coeffs);
    let mesh = &field.mesh;
    let mut report = BarrierReport {
        eps,
        slack,
        nodes: mesh.num_nodes(),
        lower_violations: 0,
        upper_violations: 0,
        worst_lower: None,
        worst_upper: None,
        upper_margin: f64::INFINITY,
        lower_margin: f64::INFINITY,
    };
    for (i, (&p, &w)) in mesh.nodes().iter().zip(&field.values).enumerate() {
        let top = upper.eval(p);
        let bottom = if mesh.is_boundary(i) || !domain.is_interior(p) { eps } else { lower.eval(p)?.max(eps) };
        report.upper_margin = report.upper_margin.min(top - w);
        report.lower_margin = report.lower_margin.min(w - bottom);
        if w > top + slack {
            report.upper_violations += 1;
            let v = BarrierViolation { node: i, point: p, value: w, bound: top, excess: w - top - slack };
            if report.worst_upper.as_ref().is_none_or(|u| v.excess > u.excess) {
                report.worst_upper = Some(v);
            }
        }
        if w < bottom - slack {
            report.lower_violations += 1;
            let v = BarrierViolation { node: i, point: p, value: w, bound: bottom, excess: bottom - slack - w };
            if report.worst_lower.as_ref().is_none_or(|u| v.excess > u.excess) {
                report.worst_lower = Some(v);
            }
        }
    }
    Ok(report)
}

/// `√((1 − r²)/2)`, the closed form tested against disk solutions.
pub fn disk_closed_form(r: f64) -> f64 {
    ((1.0 - r * r).max(0.0) / 2.0).sqrt()
}

/// `√(1 − r²)`, which solves the Chaplygin problem on the unit disk.
pub fn hemisphere(r: f64) -> f64 {
    (1.0 - r * r).max(0.0).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct DiskCheckOptions {
    pub h: f64,
    /// Continuation stages after the first; `ε` halves per stage.
    pub eps_steps: usize,
    /// First continuation value; `None` selects the default schedule.
    pub eps_start: Option<f64>,
    /// The schedule continues in quarters down to this value.
    pub eps_end: f64,
    pub focus_reach: f64,
    pub focus_depth: usize,
    pub focus_ratio: f64,
    pub radial_n: usize,
    pub radial_eps: f64,
    /// Sup errors are taken over `|x| ≤ error_radius` on the mesh and
    /// `r ≤ radial_error_radius` on the radial grid.
    pub error_radius: f64,
    pub radial_error_radius: f64,
    pub depths: Vec<f64>,
    pub uniform_pairs: usize,
    pub seed: u64,
    pub solve: SolveOptions,
}

impl Default for DiskCheckOptions {
    fn default() -> Self {
        DiskCheckOptions {
            h: 0.02,
            eps_steps: 10,
            eps_start: None,
            eps_end: 1e-5,
            focus_reach: 3.0,
            focus_depth: 8,
            focus_ratio: 0.15,
            radial_n: 2000,
            radial_eps: 1e-6,
            error_radius: 0.9,
            radial_error_radius: 0.99,
            depths: vec![1e-1, 1e-2, 1e-3],
            uniform_pairs: 500,
            seed: 0,
            solve: SolveOptions::default(),
        }
    }
}

impl DiskCheckOptions {
    /// Deeper grading toward `(1, 0)` and a shorter halving phase.
    pub fn fine() -> Self {
        DiskCheckOptions { focus_depth: 9, focus_ratio: 0.12, eps_steps: 2, ..Self::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RadialCheck {
    pub n: usize,
    pub eps: f64,
    pub iterations: usize,
    pub residual: f64,
    pub slope_at_center: f64,
    pub center_value: f64,
    pub closed_form_sup_error: f64,
    pub hemisphere_sup_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FemCheck {
    pub nodes: usize,
    pub triangles: usize,
    pub schedule: Vec<f64>,
    pub stages: Vec<StageReport>,
    pub closed_form_sup_error: f64,
    pub hemisphere_sup_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiskCheckReport {
    pub radial: RadialCheck,
    pub fem: FemCheck,
    pub radial_pairs: LipschitzReport,
    pub uniform_pairs: LipschitzReport,
    pub barrier: BarrierReport,
}

/// Chaplygin problem on the unit disk: the radial solve, a continuation solve
/// on a mesh refined toward `(1, 0)`, and Lipschitz estimates on the result.
pub fn disk_check(opts: &DiskCheckOptions) -> Result<(DiskCheckReport, ScalarField)> {
    let coeffs = CoefficientFamily::chaplygin();
    let prof = solve_profile_w(&coeffs)?;
    let sol = radial_solve_disk(&coeffs, opts.radial_n, opts.radial_eps)?;
    let radial = RadialCheck {
        n: opts.radial_n,
        eps: opts.radial_eps,
        iterations: sol.iterations,
        residual: sol.residual,
        slope_at_center: sol.slope_at_center,
        center_value: sol.w[0],
        closed_form_sup_error: sol.sup_error(disk_closed_form, opts.radial_error_radius),
        hemisphere_sup_error: sol.sup_error(hemisphere, opts.radial_error_radius),
    };

    let disk = ConvexDomain::unit_disk();
    let focus = Point::new(1.0, 0.0);
    let grading = Grading::boundary_focus(focus, opts.focus_reach, 0.5, opts.focus_depth)?.with_ratio(opts.focus_ratio);
    let mesh = Arc::new(mesh_domain(&disk, opts.h, Some(&grading))?);
    let mut schedule = match opts.eps_start {
        Some(e0) => (0..=opts.eps_steps).map(|k| e0 * 0.5f64.powi(k as i32)).collect(),
        None => default_schedule(&mesh, &prof, opts.eps_steps),
    };
    let mut e = *schedule.last().expect("non-empty schedule");
    while e / 4.0 >= opts.eps_end {
        e /= 4.0;
        schedule.push(e);
    }
    let run = continuation_solve(&mesh, &coeffs, &prof, &schedule, &opts.solve)?;
    let field = run.field().clone();
    let sup = |exact: fn(f64) -> f64| {
        mesh.nodes()
            .iter()
            .zip(&field.values)
            .filter(|(p, _)| p.norm() <= opts.error_radius)
            .map(|(p, &w)| (w - exact(p.norm())).abs())
            .fold(0.0, f64::max)
    };
    let fem = FemCheck {
        nodes: mesh.num_nodes(),
        triangles: mesh.num_triangles(),
        closed_form_sup_error: sup(disk_closed_form),
        hemisphere_sup_error: sup(hemisphere),
        schedule,
        stages: run.reports,
    };
    let radial_pairs =
        lipschitz_estimate(&disk, &field, &PairStrategy::RadialPairs { boundary_point: focus, depths: opts.depths.clone() })?;
    let uniform_pairs =
        lipschitz_estimate(&disk, &field, &PairStrategy::UniformPairs { count: opts.uniform_pairs, seed: opts.seed })?;
    let barrier = barrier_check(&disk, &coeffs, &prof, &field, field.eps, 2e-2)?;
    Ok((DiskCheckReport { radial, fem, radial_pairs, uniform_pairs, barrier }, field))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_field(f: impl Fn(Point) -> f64) -> ScalarField {
        let mesh = Arc::new(mesh_domain(&ConvexDomain::unit_square(), 0.1, None).unwrap());
        let values = mesh.nodes().iter().map(|&p| f(p)).collect();
        ScalarField::new(mesh, values, 0.0).unwrap()
    }

    #[test]
    fn interpolation_is_exact_for_linear_fields() {
        let field = square_field(|p| 1.0 + 2.0 * p.x - 0.5 * p.y);
        let s = FieldSampler::new(&field);
        for &(x, y) in &[(0.5, 0.5), (0.013, 0.97), (0.3333, 0.1234), (1.0, 1.0)] {
            let v = s.eval(Point::new(x, y)).unwrap();
            assert!((v - (1.0 + 2.0 * x - 0.5 * y)).abs() < 1e-12);
        }
        assert!(s.eval(Point::new(1.5, 0.5)).is_none());
    }

    #[test]
    fn constant_field_has_zero_ratio() {
        let field = square_field(|_| 0.3);
        let sq = ConvexDomain::unit_square();
        let r = lipschitz_estimate(&sq, &field, &PairStrategy::UniformPairs { count: 100, seed: 1 }).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert_eq!(r.pairs, 100);
        assert_eq!(r.histogram[0], 100);
    }

    #[test]
    fn too_few_samples() {
        let field = square_field(|_| 0.3);
        let sq = ConvexDomain::unit_square();
        let s = PairStrategy::RadialPairs { boundary_point: Point::new(0.5, 0.0), depths: vec![1e-3, 2e-3] };
        assert!(matches!(lipschitz_estimate(&sq, &field, &s), Err(Error::Sampling(_))));
    }

    #[test]
    fn more_pairs_never_lower_the_estimate() {
        let field = square_field(|p| 0.1 + p.x * (1.0 - p.x) * p.y * (1.0 - p.y));
        let sq = ConvexDomain::unit_square();
        let a = lipschitz_estimate(&sq, &field, &PairStrategy::UniformPairs { count: 50, seed: 9 }).unwrap();
        let b = lipschitz_estimate(&sq, &field, &PairStrategy::UniformPairs { count: 500, seed: 9 }).unwrap();
        assert!(b.max_ratio >= a.max_ratio);
    }

    #[test]
    fn aperture_mismatch_is_rejected() {
        let field = square_field(|_| 1.0);
        let sol = crate::sector::solve_sector(1.0).unwrap();
        assert!(matches!(corner_asymptote_check(&field, 0, &sol, &[0.5]), Err(Error::Config(_))));
    }
}
