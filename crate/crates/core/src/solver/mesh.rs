use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::{ConvexDomain, Direction, DomainKind, Point};

/// Lattice spacing as a fraction of the target element size.
const LATTICE_FILL: f64 = 0.85;
/// Interior points closer than this fraction of the local spacing to `∂Ω` are dropped.
const BOUNDARY_CLEARANCE: f64 = 0.45;
/// Two points closer than this fraction of the smaller local spacing are merged.
const THINNING: f64 = 0.6;
/// Exclusion radius for edge midpoints, relative to the level spacing.
const SPLIT_THINNING: f64 = 0.3;
const SMOOTHING_SWEEPS: usize = 4;

/// Geometric refinement towards a set of points, typically polygon corners,
/// and optionally towards the boundary near one boundary point.
///
/// The target size is `clamp(ratio·ρ, h·factor^depth, h)`, where `ρ` is the
/// distance to the nearest point target. A boundary focus at `b` with reach
/// `L` contributes `ρ = max(dist(x, ∂Ω), |x − b|²/L)`, which resolves the
/// boundary layer over a parabolic neighbourhood of `b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grading {
    pub points: Vec<Point>,
    pub focus: Option<BoundaryFocus>,
    pub factor: f64,
    pub depth: usize,
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryFocus {
    pub point: Point,
    pub reach: f64,
}

impl Grading {
    pub fn at_points(points: Vec<Point>, factor: f64, depth: usize) -> Result<Self> {
        if !(factor > 0.0 && factor < 1.0) {
            return Err(Error::Config(format!("grading factor must lie in (0, 1), got {factor}")));
        }
        Ok(Grading { points, focus: None, factor, depth, ratio: 0.3 })
    }

    /// Grading towards the listed polygon vertices.
    pub fn corners(domain: &ConvexDomain, indices: &[usize], factor: f64, depth: usize) -> Result<Self> {
        let v = domain.vertices();
        let points = indices
            .iter()
            .map(|&i| {
                v.get(i).copied().ok_or_else(|| Error::Config(format!("corner index {i} out of range 0..{}", v.len())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::at_points(points, factor, depth)
    }

    /// Grading towards the boundary near `point`.
    pub fn boundary_focus(point: Point, reach: f64, factor: f64, depth: usize) -> Result<Self> {
        Self::at_points(Vec::new(), factor, depth)?.with_focus(point, reach)
    }

    /// Adds boundary-layer refinement near `point`, see [`Grading::boundary_focus`].
    pub fn with_focus(mut self, point: Point, reach: f64) -> Result<Self> {
        if !(reach > 0.0 && reach.is_finite()) {
            return Err(Error::Config(format!("focus reach must be positive, got {reach}")));
        }
        self.focus = Some(BoundaryFocus { point, reach });
        Ok(self)
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.ratio = ratio;
        self
    }

    /// `ρ(x)` given the distance from `x` to the boundary.
    pub fn distance(&self, x: Point, boundary_distance: f64) -> f64 {
        let to_points = self.points.iter().map(|&p| (x - p).norm()).fold(f64::INFINITY, f64::min);
        match self.focus {
            Some(f) => to_points.min(boundary_distance.max(0.0).max((x - f.point).norm_squared() / f.reach)),
            None => to_points,
        }
    }

    /// Boxes containing `{ρ ≤ rho}`, each with a lattice anchor.
    fn boxes(&self, rho: f64) -> Vec<(Point, Point, Point)> {
        let pad = Point::new(rho, rho);
        let mut out: Vec<_> = self.points.iter().map(|&c| (c, c - pad, c + pad)).collect();
        if let Some(f) = self.focus {
            let r = (rho * f.reach).sqrt() + rho;
            let pad = Point::new(r, r);
            out.push((f.point, f.point - pad, f.point + pad));
        }
        out
    }

    fn scaled(&self, mu: f64) -> Grading {
        Grading {
            points: self.points.iter().map(|&p| p * mu).collect(),
            focus: self.focus.map(|f| BoundaryFocus { point: f.point * mu, reach: f.reach * mu }),
            ..self.clone()
        }
    }
}

/// A conforming triangulation of a convex polygon.
#[derive(Clone, Debug)]
pub struct Mesh {
    domain: ConvexDomain,
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    h: f64,
    grading: Option<Grading>,
}

impl Mesh {
    /// Assembles a mesh from raw parts, checking orientation and non-degeneracy.
    pub fn from_parts(
        domain: ConvexDomain,
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<bool>,
        h: f64,
        grading: Option<Grading>,
    ) -> Result<Self> {
        if boundary.len() != nodes.len() {
            return Err(Error::Mesh("boundary flags and nodes differ in length".into()));
        }
        let mesh = Mesh { domain: domain.polygonal(), nodes, triangles, boundary, h, grading };
        for (t, tri) in mesh.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= mesh.nodes.len()) {
                return Err(Error::Mesh(format!("triangle {t} references a missing node")));
            }
            if mesh.area(t) <= 1e-14 * h * h {
                return Err(Error::Mesh(format!("triangle {t} is degenerate or clockwise")));
            }
        }
        Ok(mesh)
    }

    /// The polygon that was meshed.
    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn grading(&self) -> Option<&Grading> {
        self.grading.as_ref()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Signed area of triangle `t`.
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        0.5 * (b - a).cross(c - a)
    }

    /// Gradients of the three hat functions on triangle `t`, and its area.
    pub fn shape_gradients(&self, t: usize) -> ([Point; 3], f64) {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        let area2 = (b - a).cross(c - a);
        let g = |p: Point, q: Point| Point::new(p.y - q.y, q.x - p.x) * (1.0 / area2);
        ([g(b, c), g(c, a), g(a, b)], 0.5 * area2)
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        (a - b).norm().max((b - c).norm()).max((c - a).norm())
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    /// Image under `x ↦ μx`, with `h` scaled accordingly.
    pub fn scaled(&self, mu: f64) -> Result<Mesh> {
        Ok(Mesh {
            domain: self.domain.scaled(mu)?,
            nodes: self.nodes.iter().map(|&p| p * mu).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
            h: self.h * mu,
            grading: self.grading.as_ref().map(|g| g.scaled(mu)),
        })
    }

    /// Interior edges used by exactly two triangles and boundary edges by
    /// one, with every boundary edge joining boundary nodes.
    pub fn check_conformity(&self) -> Result<()> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        for (&(a, b), &c) in &count {
            match c {
                1 if !(self.boundary[a] && self.boundary[b]) => {
                    return Err(Error::Mesh(format!("edge ({a}, {b}) lies on the hull but joins interior nodes")));
                }
                1 | 2 => {}
                _ => return Err(Error::Mesh(format!("edge ({a}, {b}) is shared by {c} triangles"))),
            }
        }
        Ok(())
    }

    /// Node-to-triangle incidence.
    pub fn node_triangles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &i in tri {
                out[i].push(t);
            }
        }
        out
    }

    /// Mean diameter of the triangles touching each node.
    pub fn local_sizes(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.nodes.len()];
        let mut n = vec![0usize; self.nodes.len()];
        for t in 0..self.triangles.len() {
            let d = self.diameter(t);
            for &i in &self.triangles[t] {
                sum[i] += d;
                n[i] += 1;
            }
        }
        sum.iter().zip(&n).map(|(&s, &k)| if k > 0 { s / k as f64 } else { self.h }).collect()
    }
}

struct SizeField<'a> {
    h: f64,
    grading: Option<&'a Grading>,
    domain: &'a ConvexDomain,
}

impl SizeField<'_> {
    fn size(&self, x: Point) -> f64 {
        match self.grading {
            None => self.h,
            Some(g) => {
                let d = g.distance(x, self.domain.signed_distance(x));
                let floor = self.h * g.factor.powi(g.depth as i32);
                (g.ratio * d).clamp(floor, self.h)
            }
        }
    }

    fn level(&self, x: Point) -> usize {
        match self.grading {
            None => 0,
            Some(g) => {
                let l = ((self.size(x) / self.h).ln() / g.factor.ln()).round();
                (l.max(0.0) as usize).min(g.depth)
            }
        }
    }

    fn spacing(&self, level: usize) -> f64 {
        let f = self.grading.map_or(1.0, |g| g.factor);
        LATTICE_FILL * self.h * f.powi(level as i32)
    }
}

/// Accepted points bucketed per level on grids whose cell matches the level spacing.
struct Thinning {
    cells: Vec<HashMap<(i64, i64), Vec<usize>>>,
    spacing: Vec<f64>,
    points: Vec<Point>,
    levels: Vec<usize>,
}

impl Thinning {
    fn new(spacing: Vec<f64>) -> Self {
        Thinning { cells: vec![HashMap::new(); spacing.len()], spacing, points: Vec::new(), levels: Vec::new() }
    }

    fn key(&self, level: usize, p: Point) -> (i64, i64) {
        let s = self.spacing[level];
        ((p.x / s).floor() as i64, (p.y / s).floor() as i64)
    }

    fn too_close(&self, p: Point, level: usize, factor: f64) -> bool {
        for m in 0..self.spacing.len() {
            let r = factor * self.spacing[level].min(self.spacing[m]);
            let (cx, cy) = self.key(m, p);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = self.cells[m].get(&(cx + dx, cy + dy)) {
                        if list.iter().any(|&j| (self.points[j] - p).norm() < r) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    fn relocate(&mut self, moved: &[Point]) {
        self.cells.iter_mut().for_each(HashMap::clear);
        for (id, &p) in moved.iter().enumerate() {
            let k = self.key(self.levels[id], p);
            self.cells[self.levels[id]].entry(k).or_default().push(id);
        }
        self.points = moved.to_vec();
    }

    fn push(&mut self, p: Point, level: usize) -> usize {
        let k = self.key(level, p);
        let id = self.points.len();
        self.cells[level].entry(k).or_default().push(id);
        self.points.push(p);
        self.levels.push(level);
        id
    }
}

/// Triangulates a convex domain with target size `h`, optionally graded.
///
/// Boundary nodes follow the size field along each side, or along the
/// circle for disks, whose mesh domain is then the inscribed polygon through
/// the boundary nodes. Interior nodes come from nested triangular lattices,
/// one per grading level, followed by a constrained Delaunay triangulation,
/// Laplacian smoothing and edge splitting.
pub fn mesh_domain(domain: &ConvexDomain, h: f64, grading: Option<&Grading>) -> Result<Mesh> {
    if !(h > 0.0 && h < 0.25 * domain.diameter()) {
        return Err(Error::Config(format!("mesh size h = {h} must lie in (0, diameter/4 = {})", 0.25 * domain.diameter())));
    }
    let field = SizeField { h, grading, domain };
    let (poly, boundary) = match domain.kind() {
        DomainKind::Disk { center, radius } => {
            let start = grading.and_then(|g| g.focus).map_or(0.0, |f| (f.point - center).y.atan2((f.point - center).x));
            let nodes = circle_nodes(center, radius, start, &field);
            (ConvexDomain::inscribed(nodes.clone()), nodes)
        }
        _ => {
            let poly = domain.polygonal();
            let nodes = boundary_nodes(&poly, &field);
            (poly, nodes)
        }
    };
    let depth = grading.map_or(0, |g| g.depth);
    let mut pts = Thinning::new((0..=depth).map(|l| field.spacing(l)).collect());

    let nb = boundary.len();
    for &p in &boundary {
        let level = field.level(p);
        pts.push(p, level);
    }

    let (lo, hi) = poly.bounding_box();
    for level in (0..=depth).rev() {
        let a = field.spacing(level);
        let boxes: Vec<(Point, Point, Point)> = match grading {
            Some(g) if level > 0 => g.boxes(h * g.factor.powf(level as f64 - 0.5) / g.ratio),
            _ => vec![(lo, lo, hi)],
        };
        for (anchor, blo, bhi) in boxes {
            let (blo, bhi) = (Point::new(blo.x.max(lo.x), blo.y.max(lo.y)), Point::new(bhi.x.min(hi.x), bhi.y.min(hi.y)));
            if blo.x > bhi.x || blo.y > bhi.y {
                continue;
            }
            let row = a * 3f64.sqrt() / 2.0;
            let j0 = ((blo.y - anchor.y) / row).floor() as i64;
            let j1 = ((bhi.y - anchor.y) / row).ceil() as i64;
            for j in j0..=j1 {
                let y = anchor.y + j as f64 * row;
                let shift = if j.rem_euclid(2) == 1 { 0.5 * a } else { 0.0 };
                let i0 = ((blo.x - anchor.x - shift) / a).floor() as i64;
                let i1 = ((bhi.x - anchor.x - shift) / a).ceil() as i64;
                for i in i0..=i1 {
                    let p = Point::new(anchor.x + shift + i as f64 * a, y);
                    if field.level(p) != level || poly.signed_distance(p) < BOUNDARY_CLEARANCE * a {
                        continue;
                    }
                    if !pts.too_close(p, level, THINNING) {
                        pts.push(p, level);
                    }
                }
            }
        }
    }

    let mut nodes = pts.points.clone();
    let mut tris = triangulate(&nodes, nb, &poly)?;

    for _ in 0..SMOOTHING_SWEEPS {
        let mut sum = vec![Point::ORIGIN; nodes.len()];
        let mut count = vec![0usize; nodes.len()];
        for tri in &tris {
            for k in 0..3 {
                let (i, j) = (tri[k], tri[(k + 1) % 3]);
                sum[i] += nodes[j];
                count[i] += 1;
            }
        }
        let mut moved = nodes.clone();
        for i in nb..nodes.len() {
            if count[i] > 0 {
                let target = sum[i] * (1.0 / count[i] as f64);
                let candidate = nodes[i].lerp(target, 0.5);
                if poly.signed_distance(candidate) >= 0.25 * field.spacing(pts.levels[i]) {
                    moved[i] = candidate;
                }
            }
        }
        let retri = triangulate(&moved, nb, &poly)?;
        pts.relocate(&moved);
        nodes = moved;
        tris = retri;
    }

    // Split edges longer than the local target.
    for _ in 0..8 {
        let mut added = false;
        let mut seen = std::collections::HashSet::new();
        for tri in &tris {
            for k in 0..3 {
                let (i, j) = (tri[k], tri[(k + 1) % 3]);
                let loop_edge = i < nb && j < nb && ((i + 1) % nb == j || (j + 1) % nb == i);
                if !seen.insert((i.min(j), i.max(j))) || loop_edge {
                    continue;
                }
                let m = nodes[i].lerp(nodes[j], 0.5);
                let target = field.size(m);
                if (nodes[i] - nodes[j]).norm() > target {
                    let level = field.level(m);
                    if poly.signed_distance(m) >= 0.25 * field.spacing(level) && !pts.too_close(m, level, SPLIT_THINNING) {
                        pts.push(m, level);
                        added = true;
                    }
                }
            }
        }
        if !added {
            break;
        }
        nodes = pts.points.clone();
        tris = triangulate(&nodes, nb, &poly)?;
    }

    let mut flags = vec![false; nodes.len()];
    flags[..nb].iter_mut().for_each(|f| *f = true);
    Mesh::from_parts(poly, nodes, tris, flags, h, grading.cloned())
}

/// Boundary nodes in counter-clockwise order, polygon vertices included.
fn boundary_nodes(poly: &ConvexDomain, field: &SizeField) -> Vec<Point> {
    let v = poly.vertices();
    let n = v.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let len = (b - a).norm();
        let floor = field.spacing(field.grading.map_or(0, |g| g.depth));
        let m = ((8.0 * len / floor).ceil() as usize).clamp(16, 1 << 20);
        // Cumulative ∫ dℓ / spacing by the midpoint rule.
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for k in 0..m {
            let mid = a.lerp(b, (k as f64 + 0.5) / m as f64);
            let step = len / m as f64 / (LATTICE_FILL * field.size(mid));
            cum.push(cum[k] + step);
        }
        let total = cum[m];
        let segs = (total.ceil() as usize).max(1);
        out.push(a);
        let mut k = 0;
        for s in 1..segs {
            let target = total * s as f64 / segs as f64;
            while cum[k + 1] < target {
                k += 1;
            }
            let frac = (k as f64 + (target - cum[k]) / (cum[k + 1] - cum[k])) / m as f64;
            out.push(a.lerp(b, frac));
        }
    }
    out
}

/// Nodes on a circle, counter-clockwise from angle `start`, spaced by the size field.
fn circle_nodes(center: Point, radius: f64, start: f64, field: &SizeField) -> Vec<Point> {
    let at = |t: f64| center + Direction::from_angle(start + t).as_point() * radius;
    let floor = field.spacing(field.grading.map_or(0, |g| g.depth));
    let m = ((16.0 * PI * radius / floor).ceil() as usize).clamp(64, 1 << 22);
    let dt = 2.0 * PI / m as f64;
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for k in 0..m {
        let step = radius * dt / (LATTICE_FILL * field.size(at((k as f64 + 0.5) * dt)));
        cum.push(cum[k] + step);
    }
    let segs = (cum[m].ceil() as usize).max(8);
    let mut out = Vec::with_capacity(segs);
    let mut k = 0;
    for s in 0..segs {
        let target = cum[m] * s as f64 / segs as f64;
        while cum[k + 1] < target {
            k += 1;
        }
        let frac = k as f64 + (target - cum[k]) / (cum[k + 1] - cum[k]);
        out.push(at(frac * dt));
    }
    out
}

/// Constrained Delaunay triangulation of `nodes`, whose first `nb` entries
/// are the boundary loop.
fn triangulate(nodes: &[Point], nb: usize, poly: &ConvexDomain) -> Result<Vec<[usize; 3]>> {
    let verts: Vec<Point2<f64>> = nodes.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let edges: Vec<[usize; 2]> = (0..nb).map(|i| [i, (i + 1) % nb]).collect();
    let cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(verts, edges)
        .map_err(|e| Error::Mesh(format!("triangulation failed: {e:?}")))?;
    if cdt.num_vertices() != nodes.len() {
        return Err(Error::Mesh("duplicate mesh nodes".into()));
    }
    let side = side_index(nodes, nb, poly);
    let mut tris = Vec::with_capacity(cdt.num_inner_faces());
    for face in cdt.inner_faces() {
        let [a, b, c] = face.vertices().map(|v| v.fix().index());
        if let (Some(sa), Some(sb), Some(sc)) = (side[a], side[b], side[c]) {
            if sa & sb & sc != 0 {
                continue;
            }
        }
        let (pa, pb, pc) = (nodes[a], nodes[b], nodes[c]);
        if (pb - pa).cross(pc - pa) > 0.0 {
            tris.push([a, b, c]);
        } else {
            tris.push([a, c, b]);
        }
    }
    Ok(tris)
}

/// Bitmask of polygon sides (mod 64) each boundary node lies on.
fn side_index(nodes: &[Point], nb: usize, poly: &ConvexDomain) -> Vec<Option<u64>> {
    let tol = 1e-9 * poly.diameter();
    let normals = poly.face_normals();
    let offsets = poly.face_offsets();
    nodes
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            (i < nb).then(|| {
                let mut mask = 0u64;
                for (k, (n, &o)) in normals.iter().zip(offsets).enumerate() {
                    if (o - n.dot(p)).abs() <= tol {
                        mask |= 1 << (k % 64);
                    }
                }
                mask
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_mesh_structure() {
        let sq = ConvexDomain::unit_square();
        let m = mesh_domain(&sq, 0.25, None).unwrap();
        assert!(m.num_triangles() >= 16);
        m.check_conformity().unwrap();
        for (i, &p) in m.nodes().iter().enumerate() {
            if m.is_boundary(i) {
                assert!(sq.signed_distance(p).abs() <= 1e-12);
            } else {
                assert!(sq.signed_distance(p) > 0.0);
            }
        }
        let total: f64 = (0..m.num_triangles()).map(|t| m.area(t)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_and_edge_bound() {
        let sq = ConvexDomain::unit_square();
        let coarse = mesh_domain(&sq, 0.1, None).unwrap();
        let fine = mesh_domain(&sq, 0.05, None).unwrap();
        assert!(fine.num_triangles() >= 3 * coarse.num_triangles());
        assert!(fine.max_diameter() <= 0.05 * 1.0001, "max edge {}", fine.max_diameter());
        let disk = ConvexDomain::regular_ngon(512, Point::ORIGIN, 1.0).unwrap();
        let m = mesh_domain(&disk, 0.05, None).unwrap();
        m.check_conformity().unwrap();
        assert!(m.max_diameter() <= 0.05 * 1.0001, "max edge {}", m.max_diameter());
    }

    #[test]
    fn corner_grading() {
        let sq = ConvexDomain::unit_square();
        let g = Grading::corners(&sq, &[0], 0.5, 4).unwrap();
        let m = mesh_domain(&sq, 0.1, Some(&g)).unwrap();
        m.check_conformity().unwrap();
        let corner = sq.vertices()[0];
        let mut shortest = f64::INFINITY;
        for tri in m.triangles() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if m.is_boundary(a) && m.is_boundary(b) && (m.nodes()[a] - corner).norm() < 0.05 {
                    shortest = shortest.min((m.nodes()[a] - m.nodes()[b]).norm());
                }
            }
        }
        assert!(shortest <= 0.1 / 16.0 + 1e-12, "shortest {shortest}");
        let total: f64 = (0..m.num_triangles()).map(|t| m.area(t)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_large_h() {
        assert!(mesh_domain(&ConvexDomain::unit_square(), 0.5, None).is_err());
    }
}
