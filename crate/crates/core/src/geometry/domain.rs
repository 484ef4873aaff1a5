use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::point::{Direction, Point};
use crate::error::{Error, Result};

/// Default number of vertices of the inscribed polygon carried by the exact variants.
pub const DEFAULT_RESOLUTION: usize = 1024;

/// Relative containment tolerance, in units of the domain diameter.
pub const CONTAINMENT_TOL: f64 = 1e-9;

/// Analytic shape behind a [`ConvexDomain`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainKind {
    Polygon,
    /// Open disk.
    Disk { center: Point, radius: f64 },
    /// `{ r e^{iθ} : 0 < θ < aperture, 0 < r < radius }`, apex at the origin.
    Sector { aperture: f64, radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    StrictInterior,
    Boundary,
    Exterior,
}

/// A bounded convex planar domain.
///
/// The vertex list is always a clean counter-clockwise convex polygon. For the
/// exact variants it is an inscribed approximation, used by mesh consumers,
/// while the geometric queries use the analytic shape.
#[derive(Clone, Debug)]
pub struct ConvexDomain {
    kind: DomainKind,
    vertices: Vec<Point>,
    normals: Vec<Direction>,
    offsets: Vec<f64>,
    diameter: f64,
}

impl ConvexDomain {
    /// Builds a polygon, normalizing orientation and dropping duplicate or
    /// collinear vertices. Non-convex input is rejected.
    pub fn polygon<I, P>(vertices: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: Into<Point>,
    {
        let raw: Vec<Point> = vertices.into_iter().map(Into::into).collect();
        let vertices = normalize_polygon(&raw)?;
        Ok(Self::from_clean(DomainKind::Polygon, vertices))
    }

    pub fn unit_square() -> Self {
        Self::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).expect("unit square")
    }

    pub fn rectangle(lo: Point, hi: Point) -> Result<Self> {
        Self::polygon([
            lo,
            Point::new(hi.x, lo.y),
            hi,
            Point::new(lo.x, hi.y),
        ])
    }

    /// Regular n-gon inscribed in the circle of the given center and radius,
    /// with a vertex at angle zero.
    pub fn regular_ngon(n: usize, center: Point, radius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Degenerate(format!("regular polygon needs n >= 3, got {n}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Degenerate(format!("radius must be positive, got {radius}")));
        }
        let vertices = (0..n)
            .map(|k| center + Direction::from_angle(2.0 * PI * k as f64 / n as f64).as_point() * radius)
            .collect::<Vec<_>>();
        Self::polygon(vertices)
    }

    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        Self::disk_with_resolution(center, radius, DEFAULT_RESOLUTION)
    }

    pub fn unit_disk() -> Self {
        Self::disk(Point::ORIGIN, 1.0).expect("unit disk")
    }

    pub fn disk_with_resolution(center: Point, radius: f64, n: usize) -> Result<Self> {
        let approx = Self::regular_ngon(n, center, radius)?;
        Ok(Self::from_clean(DomainKind::Disk { center, radius }, approx.vertices))
    }

    pub fn sector(aperture: f64, radius: f64) -> Result<Self> {
        Self::sector_with_resolution(aperture, radius, DEFAULT_RESOLUTION)
    }

    pub fn sector_with_resolution(aperture: f64, radius: f64, n: usize) -> Result<Self> {
        if !(aperture > 0.0 && aperture < PI) {
            return Err(Error::Domain(format!("sector aperture must lie in (0, pi), got {aperture}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Degenerate(format!("radius must be positive, got {radius}")));
        }
        let n = n.max(2);
        let mut vertices = vec![Point::ORIGIN];
        vertices.extend(
            (0..=n).map(|k| Direction::from_angle(aperture * k as f64 / n as f64).as_point() * radius),
        );
        let vertices = normalize_polygon(&vertices)?;
        Ok(Self::from_clean(DomainKind::Sector { aperture, radius }, vertices))
    }

    /// Polygon through points known to be in convex position and
    /// counter-clockwise order, kept even when nearly collinear.
    pub(crate) fn inscribed(vertices: Vec<Point>) -> Self {
        Self::from_clean(DomainKind::Polygon, vertices)
    }

    fn from_clean(kind: DomainKind, vertices: Vec<Point>) -> Self {
        let n = vertices.len();
        let mut normals = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            // Outward normal of a counter-clockwise edge points to its right.
            let nrm = Direction::new(Point::new(b.y - a.y, a.x - b.x)).expect("clean edge");
            offsets.push(nrm.dot(a).max(nrm.dot(b)));
            normals.push(nrm);
        }
        let diameter = match kind {
            DomainKind::Disk { radius, .. } => 2.0 * radius,
            _ => polygon_diameter(&vertices),
        };
        ConvexDomain { kind, vertices, normals, offsets, diameter }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn is_polygon(&self) -> bool {
        matches!(self.kind, DomainKind::Polygon)
    }

    /// Counter-clockwise vertices (the inscribed approximation for exact kinds).
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Outward unit normal of edge `i`, running from vertex `i` to vertex `i + 1`.
    pub fn face_normals(&self) -> &[Direction] {
        &self.normals
    }

    pub fn face_offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Absolute containment tolerance.
    pub fn tolerance(&self) -> f64 {
        CONTAINMENT_TOL * self.diameter
    }

    /// The polygonal approximation as a plain polygon domain.
    pub fn polygonal(&self) -> ConvexDomain {
        Self::from_clean(DomainKind::Polygon, self.vertices.clone())
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            DomainKind::Disk { radius, .. } => PI * radius * radius,
            DomainKind::Sector { aperture, radius } => 0.5 * aperture * radius * radius,
            DomainKind::Polygon => polygon_area(&self.vertices),
        }
    }

    /// Interior angle at vertex `i` of the polygonal representation.
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.vertices.len();
        let v = self.vertices[i];
        let next = self.vertices[(i + 1) % n] - v;
        let prev = self.vertices[(i + n - 1) % n] - v;
        next.cross(prev).atan2(next.dot(prev))
    }

    /// Signed distance to the boundary, positive inside. Exact inside the
    /// domain; outside it is a lower bound in magnitude, which suffices for
    /// classification.
    pub fn signed_distance(&self, p: Point) -> f64 {
        match self.kind {
            DomainKind::Polygon => self.polygon_signed_distance(p),
            DomainKind::Disk { center, radius } => radius - (p - center).norm(),
            DomainKind::Sector { aperture, radius } => {
                let lower = p.y;
                let upper = -Direction::from_angle(aperture).as_point().cross(p);
                lower.min(upper).min(radius - p.norm())
            }
        }
    }

    fn polygon_signed_distance(&self, p: Point) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, &a)| a - n.dot(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Point) -> Containment {
        let sd = self.signed_distance(p);
        let tol = self.tolerance();
        if sd > tol {
            Containment::StrictInterior
        } else if sd >= -tol {
            Containment::Boundary
        } else {
            Containment::Exterior
        }
    }

    pub fn is_interior(&self, p: Point) -> bool {
        self.contains(p) == Containment::StrictInterior
    }

    fn require_interior(&self, p: Point) -> Result<()> {
        if self.is_interior(p) {
            Ok(())
        } else {
            Err(Error::NotInterior { x: p.x, y: p.y })
        }
    }

    /// First boundary crossing of the ray `origin + t·dir`, `t > 0`.
    pub fn ray_exit(&self, origin: Point, dir: Direction) -> Result<(Point, f64)> {
        self.require_interior(origin)?;
        let t = match self.kind {
            DomainKind::Polygon => self.polygon_ray_param(origin, dir),
            DomainKind::Disk { center, radius } => circle_exit(origin - center, dir, radius),
            DomainKind::Sector { aperture, radius } => {
                let planes = [
                    (Direction::new(Point::new(0.0, -1.0)).unwrap(), 0.0),
                    (Direction::from_angle(aperture + 0.5 * PI), 0.0),
                ];
                planes
                    .iter()
                    .filter_map(|&(n, a)| half_plane_exit(origin, dir, n, a))
                    .fold(circle_exit(origin, dir, radius), f64::min)
            }
        };
        Ok((origin + dir.as_point() * t, t))
    }

    fn polygon_ray_param(&self, origin: Point, dir: Direction) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .filter_map(|(&n, &a)| half_plane_exit(origin, dir, n, a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Support value `max { x·ν : x in the closure }`.
    pub fn support(&self, nu: Direction) -> f64 {
        match self.kind {
            DomainKind::Polygon => self
                .vertices
                .iter()
                .map(|&v| nu.dot(v))
                .fold(f64::NEG_INFINITY, f64::max),
            DomainKind::Disk { center, radius } => nu.dot(center) + radius,
            DomainKind::Sector { aperture, radius } => {
                let phi = nu.angle().rem_euclid(2.0 * PI);
                if phi <= aperture {
                    radius
                } else {
                    let ends = nu.x().max(nu.dot(Direction::from_angle(aperture).as_point()));
                    (radius * ends).max(0.0)
                }
            }
        }
    }

    /// Slab bounds `(α₋(ν), α₊(ν))`.
    pub fn slab(&self, nu: Direction) -> (f64, f64) {
        (-self.support(-nu), self.support(nu))
    }

    /// Radius of the largest ball centered at `p` inside the domain.
    pub fn distance_to_boundary(&self, p: Point) -> Result<f64> {
        self.require_interior(p)?;
        Ok(self.signed_distance(p))
    }

    /// Center and radius of the largest inscribed ball.
    pub fn chebyshev_center(&self) -> (Point, f64) {
        match self.kind {
            DomainKind::Disk { center, radius } => (center, radius),
            DomainKind::Sector { aperture, radius } => {
                let s = (0.5 * aperture).sin();
                let dist = radius / (1.0 + s);
                (Direction::from_angle(0.5 * aperture).as_point() * dist, dist * s)
            }
            DomainKind::Polygon => polygon_chebyshev(&self.normals, &self.offsets, centroid(&self.vertices))
                .unwrap_or_else(|| {
                    let c = centroid(&self.vertices);
                    (c, self.polygon_signed_distance(c))
                }),
        }
    }

    /// Image under `x ↦ M x + b`. Exact variants are mapped through their
    /// polygonal approximation.
    pub fn affine_image(&self, m: [[f64; 2]; 2], b: Point) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-14 {
            return Err(Error::Degenerate("affine map is singular".into()));
        }
        let map = |p: Point| Point::new(m[0][0] * p.x + m[0][1] * p.y + b.x, m[1][0] * p.x + m[1][1] * p.y + b.y);
        Self::polygon(self.vertices.iter().map(|&v| map(v)))
    }

    /// Homothety `x ↦ μ x`.
    pub fn scaled(&self, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {mu}")));
        }
        let vertices = self.vertices.iter().map(|&v| v * mu).collect();
        let kind = match self.kind {
            DomainKind::Polygon => DomainKind::Polygon,
            DomainKind::Disk { center, radius } => DomainKind::Disk { center: center * mu, radius: radius * mu },
            DomainKind::Sector { aperture, radius } => DomainKind::Sector { aperture, radius: radius * mu },
        };
        Ok(Self::from_clean(kind, vertices))
    }

    /// Axis-aligned bounding box `(lo, hi)` of the polygonal representation.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }
}

fn half_plane_exit(origin: Point, dir: Direction, n: Direction, offset: f64) -> Option<f64> {
    let denom = n.dot(dir.as_point());
    (denom > 1e-300).then(|| (offset - n.dot(origin)) / denom)
}

/// Positive root of `|o + t d| = r` for `|o| < r`.
fn circle_exit(o: Point, dir: Direction, r: f64) -> f64 {
    let b = dir.dot(o);
    let c = (o.norm() - r) * (o.norm() + r);
    let disc = (b * b - c).sqrt();
    if b <= 0.0 { disc - b } else { -c / (b + disc) }
}

fn polygon_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn centroid(v: &[Point]) -> Point {
    let sum = v.iter().fold(Point::ORIGIN, |acc, &p| acc + p);
    sum * (1.0 / v.len() as f64)
}

fn polygon_diameter(v: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (i, &a) in v.iter().enumerate() {
        for &b in &v[i + 1..] {
            best = best.max((a - b).norm_squared());
        }
    }
    best.sqrt()
}

/// Largest inscribed disk by a dense simplex on `max ρ` subject to
/// `n_i·(c₀ + z) + ρ ≤ a_i`, with `z = z⁺ − z⁻` and the interior point `c₀`
/// making the origin a feasible basis.
fn polygon_chebyshev(normals: &[Direction], offsets: &[f64], origin: Point) -> Option<(Point, f64)> {
    let m = normals.len();
    let cols = 5 + m;
    let width = cols + 1;
    let mut tab = vec![0.0; (m + 1) * width];
    for (i, (n, &a)) in normals.iter().zip(offsets).enumerate() {
        let row = &mut tab[i * width..(i + 1) * width];
        row[..5].copy_from_slice(&[n.x(), -n.x(), n.y(), -n.y(), 1.0]);
        row[5 + i] = 1.0;
        row[cols] = (a - n.as_point().dot(origin)).max(0.0);
    }
    // Objective row holds reduced costs of `−ρ`.
    tab[m * width + 4] = -1.0;
    let mut basis: Vec<usize> = (5..cols).collect();
    for _ in 0..50 * (m + 5) {
        // Bland's rule: lowest-index improving column, lowest-index tie on the ratio test.
        let obj = &tab[m * width..(m + 1) * width];
        let Some(enter) = (0..cols).find(|&j| obj[j] < -1e-13) else {
            let mut z = [0.0; 5];
            for (i, &b) in basis.iter().enumerate() {
                if b < 5 {
                    z[b] = tab[i * width + cols];
                }
            }
            return Some((origin + Point::new(z[0] - z[1], z[2] - z[3]), z[4]));
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab[i * width + enter];
            if a > 1e-13 {
                let ratio = tab[i * width + cols] / a;
                match leave {
                    Some((k, r)) if ratio > r || (ratio == r && basis[i] > basis[k]) => {}
                    _ => leave = Some((i, ratio)),
                }
            }
        }
        let (p, _) = leave?;
        let pivot = tab[p * width + enter];
        for v in &mut tab[p * width..(p + 1) * width] {
            *v /= pivot;
        }
        let prow: Vec<f64> = tab[p * width..(p + 1) * width].to_vec();
        for i in 0..=m {
            if i == p {
                continue;
            }
            let f = tab[i * width + enter];
            if f != 0.0 {
                for (v, &q) in tab[i * width..(i + 1) * width].iter_mut().zip(&prow) {
                    *v -= f * q;
                }
            }
        }
        basis[p] = enter;
    }
    None
}

/// Removes duplicates and collinear vertices, fixes counter-clockwise
/// orientation, and rejects non-convex or degenerate input.
fn normalize_polygon(raw: &[Point]) -> Result<Vec<Point>> {
    if raw.iter().any(|p| !p.is_finite()) {
        return Err(Error::Degenerate("non-finite vertex".into()));
    }
    if raw.len() < 3 {
        return Err(Error::Degenerate(format!("need at least 3 vertices, got {}", raw.len())));
    }
    let scale = polygon_diameter(raw);
    if scale <= 0.0 {
        return Err(Error::Degenerate("all vertices coincide".into()));
    }
    let dup_tol = 1e-12 * scale;

    let mut pts: Vec<Point> = Vec::with_capacity(raw.len());
    for &p in raw {
        if pts.last().is_none_or(|&q: &Point| (p - q).norm() > dup_tol) {
            pts.push(p);
        }
    }
    while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= dup_tol {
        pts.pop();
    }

    if polygon_area(&pts) < 0.0 {
        pts.reverse();
    }

    // Drop collinear vertices until none remain.
    let col_tol = 1e-12 * scale * scale;
    loop {
        let n = pts.len();
        if n < 3 {
            return Err(Error::Degenerate("fewer than 3 non-collinear vertices".into()));
        }
        let idx = (0..n).find(|&i| {
            let prev = pts[(i + n - 1) % n];
            let next = pts[(i + 1) % n];
            let turn = (pts[i] - prev).cross(next - pts[i]);
            turn.abs() <= col_tol && (pts[i] - prev).dot(next - pts[i]) >= 0.0
        });
        match idx {
            Some(i) => {
                pts.remove(i);
            }
            None => break,
        }
    }

    let n = pts.len();
    let mut turning = 0.0;
    for i in 0..n {
        let prev = pts[(i + n - 1) % n];
        let next = pts[(i + 1) % n];
        let e0 = pts[i] - prev;
        let e1 = next - pts[i];
        let turn = e0.cross(e1);
        if turn <= col_tol {
            return Err(Error::NonConvex(format!(
                "vertex {i} at ({}, {}) is reflex or a spike",
                pts[i].x, pts[i].y
            )));
        }
        turning += turn.atan2(e0.dot(e1));
    }
    if (turning - 2.0 * PI).abs() > 1e-6 {
        return Err(Error::NonConvex(format!(
            "boundary winds {:.3} turns; polygon is self-intersecting",
            turning / (2.0 * PI)
        )));
    }
    if polygon_area(&pts) <= col_tol {
        return Err(Error::Degenerate("polygon has empty interior".into()));
    }
    Ok(pts)
}
