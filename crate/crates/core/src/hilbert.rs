//! Gauge `m(p, q)`, Hilbert distance and Thompson distance on convex domains.
//!
//! `m(p, q)` is the least `λ` with `Ω − q ⊂ λ (Ω − p)`. It equals
//! `|r − q| / |r − p|`, where `r` is the boundary point hit by the ray from
//! `p` pointing away from `q`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConvexDomain, Direction, DomainKind, Point};

/// Below this separation (relative to the diameter) distances use the
/// first-order expansion.
pub const NEAR_COINCIDENT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricSample {
    pub p: Point,
    pub q: Point,
    pub m_pq: f64,
    pub m_qp: f64,
    pub d_hilbert: f64,
    pub d_thompson: f64,
    /// Set when the points were too close for the exact formula.
    pub first_order: bool,
}

fn check_interior(domain: &ConvexDomain, p: Point) -> Result<()> {
    if domain.is_interior(p) {
        Ok(())
    } else {
        Err(Error::NotInterior { x: p.x, y: p.y })
    }
}

/// `log m(p, q)`, accurate also when the two points are close.
pub fn log_gauge(domain: &ConvexDomain, p: Point, q: Point) -> Result<f64> {
    check_interior(domain, p)?;
    check_interior(domain, q)?;
    let Some(dir) = Direction::new(p - q) else {
        return Ok(0.0);
    };
    let (_, t) = domain.ray_exit(p, dir)?;
    Ok(((p - q).norm() / t).ln_1p())
}

pub fn gauge_m(domain: &ConvexDomain, p: Point, q: Point) -> Result<f64> {
    check_interior(domain, p)?;
    check_interior(domain, q)?;
    if p == q {
        return Ok(1.0);
    }
    let d = p - q;
    let (_, t) = domain.ray_exit(p, Direction::new(d).expect("p != q"))?;
    Ok((t + d.norm()) / t)
}

/// Support-function form of the gauge:
/// `max_ν (α₊(ν) − q·ν) / (α₊(ν) − p·ν)`.
///
/// Polygons use their face normals, where the maximum is attained exactly.
/// Curved domains sample `n_dirs` uniform angles (plus any straight-edge
/// normals), which approaches the gauge from below.
pub fn gauge_m_oracle(domain: &ConvexDomain, p: Point, q: Point, n_dirs: usize) -> Result<f64> {
    check_interior(domain, p)?;
    check_interior(domain, q)?;
    if p == q {
        return Ok(1.0);
    }
    let ratio = |nu: Direction| {
        let h = domain.support(nu);
        (h - nu.dot(q)) / (h - nu.dot(p))
    };
    let best = match domain.kind() {
        DomainKind::Polygon => domain
            .face_normals()
            .iter()
            .map(|&nu| ratio(nu))
            .fold(f64::NEG_INFINITY, f64::max),
        DomainKind::Disk { .. } | DomainKind::Sector { .. } => {
            let n = n_dirs.max(1);
            let mut best = (0..n)
                .map(|k| ratio(Direction::from_angle(2.0 * std::f64::consts::PI * k as f64 / n as f64)))
                .fold(f64::NEG_INFINITY, f64::max);
            if let DomainKind::Sector { aperture, .. } = domain.kind() {
                best = best
                    .max(ratio(Direction::from_angle(-0.5 * std::f64::consts::PI)))
                    .max(ratio(Direction::from_angle(aperture + 0.5 * std::f64::consts::PI)));
            }
            best
        }
    };
    Ok(best)
}

pub fn metric_sample(domain: &ConvexDomain, p: Point, q: Point) -> Result<MetricSample> {
    check_interior(domain, p)?;
    check_interior(domain, q)?;
    let sep = (p - q).norm();
    if sep == 0.0 {
        return Ok(MetricSample { p, q, m_pq: 1.0, m_qp: 1.0, d_hilbert: 0.0, d_thompson: 0.0, first_order: false });
    }
    let dir = Direction::new(p - q).expect("distinct points");
    let (_, t_p) = domain.ray_exit(p, dir)?;
    let (_, t_q) = domain.ray_exit(q, -dir)?;
    let first_order = sep < NEAR_COINCIDENT * domain.diameter();
    let (log_pq, log_qp) = if first_order {
        (sep / t_p, sep / t_q)
    } else {
        ((sep / t_p).ln_1p(), (sep / t_q).ln_1p())
    };
    Ok(MetricSample {
        p,
        q,
        m_pq: 1.0 + sep / t_p,
        m_qp: 1.0 + sep / t_q,
        d_hilbert: log_pq + log_qp,
        d_thompson: log_pq.max(log_qp),
        first_order,
    })
}

pub fn hilbert_distance(domain: &ConvexDomain, p: Point, q: Point) -> Result<f64> {
    Ok(metric_sample(domain, p, q)?.d_hilbert)
}

pub fn thompson_distance(domain: &ConvexDomain, p: Point, q: Point) -> Result<f64> {
    Ok(metric_sample(domain, p, q)?.d_thompson)
}

/// Hilbert distance of the open unit disk in closed form:
/// `2 log(1 − x·y + √(|y−x|² − |x∧y|²)) − log((1−|x|²)(1−|y|²))`.
pub fn disk_hilbert_closed_form(x: Point, y: Point) -> Result<f64> {
    for p in [x, y] {
        if !(p.norm() < 1.0) {
            return Err(Error::NotInterior { x: p.x, y: p.y });
        }
    }
    let d2 = (y - x).norm_squared();
    let w = x.cross(y);
    let root = (d2 - w * w).max(0.0).sqrt();
    let one_minus = |p: Point| (1.0 - p.norm()) * (1.0 + p.norm());
    Ok(2.0 * (1.0 - x.dot(y) + root).ln() - (one_minus(x) * one_minus(y)).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn disk_gauges() {
        let disk = ConvexDomain::unit_disk();
        let o = Point::ORIGIN;
        let h = Point::new(0.5, 0.0);
        assert_abs_diff_eq!(gauge_m(&disk, o, h).unwrap(), 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(gauge_m(&disk, h, o).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(gauge_m(&disk, h, h).unwrap(), 1.0);
        assert_abs_diff_eq!(hilbert_distance(&disk, o, h).unwrap(), 3f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(thompson_distance(&disk, o, h).unwrap(), 2f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(disk_hilbert_closed_form(o, h).unwrap(), 3f64.ln(), epsilon = 1e-14);
        assert_eq!(hilbert_distance(&disk, h, h).unwrap(), 0.0);
    }

    #[test]
    fn square_gauges() {
        let sq = ConvexDomain::unit_square();
        let p = Point::new(0.5, 0.5);
        let q = Point::new(0.75, 0.5);
        // Face ratios for normals +x, -x, +y, -y.
        let by_hand: f64 = [0.25 / 0.5, 0.75 / 0.5, 0.5 / 0.5, 0.5 / 0.5].into_iter().fold(0.0, f64::max);
        assert_abs_diff_eq!(gauge_m_oracle(&sq, p, q, 64).unwrap(), by_hand, epsilon = 1e-15);
        assert_abs_diff_eq!(gauge_m(&sq, p, q).unwrap(), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(hilbert_distance(&sq, p, q).unwrap(), 3f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn disk_oracle_from_below() {
        let disk = ConvexDomain::unit_disk();
        let poly = ConvexDomain::regular_ngon(1024, Point::ORIGIN, 1.0).unwrap();
        let (o, h) = (Point::ORIGIN, Point::new(0.5, 0.0));
        assert_abs_diff_eq!(gauge_m_oracle(&poly, o, h, 64).unwrap(), 1.5, epsilon = 1e-4);
        let coarse = gauge_m_oracle(&disk, Point::new(0.1, 0.2), Point::new(-0.3, 0.4), 64).unwrap();
        let fine = gauge_m_oracle(&disk, Point::new(0.1, 0.2), Point::new(-0.3, 0.4), 4096).unwrap();
        let exact = gauge_m(&disk, Point::new(0.1, 0.2), Point::new(-0.3, 0.4)).unwrap();
        assert!(coarse <= fine + 1e-15 && fine <= exact + 1e-12);
        assert!((fine - exact).abs() < 1e-5);
    }

    #[test]
    fn close_points_use_expansion() {
        let sq = ConvexDomain::unit_square();
        let p = Point::new(0.5, 0.5);
        let q = Point::new(0.5 + 1e-14, 0.5);
        let s = metric_sample(&sq, p, q).unwrap();
        assert!(s.first_order);
        assert_abs_diff_eq!(s.d_hilbert, (q.x - p.x) * (2.0 + 2.0), epsilon = 1e-24);
    }

    #[test]
    fn closed_form_matches_fine_polygon() {
        let poly = ConvexDomain::regular_ngon(4096, Point::ORIGIN, 1.0).unwrap();
        let x = Point::new(0.3, 0.2);
        let y = Point::new(-0.1, 0.4);
        let d = hilbert_distance(&poly, x, y).unwrap();
        assert_abs_diff_eq!(d, disk_hilbert_closed_form(x, y).unwrap(), epsilon = 1e-5);
    }

    #[test]
    fn rejects_exterior() {
        let sq = ConvexDomain::unit_square();
        assert!(gauge_m(&sq, Point::new(0.5, 0.5), Point::new(1.5, 0.5)).is_err());
        assert!(disk_hilbert_closed_form(Point::new(1.0, 0.0), Point::ORIGIN).is_err());
    }
}
