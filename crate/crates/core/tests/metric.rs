use hbvp::hilbert::{disk_hilbert_closed_form, gauge_m, gauge_m_oracle, hilbert_distance, log_gauge, thompson_distance};
use hbvp::{ConvexDomain, Error, Point};
use proptest::prelude::*;

fn hexagon() -> ConvexDomain {
    ConvexDomain::polygon([[0.0, 0.0], [2.0, 0.0], [3.0, 1.0], [2.5, 2.5], [0.5, 2.0], [-0.5, 1.0]]).unwrap()
}

/// Maps the unit square to a point of `domain` by barycentric mixing of vertices.
fn interior(domain: &ConvexDomain, s: f64, t: f64) -> Point {
    let v = domain.vertices();
    let n = v.len();
    let (cx, cy) = v.iter().fold((0.0, 0.0), |(x, y), p| (x + p.x / n as f64, y + p.y / n as f64));
    let c = Point::new(cx, cy);
    let k = ((s * n as f64) as usize).min(n - 1);
    let edge = v[k].lerp(v[(k + 1) % n], s * n as f64 - k as f64);
    c.lerp(edge, 0.95 * t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_is_a_metric(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64,
                            d in 0.0..1.0f64, e in 0.0..1.0f64, f in 0.0..1.0f64) {
        let dom = hexagon();
        let (x, y, z) = (interior(&dom, a, b), interior(&dom, c, d), interior(&dom, e, f));
        let dxy = hilbert_distance(&dom, x, y).unwrap();
        let dyx = hilbert_distance(&dom, y, x).unwrap();
        let dxz = hilbert_distance(&dom, x, z).unwrap();
        let dzy = hilbert_distance(&dom, z, y).unwrap();
        prop_assert!(dxy >= 0.0);
        prop_assert!((dxy - dyx).abs() <= 1e-12 * dxy.max(1.0));
        prop_assert!(dxy <= dxz + dzy + 1e-9);
    }

    #[test]
    fn gauge_matches_oracle(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, d in 0.0..1.0f64) {
        let dom = hexagon();
        let (p, q) = (interior(&dom, a, b), interior(&dom, c, d));
        let m = gauge_m(&dom, p, q).unwrap();
        let o = gauge_m_oracle(&dom, p, q, 0).unwrap();
        prop_assert!((m - o).abs() <= 1e-9 * o, "{} vs {}", m, o);
        prop_assert!(m >= 1.0);
    }

    #[test]
    fn thompson_is_within_hilbert_bounds(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, d in 0.0..1.0f64) {
        let dom = hexagon();
        let (p, q) = (interior(&dom, a, b), interior(&dom, c, d));
        let dh = hilbert_distance(&dom, p, q).unwrap();
        let dt = thompson_distance(&dom, p, q).unwrap();
        prop_assert!(dt <= dh + 1e-12);
        prop_assert!(dh <= 2.0 * dt + 1e-12);
        let sum = log_gauge(&dom, p, q).unwrap() + log_gauge(&dom, q, p).unwrap();
        prop_assert!((sum - dh).abs() <= 1e-9 * dh.max(1.0));
    }

    #[test]
    fn affine_invariance(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, d in 0.0..1.0f64,
                         m00 in 0.5..2.0f64, m01 in -0.5..0.5f64, m10 in -0.5..0.5f64, m11 in 0.5..2.0f64) {
        let dom = hexagon();
        let m = [[m00, m01], [m10, m11]];
        let shift = Point::new(0.3, -1.2);
        let img = dom.affine_image(m, shift).unwrap();
        let map = |p: Point| Point::new(m00 * p.x + m01 * p.y + shift.x, m10 * p.x + m11 * p.y + shift.y);
        let (p, q) = (interior(&dom, a, b), interior(&dom, c, d));
        let before = hilbert_distance(&dom, p, q).unwrap();
        let after = hilbert_distance(&img, map(p), map(q)).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * before.max(1.0));
    }
}

#[test]
fn disk_distance_matches_closed_form_and_polygon() {
    let fine = ConvexDomain::regular_ngon(4096, Point::new(0.0, 0.0), 1.0).unwrap();
    let disk = ConvexDomain::unit_disk();
    let (x, y) = (Point::new(0.3, -0.4), Point::new(-0.7, 0.2));
    let exact = disk_hilbert_closed_form(x, y).unwrap();
    assert!((hilbert_distance(&disk, x, y).unwrap() - exact).abs() <= 1e-12);
    assert!((hilbert_distance(&fine, x, y).unwrap() - exact).abs() <= 1e-5);
}

#[test]
fn exterior_points_are_rejected() {
    let sq = ConvexDomain::unit_square();
    let err = hilbert_distance(&sq, Point::new(0.5, 0.5), Point::new(1.0, 0.5)).unwrap_err();
    assert!(matches!(err, Error::NotInterior { .. }));
}

#[test]
fn non_convex_input_is_rejected() {
    let err = ConvexDomain::polygon([[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [1.0, 2.0]]).unwrap_err();
    assert!(matches!(err, Error::NonConvex(_)));
    assert!(err.to_string().starts_with("non-convex input"));
}
