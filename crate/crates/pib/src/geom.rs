//! Small planar-geometry toolkit used by the mesher and the lint rules.
//!
//! Coordinates are millimetres throughout. Nothing here is exact computational
//! geometry; f64 predicates are plenty for copper features whose engineering
//! tolerances are tenths of millimetres.

use serde::{Deserialize, Serialize};

/// A point in board coordinates (mm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Number of vertices used when a circle or a segment end cap is flattened
/// into a polygon for clearance arithmetic.
pub const CAP_VERTICES: usize = 16;

/// Distance from `p` to the segment `a`-`b` (zero on the segment).
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Projection parameter of `p` onto the infinite line through `a`-`b`,
/// unclamped (0 at `a`, 1 at `b`).
pub fn project_on_segment(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return 0.0;
    }
    ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// True if segments `a`-`b` and `c`-`d` intersect (including touching).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    // Collinear / endpoint-touching cases fall back to distance checks.
    segment_segment_distance(a, b, c, d) == 0.0
        || point_segment_distance(a, c, d) == 0.0
        || point_segment_distance(b, c, d) == 0.0
        || point_segment_distance(c, a, b) == 0.0
        || point_segment_distance(d, a, b) == 0.0
}

/// Minimum distance between segments `a`-`b` and `c`-`d`.
pub fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Even-odd test for `p` inside the polygon `poly` (boundary counts as in).
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (pi, pj) = (poly[i], poly[j]);
        if point_segment_distance(p, pi, pj) < 1e-12 {
            return true;
        }
        if (pi.y > p.y) != (pj.y > p.y) {
            let x_cross = pi.x + (p.y - pi.y) / (pj.y - pi.y) * (pj.x - pi.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// True if two polygons overlap: any edge pair crosses, or either contains a
/// vertex of the other.
pub fn polygons_intersect(a: &[Point], b: &[Point]) -> bool {
    if a.len() < 3 || b.len() < 3 {
        return false;
    }
    for i in 0..a.len() {
        let (a1, a2) = (a[i], a[(i + 1) % a.len()]);
        for j in 0..b.len() {
            let (b1, b2) = (b[j], b[(j + 1) % b.len()]);
            if segments_intersect(a1, a2, b1, b2) {
                return true;
            }
        }
    }
    point_in_polygon(a[0], b) || point_in_polygon(b[0], a)
}

/// Minimum distance between two polygon outlines; zero when they overlap.
pub fn polygon_distance(a: &[Point], b: &[Point]) -> f64 {
    if polygons_intersect(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        let (a1, a2) = (a[i], a[(i + 1) % a.len()]);
        for j in 0..b.len() {
            let (b1, b2) = (b[j], b[(j + 1) % b.len()]);
            best = best.min(segment_segment_distance(a1, a2, b1, b2));
        }
    }
    best
}

/// Circle flattened to a regular polygon with [`CAP_VERTICES`] vertices.
///
/// The polygon is inscribed, so it under-reports the copper by at most
/// `r * (1 - cos(pi/16))`, about 2 % of the radius — noise next to the 0.15 mm
/// clearances it is compared against.
pub fn circle_outline(center: Point, radius: f64) -> Vec<Point> {
    (0..CAP_VERTICES)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / CAP_VERTICES as f64;
            Point::new(center.x + radius * theta.cos(), center.y + radius * theta.sin())
        })
        .collect()
}

/// Axis-aligned rectangle outline from center and full side lengths.
pub fn rect_outline(center: Point, w: f64, h: f64) -> Vec<Point> {
    vec![
        Point::new(center.x - w / 2.0, center.y - h / 2.0),
        Point::new(center.x + w / 2.0, center.y - h / 2.0),
        Point::new(center.x + w / 2.0, center.y + h / 2.0),
        Point::new(center.x - w / 2.0, center.y + h / 2.0),
    ]
}

/// Stroked-segment outline: a rectangle along the axis plus semicircular end
/// caps, each cap flattened to half of [`CAP_VERTICES`] arc steps.
pub fn capsule_outline(a: Point, b: Point, width: f64) -> Vec<Point> {
    let r = width / 2.0;
    if a.distance(b) == 0.0 {
        return circle_outline(a, r);
    }
    let axis = (b.y - a.y).atan2(b.x - a.x);
    let half = CAP_VERTICES / 2;
    let mut pts = Vec::with_capacity(CAP_VERTICES + 2);
    // Cap around `b`: sweep from axis-90° to axis+90°.
    for k in 0..=half {
        let theta = axis - std::f64::consts::FRAC_PI_2
            + std::f64::consts::PI * k as f64 / half as f64;
        pts.push(Point::new(b.x + r * theta.cos(), b.y + r * theta.sin()));
    }
    // Cap around `a`: sweep the opposite half.
    for k in 0..=half {
        let theta = axis + std::f64::consts::FRAC_PI_2
            + std::f64::consts::PI * k as f64 / half as f64;
        pts.push(Point::new(a.x + r * theta.cos(), a.y + r * theta.sin()));
    }
    pts
}

/// Expand a polygon radially from its centroid by `margin`. Adequate for the
/// convex outlines produced in this module; not a true Minkowski offset.
pub fn expand_outline(poly: &[Point], margin: f64) -> Vec<Point> {
    let n = poly.len() as f64;
    let cx = poly.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = poly.iter().map(|p| p.y).sum::<f64>() / n;
    poly.iter()
        .map(|p| {
            let (dx, dy) = (p.x - cx, p.y - cy);
            let len = (dx * dx + dy * dy).sqrt();
            if len == 0.0 {
                *p
            } else {
                let scale = (len + margin) / len;
                Point::new(cx + dx * scale, cy + dy * scale)
            }
        })
        .collect()
}

/// True if fewer than three vertices, or all vertices are collinear.
pub fn polygon_is_degenerate(poly: &[Point]) -> bool {
    if poly.len() < 3 {
        return true;
    }
    let (a, b) = (poly[0], poly[1]);
    poly[2..].iter().all(|&c| orient(a, b, c).abs() < 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_segment_basic() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(10.0, 0.0);
        assert_eq!(point_segment_distance(Point::new(5.0, 3.0), a, b), 3.0);
        // Beyond the end, distance is to the endpoint.
        assert!((point_segment_distance(Point::new(13.0, 4.0), a, b) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn segment_distance_crossing_is_zero() {
        let d = segment_segment_distance(
            Point::new(0.0, 0.0),
            Point::new(10.0, 10.0),
            Point::new(0.0, 10.0),
            Point::new(10.0, 0.0),
        );
        assert_eq!(d, 0.0);
    }

    #[test]
    fn segment_distance_parallel() {
        let d = segment_segment_distance(
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(0.0, 2.0),
            Point::new(10.0, 2.0),
        );
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn point_in_square() {
        let sq = rect_outline(Point::new(0.0, 0.0), 2.0, 2.0);
        assert!(point_in_polygon(Point::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(Point::new(1.5, 0.0), &sq));
        // boundary counts as inside
        assert!(point_in_polygon(Point::new(1.0, 0.0), &sq));
    }

    #[test]
    fn polygon_distance_separated_squares() {
        let a = rect_outline(Point::new(0.0, 0.0), 2.0, 2.0);
        let b = rect_outline(Point::new(5.0, 0.0), 2.0, 2.0);
        assert!((polygon_distance(&a, &b) - 3.0).abs() < 1e-12);
        assert_eq!(polygon_distance(&a, &a), 0.0);
    }

    #[test]
    fn nested_polygons_intersect() {
        let outer = rect_outline(Point::new(0.0, 0.0), 10.0, 10.0);
        let inner = rect_outline(Point::new(0.0, 0.0), 1.0, 1.0);
        assert!(polygons_intersect(&outer, &inner));
        assert_eq!(polygon_distance(&outer, &inner), 0.0);
    }

    #[test]
    fn capsule_has_expected_extent() {
        let outline = capsule_outline(Point::new(0.0, 0.0), Point::new(10.0, 0.0), 1.0);
        let max_x = outline.iter().map(|p| p.x).fold(f64::MIN, f64::max);
        let min_x = outline.iter().map(|p| p.x).fold(f64::MAX, f64::min);
        let max_y = outline.iter().map(|p| p.y).fold(f64::MIN, f64::max);
        assert!((max_x - 10.5).abs() < 1e-9);
        assert!((min_x + 0.5).abs() < 1e-9);
        assert!((max_y - 0.5).abs() < 1e-9);
    }

    #[test]
    fn degenerate_polygons() {
        assert!(polygon_is_degenerate(&[Point::new(0.0, 0.0), Point::new(1.0, 0.0)]));
        assert!(polygon_is_degenerate(&[
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(2.0, 2.0),
        ]));
        assert!(!polygon_is_degenerate(&rect_outline(Point::new(0.0, 0.0), 1.0, 1.0)));
    }

    #[test]
    fn expand_square_grows_distance() {
        let a = rect_outline(Point::new(0.0, 0.0), 2.0, 2.0);
        let grown = expand_outline(&a, 0.5);
        // Corner moves out along the diagonal by the margin.
        let corner = grown[2];
        let d = (corner.x.powi(2) + corner.y.powi(2)).sqrt();
        assert!((d - (2.0f64.sqrt() + 0.5)).abs() < 1e-9);
    }
}
