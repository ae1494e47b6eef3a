//! Planar convex hull (Andrew's monotone chain).

use crate::Point;

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Counterclockwise hull of the `(x, y)` coordinates of `points`, without
/// collinear vertices. Degenerate inputs return the distinct extreme points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Hull vertices together with `per_edge` evenly spaced interior points of
/// every hull edge.
pub fn hull_probe_points(hull: &[Point], per_edge: usize) -> Vec<Point> {
    let mut out = hull.to_vec();
    if hull.len() < 2 {
        return out;
    }
    for (i, a) in hull.iter().enumerate() {
        let b = hull[(i + 1) % hull.len()];
        for k in 1..=per_edge {
            let f = k as f64 / (per_edge + 1) as f64;
            out.push(a + (b - a) * f);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_interior_and_collinear_points() {
        let pts = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.5, 0.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.3, 0.6, 0.0),
        ];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert_eq!(h[0], Point::new(0.0, 0.0, 0.0));
        // Counterclockwise orientation: positive signed area.
        let area: f64 = (0..h.len())
            .map(|i| {
                let (a, b) = (h[i], h[(i + 1) % h.len()]);
                a.x * b.y - b.x * a.y
            })
            .sum();
        assert!((area / 2.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn probes_include_midpoints() {
        let h = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(2.0, 0.0, 0.0),
            Point::new(0.0, 2.0, 0.0),
        ];
        let probes = hull_probe_points(&h, 1);
        assert_eq!(probes.len(), 6);
        assert!(probes.contains(&Point::new(1.0, 1.0, 0.0)));
    }
}
