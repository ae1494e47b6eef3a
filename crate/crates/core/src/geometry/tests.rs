use super::*;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn weights_sum(p: &BoundaryPatch, n: usize) -> f64 {
    p.quadrature_nodes(n)
        .unwrap()
        .iter()
        .map(|q| q.weight)
        .sum()
}

#[test]
fn full_circle_and_empty_arc_areas() {
    let disk = Domain::disk(1.0).unwrap();
    assert_relative_eq!(disk.full_boundary().area(), TAU, epsilon = 1e-15);
    let empty = disk
        .patch(&PatchSpec::Arc {
            center: 1.0,
            width: 0.0,
        })
        .unwrap();
    assert_eq!(empty.area(), 0.0);
    let sphere = Domain::ball(1.0).unwrap();
    let cap = sphere.patch(&PatchSpec::Cap { half_angle: PI }).unwrap();
    assert_relative_eq!(cap.area(), 4.0 * PI, epsilon = 1e-14);
}

#[test]
fn invalid_shapes_are_rejected() {
    assert!(Domain::disk(0.0).is_err());
    assert!(Domain::rectangle(1.0, -2.0).is_err());
    assert!(Domain::notched_disk(1.0, 0.0, 1.0).is_err());
    assert!(Domain::ball(f64::NAN).is_err());
}

#[test]
fn dimension_diameter_and_convexity() {
    let cases = [
        (Domain::rectangle(3.0, 4.0).unwrap(), 2, 5.0, true),
        (Domain::disk(1.5).unwrap(), 2, 3.0, true),
        (Domain::notched_disk(1.0, 0.0, 0.3).unwrap(), 2, 2.0, false),
        (Domain::cuboid(1.0, 2.0, 2.0).unwrap(), 3, 3.0, true),
        (Domain::ball(2.0).unwrap(), 3, 4.0, true),
    ];
    for (d, n, diam, convex) in cases {
        assert_eq!(d.dim(), n);
        assert_relative_eq!(d.diameter(), diam, max_relative = 1e-12);
        assert_eq!(d.is_convex(), convex);
    }
}

#[test]
fn notched_diameter_by_sampling() {
    let dom = Domain::notched_disk(1.0, 0.4, 0.6).unwrap();
    let pts = dom.full_boundary().boundary_samples(2000);
    let mut best: f64 = 0.0;
    for a in &pts {
        for b in pts.iter().step_by(3) {
            best = best.max((a - b).norm());
        }
    }
    assert!((best - dom.diameter()).abs() < 1e-4);
}

#[test]
fn notched_pieces_are_continuous_and_on_both_circles() {
    let dom = Domain::notched_disk(1.0, 0.7, 0.3).unwrap();
    let p = dom.pieces();
    let (l0, l1) = (p[0].length(), p[1].length());
    assert!((p[0].point(l0) - p[1].point(0.0)).norm() < 1e-14);
    assert!((p[1].point(l1) - p[0].point(0.0)).norm() < 1e-14);
    let c = Point::new(0.7f64.cos(), 0.7f64.sin(), 0.0);
    for k in 0..=10 {
        let y = p[1].point(l1 * k as f64 / 10.0);
        assert_relative_eq!((y - c).norm(), 0.3, epsilon = 1e-14);
        assert!(y.norm() <= 1.0 + 1e-14);
        // Normal points toward the bite center.
        assert!(p[1].normal(l1 * k as f64 / 10.0).dot(&(c - y)) > 0.0);
    }
}

#[test]
fn notched_area_against_grid_count() {
    let dom = Domain::notched_disk(1.0, 0.0, 0.5).unwrap();
    let n = 2000;
    let h = 2.0 / n as f64;
    let mut count = 0usize;
    for i in 0..n {
        for j in 0..n {
            let p = Point::new(
                -1.0 + (i as f64 + 0.5) * h,
                -1.0 + (j as f64 + 0.5) * h,
                0.0,
            );
            if dom.contains(&p, 0.0) {
                count += 1;
            }
        }
    }
    assert!((count as f64 * h * h - dom.volume()).abs() < 2e-3);
}

#[test]
fn uniform_circle_rule_and_flat_edge_normals() {
    let disk = Domain::disk(1.0).unwrap();
    let nodes = disk.full_boundary().quadrature_nodes(4).unwrap();
    assert_eq!(nodes.len(), 4);
    for q in &nodes {
        assert_relative_eq!(q.weight, PI / 2.0, epsilon = 1e-15);
    }
    let sq = Domain::rectangle(1.0, 1.0).unwrap();
    let bottom = sq
        .patch(&PatchSpec::Edge {
            edge: 0,
            start: 0.0,
            end: 1.0,
        })
        .unwrap();
    let nodes = bottom.quadrature_nodes(7).unwrap();
    assert_eq!(nodes.len(), 7);
    for q in &nodes {
        assert_eq!(q.normal, Point::new(0.0, -1.0, 0.0));
    }
    assert!(matches!(
        bottom.quadrature_nodes(1),
        Err(GeometryError::Resolution(1))
    ));
}

#[test]
fn cap_weights_sum_to_analytic_area() {
    let ball = Domain::ball(1.0).unwrap();
    for &th in &[0.1, 0.8, 2.0, PI] {
        let cap = ball.patch(&PatchSpec::Cap { half_angle: th }).unwrap();
        let analytic = TAU * (1.0 - th.cos());
        for n in [2, 5, 16] {
            assert_relative_eq!(weights_sum(&cap, n), analytic, max_relative = 1e-8);
        }
    }
}

#[test]
fn nodes_lie_on_boundary_with_unit_normals() {
    let domains = [
        (Domain::disk(1.3).unwrap(), PatchSpec::Full),
        (
            Domain::notched_disk(1.0, 2.0, 0.4).unwrap(),
            PatchSpec::Full,
        ),
        (Domain::rectangle(2.0, 1.0).unwrap(), PatchSpec::Full),
        (
            Domain::ball(0.7).unwrap(),
            PatchSpec::Zone {
                theta_min: 0.3,
                theta_max: 2.0,
            },
        ),
        (Domain::cuboid(1.0, 2.0, 3.0).unwrap(), PatchSpec::Full),
    ];
    for (dom, spec) in domains {
        for q in dom.patch(&spec).unwrap().quadrature_nodes(6).unwrap() {
            assert_relative_eq!(q.normal.norm(), 1.0, epsilon = 1e-12);
            assert!(dom.contains(&q.point, 1e-12));
            assert!(!dom.contains(&(q.point + q.normal * 1e-6), 0.0));
            assert!(dom.contains(&(q.point - q.normal * 1e-6), 0.0));
        }
    }
}

/// Brute-force `[Γ]_d` measure: weight of dense boundary nodes within
/// distance `d` of a dense sample of Γ.
fn brute_neighborhood_measure(dom: &Domain, gamma: &BoundaryPatch, d: f64) -> f64 {
    let gamma_pts = gamma.boundary_samples(4000);
    dom.full_boundary()
        .quadrature_nodes(10_000 / dom.pieces().len())
        .unwrap()
        .iter()
        .filter(|q| gamma_pts.iter().any(|g| (g - q.point).norm() < d))
        .map(|q| q.weight)
        .sum()
}

#[test]
fn disk_arc_neighborhood_matches_brute_force() {
    let disk = Domain::disk(1.0).unwrap();
    let theta = 0.9;
    let arc = disk
        .patch(&PatchSpec::Arc {
            center: 2.5,
            width: theta,
        })
        .unwrap();
    for &d in &[0.05, 0.4, 1.2, 1.99] {
        let nb = arc.neighborhood(d).unwrap();
        let analytic = (theta + 4.0 * (d / 2.0_f64).asin()).min(TAU);
        assert_relative_eq!(nb.area(), analytic, max_relative = 1e-12);
        let brute = brute_neighborhood_measure(&disk, &arc, d);
        assert!(
            (brute - analytic).abs() < 3e-3,
            "d={d}: {brute} vs {analytic}"
        );
    }
    assert_relative_eq!(arc.neighborhood(2.0).unwrap().area(), TAU);
    let full = disk.full_boundary();
    assert_eq!(full.neighborhood(0.1).unwrap().area(), full.area());
}

#[test]
fn rectangle_and_notched_neighborhoods_match_brute_force() {
    let sq = Domain::rectangle(1.0, 1.0).unwrap();
    let e = sq
        .patch(&PatchSpec::Edge {
            edge: 0,
            start: 0.6,
            end: 0.9,
        })
        .unwrap();
    for &d in &[0.05, 0.3, 0.7] {
        let nb = e.neighborhood(d).unwrap();
        let brute = brute_neighborhood_measure(&sq, &e, d);
        assert!(
            (nb.area() - brute).abs() < 2e-3,
            "d={d}: {} vs {brute}",
            nb.area()
        );
    }
    let nd = Domain::notched_disk(1.0, 0.0, 0.3).unwrap();
    let g = nd
        .patch(&PatchSpec::Arc {
            center: 0.6,
            width: 0.4,
        })
        .unwrap();
    for &d in &[0.1, 0.5, 1.0] {
        let nb = g.neighborhood(d).unwrap();
        let brute = brute_neighborhood_measure(&nd, &g, d);
        assert!(
            (nb.area() - brute).abs() < 3e-3,
            "d={d}: {} vs {brute}",
            nb.area()
        );
    }
}

#[test]
fn box_neighborhood_is_unsupported() {
    let b = Domain::cuboid(1.0, 1.0, 1.0).unwrap();
    let f = b
        .patch(&PatchSpec::Face {
            face: 0,
            u: [0.2, 0.4],
            v: [0.2, 0.4],
        })
        .unwrap();
    assert!(matches!(
        f.neighborhood(0.1),
        Err(GeometryError::Unsupported(..))
    ));
    assert_eq!(f.neighborhood(10.0).unwrap().area(), 6.0);
}

#[test]
fn complements_partition_the_boundary() {
    let cases = [
        Domain::disk(1.0)
            .unwrap()
            .patch(&PatchSpec::Arc {
                center: 0.1,
                width: 1.0,
            })
            .unwrap(),
        Domain::notched_disk(1.0, 1.0, 0.5)
            .unwrap()
            .patch(&PatchSpec::Arc {
                center: 3.0,
                width: 2.0,
            })
            .unwrap(),
        Domain::ball(1.0)
            .unwrap()
            .patch(&PatchSpec::Zone {
                theta_min: 0.5,
                theta_max: 1.0,
            })
            .unwrap(),
        Domain::cuboid(1.0, 2.0, 3.0)
            .unwrap()
            .patch(&PatchSpec::Face {
                face: 3,
                u: [0.1, 0.5],
                v: [1.0, 2.0],
            })
            .unwrap(),
    ];
    for p in cases {
        let c = p.complement();
        assert_relative_eq!(
            p.area() + c.area(),
            p.domain().boundary_area(),
            max_relative = 1e-12
        );
        assert_relative_eq!(c.complement().area(), p.area(), max_relative = 1e-12);
    }
}

#[test]
fn sphere_cap_neighborhood_widens_by_chord_angle() {
    let ball = Domain::ball(1.0).unwrap();
    let cap = ball.patch(&PatchSpec::Cap { half_angle: 0.5 }).unwrap();
    let nb = cap.neighborhood(0.2).unwrap();
    let widened = 0.5 + 2.0 * 0.1f64.asin();
    assert_relative_eq!(nb.area(), TAU * (1.0 - widened.cos()), max_relative = 1e-13);
}

#[test]
fn nearest_points() {
    let sq = Domain::rectangle(1.0, 1.0).unwrap();
    let e = sq
        .patch(&PatchSpec::Edge {
            edge: 0,
            start: 0.2,
            end: 0.4,
        })
        .unwrap();
    assert_relative_eq!(e.distance(&Point::new(0.3, 0.5, 0.0)), 0.5);
    assert_relative_eq!(e.distance(&Point::new(0.7, 0.4, 0.0)), 0.5);
    let ball = Domain::ball(1.0).unwrap();
    let z = ball.patch(&PatchSpec::Cap { half_angle: 0.5 }).unwrap();
    assert_relative_eq!(z.distance(&Point::new(0.0, 0.0, 0.3)), 0.7, epsilon = 1e-15);
    let q = Point::new(1.0, 0.0, 0.0);
    assert_relative_eq!(
        z.distance(&q),
        2.0 * ((PI / 2.0 - 0.5) / 2.0).sin(),
        epsilon = 1e-14
    );
}

#[test]
fn convex_domains_have_maximal_radius() {
    for dom in [
        Domain::disk(1.0).unwrap(),
        Domain::rectangle(1.0, 2.0).unwrap(),
        Domain::ball(1.0).unwrap(),
    ] {
        let g = dom.full_boundary();
        assert_eq!(dom.local_convexity_radius(&g), Some(dom.diameter()));
    }
}

#[test]
fn notched_local_convexity_radius() {
    let nd = Domain::notched_disk(1.0, 0.0, 0.3).unwrap();
    let g = nd
        .patch(&PatchSpec::Arc {
            center: PI,
            width: 1.0,
        })
        .unwrap();
    let d = nd
        .local_convexity_radius(&g)
        .expect("opposite arc is locally convex");
    let notch = nd.pieces()[1];
    let dist_to_notch = (0..=1000)
        .map(|k| g.distance(&notch.point(notch.length() * k as f64 / 1000.0)))
        .fold(f64::INFINITY, f64::min);
    assert!(d > 0.0 && d < dist_to_notch, "{d} vs {dist_to_notch}");
    // The next grid value up fails: its hull leaves the domain.
    let up = d * 2f64.powf(0.25);
    let pts = g.neighborhood(up).unwrap().boundary_samples(10_000);
    let h = hull::convex_hull(&pts);
    assert!(hull::hull_probe_points(&h, 15)
        .iter()
        .any(|p| !nd.contains(p, 1e-9)));

    let over = nd
        .patch(&PatchSpec::Arc {
            center: 0.0,
            width: 1.0,
        })
        .unwrap();
    assert_eq!(nd.local_convexity_radius(&over), None);
}

proptest! {
    #[test]
    fn weights_sum_to_area(center in -7.0f64..7.0, width in 0.0f64..7.0, n in 2usize..40) {
        let nd = Domain::notched_disk(1.0, 0.3, 0.4).unwrap();
        let p = nd.patch(&PatchSpec::Arc { center, width }).unwrap();
        let s = weights_sum(&p, n);
        prop_assert!((s - p.area()).abs() <= 1e-8 * p.area().max(1e-300));
        prop_assert!(p.area() <= nd.boundary_area() * (1.0 + 1e-12));
        let q = p.quadrature_nodes(2 * n).unwrap();
        let w1 = p.quadrature_nodes(n).unwrap().iter().map(|q| q.weight).fold(0.0, f64::max);
        let w2 = q.iter().map(|q| q.weight).fold(0.0, f64::max);
        prop_assert!(w2 <= 0.5 * w1 * (1.0 + 1e-12));
    }

    #[test]
    fn neighborhood_is_monotone(start in 0.0f64..0.9, len in 0.0f64..0.1, d1 in 0.01f64..1.0, extra in 0.0f64..0.5) {
        let sq = Domain::rectangle(1.0, 1.0).unwrap();
        let g = sq.patch(&PatchSpec::Edge { edge: 1, start, end: start + len }).unwrap();
        let a = g.neighborhood(d1).unwrap();
        let b = g.neighborhood(d1 + extra).unwrap();
        prop_assert!(a.area() >= g.area());
        prop_assert!(b.area() >= a.area() - 1e-12);
        prop_assert!(b.covers(&a, 1e-9));
    }

    #[test]
    fn zone_neighborhood_is_monotone(a in 0.0f64..3.0, w in 0.0f64..0.5, d1 in 0.01f64..2.0, extra in 0.0f64..1.0) {
        let ball = Domain::ball(1.0).unwrap();
        let g = ball.patch(&PatchSpec::Zone { theta_min: a, theta_max: (a + w).min(PI) }).unwrap();
        let n1 = g.neighborhood(d1).unwrap();
        let n2 = g.neighborhood(d1 + extra).unwrap();
        prop_assert!(n1.area() >= g.area());
        prop_assert!(n2.covers(&n1, 1e-12));
    }
}
