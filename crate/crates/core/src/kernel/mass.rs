//! Domain heat mass `∫_Ω Φ(x − y, t) dy`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::geometry::{Domain, Shape};
use crate::quad::{integrate_breaks, integrate_toward, Focus, KernelIntegralResult, Tolerance};
use crate::special::{erf, lower_gamma_regularized};
use crate::Point;

use super::{check_time, KernelError};

/// `∫_0^L Φ₁(x − y, t) dy` for the one-dimensional heat kernel.
fn interval_mass(x: f64, len: f64, t: f64) -> f64 {
    let s = 2.0 * t.sqrt();
    0.5 * (erf((len - x) / s) + erf(x / s))
}

/// Parameters `ρ` along the ray `x + ρ e` (`ρ ≥ 0`) inside the disk
/// `|y − c| ≤ radius`.
fn ray_disk(x: &Point, e: &Point, c: &Point, radius: f64) -> Option<(f64, f64)> {
    let w = x - c;
    let b = w.dot(e);
    let disc = b * b - (w.norm_squared() - radius * radius);
    if disc <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let hi = -b + root;
    if hi <= 0.0 {
        return None;
    }
    Some(((-b - root).max(0.0), hi))
}

/// `∫_a^b` of the radial heat profile in the plane: `e^{-a²/4t} − e^{-b²/4t}`.
fn radial_2d(a: f64, b: f64, t: f64) -> f64 {
    let (za, zb) = (a * a / (4.0 * t), b * b / (4.0 * t));
    // e^{-za} − e^{-zb} = e^{-za} (1 − e^{-(zb − za)})
    -(-za).exp() * (-(zb - za)).exp_m1()
}

/// Adaptive evaluation of `∫_Ω Φ(x − y, t) dy` with absolute accuracy `tol`.
///
/// Rectangles and boxes use the exact product of error functions. Planar
/// curved shapes integrate the closed-form radial profile over the
/// direction angle about `x`; the ball integrates the regularized lower
/// incomplete gamma `P(3/2, ρ²/4t)` over the polar angle about `x`.
pub fn domain_heat_mass(
    x: &Point,
    t: f64,
    domain: &Domain,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError> {
    check_time(t)?;
    let exact = |value: f64| KernelIntegralResult {
        value,
        est_abs_error: 4.0 * f64::EPSILON * value.abs(),
        nodes_used: 1,
        refinement_levels: 0,
    };
    match domain.shape() {
        Shape::Rectangle { lx, ly } => {
            Ok(exact(interval_mass(x.x, lx, t) * interval_mass(x.y, ly, t)))
        }
        Shape::Box { lx, ly, lz } => Ok(exact(
            interval_mass(x.x, lx, t) * interval_mass(x.y, ly, t) * interval_mass(x.z, lz, t),
        )),
        Shape::Disk { radius } => planar_mass(x, t, radius, None, tol),
        Shape::NotchedDisk {
            radius,
            angle,
            depth,
        } => {
            let c = Point::new(radius * angle.cos(), radius * angle.sin(), 0.0);
            planar_mass(x, t, radius, Some((c, depth)), tol)
        }
        Shape::Ball { radius } => ball_mass(x, t, radius, tol),
    }
}

fn planar_mass(
    x: &Point,
    t: f64,
    radius: f64,
    bite: Option<(Point, f64)>,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError> {
    let origin = Point::zeros();
    let f = |theta: f64| {
        let e = Point::new(theta.cos(), theta.sin(), 0.0);
        let Some((a, b)) = ray_disk(x, &e, &origin, radius) else {
            return 0.0;
        };
        let mut total = radial_2d(a, b, t);
        if let Some((c, rho)) = bite {
            if let Some((p, q)) = ray_disk(x, &e, &c, rho) {
                let (lo, hi) = (p.max(a), q.min(b));
                if hi > lo {
                    total -= radial_2d(lo, hi, t);
                }
            }
        }
        total / TAU
    };
    // Directions where a ray becomes tangent to one of the circles.
    let mut breaks = Vec::new();
    let mut circles = vec![(origin, radius)];
    if let Some(b) = bite {
        circles.push(b);
    }
    for (c, r) in circles {
        let w = c - x;
        let dist = w.norm();
        if dist == 0.0 {
            continue;
        }
        let base = w.y.atan2(w.x);
        let spread = if dist >= r {
            (r / dist).asin()
        } else {
            FRAC_PI_2
        };
        breaks.extend([
            base + spread,
            base - spread,
            base + FRAC_PI_2,
            base - FRAC_PI_2,
        ]);
    }
    let start = breaks.first().copied().unwrap_or(0.0);
    let mut pts: Vec<f64> = breaks
        .iter()
        .map(|b| start + (b - start).rem_euclid(TAU))
        .collect();
    pts.push(start);
    pts.push(start + TAU);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    Ok(integrate_breaks(f, &pts, &Tolerance::absolute(tol))?)
}

fn ball_mass(
    x: &Point,
    t: f64,
    radius: f64,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError> {
    let rx = x.norm().min(radius);
    let f = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let rho = -rx * c + (radius * radius - rx * rx * s * s).max(0.0).sqrt();
        0.5 * lower_gamma_regularized(1.5, rho * rho / (4.0 * t)) * s
    };
    // The exit distance is smallest, and for boundary points vanishes, on the
    // outward hemisphere; refine toward the equator where it switches on.
    let sub = Tolerance::absolute(tol / 2.0);
    let a = integrate_toward(f, 0.0, FRAC_PI_2, Focus::End, &sub)?;
    let b = integrate_toward(f, FRAC_PI_2, PI, Focus::Start, &sub)?;
    Ok(a + b)
}
