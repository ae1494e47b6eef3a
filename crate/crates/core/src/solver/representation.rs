//! Boundary representation check for simulated solutions.
//!
//! For `x` on a smooth part of `∂Ω`,
//!
//! ```text
//! u(x, T+t) = 2 ∫_Ω Φ(x−y, t) u(y, T) dy
//!           − 2 ∫₀ᵗ ∫_∂Ω ∂Φ/∂n(y)(x−y, t−τ) u(y, T+τ) dS dτ
//!           + 2 ∫₀ᵗ ∫_Γ₁ Φ(x−y, t−τ) u^q(y, T+τ) dS dτ.
//! ```
//!
//! The domain term is integrated exactly against the bilinear interpolant
//! of `u(·, T)`. In time, `u` is taken constant on each interval between
//! stored snapshots (the mean of its endpoint values) and the kernel is
//! integrated exactly, so the boundary terms reduce to surface integrals of
//! differences of the closed-form time-integrated kernels.

use serde::Serialize;

use super::{SimResult, Snapshot, SolverError};
use crate::geometry::{Domain, PatchSpec};
use crate::kernel::surface::{integrate_over_planar_patch, BoundaryParam};
use crate::kernel::{double_layer_time_integral, single_layer_time_integral, KernelError};
use crate::special::erf;
use crate::Point;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "T")]
    pub big_t: f64,
    pub t: f64,
    /// `u(x, T+t)` from the grid.
    pub lhs: f64,
    pub rhs: f64,
    pub domain_term: f64,
    pub double_layer_term: f64,
    pub flux_term: f64,
    pub relative_residual: f64,
    pub quadrature_error: f64,
}

/// Evaluates the representation formula at each `(point, (T, t))` pair.
///
/// `result` must carry snapshots covering `[T, T+t]`; points must lie on
/// the rectangle boundary away from its corners.
pub fn representation_residual(
    result: &SimResult,
    sample_points: &[[f64; 2]],
    sample_times: &[(f64, f64)],
    tol: f64,
) -> Result<Vec<ResidualRow>, SolverError> {
    let config = &result.config;
    let mut frames: Vec<&Snapshot> = result.snapshots.iter().collect();
    if frames.last().is_none_or(|s| result.final_state.t > s.t) {
        frames.push(&result.final_state);
    }
    if frames.len() < 2 {
        return Err(SolverError::Config(
            "the representation check needs stored snapshots".into(),
        ));
    }
    let domain = Domain::rectangle(config.lx, config.ly).map_err(KernelError::from)?;
    let full = domain.full_boundary();
    let s = config.gamma1_length;
    let gamma1 = (config.flux_enabled && s > 0.0)
        .then(|| {
            let a = config.gamma1_center - s / 2.0;
            domain.patch(&PatchSpec::Edge {
                edge: 0,
                start: a.max(0.0),
                end: (a + s).min(config.lx),
            })
        })
        .transpose()
        .map_err(KernelError::from)?;
    let q = config.q;
    let corner_gap = 1e-9 * config.lx.max(config.ly);

    let mut rows = Vec::with_capacity(sample_points.len() * sample_times.len());
    for &(big_t, t) in sample_times {
        if !(t > 0.0 && big_t >= 0.0) {
            return Err(SolverError::Config(format!(
                "need T ≥ 0 and t > 0, got ({big_t}, {t})"
            )));
        }
        let end = big_t + t;
        let (first, last) = (frames[0].t, frames[frames.len() - 1].t);
        if big_t < first || end > last * (1.0 + 1e-12) {
            return Err(SolverError::Config(format!(
                "[{big_t}, {end}] is not covered by snapshots on [{first}, {last}]"
            )));
        }
        let mut nodes = vec![field_at(&frames, big_t)];
        nodes.extend(
            frames
                .iter()
                .filter(|f| f.t > big_t && f.t < end)
                .map(|f| (*f).clone()),
        );
        nodes.push(field_at(&frames, end));
        // Remaining time `T + t − τ` at each node, decreasing to zero.
        let lags: Vec<f64> = nodes.iter().map(|f| (end - f.t).max(0.0)).collect();
        let start = &nodes[0];
        let finish = &nodes[nodes.len() - 1];

        for &[px, py] in sample_points {
            check_boundary_point(config.lx, config.ly, px, py, corner_gap)?;
            let x = Point::new(px, py, 0.0);
            let domain_term = 2.0 * domain_convolution(start, px, py, t);
            let layer = |r: f64, dot: f64, p: &BoundaryParam| -> f64 {
                if dot == 0.0 {
                    return 0.0;
                }
                let y = p.point();
                let mut total = 0.0;
                let mut prev_u = nodes[0].value_at(y.x, y.y);
                let mut prev_k = double_layer_time_integral(r, dot, lags[0], 2);
                for k in 1..nodes.len() {
                    let u = nodes[k].value_at(y.x, y.y);
                    let kern = if lags[k] > 0.0 {
                        double_layer_time_integral(r, dot, lags[k], 2)
                    } else {
                        0.0
                    };
                    total += 0.5 * (prev_u + u) * (prev_k - kern);
                    prev_u = u;
                    prev_k = kern;
                }
                total
            };
            let dl = integrate_over_planar_patch(&x, &full, layer, tol)?;
            let (flux_value, flux_err) = match &gamma1 {
                Some(patch) => {
                    let source = |r: f64, _: f64, p: &BoundaryParam| -> f64 {
                        let y = p.point();
                        let mut total = 0.0;
                        let mut prev_u = nodes[0].value_at(y.x, y.y).powf(q);
                        let mut prev_k = single_layer_time_integral(r, lags[0], 2);
                        for k in 1..nodes.len() {
                            let u = nodes[k].value_at(y.x, y.y).powf(q);
                            let kern = if lags[k] > 0.0 {
                                single_layer_time_integral(r, lags[k], 2)
                            } else {
                                0.0
                            };
                            total += 0.5 * (prev_u + u) * (prev_k - kern);
                            prev_u = u;
                            prev_k = kern;
                        }
                        total
                    };
                    let res = integrate_over_planar_patch(&x, patch, source, tol)?;
                    (res.value, res.est_abs_error)
                }
                None => (0.0, 0.0),
            };
            let double_layer_term = -2.0 * dl.value;
            let flux_term = 2.0 * flux_value;
            let rhs = domain_term + double_layer_term + flux_term;
            let lhs = finish.value_at(px, py);
            rows.push(ResidualRow {
                x: px,
                y: py,
                big_t,
                t,
                lhs,
                rhs,
                domain_term,
                double_layer_term,
                flux_term,
                relative_residual: (lhs - rhs).abs() / lhs.abs(),
                quadrature_error: 2.0 * (dl.est_abs_error + flux_err),
            });
        }
    }
    Ok(rows)
}

fn check_boundary_point(lx: f64, ly: f64, x: f64, y: f64, gap: f64) -> Result<(), SolverError> {
    let on_vertical = (x.abs() <= gap || (x - lx).abs() <= gap) && y > gap && y < ly - gap;
    let on_horizontal = (y.abs() <= gap || (y - ly).abs() <= gap) && x > gap && x < lx - gap;
    if on_vertical || on_horizontal {
        Ok(())
    } else {
        Err(SolverError::Config(format!(
            "({x}, {y}) is not a smooth boundary point"
        )))
    }
}

fn field_at(frames: &[&Snapshot], t: f64) -> Snapshot {
    let k = frames.partition_point(|f| f.t <= t);
    match k {
        0 => frames[0].clone(),
        k if k == frames.len() => Snapshot::lerp(frames[k - 1], frames[k - 1], t),
        k => Snapshot::lerp(frames[k - 1], frames[k], t),
    }
}

/// `∫ g(x − y) hat_i(y) dy` over `[0, (n) h]` for every node `i`, with `g`
/// the one-dimensional heat kernel at time `t`.
fn hat_moments(x: f64, n: usize, h: f64, t: f64) -> Vec<f64> {
    let sq = 2.0 * t.sqrt();
    let g = |s: f64| (-s * s / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt();
    // ∫_a^b g(x−y) dy and ∫_a^b (y−x) g(x−y) dy.
    let m0 = |a: f64, b: f64| 0.5 * (erf((x - a) / sq) - erf((x - b) / sq));
    let m1 = |a: f64, b: f64| -2.0 * t * (g(b - x) - g(a - x));
    let reach = 40.0 * t.sqrt() + h;
    (0..=n)
        .map(|i| {
            let yi = i as f64 * h;
            if (yi - x).abs() > reach {
                return 0.0;
            }
            let mut total = 0.0;
            if i > 0 {
                let a = yi - h;
                total += (m1(a, yi) + (x - a) * m0(a, yi)) / h;
            }
            if i < n {
                let b = yi + h;
                total += ((b - x) * m0(yi, b) - m1(yi, b)) / h;
            }
            total
        })
        .collect()
}

/// `∫_Ω Φ(x − y, t) u(y) dy` for the bilinear interpolant of `snap`.
fn domain_convolution(snap: &Snapshot, x: f64, y: f64, t: f64) -> f64 {
    let ax = hat_moments(x, snap.nx, snap.h, t);
    let ay = hat_moments(y, snap.ny, snap.h, t);
    let mut total = 0.0;
    for (j, wy) in ay.iter().enumerate() {
        if *wy == 0.0 {
            continue;
        }
        let row = &snap.values[j * (snap.nx + 1)..(j + 1) * (snap.nx + 1)];
        total += wy * row.iter().zip(&ax).map(|(u, w)| u * w).sum::<f64>();
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_moments_sum_to_the_gaussian_mass() {
        // Hats form a partition of unity, so the moments add up to the
        // heat mass of the interval.
        let (x, n, h, t) = (0.0, 10, 0.1, 0.01);
        let total: f64 = hat_moments(x, n, h, t).iter().sum();
        let expected = 0.5 * erf(1.0 / (2.0 * t.sqrt()));
        assert!((total - expected).abs() < 1e-14, "{total} vs {expected}");
    }

    #[test]
    fn hat_moments_match_direct_quadrature() {
        let (x, n, h, t) = (0.33, 8, 0.125, 0.02);
        let moments = hat_moments(x, n, h, t);
        let g = |s: f64| (-s * s / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt();
        for (i, m) in moments.iter().enumerate() {
            let yi = i as f64 * h;
            let hat = |y: f64| (1.0 - (y - yi).abs() / h).max(0.0);
            // Composite midpoint rule on a fine grid.
            let k = 200_000;
            let dy = 1.0 / k as f64;
            let direct: f64 = (0..k)
                .map(|m| {
                    let y = (m as f64 + 0.5) * dy;
                    g(x - y) * hat(y) * dy
                })
                .sum();
            assert!((m - direct).abs() < 1e-9, "node {i}: {m} vs {direct}");
        }
    }
}
