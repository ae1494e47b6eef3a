//! Boundary-time integrals, the half and convex identities, the tail
//! estimate, the Riesz and logarithmic surface integrals, and the
//! rearrangement inequality.

use std::f64::consts::PI;

use crate::geometry::{BoundaryPatch, Domain};
use crate::quad::{integrate_toward, Focus, KernelIntegralResult, Tolerance};
use crate::Point;

use super::mass::domain_heat_mass;
use super::surface::integrate_over_patch;
use super::{check_time, double_layer_time_integral, single_layer_time_integral, KernelError};

/// `I₁ = ∫₀ᵗ ∫_{∂Ω} |∂Φ/∂n(y)| dS dτ`.
pub fn boundary_time_integral_abs_nd(
    x: &Point,
    t: f64,
    domain: &Domain,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError> {
    abs_nd_over(x, t, &domain.full_boundary(), tol)
}

/// `I₂ = ∫₀ᵗ ∫_{∂Ω} ∂Φ/∂n(y) dS dτ`.
pub fn boundary_time_integral_signed_nd(
    x: &Point,
    t: f64,
    domain: &Domain,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError> {
    check_time(t)?;
    let n = domain.dim();
    integrate_over_patch(
        x,
        &domain.full_boundary(),
        |r, dot| double_layer_time_integral(r, dot, t, n),
        tol,
    )
}

/// `I₃ = ∫₀ᵗ ∫_Γ Φ dS dτ`.
pub fn boundary_time_integral_phi(
    x: &Point,
    t: f64,
    patch: &BoundaryPatch,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError> {
    check_time(t)?;
    let n = patch.domain().dim();
    integrate_over_patch(x, patch, |r, _| single_layer_time_integral(r, t, n), tol)
}

fn abs_nd_over(
    x: &Point,
    t: f64,
    patch: &BoundaryPatch,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError> {
    check_time(t)?;
    let n = patch.domain().dim();
    integrate_over_patch(
        x,
        patch,
        |r, dot| double_layer_time_integral(r, dot, t, n).abs(),
        tol,
    )
}

/// Residual of an identity together with the quadrature error it carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub residual: f64,
    pub est_abs_error: f64,
    pub mass: f64,
    pub boundary_term: f64,
}

/// `∫_Ω Φ dy − I₂ − 1/2` for `x ∈ ∂Ω`.
pub fn verify_half_identity(
    x: &Point,
    t: f64,
    domain: &Domain,
    tol: f64,
) -> Result<IdentityResidual, KernelError> {
    let mass = domain_heat_mass(x, t, domain, tol / 2.0)?;
    let i2 = boundary_time_integral_signed_nd(x, t, domain, tol / 2.0)?;
    Ok(IdentityResidual {
        residual: mass.value - i2.value - 0.5,
        est_abs_error: mass.est_abs_error + i2.est_abs_error,
        mass: mass.value,
        boundary_term: i2.value,
    })
}

/// `∫_Ω Φ dy + I₁ − 1/2` for `x ∈ ∂Ω` of a convex domain.
pub fn verify_convex_identity(
    x: &Point,
    t: f64,
    domain: &Domain,
    tol: f64,
) -> Result<IdentityResidual, KernelError> {
    if !domain.is_convex() {
        return Err(KernelError::NotConvex);
    }
    verify_absolute_identity_unchecked(x, t, domain, tol)
}

/// The convex-identity residual without the convexity guard, for
/// demonstrating its failure on non-convex shapes.
pub fn verify_absolute_identity_unchecked(
    x: &Point,
    t: f64,
    domain: &Domain,
    tol: f64,
) -> Result<IdentityResidual, KernelError> {
    let mass = domain_heat_mass(x, t, domain, tol / 2.0)?;
    let i1 = boundary_time_integral_abs_nd(x, t, domain, tol / 2.0)?;
    Ok(IdentityResidual {
        residual: mass.value + i1.value - 0.5,
        est_abs_error: mass.est_abs_error + i1.est_abs_error,
        mass: mass.value,
        boundary_term: i1.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    /// `∫₀ᵗ ∫_{∂Ω ∖ [Γ₁]_d} |∂Φ/∂n| dS dτ`.
    pub lhs: f64,
    /// `t exp(−d²/(8t))`.
    pub rhs_shape: f64,
    pub est_abs_error: f64,
}

impl TailCheck {
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs_shape
        }
    }
}

/// Exponential tail of the double layer away from `[Γ₁]_d`.
pub fn tail_bound_check(
    x: &Point,
    t: f64,
    gamma1: &BoundaryPatch,
    d: f64,
    tol: f64,
) -> Result<TailCheck, KernelError> {
    check_time(t)?;
    let away = gamma1.neighborhood(d)?.complement();
    let lhs = abs_nd_over(x, t, &away, tol)?;
    Ok(TailCheck {
        lhs: lhs.value,
        rhs_shape: t * (-d * d / (8.0 * t)).exp(),
        est_abs_error: lhs.est_abs_error,
    })
}

/// Left side `∫_Ω Φ + I₁` and right side `1/2 + c · t exp(−d²/(8t))` of the
/// perturbed identity for `x` on the closure of `Γ₁`.
pub fn perturbed_identity_check(
    x: &Point,
    t: f64,
    domain: &Domain,
    d: f64,
    c: f64,
    tol: f64,
) -> Result<(f64, f64, f64), KernelError> {
    let r = verify_absolute_identity_unchecked(x, t, domain, tol)?;
    Ok((
        r.mass + r.boundary_term,
        0.5 + c * t * (-d * d / (8.0 * t)).exp(),
        r.est_abs_error,
    ))
}

/// `∫_Γ |x − y|^{−(n−2)} dS(y)`, `n = 3`.
pub fn riesz_surface_integral(
    x: &Point,
    patch: &BoundaryPatch,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError> {
    let n = patch.domain().dim();
    if n < 3 {
        return Err(KernelError::Hypothesis(format!(
            "Riesz surface integral needs n ≥ 3, got n = {n}"
        )));
    }
    integrate_over_patch(x, patch, |r, _| r.powi(-(n as i32 - 2)), tol)
}

/// `∫_Γ ln(d_Ω / |x − y|) dS(y)`, `n = 2`.
pub fn log_surface_integral(
    x: &Point,
    patch: &BoundaryPatch,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError> {
    let domain = patch.domain();
    if domain.dim() != 2 {
        return Err(KernelError::Hypothesis(
            "logarithmic surface integral needs n = 2".into(),
        ));
    }
    if !domain.contains(x, 1e-12 * domain.diameter()) {
        return Err(KernelError::Hypothesis(
            "x must lie in the closed domain".into(),
        ));
    }
    let d = domain.diameter();
    integrate_over_patch(x, patch, |r, _| (d / r).ln(), tol)
}

/// Shape function of `|Γ|` in the critical boundary-time bound:
/// `|Γ|^{1/(n−1)}` for `n ≥ 3`, `|Γ| ln(1/|Γ| + 1)` for `n = 2`.
pub fn critical_shape(area: f64, n: usize) -> f64 {
    if n == 2 {
        area * (1.0 / area + 1.0).ln()
    } else {
        area.powf(1.0 / (n as f64 - 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub x_index: usize,
    pub t: f64,
    pub area: f64,
    pub integral: f64,
    pub est_abs_error: f64,
    pub ratio: f64,
}

/// Table of `I₃ / shape(|Γ|)` over a grid of times and points.
///
/// For `n = 2` the points must lie in the closed domain and `t ≤ 1`.
pub fn critical_boundary_time_bound_check(
    patch: &BoundaryPatch,
    t_grid: &[f64],
    x_grid: &[Point],
    tol: f64,
) -> Result<Vec<RatioRow>, KernelError> {
    let domain = patch.domain();
    let n = domain.dim();
    if n == 2 {
        if let Some(t) = t_grid.iter().find(|&&t| t > 1.0) {
            return Err(KernelError::Hypothesis(format!(
                "n = 2 requires t ≤ 1, got {t}"
            )));
        }
        if x_grid
            .iter()
            .any(|x| !domain.contains(x, 1e-12 * domain.diameter()))
        {
            return Err(KernelError::Hypothesis(
                "n = 2 requires x in the closed domain".into(),
            ));
        }
    }
    let area = patch.area();
    let shape = critical_shape(area, n);
    let mut rows = Vec::with_capacity(t_grid.len() * x_grid.len());
    for (i, x) in x_grid.iter().enumerate() {
        for &t in t_grid {
            let res = if t == 0.0 || area == 0.0 {
                KernelIntegralResult::zero()
            } else {
                boundary_time_integral_phi(x, t, patch, tol)?
            };
            rows.push(RatioRow {
                x_index: i,
                t,
                area,
                integral: res.value,
                est_abs_error: res.est_abs_error,
                ratio: if res.value == 0.0 {
                    0.0
                } else {
                    res.value / shape
                },
            });
        }
    }
    Ok(rows)
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
pub type Rect = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RearrangementOutcome {
    /// `∫_U f(|x − y|) dy`.
    pub lhs: f64,
    /// `∫_{B_R} f(|z|) dz` with `|B_R| = |U|`.
    pub rhs: f64,
    pub est_abs_error: f64,
    pub measure: f64,
}

/// Disjoint cells covering the union of `rects`.
fn union_cells(rects: &[Rect]) -> Vec<Rect> {
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r[0], r[1]]).collect();
    let mut ys: Vec<f64> = rects.iter().flat_map(|r| [r[2], r[3]]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut out = Vec::new();
    for wx in xs.windows(2) {
        for wy in ys.windows(2) {
            let (cx, cy) = (0.5 * (wx[0] + wx[1]), 0.5 * (wy[0] + wy[1]));
            if rects
                .iter()
                .any(|r| r[0] <= cx && cx <= r[1] && r[2] <= cy && cy <= r[3])
            {
                out.push([wx[0], wx[1], wy[0], wy[1]]);
            }
        }
    }
    out
}

/// Planar rearrangement inequality for a union of rectangles `U` and a
/// radially decreasing profile `f`: compares `∫_U f(|x − y|) dy` with the
/// same integral over the centered disk of equal area.
pub fn rearrangement_check<F>(
    f: F,
    rects: &[Rect],
    x: &Point,
    tol: f64,
) -> Result<RearrangementOutcome, KernelError>
where
    F: Fn(f64) -> f64,
{
    let cells = union_cells(rects);
    let measure: f64 = cells.iter().map(|c| (c[1] - c[0]) * (c[3] - c[2])).sum();
    let per_cell = tol / (2 * cells.len().max(1)) as f64;
    let mut lhs = KernelIntegralResult::zero();
    for c in &cells {
        lhs = lhs + rect_integral(&f, c, x, per_cell)?;
    }
    let radius = (measure / PI).sqrt();
    let rhs = if radius > 0.0 {
        integrate_toward(
            |r: f64| 2.0 * PI * r * f(r),
            0.0,
            radius,
            Focus::Start,
            &Tolerance::absolute(tol / 2.0),
        )?
    } else {
        KernelIntegralResult::zero()
    };
    Ok(RearrangementOutcome {
        lhs: lhs.value,
        rhs: rhs.value,
        est_abs_error: lhs.est_abs_error + rhs.est_abs_error,
        measure,
    })
}

fn rect_integral<F: Fn(f64) -> f64>(
    f: &F,
    c: &Rect,
    x: &Point,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError> {
    let inner_tol = Tolerance::absolute(0.25 * tol / (c[1] - c[0]));
    let failed = std::cell::Cell::new(false);
    let line = |u: f64| {
        let du = x.x - u;
        let g = |v: f64| {
            let dv = x.y - v;
            f((du * du + dv * dv).sqrt())
        };
        let star = x.y.clamp(c[2], c[3]);
        let mut acc = 0.0;
        for (lo, hi, focus) in [(c[2], star, Focus::End), (star, c[3], Focus::Start)] {
            if hi > lo {
                match integrate_toward(g, lo, hi, focus, &inner_tol) {
                    Ok(r) => acc += r.value,
                    Err(_) => failed.set(true),
                }
            }
        }
        acc
    };
    let outer = Tolerance::absolute(0.25 * tol);
    let star = x.x.clamp(c[0], c[1]);
    let mut total = KernelIntegralResult::zero();
    for (lo, hi, focus) in [(c[0], star, Focus::End), (star, c[1], Focus::Start)] {
        if hi > lo {
            total = total + integrate_toward(line, lo, hi, focus, &outer)?;
        }
    }
    if failed.get() {
        return Err(KernelError::Hypothesis(
            "inner rearrangement quadrature failed".into(),
        ));
    }
    total.est_abs_error += 0.5 * tol;
    Ok(total)
}

/// Piecewise-linear interpolant of a decreasing tabulated profile, constant
/// beyond the table. Returns `None` if the samples are not sorted by radius
/// or not non-increasing.
pub fn tabulated_profile(samples: Vec<(f64, f64)>) -> Option<impl Fn(f64) -> f64> {
    if samples.is_empty()
        || samples
            .windows(2)
            .any(|w| w[1].0 <= w[0].0 || w[1].1 > w[0].1)
    {
        return None;
    }
    Some(move |r: f64| {
        let idx = samples.partition_point(|s| s.0 <= r);
        if idx == 0 {
            return samples[0].1;
        }
        if idx == samples.len() {
            return samples[samples.len() - 1].1;
        }
        let (a, b) = (samples[idx - 1], samples[idx]);
        a.1 + (b.1 - a.1) * (r - a.0) / (b.0 - a.0)
    })
}
