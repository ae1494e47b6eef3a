//! Surface integrals `∫_Γ K(|x − y|, (x − y)·n(y)) dS(y)` over boundary
//! patches, for kernels that depend only on the distance and the normal
//! component.
//!
//! Distances and normal components are assembled from intrinsic
//! coordinates (angle differences on circles and spheres, offsets along
//! segments and faces) so that neither loses precision as `y → x`. A point
//! `x` within `1e-12·d_Ω` of a boundary curve or surface is treated as lying
//! on it.

use std::cell::{Cell, RefCell};
use std::f64::consts::{PI, TAU};

use crate::geometry::{BoundaryPatch, Piece, Shape};
use crate::quad::{integrate_breaks, integrate_toward, Focus, KernelIntegralResult, Tolerance};
use crate::Point;

use super::KernelError;

const SNAP: f64 = 1e-12;

/// `(r, dot)` along one planar piece for a fixed `x`.
struct PieceFrame {
    piece: Piece,
    // Arc: signed radial offset of x, its polar angle about the center.
    // Segment: signed normal offset of x, its tangential coordinate.
    offset: f64,
    coord: f64,
}

impl PieceFrame {
    fn new(piece: Piece, x: &Point, scale: f64) -> Self {
        let snap = |v: f64| if v.abs() < SNAP * scale { 0.0 } else { v };
        match piece {
            Piece::Segment { a, b } => {
                let len = (b - a).norm();
                let tan = (b - a) / len;
                let normal = Point::new(tan.y, -tan.x, 0.0);
                let w = x - a;
                Self {
                    piece,
                    offset: snap(w.dot(&normal)),
                    coord: w.dot(&tan),
                }
            }
            Piece::Arc { center, radius, .. } => {
                let v = x - center;
                Self {
                    piece,
                    offset: snap(v.norm() - radius),
                    coord: v.y.atan2(v.x),
                }
            }
        }
    }

    fn geometry(&self, u: f64) -> (f64, f64) {
        match self.piece {
            Piece::Segment { .. } => {
                let along = self.coord - u;
                (
                    (self.offset * self.offset + along * along).sqrt(),
                    self.offset,
                )
            }
            Piece::Arc {
                radius,
                start,
                sweep,
                outward,
                ..
            } => {
                let theta = start + sweep.signum() * u / radius;
                let delta = (theta - self.coord + PI).rem_euclid(TAU) - PI;
                let half = (0.5 * delta).sin();
                let eps = self.offset;
                let r2 = eps * eps + 4.0 * radius * (radius + eps) * half * half;
                let radial = eps * delta.cos() - 2.0 * radius * half * half;
                (r2.max(0.0).sqrt(), if outward { radial } else { -radial })
            }
        }
    }
}

/// Integrates `kernel(r, dot)` over `patch` to absolute accuracy `tol`.
pub fn integrate_over_patch<K>(
    x: &Point,
    patch: &BoundaryPatch,
    kernel: K,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError>
where
    K: Fn(f64, f64) -> f64,
{
    if patch.is_empty() {
        return Ok(KernelIntegralResult::zero());
    }
    let domain = patch.domain();
    let scale = domain.diameter();
    match domain.shape() {
        Shape::Ball { radius } => integrate_zones(x, patch.zones(), radius, scale, &kernel, tol),
        Shape::Box { .. } => integrate_faces(x, patch, scale, &kernel, tol),
        _ => integrate_planar(x, patch, |r, dot, _: &BoundaryParam| kernel(r, dot), tol),
    }
}

/// Arclength position on a boundary piece; the point is computed on demand.
pub struct BoundaryParam {
    piece: Piece,
    s: f64,
}

impl BoundaryParam {
    pub fn point(&self) -> Point {
        let len = self.piece.length();
        let s = if self.piece.is_closed() {
            self.s.rem_euclid(len)
        } else {
            self.s
        };
        self.piece.point(s)
    }
}

/// Integrates `kernel(r, dot, y)` over a patch of a planar domain, for
/// integrands that also depend on the boundary point `y`.
pub fn integrate_over_planar_patch<K>(
    x: &Point,
    patch: &BoundaryPatch,
    kernel: K,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError>
where
    K: Fn(f64, f64, &BoundaryParam) -> f64,
{
    if patch.domain().dim() != 2 {
        return Err(KernelError::Hypothesis(
            "point-dependent surface integrals need a planar domain".into(),
        ));
    }
    if patch.is_empty() {
        return Ok(KernelIntegralResult::zero());
    }
    integrate_planar(x, patch, kernel, tol)
}

fn integrate_planar<K>(
    x: &Point,
    patch: &BoundaryPatch,
    kernel: K,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError>
where
    K: Fn(f64, f64, &BoundaryParam) -> f64,
{
    let domain = patch.domain();
    let scale = domain.diameter();
    let pieces = domain.pieces();
    let spans = patch.spans();
    let sub = Tolerance::absolute(tol / (2 * spans.len()) as f64);
    let mut total = KernelIntegralResult::zero();
    for s in spans {
        let piece = pieces[s.piece];
        let frame = PieceFrame::new(piece, x, scale);
        let f = |u: f64| {
            let (r, dot) = frame.geometry(u);
            kernel(r, dot, &BoundaryParam { piece, s: u })
        };
        let len = piece.length();
        let p = piece.closest_param(x);
        if piece.is_closed() && s.s1 - s.s0 >= len * (1.0 - 1e-14) {
            // Full loop: start and end at the closest point.
            let mid = p + 0.5 * len;
            total = total + integrate_toward(f, p, mid, Focus::Start, &sub)?;
            total = total + integrate_toward(f, mid, p + len, Focus::End, &sub)?;
            continue;
        }
        let candidates: &[f64] = if piece.is_closed() {
            &[p - len, p, p + len]
        } else {
            &[p]
        };
        let star = candidates
            .iter()
            .map(|c| c.clamp(s.s0, s.s1))
            .min_by(|a, b| frame.geometry(*a).0.total_cmp(&frame.geometry(*b).0))
            .unwrap_or(s.s0);
        // Slivers below the snapping scale contribute nothing but would put
        // nodes at r = 0.
        let sliver = SNAP * scale;
        if star - s.s0 > sliver {
            total = total + integrate_toward(f, s.s0, star, Focus::End, &sub)?;
        }
        if s.s1 - star > sliver {
            total = total + integrate_toward(f, star, s.s1, Focus::Start, &sub)?;
        }
    }
    Ok(total)
}

/// Azimuthal measure, about an axis at polar angle `beta` from `+z`, of the
/// circle at angular distance `theta` from that axis lying in `{polar ≤ c}`.
pub(crate) fn cap_azimuth(theta: f64, beta: f64, c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    if c >= PI {
        return TAU;
    }
    let denom = theta.sin() * beta.sin();
    let num = c.cos() - theta.cos() * beta.cos();
    if denom.abs() < 1e-300 {
        return if num <= 0.0 { TAU } else { 0.0 };
    }
    let rho = num / denom;
    if rho >= 1.0 {
        0.0
    } else if rho <= -1.0 {
        TAU
    } else {
        2.0 * rho.acos()
    }
}

fn integrate_zones<K>(
    x: &Point,
    zones: &[(f64, f64)],
    radius: f64,
    scale: f64,
    kernel: &K,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError>
where
    K: Fn(f64, f64) -> f64,
{
    let rx = x.norm();
    let eps = {
        let e = rx - radius;
        if e.abs() < SNAP * scale {
            0.0
        } else {
            e
        }
    };
    let beta = if rx == 0.0 {
        0.0
    } else {
        x.xy().norm().atan2(x.z)
    };
    let g = |theta: f64| {
        let azimuth: f64 = zones
            .iter()
            .map(|&(a, b)| cap_azimuth(theta, beta, b) - cap_azimuth(theta, beta, a))
            .sum();
        if azimuth <= 0.0 {
            return 0.0;
        }
        let half = (0.5 * theta).sin();
        let r2 = eps * eps + 4.0 * radius * (radius + eps) * half * half;
        let dot = eps * theta.cos() - 2.0 * radius * half * half;
        kernel(r2.max(0.0).sqrt(), dot) * radius * radius * theta.sin() * azimuth
    };
    let mut breaks = vec![0.0, PI];
    for &(a, b) in zones {
        for c in [a, b] {
            breaks.extend([(beta - c).abs(), beta + c, TAU - beta - c]);
        }
    }
    breaks.retain(|v| (0.0..=PI).contains(v));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let panels = breaks.len() - 1;
    let sub = Tolerance::absolute(tol / panels as f64);
    let mut total = KernelIntegralResult::zero();
    for (i, w) in breaks.windows(2).enumerate() {
        total = total
            + if i == 0 {
                integrate_toward(g, w[0], w[1], Focus::Start, &sub)?
            } else {
                integrate_breaks(g, w, &sub)?
            };
    }
    Ok(total)
}

fn integrate_faces<K>(
    x: &Point,
    patch: &BoundaryPatch,
    scale: f64,
    kernel: &K,
    tol: f64,
) -> Result<KernelIntegralResult, KernelError>
where
    K: Fn(f64, f64) -> f64,
{
    let domain = patch.domain();
    let rects = patch.faces();
    let per_rect = tol / rects.len() as f64;
    let mut total = KernelIntegralResult::zero();
    for r in rects {
        let (o, normal) = domain.face_point(r.face, 0.0, 0.0);
        let (pu, _) = domain.face_point(r.face, 1.0, 0.0);
        let (pv, _) = domain.face_point(r.face, 0.0, 1.0);
        let (eu, ev) = (pu - o, pv - o);
        let w = x - o;
        let h = {
            let v = w.dot(&normal);
            if v.abs() < SNAP * scale {
                0.0
            } else {
                v
            }
        };
        let (xu, xv) = (w.dot(&eu), w.dot(&ev));
        let inner_tol = Tolerance::absolute(0.25 * per_rect / (r.u1 - r.u0));
        let failure: RefCell<Option<KernelError>> = RefCell::new(None);
        let inner_nodes = Cell::new(0usize);
        let line = |u: f64| {
            let du = xu - u;
            let f = |v: f64| {
                let dv = xv - v;
                kernel((h * h + du * du + dv * dv).sqrt(), h)
            };
            let star = xv.clamp(r.v0, r.v1);
            let mut acc = 0.0;
            for (lo, hi, focus) in [(r.v0, star, Focus::End), (star, r.v1, Focus::Start)] {
                if hi > lo {
                    match integrate_toward(f, lo, hi, focus, &inner_tol) {
                        Ok(res) => {
                            acc += res.value;
                            inner_nodes.set(inner_nodes.get() + res.nodes_used);
                        }
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e.into());
                        }
                    }
                }
            }
            acc
        };
        let outer_tol = Tolerance::absolute(0.25 * per_rect);
        let star = xu.clamp(r.u0, r.u1);
        let mut sum = KernelIntegralResult::zero();
        for (lo, hi, focus) in [(r.u0, star, Focus::End), (star, r.u1, Focus::Start)] {
            if hi > lo {
                sum = sum + integrate_toward(line, lo, hi, focus, &outer_tol)?;
            }
        }
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        sum.nodes_used += inner_nodes.get();
        sum.est_abs_error += 0.5 * per_rect;
        total = total + sum;
    }
    Ok(total)
}
