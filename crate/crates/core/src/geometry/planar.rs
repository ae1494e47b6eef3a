//! Planar boundary pieces (segments and circular arcs) parametrized by
//! arclength, and spans over them.

use std::f64::consts::TAU;

use crate::Point;

/// One smooth piece of a planar boundary, parametrized by arclength
/// `s ∈ [0, length]` in the counterclockwise orientation of `∂Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Segment {
        a: Point,
        b: Point,
    },
    /// Arc of the circle `|y - center| = radius` starting at polar angle
    /// `start` and turning by `sweep` radians (negative for clockwise).
    /// The outward normal of `Ω` points away from the center when
    /// `outward` is true and toward it otherwise.
    Arc {
        center: Point,
        radius: f64,
        start: f64,
        sweep: f64,
        outward: bool,
    },
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { a, b } => (b - a).norm(),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Whether the piece is a full circle, so that parameters wrap around.
    pub fn is_closed(&self) -> bool {
        matches!(*self, Piece::Arc { sweep, .. } if sweep.abs() >= TAU)
    }

    fn angle_at(&self, s: f64) -> f64 {
        match *self {
            Piece::Arc {
                radius,
                start,
                sweep,
                ..
            } => start + sweep.signum() * s / radius,
            Piece::Segment { .. } => unreachable!("segments have no angle"),
        }
    }

    pub fn point(&self, s: f64) -> Point {
        match *self {
            Piece::Segment { a, b } => {
                let len = (b - a).norm();
                a + (b - a) * (s / len)
            }
            Piece::Arc { center, radius, .. } => {
                let th = self.angle_at(s);
                center + Point::new(radius * th.cos(), radius * th.sin(), 0.0)
            }
        }
    }

    pub fn normal(&self, s: f64) -> Point {
        match *self {
            Piece::Segment { a, b } => {
                let d = (b - a).normalize();
                Point::new(d.y, -d.x, 0.0)
            }
            Piece::Arc { outward, .. } => {
                let th = self.angle_at(s);
                let radial = Point::new(th.cos(), th.sin(), 0.0);
                if outward {
                    radial
                } else {
                    -radial
                }
            }
        }
    }

    /// Parameter of the point of the piece closest to `x`.
    pub fn closest_param(&self, x: &Point) -> f64 {
        match *self {
            Piece::Segment { a, b } => {
                let d = b - a;
                let len = d.norm();
                ((x - a).dot(&d) / len).clamp(0.0, len)
            }
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
                ..
            } => {
                let rel = x - center;
                if rel.x == 0.0 && rel.y == 0.0 {
                    return 0.0;
                }
                let phi = rel.y.atan2(rel.x);
                let width = sweep.abs();
                let offset = if sweep >= 0.0 {
                    (phi - start).rem_euclid(TAU)
                } else {
                    (start - phi).rem_euclid(TAU)
                };
                if offset <= width {
                    offset * radius
                } else {
                    // Outside the arc: pick the nearer endpoint.
                    let to_end = offset - width;
                    let to_start = TAU - offset;
                    if to_start <= to_end {
                        0.0
                    } else {
                        width * radius
                    }
                }
            }
        }
    }

    /// Same underlying circle (both arcs, coincident center and radius).
    pub(crate) fn same_circle(&self, other: &Piece) -> bool {
        match (self, other) {
            (
                Piece::Arc {
                    center: c1,
                    radius: r1,
                    ..
                },
                Piece::Arc {
                    center: c2,
                    radius: r2,
                    ..
                },
            ) => (c1 - c2).norm() <= 1e-14 * r1.max(1.0) && (r1 - r2).abs() <= 1e-14 * r1,
            _ => false,
        }
    }

    /// Parameter intervals of this arc covered by the angular interval
    /// `[lo, lo + width]` on its circle.
    pub(crate) fn angular_interval_params(&self, lo: f64, width: f64) -> Vec<(f64, f64)> {
        let Piece::Arc {
            radius,
            start,
            sweep,
            ..
        } = *self
        else {
            return Vec::new();
        };
        let len = radius * sweep.abs();
        if width >= TAU {
            return vec![(0.0, len)];
        }
        let piece_width = sweep.abs();
        let piece_lo = if sweep >= 0.0 { start } else { start + sweep };
        let rel = (lo - piece_lo).rem_euclid(TAU);
        let mut offsets = Vec::new();
        for shift in [-TAU, 0.0, TAU] {
            let a = (rel + shift).max(0.0);
            let b = (rel + shift + width).min(piece_width);
            if b > a {
                offsets.push((a, b));
            }
        }
        offsets
            .into_iter()
            .map(|(a, b)| {
                if sweep >= 0.0 {
                    (a * radius, b * radius)
                } else {
                    ((piece_width - b) * radius, (piece_width - a) * radius)
                }
            })
            .collect()
    }

    /// Angular interval `(lo, width)` swept by parameters `[s0, s1]` of an arc.
    pub(crate) fn param_angles(&self, s0: f64, s1: f64) -> (f64, f64) {
        let Piece::Arc { radius, sweep, .. } = *self else {
            unreachable!("segments have no angle")
        };
        let (a, b) = (self.angle_at(s0), self.angle_at(s1));
        let lo = if sweep >= 0.0 { a } else { b };
        (lo, (s1 - s0) / radius)
    }
}

/// A parameter interval `[s0, s1]` on piece `piece`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub piece: usize,
    pub s0: f64,
    pub s1: f64,
}

impl Span {
    pub fn length(&self) -> f64 {
        self.s1 - self.s0
    }
}

/// Sorts spans and merges overlapping or touching ones; drops empty spans.
pub fn normalize_spans(mut spans: Vec<Span>) -> Vec<Span> {
    spans.retain(|s| s.s1 > s.s0);
    spans.sort_by(|a, b| a.piece.cmp(&b.piece).then(a.s0.total_cmp(&b.s0)));
    let mut out: Vec<Span> = Vec::with_capacity(spans.len());
    for s in spans {
        match out.last_mut() {
            Some(last) if last.piece == s.piece && s.s0 <= last.s1 => {
                last.s1 = last.s1.max(s.s1);
            }
            _ => out.push(s),
        }
    }
    out
}

/// Euclidean distance from `x` to the part of `piece` covered by `span`.
pub fn distance_to_span(piece: &Piece, span: &Span, x: &Point) -> f64 {
    match piece {
        Piece::Segment { .. } => {
            let s = piece.closest_param(x).clamp(span.s0, span.s1);
            (piece.point(s) - x).norm()
        }
        Piece::Arc { center, radius, .. } => {
            let (lo, width) = piece.param_angles(span.s0, span.s1);
            let rel = x - center;
            let phi = rel.y.atan2(rel.x);
            if (phi - lo).rem_euclid(TAU) <= width {
                (rel.norm() - radius).abs()
            } else {
                let a = (piece.point(span.s0) - x).norm();
                let b = (piece.point(span.s1) - x).norm();
                a.min(b)
            }
        }
    }
}

/// Complement of `spans` within all `pieces`.
pub fn complement_spans(pieces: &[Piece], spans: &[Span]) -> Vec<Span> {
    let spans = normalize_spans(spans.to_vec());
    let mut out = Vec::new();
    for (i, p) in pieces.iter().enumerate() {
        let mut cursor = 0.0;
        for s in spans.iter().filter(|s| s.piece == i) {
            if s.s0 > cursor {
                out.push(Span {
                    piece: i,
                    s0: cursor,
                    s1: s.s0,
                });
            }
            cursor = cursor.max(s.s1);
        }
        let len = p.length();
        if len > cursor {
            out.push(Span {
                piece: i,
                s0: cursor,
                s1: len,
            });
        }
    }
    out
}

const NEIGHBORHOOD_SAMPLES: usize = 2048;

/// `{ y ∈ pieces : dist(y, spans) < d }` as spans.
///
/// Arcs sharing a circle with a source span are widened analytically by the
/// angle `2 asin(d / 2r)`; every other piece is sampled and the sampled
/// crossings are refined by bisection.
pub fn neighborhood_spans(pieces: &[Piece], spans: &[Span], d: f64) -> Vec<Span> {
    let mut out = spans.to_vec();
    for (i, piece) in pieces.iter().enumerate() {
        let mut others = Vec::new();
        for s in spans {
            let src = &pieces[s.piece];
            if s.piece == i && matches!(piece, Piece::Segment { .. }) {
                out.push(Span {
                    piece: i,
                    s0: (s.s0 - d).max(0.0),
                    s1: (s.s1 + d).min(piece.length()),
                });
            } else if src.same_circle(piece) {
                let Piece::Arc { radius, .. } = *src else {
                    unreachable!("same_circle implies an arc")
                };
                let delta = if d >= 2.0 * radius {
                    TAU
                } else {
                    2.0 * (d / (2.0 * radius)).asin()
                };
                let (lo, width) = src.param_angles(s.s0, s.s1);
                for (a, b) in piece.angular_interval_params(lo - delta, width + 2.0 * delta) {
                    out.push(Span {
                        piece: i,
                        s0: a,
                        s1: b,
                    });
                }
            } else {
                others.push(*s);
            }
        }
        if others.is_empty() {
            continue;
        }
        let dist = |x: &Point| {
            others
                .iter()
                .map(|s| distance_to_span(&pieces[s.piece], s, x))
                .fold(f64::INFINITY, f64::min)
        };
        let len = piece.length();
        let n = NEIGHBORHOOD_SAMPLES;
        let param = |k: usize| len * k as f64 / (n - 1) as f64;
        let inside = |s: f64| dist(&piece.point(s)) < d;
        let flags: Vec<bool> = (0..n).map(|k| inside(param(k))).collect();
        let refine = |mut good: f64, mut bad: f64| {
            for _ in 0..60 {
                let mid = 0.5 * (good + bad);
                if inside(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        };
        let mut k = 0;
        while k < n {
            if !flags[k] {
                k += 1;
                continue;
            }
            let start = k;
            while k + 1 < n && flags[k + 1] {
                k += 1;
            }
            let s0 = if start == 0 {
                0.0
            } else {
                refine(param(start), param(start - 1))
            };
            let s1 = if k == n - 1 {
                len
            } else {
                refine(param(k), param(k + 1))
            };
            out.push(Span { piece: i, s0, s1 });
            k += 1;
        }
    }
    normalize_spans(out)
}
