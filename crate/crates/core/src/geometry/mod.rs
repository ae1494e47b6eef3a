//! Shape catalog, boundary patches and their discretization.
//!
//! Planar shapes live in the `z = 0` plane of [`Point`]. Their boundary is a
//! list of [`Piece`]s traversed counterclockwise, and a planar patch is a
//! list of arclength [`Span`]s on those pieces. Patches on the ball are
//! unions of polar zones about the `+z` axis; patches on the box are unions
//! of axis-aligned rectangles on its faces.
//!
//! Neighbourhoods `[Γ]_d` use the Euclidean distance of the ambient space.

pub mod hull;
pub mod planar;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use planar::{Piece, Span};

use crate::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid shape parameter: {0}")]
    InvalidParameter(String),
    #[error("patch spec {spec} is not supported on a {kind:?}")]
    UnsupportedSpec { spec: String, kind: DomainKind },
    #[error("operation not supported on a {0:?}: {1}")]
    Unsupported(DomainKind, &'static str),
    #[error("quadrature resolution must be at least 2, got {0}")]
    Resolution(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Rectangle2d,
    Disk2d,
    NotchedDisk2d,
    Box3d,
    Ball3d,
}

/// Shape parameters. Rectangles and boxes have a corner at the origin;
/// disks and balls are centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Rectangle {
        lx: f64,
        ly: f64,
    },
    Disk {
        radius: f64,
    },
    /// Disk minus the open disk of radius `depth` centered at the boundary
    /// point at polar angle `angle`.
    NotchedDisk {
        radius: f64,
        angle: f64,
        depth: f64,
    },
    Box {
        lx: f64,
        ly: f64,
        lz: f64,
    },
    Ball {
        radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    shape: Shape,
    d_omega: f64,
}

impl Domain {
    pub fn new(shape: Shape) -> Result<Self, GeometryError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(GeometryError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        let d_omega = match shape {
            Shape::Rectangle { lx, ly } => {
                positive("lx", lx)?;
                positive("ly", ly)?;
                lx.hypot(ly)
            }
            Shape::Disk { radius } | Shape::Ball { radius } => {
                positive("radius", radius)?;
                2.0 * radius
            }
            Shape::NotchedDisk {
                radius,
                angle,
                depth,
            } => {
                positive("radius", radius)?;
                positive("depth", depth)?;
                if !angle.is_finite() {
                    return Err(GeometryError::InvalidParameter(
                        "notch angle must be finite".into(),
                    ));
                }
                if depth >= radius {
                    return Err(GeometryError::InvalidParameter(format!(
                        "notch depth {depth} must be below the radius {radius}"
                    )));
                }
                // The notch removes less than a third of the circle, so a
                // diametral pair of outer points survives.
                2.0 * radius
            }
            Shape::Box { lx, ly, lz } => {
                positive("lx", lx)?;
                positive("ly", ly)?;
                positive("lz", lz)?;
                (lx * lx + ly * ly + lz * lz).sqrt()
            }
        };
        Ok(Self { shape, d_omega })
    }

    pub fn rectangle(lx: f64, ly: f64) -> Result<Self, GeometryError> {
        Self::new(Shape::Rectangle { lx, ly })
    }

    pub fn disk(radius: f64) -> Result<Self, GeometryError> {
        Self::new(Shape::Disk { radius })
    }

    pub fn notched_disk(radius: f64, angle: f64, depth: f64) -> Result<Self, GeometryError> {
        Self::new(Shape::NotchedDisk {
            radius,
            angle,
            depth,
        })
    }

    pub fn cuboid(lx: f64, ly: f64, lz: f64) -> Result<Self, GeometryError> {
        Self::new(Shape::Box { lx, ly, lz })
    }

    pub fn ball(radius: f64) -> Result<Self, GeometryError> {
        Self::new(Shape::Ball { radius })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn kind(&self) -> DomainKind {
        match self.shape {
            Shape::Rectangle { .. } => DomainKind::Rectangle2d,
            Shape::Disk { .. } => DomainKind::Disk2d,
            Shape::NotchedDisk { .. } => DomainKind::NotchedDisk2d,
            Shape::Box { .. } => DomainKind::Box3d,
            Shape::Ball { .. } => DomainKind::Ball3d,
        }
    }

    /// Spatial dimension `n`.
    pub fn dim(&self) -> usize {
        match self.kind() {
            DomainKind::Box3d | DomainKind::Ball3d => 3,
            _ => 2,
        }
    }

    pub fn diameter(&self) -> f64 {
        self.d_omega
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self.shape, Shape::NotchedDisk { .. })
    }

    /// Volume (area for planar shapes) of `Ω`.
    pub fn volume(&self) -> f64 {
        match self.shape {
            Shape::Rectangle { lx, ly } => lx * ly,
            Shape::Disk { radius } => PI * radius * radius,
            Shape::NotchedDisk { radius, depth, .. } => {
                // Lens shared by the disk and the bite circle.
                let (r, p) = (radius, depth);
                let lens = r * r * (1.0 - p * p / (2.0 * r * r)).acos()
                    + p * p * (p / (2.0 * r)).acos()
                    - 0.5 * p * (4.0 * r * r - p * p).sqrt();
                PI * r * r - lens
            }
            Shape::Box { lx, ly, lz } => lx * ly * lz,
            Shape::Ball { radius } => 4.0 / 3.0 * PI * radius.powi(3),
        }
    }

    /// Whether `p` lies in the closed domain, enlarged by `slack`.
    pub fn contains(&self, p: &Point, slack: f64) -> bool {
        match self.shape {
            Shape::Rectangle { lx, ly } => {
                p.x >= -slack && p.x <= lx + slack && p.y >= -slack && p.y <= ly + slack
            }
            Shape::Disk { radius } => p.xy().norm() <= radius + slack,
            Shape::NotchedDisk {
                radius,
                angle,
                depth,
            } => {
                let c = Point::new(radius * angle.cos(), radius * angle.sin(), 0.0);
                p.xy().norm() <= radius + slack && (p - c).xy().norm() >= depth - slack
            }
            Shape::Box { lx, ly, lz } => [(p.x, lx), (p.y, ly), (p.z, lz)]
                .iter()
                .all(|&(v, l)| v >= -slack && v <= l + slack),
            Shape::Ball { radius } => p.norm() <= radius + slack,
        }
    }

    /// Boundary pieces of a planar domain, counterclockwise.
    pub fn pieces(&self) -> Vec<Piece> {
        match self.shape {
            Shape::Rectangle { lx, ly } => {
                let c = [
                    Point::new(0.0, 0.0, 0.0),
                    Point::new(lx, 0.0, 0.0),
                    Point::new(lx, ly, 0.0),
                    Point::new(0.0, ly, 0.0),
                ];
                (0..4)
                    .map(|i| Piece::Segment {
                        a: c[i],
                        b: c[(i + 1) % 4],
                    })
                    .collect()
            }
            Shape::Disk { radius } => vec![Piece::Arc {
                center: Point::zeros(),
                radius,
                start: 0.0,
                sweep: TAU,
                outward: true,
            }],
            Shape::NotchedDisk {
                radius,
                angle,
                depth,
            } => {
                let phi = 2.0 * (depth / (2.0 * radius)).asin();
                let beta = (depth / (2.0 * radius)).acos();
                vec![
                    Piece::Arc {
                        center: Point::zeros(),
                        radius,
                        start: angle + phi,
                        sweep: TAU - 2.0 * phi,
                        outward: true,
                    },
                    Piece::Arc {
                        center: Point::new(radius * angle.cos(), radius * angle.sin(), 0.0),
                        radius: depth,
                        start: angle + PI + beta,
                        sweep: -2.0 * beta,
                        outward: false,
                    },
                ]
            }
            Shape::Box { .. } | Shape::Ball { .. } => Vec::new(),
        }
    }

    /// Total boundary measure `|∂Ω|`.
    pub fn boundary_area(&self) -> f64 {
        match self.shape {
            Shape::Box { lx, ly, lz } => 2.0 * (lx * ly + ly * lz + lx * lz),
            Shape::Ball { radius } => 4.0 * PI * radius * radius,
            _ => self.pieces().iter().map(Piece::length).sum(),
        }
    }

    pub fn full_boundary(&self) -> BoundaryPatch {
        self.patch(&PatchSpec::Full)
            .expect("the full boundary is always supported")
    }

    pub fn patch(&self, spec: &PatchSpec) -> Result<BoundaryPatch, GeometryError> {
        let unsupported = || GeometryError::UnsupportedSpec {
            spec: format!("{spec:?}"),
            kind: self.kind(),
        };
        let bad = |msg: String| Err(GeometryError::InvalidParameter(msg));
        let region = match (*spec, self.shape) {
            (PatchSpec::Empty, Shape::Box { .. }) => Region::Faces(Vec::new()),
            (PatchSpec::Empty, Shape::Ball { .. }) => Region::Zones(Vec::new()),
            (PatchSpec::Empty, _) => Region::Planar(Vec::new()),
            (PatchSpec::Full, Shape::Box { .. }) => {
                Region::Faces((0..6).map(|f| self.face_rect_full(f)).collect())
            }
            (PatchSpec::Full, Shape::Ball { .. }) => Region::Zones(vec![(0.0, PI)]),
            (PatchSpec::Full, _) => Region::Planar(
                self.pieces()
                    .iter()
                    .enumerate()
                    .map(|(i, p)| Span {
                        piece: i,
                        s0: 0.0,
                        s1: p.length(),
                    })
                    .collect(),
            ),
            (PatchSpec::Arc { center, width }, Shape::Disk { .. } | Shape::NotchedDisk { .. }) => {
                if !(width >= 0.0) {
                    return bad(format!("arc width must be non-negative, got {width}"));
                }
                let outer = self.pieces()[0];
                let spans = outer
                    .angular_interval_params(center - 0.5 * width, width)
                    .into_iter()
                    .map(|(s0, s1)| Span { piece: 0, s0, s1 })
                    .collect();
                Region::Planar(planar::normalize_spans(spans))
            }
            (PatchSpec::Edge { edge, start, end }, Shape::Rectangle { lx, ly }) => {
                let len = if edge % 2 == 0 { lx } else { ly };
                if edge > 3 || !(0.0 <= start && start <= end && end <= len * (1.0 + 1e-12)) {
                    return bad(format!(
                        "edge span [{start}, {end}] on edge {edge} is out of range"
                    ));
                }
                Region::Planar(planar::normalize_spans(vec![Span {
                    piece: edge,
                    s0: start,
                    s1: end.min(len),
                }]))
            }
            (PatchSpec::Cap { half_angle }, Shape::Ball { .. }) => {
                if !(0.0..=PI).contains(&half_angle) {
                    return bad(format!("cap half-angle {half_angle} outside [0, π]"));
                }
                Region::Zones(normalize_zones(vec![(0.0, half_angle)]))
            }
            (
                PatchSpec::Zone {
                    theta_min,
                    theta_max,
                },
                Shape::Ball { .. },
            ) => {
                if !(0.0 <= theta_min && theta_min <= theta_max && theta_max <= PI) {
                    return bad(format!("zone [{theta_min}, {theta_max}] outside [0, π]"));
                }
                Region::Zones(normalize_zones(vec![(theta_min, theta_max)]))
            }
            (PatchSpec::Face { face, u, v }, Shape::Box { .. }) => {
                let full = if face < 6 {
                    self.face_rect_full(face)
                } else {
                    return bad(format!("face index {face} out of range"));
                };
                if !(0.0 <= u[0]
                    && u[0] <= u[1]
                    && u[1] <= full.u1
                    && 0.0 <= v[0]
                    && v[0] <= v[1]
                    && v[1] <= full.v1)
                {
                    return bad(format!("face rectangle {u:?} x {v:?} out of range"));
                }
                Region::Faces(normalize_faces(vec![FaceRect {
                    face,
                    u0: u[0],
                    u1: u[1],
                    v0: v[0],
                    v1: v[1],
                }]))
            }
            _ => return Err(unsupported()),
        };
        Ok(BoundaryPatch::from_region(self.clone(), region))
    }

    fn face_rect_full(&self, face: usize) -> FaceRect {
        let (_, _, _, _, (eu, ev)) = self.face_frame(face);
        FaceRect {
            face,
            u0: 0.0,
            u1: eu,
            v0: 0.0,
            v1: ev,
        }
    }

    /// Origin, tangent axes, outward normal and extents of a box face.
    fn face_frame(&self, face: usize) -> (Point, Point, Point, Point, (f64, f64)) {
        let Shape::Box { lx, ly, lz } = self.shape else {
            unreachable!("faces exist only on the box")
        };
        let (ex, ey, ez) = (Point::x(), Point::y(), Point::z());
        match face {
            0 => (Point::zeros(), ex, ey, -ez, (lx, ly)),
            1 => (Point::new(0.0, 0.0, lz), ex, ey, ez, (lx, ly)),
            2 => (Point::zeros(), ex, ez, -ey, (lx, lz)),
            3 => (Point::new(0.0, ly, 0.0), ex, ez, ey, (lx, lz)),
            4 => (Point::zeros(), ey, ez, -ex, (ly, lz)),
            5 => (Point::new(lx, 0.0, 0.0), ey, ez, ex, (ly, lz)),
            _ => unreachable!("a box has six faces"),
        }
    }

    /// Point, outward normal and patch frame of box face coordinates.
    pub fn face_point(&self, face: usize, u: f64, v: f64) -> (Point, Point) {
        let (o, eu, ev, n, _) = self.face_frame(face);
        (o + eu * u + ev * v, n)
    }

    /// Distance from `p` to the boundary, and the closest boundary point.
    pub fn nearest_boundary_point(&self, p: &Point) -> (f64, Point) {
        let full = self.full_boundary();
        full.nearest_point(p)
    }

    /// Largest `d` on the grid `d_Ω 2^{-k/4}`, `k = 0..=48`, for which the
    /// convex hull of a dense sample of `[Γ₁]_d` stays in the closed domain.
    pub fn local_convexity_radius(&self, gamma1: &BoundaryPatch) -> Option<f64> {
        if self.is_convex() {
            return Some(self.d_omega);
        }
        for k in 0..=48 {
            let d = self.d_omega * 2f64.powf(-(k as f64) / 4.0);
            let nb = gamma1.neighborhood(d).ok()?;
            let samples = nb.boundary_samples(10_000);
            let h = hull::convex_hull(&samples);
            if hull::hull_probe_points(&h, 15)
                .iter()
                .all(|p| self.contains(p, 1e-9))
            {
                return Some(d);
            }
        }
        None
    }
}

/// User-facing description of a boundary patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PatchSpec {
    Empty,
    Full,
    /// Polar angles `[center - width/2, center + width/2]` about the origin
    /// on a disk; on the notched disk only the outer circle is covered.
    Arc {
        center: f64,
        width: f64,
    },
    /// Arclength interval along rectangle edge `edge` (0 = bottom, then
    /// counterclockwise), measured from the edge's first corner.
    Edge {
        edge: usize,
        start: f64,
        end: f64,
    },
    /// Spherical cap `θ ≤ half_angle` about the `+z` pole.
    Cap {
        half_angle: f64,
    },
    Zone {
        theta_min: f64,
        theta_max: f64,
    },
    /// Rectangle `u × v` on a box face: 0 `z=0`, 1 `z=lz`, 2 `y=0`,
    /// 3 `y=ly`, 4 `x=0`, 5 `x=lx`; `(u, v)` are the two remaining
    /// coordinates in `x, y, z` order.
    Face {
        face: usize,
        u: [f64; 2],
        v: [f64; 2],
    },
}

/// Axis-aligned rectangle in the coordinates of one box face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceRect {
    pub face: usize,
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl FaceRect {
    fn area(&self) -> f64 {
        (self.u1 - self.u0) * (self.v1 - self.v0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Planar(Vec<Span>),
    /// Polar-angle intervals `[θmin, θmax]` about the `+z` axis.
    Zones(Vec<(f64, f64)>),
    Faces(Vec<FaceRect>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub point: Point,
    pub normal: Point,
    pub weight: f64,
}

/// A measurable subset `Γ ⊆ ∂Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPatch {
    domain: Domain,
    region: Region,
    area: f64,
}

fn normalize_zones(mut zones: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    zones.retain(|z| z.1 > z.0);
    zones.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for z in zones {
        match out.last_mut() {
            Some(last) if z.0 <= last.1 => last.1 = last.1.max(z.1),
            _ => out.push(z),
        }
    }
    out
}

/// Rewrites a union of face rectangles as disjoint rectangles on the grid
/// spanned by their edges.
fn normalize_faces(rects: Vec<FaceRect>) -> Vec<FaceRect> {
    let mut out = Vec::new();
    for face in 0..6 {
        let on_face: Vec<&FaceRect> = rects
            .iter()
            .filter(|r| r.face == face && r.area() > 0.0)
            .collect();
        if on_face.is_empty() {
            continue;
        }
        let mut us: Vec<f64> = on_face.iter().flat_map(|r| [r.u0, r.u1]).collect();
        let mut vs: Vec<f64> = on_face.iter().flat_map(|r| [r.v0, r.v1]).collect();
        us.sort_by(f64::total_cmp);
        us.dedup();
        vs.sort_by(f64::total_cmp);
        vs.dedup();
        for wu in us.windows(2) {
            for wv in vs.windows(2) {
                let (cu, cv) = (0.5 * (wu[0] + wu[1]), 0.5 * (wv[0] + wv[1]));
                if on_face
                    .iter()
                    .any(|r| r.u0 <= cu && cu <= r.u1 && r.v0 <= cv && cv <= r.v1)
                {
                    out.push(FaceRect {
                        face,
                        u0: wu[0],
                        u1: wu[1],
                        v0: wv[0],
                        v1: wv[1],
                    });
                }
            }
        }
    }
    out
}

impl BoundaryPatch {
    fn from_region(domain: Domain, region: Region) -> Self {
        let area = match (&region, domain.shape) {
            (Region::Planar(spans), _) => spans.iter().map(Span::length).sum(),
            (Region::Zones(z), Shape::Ball { radius }) => z
                .iter()
                .map(|&(a, b)| TAU * radius * radius * (a.cos() - b.cos()))
                .sum(),
            (Region::Faces(f), _) => f.iter().map(FaceRect::area).sum(),
            (Region::Zones(_), _) => unreachable!("zones exist only on the ball"),
        };
        Self {
            domain,
            region,
            area,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Surface measure `|Γ|`.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn is_empty(&self) -> bool {
        self.area == 0.0
    }

    pub fn spans(&self) -> &[Span] {
        match &self.region {
            Region::Planar(s) => s,
            _ => &[],
        }
    }

    pub fn zones(&self) -> &[(f64, f64)] {
        match &self.region {
            Region::Zones(z) => z,
            _ => &[],
        }
    }

    pub fn faces(&self) -> &[FaceRect] {
        match &self.region {
            Region::Faces(f) => f,
            _ => &[],
        }
    }

    /// Midpoint-type rule: `resolution` nodes per planar span,
    /// `resolution × 2·resolution` cells per ball zone (equal-area bands
    /// in `cos θ`), and `resolution²` cells per face rectangle.
    pub fn quadrature_nodes(&self, resolution: usize) -> Result<Vec<QuadNode>, GeometryError> {
        if resolution < 2 {
            return Err(GeometryError::Resolution(resolution));
        }
        let n = resolution;
        let mut out = Vec::new();
        match (&self.region, self.domain.shape) {
            (Region::Planar(spans), _) => {
                let pieces = self.domain.pieces();
                for s in spans {
                    let p = &pieces[s.piece];
                    let w = s.length() / n as f64;
                    for k in 0..n {
                        let t = s.s0 + (k as f64 + 0.5) * w;
                        out.push(QuadNode {
                            point: p.point(t),
                            normal: p.normal(t),
                            weight: w,
                        });
                    }
                }
            }
            (Region::Zones(zones), Shape::Ball { radius }) => {
                let n_phi = 2 * n;
                for &(a, b) in zones {
                    let (ca, cb) = (a.cos(), b.cos());
                    for i in 0..n {
                        let c_hi = ca + (cb - ca) * i as f64 / n as f64;
                        let c_lo = ca + (cb - ca) * (i + 1) as f64 / n as f64;
                        let z = 0.5 * (c_hi + c_lo);
                        let w = TAU * radius * radius * (c_hi - c_lo) / n_phi as f64;
                        let sin_t = (1.0 - z * z).max(0.0).sqrt();
                        for j in 0..n_phi {
                            let phi = TAU * (j as f64 + 0.5) / n_phi as f64;
                            let normal = Point::new(sin_t * phi.cos(), sin_t * phi.sin(), z);
                            out.push(QuadNode {
                                point: normal * radius,
                                normal,
                                weight: w,
                            });
                        }
                    }
                }
            }
            (Region::Faces(rects), _) => {
                for r in rects {
                    let (du, dv) = ((r.u1 - r.u0) / n as f64, (r.v1 - r.v0) / n as f64);
                    for i in 0..n {
                        for j in 0..n {
                            let u = r.u0 + (i as f64 + 0.5) * du;
                            let v = r.v0 + (j as f64 + 0.5) * dv;
                            let (point, normal) = self.domain.face_point(r.face, u, v);
                            out.push(QuadNode {
                                point,
                                normal,
                                weight: du * dv,
                            });
                        }
                    }
                }
            }
            (Region::Zones(_), _) => unreachable!("zones exist only on the ball"),
        }
        Ok(out)
    }

    /// `[Γ]_d = { x ∈ ∂Ω : dist(x, Γ) < d }` with Euclidean distance.
    ///
    /// Not available on the box.
    pub fn neighborhood(&self, d: f64) -> Result<BoundaryPatch, GeometryError> {
        if !(d > 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "neighbourhood radius must be positive, got {d}"
            )));
        }
        if self.is_empty() {
            return Ok(self.clone());
        }
        if d >= self.domain.d_omega {
            return Ok(self.domain.full_boundary());
        }
        let region = match (&self.region, self.domain.shape) {
            (Region::Planar(spans), _) => {
                Region::Planar(planar::neighborhood_spans(&self.domain.pieces(), spans, d))
            }
            (Region::Zones(z), Shape::Ball { radius }) => {
                let delta = 2.0 * (d / (2.0 * radius)).min(1.0).asin();
                Region::Zones(normalize_zones(
                    z.iter()
                        .map(|&(a, b)| ((a - delta).max(0.0), (b + delta).min(PI)))
                        .collect(),
                ))
            }
            _ => {
                return Err(GeometryError::Unsupported(
                    self.domain.kind(),
                    "[Γ]_d neighbourhoods are only implemented for curved and planar shapes",
                ))
            }
        };
        Ok(BoundaryPatch::from_region(self.domain.clone(), region))
    }

    /// `∂Ω ∖ Γ`.
    pub fn complement(&self) -> BoundaryPatch {
        let region = match &self.region {
            Region::Planar(spans) => {
                Region::Planar(planar::complement_spans(&self.domain.pieces(), spans))
            }
            Region::Zones(zones) => {
                let mut out = Vec::new();
                let mut cursor = 0.0;
                for &(a, b) in zones {
                    if a > cursor {
                        out.push((cursor, a));
                    }
                    cursor = b;
                }
                if cursor < PI {
                    out.push((cursor, PI));
                }
                Region::Zones(out)
            }
            Region::Faces(rects) => {
                let mut out = Vec::new();
                for face in 0..6 {
                    let full = self.domain.face_rect_full(face);
                    let on_face: Vec<&FaceRect> = rects.iter().filter(|r| r.face == face).collect();
                    let mut us: Vec<f64> = vec![0.0, full.u1];
                    let mut vs: Vec<f64> = vec![0.0, full.v1];
                    for r in &on_face {
                        us.extend([r.u0, r.u1]);
                        vs.extend([r.v0, r.v1]);
                    }
                    us.sort_by(f64::total_cmp);
                    us.dedup();
                    vs.sort_by(f64::total_cmp);
                    vs.dedup();
                    for wu in us.windows(2) {
                        for wv in vs.windows(2) {
                            let (cu, cv) = (0.5 * (wu[0] + wu[1]), 0.5 * (wv[0] + wv[1]));
                            let covered = on_face
                                .iter()
                                .any(|r| r.u0 <= cu && cu <= r.u1 && r.v0 <= cv && cv <= r.v1);
                            if !covered {
                                out.push(FaceRect {
                                    face,
                                    u0: wu[0],
                                    u1: wu[1],
                                    v0: wv[0],
                                    v1: wv[1],
                                });
                            }
                        }
                    }
                }
                Region::Faces(out)
            }
        };
        BoundaryPatch::from_region(self.domain.clone(), region)
    }

    /// Euclidean distance from `x` to the patch and a closest patch point.
    pub fn nearest_point(&self, x: &Point) -> (f64, Point) {
        let mut best = (f64::INFINITY, *x);
        let mut consider = |p: Point| {
            let d = (p - x).norm();
            if d < best.0 {
                best = (d, p);
            }
        };
        match (&self.region, self.domain.shape) {
            (Region::Planar(spans), _) => {
                let pieces = self.domain.pieces();
                for s in spans {
                    let p = &pieces[s.piece];
                    let t = p.closest_param(x).clamp(s.s0, s.s1);
                    consider(p.point(t));
                    consider(p.point(s.s0));
                    consider(p.point(s.s1));
                }
            }
            (Region::Zones(zones), Shape::Ball { radius }) => {
                let rho = x.xy().norm();
                let theta_x = rho.atan2(x.z);
                let phi = x.y.atan2(x.x);
                for &(a, b) in zones {
                    let th = theta_x.clamp(a, b);
                    consider(
                        Point::new(th.sin() * phi.cos(), th.sin() * phi.sin(), th.cos()) * radius,
                    );
                }
            }
            (Region::Faces(rects), _) => {
                for r in rects {
                    let (o, eu, ev, _, _) = self.domain.face_frame(r.face);
                    let rel = x - o;
                    let u = rel.dot(&eu).clamp(r.u0, r.u1);
                    let v = rel.dot(&ev).clamp(r.v0, r.v1);
                    consider(o + eu * u + ev * v);
                }
            }
            (Region::Zones(_), _) => unreachable!("zones exist only on the ball"),
        }
        best
    }

    pub fn distance(&self, x: &Point) -> f64 {
        self.nearest_point(x).0
    }

    /// About `count` points spread by arclength over a planar patch,
    /// including every span endpoint. Empty for non-planar patches.
    pub fn boundary_samples(&self, count: usize) -> Vec<Point> {
        let spans = self.spans();
        let total = self.area;
        if spans.is_empty() || total == 0.0 {
            return Vec::new();
        }
        let pieces = self.domain.pieces();
        let mut out = Vec::with_capacity(count + 2 * spans.len());
        for s in spans {
            let p = &pieces[s.piece];
            let k = ((count as f64 * s.length() / total).ceil() as usize).max(1);
            for i in 0..=k {
                out.push(p.point(s.s0 + s.length() * i as f64 / k as f64));
            }
        }
        out
    }

    /// Whether the patch contains the other patch up to `tol` in measure,
    /// judged by the measure of the intersection.
    pub fn covers(&self, other: &BoundaryPatch, tol: f64) -> bool {
        let outside = other.area() - other.intersection_area(self);
        outside <= tol
    }

    fn intersection_area(&self, other: &BoundaryPatch) -> f64 {
        match (&self.region, &other.region) {
            (Region::Planar(a), Region::Planar(b)) => {
                let mut sum = 0.0;
                for x in a {
                    for y in b.iter().filter(|y| y.piece == x.piece) {
                        sum += (x.s1.min(y.s1) - x.s0.max(y.s0)).max(0.0);
                    }
                }
                sum
            }
            (Region::Zones(a), Region::Zones(b)) => {
                let Shape::Ball { radius } = self.domain.shape else {
                    unreachable!("zones exist only on the ball")
                };
                let mut sum = 0.0;
                for x in a {
                    for y in b {
                        let (lo, hi) = (x.0.max(y.0), x.1.min(y.1));
                        if hi > lo {
                            sum += TAU * radius * radius * (lo.cos() - hi.cos());
                        }
                    }
                }
                sum
            }
            (Region::Faces(a), Region::Faces(b)) => {
                let mut sum = 0.0;
                for x in a {
                    for y in b.iter().filter(|y| y.face == x.face) {
                        let du = (x.u1.min(y.u1) - x.u0.max(y.u0)).max(0.0);
                        let dv = (x.v1.min(y.v1) - x.v0.max(y.v0)).max(0.0);
                        sum += du * dv;
                    }
                }
                sum
            }
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests;
