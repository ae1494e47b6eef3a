//! Registry of the unnamed constants, their empirical estimation, and the
//! recipes that turn them into theorem constants.
//!
//! Estimated values are grid suprema inflated by [`SAFETY_FACTOR`]; a
//! derived constant is `Estimated` as soon as any of its inputs is.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BoundaryPatch, Domain, PatchSpec, Shape};
use crate::Point;

use super::checks::{
    boundary_time_integral_abs_nd, boundary_time_integral_phi, critical_shape,
    log_surface_integral, riesz_surface_integral, tail_bound_check,
};
use super::KernelError;

pub const SAFETY_FACTOR: f64 = 1.2;

/// Ledger keys.
pub mod names {
    /// `I₁ ≤ C √t`.
    pub const C_ABS_LAYER: &str = "C_abs_layer";
    /// `∫_Γ |x − y|^{2−n} dS ≤ C |Γ|^{1/(n−1)}`.
    pub const C_RIESZ: &str = "C_riesz";
    /// `∫_Γ ln(d_Ω/|x − y|) dS ≤ C |Γ| ln(1/|Γ| + 1)`.
    pub const C_LOG: &str = "C_log";
    /// `I₃ ≤ C · shape(|Γ|)`.
    pub const C_CRIT: &str = "C_crit";
    /// `I₃ ≤ C/(1 − (n−1)α) |Γ|^α t^{(1−(n−1)α)/2}` at `α = 1/(2(n−1))`.
    pub const C_ALPHA: &str = "C_alpha";
    /// Tail of `|∂Φ/∂n|` off `[Γ₁]_d`: `≤ C t exp(−d²/8t)`.
    pub const C_TAIL: &str = "C_tail";
    pub const C1_STAR: &str = "C1_star";
    pub const C2_STAR: &str = "C2_star";
    /// Constant of the earlier logarithmic lower bound (user supplied).
    pub const C_LOGARITHMIC: &str = "C_logarithmic";
    /// Constant of the earlier convex lower bound (user supplied).
    pub const C_POWER: &str = "C_power";
    pub const C_GENERAL: &str = "C_general";
    pub const C2_GENERAL: &str = "C2_general";
    pub const Y0_CONVEX: &str = "Y0_convex";
    pub const C_CONVEX: &str = "C_convex";
    pub const Y0_LOCAL: &str = "Y0_local";
    pub const C_LOCAL: &str = "C_local";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Estimated,
    UserSupplied,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Estimated => "estimated",
            Provenance::UserSupplied => "user_supplied",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub value: f64,
    pub provenance: Provenance,
    /// How the value was obtained: the sample grid or the recipe.
    pub grid: String,
}

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("constant {0} is missing from the ledger")]
    Missing(String),
    #[error("constant {name} must be finite and positive, got {value}")]
    NonPositive { name: String, value: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unknown provenance {0:?}")]
    Provenance(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstantLedger {
    entries: BTreeMap<String, LedgerEntry>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    name: String,
    value: f64,
    grid_spec: String,
    provenance: String,
}

impl ConstantLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, entry: LedgerEntry) -> Result<(), LedgerError> {
        if !(entry.value.is_finite() && entry.value > 0.0) {
            return Err(LedgerError::NonPositive {
                name: name.to_string(),
                value: entry.value,
            });
        }
        self.entries.insert(name.to_string(), entry);
        Ok(())
    }

    pub fn set_user(&mut self, name: &str, value: f64) -> Result<(), LedgerError> {
        self.insert(
            name,
            LedgerEntry {
                value,
                provenance: Provenance::UserSupplied,
                grid: "user".into(),
            },
        )
    }

    pub fn get(&self, name: &str) -> Option<&LedgerEntry> {
        self.entries.get(name)
    }

    pub fn value(&self, name: &str) -> Result<f64, LedgerError> {
        self.get(name)
            .map(|e| e.value)
            .ok_or_else(|| LedgerError::Missing(name.to_string()))
    }

    /// `Estimated` if any listed constant is estimated or missing.
    pub fn combined_provenance(&self, names: &[&str]) -> Provenance {
        if names
            .iter()
            .all(|n| matches!(self.get(n), Some(e) if e.provenance == Provenance::UserSupplied))
        {
            Provenance::UserSupplied
        } else {
            Provenance::Estimated
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LedgerEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Merges `other` into `self`; entries of `other` win.
    pub fn extend(&mut self, other: &ConstantLedger) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    /// CSV with columns `name,value,grid_spec,provenance`, sorted by name.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LedgerError> {
        let mut w = csv::Writer::from_writer(out);
        for (name, e) in &self.entries {
            w.serialize(CsvRow {
                name: name.clone(),
                value: e.value,
                grid_spec: e.grid.clone(),
                provenance: e.provenance.as_str().into(),
            })?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, LedgerError> {
        let mut ledger = Self::new();
        for row in csv::Reader::from_reader(input).deserialize() {
            let row: CsvRow = row?;
            let provenance = match row.provenance.as_str() {
                "estimated" => Provenance::Estimated,
                "user_supplied" => Provenance::UserSupplied,
                other => return Err(LedgerError::Provenance(other.into())),
            };
            ledger.insert(
                &row.name,
                LedgerEntry {
                    value: row.value,
                    provenance,
                    grid: row.grid_spec,
                },
            )?;
        }
        Ok(ledger)
    }
}

/// Constants with an empirical estimation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimable {
    AbsLayer,
    Riesz,
    Log,
    Crit,
    Alpha,
    Tail,
}

impl Estimable {
    pub fn key(self) -> &'static str {
        match self {
            Estimable::AbsLayer => names::C_ABS_LAYER,
            Estimable::Riesz => names::C_RIESZ,
            Estimable::Log => names::C_LOG,
            Estimable::Crit => names::C_CRIT,
            Estimable::Alpha => names::C_ALPHA,
            Estimable::Tail => names::C_TAIL,
        }
    }
}

/// Sample grid for a supremum estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationGrid {
    pub t_values: Vec<f64>,
    /// Number of probe points `x`.
    pub x_count: usize,
    /// Patch sizes `2^{-j}`, `j = 0..levels` (planar lengths, or fractions
    /// of the sphere).
    pub levels: usize,
    pub tol: f64,
}

/// `count` points log-spaced from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

impl EstimationGrid {
    pub fn new(
        t_lo: f64,
        t_hi: f64,
        t_count: usize,
        x_count: usize,
        levels: usize,
        tol: f64,
    ) -> Self {
        Self {
            t_values: logspace(t_lo, t_hi, t_count),
            x_count,
            levels,
            tol,
        }
    }

    /// Same range with twice as many times and probe points.
    pub fn refined(&self) -> Self {
        let (lo, hi) = (self.t_values[0], self.t_values[self.t_values.len() - 1]);
        Self {
            t_values: logspace(lo, hi, 2 * self.t_values.len() - 1),
            x_count: 2 * self.x_count,
            ..self.clone()
        }
    }

    pub fn describe(&self) -> String {
        let (lo, hi) = (self.t_values[0], self.t_values[self.t_values.len() - 1]);
        format!(
            "t=logspace({lo:e},{hi:e},{});x={};levels={};tol={:e}",
            self.t_values.len(),
            self.x_count,
            self.levels,
            self.tol
        )
    }
}

/// Boundary probe points spread by arclength (planar), along a meridian
/// (ball), or on face grids (box). Rectangle and box probes keep a margin of
/// 5% of the shortest side from edges and corners.
pub fn boundary_probes(domain: &Domain, count: usize) -> Vec<Point> {
    match domain.shape() {
        Shape::Rectangle { lx, ly } => {
            let margin = 0.05 * lx.min(ly);
            let perimeter = 2.0 * (lx + ly);
            let pieces = domain.pieces();
            let mut out = Vec::new();
            for p in &pieces {
                let len = p.length();
                let k = ((count as f64 * len / perimeter).round() as usize).max(1);
                for i in 0..k {
                    out.push(p.point(margin + (len - 2.0 * margin) * (i as f64 + 0.5) / k as f64));
                }
            }
            out
        }
        Shape::Ball { radius } => (0..count)
            .map(|i| {
                let th = PI * (i as f64 + 0.5) / count as f64;
                Point::new(th.sin(), 0.0, th.cos()) * radius
            })
            .collect(),
        Shape::Box { lx, ly, lz } => {
            let k = ((count as f64 / 6.0).sqrt().ceil() as usize).max(1);
            let margin = 0.05 * lx.min(ly).min(lz);
            let mut out = Vec::new();
            for face in 0..6 {
                let (eu, ev) = match face {
                    0 | 1 => (lx, ly),
                    2 | 3 => (lx, lz),
                    _ => (ly, lz),
                };
                for i in 0..k {
                    for j in 0..k {
                        let u = margin + (eu - 2.0 * margin) * (i as f64 + 0.5) / k as f64;
                        let v = margin + (ev - 2.0 * margin) * (j as f64 + 0.5) / k as f64;
                        out.push(domain.face_point(face, u, v).0);
                    }
                }
            }
            out
        }
        _ => {
            let full = domain.full_boundary();
            let total = full.area();
            let pieces = domain.pieces();
            let mut out = Vec::new();
            for s in full.spans() {
                let k = ((count as f64 * s.length() / total).round() as usize).max(1);
                for i in 0..k {
                    out.push(
                        pieces[s.piece].point(s.s0 + s.length() * (i as f64 + 0.5) / k as f64),
                    );
                }
            }
            out
        }
    }
}

/// Points of the closure of a patch: span endpoints and interior points
/// (planar), or meridian points of the zones (ball).
pub fn patch_probes(patch: &BoundaryPatch, count: usize) -> Vec<Point> {
    let domain = patch.domain();
    if let Shape::Ball { radius } = domain.shape() {
        let per = (count / patch.zones().len().max(1)).max(2);
        return patch
            .zones()
            .iter()
            .flat_map(|&(a, b)| {
                (0..per).map(move |i| {
                    let th = a + (b - a) * i as f64 / (per - 1) as f64;
                    Point::new(th.sin(), 0.0, th.cos()) * radius
                })
            })
            .collect();
    }
    let pieces = domain.pieces();
    let total = patch.area();
    let mut out = Vec::new();
    for s in patch.spans() {
        let k = ((count as f64 * s.length() / total).round() as usize).max(1);
        for i in 0..=k {
            out.push(pieces[s.piece].point(s.s0 + s.length() * i as f64 / k as f64));
        }
    }
    out
}

/// Patch of size level `j` used by the small-patch estimates: an arc or
/// edge segment of length `2^{-j}` (planar) or a polar cap of area
/// `4πR² 2^{-j}` (ball).
pub fn patch_at_level(domain: &Domain, j: usize) -> Result<BoundaryPatch, KernelError> {
    let frac = 0.5f64.powi(j as i32);
    let spec = match domain.shape() {
        Shape::Disk { radius } => PatchSpec::Arc {
            center: PI,
            width: frac / radius,
        },
        Shape::NotchedDisk { radius, angle, .. } => PatchSpec::Arc {
            center: angle + PI,
            width: frac / radius,
        },
        Shape::Rectangle { lx, .. } => {
            let len = frac.min(lx);
            PatchSpec::Edge {
                edge: 0,
                start: 0.5 * (lx - len),
                end: 0.5 * (lx + len),
            }
        }
        Shape::Ball { .. } => PatchSpec::Cap {
            half_angle: (1.0 - 2.0 * frac).clamp(-1.0, 1.0).acos(),
        },
        Shape::Box { lx, ly, .. } => {
            let side = (frac * lx * ly).sqrt();
            PatchSpec::Face {
                face: 0,
                u: [0.5 * (lx - side), 0.5 * (lx + side)],
                v: [0.5 * (ly - side), 0.5 * (ly + side)],
            }
        }
    };
    Ok(domain.patch(&spec)?)
}

/// What an estimate is taken over.
#[derive(Debug, Clone, Copy)]
pub struct EstimationTarget<'a> {
    pub domain: &'a Domain,
    /// Required for the tail constant.
    pub gamma1: Option<&'a BoundaryPatch>,
    /// Required for the tail constant.
    pub d: Option<f64>,
}

/// Deterministic parallel supremum over an indexed grid.
fn grid_sup<F>(len: usize, f: F) -> Result<f64, KernelError>
where
    F: Fn(usize) -> Result<f64, KernelError> + Sync + Send,
{
    let values: Vec<Result<f64, KernelError>> = (0..len).into_par_iter().map(f).collect();
    let mut best = 0.0f64;
    for v in values {
        best = best.max(v?);
    }
    Ok(best)
}

/// Raw grid supremum of the ratio defining `name` (no safety factor).
pub fn ratio_supremum(
    name: Estimable,
    target: &EstimationTarget,
    grid: &EstimationGrid,
) -> Result<f64, KernelError> {
    let domain = target.domain;
    let n = domain.dim();
    let tol = grid.tol;
    let ts = &grid.t_values;
    match name {
        Estimable::AbsLayer => {
            let xs = boundary_probes(domain, grid.x_count);
            grid_sup(xs.len() * ts.len(), |k| {
                let (x, t) = (&xs[k / ts.len()], ts[k % ts.len()]);
                Ok(boundary_time_integral_abs_nd(x, t, domain, tol * t.sqrt())?.value / t.sqrt())
            })
        }
        Estimable::Riesz | Estimable::Log => {
            let patches = (0..grid.levels)
                .map(|j| patch_at_level(domain, j))
                .collect::<Result<Vec<_>, _>>()?;
            let xs = boundary_probes(domain, grid.x_count);
            grid_sup(patches.len() * xs.len(), |k| {
                let (p, x) = (&patches[k / xs.len()], &xs[k % xs.len()]);
                let shape = critical_shape(p.area(), n);
                let scaled_tol = tol * shape;
                let v = if name == Estimable::Riesz {
                    riesz_surface_integral(x, p, scaled_tol)?
                } else {
                    log_surface_integral(x, p, scaled_tol)?
                };
                Ok(v.value / shape)
            })
        }
        Estimable::Crit | Estimable::Alpha => {
            let ts: Vec<f64> = if n == 2 {
                ts.iter().copied().filter(|&t| t <= 1.0).collect()
            } else {
                ts.clone()
            };
            let patches = (0..grid.levels)
                .map(|j| patch_at_level(domain, j))
                .collect::<Result<Vec<_>, _>>()?;
            // The integral peaks for x on or next to the patch.
            let xs: Vec<Vec<Point>> = patches
                .iter()
                .map(|p| {
                    let mut v = patch_probes(p, grid.x_count / 2);
                    v.extend(boundary_probes(domain, grid.x_count / 2));
                    v
                })
                .collect();
            let alpha = 1.0 / (2.0 * (n as f64 - 1.0));
            let expo = 1.0 - (n as f64 - 1.0) * alpha;
            let mut jobs = Vec::new();
            for (pi, x) in xs.iter().enumerate() {
                for xi in 0..x.len() {
                    for &t in &ts {
                        jobs.push((pi, xi, t));
                    }
                }
            }
            grid_sup(jobs.len(), |k| {
                let (pi, xi, t) = jobs[k];
                let p = &patches[pi];
                let shape = if name == Estimable::Crit {
                    critical_shape(p.area(), n)
                } else {
                    p.area().powf(alpha) * t.powf(expo / 2.0) / expo
                };
                let v = boundary_time_integral_phi(&xs[pi][xi], t, p, tol * shape)?;
                Ok(v.value / shape)
            })
        }
        Estimable::Tail => {
            let gamma1 = target
                .gamma1
                .ok_or_else(|| KernelError::Hypothesis("the tail constant needs Γ₁".into()))?;
            let d = target
                .d
                .ok_or_else(|| KernelError::Hypothesis("the tail constant needs d".into()))?;
            let xs = patch_probes(gamma1, grid.x_count);
            grid_sup(xs.len() * ts.len(), |k| {
                let (x, t) = (&xs[k / ts.len()], ts[k % ts.len()]);
                let shape = t * (-d * d / (8.0 * t)).exp();
                Ok(tail_bound_check(x, t, gamma1, d, tol * shape.max(1e-300))?.ratio())
            })
        }
    }
}

/// Grid supremum times [`SAFETY_FACTOR`], labelled `Estimated`.
pub fn estimate_constant(
    name: Estimable,
    target: &EstimationTarget,
    grid: &EstimationGrid,
) -> Result<LedgerEntry, KernelError> {
    let sup = ratio_supremum(name, target, grid)?;
    Ok(LedgerEntry {
        value: SAFETY_FACTOR * sup,
        provenance: Provenance::Estimated,
        grid: format!("{:?};{}", target.domain.kind(), grid.describe()),
    })
}

/// `C*` of the convex argument: `max(C_abs_layer, 4 C_crit)`, at least `1/4`
/// when `n = 2`.
pub fn convex_c_star(ledger: &ConstantLedger, n: usize) -> Result<f64, LedgerError> {
    let c = ledger
        .value(names::C_ABS_LAYER)?
        .max(4.0 * ledger.value(names::C_CRIT)?);
    Ok(if n == 2 { c.max(0.25) } else { c })
}

/// `C*` of the locally convex argument: `C_abs_layer`, at least `1/4` when
/// `n = 2`.
pub fn local_c_star(ledger: &ConstantLedger, n: usize) -> Result<f64, LedgerError> {
    let c = ledger.value(names::C_ABS_LAYER)?;
    Ok(if n == 2 { c.max(0.25) } else { c })
}

fn derived(ledger: &ConstantLedger, inputs: &[&str], value: f64, recipe: &str) -> LedgerEntry {
    LedgerEntry {
        value,
        provenance: ledger.combined_provenance(inputs),
        grid: format!("recipe:{recipe}"),
    }
}

/// `C* = max(C_abs_layer, 4 C_crit)` (at least `1/4` when `n = 2`), then
/// `Y₀ = 1/(12 C*)` and `C = 1/(640 C*³)`.
pub fn convex_recipe(ledger: &mut ConstantLedger, n: usize) -> Result<(), LedgerError> {
    let inputs = [names::C_ABS_LAYER, names::C_CRIT];
    let c_star = convex_c_star(ledger, n)?;
    let y0 = derived(ledger, &inputs, 1.0 / (12.0 * c_star), "1/(12C*)");
    let c = derived(
        ledger,
        &inputs,
        1.0 / (640.0 * c_star.powi(3)),
        "1/(640C*^3)",
    );
    ledger.insert(names::Y0_CONVEX, y0)?;
    ledger.insert(names::C_CONVEX, c)
}

/// `C* = C_abs_layer` (at least `1/4` when `n = 2`), `C₁* = C_tail/(2C*²)`,
/// `C₂* = 4 C_crit`, then `Y₀` as the minimum of the three smallness
/// thresholds and `C = d²/(1280 C₂*)`.
pub fn local_recipe(ledger: &mut ConstantLedger, n: usize, d: f64) -> Result<(), LedgerError> {
    let c_star = local_c_star(ledger, n)?;
    let c1 = ledger.value(names::C_TAIL)? / (2.0 * c_star * c_star);
    let c2 = 4.0 * ledger.value(names::C_CRIT)?;
    let e1 = derived(
        ledger,
        &[names::C_TAIL, names::C_ABS_LAYER],
        c1,
        "C_tail/(2C*^2)",
    );
    let e2 = derived(ledger, &[names::C_CRIT], c2, "4C_crit");
    ledger.insert(names::C1_STAR, e1)?;
    ledger.insert(names::C2_STAR, e2)?;
    let inputs = [names::C_TAIL, names::C_ABS_LAYER, names::C_CRIT];
    let y0 = (1.0 / (24.0 * c2))
        .min(2.0 * c2 / c1)
        .min(c1 / (4.0 * c2) * (-2.0 * d * d * c_star * c_star).exp());
    let e = derived(
        ledger,
        &inputs,
        y0,
        "min{1/(24C2*),2C2*/C1*,C1*/(4C2*)exp(-2d^2C*^2)}",
    );
    ledger.insert(names::Y0_LOCAL, e)?;
    let e = derived(
        ledger,
        &[names::C_CRIT],
        d * d / (1280.0 * c2),
        "d^2/(1280C2*)",
    );
    ledger.insert(names::C_LOCAL, e)
}

/// `m = max(C_abs_layer, C_alpha)`, `C₁ = max(8192 m⁴, 2048 m²)`,
/// `C₂ = min{1/(16 C*²), 1/C₁}` and `C = C₂/(4 ln 2)`.
pub fn general_recipe(ledger: &mut ConstantLedger) -> Result<(), LedgerError> {
    let inputs = [names::C_ABS_LAYER, names::C_ALPHA];
    let c_star = ledger.value(names::C_ABS_LAYER)?;
    let m = c_star.max(ledger.value(names::C_ALPHA)?);
    let c1 = (8192.0 * m.powi(4)).max(2048.0 * m * m);
    let c2 = (1.0 / (16.0 * c_star * c_star)).min(1.0 / c1);
    let e = derived(
        ledger,
        &inputs,
        c2,
        "min{1/(16C*^2),1/max(8192m^4,2048m^2)}",
    );
    ledger.insert(names::C2_GENERAL, e)?;
    let e = derived(ledger, &inputs, c2 / (4.0 * LN_2), "C2/(4ln2)");
    ledger.insert(names::C_GENERAL, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ledger_rejects_non_positive_and_round_trips_csv() {
        let mut l = ConstantLedger::new();
        assert!(l.set_user("a", 0.0).is_err());
        assert!(l.set_user("a", f64::INFINITY).is_err());
        l.set_user("a", 2.5).unwrap();
        l.insert(
            "b",
            LedgerEntry {
                value: 0.125,
                provenance: Provenance::Estimated,
                grid: "t=logspace(1e-4,1,9);x=40".into(),
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("name,value,grid_spec,provenance\n"));
        let back = ConstantLedger::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, l);
        assert_eq!(l.combined_provenance(&["a"]), Provenance::UserSupplied);
        assert_eq!(l.combined_provenance(&["a", "b"]), Provenance::Estimated);
        assert_eq!(l.combined_provenance(&["a", "zzz"]), Provenance::Estimated);
        assert!(matches!(l.value("zzz"), Err(LedgerError::Missing(_))));
    }

    #[test]
    fn logspace_endpoints() {
        let v = logspace(1e-4, 1.0, 5);
        assert_eq!(v.len(), 5);
        assert_relative_eq!(v[0], 1e-4, max_relative = 1e-14);
        assert_relative_eq!(v[2], 1e-2, max_relative = 1e-14);
        assert_relative_eq!(v[4], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn recipes_follow_the_formulas() {
        let mut l = ConstantLedger::new();
        l.set_user(names::C_ABS_LAYER, 0.5).unwrap();
        l.set_user(names::C_CRIT, 0.1).unwrap();
        convex_recipe(&mut l, 3).unwrap();
        assert_relative_eq!(l.value(names::Y0_CONVEX).unwrap(), 1.0 / 6.0);
        assert_relative_eq!(l.value(names::C_CONVEX).unwrap(), 1.0 / 80.0);
        assert_eq!(
            l.get(names::C_CONVEX).unwrap().provenance,
            Provenance::UserSupplied
        );

        l.set_user(names::C_TAIL, 2.0).unwrap();
        local_recipe(&mut l, 3, 0.5).unwrap();
        assert_relative_eq!(l.value(names::C1_STAR).unwrap(), 4.0);
        assert_relative_eq!(l.value(names::C2_STAR).unwrap(), 0.4);
        let y0 = (1.0f64 / 9.6).min(0.2).min(0.25 * (-0.125f64).exp());
        assert_relative_eq!(l.value(names::Y0_LOCAL).unwrap(), y0);
        assert_relative_eq!(l.value(names::C_LOCAL).unwrap(), 0.25 / 512.0);

        l.insert(
            names::C_ALPHA,
            LedgerEntry {
                value: 0.25,
                provenance: Provenance::Estimated,
                grid: "g".into(),
            },
        )
        .unwrap();
        general_recipe(&mut l).unwrap();
        // m = 0.5: C1 = max(512, 512) = 512; C2 = min(1/4, 1/512).
        assert_relative_eq!(l.value(names::C2_GENERAL).unwrap(), 1.0 / 512.0);
        assert_eq!(
            l.get(names::C_GENERAL).unwrap().provenance,
            Provenance::Estimated
        );
    }

    #[test]
    fn level_patches_have_the_requested_size() {
        let disk = Domain::disk(1.0).unwrap();
        assert_relative_eq!(
            patch_at_level(&disk, 3).unwrap().area(),
            0.125,
            max_relative = 1e-14
        );
        let ball = Domain::ball(1.0).unwrap();
        assert_relative_eq!(
            patch_at_level(&ball, 2).unwrap().area(),
            PI,
            max_relative = 1e-12
        );
        let sq = Domain::rectangle(1.0, 1.0).unwrap();
        assert_relative_eq!(patch_at_level(&sq, 0).unwrap().area(), 1.0);
    }

    #[test]
    fn rectangle_probes_avoid_corners() {
        let sq = Domain::rectangle(1.0, 2.0).unwrap();
        let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 2.0), (0.0, 2.0)];
        for p in boundary_probes(&sq, 40) {
            for c in corners {
                assert!((p.x - c.0).hypot(p.y - c.1) >= 0.05 - 1e-12);
            }
        }
    }
}
