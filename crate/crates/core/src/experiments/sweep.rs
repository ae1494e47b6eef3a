use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bound_params_for, BoundsSection, ExperimentError};
use crate::bounds::{self, bound_report, BoundReport, BoundValue};
use crate::kernel::constants::ConstantLedger;
use crate::solver::{run, InitialCondition, SimConfig};

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Length of `Γ₁`.
    Gamma1Area,
    Q,
    /// Scale of the initial data.
    M0,
    H,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Gamma1Area => "gamma1_area",
            SweepAxis::Q => "q",
            SweepAxis::M0 => "M0",
            SweepAxis::H => "h",
        }
    }

    /// `base` with this axis set to `v`.
    pub fn apply(self, base: &SimConfig, v: f64) -> SimConfig {
        let mut c = base.clone();
        match self {
            SweepAxis::Gamma1Area => c.gamma1_length = v,
            SweepAxis::Q => c.q = v,
            SweepAxis::H => c.h = v,
            SweepAxis::M0 => {
                c.u0 = match c.u0 {
                    InitialCondition::Constant { .. } => InitialCondition::Constant { c: v },
                    InitialCondition::Bump { center, width, .. } => InitialCondition::Bump {
                        m0: v,
                        center,
                        width,
                    },
                }
            }
        }
        c
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: SimConfig,
    pub bounds: BoundsSection,
    pub ledger: ConstantLedger,
    /// Concurrent runs; `None` uses every core.
    pub workers: Option<usize>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.values.is_empty() {
            return bad("a sweep needs at least one value".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("sweep values must be finite".into());
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return bad(format!(
                "sweep values must be strictly monotone, got {:?}",
                self.values
            ));
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        for &v in &self.values {
            self.axis.apply(&self.base, v).validate()?;
        }
        Ok(())
    }
}

/// One sweep point. Failures are recorded, not propagated.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub config: SimConfig,
    pub status: String,
    pub t_star: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    pub t_last: Option<f64>,
    /// `Y = M₀^{q−1} |Γ₁| ln(1/|Γ₁| + 1)`.
    pub y: Option<f64>,
    pub bounds: Result<BoundReport, String>,
}

/// Bound formulas in CSV column order.
pub const BOUND_COLUMNS: [&str; 6] = [
    bounds::UPPER,
    bounds::LOWER_LOGARITHMIC,
    bounds::LOWER_POWER,
    bounds::LOWER_GENERAL,
    bounds::LOWER_CONVEX,
    bounds::LOWER_LOCAL,
];

fn sweep_point(spec: &SweepSpec, value: f64) -> SweepRow {
    let config = spec.axis.apply(&spec.base, value);
    let (status, t_star, bracket, t_last) = match run(&config) {
        Ok(r) => (
            r.status.as_str().to_string(),
            r.t_star_estimate,
            Some(r.t_star_bracket),
            Some(r.t_last),
        ),
        Err(e) => (format!("error: {e}"), None, None, None),
    };
    let params = bound_params_for(&config, &spec.bounds, spec.ledger.clone());
    let y = params.as_ref().ok().map(|p| p.y());
    let bounds = params
        .and_then(|p| bound_report(&p).map_err(ExperimentError::from))
        .map_err(|e| e.to_string());
    SweepRow {
        value,
        config,
        status,
        t_star,
        bracket,
        t_last,
        y,
        bounds,
    }
}

/// Runs every sweep point, concurrently up to `spec.workers`, and returns
/// rows in axis order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, ExperimentError> {
    spec.validate()?;
    let work = || {
        spec.values
            .par_iter()
            .map(|&v| sweep_point(spec, v))
            .collect()
    };
    match spec.workers {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| ExperimentError::Config(e.to_string()))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:e}"))
}

/// Header: `<axis>,status,t_star,t_low,t_high,t_last,Y`, then a value and a
/// note column per bound formula, then `consistency`. Missing numbers are
/// written as `NA` with the reason in the matching note column.
pub fn write_sweep_csv<W: Write>(
    axis: SweepAxis,
    rows: &[SweepRow],
    out: W,
) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        axis.name(),
        "status",
        "t_star",
        "t_low",
        "t_high",
        "t_last",
        "Y",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for f in BOUND_COLUMNS {
        header.push(f.to_string());
        header.push(format!("{f}_note"));
    }
    header.push("consistency".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            format!("{:e}", r.value),
            r.status.clone(),
            num(r.t_star),
            num(r.bracket.map(|b| b.0)),
            num(r.bracket.map(|b| b.1)),
            num(r.t_last),
            num(r.y),
        ];
        match &r.bounds {
            Ok(report) => {
                for f in BOUND_COLUMNS {
                    let row = report.rows.iter().find(|b| b.formula == f);
                    let (value, note) = match row.map(|b| (&b.value, b.certified)) {
                        Some((BoundValue::Value { value }, certified)) => (
                            format!("{value:e}"),
                            if certified {
                                "certified"
                            } else {
                                "estimated constants"
                            }
                            .to_string(),
                        ),
                        Some((BoundValue::Vacuous { reason, .. }, _)) => {
                            ("NA".into(), format!("vacuous: {reason}"))
                        }
                        Some((BoundValue::Inapplicable { reason }, _)) => {
                            ("NA".into(), format!("inapplicable: {reason}"))
                        }
                        None => ("NA".into(), "not evaluated".into()),
                    };
                    rec.push(value);
                    rec.push(note);
                }
                rec.push(
                    if report.inconsistent {
                        "inconsistent"
                    } else {
                        "consistent"
                    }
                    .into(),
                );
            }
            Err(e) => {
                for _ in BOUND_COLUMNS {
                    rec.push("NA".into());
                    rec.push(format!("error: {e}"));
                }
                rec.push("not evaluated".into());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
