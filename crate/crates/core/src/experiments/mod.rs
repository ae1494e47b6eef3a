//! Experiment files, parameter sweeps, order fits and constant-estimation
//! pipelines.
//!
//! One experiment lives in one TOML file: top-level keys plus one section
//! per subcommand.
//!
//! ```toml
//! seed = 7
//!
//! [simulation]
//! lx = 1.0
//! ly = 1.0
//! gamma1_center = 0.5
//! gamma1_length = 0.25
//! q = 2.0
//! h = 0.05
//! u0 = { kind = "constant", c = 1.0 }
//!
//! [constants]
//! C_abs_layer = 0.6
//! ```

mod fit;
mod pipeline;
mod sweep;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{BoundError, BoundParams};
use crate::geometry::{Domain, GeometryError, PatchSpec, Shape};
use crate::kernel::constants::{ConstantLedger, EstimationGrid, LedgerError};
use crate::kernel::KernelError;
use crate::sequence::{SequenceError, SequenceParams, SequenceVariant};
use crate::solver::{SimConfig, SolverError};

pub use fit::{fit_order, FitModel, OrderFit};
pub use pipeline::{estimate_constants_pipeline, PipelineOutput, Theorem};
pub use sweep::{run_sweep, write_sweep_csv, SweepAxis, SweepRow, SweepSpec, BOUND_COLUMNS};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("fit needs at least three finite points admissible for the model: {0}")]
    Fit(String),
}

impl ExperimentError {
    /// Whether the failure comes from the input rather than the numerics.
    pub fn is_config_error(&self) -> bool {
        match self {
            ExperimentError::Config(_)
            | ExperimentError::Toml(_)
            | ExperimentError::Io(_)
            | ExperimentError::Ledger(_)
            | ExperimentError::Geometry(_)
            | ExperimentError::Fit(_) => true,
            ExperimentError::Solver(e) => matches!(e, SolverError::Config(_)),
            ExperimentError::Bound(e) => !matches!(e, BoundError::OutOfRegime),
            ExperimentError::Sequence(e) => {
                matches!(
                    e,
                    SequenceError::InvalidParameter(_) | SequenceError::MissingConstant(_)
                )
            }
            ExperimentError::Kernel(e) => {
                matches!(e, KernelError::Geometry(_) | KernelError::NotConvex)
            }
            ExperimentError::Csv(_) => false,
        }
    }
}

/// Bound inputs that do not come from a simulation configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub m0: Option<f64>,
    #[serde(default)]
    pub gamma1_area: Option<f64>,
    #[serde(default)]
    pub u0_integral_1mq: Option<f64>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub convex: Option<bool>,
    /// CSV ledger written by `estimate-constants`.
    #[serde(default)]
    pub ledger: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    pub variant: SequenceVariant,
    pub q: f64,
    pub m0: f64,
    #[serde(default = "two")]
    pub n: usize,
    /// Explicit δ₁; otherwise it follows from `gamma1_area` and the ledger.
    #[serde(default)]
    pub delta1: Option<f64>,
    #[serde(default)]
    pub gamma1_area: Option<f64>,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub c_star: Option<f64>,
    #[serde(default)]
    pub c1_star: Option<f64>,
    #[serde(default)]
    pub c2_star: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    Half,
    Convex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySection {
    pub domain: Shape,
    pub kind: IdentityKind,
    #[serde(default = "twenty")]
    pub points: usize,
    pub times: Vec<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
}

fn twenty() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub domain: Shape,
    #[serde(default)]
    pub gamma1: Option<PatchSpec>,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub theorems: Option<Vec<Theorem>>,
    #[serde(default = "t_lo")]
    pub t_lo: f64,
    #[serde(default = "one")]
    pub t_hi: f64,
    #[serde(default = "t_count")]
    pub t_count: usize,
    #[serde(default = "x_count")]
    pub x_count: usize,
    #[serde(default = "levels")]
    pub levels: usize,
    #[serde(default)]
    pub tol: Option<f64>,
}

fn t_lo() -> f64 {
    1e-4
}
fn one() -> f64 {
    1.0
}
fn t_count() -> usize {
    9
}
fn x_count() -> usize {
    16
}
fn levels() -> usize {
    8
}

impl EstimateSection {
    pub fn grid(&self, default_tol: f64) -> EstimationGrid {
        EstimationGrid::new(
            self.t_lo,
            self.t_hi,
            self.t_count,
            self.x_count,
            self.levels,
            self.tol.unwrap_or(default_tol),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub workers: Option<usize>,
}

/// Parsed experiment file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub simulation: Option<SimConfig>,
    #[serde(default)]
    pub bounds: Option<BoundsSection>,
    #[serde(default)]
    pub sequence: Option<SequenceSection>,
    #[serde(default)]
    pub identity: Option<IdentitySection>,
    #[serde(default)]
    pub estimate: Option<EstimateSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    /// User-supplied constants by ledger name.
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> Result<&'a T, ExperimentError> {
        value
            .as_ref()
            .ok_or_else(|| ExperimentError::Config(format!("missing [{name}] section")))
    }

    pub fn simulation(&self) -> Result<&SimConfig, ExperimentError> {
        self.section(&self.simulation, "simulation")
    }

    /// Ledger from the optional CSV file named in `[bounds]`, overlaid with
    /// the user-supplied `[constants]`. A relative CSV path is resolved
    /// against `base_dir`.
    pub fn ledger(&self, base_dir: Option<&Path>) -> Result<ConstantLedger, ExperimentError> {
        let mut ledger = ConstantLedger::new();
        if let Some(path) = self.bounds.as_ref().and_then(|b| b.ledger.as_ref()) {
            let path = match base_dir {
                Some(dir) => dir.join(path),
                None => Path::new(path).to_path_buf(),
            };
            ledger = ConstantLedger::read_csv(std::fs::File::open(path)?)?;
        }
        for (name, &value) in &self.constants {
            ledger.set_user(name, value)?;
        }
        Ok(ledger)
    }

    /// Bound parameters: explicit `[bounds]` keys win, anything missing is
    /// derived from `[simulation]`.
    pub fn bound_params(&self, base_dir: Option<&Path>) -> Result<BoundParams, ExperimentError> {
        let section = self.bounds.clone().unwrap_or_default();
        let ledger = self.ledger(base_dir)?;
        match &self.simulation {
            Some(sim) => {
                let mut p = bound_params_for(sim, &section, ledger)?;
                p.n = section.n.unwrap_or(2);
                p.q = section.q.unwrap_or(p.q);
                p.m0 = section.m0.unwrap_or(p.m0);
                p.gamma1_area = section.gamma1_area.unwrap_or(p.gamma1_area);
                p.u0_integral_1mq = section.u0_integral_1mq.or(p.u0_integral_1mq);
                p.validate()?;
                Ok(p)
            }
            None => {
                let need = |v: Option<f64>, k: &str| {
                    v.ok_or_else(|| {
                        ExperimentError::Config(format!(
                            "[bounds] needs `{k}` without [simulation]"
                        ))
                    })
                };
                let p = BoundParams {
                    n: section.n.unwrap_or(2),
                    q: need(section.q, "q")?,
                    m0: need(section.m0, "m0")?,
                    gamma1_area: need(section.gamma1_area, "gamma1_area")?,
                    u0_integral_1mq: section.u0_integral_1mq,
                    ledger,
                    alpha: section.alpha,
                    d: section.d,
                    convex: section.convex.unwrap_or(false),
                };
                p.validate()?;
                Ok(p)
            }
        }
    }

    pub fn sequence_params(
        &self,
        base_dir: Option<&Path>,
    ) -> Result<SequenceParams, ExperimentError> {
        let s = self.section(&self.sequence, "sequence")?;
        let params = match s.delta1 {
            Some(delta1) => SequenceParams {
                q: s.q,
                m0: s.m0,
                delta1,
                n: s.n,
                variant: s.variant,
                d: s.d,
                c_star: s.c_star,
                c1_star: s.c1_star,
                c2_star: s.c2_star,
            },
            None => {
                let area = s.gamma1_area.ok_or_else(|| {
                    ExperimentError::Config("[sequence] needs `delta1` or `gamma1_area`".into())
                })?;
                SequenceParams::from_ledger(
                    s.variant,
                    s.q,
                    s.m0,
                    area,
                    s.n,
                    s.d,
                    &self.ledger(base_dir)?,
                )?
            }
        };
        params.validate()?;
        Ok(params)
    }

    pub fn sweep_spec(&self, base_dir: Option<&Path>) -> Result<SweepSpec, ExperimentError> {
        let s = self.section(&self.sweep, "sweep")?;
        let spec = SweepSpec {
            axis: s.axis,
            values: s.values.clone(),
            base: self.simulation()?.clone(),
            bounds: self.bounds.clone().unwrap_or_default(),
            ledger: self.ledger(base_dir)?,
            workers: s.workers,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Largest initial value on the simulation grid.
pub fn initial_maximum(sim: &SimConfig) -> Result<f64, ExperimentError> {
    let solver = crate::solver::Solver::new(sim.clone())?;
    Ok(solver.initial_state().u.iter().copied().fold(0.0, f64::max))
}

/// Bound parameters describing a simulation on the rectangle.
pub fn bound_params_for(
    sim: &SimConfig,
    section: &BoundsSection,
    ledger: ConstantLedger,
) -> Result<BoundParams, ExperimentError> {
    let domain = Domain::rectangle(sim.lx, sim.ly)?;
    Ok(BoundParams {
        n: 2,
        q: sim.q,
        m0: initial_maximum(sim)?,
        gamma1_area: sim.gamma1_length,
        u0_integral_1mq: Some(sim.u0_integral_1mq()?),
        ledger,
        alpha: section.alpha,
        d: section.d,
        convex: section.convex.unwrap_or(domain.is_convex()),
    })
}
