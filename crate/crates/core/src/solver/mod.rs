//! Explicit finite-difference simulation of the heat equation on a
//! rectangle with flux `u^q` through a segment `Γ₁` of the bottom edge and
//! no flux elsewhere.
//!
//! Nodes sit on the grid `(i h, j h)`, `0 ≤ i ≤ nx`, `0 ≤ j ≤ ny`. The
//! Neumann data enter through ghost values `u_ghost = u_mirror + 2h·flux`;
//! a bottom node whose dual cell is only partly covered by `Γ₁` receives
//! the covered fraction of the flux, so the discrete flux integral is exact
//! for constant data.

mod representation;
mod snapshot;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use representation::{representation_residual, ResidualRow};
pub use snapshot::Snapshot;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("time step {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("solution became non-finite at t = {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Kernel(#[from] crate::kernel::KernelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Constant {
        c: f64,
    },
    /// `m0 · exp(−|x − center|²/width²)`.
    Bump {
        m0: f64,
        center: [f64; 2],
        width: f64,
    },
}

impl InitialCondition {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            InitialCondition::Constant { c } => c,
            InitialCondition::Bump { m0, center, width } => {
                let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                m0 * (-r2 / (width * width)).exp()
            }
        }
    }
}

fn default_safety() -> f64 {
    0.9
}
fn default_threshold() -> f64 {
    1e6
}
fn default_max_steps() -> usize {
    5_000_000
}
fn default_true() -> bool {
    true
}
fn default_steady_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub lx: f64,
    pub ly: f64,
    /// Center of `Γ₁` on the bottom edge.
    pub gamma1_center: f64,
    /// Length `s` of `Γ₁`.
    pub gamma1_length: f64,
    pub q: f64,
    pub u0: InitialCondition,
    pub h: f64,
    #[serde(default = "default_safety")]
    pub dt_safety: f64,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// `false` turns the nonlinear flux off.
    #[serde(default = "default_true")]
    pub flux_enabled: bool,
    /// A zero-flux run counts as steady once `max |u_t|` drops below this.
    #[serde(default = "default_steady_tol")]
    pub steady_tol: f64,
    /// Store a snapshot whenever `t` crosses a multiple of this interval.
    #[serde(default)]
    pub snapshot_interval: Option<f64>,
}

impl SimConfig {
    /// Unit square, `Γ₁` centered on the bottom edge, `u₀ ≡ 1`.
    pub fn unit_square(q: f64, s: f64, h: f64) -> Self {
        Self {
            lx: 1.0,
            ly: 1.0,
            gamma1_center: 0.5,
            gamma1_length: s,
            q,
            u0: InitialCondition::Constant { c: 1.0 },
            h,
            dt_safety: default_safety(),
            blowup_threshold: default_threshold(),
            max_steps: default_max_steps(),
            flux_enabled: true,
            steady_tol: default_steady_tol(),
            snapshot_interval: None,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::Config(m));
        if !(self.lx > 0.0 && self.ly > 0.0) {
            return bad(format!(
                "sides must be positive, got {} x {}",
                self.lx, self.ly
            ));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return bad(format!("q must exceed 1, got {}", self.q));
        }
        if !(self.h > 0.0) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        for (name, side) in [("lx", self.lx), ("ly", self.ly)] {
            let cells = side / self.h;
            if (cells - cells.round()).abs() > 1e-12 * cells.max(1.0) || cells.round() < 2.0 {
                return bad(format!(
                    "h = {} must divide {name} = {side} into at least two cells",
                    self.h
                ));
            }
        }
        let s = self.gamma1_length;
        if !(s >= 0.0 && s <= self.lx) {
            return bad(format!("Γ₁ length must lie in [0, lx], got {s}"));
        }
        let (a, b) = (self.gamma1_center - s / 2.0, self.gamma1_center + s / 2.0);
        if a < -1e-12 || b > self.lx + 1e-12 {
            return bad(format!("Γ₁ = [{a}, {b}] leaves the bottom edge"));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety < 1.0) {
            return bad(format!(
                "dt_safety must lie in (0, 1), got {}",
                self.dt_safety
            ));
        }
        match self.u0 {
            InitialCondition::Constant { c } if !(c > 0.0) => {
                return bad(format!("constant u0 must be positive, got {c}"))
            }
            InitialCondition::Bump { m0, width, .. } if !(m0 > 0.0 && width > 0.0) => {
                return bad("bump needs m0 > 0 and width > 0".into())
            }
            _ => {}
        }
        if let Some(dt) = self.snapshot_interval {
            if !(dt > 0.0) {
                return bad(format!("snapshot_interval must be positive, got {dt}"));
            }
        }
        Ok(())
    }

    /// Trapezoidal `∫_Ω u₀^{1−q}` on the simulation grid (exact for
    /// constant data).
    pub fn u0_integral_1mq(&self) -> Result<f64, SolverError> {
        let solver = Solver::new(self.clone())?;
        let u0 = solver.initial_state();
        Ok(solver.weighted_sum(&u0.u, |v| v.powf(1.0 - self.q)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    /// Row-major node values, `u[j (nx + 1) + i]`.
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimStatus {
    BlewUp,
    MaxStepsReached,
    Steady,
}

impl SimStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SimStatus::BlewUp => "blew_up",
            SimStatus::MaxStepsReached => "max_steps_reached",
            SimStatus::Steady => "steady",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub dt_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub config: SimConfig,
    /// `(t, M(t))` with `M` the running maximum over space and past time.
    pub m_trace: Vec<(f64, f64)>,
    /// Coordinates of the grid maximum of the final state.
    pub argmax_location: (f64, f64),
    pub t_last: f64,
    pub t_star_estimate: Option<f64>,
    pub t_star_bracket: (f64, f64),
    pub grid_meta: GridMeta,
    pub status: SimStatus,
    pub snapshots: Vec<Snapshot>,
    pub final_state: Snapshot,
}

/// Explicit scheme for one configuration.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SimConfig,
    nx: usize,
    ny: usize,
    /// Fraction of each bottom node's dual cell covered by `Γ₁`.
    gamma1_fraction: Vec<f64>,
}

impl Solver {
    pub fn new(config: SimConfig) -> Result<Self, SolverError> {
        config.validate()?;
        let nx = (config.lx / config.h).round() as usize;
        let ny = (config.ly / config.h).round() as usize;
        let h = config.h;
        let (a, b) = (
            config.gamma1_center - config.gamma1_length / 2.0,
            config.gamma1_center + config.gamma1_length / 2.0,
        );
        let gamma1_fraction = (0..=nx)
            .map(|i| {
                let x = i as f64 * h;
                let (lo, hi) = ((x - h / 2.0).max(0.0), (x + h / 2.0).min(config.lx));
                let covered = (hi.min(b) - lo.max(a)).max(0.0);
                covered / (hi - lo)
            })
            .collect();
        Ok(Self {
            config,
            nx,
            ny,
            gamma1_fraction,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn gamma1_fraction(&self) -> &[f64] {
        &self.gamma1_fraction
    }

    pub fn initial_state(&self) -> State {
        let h = self.config.h;
        let mut u = Vec::with_capacity((self.nx + 1) * (self.ny + 1));
        for j in 0..=self.ny {
            for i in 0..=self.nx {
                u.push(self.config.u0.eval(i as f64 * h, j as f64 * h));
            }
        }
        State { t: 0.0, u }
    }

    /// Trapezoidal quadrature `Σ w_ij f(u_ij)` over the rectangle.
    pub fn weighted_sum(&self, u: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        let h2 = self.config.h * self.config.h;
        let mut total = 0.0;
        for j in 0..=self.ny {
            let wy = if j == 0 || j == self.ny { 0.5 } else { 1.0 };
            for i in 0..=self.nx {
                let wx = if i == 0 || i == self.nx { 0.5 } else { 1.0 };
                total += wx * wy * f(u[j * (self.nx + 1) + i]);
            }
        }
        total * h2
    }

    /// Discrete mass `Σ w_ij u_ij`.
    pub fn mass(&self, u: &[f64]) -> f64 {
        self.weighted_sum(u, |v| v)
    }

    /// Largest stable step for a state with maximum `m`.
    pub fn max_dt(&self, m: f64) -> f64 {
        let (h, q, safety) = (self.config.h, self.config.q, self.config.dt_safety);
        let diffusion = safety * h * h / 4.0;
        if self.config.flux_enabled {
            diffusion.min(safety * h / (2.0 * q * m.max(0.0).powf(q - 1.0)))
        } else {
            diffusion
        }
    }

    /// One explicit Euler step.
    pub fn step(&self, state: &State, dt: f64) -> Result<State, SolverError> {
        let m = state.u.iter().copied().fold(0.0, f64::max);
        let limit = self.max_dt(m);
        if dt > limit * (1.0 + 1e-12) {
            return Err(SolverError::StepTooLarge { dt, limit });
        }
        let mut next = vec![0.0; state.u.len()];
        self.advance(&state.u, &mut next, dt);
        Ok(State {
            t: state.t + dt,
            u: next,
        })
    }

    /// Writes `u + dt Δ_h u` into `out`; returns `max |u_new − u|`.
    fn advance(&self, u: &[f64], out: &mut [f64], dt: f64) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let w = nx + 1;
        let h = self.config.h;
        let q = self.config.q;
        let r = dt / (h * h);
        let mut change = 0.0f64;
        for j in 0..=ny {
            for i in 0..=nx {
                let k = j * w + i;
                let c = u[k];
                let left = if i == 0 { u[k + 1] } else { u[k - 1] };
                let right = if i == nx { u[k - 1] } else { u[k + 1] };
                let up = if j == ny { u[k - w] } else { u[k + w] };
                let down = if j == 0 {
                    let frac = self.gamma1_fraction[i];
                    let flux = if self.config.flux_enabled && frac > 0.0 {
                        frac * c.powf(q)
                    } else {
                        0.0
                    };
                    u[k + w] + 2.0 * h * flux
                } else {
                    u[k - w]
                };
                let delta = r * (left + right + up + down - 4.0 * c);
                out[k] = c + delta;
                change = change.max(delta.abs());
            }
        }
        change
    }

    fn snapshot(&self, state: &State) -> Snapshot {
        Snapshot {
            nx: self.nx,
            ny: self.ny,
            h: self.config.h,
            t: state.t,
            values: state.u.clone(),
        }
    }

    /// Integrates until blow-up, a steady state, or the step limit.
    pub fn run(&self) -> Result<SimResult, SolverError> {
        let mut state = self.initial_state();
        let mut scratch = vec![0.0; state.u.len()];
        let mut m = state.u.iter().copied().fold(0.0, f64::max);
        let mut m_trace = vec![(0.0, m)];
        let mut dt_history = Vec::new();
        let mut snapshots = Vec::new();
        let interval = self.config.snapshot_interval;
        if interval.is_some() {
            snapshots.push(self.snapshot(&state));
        }
        let mut status = SimStatus::MaxStepsReached;
        for _ in 0..self.config.max_steps {
            let dt = self.max_dt(m);
            let change = self.advance(&state.u, &mut scratch, dt);
            std::mem::swap(&mut state.u, &mut scratch);
            let t_prev = state.t;
            state.t += dt;
            let current = state.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !current.is_finite() {
                return Err(SolverError::NonFinite(state.t));
            }
            m = m.max(current);
            m_trace.push((state.t, m));
            dt_history.push(dt);
            if let Some(iv) = interval {
                if (state.t / iv).floor() > (t_prev / iv).floor() {
                    snapshots.push(self.snapshot(&state));
                }
            }
            if m >= self.config.blowup_threshold {
                status = SimStatus::BlewUp;
                break;
            }
            if !self.config.flux_enabled && change < self.config.steady_tol * dt {
                status = SimStatus::Steady;
                break;
            }
        }
        let w = self.nx + 1;
        let k = state
            .u
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let argmax_location = (
            (k % w) as f64 * self.config.h,
            (k / w) as f64 * self.config.h,
        );
        let t_last = state.t;
        let (t_star_estimate, t_star_bracket) = if status == SimStatus::BlewUp {
            let est = estimate_blowup_time(&m_trace, self.config.q);
            (est.estimate, est.bracket)
        } else {
            (None, (t_last, f64::INFINITY))
        };
        Ok(SimResult {
            config: self.config.clone(),
            m_trace,
            argmax_location,
            t_last,
            t_star_estimate,
            t_star_bracket,
            grid_meta: GridMeta {
                h: self.config.h,
                nx: self.nx,
                ny: self.ny,
                dt_history,
            },
            status,
            snapshots,
            final_state: self.snapshot(&state),
        })
    }
}

/// Runs one configuration.
pub fn run(config: &SimConfig) -> Result<SimResult, SolverError> {
    Solver::new(config.clone())?.run()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupEstimate {
    pub estimate: Option<f64>,
    pub bracket: (f64, f64),
}

/// Samples above `100 M₀` needed before extrapolating.
pub const MIN_ASYMPTOTIC_SAMPLES: usize = 8;
/// At most this many trailing samples enter the fit.
pub const FIT_SAMPLES: usize = 32;

/// Extrapolates the blow-up time from the tail of `(t, M)`, modeling
/// `M^{1−q}` as linear in `t`.
///
/// The estimate is the zero of the least-squares line through the last
/// samples above `100 M₀`; the bracket runs from the last time to the
/// latest zero among the line and the steepest two-point secant.
pub fn estimate_blowup_time(m_trace: &[(f64, f64)], q: f64) -> BlowupEstimate {
    let t_last = m_trace.last().map(|p| p.0).unwrap_or(0.0);
    let none = BlowupEstimate {
        estimate: None,
        bracket: (t_last, f64::INFINITY),
    };
    let Some(&(_, m0)) = m_trace.first() else {
        return none;
    };
    let tail: Vec<(f64, f64)> = m_trace
        .iter()
        .filter(|p| p.1 > 100.0 * m0)
        .map(|&(t, m)| (t, m.powf(1.0 - q)))
        .collect();
    if tail.len() < MIN_ASYMPTOTIC_SAMPLES {
        return none;
    }
    let pts = &tail[tail.len().saturating_sub(FIT_SAMPLES)..];
    let n = pts.len() as f64;
    // Center t for conditioning: the samples crowd near t_last.
    let tc = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let yc = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tc).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tc) * (p.1 - yc)).sum();
    if !(sxx > 0.0) || !(sxy < 0.0) {
        return none;
    }
    let slope = sxy / sxx;
    let estimate = (tc - yc / slope).max(t_last);
    let secant = pts
        .windows(2)
        .filter_map(|w| {
            let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            (s < 0.0).then_some((s, w[1].0 - w[1].1 / s))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, zero)| zero)
        .unwrap_or(estimate);
    BlowupEstimate {
        estimate: Some(estimate),
        bracket: (t_last, secant.max(estimate)),
    }
}

/// Writes `t,M` rows.
pub fn write_m_trace<W: std::io::Write>(trace: &[(f64, f64)], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "M"])?;
    for (t, m) in trace {
        w.write_record([format!("{t:e}"), format!("{m:e}")])?;
    }
    w.flush()?;
    Ok(())
}
