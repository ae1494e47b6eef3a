//! The level sequence `M₀ < M₁ < … < M_L` behind the lower bounds.
//!
//! Each level solves `(λ − m)/λ^q = δ₁` for the next `λ` above the current
//! `m`; the construction stops once `M^{q−1} δ₁` exceeds
//! `E_q = (q−1)^{q−1}/q^q`, where no such `λ` exists. Every step costs at
//! least `t_*` of time, so `L · t_*` bounds the blow-up time from below.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::checks::critical_shape;
use crate::kernel::constants::{convex_c_star, local_c_star, names, ConstantLedger, LedgerError};

/// Smallest accepted `q − 1`.
pub const MIN_Q_GAP: f64 = 1e-10;

/// Default cap on the number of levels `construct_sequence` stores.
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("constant {0} is required")]
    MissingConstant(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("sequence did not stop within {0} steps")]
    StepLimit(usize),
}

impl From<LedgerError> for SequenceError {
    fn from(e: LedgerError) -> Self {
        SequenceError::InvalidParameter(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceVariant {
    Convex,
    LocallyConvex,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceParams {
    pub q: f64,
    pub m0: f64,
    pub delta1: f64,
    pub n: usize,
    pub variant: SequenceVariant,
    /// Local convexity radius, locally convex variant only.
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub c_star: Option<f64>,
    #[serde(default)]
    pub c1_star: Option<f64>,
    #[serde(default)]
    pub c2_star: Option<f64>,
}

impl SequenceParams {
    pub fn convex(q: f64, m0: f64, delta1: f64, n: usize, c_star: f64) -> Self {
        Self {
            q,
            m0,
            delta1,
            n,
            variant: SequenceVariant::Convex,
            d: None,
            c_star: Some(c_star),
            c1_star: None,
            c2_star: None,
        }
    }

    pub fn locally_convex(
        q: f64,
        m0: f64,
        delta1: f64,
        n: usize,
        d: f64,
        c_star: f64,
        c1_star: f64,
        c2_star: f64,
    ) -> Self {
        Self {
            q,
            m0,
            delta1,
            n,
            variant: SequenceVariant::LocallyConvex,
            d: Some(d),
            c_star: Some(c_star),
            c1_star: Some(c1_star),
            c2_star: Some(c2_star),
        }
    }

    /// Parameters for `Γ₁` of measure `gamma1_area` with constants from the
    /// ledger: `δ₁ = 2C* · shape(|Γ₁|)` (convex) or `4C₂* · shape(|Γ₁|)`
    /// (locally convex), where `shape` is `|Γ₁|^{1/(n−1)}`, or
    /// `|Γ₁| ln(1/|Γ₁| + 1)` when `n = 2`.
    pub fn from_ledger(
        variant: SequenceVariant,
        q: f64,
        m0: f64,
        gamma1_area: f64,
        n: usize,
        d: Option<f64>,
        ledger: &ConstantLedger,
    ) -> Result<Self, SequenceError> {
        let shape = critical_shape(gamma1_area, n);
        match variant {
            SequenceVariant::Convex => {
                let c = convex_c_star(ledger, n)?;
                Ok(Self::convex(q, m0, 2.0 * c * shape, n, c))
            }
            SequenceVariant::LocallyConvex => {
                let d = d.ok_or(SequenceError::MissingConstant("d"))?;
                let c = local_c_star(ledger, n)?;
                let c1 = ledger.value(names::C1_STAR)?;
                let c2 = ledger.value(names::C2_STAR)?;
                Ok(Self::locally_convex(
                    q,
                    m0,
                    4.0 * c2 * shape,
                    n,
                    d,
                    c,
                    c1,
                    c2,
                ))
            }
            SequenceVariant::Geometric => Err(SequenceError::InvalidParameter(
                "the geometric variant has no uniform level sequence; use geometric_variant_floor"
                    .into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<(), SequenceError> {
        check_q(self.q)?;
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(SequenceError::InvalidParameter(format!(
                "M0 must be positive, got {}",
                self.m0
            )));
        }
        if !(self.delta1 > 0.0 && self.delta1.is_finite()) {
            return Err(SequenceError::InvalidParameter(format!(
                "delta1 must be positive, got {}",
                self.delta1
            )));
        }
        if self.n < 2 {
            return Err(SequenceError::InvalidParameter(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRun {
    pub levels: Vec<f64>,
    #[serde(rename = "L")]
    pub l: usize,
    pub t_star: f64,
    pub lower_bound_t: f64,
    /// `x_k = M_k^{q−1} δ₁`.
    pub x_trace: Vec<f64>,
}

fn check_q(q: f64) -> Result<(), SequenceError> {
    if !(q.is_finite() && q - 1.0 >= MIN_Q_GAP) {
        return Err(SequenceError::InvalidParameter(format!(
            "q must exceed 1 + {MIN_Q_GAP:e}, got {q}"
        )));
    }
    Ok(())
}

/// `E_q = (q−1)^{q−1}/q^q`, the maximum of `(λ − 1)/λ^q` over `λ > 1`.
pub fn e_q(q: f64) -> Result<f64, SequenceError> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(SequenceError::InvalidParameter(format!(
            "q must exceed 1, got {q}"
        )));
    }
    let p = q - 1.0;
    Ok(((p * p.ln()) - q * q.ln()).exp())
}

/// The unique `λ ∈ (m, q m/(q−1)]` with `(λ − m)/λ^q = y`, or `None` when
/// `y > m^{1−q} E_q`. At equality the maximizer `q m/(q−1)` is returned.
pub fn solve_next_level(m: f64, q: f64, y: f64) -> Result<Option<f64>, SequenceError> {
    check_q(q)?;
    if !(m > 0.0 && y > 0.0 && m.is_finite() && y.is_finite()) {
        return Err(SequenceError::InvalidParameter(format!(
            "need m > 0 and y > 0, got m = {m}, y = {y}"
        )));
    }
    let p = q - 1.0;
    // Work with x = y m^{q−1}, the scale-free form of the equation.
    let x = y * m.powf(p);
    let eq = e_q(q)?;
    if x > eq {
        return Ok(None);
    }
    let hi = m / p;
    if x == eq {
        return Ok(Some(m + hi));
    }
    // φ(h) = ln h − q ln(m + h) − ln y is increasing on (0, m/(q−1)].
    let ln_y = y.ln();
    let phi = |h: f64| h.ln() - q * (m + h).ln() - ln_y;
    let (mut lo, mut hi) = (0.0_f64, hi);
    if phi(hi) <= 0.0 {
        return Ok(Some(m + hi));
    }
    // For small x the root is close to y m^q.
    let mut h = (y * m.powf(q)).min(0.5 * hi);
    for _ in 0..500 {
        let v = phi(h);
        if v > 0.0 {
            hi = h;
        } else {
            lo = h;
        }
        let slope = 1.0 / h - q / (m + h);
        let newton = h - v / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else if lo > 0.0 {
            // Geometric midpoint when the bracket spans orders of magnitude.
            if hi / lo > 4.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            }
        } else {
            0.5 * h
        };
        if (next - h).abs() <= 1e-15 * (m + h) || hi - lo <= 1e-15 * (m + hi) {
            return Ok(Some(m + next));
        }
        h = next;
    }
    Ok(Some(m + h))
}

/// Builds the level sequence with the default step cap.
pub fn construct_sequence(params: &SequenceParams) -> Result<SequenceRun, SequenceError> {
    construct_sequence_capped(params, DEFAULT_MAX_STEPS)
}

/// Builds the level sequence, failing if more than `max_steps` levels are
/// needed.
pub fn construct_sequence_capped(
    params: &SequenceParams,
    max_steps: usize,
) -> Result<SequenceRun, SequenceError> {
    params.validate()?;
    let t_star = t_star(params)?;
    let (q, delta1) = (params.q, params.delta1);
    let mut levels = vec![params.m0];
    let mut m = params.m0;
    loop {
        let Some(next) = solve_next_level(m, q, delta1)? else {
            break;
        };
        if !next.is_finite() {
            return Err(SequenceError::InvalidParameter(
                "levels exceed the floating-point range; use count_steps".into(),
            ));
        }
        if levels.len() > max_steps {
            return Err(SequenceError::StepLimit(max_steps));
        }
        levels.push(next);
        m = next;
    }
    let x_trace = levels.iter().map(|m| m.powf(q - 1.0) * delta1).collect();
    let l = levels.len() - 1;
    Ok(SequenceRun {
        levels,
        l,
        t_star,
        lower_bound_t: l as f64 * t_star,
        x_trace,
    })
}

/// Number of steps `L` without storing the levels.
///
/// Iterates the scale-free variable `x_k = M_k^{q−1} δ₁` through the level
/// ratio `M_k/M_{k−1}`, which stays finite even where the levels overflow.
pub fn count_steps(q: f64, m0: f64, delta1: f64, max_steps: u64) -> Result<u64, SequenceError> {
    check_q(q)?;
    let mut x = m0.powf(q - 1.0) * delta1;
    if !(x > 0.0 && x.is_finite()) {
        return Err(SequenceError::InvalidParameter(format!(
            "M0^(q-1) delta1 must be positive and finite, got {x}"
        )));
    }
    let mut l = 0u64;
    while let Some(ratio) = solve_next_level(1.0, q, x)? {
        l += 1;
        if l > max_steps {
            return Err(SequenceError::StepLimit(max_steps as usize));
        }
        x *= ratio.powf(q - 1.0);
    }
    Ok(l)
}

/// `(1/(10(q−1))) · (1/(M₀^{q−1} δ₁) − 3q)`; negative values are vacuous.
pub fn step_count_lower_bound(q: f64, m0: f64, delta1: f64) -> f64 {
    (1.0 / (m0.powf(q - 1.0) * delta1) - 3.0 * q) / (10.0 * (q - 1.0))
}

/// `y₀ = min{1/2, E_q}`, `y_k = y_{k−1}(1 − y_{k−1})^{q−1}`, for `k = 0..=l`.
pub fn y_iteration(q: f64, l: usize) -> Result<Vec<f64>, SequenceError> {
    let mut y = 0.5f64.min(e_q(q)?);
    let mut out = Vec::with_capacity(l + 1);
    out.push(y);
    for _ in 0..l {
        y *= (1.0 - y).powf(q - 1.0);
        out.push(y);
    }
    Ok(out)
}

/// Time floor `C₂*/(|Γ₁|^{4α} M₀^{4(q−1)} 2^{4(q−1)k} + 1)` of step `k` when
/// the levels double, `α = 1/(2(n−1))`.
pub fn geometric_variant_floor(
    k: usize,
    q: f64,
    m0: f64,
    gamma1_area: f64,
    n: usize,
    c2_star: f64,
) -> f64 {
    let alpha = 1.0 / (2.0 * (n as f64 - 1.0));
    let p = 4.0 * (q - 1.0);
    let base = gamma1_area.powf(4.0 * alpha) * m0.powf(p);
    // 2^{p k} computed in log space to avoid overflow for large k.
    let denom = (base.ln() + p * k as f64 * LN_2).exp() + 1.0;
    c2_star / denom
}

/// `Σ_{k=1}^{terms}` of [`geometric_variant_floor`].
pub fn geometric_floor_sum(
    q: f64,
    m0: f64,
    gamma1_area: f64,
    n: usize,
    c2_star: f64,
    terms: usize,
) -> f64 {
    (1..=terms)
        .map(|k| geometric_variant_floor(k, q, m0, gamma1_area, n, c2_star))
        .sum()
}

/// Integral comparison of the floor sum:
/// `(C₂*/(4(q−1) ln 2)) ln(1 + |Γ₁|^{−4α} M₀^{−4(q−1)} 2^{−4(q−1)})`.
pub fn geometric_log_bound(q: f64, m0: f64, gamma1_area: f64, n: usize, c2_star: f64) -> f64 {
    let alpha = 1.0 / (2.0 * (n as f64 - 1.0));
    let p = 4.0 * (q - 1.0);
    let arg = gamma1_area.powf(-4.0 * alpha) * m0.powf(-p) * 2f64.powf(-p);
    c2_star / (p * LN_2) * arg.ln_1p()
}

/// Uniform per-step time floor.
///
/// Convex: `1/(16C*²)`, capped at 1 when `n = 2`. Locally convex: the
/// minimum of that and `(d²/8)/ln(2C₁*/(M₀^{q−1}δ₁))`, which requires
/// `M₀^{q−1}δ₁ ≤ C₁*`.
pub fn t_star(params: &SequenceParams) -> Result<f64, SequenceError> {
    let c = params.c_star.ok_or(SequenceError::MissingConstant("C*"))?;
    if !(c > 0.0) {
        return Err(SequenceError::InvalidParameter(format!(
            "C* must be positive, got {c}"
        )));
    }
    let mut base = 1.0 / (16.0 * c * c);
    if params.n == 2 {
        base = base.min(1.0);
    }
    match params.variant {
        SequenceVariant::Convex => Ok(base),
        SequenceVariant::LocallyConvex => {
            let d = params.d.ok_or(SequenceError::MissingConstant("d"))?;
            let c1 = params
                .c1_star
                .ok_or(SequenceError::MissingConstant("C1*"))?;
            let x0 = params.m0.powf(params.q - 1.0) * params.delta1;
            if x0 > c1 {
                return Err(SequenceError::Precondition(format!(
                    "M0^(q-1) delta1 = {x0} exceeds C1* = {c1}"
                )));
            }
            Ok(base.min(d * d / 8.0 / (2.0 * c1 / x0).ln()))
        }
        SequenceVariant::Geometric => Err(SequenceError::InvalidParameter(
            "the geometric variant has a step-dependent floor; use geometric_variant_floor".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Oracle for `q = 2`: `λ − m = yλ²` has the smaller root
    /// `λ = (1 − √(1 − 4my))/(2y)`.
    fn quadratic_level(m: f64, y: f64) -> f64 {
        (1.0 - (1.0 - 4.0 * m * y).sqrt()) / (2.0 * y)
    }

    #[test]
    fn e_q_values_and_bounds() {
        assert_relative_eq!(e_q(2.0).unwrap(), 0.25, max_relative = 1e-15);
        for q in [1.01, 1.5, 2.0, 5.0, 50.0] {
            let e = e_q(q).unwrap();
            let p: f64 = q - 1.0;
            assert_relative_eq!(e, p.powf(p) / q.powf(q), max_relative = 1e-12);
            assert!(1.0 / (3.0 * q) < e);
            assert!(e < (1.0 / q).min(1.0 / (p * std::f64::consts::E)));
        }
        assert!((e_q(1.0 + 1e-8).unwrap() - 1.0).abs() < 1e-6);
        assert!(e_q(1.0).is_err());
    }

    #[test]
    fn next_level_examples() {
        assert_eq!(solve_next_level(1.0, 2.0, 0.25).unwrap(), Some(2.0));
        let l = solve_next_level(1.0, 2.0, 0.1).unwrap().unwrap();
        assert_relative_eq!(l, (1.0 - 0.6f64.sqrt()) / 0.2, max_relative = 1e-12);
        assert_relative_eq!(l, 1.1270167, epsilon = 1e-7);
        assert_eq!(solve_next_level(1.0, 2.0, 0.3).unwrap(), None);
        assert!(solve_next_level(1.0, 1.0 + 1e-12, 0.1).is_err());
    }

    #[test]
    fn quadratic_oracle_sequence() {
        let params = SequenceParams::convex(2.0, 1.0, 0.1, 3, 0.25);
        let run = construct_sequence(&params).unwrap();
        assert_eq!(run.l, 5);
        let mut m = 1.0;
        let mut oracle = vec![m];
        while m * 0.1 <= 0.25 {
            m = quadratic_level(m, 0.1);
            oracle.push(m);
        }
        assert_eq!(run.levels.len(), oracle.len());
        for (a, b) in run.levels.iter().zip(&oracle) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        let expected = [1.0, 1.1270167, 1.2946272, 1.5281540, 1.8825614, 2.5151722];
        // These rounded reference values agree with the exact roots to 1e-4.
        for (a, b) in run.levels.iter().zip(expected) {
            assert!((a - b).abs() < 1e-4);
        }
        assert_relative_eq!(run.t_star, 1.0);
        assert_relative_eq!(run.lower_bound_t, 5.0);
    }

    #[test]
    fn immediate_stop() {
        let run = construct_sequence(&SequenceParams::convex(2.0, 1.0, 0.3, 3, 1.0)).unwrap();
        assert_eq!(run.l, 0);
        assert_eq!(run.levels, vec![1.0]);
        assert_eq!(run.lower_bound_t, 0.0);
    }

    #[test]
    fn equality_continues() {
        // M₀^{q−1}δ₁ = E_q exactly: one step to the maximizer, then stop.
        let run = construct_sequence(&SequenceParams::convex(2.0, 1.0, 0.25, 3, 1.0)).unwrap();
        assert_eq!(run.levels, vec![1.0, 2.0]);
    }

    #[test]
    fn step_count_bound_examples() {
        assert_relative_eq!(
            step_count_lower_bound(2.0, 1.0, 0.1),
            0.4,
            max_relative = 1e-14
        );
        assert!(step_count_lower_bound(2.0, 1.0, 0.2) < 0.0);
        assert!(step_count_lower_bound(2.0, 1.0, 0.05) > step_count_lower_bound(2.0, 1.0, 0.1));
    }

    #[test]
    fn y_iteration_examples() {
        let y = y_iteration(2.0, 3).unwrap();
        assert_eq!(y[0], 0.25);
        assert_eq!(y[1], 3.0 / 16.0);
        for q in [1.05, 1.5, 3.0, 9.0] {
            let y = y_iteration(q, 2000).unwrap();
            for w in y.windows(2) {
                assert!(w[1] < w[0] && w[1] > 0.0 && w[0] <= 0.5);
                assert!(1.0 / w[1] < 1.0 / w[0] + 10.0 * (q - 1.0));
            }
        }
    }

    #[test]
    fn y_iteration_stays_below_reversed_x_trace() {
        for (q, delta1) in [(2.0, 0.01), (1.3, 0.002), (5.0, 1e-4)] {
            let run = construct_sequence(&SequenceParams::convex(q, 1.0, delta1, 3, 1.0)).unwrap();
            let y = y_iteration(q, run.l).unwrap();
            for k in 0..=run.l {
                assert!(y[k] < run.x_trace[run.l - k], "q={q} k={k}");
            }
        }
    }

    #[test]
    fn geometric_floor_sum_and_log_bound() {
        assert!(geometric_variant_floor(10_000, 2.0, 1.0, 0.5, 3, 1.0) < 1e-300);
        for (q, m0, area, n) in [
            (1.01, 1.0, 1e-3, 3),
            (1.05, 0.5, 0.01, 2),
            (1.002, 2.0, 0.1, 3),
        ] {
            let sum = geometric_floor_sum(q, m0, area, n, 0.7, 10_000);
            let log = geometric_log_bound(q, m0, area, n, 0.7);
            assert!(sum >= log);
            assert!((sum - log).abs() < 0.01 * log, "{sum} vs {log}");
        }
    }

    #[test]
    fn t_star_variants() {
        let convex = SequenceParams::convex(2.0, 1.0, 0.1, 3, 0.25);
        assert_relative_eq!(t_star(&convex).unwrap(), 1.0);
        let planar = SequenceParams::convex(2.0, 1.0, 0.1, 2, 0.1);
        assert_eq!(t_star(&planar).unwrap(), 1.0);
        let local = |delta1: f64, d: f64| {
            SequenceParams::locally_convex(2.0, 1.0, delta1, 3, d, 0.5, 1.0, 1.0)
        };
        assert!(t_star(&local(0.1, 0.5)).unwrap() <= 0.25);
        assert!(t_star(&local(0.1, 0.25)).unwrap() <= t_star(&local(0.1, 0.5)).unwrap());
        // The floor shrinks as δ₁ → 0 through the logarithm.
        assert!(t_star(&local(1e-12, 0.5)).unwrap() < t_star(&local(0.1, 0.5)).unwrap());
        assert!(matches!(
            t_star(&local(2.0, 0.5)),
            Err(SequenceError::Precondition(_))
        ));
        let mut geo = convex.clone();
        geo.variant = SequenceVariant::Geometric;
        assert!(t_star(&geo).is_err());
    }

    #[test]
    fn from_ledger_uses_the_recipes() {
        let mut ledger = ConstantLedger::new();
        ledger.set_user(names::C_ABS_LAYER, 0.5).unwrap();
        ledger.set_user(names::C_CRIT, 0.1).unwrap();
        let p =
            SequenceParams::from_ledger(SequenceVariant::Convex, 2.0, 1.0, 0.25, 3, None, &ledger)
                .unwrap();
        assert_relative_eq!(p.delta1, 2.0 * 0.5 * 0.5);
        assert!(SequenceParams::from_ledger(
            SequenceVariant::LocallyConvex,
            2.0,
            1.0,
            0.25,
            3,
            Some(0.1),
            &ledger
        )
        .is_err());
    }

    #[test]
    fn terminates_in_extreme_regimes() {
        // q close to 1: L ≈ (1/x₀)/(q − 1).
        let l = count_steps(1.001, 1.0, 1e-3, 10_000_000).unwrap();
        assert!(l as f64 > step_count_lower_bound(1.001, 1.0, 1e-3));
        // Tiny δ₁.
        let l = count_steps(10.0, 1.0, 1e-8, 100_000_000).unwrap();
        assert!(l as f64 > step_count_lower_bound(10.0, 1.0, 1e-8));
        assert!(matches!(
            count_steps(2.0, 1.0, 1e-6, 10),
            Err(SequenceError::StepLimit(10))
        ));
    }

    /// Expected number of steps, `≈ (1/x₀ − 1/E_q)/(q − 1)`.
    fn predicted_steps(q: f64, m0: f64, delta1: f64) -> f64 {
        (1.0 / (m0.powf(q - 1.0) * delta1)) / (q - 1.0)
    }

    #[test]
    fn randomized_run_invariants() {
        // Seeded; instances whose predicted length exceeds the cap are
        // redrawn so the test stays fast.
        let mut rng = ChaCha8Rng::seed_from_u64(20240601);
        let mut checked = 0;
        while checked < 1000 {
            let q = 1.0 + 9.0 * rng.random::<f64>().max(1e-6);
            let m0 = 10f64.powf(rng.random_range(-3.0..1.0));
            let delta1 = 10f64.powf(rng.random_range(-8.0..0.0));
            if predicted_steps(q, m0, delta1) > 2e5 {
                continue;
            }
            checked += 1;
            let run = construct_sequence(&SequenceParams::convex(q, m0, delta1, 3, 1.0)).unwrap();
            let eq = e_q(q).unwrap();
            assert_eq!(run.levels.len(), run.l + 1);
            for k in 1..=run.l {
                assert!(run.levels[k] > run.levels[k - 1]);
                assert!(run.levels[k] <= q / (q - 1.0) * run.levels[k - 1] * (1.0 + 1e-14));
                let (prev, cur) = (run.x_trace[k - 1], run.x_trace[k]);
                let rel = (prev - cur * (1.0 - cur).powf(q - 1.0)).abs() / prev;
                assert!(rel < 1e-10, "q={q} k={k} rel={rel}");
            }
            for k in 0..run.l {
                assert!(run.x_trace[k] <= eq);
            }
            assert!(run.x_trace[run.l] > eq);
            assert!(run.l as f64 > step_count_lower_bound(q, m0, delta1));
        }
    }

    proptest! {
        #[test]
        fn solved_level_reproduces_y(m in 1e-3..10.0f64, q in 1.001..10.0f64, frac in 1e-9..1.0f64) {
            let y = frac * e_q(q).unwrap() * m.powf(1.0 - q);
            let lambda = solve_next_level(m, q, y).unwrap().unwrap();
            prop_assert!(lambda > m && lambda <= q / (q - 1.0) * m * (1.0 + 1e-14));
            let g = (lambda - m) / lambda.powf(q);
            prop_assert!((g - y).abs() <= 1e-10 * y, "g={g} y={y}");
        }

        #[test]
        fn beyond_the_maximum_there_is_no_level(m in 1e-3..10.0f64, q in 1.001..10.0f64, over in 1.0001..10.0f64) {
            let y = over * e_q(q).unwrap() * m.powf(1.0 - q);
            prop_assert_eq!(solve_next_level(m, q, y).unwrap(), None);
        }
    }
}
