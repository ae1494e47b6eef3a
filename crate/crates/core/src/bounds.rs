//! Blow-up time bounds as functions of `(n, q, M₀, |Γ₁|)` and the ledger
//! constants, and the report that combines them.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::checks::critical_shape;
use crate::kernel::constants::{names, ConstantLedger, Provenance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("constant {0} is missing from the ledger")]
    MissingConstant(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Y = 1 lies outside the small-Y regime of the locally convex bound")]
    OutOfRegime,
}

/// Result of one formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundValue {
    Value {
        value: f64,
    },
    /// The formula evaluates but gives no information (non-positive
    /// bracket); the raw bracket is kept.
    Vacuous {
        bracket: f64,
        reason: String,
    },
    /// The hypotheses of the bound fail.
    Inapplicable {
        reason: String,
    },
}

impl BoundValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            BoundValue::Value { value } => Some(*value),
            _ => None,
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            BoundValue::Value { .. } => None,
            BoundValue::Vacuous { reason, .. } | BoundValue::Inapplicable { reason } => {
                Some(reason)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub n: usize,
    pub q: f64,
    pub m0: f64,
    pub gamma1_area: f64,
    /// `∫_Ω u₀^{1−q} dx`; needed only for the upper bound.
    pub u0_integral_1mq: Option<f64>,
    pub ledger: ConstantLedger,
    /// Exponent of the earlier convex bound, in `[0, 1/(n−1))`.
    pub alpha: f64,
    /// Local convexity radius, if known.
    pub d: Option<f64>,
    pub convex: bool,
}

impl BoundParams {
    pub fn validate(&self) -> Result<(), BoundError> {
        let bad = |msg: String| Err(BoundError::InvalidParameter(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return bad(format!("q must exceed 1, got {}", self.q));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return bad(format!("M0 must be positive, got {}", self.m0));
        }
        if !(self.gamma1_area > 0.0 && self.gamma1_area.is_finite()) {
            return bad(format!("|Γ₁| must be positive, got {}", self.gamma1_area));
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0 / (self.n as f64 - 1.0)) {
            return bad(format!(
                "alpha must lie in [0, 1/(n-1)), got {}",
                self.alpha
            ));
        }
        if let Some(i) = self.u0_integral_1mq {
            if !(i > 0.0 && i.is_finite()) {
                return bad(format!("∫u0^(1-q) must be positive and finite, got {i}"));
            }
        }
        if let Some(d) = self.d {
            if !(d > 0.0) {
                return bad(format!("d must be positive, got {d}"));
            }
        }
        Ok(())
    }

    /// `Y = M₀^{q−1} · shape(|Γ₁|)`.
    pub fn y(&self) -> f64 {
        self.m0.powf(self.q - 1.0) * critical_shape(self.gamma1_area, self.n)
    }

    fn constant(&self, name: &'static str) -> Result<f64, BoundError> {
        self.ledger
            .value(name)
            .map_err(|_| BoundError::MissingConstant(name))
    }
}

/// `∫_Ω u₀^{1−q} dx / ((q−1)|Γ₁|)`; constant-free.
pub fn upper_bound(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.validate()?;
    let integral = p
        .u0_integral_1mq
        .ok_or(BoundError::MissingConstant("u0_integral_1mq"))?;
    Ok(BoundValue::Value {
        value: integral / ((p.q - 1.0) * p.gamma1_area),
    })
}

/// `C^{−2/(n+2)} [ln(1/|Γ₁|) − (n+2)(q−1) ln M₀ − ln(q−1) − ln C]^{2/(n+2)}`.
pub fn lower_bound_logarithmic(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.validate()?;
    let c = p.constant(names::C_LOGARITHMIC)?;
    let n = p.n as f64;
    let bracket =
        -p.gamma1_area.ln() - (n + 2.0) * (p.q - 1.0) * p.m0.ln() - (p.q - 1.0).ln() - c.ln();
    if bracket <= 0.0 {
        return Ok(BoundValue::Vacuous {
            bracket,
            reason: "logarithmic bracket is non-positive".into(),
        });
    }
    let e = 2.0 / (n + 2.0);
    Ok(BoundValue::Value {
        value: c.powf(-e) * bracket.powf(e),
    })
}

/// `(C/((q−1) M₀^{q−1} |Γ₁|^α)) · min{1, 1/(q M₀^{q−1} |Γ₁|^α)}^{(1+(n−1)α)/(1−(n−1)α)}`.
pub fn lower_bound_power(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.validate()?;
    if !p.convex {
        return Ok(BoundValue::Inapplicable {
            reason: "domain is not convex".into(),
        });
    }
    let c = p.constant(names::C_POWER)?;
    let a = p.m0.powf(p.q - 1.0) * p.gamma1_area.powf(p.alpha);
    let k = (p.n as f64 - 1.0) * p.alpha;
    let factor = (1.0 / (p.q * a)).min(1.0).powf((1.0 + k) / (1.0 - k));
    Ok(BoundValue::Value {
        value: c / ((p.q - 1.0) * a) * factor,
    })
}

/// `(C/(q−1)) ln(1 + (2M₀)^{−4(q−1)} |Γ₁|^{−2/(n−1)})`.
pub fn lower_bound_general(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.validate()?;
    let c = p.constant(names::C_GENERAL)?;
    let arg = (2.0 * p.m0).powf(-4.0 * (p.q - 1.0)) * p.gamma1_area.powf(-2.0 / (p.n as f64 - 1.0));
    Ok(BoundValue::Value {
        value: c / (p.q - 1.0) * arg.ln_1p(),
    })
}

/// `C/((q−1)Y)` when `Y ≤ Y₀/q` on a convex domain.
pub fn lower_bound_convex(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.validate()?;
    if !p.convex {
        return Ok(BoundValue::Inapplicable {
            reason: "domain is not convex".into(),
        });
    }
    let y0 = p.constant(names::Y0_CONVEX)?;
    let c = p.constant(names::C_CONVEX)?;
    let y = p.y();
    if y > y0 / p.q {
        return Ok(BoundValue::Inapplicable {
            reason: "Y exceeds Y₀/q".into(),
        });
    }
    Ok(BoundValue::Value {
        value: c / ((p.q - 1.0) * y),
    })
}

/// `C/((q−1) Y |ln Y|)` when `Y ≤ Y₀/q` and a local convexity radius is known.
pub fn lower_bound_locally_convex(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.validate()?;
    if p.d.is_none() {
        return Ok(BoundValue::Inapplicable {
            reason: "no local convexity radius".into(),
        });
    }
    let y0 = p.constant(names::Y0_LOCAL)?;
    let c = p.constant(names::C_LOCAL)?;
    let y = p.y();
    if y == 1.0 {
        return Err(BoundError::OutOfRegime);
    }
    if y > y0 / p.q {
        return Ok(BoundValue::Inapplicable {
            reason: "Y exceeds Y₀/q".into(),
        });
    }
    Ok(BoundValue::Value {
        value: c / ((p.q - 1.0) * y * y.ln().abs()),
    })
}

pub const UPPER: &str = "upper";
pub const LOWER_LOGARITHMIC: &str = "lower_logarithmic";
pub const LOWER_POWER: &str = "lower_power";
pub const LOWER_GENERAL: &str = "lower_general";
pub const LOWER_CONVEX: &str = "lower_convex";
pub const LOWER_LOCAL: &str = "lower_locally_convex";

/// One formula's outcome in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub formula: String,
    pub value: BoundValue,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    /// Applicable lower bounds: value and certification.
    pub lower_bounds: BTreeMap<String, (f64, bool)>,
    pub upper_bound: Option<(f64, bool)>,
    /// Reason for every formula without a value.
    pub applicability: BTreeMap<String, String>,
    /// A certified lower bound exceeds the certified upper bound.
    pub inconsistent: bool,
}

fn constants_of(formula: &str) -> &'static [&'static str] {
    match formula {
        LOWER_LOGARITHMIC => &[names::C_LOGARITHMIC],
        LOWER_POWER => &[names::C_POWER],
        LOWER_GENERAL => &[names::C_GENERAL],
        LOWER_CONVEX => &[names::Y0_CONVEX, names::C_CONVEX],
        LOWER_LOCAL => &[names::Y0_LOCAL, names::C_LOCAL],
        _ => &[],
    }
}

/// Evaluates every formula, certifies those whose constants are all user
/// supplied, and cross-checks certified lower bounds against the certified
/// upper bound.
pub fn bound_report(p: &BoundParams) -> Result<BoundReport, BoundError> {
    p.validate()?;
    type Formula = fn(&BoundParams) -> Result<BoundValue, BoundError>;
    let formulas: [(&str, Formula); 6] = [
        (UPPER, upper_bound),
        (LOWER_LOGARITHMIC, lower_bound_logarithmic),
        (LOWER_POWER, lower_bound_power),
        (LOWER_GENERAL, lower_bound_general),
        (LOWER_CONVEX, lower_bound_convex),
        (LOWER_LOCAL, lower_bound_locally_convex),
    ];
    let mut rows = Vec::new();
    for (name, f) in formulas {
        let value = match f(p) {
            Ok(v) => v,
            Err(BoundError::MissingConstant(c)) => BoundValue::Inapplicable {
                reason: format!("missing constant {c}"),
            },
            Err(BoundError::OutOfRegime) => BoundValue::Inapplicable {
                reason: "Y = 1 is outside the small-Y regime".into(),
            },
            Err(e) => return Err(e),
        };
        let certified = value.value().is_some()
            && p.ledger.combined_provenance(constants_of(name)) == Provenance::UserSupplied;
        rows.push(BoundRow {
            formula: name.to_string(),
            value,
            certified,
        });
    }
    let mut lower_bounds = BTreeMap::new();
    let mut applicability = BTreeMap::new();
    let mut upper_bound = None;
    for r in &rows {
        match (r.value.value(), r.formula == UPPER) {
            (Some(v), true) => upper_bound = Some((v, r.certified)),
            (Some(v), false) => {
                lower_bounds.insert(r.formula.clone(), (v, r.certified));
            }
            (None, _) => {
                applicability.insert(
                    r.formula.clone(),
                    r.value.reason().unwrap_or_default().to_string(),
                );
            }
        }
    }
    let inconsistent = match upper_bound {
        Some((u, true)) => lower_bounds.values().any(|&(l, c)| c && l > u),
        _ => false,
    };
    Ok(BoundReport {
        rows,
        lower_bounds,
        upper_bound,
        applicability,
        inconsistent,
    })
}

impl BoundReport {
    /// CSV with columns `formula,value,certified,applicability`; the value
    /// is `NA` and the reason filled in when a formula has no value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["formula", "value", "certified", "applicability"])?;
        for r in &self.rows {
            let (value, reason) = match &r.value {
                BoundValue::Value { value } => (format!("{value:e}"), "applicable".to_string()),
                BoundValue::Vacuous { bracket, reason } => {
                    ("NA".to_string(), format!("vacuous: {reason} ({bracket:e})"))
                }
                BoundValue::Inapplicable { reason } => {
                    ("NA".to_string(), format!("inapplicable: {reason}"))
                }
            };
            w.write_record([
                r.formula.as_str(),
                &value,
                if r.certified { "true" } else { "false" },
                &reason,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
