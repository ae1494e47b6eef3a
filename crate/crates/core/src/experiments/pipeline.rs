use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::geometry::{Domain, PatchSpec};
use crate::kernel::constants::{
    convex_recipe, estimate_constant, general_recipe, local_recipe, ConstantLedger, Estimable,
    EstimationGrid, EstimationTarget,
};
use crate::kernel::KernelError;

/// Lower-bound arguments whose constants a pipeline run prepares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Convex,
    LocallyConvex,
    General,
}

impl Theorem {
    fn inputs(self) -> &'static [Estimable] {
        match self {
            Theorem::Convex => &[Estimable::AbsLayer, Estimable::Crit],
            Theorem::LocallyConvex => &[Estimable::AbsLayer, Estimable::Crit, Estimable::Tail],
            Theorem::General => &[Estimable::AbsLayer, Estimable::Alpha],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub ledger: ConstantLedger,
    pub theorems: Vec<Theorem>,
    /// Local convexity radius used by the locally convex recipe.
    pub d: Option<f64>,
}

/// Estimates every constant the selected theorems need on `grid` and
/// derives their recipe constants.
///
/// Without an explicit selection the general argument always runs, the
/// convex one on convex domains, and the locally convex one on other
/// domains when `Γ₁` is given and a local convexity radius is known or
/// detected.
pub fn estimate_constants_pipeline(
    domain: &Domain,
    gamma1: Option<&PatchSpec>,
    d: Option<f64>,
    theorems: Option<&[Theorem]>,
    grid: &EstimationGrid,
) -> Result<PipelineOutput, ExperimentError> {
    let patch = gamma1.map(|g| domain.patch(g)).transpose()?;
    let d = match (d, &patch) {
        (Some(d), _) => Some(d),
        (None, Some(p)) => domain.local_convexity_radius(p),
        (None, None) => None,
    };
    let theorems: Vec<Theorem> = match theorems {
        Some(t) => t.to_vec(),
        None => {
            let mut t = vec![Theorem::General];
            if domain.is_convex() {
                t.push(Theorem::Convex);
            }
            if !domain.is_convex() && patch.is_some() && d.is_some() {
                t.push(Theorem::LocallyConvex);
            }
            t
        }
    };
    if theorems.contains(&Theorem::Convex) && !domain.is_convex() {
        return Err(KernelError::NotConvex.into());
    }
    if theorems.contains(&Theorem::LocallyConvex) && (patch.is_none() || d.is_none()) {
        return Err(ExperimentError::Config(
            "the locally convex constants need Γ₁ and a local convexity radius".into(),
        ));
    }
    let mut needed: Vec<Estimable> = theorems
        .iter()
        .flat_map(|t| t.inputs().iter().copied())
        .collect();
    needed.sort_by_key(|e| e.key());
    needed.dedup();

    let target = EstimationTarget {
        domain,
        gamma1: patch.as_ref(),
        d,
    };
    let mut ledger = ConstantLedger::new();
    for name in needed {
        ledger.insert(name.key(), estimate_constant(name, &target, grid)?)?;
    }
    let n = domain.dim();
    for t in &theorems {
        match t {
            Theorem::Convex => convex_recipe(&mut ledger, n)?,
            Theorem::LocallyConvex => local_recipe(&mut ledger, n, d.expect("checked above"))?,
            Theorem::General => general_recipe(&mut ledger)?,
        }
    }
    Ok(PipelineOutput {
        ledger,
        theorems,
        d,
    })
}
