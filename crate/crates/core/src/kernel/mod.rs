//! The heat kernel `Φ`, its boundary-time integrals, and the identities and
//! estimates built on them.
//!
//! Every boundary-time integral is reduced to a surface integral of a
//! closed-form time integral. With `s = r²/(4τ)`,
//!
//! ```text
//! ∫₀ᵗ Φ(r, τ) dτ            = Γ(n/2 − 1, z) / (4 π^{n/2} r^{n−2})
//! ∫₀ᵗ Φ(r, τ) · dot/(2τ) dτ = dot · Γ(n/2, z) / (2 π^{n/2} rⁿ)
//! ```
//!
//! with `z = r²/(4t)` and `dot = (x − y)·n(y)`. Because `dot` does not
//! depend on `τ`, the absolute-value integral `I₁` is the surface integral
//! of the absolute value of the second expression.

pub mod checks;
pub mod constants;
pub mod mass;
pub mod surface;

use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{GeometryError, QuadNode};
use crate::quad::QuadError;
use crate::special::{erfc, exp_integral_e1, upper_gamma_half_integer};
use crate::Point;

pub use checks::{
    boundary_time_integral_abs_nd, boundary_time_integral_phi, boundary_time_integral_signed_nd,
    critical_boundary_time_bound_check, log_surface_integral, perturbed_identity_check,
    rearrangement_check, riesz_surface_integral, tabulated_profile, tail_bound_check,
    verify_absolute_identity_unchecked, verify_convex_identity, verify_half_identity,
    IdentityResidual, RatioRow, RearrangementOutcome, TailCheck,
};
pub use mass::domain_heat_mass;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("the convex identity requires a convex domain")]
    NotConvex,
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn check_time(t: f64) -> Result<(), KernelError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(KernelError::NonPositiveTime(t))
    }
}

/// Fundamental solution `(4πt)^{-n/2} exp(-|x|²/(4t))`.
pub fn phi(x: &Point, t: f64, n: usize) -> Result<f64, KernelError> {
    check_time(t)?;
    Ok((4.0 * PI * t).powf(-(n as f64) / 2.0) * (-x.norm_squared() / (4.0 * t)).exp())
}

/// `D_y[Φ(x − y, t)] · n(y) = Φ(x − y, t) (x − y)·n(y) / (2t)` at
/// `y = node.point`.
pub fn phi_normal_derivative(
    x: &Point,
    node: &QuadNode,
    t: f64,
    n: usize,
) -> Result<f64, KernelError> {
    let d = x - node.point;
    Ok(phi(&d, t, n)? * d.dot(&node.normal) / (2.0 * t))
}

/// `∫₀ᵗ Φ(r, τ) dτ` in dimension `n ∈ {2, 3}`.
pub fn single_layer_time_integral(r: f64, t: f64, n: usize) -> f64 {
    let z = r * r / (4.0 * t);
    match n {
        2 => exp_integral_e1(z) / (4.0 * PI),
        3 => erfc(r / (2.0 * t.sqrt())) / (4.0 * PI * r),
        _ => {
            let h = n as f64 / 2.0;
            upper_gamma_half_integer(h - 1.0, z) / (4.0 * PI.powf(h) * r.powi(n as i32 - 2))
        }
    }
}

/// `∫₀ᵗ Φ(r, τ) dot / (2τ) dτ` in dimension `n`.
pub fn double_layer_time_integral(r: f64, dot: f64, t: f64, n: usize) -> f64 {
    if dot == 0.0 {
        return 0.0;
    }
    let z = r * r / (4.0 * t);
    match n {
        2 => dot * (-z).exp() / (2.0 * PI * r * r),
        3 => {
            let g = 0.5 * PI.sqrt() * erfc(z.sqrt()) + z.sqrt() * (-z).exp();
            dot * g / (2.0 * PI.powf(1.5) * r * r * r)
        }
        _ => {
            let h = n as f64 / 2.0;
            dot * upper_gamma_half_integer(h, z) / (2.0 * PI.powf(h) * r.powi(n as i32))
        }
    }
}
