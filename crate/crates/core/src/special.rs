//! Special functions needed by the time-integrated heat kernels.
//!
//! Integrating `Φ(r, τ)` over `τ ∈ (0, t)` with `s = r²/(4τ)` turns every
//! kernel into an upper incomplete gamma function of half-integer order, so
//! only `Γ(k/2, z)` for small `k` is required.

use statrs::function::gamma::{gamma, gamma_lr};

pub use libm::{erf, erfc};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E₁(z) = ∫_z^∞ e^{-s}/s ds` for `z > 0`.
///
/// Returns `+∞` at `z = 0` and `NaN` for negative arguments.
pub fn exp_integral_e1(z: f64) -> f64 {
    if z.is_nan() || z < 0.0 {
        return f64::NAN;
    }
    if z == 0.0 {
        return f64::INFINITY;
    }
    if z > 700.0 {
        return 0.0;
    }
    if z <= 1.0 {
        // Power series: E₁(z) = -γ - ln z - Σ (-z)^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -z / k as f64;
            let contrib = term / k as f64;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - z.ln() - sum
    } else {
        // Modified Lentz evaluation of the continued fraction for e^z E₁(z).
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

/// Upper incomplete gamma `Γ(a, z)` for half-integer orders `a = k/2`,
/// `k ∈ {0, 1, 2, ...}`, built by upward recurrence from `Γ(0, z) = E₁(z)`
/// and `Γ(1/2, z) = √π erfc(√z)`.
///
/// # Panics
///
/// Panics if `2a` is not a non-negative integer.
pub fn upper_gamma_half_integer(a: f64, z: f64) -> f64 {
    let twice = 2.0 * a;
    assert!(
        twice >= 0.0 && (twice - twice.round()).abs() < 1e-12,
        "order {a} is not a non-negative half-integer"
    );
    let k = twice.round() as u32;
    if z == 0.0 {
        return if k == 0 { f64::INFINITY } else { gamma(a) };
    }
    let (mut order, mut value) = if k.is_multiple_of(2) {
        (0.0, exp_integral_e1(z))
    } else {
        (0.5, std::f64::consts::PI.sqrt() * erfc(z.sqrt()))
    };
    let e = (-z).exp();
    while order + 0.5 < a {
        // Γ(s + 1, z) = s Γ(s, z) + z^s e^{-z}
        value = order * value + z.powf(order) * e;
        order += 1.0;
    }
    value
}

/// Regularized lower incomplete gamma `P(a, z) = γ(a, z) / Γ(a)`.
///
/// Uses `-expm1(-z)` for `a = 1` so that the small-`z` limit keeps full
/// relative precision.
pub fn lower_gamma_regularized(a: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if a == 1.0 {
        return -(-z).exp_m1();
    }
    gamma_lr(a, z)
}
