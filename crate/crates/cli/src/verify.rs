//! Built-in verification suites. Each check reports its measured value and
//! threshold; any failure gives exit code 4.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blowup_core::bounds::upper_bound;
use blowup_core::experiments::{bound_params_for, BoundsSection};
use blowup_core::kernel::constants::boundary_probes;
use blowup_core::kernel::{verify_convex_identity, verify_half_identity};
use blowup_core::sequence::{construct_sequence, e_q, step_count_lower_bound};
use blowup_core::solver::{run, InitialCondition, SimConfig, Solver};
use blowup_core::{ConstantLedger, Domain, SequenceParams};

use crate::output::{num, write_rows, Sink};
use crate::{classify, Failure, Flags};

const DEFAULT_SEED: u64 = 20240601;
const SUITES: [&str; 3] = ["identities", "sequence", "solver"];

struct Check {
    suite: &'static str,
    name: &'static str,
    value: f64,
    threshold: f64,
    pass: bool,
}

impl Check {
    /// Passes when `value ≤ threshold`.
    fn at_most(suite: &'static str, name: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            suite,
            name,
            value,
            threshold,
            pass: value <= threshold,
        }
    }
}

fn identities(tol: f64) -> Result<Vec<Check>, Failure> {
    let cases = [
        (
            Domain::disk(1.0).map_err(classify)?,
            8,
            vec![0.01, 0.1, 1.0],
        ),
        (Domain::ball(1.0).map_err(classify)?, 4, vec![0.01, 0.1]),
    ];
    let (mut half, mut convex) = (0.0f64, 0.0f64);
    for (domain, count, times) in &cases {
        for x in boundary_probes(domain, *count) {
            for &t in times {
                half = half.max(
                    verify_half_identity(&x, t, domain, tol)
                        .map_err(classify)?
                        .residual
                        .abs(),
                );
                convex = convex.max(
                    verify_convex_identity(&x, t, domain, tol)
                        .map_err(classify)?
                        .residual
                        .abs(),
                );
            }
        }
    }
    Ok(vec![
        Check::at_most("identities", "half_identity_max_residual", half, 1e-3),
        Check::at_most("identities", "convex_identity_max_residual", convex, 1e-3),
    ])
}

fn sequence(seed: u64) -> Result<Vec<Check>, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sandwich = 0;
    for _ in 0..10_000 {
        let q = 100.0 - 99.0 * rng.random::<f64>();
        let e = e_q(q).map_err(classify)?;
        let upper = (1.0 / q).min(1.0 / ((q - 1.0) * std::f64::consts::E));
        if !(1.0 / (3.0 * q) < e && e < upper && upper < 1.0) {
            sandwich += 1;
        }
    }

    // q = 2 levels solve δ M'² − M' + M = 0.
    let run =
        construct_sequence(&SequenceParams::convex(2.0, 1.0, 0.1, 2, 1.0)).map_err(classify)?;
    let mut m = 1.0f64;
    let mut level_err = 0.0f64;
    for level in &run.levels[1..] {
        m = 2.0 * m / (1.0 + (1.0 - 0.4 * m).sqrt());
        level_err = level_err.max((level - m).abs() / m);
    }

    let (mut bad_count, mut worst_x, mut checked) = (0, 0.0f64, 0);
    while checked < 200 {
        let q = 1.0 + 9.0 * rng.random::<f64>().max(1e-6);
        let m0 = 10f64.powf(rng.random_range(-3.0..1.0));
        let delta1 = 10f64.powf(rng.random_range(-8.0..0.0));
        // Redraw instances with too many levels or levels beyond f64 range.
        if 1.0 / (m0.powf(q - 1.0) * delta1 * (q - 1.0)) > 2e5
            || (1.0 / delta1).ln() / (q - 1.0) > 700.0
        {
            continue;
        }
        checked += 1;
        let r =
            construct_sequence(&SequenceParams::convex(q, m0, delta1, 2, 1.0)).map_err(classify)?;
        if r.l as f64 <= step_count_lower_bound(q, m0, delta1) {
            bad_count += 1;
        }
        for k in 1..=r.l {
            let (prev, cur) = (r.x_trace[k - 1], r.x_trace[k]);
            worst_x = worst_x.max((prev - cur * (1.0 - cur).powf(q - 1.0)).abs() / prev);
        }
    }
    Ok(vec![
        Check::at_most("sequence", "e_q_sandwich_violations", sandwich as f64, 0.0),
        Check::at_most("sequence", "quadratic_level_rel_error", level_err, 1e-10),
        Check {
            suite: "sequence",
            name: "quadratic_step_count",
            value: run.l as f64,
            threshold: 5.0,
            pass: run.l == 5,
        },
        Check::at_most(
            "sequence",
            "step_count_bound_violations",
            bad_count as f64,
            0.0,
        ),
        Check::at_most("sequence", "x_recursion_rel_error", worst_x, 1e-10),
    ])
}

fn solver() -> Result<Vec<Check>, Failure> {
    let closed = SimConfig {
        u0: InitialCondition::Bump {
            m0: 2.0,
            center: [0.3, 0.6],
            width: 0.2,
        },
        flux_enabled: false,
        ..SimConfig::unit_square(2.0, 0.5, 0.05)
    };
    let s = Solver::new(closed).map_err(classify)?;
    let mut state = s.initial_state();
    let m0 = s.mass(&state.u);
    let dt = s.max_dt(2.0);
    for _ in 0..10_000 {
        state = s.step(&state, dt).map_err(classify)?;
    }
    let drift = (s.mass(&state.u) - m0).abs() / m0;

    let config = SimConfig::unit_square(2.0, 1.0, 0.05);
    let ceiling = bound_params_for(&config, &BoundsSection::default(), ConstantLedger::new())
        .and_then(|p| Ok(upper_bound(&p)?))
        .map_err(classify)?
        .value()
        .unwrap_or(f64::NAN);
    let t_star = run(&config)
        .map_err(classify)?
        .t_star_estimate
        .unwrap_or(f64::INFINITY);
    Ok(vec![
        Check::at_most("solver", "mass_relative_drift", drift, 1e-10),
        Check::at_most("solver", "blowup_time_over_ceiling", t_star / ceiling, 1.05),
    ])
}

pub fn run_suite(suite: &str, flags: &Flags) -> Result<(), Failure> {
    let selected: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => {
            return Err(Failure::Config(format!(
                "unknown suite `{other}`; expected one of {}, all",
                SUITES.join(", ")
            )))
        }
    };
    let seed = flags.seed.unwrap_or(DEFAULT_SEED);
    let tol = flags.tol.unwrap_or(1e-8);
    let mut checks = Vec::new();
    for s in selected {
        checks.extend(match s {
            "identities" => identities(tol)?,
            "sequence" => sequence(seed)?,
            _ => solver()?,
        });
    }
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.suite.into(),
                c.name.into(),
                num(c.value),
                num(c.threshold),
                c.pass.to_string(),
                seed.to_string(),
            ]
        })
        .collect();
    let sink = Sink::new(flags.out.as_deref())?;
    write_rows(
        sink.main("verify.csv")?,
        &["suite", "check", "value", "threshold", "pass", "seed"],
        &rows,
    )?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}
