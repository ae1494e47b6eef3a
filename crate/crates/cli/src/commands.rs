use std::io::Write;
use std::path::Path;

use blowup_core::experiments::{
    estimate_constants_pipeline, fit_order, run_sweep, write_sweep_csv, ExperimentError,
    ExperimentFile, FitModel, IdentityKind, SweepAxis, SweepRow, BOUND_COLUMNS,
};
use blowup_core::kernel::constants::boundary_probes;
use blowup_core::kernel::{verify_convex_identity, verify_half_identity};
use blowup_core::sequence::{
    construct_sequence, construct_sequence_capped, step_count_lower_bound,
};
use blowup_core::solver::{run, write_m_trace};
use blowup_core::{bounds::bound_report, Domain};

use crate::output::{num, opt, write_rows, Sink};
use crate::{classify, Failure, Flags};

const IDENTITY_TOL: f64 = 1e-8;
const ESTIMATE_TOL: f64 = 1e-6;

fn load(path: &Path) -> Result<ExperimentFile, Failure> {
    ExperimentFile::load(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> Option<&Path> {
    path.parent().filter(|p| !p.as_os_str().is_empty())
}

fn csv_failure(e: csv::Error) -> Failure {
    classify(ExperimentError::from(e))
}

pub fn simulate(config: &Path, flags: &Flags) -> Result<(), Failure> {
    let file = load(config)?;
    let sim = file.simulation().map_err(classify)?;
    let result = run(sim).map_err(classify)?;
    let sink = Sink::new(flags.out.as_deref())?;

    let (lo, hi) = result.t_star_bracket;
    let row = vec![
        result.status.as_str().to_string(),
        opt(result.t_star_estimate),
        num(lo),
        num(hi),
        num(result.t_last),
        result.grid_meta.dt_history.len().to_string(),
        num(result.grid_meta.h),
        result.grid_meta.nx.to_string(),
        result.grid_meta.ny.to_string(),
        num(result.argmax_location.0),
        num(result.argmax_location.1),
    ];
    let header = [
        "status", "t_star", "t_low", "t_high", "t_last", "steps", "h", "nx", "ny", "argmax_x",
        "argmax_y",
    ];
    write_rows(sink.main("summary.csv")?, &header, &[row])?;
    if let Some(out) = sink.extra("m_trace.csv")? {
        write_m_trace(&result.m_trace, out).map_err(csv_failure)?;
    }
    if let Some(out) = sink.extra("final_state.bin")? {
        result.final_state.write_to(out).map_err(classify)?;
    }
    for (i, snap) in result.snapshots.iter().enumerate() {
        if let Some(out) = sink.extra(&format!("snapshots/snapshot_{i:05}.bin"))? {
            snap.write_to(out).map_err(classify)?;
        }
    }
    Ok(())
}

pub fn bounds(config: &Path, flags: &Flags) -> Result<(), Failure> {
    let file = load(config)?;
    let params = file.bound_params(base_dir(config)).map_err(classify)?;
    let report = bound_report(&params).map_err(classify)?;
    let sink = Sink::new(flags.out.as_deref())?;
    report
        .write_csv(sink.main("bounds.csv")?)
        .map_err(csv_failure)
}

pub fn sequence(config: &Path, flags: &Flags) -> Result<(), Failure> {
    let file = load(config)?;
    let params = file.sequence_params(base_dir(config)).map_err(classify)?;
    let run = match file.sequence.as_ref().and_then(|s| s.max_steps) {
        Some(cap) => construct_sequence_capped(&params, cap),
        None => construct_sequence(&params),
    }
    .map_err(classify)?;
    let sink = Sink::new(flags.out.as_deref())?;

    let levels: Vec<Vec<String>> = run
        .levels
        .iter()
        .zip(&run.x_trace)
        .enumerate()
        .map(|(k, (m, x))| vec![k.to_string(), num(*m), num(*x)])
        .collect();
    let floor = step_count_lower_bound(params.q, params.m0, params.delta1);
    let summary = vec![vec![
        num(params.q),
        num(params.m0),
        num(params.delta1),
        run.l.to_string(),
        num(floor),
        num(run.t_star),
        num(run.lower_bound_t),
    ]];
    let summary_header = [
        "q",
        "M0",
        "delta1",
        "L",
        "L_lower_bound",
        "t_star",
        "lower_bound_t",
    ];
    if sink.has_dir() {
        write_rows(
            sink.main("sequence_levels.csv")?,
            &["k", "M_k", "x_k"],
            &levels,
        )?;
        write_rows(
            sink.main("sequence_summary.csv")?,
            &summary_header,
            &summary,
        )?;
    } else {
        let mut out = sink.main("")?;
        write_rows(&mut out, &["k", "M_k", "x_k"], &levels)?;
        writeln!(out).map_err(|e| Failure::Config(e.to_string()))?;
        write_rows(&mut out, &summary_header, &summary)?;
    }
    Ok(())
}

pub fn verify_identity(config: &Path, flags: &Flags) -> Result<(), Failure> {
    let file = load(config)?;
    let section = file
        .identity
        .as_ref()
        .ok_or_else(|| Failure::Config("missing [identity] section".into()))?;
    let domain = Domain::new(section.domain).map_err(classify)?;
    let tol = flags.tol.or(section.tol).unwrap_or(IDENTITY_TOL);
    if section.points == 0 || section.times.iter().any(|t| !(*t > 0.0)) {
        return Err(Failure::Config(
            "[identity] needs points > 0 and positive times".into(),
        ));
    }
    let mut rows = Vec::new();
    for x in boundary_probes(&domain, section.points) {
        for &t in &section.times {
            let r = match section.kind {
                IdentityKind::Half => verify_half_identity(&x, t, &domain, tol),
                IdentityKind::Convex => verify_convex_identity(&x, t, &domain, tol),
            }
            .map_err(classify)?;
            rows.push(vec![
                num(x.x),
                num(x.y),
                num(x.z),
                num(t),
                num(r.residual),
                num(r.est_abs_error),
                num(r.mass),
                num(r.boundary_term),
            ]);
        }
    }
    let header = [
        "x",
        "y",
        "z",
        "t",
        "residual",
        "est_abs_error",
        "mass",
        "boundary_term",
    ];
    let sink = Sink::new(flags.out.as_deref())?;
    write_rows(sink.main("identity.csv")?, &header, &rows)
}

pub fn estimate_constants(config: &Path, flags: &Flags) -> Result<(), Failure> {
    let file = load(config)?;
    let section = file
        .estimate
        .as_ref()
        .ok_or_else(|| Failure::Config("missing [estimate] section".into()))?;
    let domain = Domain::new(section.domain).map_err(classify)?;
    let mut grid = section.grid(ESTIMATE_TOL);
    if let Some(tol) = flags.tol {
        grid.tol = tol;
    }
    let output = estimate_constants_pipeline(
        &domain,
        section.gamma1.as_ref(),
        section.d,
        section.theorems.as_deref(),
        &grid,
    )
    .map_err(classify)?;
    let sink = Sink::new(flags.out.as_deref())?;
    output
        .ledger
        .write_csv(sink.main("ledger.csv")?)
        .map_err(classify)
}

/// Models fitted to `T*` against the swept axis.
fn fit_models(axis: SweepAxis) -> &'static [FitModel] {
    match axis {
        SweepAxis::Q => &[FitModel::InverseQ],
        SweepAxis::Gamma1Area => &[FitModel::LogVsLoglog, FitModel::LogLog],
        SweepAxis::M0 | SweepAxis::H => &[FitModel::LogLog],
    }
}

fn model_name(m: FitModel) -> &'static str {
    match m {
        FitModel::LogLog => "log-log",
        FitModel::LogVsLoglog => "log-vs-loglog",
        FitModel::InverseQ => "inverse-q",
    }
}

/// Two-column curves for an external plotter.
fn write_curves(sink: &Sink, axis: SweepAxis, rows: &[SweepRow]) -> Result<(), Failure> {
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = vec![(
        "t_star".into(),
        rows.iter()
            .filter_map(|r| r.t_star.map(|t| (r.value, t)))
            .collect(),
    )];
    for f in BOUND_COLUMNS {
        let points = rows
            .iter()
            .filter_map(|r| {
                let report = r.bounds.as_ref().ok()?;
                let row = report.rows.iter().find(|b| b.formula == f)?;
                row.value.value().map(|v| (r.value, v))
            })
            .collect();
        curves.push((f.to_string(), points));
    }
    for (name, points) in curves {
        if let Some(out) = sink.extra(&format!("curves/{name}.csv"))? {
            let body: Vec<Vec<String>> =
                points.iter().map(|(x, y)| vec![num(*x), num(*y)]).collect();
            write_rows(out, &[axis.name(), &name], &body)?;
        }
    }
    Ok(())
}

fn write_fits(sink: &Sink, axis: SweepAxis, rows: &[SweepRow]) -> Result<(), Failure> {
    let Some(out) = sink.extra("fit.csv")? else {
        return Ok(());
    };
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.t_star.map(|t| (r.value, t)))
        .unzip();
    let body: Vec<Vec<String>> = fit_models(axis)
        .iter()
        .map(|&m| match fit_order(&xs, &ys, m) {
            Ok(f) => vec![
                model_name(m).into(),
                num(f.slope),
                num(f.intercept),
                num(f.r_squared),
                String::new(),
            ],
            Err(e) => vec![
                model_name(m).into(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                e.to_string(),
            ],
        })
        .collect();
    write_rows(
        out,
        &["model", "slope", "intercept", "r_squared", "note"],
        &body,
    )
}

pub fn sweep(config: &Path, flags: &Flags) -> Result<(), Failure> {
    let file = load(config)?;
    let mut spec = file.sweep_spec(base_dir(config)).map_err(classify)?;
    if flags.workers.is_some() {
        spec.workers = flags.workers;
    }
    let rows = run_sweep(&spec).map_err(classify)?;
    let sink = Sink::new(flags.out.as_deref())?;
    write_sweep_csv(spec.axis, &rows, sink.main("sweep.csv")?).map_err(classify)?;
    write_curves(&sink, spec.axis, &rows)?;
    write_fits(&sink, spec.axis, &rows)
}
