use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::escape::{analytic_linear_escape, escape_probability, fit_power_law, log_grid, offset_scan, PowerLawFit, Region};
use crate::planar::planar_scan;
use crate::propagator::KernelConvention;
use crate::wavefunc::{make_initial_state, Family, InitialState, SampledWaveFunction, StateParams, SupportInterval};
use crate::zeno::{run_zeno, ZenoSpec};

use super::report::{fmt_num, read_columns, Cell, Report};
use super::{
    CliError, Command, EscapeScanArgs, FitArgs, Format, OffsetScanArgs, OutputArgs, PlanarArgs, ShapeArgs, ZenoArgs,
};

type Outcome = Result<(), CliError>;

pub(super) fn dispatch(command: Command) -> Outcome {
    match command {
        Command::EscapeScan(a) => escape_scan(&a),
        Command::OffsetScan(a) => offset(&a),
        Command::Zeno(a) => zeno(&a),
        Command::Planar(a) => planar(&a),
        Command::Fit(a) => fit(&a),
    }
}

/// Flattened `key = value` pairs of the resolved arguments.
fn resolved<T: Serialize>(args: &T) -> Vec<(String, String)> {
    let Ok(Value::Object(map)) = serde_json::to_value(args) else {
        return Vec::new();
    };
    map.into_iter()
        .map(|(k, v)| {
            let v = match v {
                Value::Null => "none".to_string(),
                Value::String(s) => s,
                Value::Number(n) => match n.as_f64() {
                    Some(x) if !n.is_i64() && !n.is_u64() => fmt_num(x),
                    _ => n.to_string(),
                },
                Value::Array(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                other => other.to_string(),
            };
            (k, v)
        })
        .collect()
}

fn convention(name: &str) -> Result<KernelConvention, CliError> {
    name.parse().map_err(CliError::from)
}

fn emit(report: &Report, out: Option<&Path>, format: Format) -> Outcome {
    let text = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_with(report: &Report, output: &OutputArgs) -> Outcome {
    emit(report, output.out.as_deref(), output.format)
}

fn read_samples(path: &Path) -> Result<(Vec<f64>, Vec<Complex64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for (k, line) in text.lines().map(str::trim).enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| CliError::Config(format!("{} line {}: {e}", path.display(), k + 1)))
        };
        let cells: Vec<&str> = line.split(',').collect();
        if !(2..=3).contains(&cells.len()) {
            return Err(CliError::Config(format!("{} line {}: expected x,re[,im]", path.display(), k + 1)));
        }
        xs.push(parse(cells[0])?);
        let im = if cells.len() == 3 { parse(cells[2])? } else { 0.0 };
        vs.push(Complex64::new(parse(cells[1])?, im));
    }
    Ok((xs, vs))
}

fn build_state(family: &str, shape: &ShapeArgs) -> Result<(InitialState, SampledWaveFunction), CliError> {
    let family: Family = family.parse()?;
    let support = match (shape.support_left, shape.support_right) {
        (Some(l), Some(r)) => Some(SupportInterval::new(l, r)?),
        (None, None) => None,
        _ => return Err(CliError::Config("give both --support-left and --support-right".into())),
    };
    let samples = match (&shape.samples, family) {
        (Some(p), Family::CustomSamples) => Some(read_samples(p)?),
        _ => None,
    };
    let params = StateParams { sigma: shape.sigma, center: shape.center, samples };
    Ok(make_initial_state(family, support, &params, shape.mesh_size)?)
}

fn dt_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    log_grid(min, max, points).map_err(|e| CliError::Config(e.to_string()))
}

fn push_fit(summary: &mut Vec<(String, Cell)>, prefix: &str, fit: Option<PowerLawFit>) {
    match fit {
        Some(f) => {
            summary.push((format!("{prefix}exponent"), f.exponent.into()));
            summary.push((format!("{prefix}prefactor"), f.prefactor.into()));
            summary.push((format!("{prefix}r_squared"), f.r_squared.into()));
            summary.push((format!("{prefix}exponent_stderr"), f.exponent_stderr.into()));
            summary.push((format!("{prefix}points"), f.points.into()));
        }
        None => summary.push((format!("{prefix}exponent"), "unavailable".into())),
    }
}

/// The time step of the compact kernel that gives the same density.
fn compact_time(convention: KernelConvention, dt: f64) -> f64 {
    match convention {
        KernelConvention::Compact => dt,
        KernelConvention::Standard => 4.0 * dt,
    }
}

fn escape_scan(a: &EscapeScanArgs) -> Outcome {
    let conv = convention(&a.output.convention)?;
    let dts = dt_grid(a.sweep.dt_min, a.sweep.dt_max, a.sweep.points)?;
    let (state, wave) = build_state(&a.state, &a.shape)?;
    let (dl, dr) = state
        .boundary
        .map(|b| (b.left_derivative, b.right_derivative))
        .unwrap_or((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    let results: Vec<_> = dts
        .par_iter()
        .map(|&dt| {
            let right = escape_probability(&wave, dt, a.delta, Region::RightRay, conv)?;
            let left = escape_probability(&wave, dt, a.delta, Region::LeftRay, conv)?;
            Ok((dt, right, left))
        })
        .collect::<crate::error::Result<_>>()?;
    let mut rows = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (dt, right, left) in results {
        let total = right.probability + left.probability;
        let predicted = analytic_linear_escape(dr, dl, compact_time(conv, dt));
        let ratio = if predicted > 0.0 { total / predicted } else { f64::NAN };
        rows.push(vec![
            dt.into(),
            right.probability.into(),
            left.probability.into(),
            total.into(),
            predicted.into(),
            ratio.into(),
            (right.est_error + left.est_error).into(),
        ]);
        xs.push(dt);
        ys.push(total);
    }
    let mut summary = Vec::new();
    push_fit(&mut summary, "", fit_power_law(&xs, &ys).ok());
    let report = Report {
        command: "escape-scan".into(),
        config: resolved(a),
        columns: ["dt", "escape_right", "escape_left", "escape_total", "analytic_prediction", "ratio", "est_error"]
            .map(String::from)
            .to_vec(),
        rows,
        summary,
    };
    emit_with(&report, &a.output)
}

fn offset(a: &OffsetScanArgs) -> Outcome {
    let conv = convention(&a.output.convention)?;
    let dts = dt_grid(a.sweep.dt_min, a.sweep.dt_max, a.sweep.points)?;
    let deltas = dt_grid(a.delta_min, a.delta_max, a.delta_points)?;
    let (_, wave) = build_state(&a.state, &a.shape)?;
    let cells = offset_scan(&wave, &dts, &deltas, conv)?;
    let rows = cells
        .iter()
        .map(|c| {
            vec![
                c.escape.dt.into(),
                c.escape.delta.into(),
                c.escape.probability.into(),
                c.density.into(),
                c.in_boundary_layer.into(),
                c.escape.est_error.into(),
            ]
        })
        .collect();
    let mut summary = Vec::new();
    for &dt in &dts {
        let pts: Vec<_> = cells.iter().filter(|c| c.escape.dt == dt && !c.in_boundary_layer).collect();
        let xs: Vec<f64> = pts.iter().map(|c| c.escape.delta).collect();
        let ys: Vec<f64> = pts.iter().map(|c| c.escape.probability).collect();
        push_fit(&mut summary, &format!("delta_fit[dt={}].", fmt_num(dt)), fit_power_law(&xs, &ys).ok());
    }
    for &d in &deltas {
        let pts: Vec<_> = cells.iter().filter(|c| c.escape.delta == d).collect();
        let xs: Vec<f64> = pts.iter().map(|c| c.escape.dt).collect();
        let ys: Vec<f64> = pts.iter().map(|c| c.escape.probability).collect();
        push_fit(&mut summary, &format!("dt_fit[delta={}].", fmt_num(d)), fit_power_law(&xs, &ys).ok());
    }
    let report = Report {
        command: "offset-scan".into(),
        config: resolved(a),
        columns: ["dt", "delta", "escape_right", "density_at_offset", "in_boundary_layer", "est_error"]
            .map(String::from)
            .to_vec(),
        rows,
        summary,
    };
    emit_with(&report, &a.output)
}

fn zeno(a: &ZenoArgs) -> Outcome {
    let conv = convention(&a.output.convention)?;
    let mut steps = a.steps.clone();
    steps.sort_unstable();
    steps.dedup();
    if steps.is_empty() || steps[0] == 0 {
        return Err(CliError::Config("--N needs positive step counts".into()));
    }
    let (_, wave) = build_state(&a.state, &a.shape)?;
    let runs = steps
        .par_iter()
        .map(|&n| {
            run_zeno(&ZenoSpec {
                total_time: a.total_time,
                steps: n,
                wave: wave.clone(),
                convention: conv,
                mesh_size: a.shape.mesh_size,
            })
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    let rows = runs
        .iter()
        .map(|r| {
            vec![
                r.steps.into(),
                (r.total_time / r.steps as f64).into(),
                r.total_detection.into(),
                r.per_step_escape[0].into(),
                r.per_step_escape[r.steps - 1].into(),
                r.final_state_norm.into(),
                r.max_norm_defect.into(),
                r.mesh_size.into(),
                r.est_error.into(),
            ]
        })
        .collect();
    let mut summary = Vec::new();
    let ns: Vec<f64> = runs.iter().map(|r| r.steps as f64).collect();
    let ds: Vec<f64> = runs.iter().map(|r| r.total_detection).collect();
    push_fit(&mut summary, "detection_vs_N.", fit_power_law(&ns, &ds).ok());
    for w in runs.windows(2) {
        summary.push((format!("ratio[N={}/N={}]", w[1].steps, w[0].steps), (w[1].total_detection / w[0].total_detection).into()));
    }
    let report = Report {
        command: "zeno".into(),
        config: resolved(a),
        columns: [
            "N",
            "dt",
            "total_detection",
            "first_step_escape",
            "last_step_escape",
            "final_state_norm",
            "max_norm_defect",
            "mesh_size",
            "est_error",
        ]
        .map(String::from)
        .to_vec(),
        rows,
        summary,
    };
    emit_with(&report, &a.output)
}

fn planar(a: &PlanarArgs) -> Outcome {
    let conv = convention(&a.output.convention)?;
    let dts = dt_grid(a.sweep.dt_min, a.sweep.dt_max, a.sweep.points)?;
    let (_, wx) = build_state(&a.state_x, &a.shape)?;
    let scan = if a.state_x == a.state_y {
        // Identical factors share one set of line budgets.
        planar_scan(&wx, &wx, &dts, conv)?
    } else {
        let (_, wy) = build_state(&a.state_y, &a.shape)?;
        planar_scan(&wx, &wy, &dts, conv)?
    };
    let rows = scan
        .reports
        .iter()
        .map(|r| {
            vec![
                r.dt.into(),
                r.p_a.into(),
                r.p_b.into(),
                r.p_c.into(),
                r.p_b_x().into(),
                r.p_b_y().into(),
                (r.p_a + r.p_b + r.p_c).into(),
                r.est_error.into(),
            ]
        })
        .collect();
    let mut summary = Vec::new();
    push_fit(&mut summary, "p_b.", scan.fit_b);
    push_fit(&mut summary, "p_c.", scan.fit_c);
    push_fit(&mut summary, "p_b_x.", scan.fit_b_x);
    push_fit(&mut summary, "p_b_y.", scan.fit_b_y);
    let report = Report {
        command: "planar".into(),
        config: resolved(a),
        columns: ["dt", "p_a", "p_b", "p_c", "p_b_x", "p_b_y", "partition_sum", "est_error"]
            .map(String::from)
            .to_vec(),
        rows,
        summary,
    };
    emit_with(&report, &a.output)
}

fn fit(a: &FitArgs) -> Outcome {
    let text = std::fs::read_to_string(&a.input).map_err(|e| CliError::Io(format!("{}: {e}", a.input.display())))?;
    let (xs, ys) = read_columns(&text, &a.x_col, &a.y_col).map_err(CliError::Config)?;
    let f = fit_power_law(&xs, &ys)?;
    let mut summary = Vec::new();
    push_fit(&mut summary, "", Some(f));
    for (k, v) in &summary {
        if let Cell::Num(x) = v {
            println!("{k} = {}", fmt_num(*x));
        } else if let Cell::Int(n) = v {
            println!("{k} = {n}");
        }
    }
    if let Some(out) = &a.out {
        let report = Report {
            command: "fit".into(),
            config: resolved(a),
            columns: vec![a.x_col.clone(), a.y_col.clone()],
            rows: xs.iter().zip(&ys).map(|(x, y)| vec![(*x).into(), (*y).into()]).collect(),
            summary,
        };
        emit(&report, Some(out), a.format)?;
    }
    Ok(())
}
