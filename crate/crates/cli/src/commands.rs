use std::fmt::Write as _;

use anyhow::Context;
use hoecken_core::grasp::{GraspOutcome, Hand, Link, OutcomeMode, Side, TrajectorySample};
use hoecken_core::hoecken::{flattest_segment, trace_path};
use hoecken_core::svg::Heatmap;
use hoecken_core::sweep::{normalize_pinch, run_sweep, SweepSpec, Target, Variable};
use hoecken_core::synth::synthesize;
use hoecken_core::table::fmt6;
use hoecken_core::{GraspMode, RowStatus, Shape, Table};
use serde::Serialize;

use crate::config::RunConfig;
use crate::object::{label, parse_object};
use crate::output::{Header, Outputs};

/// Output format of the surface commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

fn csv(table: &Table, header: &Header, notes: &[String]) -> String {
    let mut comments = vec![header.line()];
    comments.extend_from_slice(notes);
    table.to_csv(&comments)
}

fn svg(table: &Table, header: &Header, x: &str, y: &str, z: &str, title: &str) -> anyhow::Result<String> {
    let map = Heatmap::from_table(table, x, y, z, title).context("table has no such columns")?;
    Ok(format!("<!-- {} -->\n{}", header.line(), map.to_svg()))
}

fn summarize(out: &mut String, name: &str, table: &Table, column: &str) {
    let i = table.column(column).expect("known column");
    let ok: Vec<f64> = table.rows.iter().filter(|r| r.status == RowStatus::Ok).map(|r| r.values[i]).collect();
    let lo = ok.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ok.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let _ = writeln!(
        out,
        "{name}: rows={} infeasible={} {column}_min={} {column}_max={}",
        table.len(),
        table.len() - ok.len(),
        fmt6(lo),
        fmt6(hi)
    );
}

pub fn trace(cfg: &RunConfig, out: &mut Outputs) -> anyhow::Result<String> {
    let header = Header::new(cfg.hash());
    let dims = cfg.dims()?;
    let [a, b] = cfg.trace.range_deg;
    let (a, b) = (a.to_radians(), b.to_radians());
    let trace = trace_path(&dims, a, b, cfg.trace.samples)?;
    // the window search samples the range at the configured density,
    // whatever the exported sample count
    let per_turn = cfg.stage.window_samples as f64 / std::f64::consts::TAU;
    let dense = trace_path(&dims, a, b, ((b - a) * per_turn).round() as usize + 1)?;
    let window = flattest_segment(&dense, cfg.stage.min_travel_units * dims.l)?;

    let mut table = Table::new(["theta_a_deg", "b_x_mm", "b_y_mm", "d_x_mm", "d_y_mm"]);
    for s in &trace.samples {
        table.push(vec![s.theta_a.to_degrees(), s.b.x, s.b.y, s.d.x, s.d.y], RowStatus::Ok);
    }
    out.add("trace.csv", csv(&table, &header, &[]));

    let l = dims.l;
    let mut report = String::new();
    let _ = writeln!(report, "samples={} window_samples={}", trace.len(), dense.len());
    let _ = writeln!(
        report,
        "window_deg={:.6}:{:.6}",
        window.theta_start.to_degrees(),
        window.theta_end.to_degrees()
    );
    let _ = writeln!(report, "window_index={}:{}", window.start_index, window.end_index);
    let _ = writeln!(report, "x_travel_units={:.6} x_travel_mm={:.6}", window.x_travel / l, window.x_travel);
    let _ = writeln!(report, "max_dev_units={:.6}", window.max_dev / l);
    let _ = writeln!(report, "max_dev_mm={:.6}", window.max_dev);
    Ok(report)
}

pub fn pinch(cfg: &RunConfig, format: Format, out: &mut Outputs) -> anyhow::Result<String> {
    let header = Header::new(cfg.hash());
    let p = &cfg.pinch;
    let spec = SweepSpec {
        variables: vec![
            Variable::new("h2_mm", p.h2_mm[0], p.h2_mm[1], p.grid[0]),
            Variable::new("theta1_deg", p.theta1_deg[0], p.theta1_deg[1], p.grid[1]),
        ],
        target: Target::PinchForce,
        fixed: Default::default(),
    };
    let base = cfg.sweep_base()?;
    let table = run_sweep(&spec, &base)?;
    let norm = normalize_pinch(&table, base.tau_a);
    let note = format!("tau_A_Nmm={} model={}", base.tau_a, serde_json::to_string(&base.pinch_model)?);
    out.add("pinch_force.csv", csv(&table, &header, std::slice::from_ref(&note)));
    out.add("pinch_force_normalized.csv", csv(&norm, &header, &[note]));
    if format == Format::CsvSvg {
        out.add("pinch_force.svg", svg(&table, &header, "theta1_deg", "h2_mm", "F1_N", "Pinch force F1 (N)")?);
    }
    let mut report = String::new();
    summarize(&mut report, "pinch_force", &table, "F1_N");
    Ok(report)
}

pub fn envelope(cfg: &RunConfig, format: Format, out: &mut Outputs) -> anyhow::Result<String> {
    let header = Header::new(cfg.hash());
    let e = &cfg.envelope;
    let base = cfg.sweep_base()?;
    let grid = |target| SweepSpec {
        variables: vec![
            Variable::new("theta1_deg", e.theta1_deg[0], e.theta1_deg[1], e.grid[0]),
            Variable::new("theta2_deg", e.theta2_deg[0], e.theta2_deg[1], e.grid[1]),
        ],
        target,
        fixed: Default::default(),
    };
    let spring = run_sweep(&grid(Target::SpringAngle), &base)?;
    let forces = run_sweep(&grid(Target::EnvelopeForces), &base)?;
    out.add("spring_angle.csv", csv(&spring, &header, &[]));
    out.add("envelope_forces.csv", csv(&forces, &header, &[]));
    if format == Format::CsvSvg {
        let (x, y) = ("theta2_deg", "theta1_deg");
        out.add("spring_angle.svg", svg(&spring, &header, x, y, "alpha_deg", "Spring opening angle (deg)")?);
        out.add("envelope_F2.svg", svg(&forces, &header, x, y, "F2_N", "Second phalanx force F2 (N)")?);
        out.add("envelope_F3.svg", svg(&forces, &header, x, y, "F3_N", "Distal phalanx force F3 (N)")?);
    }
    let mut report = String::new();
    summarize(&mut report, "spring_angle", &spring, "alpha_deg");
    summarize(&mut report, "envelope_forces", &forces, "F2_N");
    summarize(&mut report, "envelope_forces", &forces, "F3_N");
    Ok(report)
}

#[derive(Serialize)]
struct ContactRecord {
    side: Side,
    link: Link,
    x_mm: f64,
    y_mm: f64,
    #[serde(rename = "force_N")]
    force_n: f64,
}

#[derive(Serialize)]
struct FingerRecord {
    side: Side,
    mode: OutcomeMode,
    phase: GraspMode,
    theta1_deg: f64,
    theta2_deg: f64,
    crank_angle_at_stop_deg: f64,
    transition_angle_deg: Option<f64>,
    #[serde(rename = "F2_N")]
    f2_n: Option<f64>,
    #[serde(rename = "F3_N")]
    f3_n: Option<f64>,
}

#[derive(Serialize)]
struct GraspReport<'a> {
    header: &'a Header,
    object: &'a Shape,
    mode: OutcomeMode,
    crank_angle_at_stop_deg: f64,
    contacts: Vec<ContactRecord>,
    fingers: Vec<FingerRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory_csv: Option<String>,
}

fn trajectory_table(samples: &[TrajectorySample]) -> Table {
    let mut t = Table::new([
        "side", "theta_a_deg", "theta1_deg", "theta2_deg", "mode", "d_x_mm", "d_y_mm", "tip_x_mm", "tip_y_mm",
    ]);
    for s in samples {
        let side = if s.side == Side::Left { 0.0 } else { 1.0 };
        let mode = if s.mode == GraspMode::Pinch { 0.0 } else { 1.0 };
        t.push(
            vec![
                side,
                s.theta_a.to_degrees(),
                s.theta1.to_degrees(),
                s.theta2.to_degrees(),
                mode,
                s.d.x,
                s.d.y,
                s.tip.x,
                s.tip.y,
            ],
            RowStatus::Ok,
        );
    }
    t
}

fn describe(out: &mut String, spec: &str, g: &GraspOutcome) {
    let _ = writeln!(out, "object={spec} mode={:?} crank_angle_deg={:.6}", g.mode, g.crank_angle_at_stop.to_degrees());
    for c in &g.contacts {
        let _ = writeln!(
            out,
            "  contact side={:?} link={:?} x_mm={:.6} y_mm={:.6} force_N={:.6}",
            c.side, c.link, c.point.x, c.point.y, c.force
        );
    }
    for f in &g.fingers {
        if let Some(e) = f.envelope_forces {
            let _ = writeln!(out, "  finger side={:?} F2_N={:.6} F3_N={:.6}", f.side, e.f2, e.f3);
        }
    }
}

pub fn simulate(cfg: &RunConfig, out: &mut Outputs) -> anyhow::Result<String> {
    let header = Header::new(cfg.hash());
    let hand = Hand::new(cfg.hand_config()?)?;
    let mut report = String::new();
    for spec in &cfg.objects {
        let shape = parse_object(spec)?;
        let g = hand.close_on_object(&shape).with_context(|| format!("simulating {spec}"))?;
        let name = format!("grasp_{}", label(spec));
        let trajectory_csv = g.trajectory.as_ref().map(|t| {
            let file = format!("{name}_trajectory.csv");
            let notes = ["side: 0 left, 1 right; mode: 0 pinch, 1 envelope".to_string()];
            out.add(file.clone(), csv(&trajectory_table(t), &header, &notes));
            file
        });
        let doc = GraspReport {
            header: &header,
            object: &shape,
            mode: g.mode,
            crank_angle_at_stop_deg: g.crank_angle_at_stop.to_degrees(),
            contacts: g
                .contacts
                .iter()
                .map(|c| ContactRecord { side: c.side, link: c.link, x_mm: c.point.x, y_mm: c.point.y, force_n: c.force })
                .collect(),
            fingers: g
                .fingers
                .iter()
                .map(|f| FingerRecord {
                    side: f.side,
                    mode: f.mode,
                    phase: f.state.mode,
                    theta1_deg: f.state.theta1.to_degrees(),
                    theta2_deg: f.state.theta2.to_degrees(),
                    crank_angle_at_stop_deg: f.crank_angle_at_stop.to_degrees(),
                    transition_angle_deg: f.transition_angle.map(f64::to_degrees),
                    f2_n: f.envelope_forces.map(|e| e.f2),
                    f3_n: f.envelope_forces.map(|e| e.f3),
                })
                .collect(),
            trajectory_csv,
        };
        out.add(format!("{name}.json"), serde_json::to_string_pretty(&doc)? + "\n");
        describe(&mut report, spec, &g);
    }
    Ok(report)
}

pub fn synth(cfg: &RunConfig, out: &mut Outputs) -> anyhow::Result<String> {
    let header = Header::new(cfg.hash());
    let r = synthesize(&cfg.synthesis_spec())?;
    out.add("synth_log.csv", csv(&r.log_table(), &header, &[]));
    let incumbent = r.log.last().map_or(f64::NAN, |e| e.incumbent);
    Ok(format!(
        "status={:?} evaluations={} lAC_ratio={:.6} lBD_ratio={:.6} deviation_units={:.6} incumbent_units={incumbent:.6}\n",
        r.status,
        r.log.len(),
        r.ac_ratio,
        r.bd_ratio,
        r.deviation
    ))
}
