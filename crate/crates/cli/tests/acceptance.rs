//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use hoecken_core::finger::{pre_contact_theta2, FingerState};
use hoecken_core::force::{contact_kinematics, envelope_forces, envelope_forces_matrix, virtual_work_residual};
use hoecken_core::geom::Point2;
use hoecken_core::grasp::{close_on_object, resting_circle, HandConfig, OutcomeMode};
use hoecken_core::hoecken::{dxd_dtheta, solve_position};
use hoecken_core::spring::{opening_angle, rest_angle, sensitivities};
use hoecken_core::sweep::{run_sweep, SweepBase, SweepSpec, Target, Variable};
use hoecken_core::{Dims, Finger, RowStatus, Shape, Table};

type Check = Result<String, String>;

fn hoecken(args: &[&str], cwd: &Path) -> (Output, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_hoecken"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HOECKEN_SEED_DIR")
        .output()
        .expect("binary runs");
    (out, start.elapsed())
}

fn report_value(stdout: &str, key: &str) -> Option<f64> {
    stdout
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key)?.strip_prefix('=')?.parse().ok())
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn straight_line_deviation() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (out, elapsed) = hoecken(&["trace", "--out", "out"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    if !out.status.success() {
        return Err(format!("trace failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let units = report_value(&stdout, "max_dev_units").ok_or("no max_dev_units")?;
    let mm = report_value(&stdout, "max_dev_mm").ok_or("no max_dev_mm")?;
    let travel = report_value(&stdout, "x_travel_units").ok_or("no x_travel_units")?;
    ensure(
        (units - 0.0164).abs() <= 0.0005 && (mm - 0.492).abs() <= 0.015 && travel >= 5.18 && elapsed < Duration::from_secs(1),
        format!("band {units:.6} units ({mm:.4} mm), travel {travel:.4} l, {:.0} ms", elapsed.as_secs_f64() * 1e3),
    )
}

fn zero_spring_limit() -> Check {
    let p = Finger::nominal();
    let expect = 400.0 / 150.0;
    let mut worst = 0.0_f64;
    for t1 in linspace(0.0, 40f64.to_radians(), 100) {
        let t2 = pre_contact_theta2(&p, t1).map_err(|e| e.to_string())?;
        let f = envelope_forces(&p, t1, t2).map_err(|e| e.to_string())?;
        if f.f3 != 0.0 {
            return Err(format!("F3 = {} at theta1 = {t1}", f.f3));
        }
        worst = worst.max((f.f2 - expect).abs());
    }
    ensure(worst <= 1e-9, format!("F3 = 0 exactly, max |F2 - 400/150| = {worst:.2e} over 100 theta1"))
}

/// Feasible points of the 50×50 envelope grid.
fn envelope_grid() -> Vec<(f64, f64)> {
    let p = Finger::nominal();
    let mut pts = Vec::new();
    for t1 in linspace(0.0, 40f64.to_radians(), 50) {
        for t2 in linspace(0.0, 50f64.to_radians(), 50) {
            if envelope_forces(&p, t1, t2).is_ok() {
                pts.push((t1, t2));
            }
        }
    }
    pts
}

fn closed_form_vs_matrix() -> Check {
    let p = Finger::nominal();
    let pts = envelope_grid();
    let mut worst = 0.0_f64;
    for &(t1, t2) in &pts {
        let a = envelope_forces(&p, t1, t2).unwrap();
        let b = envelope_forces_matrix(&p, t1, t2).map_err(|e| e.to_string())?;
        worst = worst.max(rel(a.f2, b.f2)).max(rel(a.f3, b.f3));
    }
    ensure(worst <= 1e-10, format!("max relative difference {worst:.2e} over {} feasible points", pts.len()))
}

fn virtual_work() -> Check {
    let p = Finger::nominal();
    let pts = envelope_grid();
    let mut worst = 0.0_f64;
    for &(t1, t2) in &pts {
        let f = envelope_forces(&p, t1, t2).unwrap();
        for (d1, d2) in [(1.0, 0.0), (0.0, 1.0)] {
            let r = virtual_work_residual(&p, t1, t2, &f, d1, d2).map_err(|e| e.to_string())?;
            worst = worst.max(r.abs());
        }
    }
    ensure(worst <= 1e-9, format!("max residual {worst:.2e} N·mm over {} feasible points", pts.len()))
}

fn grid_sweep(target: Target, a: Variable, b: Variable) -> Result<Table, String> {
    let spec = SweepSpec { variables: vec![a, b], target, fixed: Default::default() };
    run_sweep(&spec, &SweepBase::default()).map_err(|e| e.to_string())
}

/// Count of adjacent feasible pairs along the inner axis that break the
/// required ordering of `col`.
fn inner_violations(t: &Table, inner: usize, col: usize, increasing: bool, strict: bool) -> (usize, usize) {
    let (mut bad, mut pairs) = (0, 0);
    for row in 0..t.len() / inner {
        for j in 1..inner {
            let (a, b) = (&t.rows[row * inner + j - 1], &t.rows[row * inner + j]);
            if a.status != RowStatus::Ok || b.status != RowStatus::Ok {
                continue;
            }
            pairs += 1;
            let d = if increasing { b.values[col] - a.values[col] } else { a.values[col] - b.values[col] };
            if d < 0.0 || (strict && d == 0.0) {
                bad += 1;
            }
        }
    }
    (bad, pairs)
}

/// Same along the outer axis.
fn outer_violations(t: &Table, inner: usize, col: usize, increasing: bool) -> (usize, usize) {
    let (mut bad, mut pairs) = (0, 0);
    for i in inner..t.len() {
        let (a, b) = (&t.rows[i - inner], &t.rows[i]);
        if a.status != RowStatus::Ok || b.status != RowStatus::Ok {
            continue;
        }
        pairs += 1;
        let d = if increasing { b.values[col] - a.values[col] } else { a.values[col] - b.values[col] };
        if d <= 0.0 {
            bad += 1;
        }
    }
    (bad, pairs)
}

fn surface_trends() -> Check {
    let pinch = grid_sweep(
        Target::PinchForce,
        Variable::new("h2_mm", 0.0, 50.0, 51),
        Variable::new("theta1_deg", 0.0, 40.0, 41),
    )?;
    let (b1, n1) = inner_violations(&pinch, 41, 2, true, true);
    let (b2, n2) = outer_violations(&pinch, 41, 2, false);
    let env = grid_sweep(
        Target::EnvelopeForces,
        Variable::new("theta1_deg", 0.0, 40.0, 41),
        Variable::new("theta2_deg", 0.0, 50.0, 51),
    )?;
    let (b3, n3) = inner_violations(&env, 51, 2, true, true);
    let (b4, n4) = inner_violations(&env, 51, 3, false, true);
    ensure(
        b1 + b2 + b3 + b4 == 0 && n3 > 0,
        format!(
            "violations: F1 vs theta1 {b1}/{n1}, F1 vs h2 {b2}/{n2}, F2 vs theta2 {b3}/{n3}, F3 vs theta2 {b4}/{n4}"
        ),
    )
}

fn spring_surface() -> Check {
    let t = grid_sweep(
        Target::SpringAngle,
        Variable::new("theta1_deg", 0.0, 40.0, 41),
        Variable::new("theta2_deg", 0.0, 50.0, 51),
    )?;
    let (bad, pairs) = inner_violations(&t, 51, 2, true, false);
    let p = Finger::nominal();
    // law of cosines on the closed pair: sides 38, 38 around a 30 mm bar
    let oracle = ((38.0 * 38.0 + 38.0 * 38.0 - 30.0 * 30.0) / (2.0 * 38.0 * 38.0_f64)).acos();
    let formula = (1988.0_f64 / 2888.0).acos();
    let mut err = (oracle - formula).abs();
    for t1 in linspace(0.0, 40f64.to_radians(), 9) {
        err = err.max((rest_angle(&p, t1).map_err(|e| e.to_string())? - oracle).abs());
    }
    ensure(
        bad == 0 && err <= 1e-9,
        format!("alpha decreases at {bad}/{pairs} steps, |alpha0 - arccos(1988/2888)| = {err:.2e}"),
    )
}

fn five_point(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn jacobians() -> Check {
    let mut worst: f64 = 0.0;
    let mut checked = 0;

    let dims = Dims::nominal(30.0);
    for ta in linspace(0.0, std::f64::consts::TAU, 721) {
        let exact = five_point(|t| solve_position(&dims, t).d.x, ta, 1e-3);
        if exact.abs() < 1.0 {
            continue; // stationary points of x_D
        }
        worst = worst.max(rel(dxd_dtheta(&dims, ta), exact));
        checked += 1;
    }

    let p = Finger::nominal();
    // alpha has a square-root singularity at the stopper, so the reference
    // stencil needs a small step to stay accurate next to it
    let h = 1e-4;
    for t1 in linspace(0.0, 40f64.to_radians(), 21) {
        for t2 in linspace(0.0, 50f64.to_radians(), 26) {
            let near = |a: f64, b: f64| opening_angle(&p, a, b).ok();
            // skip points whose stencil leaves the evaluable set
            let stencil_ok = [-2.0, -1.0, 1.0, 2.0]
                .iter()
                .all(|k| near(t1 + k * h, t2).is_some() && near(t1, t2 + k * h).is_some());
            let Ok((s1, s2)) = sensitivities(&p, t1, t2) else { continue };
            if !stencil_ok {
                continue;
            }
            let e1 = five_point(|a| near(a, t2).unwrap(), t1, h);
            let e2 = five_point(|b| near(t1, b).unwrap(), t2, h);
            let scale = e1.abs().max(e2.abs());
            worst = worst.max((s1 - e1).abs() / scale).max((s2 - e2).abs() / scale);
            checked += 1;

            let state = FingerState::envelope(t1, t2).map_err(|e| e.to_string())?;
            let k = contact_kinematics(&p, &state);
            let g = |a: f64, b: f64| {
                let k = contact_kinematics(&p, &FingerState::envelope(a, b).unwrap());
                (k.g1, k.g2)
            };
            let col = |which: usize, wrt: usize| -> Point2<f64> {
                let pick = |a: f64, b: f64| if which == 1 { g(a, b).0 } else { g(a, b).1 };
                let fx = |x: f64| if wrt == 0 { pick(x, t2).x } else { pick(t1, x).x };
                let fy = |x: f64| if wrt == 0 { pick(x, t2).y } else { pick(t1, x).y };
                let x0 = if wrt == 0 { t1 } else { t2 };
                Point2::new(five_point(fx, x0, h), five_point(fy, x0, h))
            };
            for (which, jac) in [(1, k.dg1), (2, k.dg2)] {
                let scale = jac[0].norm().max(jac[1].norm());
                for (wrt, d) in jac.iter().enumerate() {
                    worst = worst.max((*d - col(which, wrt)).norm() / scale);
                }
            }
        }
    }
    ensure(worst <= 1e-4, format!("max relative error {worst:.2e} over {checked} points"))
}

fn mode_selection() -> Check {
    let cfg = HandConfig::default();
    let mut slowest = Duration::ZERO;
    let mut run = |obj: &Shape| {
        let start = Instant::now();
        let out = close_on_object(&cfg, obj).map(|o| o.mode);
        slowest = slowest.max(start.elapsed());
        out.map_err(|e| e.to_string())
    };
    let circle = run(&resting_circle(80.0).unwrap())?;
    let plate = run(&Shape::plate(Point2::new(0.0, 10.0), 20.0, 1.0).unwrap())?;
    let mut modes = Vec::new();
    for d in 10..=120 {
        modes.push((d, run(&resting_circle(d as f64).unwrap())?));
    }
    let flips = modes.windows(2).filter(|w| w[0].1 != w[1].1).count();
    let first_env = modes.iter().find(|(_, m)| *m == OutcomeMode::Envelope).map(|(d, _)| *d);
    let single = flips == 1 && modes[0].1 == OutcomeMode::Pinch && modes.last().unwrap().1 == OutcomeMode::Envelope;
    ensure(
        circle == OutcomeMode::Envelope && plate == OutcomeMode::Pinch && single && slowest < Duration::from_secs(5),
        format!(
            "d=80 {circle:?}, plate {plate:?}, threshold at {first_env:?} mm with {flips} flip(s), slowest run {:.0} ms",
            slowest.as_secs_f64() * 1e3
        ),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Check {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = work.path().join("hoecken.json");
    fs::write(&cfg, r#"{"hand": {"record_trajectory": true}, "objects": ["circle:80", "plate:1", "circle:70:-20,35"]}"#)
        .map_err(|e| e.to_string())?;
    let cmds: [&[&str]; 5] = [
        &["trace"],
        &["pinch", "--format", "csv+svg"],
        &["envelope", "--format", "csv+svg"],
        &["simulate"],
        &["synth"],
    ];
    let mut files = 0;
    for cmd in cmds {
        let mut runs = Vec::new();
        for run in ["a", "b"] {
            let out = work.path().join(format!("{}_{run}", cmd[0]));
            let mut args = cmd.to_vec();
            let out_s = out.to_string_lossy().into_owned();
            args.extend(["--config", "hoecken.json", "--out", &out_s]);
            let (o, _) = hoecken(&args, work.path());
            if !o.status.success() {
                return Err(format!("{} failed: {}", cmd[0], String::from_utf8_lossy(&o.stderr)));
            }
            let stdout = String::from_utf8_lossy(&o.stdout).replace(&out_s, "OUT");
            runs.push((snapshot(&out), stdout));
        }
        if runs[0] != runs[1] {
            return Err(format!("{} output differs between runs", cmd[0]));
        }
        files += runs[0].0.len();
    }
    Ok(format!("5 subcommands, {files} files byte-identical across runs"))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 9] = [
        ("straight-line deviation", straight_line_deviation),
        ("zero-spring envelope limit", zero_spring_limit),
        ("closed-form vs matrix forces", closed_form_vs_matrix),
        ("virtual-work residual", virtual_work),
        ("surface trends", surface_trends),
        ("spring-angle surface", spring_surface),
        ("jacobian consistency", jacobians),
        ("mode selection", mode_selection),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(msg) => println!("PASS {}. {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {}. {name}: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
