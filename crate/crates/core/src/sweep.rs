//! Full-factorial parameter sweeps over the force, spring and stage models.
//!
//! Swept and fixed values use the units of the output columns: degrees for
//! angles, millimetres for lengths. Rows are ordered row-major over the
//! variables in their declared order, and infeasible grid points are kept
//! with an `INFEASIBLE` status and `NaN` outputs.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finger::FingerParams;
use crate::force::{envelope_forces, pinch_contact_force, PinchForceInput, PinchModel};
use crate::hoecken::{dxd_dtheta, HoeckenDims};
use crate::spring::spring_state;
use crate::synth::deviation_units;
use crate::table::{RowStatus, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `h2_mm, theta1_deg, F1_N`
    PinchForce,
    /// `theta1_deg, theta2_deg, alpha_deg, tau_d_Nmm, s1, s2`
    SpringAngle,
    /// `theta1_deg, theta2_deg, F2_N, F3_N`
    EnvelopeForces,
    /// `lAC_ratio, lBD_ratio, deviation_units`
    Deviation,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Target::PinchForce => "pinch_force",
            Target::SpringAngle => "spring_angle",
            Target::EnvelopeForces => "envelope_forces",
            Target::Deviation => "deviation",
        };
        f.write_str(s)
    }
}

impl Target {
    /// Grid inputs, in output column order.
    pub fn inputs(self) -> &'static [&'static str] {
        match self {
            Target::PinchForce => &["h2_mm", "theta1_deg"],
            Target::SpringAngle | Target::EnvelopeForces => &["theta1_deg", "theta2_deg"],
            Target::Deviation => &["lAC_ratio", "lBD_ratio"],
        }
    }

    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Target::PinchForce => &["F1_N"],
            Target::SpringAngle => &["alpha_deg", "tau_d_Nmm", "s1", "s2"],
            Target::EnvelopeForces => &["F2_N", "F3_N"],
            Target::Deviation => &["deviation_units"],
        }
    }

    pub fn columns(self) -> Vec<&'static str> {
        self.inputs().iter().chain(self.outputs()).copied().collect()
    }

    /// Model parameters that can be fixed for this target.
    fn parameters(self) -> &'static [&'static str] {
        const FINGER: &[&str] = &["ah", "bh", "ab0", "l1", "h1", "h2_env", "k_d", "tau1", "preload"];
        match self {
            Target::PinchForce => &["l", "l1", "tau_a", "theta_a_deg", "j_x", "r_eq"],
            Target::SpringAngle | Target::EnvelopeForces => FINGER,
            Target::Deviation => &["l", "min_travel_units", "samples"],
        }
    }
}

const ALL_TARGETS: [Target; 4] =
    [Target::PinchForce, Target::SpringAngle, Target::EnvelopeForces, Target::Deviation];

fn is_known(name: &str) -> bool {
    ALL_TARGETS.iter().any(|t| t.inputs().contains(&name) || t.parameters().contains(&name))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, min: f64, max: f64, count: usize) -> Self {
        Self { name: name.into(), min, max, count }
    }

    /// Evenly spaced values, ending exactly at `max`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| if i + 1 == n { self.max } else { self.min + (self.max - self.min) * i as f64 / (n - 1) as f64 })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variables: Vec<Variable>,
    pub target: Target,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
}

/// Model defaults that fixed overrides are applied to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepBase {
    pub finger: FingerParams<f64>,
    /// Motor torque for the pinch surface (N·mm).
    pub tau_a: f64,
    /// Crank angle used by [`PinchModel::Auto`].
    pub theta_a: f64,
    pub pinch_model: PinchModel<f64>,
    pub min_travel_units: f64,
    pub window_samples: usize,
}

impl Default for SweepBase {
    fn default() -> Self {
        let finger = FingerParams::nominal();
        Self {
            finger,
            tau_a: 400.0,
            theta_a: 1.5 * std::f64::consts::PI,
            pinch_model: constant_surface_model(&finger),
            min_travel_units: 5.18,
            window_samples: 3600,
        }
    }
}

/// Constant-coefficient pinch model: `J_x` is the stage Jacobian at the
/// middle of the straight stroke and `r_eq = l1`.
pub fn constant_surface_model(finger: &FingerParams<f64>) -> PinchModel<f64> {
    let j_x = dxd_dtheta(&finger.hoecken, 1.5 * std::f64::consts::PI).abs();
    PinchModel::ConstantR { j_x, r_eq: finger.l1 }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let target = self.target;
        let mismatch = |v: &str| Error::TargetMismatch { variable: v.into(), target: target.to_string() };
        if self.variables.is_empty() || self.variables.len() > 2 {
            return Err(Error::InvalidInput(format!(
                "{target} sweeps take one or two variables, got {}",
                self.variables.len()
            )));
        }
        for (i, v) in self.variables.iter().enumerate() {
            if !target.inputs().contains(&v.name.as_str()) {
                return Err(if is_known(&v.name) { mismatch(&v.name) } else { Error::UnknownVariable(v.name.clone()) });
            }
            if self.variables[..i].iter().any(|u| u.name == v.name) {
                return Err(Error::InvalidInput(format!("variable `{}` swept twice", v.name)));
            }
            if v.count < 2 {
                return Err(Error::InvalidInput(format!("variable `{}` needs count >= 2", v.name)));
            }
            if !(v.min.is_finite() && v.max.is_finite()) || v.min > v.max {
                return Err(Error::InvalidInput(format!("variable `{}` has an empty range", v.name)));
            }
        }
        for (name, value) in &self.fixed {
            let as_input = target.inputs().contains(&name.as_str());
            if !as_input && !target.parameters().contains(&name.as_str()) {
                return Err(if is_known(name) { mismatch(name) } else { Error::UnknownVariable(name.clone()) });
            }
            if as_input && self.variables.iter().any(|v| &v.name == name) {
                return Err(Error::InvalidInput(format!("`{name}` is both swept and fixed")));
            }
            if !value.is_finite() {
                return Err(Error::InvalidInput(format!("fixed `{name}` is not finite")));
            }
        }
        for input in target.inputs() {
            let given = self.variables.iter().any(|v| v.name == *input) || self.fixed.contains_key(*input);
            if !given && target != Target::Deviation {
                return Err(Error::InvalidInput(format!("{target} needs `{input}` swept or fixed")));
            }
        }
        Ok(())
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.variables.iter().map(|v| v.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parameters after the fixed overrides.
#[derive(Clone, Copy, Debug)]
struct Resolved {
    base: SweepBase,
    crank: f64,
}

fn resolve(base: &SweepBase, fixed: &BTreeMap<String, f64>) -> Result<Resolved> {
    let mut b = *base;
    let mut crank = b.finger.hoecken.l;
    let (mut j_x, mut r_eq) = (None, None);
    for (name, &v) in fixed {
        let f = &mut b.finger;
        match name.as_str() {
            "ah" => f.ah = v,
            "bh" => f.bh = v,
            "ab0" => {
                f.ab0 = v;
                f.ef = v;
            }
            "l1" => f.l1 = v,
            "h1" => f.h1 = v,
            "h2_env" => f.h2_env = v,
            "k_d" => f.k_d = v,
            "tau1" => f.tau1 = v,
            "preload" => f.preload = v,
            "tau_a" => b.tau_a = v,
            "theta_a_deg" => b.theta_a = v.to_radians(),
            "j_x" => j_x = Some(v),
            "r_eq" => r_eq = Some(v),
            "l" => crank = v,
            "min_travel_units" => b.min_travel_units = v,
            "samples" => {
                if !(v >= 2.0 && v.fract() == 0.0) {
                    return Err(Error::InvalidInput(format!("samples must be an integer >= 2, got {v}")));
                }
                b.window_samples = v as usize;
            }
            _ => {}
        }
    }
    if crank != b.finger.hoecken.l {
        let d = b.finger.hoecken;
        b.finger.hoecken = HoeckenDims::from_ratios(crank, d.ac_ratio(), d.bd_ratio())?;
    }
    if j_x.is_some() || r_eq.is_some() {
        let (j0, r0) = match constant_surface_model(&b.finger) {
            PinchModel::ConstantR { j_x, r_eq } => (j_x, r_eq),
            PinchModel::Auto => unreachable!(),
        };
        let (j1, r1) = match b.pinch_model {
            PinchModel::ConstantR { j_x, r_eq } => (j_x, r_eq),
            PinchModel::Auto => (j0, r0),
        };
        b.pinch_model = PinchModel::ConstantR { j_x: j_x.unwrap_or(j1), r_eq: r_eq.unwrap_or(r1) };
    }
    b.finger.validate()?;
    Ok(Resolved { base: b, crank })
}

/// Evaluate one grid point; `inputs` are in the target's column order.
fn evaluate(target: Target, r: &Resolved, inputs: &[f64]) -> Result<Vec<f64>> {
    let p = &r.base.finger;
    let out = match target {
        Target::PinchForce => {
            let input = PinchForceInput {
                tau_a: r.base.tau_a,
                theta_a: r.base.theta_a,
                theta1: inputs[1].to_radians(),
                h2_pinch: inputs[0],
                model: r.base.pinch_model,
            };
            vec![pinch_contact_force(&p.hoecken, p.l1, &input)?]
        }
        Target::SpringAngle => {
            let s = spring_state(p, inputs[0].to_radians(), inputs[1].to_radians())?;
            vec![s.alpha.to_degrees(), s.tau_d, s.s1, s.s2]
        }
        Target::EnvelopeForces => {
            let f = envelope_forces(p, inputs[0].to_radians(), inputs[1].to_radians())?;
            vec![f.f2, f.f3]
        }
        Target::Deviation => {
            vec![deviation_units(r.crank, inputs[0], inputs[1], r.base.min_travel_units, r.base.window_samples)?]
        }
    };
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::InvalidInput("non-finite output".into()))
    }
}

/// Run a sweep. Grid points are evaluated in parallel and assembled in
/// row-major order, so the table does not depend on the thread count.
pub fn run_sweep(spec: &SweepSpec, base: &SweepBase) -> Result<Table> {
    spec.validate()?;
    let r = resolve(base, &spec.fixed)?;
    let target = spec.target;
    let axes: Vec<Vec<f64>> = spec.variables.iter().map(Variable::values).collect();
    let nominal = r.base.finger.hoecken;
    // column slot of every swept variable, and the fixed value of every input
    let slots: Vec<usize> = spec
        .variables
        .iter()
        .map(|v| target.inputs().iter().position(|n| *n == v.name).expect("validated"))
        .collect();
    let defaults: Vec<f64> = target
        .inputs()
        .iter()
        .map(|n| match spec.fixed.get(*n) {
            Some(v) => *v,
            None if *n == "lAC_ratio" => nominal.ac_ratio(),
            None if *n == "lBD_ratio" => nominal.bd_ratio(),
            None => f64::NAN,
        })
        .collect();

    let total = spec.len();
    let rows: Vec<(Vec<f64>, RowStatus)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut inputs = defaults.clone();
            let mut rem = idx;
            for (axis, slot) in axes.iter().zip(&slots).rev() {
                inputs[*slot] = axis[rem % axis.len()];
                rem /= axis.len();
            }
            let n_out = target.outputs().len();
            let (outputs, status) = match evaluate(target, &r, &inputs) {
                Ok(o) => (o, RowStatus::Ok),
                Err(_) => (vec![f64::NAN; n_out], RowStatus::Infeasible),
            };
            inputs.extend(outputs);
            (inputs, status)
        })
        .collect();

    let mut table = Table::new(target.columns());
    for (values, status) in rows {
        table.push(values, status);
    }
    Ok(table)
}

/// `F1/τ_A` companion of a pinch force table (1/mm).
pub fn normalize_pinch(table: &Table, tau_a: f64) -> Table {
    let mut out = Table::new(["h2_mm", "theta1_deg", "F1_per_tau_A"]);
    for row in &table.rows {
        out.push(vec![row.values[0], row.values[1], row.values[2] / tau_a], row.status);
    }
    out
}
