//! Dimensional synthesis of the straight-line stage.
//!
//! A bounded Nelder–Mead search over `(l_AC/l, l_BD/l)` that minimises the
//! vertical band of the flattest window. Trial points are projected onto the
//! bounds; ratios that do not form a valid stage score `+inf`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hoecken::{flattest_segment, trace_path, HoeckenDims, NOMINAL_AC_RATIO, NOMINAL_BD_RATIO};
use crate::table::{RowStatus, Table};

/// Vertical band of the flattest window, in crank lengths.
pub fn deviation_units(l: f64, ac_ratio: f64, bd_ratio: f64, min_travel_units: f64, samples: usize) -> Result<f64> {
    let dims = HoeckenDims::from_ratios(l, ac_ratio, bd_ratio)?;
    let trace = trace_path(&dims, 0.0, std::f64::consts::TAU, samples + 1)?;
    Ok(flattest_segment(&trace, min_travel_units * l)?.max_dev / l)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub l: f64,
    pub ac_bounds: (f64, f64),
    pub bd_bounds: (f64, f64),
    pub min_travel_units: f64,
    pub samples: usize,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    /// Stop once the simplex spans less than this in both ratios.
    pub x_tol: f64,
    /// ... and its objective values differ by less than this.
    pub f_tol: f64,
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        Self {
            l: 30.0,
            ac_bounds: (1.2, 2.0),
            bd_bounds: (4.5, 8.0),
            min_travel_units: 5.18,
            samples: 3600,
            budget: 120,
            x_tol: 1e-6,
            f_tol: 1e-9,
        }
    }
}

impl SynthesisSpec {
    pub fn start(&self) -> [f64; 2] {
        [NOMINAL_AC_RATIO, NOMINAL_BD_RATIO]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        let [ac, bd] = self.start();
        for (name, (lo, hi), x0) in [("lAC", self.ac_bounds, ac), ("lBD", self.bd_bounds, bd)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= x0 && x0 <= hi) {
                return bad(format!("{name} bounds [{lo}, {hi}] must contain {x0}"));
            }
        }
        if self.budget < 20 {
            return bad(format!("budget {} is below 20 evaluations", self.budget));
        }
        if !(self.l > 0.0 && self.min_travel_units > 0.0) || self.samples < 360 {
            return bad("synthesis needs l > 0, min_travel_units > 0 and samples >= 360".into());
        }
        if !(self.x_tol >= 0.0 && self.f_tol >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        Ok(())
    }

    fn project(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0].clamp(self.ac_bounds.0, self.ac_bounds.1), x[1].clamp(self.bd_bounds.0, self.bd_bounds.1)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynthesisStatus {
    Converged,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub ac_ratio: f64,
    pub bd_ratio: f64,
    /// `+inf` for infeasible ratios.
    pub deviation: f64,
    /// Best deviation seen up to and including this evaluation.
    pub incumbent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub ac_ratio: f64,
    pub bd_ratio: f64,
    pub deviation: f64,
    pub status: SynthesisStatus,
    pub log: Vec<Evaluation>,
}

impl SynthesisResult {
    /// Log as `eval_idx, lAC_ratio, lBD_ratio, deviation_units, status`.
    pub fn log_table(&self) -> Table {
        let mut t = Table::new(["eval_idx", "lAC_ratio", "lBD_ratio", "deviation_units"]);
        for (i, e) in self.log.iter().enumerate() {
            let status = if e.deviation.is_finite() { RowStatus::Ok } else { RowStatus::Infeasible };
            t.push(vec![i as f64, e.ac_ratio, e.bd_ratio, e.deviation], status);
        }
        t
    }
}

struct Counter<'a> {
    spec: &'a SynthesisSpec,
    log: Vec<Evaluation>,
    best: f64,
}

impl Counter<'_> {
    fn exhausted(&self) -> bool {
        self.log.len() >= self.spec.budget
    }

    fn eval(&mut self, x: [f64; 2]) -> f64 {
        let s = self.spec;
        let f = deviation_units(s.l, x[0], x[1], s.min_travel_units, s.samples).unwrap_or(f64::INFINITY);
        self.best = self.best.min(f);
        self.log.push(Evaluation { ac_ratio: x[0], bd_ratio: x[1], deviation: f, incumbent: self.best });
        f
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Minimise the deviation from the nominal ratios. The initial simplex steps
/// each ratio by +5% (−5% when that leaves the bounds); no randomness is used.
pub fn synthesize(spec: &SynthesisSpec) -> Result<SynthesisResult> {
    spec.validate()?;
    let mut c = Counter { spec, log: Vec::new(), best: f64::INFINITY };
    let x0 = spec.start();
    let f0 = c.eval(x0);
    if !f0.is_finite() {
        return Err(Error::InvalidInput("starting ratios are infeasible".into()));
    }
    let mut simplex: Vec<([f64; 2], f64)> = vec![(x0, f0)];
    for k in 0..2 {
        let (lo, hi) = if k == 0 { spec.ac_bounds } else { spec.bd_bounds };
        let mut x = x0;
        let up = x0[k] * 1.05;
        x[k] = if up <= hi { up } else { (x0[k] * 0.95).max(lo) };
        let f = c.eval(x);
        simplex.push((x, f));
    }

    let status = loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0], simplex[2]);
        let spread_x = simplex[1..]
            .iter()
            .map(|(x, _)| (x[0] - best.0[0]).abs().max((x[1] - best.0[1]).abs()))
            .fold(0.0, f64::max);
        let spread_f = worst.1 - best.1;
        if spread_x <= spec.x_tol && (spread_f <= spec.f_tol || spread_x == 0.0) {
            break SynthesisStatus::Converged;
        }
        if c.exhausted() {
            break SynthesisStatus::BudgetExhausted;
        }
        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let xr = spec.project(lerp(centroid, worst.0, -1.0));
        let fr = c.eval(xr);
        if fr < best.1 {
            if c.exhausted() {
                simplex[2] = (xr, fr);
                continue;
            }
            let xe = spec.project(lerp(centroid, worst.0, -2.0));
            let fe = c.eval(xe);
            simplex[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (xr, fr);
        } else {
            if c.exhausted() {
                continue;
            }
            let xc = if fr < worst.1 { lerp(centroid, xr, 0.5) } else { lerp(centroid, worst.0, 0.5) };
            let fc = c.eval(xc);
            if fc < worst.1.min(fr) {
                simplex[2] = (xc, fc);
            } else {
                for v in simplex.iter_mut().skip(1) {
                    if c.exhausted() {
                        break;
                    }
                    let x = lerp(best.0, v.0, 0.5);
                    *v = (x, c.eval(x));
                }
            }
        }
    };

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex[0];
    Ok(SynthesisResult { ac_ratio: x[0], bd_ratio: x[1], deviation: f, status, log: c.log })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pinned() -> SynthesisSpec {
        SynthesisSpec { ac_bounds: (1.5, 1.5), bd_bounds: (6.0, 6.0), ..SynthesisSpec::default() }
    }

    #[test]
    fn pinned_bounds_return_the_nominal_design() {
        let r = synthesize(&pinned()).unwrap();
        assert_eq!((r.ac_ratio, r.bd_ratio), (1.5, 6.0));
        assert!((r.deviation - 0.0164).abs() < 5e-4, "{}", r.deviation);
        assert_eq!(r.status, SynthesisStatus::Converged);
    }

    #[test]
    fn widened_bounds_never_worsen() {
        let r = synthesize(&SynthesisSpec::default()).unwrap();
        let start = r.log[0].deviation;
        assert!(r.deviation <= start);
        assert!(r.log.windows(2).all(|w| w[1].incumbent <= w[0].incumbent));
        assert!(r.log.len() <= SynthesisSpec::default().budget);
    }

    #[test]
    fn small_budget_reports_incumbent() {
        let spec = SynthesisSpec {
            ac_bounds: (1.45, 1.55),
            bd_bounds: (5.9, 6.1),
            budget: 20,
            ..SynthesisSpec::default()
        };
        let r = synthesize(&spec).unwrap();
        assert_eq!(r.status, SynthesisStatus::BudgetExhausted);
        assert_eq!(r.log.len(), 20);
        assert_eq!(r.deviation, r.log.last().unwrap().incumbent);
    }

    #[test]
    fn rejects_bad_specs() {
        let spec = SynthesisSpec { budget: 19, ..SynthesisSpec::default() };
        assert!(synthesize(&spec).is_err());
        let spec = SynthesisSpec { ac_bounds: (1.6, 2.0), ..SynthesisSpec::default() };
        assert!(synthesize(&spec).is_err());
    }

    #[test]
    fn log_table_columns() {
        let r = synthesize(&pinned()).unwrap();
        let t = r.log_table();
        assert_eq!(t.columns, ["eval_idx", "lAC_ratio", "lBD_ratio", "deviation_units"]);
        assert_eq!(t.len(), r.log.len());
    }
}
