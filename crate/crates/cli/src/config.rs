//! JSON run configuration. Angles are in degrees and lengths in mm.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use hoecken_core::force::PinchModel;
use hoecken_core::grasp::HandConfig;
use hoecken_core::sweep::{constant_surface_model, SweepBase};
use hoecken_core::synth::SynthesisSpec;
use hoecken_core::{Dims, Finger, Point};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::object::parse_object;

pub const DEFAULTS_JSON: &str = include_str!("../defaults.json");
pub const CONFIG_FILE: &str = "hoecken.json";
pub const SEED_DIR_VAR: &str = "HOECKEN_SEED_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Free text, ignored.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub stage: StageConfig,
    pub finger: FingerConfig,
    pub spring: SpringConfig,
    pub trace: TraceConfig,
    pub pinch: PinchConfig,
    pub envelope: EnvelopeConfig,
    pub hand: HandSection,
    /// Objects for `simulate`, as `KIND:DIM[:X,Y]`.
    pub objects: Vec<String>,
    pub synthesis: SynthesisConfig,
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct StageConfig {
    pub l_mm: f64,
    pub l_ac_mm: f64,
    pub l_bd_mm: f64,
    /// Required straight-line travel of `D`, in crank lengths.
    pub min_travel_units: f64,
    /// Samples per crank turn for the flattest-window search.
    pub window_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct FingerConfig {
    pub ah_mm: f64,
    pub bh_mm: f64,
    pub ab0_mm: f64,
    pub e_mm: [f64; 2],
    pub l1_mm: f64,
    pub h1_mm: f64,
    pub h2_env_mm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SpringConfig {
    pub k_d_nmm_per_rad: f64,
    pub tau1_nmm: f64,
    pub preload_nmm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct TraceConfig {
    pub range_deg: [f64; 2],
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum PinchModelKind {
    Auto,
    ConstantR,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct PinchConfig {
    pub tau_a_nmm: f64,
    pub model: PinchModelKind,
    /// Defaults to `|dx_D/dθ_A|` at 270°.
    pub j_x_mm_per_rad: Option<f64>,
    /// Defaults to `l1`.
    pub r_eq_mm: Option<f64>,
    /// Crank angle for the `auto` model.
    pub theta_a_deg: f64,
    pub h2_mm: [f64; 2],
    pub theta1_deg: [f64; 2],
    /// Grid size as `[h2 count, theta1 count]`.
    pub grid: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct EnvelopeConfig {
    pub theta1_deg: [f64; 2],
    pub theta2_deg: [f64; 2],
    /// Grid size as `[theta1 count, theta2 count]`.
    pub grid: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct HandSection {
    pub span_mm: f64,
    pub step_deg: f64,
    pub symmetric: bool,
    pub distal_length_mm: f64,
    pub tip_clearance_mm: f64,
    pub tau_a_nmm: f64,
    pub pinch_model: PinchModelKind,
    pub record_trajectory: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisConfig {
    pub lac_bounds: [f64; 2],
    pub lbd_bounds: [f64; 2],
    pub budget: usize,
    pub x_tol: f64,
    pub f_tol: f64,
}

impl Default for StageConfig {
    fn default() -> Self {
        Self { l_mm: 30.0, l_ac_mm: 45.0, l_bd_mm: 180.0, min_travel_units: 5.18, window_samples: 3600 }
    }
}

impl Default for FingerConfig {
    fn default() -> Self {
        Self { ah_mm: 38.0, bh_mm: 38.0, ab0_mm: 30.0, e_mm: [-30.0, 0.0], l1_mm: 180.0, h1_mm: 150.0, h2_env_mm: 40.0 }
    }
}

impl Default for SpringConfig {
    fn default() -> Self {
        Self { k_d_nmm_per_rad: 800.0, tau1_nmm: 400.0, preload_nmm: 0.0 }
    }
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { range_deg: [0.0, 360.0], samples: 3601 }
    }
}

impl Default for PinchConfig {
    fn default() -> Self {
        Self {
            tau_a_nmm: 400.0,
            model: PinchModelKind::ConstantR,
            j_x_mm_per_rad: None,
            r_eq_mm: None,
            theta_a_deg: 270.0,
            h2_mm: [0.0, 50.0],
            theta1_deg: [0.0, 40.0],
            grid: [51, 41],
        }
    }
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { theta1_deg: [0.0, 40.0], theta2_deg: [0.0, 50.0], grid: [41, 51] }
    }
}

impl Default for HandSection {
    fn default() -> Self {
        Self {
            span_mm: 200.0,
            step_deg: 0.25,
            symmetric: true,
            distal_length_mm: 25.0,
            tip_clearance_mm: 2.0,
            tau_a_nmm: 400.0,
            pinch_model: PinchModelKind::Auto,
            record_trajectory: false,
        }
    }
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        let s = SynthesisSpec::default();
        Self {
            lac_bounds: [s.ac_bounds.0, s.ac_bounds.1],
            lbd_bounds: [s.bd_bounds.0, s.bd_bounds.1],
            budget: s.budget,
            x_tol: s.x_tol,
            f_tol: s.f_tol,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            comment: None,
            stage: StageConfig::default(),
            finger: FingerConfig::default(),
            spring: SpringConfig::default(),
            trace: TraceConfig::default(),
            pinch: PinchConfig::default(),
            envelope: EnvelopeConfig::default(),
            hand: HandSection::default(),
            objects: vec!["circle:80".into(), "plate:1".into()],
            synthesis: SynthesisConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Where the configuration came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    File(PathBuf),
    Builtin,
}

/// Config file to use: `--config`, then `$HOECKEN_SEED_DIR/hoecken.json`,
/// then `./hoecken.json`, then the built-in defaults.
pub fn locate(explicit: Option<&Path>) -> anyhow::Result<Source> {
    if let Some(p) = explicit {
        return Ok(Source::File(p.to_path_buf()));
    }
    if let Some(dir) = std::env::var_os(SEED_DIR_VAR) {
        let p = Path::new(&dir).join(CONFIG_FILE);
        if !p.is_file() {
            bail!("{SEED_DIR_VAR} is set but {} does not exist", p.display());
        }
        return Ok(Source::File(p));
    }
    let local = Path::new(CONFIG_FILE);
    Ok(if local.is_file() { Source::File(local.to_path_buf()) } else { Source::Builtin })
}

pub fn parse(text: &str) -> anyhow::Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow::anyhow!("at `{path}`: {}", e.inner())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(source: &Source) -> anyhow::Result<RunConfig> {
    match source {
        Source::File(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse(&text).with_context(|| format!("in {}", p.display()))
        }
        Source::Builtin => parse(DEFAULTS_JSON).context("in built-in defaults"),
    }
}

fn range(name: &str, r: [f64; 2]) -> anyhow::Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
        bail!("`{name}` must be a finite [min, max] with min <= max");
    }
    Ok(())
}

fn grid(name: &str, g: [usize; 2]) -> anyhow::Result<()> {
    if g[0] < 2 || g[1] < 2 {
        bail!("`{name}` needs at least 2 points per axis");
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        self.finger_params().context("`stage`/`finger`/`spring`")?;
        self.hand_config()?.validate().context("`hand`")?;
        range("trace.range_deg", self.trace.range_deg)?;
        if self.trace.samples < 2 {
            bail!("`trace.samples` must be at least 2");
        }
        range("pinch.h2_mm", self.pinch.h2_mm)?;
        range("pinch.theta1_deg", self.pinch.theta1_deg)?;
        grid("pinch.grid", self.pinch.grid)?;
        if !(self.pinch.tau_a_nmm > 0.0) {
            bail!("`pinch.tau_a_nmm` must be positive");
        }
        range("envelope.theta1_deg", self.envelope.theta1_deg)?;
        range("envelope.theta2_deg", self.envelope.theta2_deg)?;
        grid("envelope.grid", self.envelope.grid)?;
        for (i, o) in self.objects.iter().enumerate() {
            parse_object(o).with_context(|| format!("`objects[{i}]`"))?;
        }
        self.synthesis_spec().validate().context("`synthesis`")?;
        Ok(())
    }

    pub fn dims(&self) -> hoecken_core::Result<Dims> {
        Dims::new(self.stage.l_mm, self.stage.l_ac_mm, self.stage.l_bd_mm)
    }

    pub fn finger_params(&self) -> hoecken_core::Result<Finger> {
        let f = &self.finger;
        let p = Finger {
            ah: f.ah_mm,
            bh: f.bh_mm,
            ab0: f.ab0_mm,
            ef: f.ab0_mm,
            e: Point::new(f.e_mm[0], f.e_mm[1]),
            l1: f.l1_mm,
            h1: f.h1_mm,
            h2_env: f.h2_env_mm,
            k_d: self.spring.k_d_nmm_per_rad,
            tau1: self.spring.tau1_nmm,
            preload: self.spring.preload_nmm,
            hoecken: self.dims()?,
        };
        p.validate()?;
        Ok(p)
    }

    fn pinch_model(&self, kind: PinchModelKind, finger: &Finger) -> PinchModel<f64> {
        match kind {
            PinchModelKind::Auto => PinchModel::Auto,
            PinchModelKind::ConstantR => match constant_surface_model(finger) {
                PinchModel::ConstantR { j_x, r_eq } => PinchModel::ConstantR {
                    j_x: self.pinch.j_x_mm_per_rad.unwrap_or(j_x),
                    r_eq: self.pinch.r_eq_mm.unwrap_or(r_eq),
                },
                auto => auto,
            },
        }
    }

    pub fn hand_config(&self) -> anyhow::Result<HandConfig> {
        let finger = self.finger_params()?;
        let h = &self.hand;
        Ok(HandConfig {
            finger,
            span: h.span_mm,
            step: h.step_deg.to_radians(),
            symmetric: h.symmetric,
            distal_length: h.distal_length_mm,
            tip_clearance: h.tip_clearance_mm,
            tau_a: h.tau_a_nmm,
            pinch_model: self.pinch_model(h.pinch_model, &finger),
            min_travel_units: self.stage.min_travel_units,
            window_samples: self.stage.window_samples,
            record_trajectory: h.record_trajectory,
        })
    }

    pub fn sweep_base(&self) -> anyhow::Result<SweepBase> {
        let finger = self.finger_params()?;
        Ok(SweepBase {
            finger,
            tau_a: self.pinch.tau_a_nmm,
            theta_a: self.pinch.theta_a_deg.to_radians(),
            pinch_model: self.pinch_model(self.pinch.model, &finger),
            min_travel_units: self.stage.min_travel_units,
            window_samples: self.stage.window_samples,
        })
    }

    pub fn synthesis_spec(&self) -> SynthesisSpec {
        let s = &self.synthesis;
        SynthesisSpec {
            l: self.stage.l_mm,
            ac_bounds: (s.lac_bounds[0], s.lac_bounds[1]),
            bd_bounds: (s.lbd_bounds[0], s.lbd_bounds[1]),
            min_travel_units: self.stage.min_travel_units,
            samples: self.stage.window_samples,
            budget: s.budget,
            x_tol: s.x_tol,
            f_tol: s.f_tol,
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded. The output directory
    /// does not affect results and is left out.
    pub fn hash(&self) -> String {
        let mut cfg = self.clone();
        cfg.output_dir = PathBuf::new();
        let canonical = serde_json::to_string(&cfg).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn schema() -> String {
    let schema = schemars::schema_for!(RunConfig);
    serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_match_code_defaults() {
        let shipped = parse(DEFAULTS_JSON).unwrap();
        let code = RunConfig { comment: shipped.comment.clone(), ..RunConfig::default() };
        assert_eq!(shipped, code);
    }

    #[test]
    fn shipped_schema_is_current() {
        let shipped = include_str!("../config.schema.json");
        assert_eq!(shipped, schema(), "regenerate with `hoecken schema > crates/cli/config.schema.json`");
    }

    #[test]
    fn empty_object_is_the_default() {
        assert_eq!(parse("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse(r#"{"finger": {"ah_mm": 38, "bogus": 1}}"#).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("bogus") && msg.contains("finger"), "{msg}");
    }

    #[test]
    fn wrong_type_is_located() {
        let err = parse(r#"{"spring": {"k_d_nmm_per_rad": "stiff"}}"#).unwrap_err();
        assert!(format!("{err:#}").contains("spring.k_d_nmm_per_rad"));
    }

    #[test]
    fn invariants_checked_at_load() {
        assert!(parse(r#"{"stage": {"l_bd_mm": 50}}"#).is_err());
        assert!(parse(r#"{"hand": {"span_mm": 250}}"#).is_err());
        assert!(parse(r#"{"objects": ["cube:3"]}"#).is_err());
        assert!(parse(r#"{"pinch": {"grid": [1, 5]}}"#).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.hand.span_mm = 150.0;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
