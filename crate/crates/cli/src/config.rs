//! Resolved run configuration: parseable from a TOML file, overridable by
//! command-line flags, and echoed verbatim into every output header so a run
//! can be reproduced bit-for-bit from its own metadata.

use anyhow::{bail, Context};
use nvgeom::analytic::PhysicalParams;
use nvgeom::mc::{McConfig, NvLayer};
use nvgeom::{magic_angle, SampleShape, SensorFrame};
use serde::{Deserialize, Serialize};

/// NV-axis angle: explicit degrees or the exact <100>-cut magic angle
/// (`atan(sqrt 2)`), which avoids the usual 54.74-degree rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Degrees(f64),
    Named(String),
}

impl GammaSpec {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        if text.eq_ignore_ascii_case("magic") {
            Ok(GammaSpec::Named("magic".into()))
        } else {
            let deg: f64 = text.parse().with_context(|| format!("bad gamma value {text:?}"))?;
            Ok(GammaSpec::Degrees(deg))
        }
    }

    pub fn radians(&self) -> anyhow::Result<f64> {
        match self {
            GammaSpec::Degrees(d) => Ok(d.to_radians()),
            GammaSpec::Named(name) if name.eq_ignore_ascii_case("magic") => Ok(magic_angle()),
            GammaSpec::Named(other) => bail!("unknown gamma name {other:?}; expected \"magic\""),
        }
    }
}

impl Default for GammaSpec {
    fn default() -> Self {
        GammaSpec::Named("magic".into())
    }
}

/// Unit of the lengths in the config (d_nv and all shape lengths share it).
/// The geometry factor is computed in natural units (lengths divided by
/// d_nv), so the unit affects only documentation, never any G column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    #[default]
    Natural,
    Nm,
    Um,
    Mm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameSection {
    pub gamma: GammaSpec,
    pub d_nv: f64,
    pub d_nv_unit: LengthUnit,
}

impl Default for FrameSection {
    fn default() -> Self {
        FrameSection { gamma: GammaSpec::default(), d_nv: 1.0, d_nv_unit: LengthUnit::Natural }
    }
}

impl FrameSection {
    /// Frame in natural units (d_nv = 1); shape lengths are divided by d_nv
    /// separately so that G never depends on the unit chosen.
    pub fn sensor_frame(&self) -> anyhow::Result<SensorFrame> {
        if !(self.d_nv.is_finite() && self.d_nv > 0.0) {
            bail!("d_nv must be > 0, got {}", self.d_nv);
        }
        SensorFrame::new(self.gamma.radians()?, 1.0).map_err(Into::into)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub n: u64,
    pub m: u64,
    pub k: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSection>,
}

impl Default for McSection {
    fn default() -> Self {
        McSection { n: 1_000_000, m: 1, k: 16, seed: 1, r_min: None, ensemble: None }
    }
}

/// NV-layer section; lengths in units of d_nv.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub radius: f64,
    pub height: f64,
    pub min_depth: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection { radius: 1.0, height: 1.0, min_depth: 0.01 }
    }
}

impl McSection {
    pub fn mc_config(&self) -> McConfig {
        McConfig {
            n_sample_points: self.n,
            n_nv_points: if self.ensemble.is_some() { self.m } else { 1 },
            n_repetitions: self.k,
            seed: self.seed,
            ensemble: self
                .ensemble
                .map(|e| NvLayer::new(e.radius, e.height, e.min_depth)),
            r_min: self.r_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Swept values of the shape's primary radius, in units of d_nv.
    pub values: Vec<f64>,
    /// Secondary lateral-offset grid (sphere, cylinder).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    /// Fixed-volume mode for cylinders: height = V / (pi R^2) per grid point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_volume: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { values: Vec::new(), offsets: None, fixed_volume: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapSection {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub nx: usize,
    pub nz: usize,
    pub plot_script: bool,
}

impl Default for MapSection {
    fn default() -> Self {
        MapSection { x_min: -5.0, x_max: 5.0, z_min: -5.0, z_max: 5.0, nx: 400, nz: 400, plot_script: false }
    }
}

/// Physical-parameter section: a named preset or explicit values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhysicalSection {
    Preset(String),
    Params(PhysicalParams),
}

impl PhysicalSection {
    pub fn params(&self) -> anyhow::Result<PhysicalParams> {
        let params = match self {
            PhysicalSection::Params(p) => *p,
            PhysicalSection::Preset(name) => match name.as_str() {
                "water-300K-0.2T" => PhysicalParams::water_300k_0p2t(),
                other => bail!(
                    "unknown physical preset {other:?}; expected \"water-300K-0.2T\" \
                     or an inline parameter table"
                ),
            },
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyticSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap_radius: Option<f64>,
    pub g_infinity: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeQuantity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeQuantity {
    pub radius: f64,
    pub theta_deg: f64,
}

/// Fully resolved run configuration. The JSON metadata of every run embeds
/// this structure plus its TOML rendering; loading that TOML back reproduces
/// the run bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: String,
    pub frame: FrameSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<SampleShape>,
    pub mc: McSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticSection>,
    /// Worker threads; 0 means all available cores. Never affects results.
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            frame: FrameSection::default(),
            shape: None,
            mc: McSection::default(),
            sweep: None,
            map: None,
            physical: None,
            analytic: None,
            threads: 0,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn load_toml(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).context("failed to parse config file")
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        toml::to_string_pretty(self).context("failed to serialize config")
    }

    /// Shape with all lengths divided by d_nv, so the estimator always runs
    /// in natural units regardless of the configured unit.
    pub fn normalized_shape(&self) -> anyhow::Result<SampleShape> {
        let shape = self.shape.clone().context("this command requires a shape")?;
        Ok(scale_shape(&shape, 1.0 / self.frame.d_nv))
    }
}

/// Multiply every length of a shape by `factor` (angles untouched).
pub fn scale_shape(shape: &SampleShape, factor: f64) -> SampleShape {
    match *shape {
        SampleShape::SphericalCap { radius } => {
            SampleShape::SphericalCap { radius: radius * factor }
        }
        SampleShape::Cone { radius, theta_max, clip_to_surface } => {
            SampleShape::Cone { radius: radius * factor, theta_max, clip_to_surface }
        }
        SampleShape::Sphere { radius, lateral_offset } => SampleShape::Sphere {
            radius: radius * factor,
            lateral_offset: lateral_offset * factor,
        },
        SampleShape::Cylinder { radius, height, lateral_offset } => SampleShape::Cylinder {
            radius: radius * factor,
            height: height * factor,
            lateral_offset: lateral_offset * factor,
        },
        SampleShape::Sheet { radius, thickness } => SampleShape::Sheet {
            radius: radius * factor,
            thickness: thickness * factor,
        },
    }
}

/// Parse a grid spec: a single number, a comma list, or `lo:hi:count`
/// (inclusive, evenly spaced).
pub fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            bail!("range must be lo:hi:count, got {text:?}");
        }
        let lo: f64 = parts[0].parse().context("bad range start")?;
        let hi: f64 = parts[1].parse().context("bad range end")?;
        let count: usize = parts[2].parse().context("bad range count")?;
        if count < 2 {
            bail!("range count must be >= 2, got {count}");
        }
        let step = (hi - lo) / (count - 1) as f64;
        return Ok((0..count).map(|i| lo + step * i as f64).collect());
    }
    text.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad grid value {t:?}")))
        .collect()
}

/// Parse a count that may be written in scientific notation (`1e6`).
pub fn parse_count(text: &str) -> anyhow::Result<u64> {
    if let Ok(n) = text.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = text.parse().with_context(|| format!("bad count {text:?}"))?;
    if !(f.is_finite() && f >= 1.0 && f <= 1e15 && f.fract() == 0.0) {
        bail!("count must be a positive integer, got {text:?}");
    }
    Ok(f as u64)
}
