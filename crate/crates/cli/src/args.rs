//! Command-line surface and the flag-over-file merge.
//!
//! Every run resolves to a [`RunConfig`]: defaults, then the `--config` TOML
//! file, then explicit flags, in increasing priority.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nvgeom::SampleShape;

use crate::config::{
    parse_count, parse_grid, ConeQuantity, GammaSpec, LengthUnit, PhysicalSection, RunConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "nvgeom",
    version,
    about = "Geometry factors and signal estimates for NV-center NMR sensing",
    after_help = "Lengths are in units of d_nv unless --d-nv/--d-nv-unit say otherwise.\n\
                  Outputs: <out>.csv (data) and <out>.json (metadata echoing the full config)."
)]
pub struct Cli {
    /// TOML config file; flags override file values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (0 = all cores); never affects numerical results
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output base path; writes <out>.csv and <out>.json
    #[arg(long, global = true, value_name = "BASE")]
    pub out: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate closed-form geometry factors (and K, S with --physical)
    Analytic {
        #[command(flatten)]
        frame: FrameArgs,
        /// Cap geometry factor at this radius
        #[arg(long = "g-cap", value_name = "R")]
        g_cap: Option<f64>,
        /// Large-radius limit 2 pi sin(gamma) cos(gamma)
        #[arg(long = "g-infinity")]
        g_infinity: bool,
        /// Published cone closed form at radius R and half-angle THETA_DEG
        #[arg(long = "g-cone", num_args = 2, value_names = ["R", "THETA_DEG"])]
        g_cone: Option<Vec<f64>>,
        #[command(flatten)]
        physical: PhysicalArgs,
    },

    /// Monte-Carlo estimate of G for one shape
    Mc {
        #[command(flatten)]
        frame: FrameArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        /// Primary radius of the shape
        #[arg(long = "R", value_name = "RADIUS", allow_hyphen_values = true)]
        radius: Option<f64>,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        physical: PhysicalArgs,
    },

    /// Rasterize the signed kernel on the y = 0 plane
    Map {
        #[command(flatten)]
        frame: FrameArgs,
        /// x range as lo:hi
        #[arg(long, value_name = "LO:HI")]
        x: Option<String>,
        /// z range as lo:hi
        #[arg(long, value_name = "LO:HI")]
        z: Option<String>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        nz: Option<usize>,
        /// Also emit a matplotlib script next to the CSV
        #[arg(long = "plot-script")]
        plot_script: bool,
    },

    /// Sweep a shape parameter, one Monte-Carlo run per grid point
    Sweep {
        #[command(flatten)]
        frame: FrameArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        /// Radius grid: lo:hi:count or comma list
        #[arg(long = "R", value_name = "GRID")]
        radius_grid: Option<String>,
        /// Lateral-offset grid for sphere/cylinder sweeps (comma list)
        #[arg(long, value_name = "GRID")]
        offsets: Option<String>,
        /// Keep the cylinder volume fixed; height = V / (pi R^2)
        #[arg(long = "fixed-volume", value_name = "V")]
        fixed_volume: Option<f64>,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        physical: PhysicalArgs,
    },

    /// Run the validation suite and print one pass/fail line per criterion
    Validate {
        /// Comma list of criterion numbers to run (default: all)
        #[arg(long, value_name = "IDS")]
        only: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    /// NV-axis angle from the surface normal, degrees, or "magic" = atan(sqrt 2)
    #[arg(long)]
    pub gamma: Option<String>,
    /// NV depth (sets the length unit of all shape parameters)
    #[arg(long = "d-nv")]
    pub d_nv: Option<f64>,
    #[arg(long = "d-nv-unit", value_enum)]
    pub d_nv_unit: Option<UnitArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitArg {
    Natural,
    Nm,
    Um,
    Mm,
}

impl From<UnitArg> for LengthUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Natural => LengthUnit::Natural,
            UnitArg::Nm => LengthUnit::Nm,
            UnitArg::Um => LengthUnit::Um,
            UnitArg::Mm => LengthUnit::Mm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ShapeKind {
    Cap,
    Cone,
    Sphere,
    Cylinder,
    Sheet,
}

#[derive(Debug, Args)]
pub struct ShapeArgs {
    #[arg(long, value_enum)]
    pub shape: Option<ShapeKind>,
    /// Cone half-angle, degrees
    #[arg(long, value_name = "DEG")]
    pub theta: Option<f64>,
    /// Keep the cone's pure spherical bounds instead of clipping to z > d_nv
    #[arg(long = "no-clip")]
    pub no_clip: bool,
    /// Cylinder height
    #[arg(long)]
    pub height: Option<f64>,
    /// Sheet thickness
    #[arg(long)]
    pub thickness: Option<f64>,
    /// Lateral offset of sphere/cylinder centers
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Sample points per repetition (accepts 1e6 notation)
    #[arg(long = "N")]
    pub n: Option<String>,
    /// NV points per repetition (ensemble runs)
    #[arg(long = "M")]
    pub m: Option<String>,
    /// Repetitions
    #[arg(long = "K")]
    pub k: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Proximity cutoff; pairs closer than this are skipped and counted
    #[arg(long = "r-min")]
    pub r_min: Option<f64>,
    /// Average over an NV layer instead of a single NV at the origin
    #[arg(long)]
    pub ensemble: bool,
    #[arg(long = "ensemble-radius")]
    pub ensemble_radius: Option<f64>,
    #[arg(long = "ensemble-height")]
    pub ensemble_height: Option<f64>,
    #[arg(long = "ensemble-min-depth")]
    pub ensemble_min_depth: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PhysicalArgs {
    /// Physical-parameter preset (e.g. water-300K-0.2T) enabling K and S output
    #[arg(long)]
    pub physical: Option<String>,
}

/// Resolve the final configuration from defaults, file and flags.
pub fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            RunConfig::load_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }

    match &cli.command {
        Command::Analytic { frame, g_cap, g_infinity, g_cone, physical } => {
            cfg.command = "analytic".into();
            apply_frame(&mut cfg, frame)?;
            apply_physical(&mut cfg, physical);
            let mut section = cfg.analytic.take().unwrap_or_default();
            if let Some(r) = g_cap {
                section.cap_radius = Some(*r);
            }
            if *g_infinity {
                section.g_infinity = true;
            }
            if let Some(values) = g_cone {
                section.cone =
                    Some(ConeQuantity { radius: values[0], theta_deg: values[1] });
            }
            if section.cap_radius.is_none() && !section.g_infinity && section.cone.is_none() {
                bail!("analytic: request at least one of --g-cap, --g-infinity, --g-cone");
            }
            cfg.analytic = Some(section);
        }
        Command::Mc { frame, shape, radius, mc, physical } => {
            cfg.command = "mc".into();
            apply_frame(&mut cfg, frame)?;
            apply_shape(&mut cfg, shape, *radius)?;
            apply_mc(&mut cfg, mc)?;
            apply_physical(&mut cfg, physical);
            if cfg.shape.is_none() {
                bail!("mc: a shape is required (--shape or a [shape] config section)");
            }
        }
        Command::Map { frame, x, z, nx, nz, plot_script } => {
            cfg.command = "map".into();
            apply_frame(&mut cfg, frame)?;
            let mut map = cfg.map.take().unwrap_or_default();
            if let Some(span) = x {
                (map.x_min, map.x_max) = parse_span(span)?;
            }
            if let Some(span) = z {
                (map.z_min, map.z_max) = parse_span(span)?;
            }
            if let Some(n) = nx {
                map.nx = *n;
            }
            if let Some(n) = nz {
                map.nz = *n;
            }
            if *plot_script {
                map.plot_script = true;
            }
            cfg.map = Some(map);
        }
        Command::Sweep { frame, shape, radius_grid, offsets, fixed_volume, mc, physical } => {
            cfg.command = "sweep".into();
            apply_frame(&mut cfg, frame)?;
            apply_shape(&mut cfg, shape, None)?;
            apply_mc(&mut cfg, mc)?;
            apply_physical(&mut cfg, physical);
            let mut sweep = cfg.sweep.take().unwrap_or_default();
            if let Some(grid) = radius_grid {
                sweep.values = parse_grid(grid)?;
            }
            if let Some(grid) = offsets {
                sweep.offsets = Some(parse_grid(grid)?);
            }
            if let Some(v) = fixed_volume {
                sweep.fixed_volume = Some(*v);
            }
            if sweep.values.is_empty() {
                bail!("sweep: a radius grid is required (--R lo:hi:count)");
            }
            if cfg.shape.is_none() {
                bail!("sweep: a shape is required (--shape or a [shape] config section)");
            }
            cfg.sweep = Some(sweep);
        }
        Command::Validate { .. } => {
            cfg.command = "validate".into();
        }
    }
    Ok(cfg)
}

fn parse_span(text: &str) -> anyhow::Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        bail!("span must be lo:hi, got {text:?}");
    }
    let lo: f64 = parts[0].parse().context("bad span start")?;
    let hi: f64 = parts[1].parse().context("bad span end")?;
    if !(hi > lo) {
        bail!("span must satisfy lo < hi, got {text:?}");
    }
    Ok((lo, hi))
}

fn apply_frame(cfg: &mut RunConfig, args: &FrameArgs) -> anyhow::Result<()> {
    if let Some(g) = &args.gamma {
        cfg.frame.gamma = GammaSpec::parse(g)?;
    }
    if let Some(d) = args.d_nv {
        cfg.frame.d_nv = d;
    }
    if let Some(u) = args.d_nv_unit {
        cfg.frame.d_nv_unit = u.into();
    }
    Ok(())
}

fn apply_physical(cfg: &mut RunConfig, args: &PhysicalArgs) {
    if let Some(preset) = &args.physical {
        cfg.physical = Some(PhysicalSection::Preset(preset.clone()));
    }
}

fn apply_mc(cfg: &mut RunConfig, args: &McArgs) -> anyhow::Result<()> {
    if let Some(n) = &args.n {
        cfg.mc.n = parse_count(n)?;
    }
    if let Some(m) = &args.m {
        cfg.mc.m = parse_count(m)?;
    }
    if let Some(k) = &args.k {
        cfg.mc.k = parse_count(k)?;
    }
    if let Some(seed) = args.seed {
        cfg.mc.seed = seed;
    }
    if let Some(r) = args.r_min {
        cfg.mc.r_min = Some(r);
    }
    if args.ensemble
        || args.ensemble_radius.is_some()
        || args.ensemble_height.is_some()
        || args.ensemble_min_depth.is_some()
    {
        let mut layer = cfg.mc.ensemble.unwrap_or_default();
        if let Some(r) = args.ensemble_radius {
            layer.radius = r;
        }
        if let Some(h) = args.ensemble_height {
            layer.height = h;
        }
        if let Some(d) = args.ensemble_min_depth {
            layer.min_depth = d;
        }
        cfg.mc.ensemble = Some(layer);
    }
    Ok(())
}

/// Build or update the shape from flags; flags override matching fields of a
/// file-provided shape of the same kind, and a kind change rebuilds from
/// defaults.
fn apply_shape(
    cfg: &mut RunConfig,
    args: &ShapeArgs,
    radius: Option<f64>,
) -> anyhow::Result<()> {
    let kind = args.shape;
    let mut shape = match (kind, cfg.shape.take()) {
        (None, Some(existing)) => existing,
        (None, None) => return Ok(()),
        (Some(kind), existing) => {
            let keep = existing.filter(|s| kind_matches(s, kind));
            keep.unwrap_or_else(|| default_shape(kind))
        }
    };
    match &mut shape {
        SampleShape::SphericalCap { radius: r } => {
            if let Some(v) = radius {
                *r = v;
            }
        }
        SampleShape::Cone { radius: r, theta_max, clip_to_surface } => {
            if let Some(v) = radius {
                *r = v;
            }
            if let Some(t) = args.theta {
                *theta_max = t.to_radians();
            }
            if args.no_clip {
                *clip_to_surface = false;
            }
        }
        SampleShape::Sphere { radius: r, lateral_offset } => {
            if let Some(v) = radius {
                *r = v;
            }
            if let Some(o) = args.offset {
                *lateral_offset = o;
            }
        }
        SampleShape::Cylinder { radius: r, height, lateral_offset } => {
            if let Some(v) = radius {
                *r = v;
            }
            if let Some(h) = args.height {
                *height = h;
            }
            if let Some(o) = args.offset {
                *lateral_offset = o;
            }
        }
        SampleShape::Sheet { radius: r, thickness } => {
            if let Some(v) = radius {
                *r = v;
            }
            if let Some(t) = args.thickness {
                *thickness = t;
            }
        }
    }
    cfg.shape = Some(shape);
    Ok(())
}

fn kind_matches(shape: &SampleShape, kind: ShapeKind) -> bool {
    matches!(
        (shape, kind),
        (SampleShape::SphericalCap { .. }, ShapeKind::Cap)
            | (SampleShape::Cone { .. }, ShapeKind::Cone)
            | (SampleShape::Sphere { .. }, ShapeKind::Sphere)
            | (SampleShape::Cylinder { .. }, ShapeKind::Cylinder)
            | (SampleShape::Sheet { .. }, ShapeKind::Sheet)
    )
}

fn default_shape(kind: ShapeKind) -> SampleShape {
    match kind {
        ShapeKind::Cap => SampleShape::SphericalCap { radius: 10.0 },
        ShapeKind::Cone => SampleShape::Cone {
            radius: 10.0,
            theta_max: std::f64::consts::FRAC_PI_4,
            clip_to_surface: true,
        },
        ShapeKind::Sphere => SampleShape::Sphere { radius: 1.0, lateral_offset: 0.0 },
        ShapeKind::Cylinder => {
            SampleShape::Cylinder { radius: 1.0, height: 1.0, lateral_offset: 0.0 }
        }
        ShapeKind::Sheet => SampleShape::Sheet { radius: 1.0, thickness: 0.1 },
    }
}
