//! Command implementations. Everything runs in-process and returns an
//! [`Execution`] so the validation suite and tests can compare outputs
//! byte-for-byte without touching the filesystem.

use std::time::Instant;

use anyhow::{bail, Context};
use nvgeom::analytic::{self, PhysicalParams};
use nvgeom::mc::{self, SweepPoint};
use nvgeom::{fieldmap, SampleShape, SensorFrame};

use crate::config::{RunConfig, SweepSection};
use crate::output::{
    map_plot_script, meta_json, rows_to_csv, Execution, RunMeta, SweepRow, CSV_SCHEMA,
};

/// Run the configured command inside a thread pool of `cfg.threads` workers
/// (0 = all cores). Results never depend on the pool size.
pub fn execute(cfg: &RunConfig) -> anyhow::Result<Execution> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .context("failed to build thread pool")?;
    pool.install(|| execute_in_current_pool(cfg))
}

/// Same as [`execute`] but uses whatever rayon pool is already current.
pub fn execute_in_current_pool(cfg: &RunConfig) -> anyhow::Result<Execution> {
    let start = Instant::now();
    match cfg.command.as_str() {
        "analytic" => run_analytic(cfg),
        "mc" => run_mc(cfg, start),
        "map" => run_map(cfg, start),
        "sweep" => run_sweep(cfg, start),
        other => bail!("unknown command {other:?}"),
    }
}

fn physical_params(cfg: &RunConfig) -> anyhow::Result<Option<PhysicalParams>> {
    cfg.physical.as_ref().map(|p| p.params()).transpose()
}

fn primary_radius(shape: &SampleShape) -> f64 {
    match *shape {
        SampleShape::SphericalCap { radius }
        | SampleShape::Cone { radius, .. }
        | SampleShape::Sphere { radius, .. }
        | SampleShape::Cylinder { radius, .. }
        | SampleShape::Sheet { radius, .. } => radius,
    }
}

/// Closed form matching a (normalized) shape, where one exists.
fn closed_form(shape: &SampleShape, frame: &SensorFrame) -> Option<f64> {
    match *shape {
        SampleShape::SphericalCap { radius } => analytic::g_cap(radius, frame).ok(),
        SampleShape::Cone { radius, theta_max, .. } => {
            analytic::g_cone(radius, theta_max, frame).ok()
        }
        _ => None,
    }
}

fn run_analytic(cfg: &RunConfig) -> anyhow::Result<Execution> {
    let section = cfg.analytic.clone().context("analytic: nothing requested")?;
    let frame = cfg.frame.sensor_frame()?;
    let params = physical_params(cfg)?;
    let d = cfg.frame.d_nv;

    let mut stdout = String::new();
    let mut values = Vec::new();
    if let Some(radius) = section.cap_radius {
        let g = analytic::g_cap(radius / d, &frame)?;
        stdout.push_str(&format!("g_cap(R={radius}) = {g:.16e}\n"));
        values.push(("g_cap", g));
    }
    if section.g_infinity {
        let g = analytic::g_infinity(&frame);
        stdout.push_str(&format!("g_infinity = {g:.16e}\n"));
        values.push(("g_infinity", g));
    }
    if let Some(cone) = section.cone {
        let g = analytic::g_cone(cone.radius / d, cone.theta_deg.to_radians(), &frame)?;
        stdout.push_str(&format!(
            "g_cone(R={}, theta={} deg) = {g:.16e}\n",
            cone.radius, cone.theta_deg
        ));
        values.push(("g_cone", g));
    }
    if let Some(p) = &params {
        let k = analytic::k_prefactor(p);
        stdout.push_str(&format!("k_prefactor = {k:.16e} T\n"));
        for (name, g) in &values {
            stdout.push_str(&format!(
                "signal({name}) = {:.16e} T\n",
                analytic::total_signal(k, *g)
            ));
        }
    }

    let extra = serde_json::json!({
        "values": values.iter().map(|(n, v)| (n.to_string(), v)).collect::<Vec<_>>(),
    });
    let meta = meta_json(&RunMeta {
        schema: "nvgeom.analytic.v1",
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.mc.seed,
        threads: cfg.threads,
        wall_time_s: 0.0,
        extra,
        config: cfg,
        config_toml: cfg.to_toml()?,
    })?;
    Ok(Execution { stdout, csv: String::new(), meta, script: None })
}

fn run_mc(cfg: &RunConfig, start: Instant) -> anyhow::Result<Execution> {
    let frame = cfg.frame.sensor_frame()?;
    let shape = cfg.normalized_shape()?;
    let result = mc::estimate_g(&shape, &frame, &cfg.mc.mc_config())?;
    let params = physical_params(cfg)?;
    let k = params.as_ref().map(analytic::k_prefactor);
    let g_analytic = closed_form(&shape, &frame);

    let row = SweepRow {
        parameter: primary_radius(cfg.shape.as_ref().expect("shape checked above")),
        parameter2: None,
        g_mean: result.g_mean,
        g_stderr: result.g_stderr,
        g_analytic,
        k_tesla: k,
        s_tesla: k.map(|k| analytic::total_signal(k, result.g_mean)),
    };
    let mut stdout = format!(
        "G = {:.6} +- {:.6}  (N = {}, M = {}, K = {}, seed = {})\n",
        result.g_mean,
        result.g_stderr,
        cfg.mc.n,
        cfg.mc.m,
        cfg.mc.k,
        cfg.mc.seed
    );
    if let Some(g) = g_analytic {
        stdout.push_str(&format!("closed form = {g:.6}\n"));
    }
    if let Some(k) = k {
        stdout.push_str(&format!(
            "K = {:.4e} T, S = {:.4e} T\n",
            k,
            analytic::total_signal(k, result.g_mean)
        ));
    }
    if result.skipped_pairs > 0 {
        stdout.push_str(&format!("skipped pairs: {}\n", result.skipped_pairs));
    }

    let extra = serde_json::json!({
        "n_effective": result.n_effective,
        "skipped_pairs": result.skipped_pairs,
        "per_repetition": result.per_repetition,
    });
    let meta = meta_json(&RunMeta {
        schema: CSV_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.mc.seed,
        threads: cfg.threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        extra,
        config: cfg,
        config_toml: cfg.to_toml()?,
    })?;
    Ok(Execution { stdout, csv: rows_to_csv(&[row]), meta, script: None })
}

/// Expand the sweep section into labelled grid points (user-unit labels,
/// normalized shapes).
pub fn sweep_grid(
    cfg: &RunConfig,
    sweep: &SweepSection,
) -> anyhow::Result<Vec<(f64, Option<f64>, SampleShape)>> {
    let d = cfg.frame.d_nv;
    let base = cfg.normalized_shape()?;
    let mut points = Vec::new();
    for &value in &sweep.values {
        let radius = value / d;
        match &base {
            SampleShape::SphericalCap { .. } => {
                points.push((value, None, SampleShape::SphericalCap { radius }));
            }
            SampleShape::Cone { theta_max, clip_to_surface, .. } => points.push((
                value,
                None,
                SampleShape::Cone {
                    radius,
                    theta_max: *theta_max,
                    clip_to_surface: *clip_to_surface,
                },
            )),
            SampleShape::Sphere { lateral_offset, .. } => {
                let offsets = sweep.offsets.clone().unwrap_or_else(|| vec![*lateral_offset * d]);
                for off in offsets {
                    points.push((
                        value,
                        Some(off),
                        SampleShape::Sphere { radius, lateral_offset: off / d },
                    ));
                }
            }
            SampleShape::Cylinder { height, lateral_offset, .. } => {
                let height = match sweep.fixed_volume {
                    // fixed volume in user units^3: H = V / (pi R^2)
                    Some(v) => (v / d.powi(3)) / (std::f64::consts::PI * radius * radius),
                    None => *height,
                };
                let offsets = sweep.offsets.clone().unwrap_or_else(|| vec![*lateral_offset * d]);
                for off in offsets {
                    points.push((
                        value,
                        sweep.offsets.is_some().then_some(off),
                        SampleShape::Cylinder { radius, height, lateral_offset: off / d },
                    ));
                }
            }
            SampleShape::Sheet { thickness, .. } => {
                points.push((value, None, SampleShape::Sheet { radius, thickness: *thickness }));
            }
        }
    }
    Ok(points)
}

fn run_sweep(cfg: &RunConfig, start: Instant) -> anyhow::Result<Execution> {
    let frame = cfg.frame.sensor_frame()?;
    let sweep_section = cfg.sweep.clone().context("sweep: no grid configured")?;
    let grid = sweep_grid(cfg, &sweep_section)?;
    let points: Vec<SweepPoint> = grid
        .iter()
        .map(|(value, _, shape)| SweepPoint { parameter: *value, shape: shape.clone() })
        .collect();
    let results = mc::sweep(&points, &frame, &cfg.mc.mc_config())?;

    let params = physical_params(cfg)?;
    let k = params.as_ref().map(analytic::k_prefactor);
    let mut rows = Vec::with_capacity(results.len());
    let mut skipped_total = 0u64;
    for ((value, offset, shape), (_, result)) in grid.iter().zip(&results) {
        skipped_total += result.skipped_pairs;
        rows.push(SweepRow {
            parameter: *value,
            parameter2: *offset,
            g_mean: result.g_mean,
            g_stderr: result.g_stderr,
            g_analytic: closed_form(shape, &frame),
            k_tesla: k,
            s_tesla: k.map(|k| analytic::total_signal(k, result.g_mean)),
        });
    }

    let stdout = format!(
        "swept {} points; G range [{:.6}, {:.6}]\n",
        rows.len(),
        rows.iter().map(|r| r.g_mean).fold(f64::INFINITY, f64::min),
        rows.iter().map(|r| r.g_mean).fold(f64::NEG_INFINITY, f64::max),
    );
    let extra = serde_json::json!({ "skipped_pairs": skipped_total, "points": rows.len() });
    let meta = meta_json(&RunMeta {
        schema: CSV_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.mc.seed,
        threads: cfg.threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        extra,
        config: cfg,
        config_toml: cfg.to_toml()?,
    })?;
    Ok(Execution { stdout, csv: rows_to_csv(&rows), meta, script: None })
}

fn run_map(cfg: &RunConfig, start: Instant) -> anyhow::Result<Execution> {
    let frame = cfg.frame.sensor_frame()?;
    let section = cfg.map.clone().unwrap_or_default();
    let d = cfg.frame.d_nv;
    let spec = fieldmap::GridSpec {
        x_min: section.x_min / d,
        x_max: section.x_max / d,
        z_min: section.z_min / d,
        z_max: section.z_max / d,
        nx: section.nx,
        nz: section.nz,
    };
    let map = fieldmap::render(&frame, &spec)?;
    let mut csv_bytes = Vec::new();
    map.write_csv(&mut csv_bytes)?;
    let map_meta = map.metadata();
    let signature = fieldmap::quadrant_signature(&map);

    let stdout = format!(
        "rendered {}x{} cells; {} inside the diamond; |value| clamp (p99.5) = {:.4e}; \
         {} sign regions\n",
        spec.nx,
        spec.nz,
        map_meta.diamond_cells,
        map_meta.clamp_abs,
        signature.regions.len()
    );
    let extra = serde_json::json!({
        "fieldmap": map_meta,
        "sign_regions": signature.regions.len(),
    });
    let meta = meta_json(&RunMeta {
        schema: "nvgeom.fieldmap.v1",
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.mc.seed,
        threads: cfg.threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        extra,
        config: cfg,
        config_toml: cfg.to_toml()?,
    })?;
    let script = section.plot_script.then(|| {
        let csv_name = cfg
            .output
            .as_deref()
            .map(|b| format!("{b}.csv"))
            .unwrap_or_else(|| "map.csv".into());
        ("plot.py", map_plot_script(&csv_name))
    });
    Ok(Execution {
        stdout,
        csv: String::from_utf8(csv_bytes).expect("csv is ascii"),
        meta,
        script,
    })
}
