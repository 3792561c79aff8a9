//! Output writers: fixed-schema CSV data plus a JSON metadata header that
//! echoes the fully resolved configuration.
//!
//! Floating-point fields are printed with 17 significant digits so that CSV
//! byte equality is a valid determinism check; anything time-dependent (wall
//! time) lives only in the JSON header.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use serde::Serialize;

use crate::config::RunConfig;

/// Version tag of the sweep/mc CSV column layout.
pub const CSV_SCHEMA: &str = "nvgeom.csv.v1";

pub const CSV_HEADER: &str = "parameter,parameter2,g_mean,g_stderr,g_analytic,k_tesla,s_tesla";

/// One CSV row of an `mc` or `sweep` run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    /// Secondary grid value (lateral offset), when a 2-D sweep is running.
    pub parameter2: Option<f64>,
    pub g_mean: f64,
    pub g_stderr: f64,
    /// Closed form for the same shape, when one exists.
    pub g_analytic: Option<f64>,
    pub k_tesla: Option<f64>,
    pub s_tesla: Option<f64>,
}

fn push_field(out: &mut String, value: Option<f64>) {
    out.push(',');
    if let Some(v) = value {
        out.push_str(&format!("{v:.16e}"));
    }
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{:.16e}", row.parameter));
        push_field(&mut out, row.parameter2);
        push_field(&mut out, Some(row.g_mean));
        push_field(&mut out, Some(row.g_stderr));
        push_field(&mut out, row.g_analytic);
        push_field(&mut out, row.k_tesla);
        push_field(&mut out, row.s_tesla);
        out.push('\n');
    }
    out
}

/// JSON metadata header written next to every CSV.
#[derive(Debug, Serialize)]
pub struct RunMeta<'a> {
    pub schema: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    /// Extra run facts (skipped pairs, criterion notes, map clamp, ...).
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub extra: serde_json::Value,
    /// The fully resolved configuration of this run.
    pub config: &'a RunConfig,
    /// Same configuration rendered as TOML; feed it back via --config to
    /// reproduce the CSV bit-for-bit.
    pub config_toml: String,
}

pub fn meta_json(meta: &RunMeta) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(meta)?)
}

/// Everything a command produced; the caller decides where it goes.
#[derive(Debug, Default)]
pub struct Execution {
    /// Human-readable summary printed to stdout.
    pub stdout: String,
    /// CSV payload (empty for `analytic` runs without --out).
    pub csv: String,
    /// JSON metadata header.
    pub meta: String,
    /// Optional extra artifact (plotting script) with its file suffix.
    pub script: Option<(&'static str, String)>,
}

impl Execution {
    /// Write `<base>.csv`, `<base>.json` and any extra artifact.
    pub fn write_files(&self, base: &str) -> io::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        if !self.csv.is_empty() {
            let path = PathBuf::from(format!("{base}.csv"));
            fs::write(&path, self.csv.as_bytes())?;
            written.push(path);
        }
        if !self.meta.is_empty() {
            let path = PathBuf::from(format!("{base}.json"));
            fs::write(&path, self.meta.as_bytes())?;
            written.push(path);
        }
        if let Some((suffix, body)) = &self.script {
            let path = PathBuf::from(format!("{base}.{suffix}"));
            fs::write(&path, body.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn print_stdout(&self) {
        let mut out = io::stdout().lock();
        let _ = out.write_all(self.stdout.as_bytes());
    }
}

/// Minimal matplotlib script for a rendered map CSV.
pub fn map_plot_script(csv_name: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Render the sensitivity map exported next to this script.
import csv
import math
import sys

import matplotlib.pyplot as plt
import numpy as np

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
xs, zs, vs, ms = [], [], [], []
with open(path) as fh:
    for row in csv.DictReader(fh):
        xs.append(float(row["x"]))
        zs.append(float(row["z"]))
        vs.append(float(row["value"]))
        ms.append(int(row["masked"]))

nx = len(sorted(set(xs)))
nz = len(sorted(set(zs)))
v = np.array(vs).reshape(nx, nz)
clamp = np.nanpercentile(np.abs(v), 99.5)
v = np.clip(v, -clamp, clamp)
plt.pcolormesh(
    np.array(sorted(set(xs))),
    np.array(sorted(set(zs))),
    v.T,
    cmap="RdBu_r",
    vmin=-clamp,
    vmax=clamp,
)
plt.colorbar(label="kernel value")
plt.xlabel("x / d_nv")
plt.ylabel("z / d_nv")
plt.gca().set_aspect("equal")
plt.tight_layout()
plt.savefig(path.replace(".csv", ".png"), dpi=200)
print("wrote", path.replace(".csv", ".png"))
"#
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_empty_fields() {
        let rows = vec![SweepRow {
            parameter: 2.0,
            parameter2: None,
            g_mean: 1.5,
            g_stderr: 0.01,
            g_analytic: None,
            k_tesla: None,
            s_tesla: None,
        }];
        let text = rows_to_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[1], "");
        assert_eq!(fields[4], "");
        assert!(fields[2].starts_with("1.5"));
    }
}
