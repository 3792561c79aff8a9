//! Deterministic, parallel Monte-Carlo estimation of the geometry factor.
//!
//! The estimator follows the repetition structure
//!
//! ```text
//! G = (1/K) sum_k [ V / (M N) sum_m sum_n kernel(p_n - q_m) ]
//! ```
//!
//! with `p_n` uniform sample points, `q_m` NV positions (the origin for a
//! single NV, a layer cylinder for an ensemble), `V` the sample volume.
//!
//! Reproducibility contract: for a fixed `(seed, config, shape, frame)` the
//! per-repetition values are bitwise identical regardless of the number of
//! worker threads. Work is split into fixed sample-point blocks; every
//! `(repetition, block)` pair owns an [`RngStream`] derived from the seed and
//! its indices, block sums use compensated summation in point order, and the
//! cross-block reduction runs sequentially in block order. Scheduling can
//! therefore only change *when* a block is computed, never *what* it
//! contributes.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::frame::SensorFrame;
use crate::kernel::kernel_unchecked;
use crate::rng::{derive_seed, RngStream};
use crate::shape::{SampleRegion, SampleShape};
use crate::stats::{self, CompensatedSum};
use crate::vec3::Vec3;

/// Sample points per work block; one block is one parallel task.
pub const BLOCK_SIZE: u64 = 32_768;

/// Default proximity cutoff as a fraction of `d_nv`: pairs closer than this
/// are skipped and counted, since a single near-coincident pair can dominate
/// the 1/r^3 sum.
pub const DEFAULT_R_MIN_FACTOR: f64 = 1e-6;

/// A run fails when more than this fraction of pairs was skipped (0.01%).
pub const MAX_SKIPPED_FRACTION: f64 = 1e-4;

/// Stream labels, so sample-point and NV-point streams never collide.
const SAMPLE_STREAM: u64 = 1;
const NV_STREAM: u64 = 2;

/// Near-surface layer holding an NV ensemble: a cylinder of the given radius
/// whose axis passes through the origin, occupying
/// `z in [d_nv - height, d_nv - min_depth]` (depths `min_depth..height` below
/// the surface). The conventional ensemble is `radius = height = d_nv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NvLayer {
    pub radius: f64,
    pub height: f64,
    /// Shallowest allowed NV depth below the surface; keeps ensemble members
    /// away from the sample boundary. Conventionally 0.01 d_nv.
    pub min_depth: f64,
}

impl NvLayer {
    pub fn new(radius: f64, height: f64, min_depth: f64) -> Self {
        NvLayer { radius, height, min_depth }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "layer radius must be > 0, got {}",
                self.radius
            )));
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "layer height must be > 0, got {}",
                self.height
            )));
        }
        if !(self.min_depth.is_finite() && self.min_depth >= 0.0 && self.min_depth < self.height) {
            return Err(Error::InvalidConfig(format!(
                "layer min_depth must satisfy 0 <= min_depth < height, got {}",
                self.min_depth
            )));
        }
        Ok(())
    }

    fn sample(&self, frame: &SensorFrame, rng: &mut RngStream) -> Vec3 {
        let rho = self.radius * rng.uniform().sqrt();
        let phi = rng.uniform_in(0.0, std::f64::consts::TAU);
        let z = rng.uniform_in(frame.d_nv() - self.height, frame.d_nv() - self.min_depth);
        Vec3::new(rho * phi.cos(), rho * phi.sin(), z)
    }
}

/// Monte-Carlo run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    /// Sample points per repetition (N).
    pub n_sample_points: u64,
    /// NV points per repetition (M); forced to 1 when `ensemble` is absent.
    pub n_nv_points: u64,
    /// Repetitions (K); the spread of the K estimates gives the uncertainty.
    pub n_repetitions: u64,
    pub seed: u64,
    /// NV-ensemble layer; a single NV at the origin when absent.
    pub ensemble: Option<NvLayer>,
    /// Proximity cutoff override; defaults to `1e-6 * d_nv`.
    pub r_min: Option<f64>,
}

impl McConfig {
    /// Single-NV configuration.
    pub fn single(n_sample_points: u64, n_repetitions: u64, seed: u64) -> Self {
        McConfig {
            n_sample_points,
            n_nv_points: 1,
            n_repetitions,
            seed,
            ensemble: None,
            r_min: None,
        }
    }

    /// Ensemble configuration with `m` NV points per repetition.
    pub fn ensemble(
        n_sample_points: u64,
        m: u64,
        n_repetitions: u64,
        seed: u64,
        layer: NvLayer,
    ) -> Self {
        McConfig {
            n_sample_points,
            n_nv_points: m,
            n_repetitions,
            seed,
            ensemble: Some(layer),
            r_min: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n_sample_points == 0 || self.n_nv_points == 0 || self.n_repetitions == 0 {
            return Err(Error::InvalidConfig(
                "n_sample_points, n_nv_points and n_repetitions must all be >= 1".into(),
            ));
        }
        if self.ensemble.is_none() && self.n_nv_points != 1 {
            return Err(Error::InvalidConfig(
                "n_nv_points > 1 requires an ensemble layer".into(),
            ));
        }
        if let Some(layer) = &self.ensemble {
            layer.validate()?;
        }
        if let Some(r) = self.r_min {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidConfig(format!("r_min must be >= 0, got {r}")));
            }
        }
        Ok(())
    }

    fn effective_m(&self) -> u64 {
        if self.ensemble.is_some() {
            self.n_nv_points
        } else {
            1
        }
    }
}

/// Result of one estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub g_mean: f64,
    /// Sample standard deviation of the K per-repetition estimates divided by
    /// sqrt(K); zero when K = 1.
    pub g_stderr: f64,
    pub per_repetition: Vec<f64>,
    /// NV-sample pairs that actually contributed (total minus skipped).
    pub n_effective: u64,
    /// Pairs skipped by the proximity cutoff.
    pub skipped_pairs: u64,
    /// Wall-clock duration of the run, seconds.
    pub wall_time: f64,
}

/// Estimate the geometry factor of a validated [`SampleShape`].
pub fn estimate_g(
    shape: &SampleShape,
    frame: &SensorFrame,
    cfg: &McConfig,
) -> Result<McResult, Error> {
    shape.validate(frame)?;
    estimate_g_region(shape, frame, cfg)
}

/// Estimate the geometry factor of any [`SampleRegion`].
pub fn estimate_g_region<S: SampleRegion + ?Sized>(
    region: &S,
    frame: &SensorFrame,
    cfg: &McConfig,
) -> Result<McResult, Error> {
    cfg.validate()?;
    let start = Instant::now();

    let n = cfg.n_sample_points;
    let m = cfg.effective_m();
    let k = cfg.n_repetitions;
    let volume = region.volume(frame);
    let r_min = cfg.r_min.unwrap_or(DEFAULT_R_MIN_FACTOR * frame.d_nv());
    let r_min_sq = r_min * r_min;

    // NV positions are drawn up front, one stream per repetition, so they do
    // not depend on how sample blocks are scheduled.
    let nv_points: Vec<Vec<Vec3>> = (0..k)
        .map(|rep| match &cfg.ensemble {
            None => vec![Vec3::ZERO],
            Some(layer) => {
                let mut rng = RngStream::derive(cfg.seed, &[NV_STREAM, rep]);
                (0..m).map(|_| layer.sample(frame, &mut rng)).collect()
            }
        })
        .collect();

    let n_blocks = n.div_ceil(BLOCK_SIZE);
    let partials: Vec<(f64, u64)> = (0..k * n_blocks)
        .into_par_iter()
        .map(|task| -> Result<(f64, u64), Error> {
            let rep = task / n_blocks;
            let block = task % n_blocks;
            let lo = block * BLOCK_SIZE;
            let count = BLOCK_SIZE.min(n - lo);
            let mut rng = RngStream::derive(cfg.seed, &[SAMPLE_STREAM, rep, block]);
            let nv = &nv_points[rep as usize];
            let mut acc = CompensatedSum::default();
            let mut skipped = 0u64;
            for _ in 0..count {
                let p = region.sample_uniform(frame, &mut rng)?;
                for &q in nv {
                    let sep = p - q;
                    if sep.norm_squared() < r_min_sq {
                        skipped += 1;
                    } else {
                        acc.add(kernel_unchecked(sep, frame));
                    }
                }
            }
            Ok((acc.total(), skipped))
        })
        .collect::<Result<_, _>>()?;

    // Sequential reduction in block order keeps results thread-count
    // independent. Skipped pairs contribute zero but keep the M*N normalizer.
    let norm = volume / (m as f64 * n as f64);
    let mut per_repetition = Vec::with_capacity(k as usize);
    let mut skipped_pairs = 0u64;
    for rep in 0..k {
        let mut sum = CompensatedSum::default();
        for block in 0..n_blocks {
            let (value, skipped) = partials[(rep * n_blocks + block) as usize];
            sum.add(value);
            skipped_pairs += skipped;
        }
        per_repetition.push(sum.total() * norm);
    }

    let total_pairs = k * m * n;
    if skipped_pairs as f64 > MAX_SKIPPED_FRACTION * total_pairs as f64 {
        return Err(Error::Proximity { skipped: skipped_pairs, total: total_pairs });
    }

    let g_mean = stats::mean(&per_repetition);
    let g_stderr = stats::sample_std(&per_repetition) / (k as f64).sqrt();
    Ok(McResult {
        g_mean,
        g_stderr,
        per_repetition,
        n_effective: total_pairs - skipped_pairs,
        skipped_pairs,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// One grid point of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub parameter: f64,
    pub shape: SampleShape,
}

/// Run the estimator over a shape family. Each grid point gets its own seed
/// derived from `(cfg.seed, index)`, so single points can be reproduced in
/// isolation and grids can be extended without disturbing earlier points.
pub fn sweep(
    points: &[SweepPoint],
    frame: &SensorFrame,
    cfg: &McConfig,
) -> Result<Vec<(f64, McResult)>, Error> {
    points
        .iter()
        .enumerate()
        .map(|(index, point)| {
            let point_cfg = cfg.clone().with_seed(derive_seed(cfg.seed, index as u64));
            estimate_g(&point.shape, frame, &point_cfg).map(|r| (point.parameter, r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> SensorFrame {
        SensorFrame::magic(1.0).unwrap()
    }

    fn cap(r: f64) -> SampleShape {
        SampleShape::SphericalCap { radius: r }
    }

    #[test]
    fn config_validation() {
        let mut cfg = McConfig::single(0, 1, 1);
        assert!(cfg.validate().is_err());
        cfg.n_sample_points = 10;
        assert!(cfg.validate().is_ok());
        cfg.n_nv_points = 4; // M > 1 without a layer
        assert!(cfg.validate().is_err());
        cfg.ensemble = Some(NvLayer::new(1.0, 1.0, 0.01));
        assert!(cfg.validate().is_ok());
        cfg.ensemble = Some(NvLayer::new(1.0, 1.0, 1.5)); // min_depth >= height
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn stderr_definition_holds() {
        let r = estimate_g(&cap(2.0), &frame(), &McConfig::single(20_000, 8, 3)).unwrap();
        let expected = stats::sample_std(&r.per_repetition) / (8.0f64).sqrt();
        assert_eq!(r.g_stderr, expected);
        assert_eq!(r.per_repetition.len(), 8);
        assert_eq!(r.n_effective, 8 * 20_000);
        assert_eq!(r.skipped_pairs, 0);
    }

    #[test]
    fn single_repetition_has_zero_stderr() {
        let r = estimate_g(&cap(2.0), &frame(), &McConfig::single(5_000, 1, 9)).unwrap();
        assert_eq!(r.g_stderr, 0.0);
        assert_eq!(r.per_repetition.len(), 1);
        assert_eq!(r.g_mean, r.per_repetition[0]);
    }

    #[test]
    fn identical_config_is_bitwise_reproducible_across_thread_counts() {
        let cfg = McConfig::single(100_000, 6, 4242);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| estimate_g(&cap(5.0), &frame(), &cfg).unwrap())
        };
        let a = run(1);
        let b = run(4);
        let c = run(16);
        assert_eq!(a.per_repetition, b.per_repetition);
        assert_eq!(b.per_repetition, c.per_repetition);
        assert_eq!(a.g_mean.to_bits(), c.g_mean.to_bits());
    }

    #[test]
    fn seed_changes_the_estimate_but_not_its_validity() {
        let f = frame();
        let a = estimate_g(&cap(3.0), &f, &McConfig::single(50_000, 4, 1)).unwrap();
        let b = estimate_g(&cap(3.0), &f, &McConfig::single(50_000, 4, 2)).unwrap();
        assert_ne!(a.per_repetition, b.per_repetition);
        assert!((a.g_mean - b.g_mean).abs() < 6.0 * (a.g_stderr + b.g_stderr));
    }

    #[test]
    fn sweep_derives_per_point_seeds() {
        let f = frame();
        let points: Vec<SweepPoint> = [2.0, 3.0]
            .iter()
            .map(|&r| SweepPoint { parameter: r, shape: cap(r) })
            .collect();
        let cfg = McConfig::single(20_000, 4, 77);
        let out = sweep(&points, &f, &cfg).unwrap();
        assert_eq!(out.len(), 2);
        // point 0 must reproduce a standalone run with the derived seed
        let standalone =
            estimate_g(&cap(2.0), &f, &cfg.clone().with_seed(derive_seed(77, 0))).unwrap();
        assert_eq!(out[0].1.per_repetition, standalone.per_repetition);
        assert_eq!(out[0].0, 2.0);
    }

    #[test]
    fn proximity_skips_are_counted_and_fail_loudly() {
        // Synthetic region hugging the NV: a ball of radius 2 r_min around the
        // origin, so ~12.5% of points fall inside the cutoff.
        struct TinyBall {
            radius: f64,
        }
        impl SampleRegion for TinyBall {
            fn volume(&self, _f: &SensorFrame) -> f64 {
                4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
            }
            fn contains(&self, p: Vec3, _f: &SensorFrame) -> bool {
                p.norm_squared() <= self.radius * self.radius
            }
            fn sample_uniform(
                &self,
                _f: &SensorFrame,
                rng: &mut RngStream,
            ) -> Result<Vec3, Error> {
                let r = self.radius * rng.uniform().cbrt();
                let z = rng.uniform_in(-1.0, 1.0);
                let phi = rng.uniform_in(0.0, std::f64::consts::TAU);
                let s = (1.0 - z * z).max(0.0).sqrt();
                Ok(Vec3::new(r * s * phi.cos(), r * s * phi.sin(), r * z))
            }
        }
        let region = TinyBall { radius: 2.0 * DEFAULT_R_MIN_FACTOR };
        let err = estimate_g_region(&region, &frame(), &McConfig::single(10_000, 2, 5))
            .expect_err("proximity failure expected");
        match err {
            Error::Proximity { skipped, total } => {
                assert_eq!(total, 20_000);
                assert!(skipped > 1_000, "skipped = {skipped}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ensemble_layer_points_stay_in_the_layer() {
        let f = frame();
        let layer = NvLayer::new(0.8, 1.0, 0.05);
        let mut rng = RngStream::derive(3, &[NV_STREAM, 0]);
        for _ in 0..2_000 {
            let q = layer.sample(&f, &mut rng);
            assert!(q.rho() <= 0.8);
            assert!(q.z >= 0.0 && q.z <= 0.95);
        }
    }
}
