//! Statistical validation of the uniform samplers: first moments, sub-box
//! uniformity (chi-squared on an octant partition), and hit-fraction
//! consistency between rejection sampling and the analytic volumes.

use nvgeom::{RngStream, SampleShape, SensorFrame, Vec3};

fn magic() -> SensorFrame {
    SensorFrame::magic(1.0).unwrap()
}

/// chi-squared critical value for 7 degrees of freedom at p = 0.001.
const CHI2_7DF_P001: f64 = 24.322;

#[test]
fn sphere_sample_mean_sits_at_the_center() {
    let frame = magic();
    let shape = SampleShape::Sphere { radius: 1.0, lateral_offset: 0.0 };
    let mut rng = RngStream::derive(101, &[0]);
    let n = 1_000_000;
    let mut sum = Vec3::ZERO;
    for _ in 0..n {
        sum = sum + shape.sample_uniform(&frame, &mut rng).unwrap();
    }
    let mean = sum * (1.0 / n as f64);
    // center is (0, 0, d_nv + radius); per-axis sigma/sqrt(N) ~ 4.5e-4
    assert!(mean.x.abs() < 0.005, "mean.x = {}", mean.x);
    assert!(mean.y.abs() < 0.005, "mean.y = {}", mean.y);
    assert!((mean.z - 2.0).abs() < 0.005, "mean.z = {}", mean.z);
}

#[test]
fn cylinder_height_is_uniform() {
    let frame = magic();
    let shape = SampleShape::Cylinder { radius: 1.0, height: 1.0, lateral_offset: 0.0 };
    let mut rng = RngStream::derive(55, &[0]);
    let n = 1_000_000;
    let mut below = 0u64;
    for _ in 0..n {
        let p = shape.sample_uniform(&frame, &mut rng).unwrap();
        if p.z < 1.5 {
            below += 1;
        }
    }
    let fraction = below as f64 / n as f64;
    assert!((fraction - 0.5).abs() < 0.002, "fraction = {fraction}");
}

#[test]
fn cap_samples_satisfy_membership() {
    let frame = magic();
    let shape = SampleShape::SphericalCap { radius: 2.0 };
    let mut rng = RngStream::derive(9, &[0]);
    for _ in 0..20_000 {
        let p = shape.sample_uniform(&frame, &mut rng).unwrap();
        assert!(shape.contains(p, &frame));
    }
}

/// Octant partition of a shape around `(0, 0, z_split)`: x and y split at 0,
/// z at `z_split`, with analytically known cell probabilities.
fn chi_squared_octants(
    shape: &SampleShape,
    frame: &SensorFrame,
    z_split: f64,
    p_lower_z: f64,
    seed: u64,
) -> f64 {
    let n = 1_000_000u64;
    let mut rng = RngStream::derive(seed, &[0]);
    let mut counts = [0u64; 8];
    for _ in 0..n {
        let p = shape.sample_uniform(frame, &mut rng).unwrap();
        let idx = usize::from(p.x >= 0.0)
            | (usize::from(p.y >= 0.0) << 1)
            | (usize::from(p.z >= z_split) << 2);
        counts[idx] += 1;
    }
    // x and y are symmetric, so each octant gets a quarter of its z-slab
    let mut chi2 = 0.0;
    for (idx, &c) in counts.iter().enumerate() {
        let pz = if idx & 4 == 0 { p_lower_z } else { 1.0 - p_lower_z };
        let expected = n as f64 * pz / 4.0;
        chi2 += (c as f64 - expected).powi(2) / expected;
    }
    chi2
}

#[test]
fn sphere_sampler_uniformity_chi_squared() {
    let frame = magic();
    let shape = SampleShape::Sphere { radius: 1.5, lateral_offset: 0.0 };
    // split at the center: exactly half the ball below
    let chi2 = chi_squared_octants(&shape, &frame, 1.0 + 1.5, 0.5, 404);
    assert!(chi2 < CHI2_7DF_P001, "chi2 = {chi2}");
}

#[test]
fn cap_sampler_uniformity_chi_squared() {
    let frame = magic();
    let r: f64 = 2.0;
    let shape = SampleShape::SphericalCap { radius: r };
    // slab volume of the cap between z = a and z = b is pi [R^2 z - z^3/3]
    let slab = |a: f64, b: f64| {
        std::f64::consts::PI * (r * r * (b - a) - (b.powi(3) - a.powi(3)) / 3.0)
    };
    let z_split = 1.3;
    let p_lower = slab(1.0, z_split) / slab(1.0, r);
    let chi2 = chi_squared_octants(&shape, &frame, z_split, p_lower, 405);
    assert!(chi2 < CHI2_7DF_P001, "chi2 = {chi2}");
}

#[test]
fn cylinder_sampler_uniformity_chi_squared() {
    let frame = magic();
    let shape = SampleShape::Cylinder { radius: 1.0, height: 2.0, lateral_offset: 0.0 };
    let chi2 = chi_squared_octants(&shape, &frame, 1.0 + 0.8, 0.4, 406);
    assert!(chi2 < CHI2_7DF_P001, "chi2 = {chi2}");
}

#[test]
fn rejection_hit_fraction_reproduces_the_volume() {
    // independent rejection loop: hits/draws * box volume must equal the
    // analytic volume within 3 binomial sigma
    let frame = magic();
    let shapes = [
        SampleShape::SphericalCap { radius: 10.0 },
        SampleShape::SphericalCap { radius: 2.0 },
        SampleShape::Cone { radius: 10.0, theta_max: std::f64::consts::FRAC_PI_4, clip_to_surface: true },
        SampleShape::Cone { radius: 6.0, theta_max: 0.5, clip_to_surface: false },
        SampleShape::Sphere { radius: 1.5, lateral_offset: 1.0 },
    ];
    for (i, shape) in shapes.iter().enumerate() {
        let (lo, hi) = shape.bounding_box(&frame);
        let box_volume = (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);
        let mut rng = RngStream::derive(7_000 + i as u64, &[0]);
        let draws = 400_000u64;
        let mut hits = 0u64;
        for _ in 0..draws {
            let p = Vec3::new(
                rng.uniform_in(lo.x, hi.x),
                rng.uniform_in(lo.y, hi.y),
                rng.uniform_in(lo.z, hi.z),
            );
            if shape.contains(p, &frame) {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / draws as f64;
        let estimate = p_hat * box_volume;
        let sigma = box_volume * (p_hat * (1.0 - p_hat) / draws as f64).sqrt();
        let exact = shape.volume(&frame);
        assert!(
            (estimate - exact).abs() <= 3.0 * sigma,
            "{shape:?}: MC volume {estimate} +- {sigma} vs exact {exact}"
        );
    }
}
