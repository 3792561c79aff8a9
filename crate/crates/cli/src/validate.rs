//! The validation suite: twelve numbered criteria with pinned tolerances,
//! runnable via `nvgeom validate` and exercised one-to-one by the acceptance
//! test target.
//!
//! Three criteria (2, 4 and 6) pin reference values that direct evaluation of
//! the dipole-projection integrand cannot reproduce: the R = 50 cap sits
//! 3 pi sin(g)cos(g)/50 = 0.089 below its limit (bound pinned at 0.06), the
//! cone's log slope carries the kernel's factor 3 (pi/2, pinned at pi/6), and
//! the 0.1-thick sheet tops out at 5.5% of the limit (pinned at 10 +- 3%).
//! They are implemented exactly as pinned and report the measured values; the
//! remaining criteria are the live gate.

use std::fmt::Write as _;

use nvgeom::analytic::{self, PhysicalParams};
use nvgeom::mc::{estimate_g, estimate_g_region, McConfig, NvLayer};
use nvgeom::stats;
use nvgeom::{
    kernel, kernel_unreduced, magic_angle, riemann_g_axisym, Error, RngStream, SampleRegion,
    SampleShape, SensorFrame, Vec3,
};

use crate::config::{RunConfig, SweepSection};
use crate::commands;

/// Pinned reference values.
pub const G_CAP_R10: f64 = 2.5191;
pub const G_INFINITY_MAGIC: f64 = 2.9619;

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {:<24} {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.details
        )
    }
}

fn magic_frame() -> SensorFrame {
    SensorFrame::magic(1.0).unwrap()
}

fn cap(radius: f64) -> SampleShape {
    SampleShape::SphericalCap { radius }
}

/// 1. Cap against the closed form at reference scale.
pub fn criterion_01_cap_oracle() -> CriterionReport {
    let frame = magic_frame();
    let cfg = McConfig::single(1_000_000, 16, 101);
    let r = estimate_g(&cap(10.0), &frame, &cfg).unwrap();
    let dev = (r.g_mean - G_CAP_R10).abs();
    let within_dev = dev <= 4.0 * r.g_stderr;
    let stderr_ok = r.g_stderr <= 0.02;
    let time_ok = r.wall_time < 60.0;
    CriterionReport {
        id: 1,
        name: "cap closed-form match",
        passed: within_dev && stderr_ok && time_ok,
        details: format!(
            "G = {:.4} +- {:.4} vs {G_CAP_R10} (|dev| = {:.4} <= 4 stderr: {}), \
             stderr <= 0.02: {}, wall {:.1}s < 60s: {}",
            r.g_mean, r.g_stderr, dev, within_dev, stderr_ok, r.wall_time, time_ok
        ),
    }
}

/// 2. Monotone convergence of the cap toward its limit.
pub fn criterion_02_convergence() -> CriterionReport {
    let frame = magic_frame();
    let radii = [2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 32.0, 50.0];
    let cfg = McConfig::single(1_000_000, 24, 102);
    let mut g = Vec::new();
    for (i, &radius) in radii.iter().enumerate() {
        let point_cfg = cfg.clone().with_seed(nvgeom::rng::derive_seed(cfg.seed, i as u64));
        g.push(estimate_g(&cap(radius), &frame, &point_cfg).unwrap().g_mean);
    }
    let monotone = g.windows(2).all(|w| w[1] > w[0]);
    let tail_gap = (g[g.len() - 1] - G_INFINITY_MAGIC).abs();
    let tail_ok = tail_gap <= 0.06;
    let analytic_gap = G_INFINITY_MAGIC - analytic::g_cap(50.0, &frame).unwrap();
    CriterionReport {
        id: 2,
        name: "convergence to G_inf",
        passed: monotone && tail_ok,
        details: format!(
            "monotone approach: {monotone}; |G(50) - {G_INFINITY_MAGIC}| = {tail_gap:.4} \
             <= 0.06: {tail_ok} (closed-form gap at R = 50 is {analytic_gap:.4} \
             = 3 pi sin(g)cos(g)/50, so the 0.06 bound is unreachable)",
        ),
    }
}

/// 3. Angular law G ~ sin(gamma) cos(gamma) with the maximum at 45 degrees.
pub fn criterion_03_angular_law() -> CriterionReport {
    let degrees: [f64; 7] = [0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0];
    let cfg = McConfig::single(1_000_000, 16, 103);
    let mut g = Vec::new();
    let mut stderr = Vec::new();
    for (i, &deg) in degrees.iter().enumerate() {
        let frame = SensorFrame::new(deg.to_radians(), 1.0).unwrap();
        let point_cfg = cfg.clone().with_seed(nvgeom::rng::derive_seed(cfg.seed, i as u64));
        let r = estimate_g(&cap(20.0), &frame, &point_cfg).unwrap();
        g.push(r.g_mean);
        stderr.push(r.g_stderr);
    }
    let basis: Vec<f64> =
        degrees.iter().map(|d| d.to_radians().sin() * d.to_radians().cos()).collect();
    let amplitude = g.iter().zip(&basis).map(|(g, b)| g * b).sum::<f64>()
        / basis.iter().map(|b| b * b).sum::<f64>();
    let peak = amplitude / 2.0;
    let max_resid = g
        .iter()
        .zip(&basis)
        .map(|(g, b)| (g - amplitude * b).abs() / peak)
        .fold(0.0, f64::max);
    let fit_ok = max_resid < 0.03;
    let null_0 = g[0].abs() <= 3.0 * stderr[0];
    let null_90 = g[6].abs() <= 3.0 * stderr[6];
    let argmax = g
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let argmax_ok = degrees[argmax] == 45.0;
    CriterionReport {
        id: 3,
        name: "angular law sin*cos",
        passed: fit_ok && null_0 && null_90 && argmax_ok,
        details: format!(
            "A = {amplitude:.4}, max residual {:.2}% < 3%: {fit_ok}; \
             G(0) = {:.4} and G(90) = {:.4} null within 3 stderr: {}/{}; \
             argmax at {} deg: {argmax_ok}",
            100.0 * max_resid,
            g[0],
            g[6],
            null_0,
            null_90,
            degrees[argmax]
        ),
    }
}

/// 4. Cone log-divergence slope against the published coefficient.
pub fn criterion_04_cone_slope() -> CriterionReport {
    let frame = magic_frame();
    let radii = [2.0, 4.0, 8.0, 16.0, 32.0];
    let cfg = McConfig::single(1_000_000, 16, 104);
    let mut g = Vec::new();
    for (i, &radius) in radii.iter().enumerate() {
        let shape = SampleShape::Cone {
            radius,
            theta_max: std::f64::consts::FRAC_PI_4,
            clip_to_surface: true,
        };
        let point_cfg = cfg.clone().with_seed(nvgeom::rng::derive_seed(cfg.seed, i as u64));
        g.push(estimate_g(&shape, &frame, &point_cfg).unwrap().g_mean);
    }
    let ln_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let (slope, _) = stats::linear_fit(&ln_r, &g);
    let published = std::f64::consts::PI / 6.0;
    let passed = (slope - published).abs() <= 0.05 * published;
    let integrand_coefficient =
        analytic::cone_log_slope(std::f64::consts::FRAC_PI_4, &frame);
    CriterionReport {
        id: 4,
        name: "cone log slope",
        passed,
        details: format!(
            "slope = {slope:.4} vs published pi/6 = {published:.4} within 5%: {passed} \
             (slope/published = {:.2}; direct integration of the kernel gives \
             {integrand_coefficient:.4} = 3x, matched within {:.1}%)",
            slope / published,
            100.0 * (slope - integrand_coefficient).abs() / integrand_coefficient
        ),
    }
}

/// 5. Sphere optimum relative to the planar limit.
pub fn criterion_05_sphere_optimum() -> CriterionReport {
    let frame = magic_frame();
    let radii = [1.0, 2.0, 4.0, 8.0, 12.0, 16.0];
    let offsets = [0.0, 0.5, 1.0, 2.0];
    let cfg = McConfig::single(200_000, 8, 105);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut index = 0u64;
    for &radius in &radii {
        for &offset in &offsets {
            let shape = SampleShape::Sphere { radius, lateral_offset: offset };
            let point_cfg = cfg.clone().with_seed(nvgeom::rng::derive_seed(cfg.seed, index));
            index += 1;
            let r = estimate_g(&shape, &frame, &point_cfg).unwrap();
            if r.g_mean > best.0 {
                best = (r.g_mean, radius, offset);
            }
        }
    }
    let ratio = best.0 / G_INFINITY_MAGIC;
    let passed = (ratio - 1.6).abs() <= 0.2;
    CriterionReport {
        id: 5,
        name: "sphere optimum",
        passed,
        details: format!(
            "max G = {:.4} at radius {}, offset {}; ratio to G_inf = {ratio:.3} \
             within 1.6 +- 0.2: {passed}",
            best.0, best.1, best.2
        ),
    }
}

/// 6. Thin-sheet ceiling relative to the planar limit.
pub fn criterion_06_sheet_ceiling() -> CriterionReport {
    let frame = magic_frame();
    let radii = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0];
    let cfg = McConfig::single(200_000, 8, 106);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for (i, &radius) in radii.iter().enumerate() {
        let shape = SampleShape::Sheet { radius, thickness: 0.1 };
        let point_cfg = cfg.clone().with_seed(nvgeom::rng::derive_seed(cfg.seed, i as u64));
        let r = estimate_g(&shape, &frame, &point_cfg).unwrap();
        if r.g_mean > best.0 {
            best = (r.g_mean, radius);
        }
    }
    let ratio = best.0 / G_INFINITY_MAGIC;
    let passed = (ratio - 0.10).abs() <= 0.03;
    CriterionReport {
        id: 6,
        name: "sheet ceiling",
        passed,
        details: format!(
            "max G = {:.4} at radius {}; ratio to G_inf = {ratio:.4} within 0.10 +- 0.03: \
             {passed} (a 0.2-thick sheet would reach ~0.105)",
            best.0, best.1
        ),
    }
}

/// 7. Fixed-volume cylinder sweep: a single interior maximum.
pub fn criterion_07_cylinder_maximum() -> CriterionReport {
    let frame = magic_frame();
    let radii = [0.5, 0.7, 0.9, 1.1, 1.4, 1.8, 2.4, 3.2];
    let volume = std::f64::consts::PI; // pi d_nv^3
    let cfg = McConfig::single(400_000, 8, 107);
    let mut g = Vec::new();
    let mut stderr = Vec::new();
    for (i, &radius) in radii.iter().enumerate() {
        let height = volume / (std::f64::consts::PI * radius * radius);
        let shape = SampleShape::Cylinder { radius, height, lateral_offset: 0.0 };
        let point_cfg = cfg.clone().with_seed(nvgeom::rng::derive_seed(cfg.seed, i as u64));
        let r = estimate_g(&shape, &frame, &point_cfg).unwrap();
        g.push(r.g_mean);
        stderr.push(r.g_stderr);
    }
    let argmax = g
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let interior = argmax > 0 && argmax < radii.len() - 1;
    let slack = |i: usize, j: usize| 4.0 * (stderr[i].hypot(stderr[j]));
    let rises = (0..argmax).all(|i| g[i + 1] >= g[i] - slack(i, i + 1));
    let falls = (argmax..g.len() - 1).all(|i| g[i + 1] <= g[i] + slack(i, i + 1));
    let significant = g[argmax] > g[0] + slack(0, argmax)
        && g[argmax] > g[g.len() - 1] + slack(argmax, g.len() - 1);
    let r_star = radii[argmax];
    let h_star = volume / (std::f64::consts::PI * r_star * r_star);
    CriterionReport {
        id: 7,
        name: "cylinder interior max",
        passed: interior && rises && falls && significant,
        details: format!(
            "argmax at R* = {r_star} (interior: {interior}, unimodal: {}), \
             G* = {:.4}; H* = {h_star:.4}, H*/sqrt(R*) = {:.3} (reported, not asserted)",
            rises && falls && significant,
            g[argmax],
            h_star / r_star.sqrt()
        ),
    }
}

/// 8. Distribution of per-repetition estimates and the 1/sqrt(N) error law.
pub fn criterion_08_statistics() -> CriterionReport {
    let frame = magic_frame();
    let shape = cap(10.0);
    let r = estimate_g(&shape, &frame, &McConfig::single(350_000, 1000, 108)).unwrap();
    let skew = stats::skewness(&r.per_repetition);
    let kurt = stats::excess_kurtosis(&r.per_repetition);
    let normal_ok = skew.abs() < 0.1 && kurt.abs() < 0.2;

    let small = estimate_g(&shape, &frame, &McConfig::single(35_000, 200, 109)).unwrap();
    let large = estimate_g(&shape, &frame, &McConfig::single(350_000, 200, 110)).unwrap();
    let ratio = small.g_stderr / large.g_stderr;
    let expected = 10.0f64.sqrt();
    let scaling_ok = (ratio - expected).abs() <= 0.15 * expected;
    CriterionReport {
        id: 8,
        name: "estimator statistics",
        passed: normal_ok && scaling_ok,
        details: format!(
            "K = 1000 reps: skewness {skew:.3} (<0.1), excess kurtosis {kurt:.3} (<0.2): \
             {normal_ok}; stderr ratio N vs 10N = {ratio:.3} vs sqrt(10) +- 15%: {scaling_ok}"
        ),
    }
}

/// Hollow shell around the NV; integrates to zero by tracelessness.
struct Shell {
    r_inner: f64,
    r_outer: f64,
}

impl SampleRegion for Shell {
    fn volume(&self, _frame: &SensorFrame) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * (self.r_outer.powi(3) - self.r_inner.powi(3))
    }
    fn contains(&self, p: Vec3, _frame: &SensorFrame) -> bool {
        let r2 = p.norm_squared();
        r2 >= self.r_inner * self.r_inner && r2 <= self.r_outer * self.r_outer
    }
    fn sample_uniform(&self, _frame: &SensorFrame, rng: &mut RngStream) -> Result<Vec3, Error> {
        let a3 = self.r_inner.powi(3);
        let b3 = self.r_outer.powi(3);
        let r = (a3 + rng.uniform() * (b3 - a3)).cbrt();
        let z = rng.uniform_in(-1.0, 1.0);
        let phi = rng.uniform_in(0.0, std::f64::consts::TAU);
        let s = (1.0 - z * z).max(0.0).sqrt();
        Ok(Vec3::new(r * s * phi.cos(), r * s * phi.sin(), r * z))
    }
}

/// Cap annulus r_inner <= |p| <= r_outer above the surface.
struct CapAnnulus {
    r_inner: f64,
    r_outer: f64,
}

impl SampleRegion for CapAnnulus {
    fn volume(&self, frame: &SensorFrame) -> f64 {
        let d = frame.d_nv();
        let cap =
            |r: f64| std::f64::consts::PI / 3.0 * (2.0 * r.powi(3) - 3.0 * d * r * r + d.powi(3));
        cap(self.r_outer) - cap(self.r_inner)
    }
    fn contains(&self, p: Vec3, frame: &SensorFrame) -> bool {
        let r2 = p.norm_squared();
        p.z > frame.d_nv()
            && r2 >= self.r_inner * self.r_inner
            && r2 <= self.r_outer * self.r_outer
    }
    fn sample_uniform(&self, frame: &SensorFrame, rng: &mut RngStream) -> Result<Vec3, Error> {
        let d = frame.d_nv();
        let rho = (self.r_outer * self.r_outer - d * d).sqrt();
        for _ in 0..nvgeom::shape::MAX_REJECTION_DRAWS {
            let p = Vec3::new(
                rng.uniform_in(-rho, rho),
                rng.uniform_in(-rho, rho),
                rng.uniform_in(d, self.r_outer),
            );
            if self.contains(p, frame) {
                return Ok(p);
            }
        }
        Err(Error::RejectionOverflow { max_draws: nvgeom::shape::MAX_REJECTION_DRAWS })
    }
}

/// Disjoint union sampled by volume-weighted choice.
struct Union<A, B>(A, B);

impl<A: SampleRegion, B: SampleRegion> SampleRegion for Union<A, B> {
    fn volume(&self, frame: &SensorFrame) -> f64 {
        self.0.volume(frame) + self.1.volume(frame)
    }
    fn contains(&self, p: Vec3, frame: &SensorFrame) -> bool {
        self.0.contains(p, frame) || self.1.contains(p, frame)
    }
    fn sample_uniform(&self, frame: &SensorFrame, rng: &mut RngStream) -> Result<Vec3, Error> {
        let va = self.0.volume(frame);
        let vb = self.1.volume(frame);
        if rng.uniform() * (va + vb) < va {
            self.0.sample_uniform(frame, rng)
        } else {
            self.1.sample_uniform(frame, rng)
        }
    }
}

/// 9. Symmetry and property suite.
pub fn criterion_09_property_suite() -> CriterionReport {
    let frame = magic_frame();
    let mut details = String::new();
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool, note: String| {
        all_ok &= ok;
        let _ = write!(details, "{name}: {} ({note}); ", if ok { "ok" } else { "FAIL" });
    };

    // angular null on a full shell
    let shell = estimate_g_region(
        &Shell { r_inner: 1.0, r_outer: 2.0 },
        &frame,
        &McConfig::single(1_000_000, 16, 901),
    )
    .unwrap();
    check(
        "shell null",
        shell.g_mean.abs() <= 3.0 * shell.g_stderr,
        format!("{:.5} +- {:.5}", shell.g_mean, shell.g_stderr),
    );

    // scale invariance at lambda = 0.1 and 10
    let base = estimate_g(&cap(2.0), &frame, &McConfig::single(1_000_000, 16, 902)).unwrap();
    for lambda in [0.1, 10.0] {
        let scaled_frame = SensorFrame::new(magic_angle(), lambda).unwrap();
        let scaled = estimate_g(
            &cap(2.0 * lambda),
            &scaled_frame,
            &McConfig::single(1_000_000, 16, 902),
        )
        .unwrap();
        check(
            if lambda < 1.0 { "scale x0.1" } else { "scale x10" },
            (scaled.g_mean - base.g_mean).abs() <= base.g_stderr,
            format!("dG = {:.2e}", scaled.g_mean - base.g_mean),
        );
    }

    // superposition of two disjoint cap pieces
    let part_a = cap(2.0);
    let part_b = CapAnnulus { r_inner: 2.5, r_outer: 4.0 };
    let cfg = McConfig::single(1_000_000, 16, 903);
    let ga = estimate_g(&part_a, &frame, &cfg).unwrap();
    let gb = estimate_g_region(&part_b, &frame, &cfg.clone().with_seed(904)).unwrap();
    let gu = estimate_g_region(
        &Union(part_a, CapAnnulus { r_inner: 2.5, r_outer: 4.0 }),
        &frame,
        &cfg.clone().with_seed(905),
    )
    .unwrap();
    let combined =
        (gu.g_stderr.powi(2) + ga.g_stderr.powi(2) + gb.g_stderr.powi(2)).sqrt();
    check(
        "superposition",
        (gu.g_mean - ga.g_mean - gb.g_mean).abs() <= 3.0 * combined,
        format!("residual {:.2e}", gu.g_mean - ga.g_mean - gb.g_mean),
    );

    // reduced vs unreduced kernel form
    let mut rng = RngStream::derive(906, &[0]);
    let mut max_dev = 0.0f64;
    for _ in 0..10_000 {
        let gamma = rng.uniform_in(0.0, std::f64::consts::FRAC_PI_2);
        let f = SensorFrame::new(gamma, 1.0).unwrap();
        let p = Vec3::new(
            rng.uniform_in(-3.0, 3.0),
            rng.uniform_in(-3.0, 3.0),
            rng.uniform_in(-3.0, 3.0),
        );
        if p.norm() < 0.1 {
            continue;
        }
        let a = kernel(p, &f).unwrap();
        let b = kernel_unreduced(p, f.m_max_hat(), &f).unwrap();
        max_dev = max_dev.max((a - b).abs() / a.abs().max(1.0));
    }
    check("kernel reduction", max_dev <= 1e-12, format!("max dev {max_dev:.2e}"));

    // grid quadrature vs Monte-Carlo cross-oracle on the R = 5 cap
    let quad = riemann_g_axisym(&cap(5.0), &frame, 2000, 2000).unwrap();
    let mc = estimate_g(&cap(5.0), &frame, &McConfig::single(1_000_000, 16, 907)).unwrap();
    let closed = analytic::g_cap(5.0, &frame).unwrap();
    check(
        "quadrature vs MC",
        (quad - mc.g_mean).abs() / quad.abs() <= 0.02
            && (quad - closed).abs() / closed <= 0.02,
        format!("quad {quad:.4}, MC {:.4}, closed {closed:.4}", mc.g_mean),
    );

    CriterionReport { id: 9, name: "symmetry/property suite", passed: all_ok, details }
}

/// 10. Bitwise-identical CSV output across thread counts.
pub fn criterion_10_determinism() -> CriterionReport {
    let run = |threads: usize| {
        let mut cfg = RunConfig::default();
        cfg.command = "sweep".into();
        cfg.threads = threads;
        cfg.shape = Some(cap(2.0));
        cfg.sweep = Some(SweepSection {
            values: vec![2.0, 3.0, 4.0],
            offsets: None,
            fixed_volume: None,
        });
        cfg.mc.n = 100_000;
        cfg.mc.k = 4;
        cfg.mc.seed = 1010;
        commands::execute(&cfg).map(|e| e.csv)
    };
    match (run(1), run(4), run(16)) {
        (Ok(a), Ok(b), Ok(c)) => {
            let equal = a == b && b == c;
            CriterionReport {
                id: 10,
                name: "thread determinism",
                passed: equal,
                details: format!(
                    "CSV bytes identical across 1/4/16 threads: {equal} ({} bytes)",
                    a.len()
                ),
            }
        }
        (a, b, c) => CriterionReport {
            id: 10,
            name: "thread determinism",
            passed: false,
            details: format!("run errors: {:?} {:?} {:?}", a.err(), b.err(), c.err()),
        },
    }
}

/// 11. Physical prefactor within a factor 2 of the quoted 80 pT.
pub fn criterion_11_prefactor() -> CriterionReport {
    let params = PhysicalParams::water_300k_0p2t();
    let k = analytic::k_prefactor(&params);
    let k_pt = k * 1e12;
    let reference_pt = 80.0;
    let factor = reference_pt / k_pt;
    let within_factor_2 = (0.5..=2.0).contains(&factor);
    // S = K * G must be the exact product
    let g = 2.52;
    let exact_product = analytic::total_signal(k, g).to_bits() == (k * g).to_bits();
    CriterionReport {
        id: 11,
        name: "physical prefactor",
        passed: within_factor_2 && exact_product,
        details: format!(
            "computed K = {k_pt:.2} pT for water at 300 K, 0.2 T; quoted value {reference_pt} pT \
             is a factor {factor:.2} above (within 2: {within_factor_2}); S = K*G exact: \
             {exact_product}; note: the quoted 80 pT does not follow from the displayed \
             product, which evaluates to ~41 pT"
        ),
    }
}

/// 12. NV-ensemble behavior: reduction to the single NV and the sensitivity
/// ordering across geometries.
pub fn criterion_12_ensemble() -> CriterionReport {
    let frame = magic_frame();

    // (a) collapsing the layer onto retains the single-NV estimate
    let single = estimate_g(&cap(10.0), &frame, &McConfig::single(200_000, 12, 1201)).unwrap();
    let tiny = NvLayer::new(1e-3, 1.0, 1.0 - 1e-3);
    let collapsed = estimate_g(
        &cap(10.0),
        &frame,
        &McConfig::ensemble(200_000, 8, 12, 1202, tiny),
    )
    .unwrap();
    let combined = single.g_stderr.hypot(collapsed.g_stderr);
    let reduction_ok = (collapsed.g_mean - single.g_mean).abs() <= 3.0 * combined;

    // (b) full-size layer: relative change per geometry, cylinder largest
    let layer = NvLayer::new(1.0, 1.0, 0.01);
    let shapes: [(&str, SampleShape); 4] = [
        (
            "cone",
            SampleShape::Cone {
                radius: 10.0,
                theta_max: std::f64::consts::FRAC_PI_4,
                clip_to_surface: true,
            },
        ),
        ("sphere", SampleShape::Sphere { radius: 2.0, lateral_offset: 0.0 }),
        ("cylinder", SampleShape::Cylinder { radius: 1.0, height: 1.0, lateral_offset: 0.0 }),
        ("sheet", SampleShape::Sheet { radius: 1.5, thickness: 0.1 }),
    ];
    let mut changes = Vec::new();
    for (i, (name, shape)) in shapes.iter().enumerate() {
        let seed = 1210 + i as u64;
        let single = estimate_g(shape, &frame, &McConfig::single(100_000, 8, seed)).unwrap();
        let ens = estimate_g(
            shape,
            &frame,
            &McConfig::ensemble(100_000, 48, 8, seed, layer),
        )
        .unwrap();
        changes.push((*name, (ens.g_mean - single.g_mean).abs() / single.g_mean.abs()));
    }
    let cylinder_change = changes.iter().find(|(n, _)| *n == "cylinder").unwrap().1;
    let ordering_ok = changes.iter().all(|(n, c)| *n == "cylinder" || *c < cylinder_change);

    let change_list = changes
        .iter()
        .map(|(n, c)| format!("{n} {:.0}%", 100.0 * c))
        .collect::<Vec<_>>()
        .join(", ");
    CriterionReport {
        id: 12,
        name: "NV-ensemble behavior",
        passed: reduction_ok && ordering_ok,
        details: format!(
            "collapsed layer vs single NV: dG = {:.4} within 3 stderr: {reduction_ok}; \
             ensemble sensitivity [{change_list}], cylinder largest: {ordering_ok}",
            collapsed.g_mean - single.g_mean
        ),
    }
}

type Criterion = fn() -> CriterionReport;

pub const CRITERIA: [Criterion; 12] = [
    criterion_01_cap_oracle,
    criterion_02_convergence,
    criterion_03_angular_law,
    criterion_04_cone_slope,
    criterion_05_sphere_optimum,
    criterion_06_sheet_ceiling,
    criterion_07_cylinder_maximum,
    criterion_08_statistics,
    criterion_09_property_suite,
    criterion_10_determinism,
    criterion_11_prefactor,
    criterion_12_ensemble,
];

/// Run the selected criteria (1-based ids; empty = all), printing each line
/// as it completes. Returns true when everything passed.
pub fn run_selected(ids: &[usize]) -> Vec<CriterionReport> {
    let mut reports = Vec::new();
    for (index, criterion) in CRITERIA.iter().enumerate() {
        if !ids.is_empty() && !ids.contains(&(index + 1)) {
            continue;
        }
        let report = criterion();
        println!("{}", report.line());
        reports.push(report);
    }
    reports
}
