//! Synthetic sample regions used only by tests: a full spherical shell around
//! the NV (angular-null check) and a disjoint union (superposition check).

use nvgeom::{Error, RngStream, SampleRegion, SensorFrame, Vec3};

/// Hollow shell `r_inner <= |p| <= r_outer` over the full solid angle,
/// centered on the NV. Not a physical sample (it crosses the diamond), but
/// the dipole kernel integrates to zero over it.
pub struct Shell {
    pub r_inner: f64,
    pub r_outer: f64,
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

/// Union of two disjoint regions; samples by volume-weighted choice.
pub struct DisjointUnion<A, B> {
    pub a: A,
    pub b: B,
}

impl<A: SampleRegion, B: SampleRegion> SampleRegion for DisjointUnion<A, B> {
    fn volume(&self, frame: &SensorFrame) -> f64 {
        self.a.volume(frame) + self.b.volume(frame)
    }

    fn contains(&self, p: Vec3, frame: &SensorFrame) -> bool {
        self.a.contains(p, frame) || self.b.contains(p, frame)
    }

    fn sample_uniform(&self, frame: &SensorFrame, rng: &mut RngStream) -> Result<Vec3, Error> {
        let va = self.a.volume(frame);
        let vb = self.b.volume(frame);
        if rng.uniform() * (va + vb) < va {
            self.a.sample_uniform(frame, rng)
        } else {
            self.b.sample_uniform(frame, rng)
        }
    }
}

/// Spherical-cap annulus: cap(r_outer) minus cap(r_inner), disjoint from any
/// cap with radius below r_inner.
pub struct CapAnnulus {
    pub r_inner: f64,
    pub r_outer: f64,
}

impl SampleRegion for CapAnnulus {
    fn volume(&self, frame: &SensorFrame) -> f64 {
        let d = frame.d_nv();
        let cap = |r: f64| {
            std::f64::consts::PI / 3.0 * (2.0 * r.powi(3) - 3.0 * d * r * r + d.powi(3))
        };
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
        let rho_max = (self.r_outer * self.r_outer - d * d).sqrt();
        for _ in 0..nvgeom::shape::MAX_REJECTION_DRAWS {
            let p = Vec3::new(
                rng.uniform_in(-rho_max, rho_max),
                rng.uniform_in(-rho_max, rho_max),
                rng.uniform_in(d, self.r_outer),
            );
            if self.contains(p, frame) {
                return Ok(p);
            }
        }
        Err(Error::RejectionOverflow { max_draws: nvgeom::shape::MAX_REJECTION_DRAWS })
    }
}
