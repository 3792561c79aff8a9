//! Sample regions: the five geometries, each with exact volume, membership
//! test and uniform sampler.
//!
//! All regions live above the diamond surface `z = d_nv` (the cone can opt
//! out near its apex, see [`SampleShape::Cone`]). Direct-transform sampling is
//! used where a closed form exists (sphere, cylinder, sheet); the cap and the
//! cone sample by rejection from their tight bounding boxes.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::frame::SensorFrame;
use crate::rng::RngStream;
use crate::vec3::Vec3;

/// Upper bound on rejection draws for a single point; exceeding it means the
/// shape/bounding-box pair is malformed.
pub const MAX_REJECTION_DRAWS: u64 = 1_000_000;

fn default_clip() -> bool {
    true
}

/// A sample volume above the diamond surface.
///
/// Lengths are in the same unit as the frame's `d_nv`. Serialized with a
/// `kind` tag, e.g. `{ kind = "spherical_cap", radius = 10.0 }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleShape {
    /// Sphere of `radius` centered on the NV, truncated to `z > d_nv`: the
    /// detection region of a planar chip under a half-space of sample.
    /// Requires `radius > d_nv`.
    SphericalCap { radius: f64 },

    /// Cone with apex at the NV, axis +z, half-angle `theta_max`, spherical
    /// radial bounds `d_nv <= r <= radius`. With `clip_to_surface` (default)
    /// the region is additionally cut to `z > d_nv` so no sample point lies
    /// inside the diamond; without it the pure spherical-shell segment is
    /// kept, which dips below the surface near the apex and exists to match
    /// the closed-form integration region exactly.
    Cone {
        radius: f64,
        theta_max: f64,
        #[serde(default = "default_clip")]
        clip_to_surface: bool,
    },

    /// Full sphere tangent to the surface from above: center at
    /// `(lateral_offset, 0, d_nv + radius)`. Droplets and suspension cells.
    Sphere {
        radius: f64,
        #[serde(default)]
        lateral_offset: f64,
    },

    /// Cylinder standing on the surface, axis along +z, base center at
    /// `(lateral_offset, 0, d_nv)`. Crude adherent-cell model.
    Cylinder {
        radius: f64,
        height: f64,
        #[serde(default)]
        lateral_offset: f64,
    },

    /// Thin disk on the surface, centered above the NV: a nearly-2D polarized
    /// layer of the given `thickness` (conventionally 0.1 d_nv).
    Sheet { radius: f64, thickness: f64 },
}

impl SampleShape {
    /// Check the shape parameters against the frame's `d_nv`.
    pub fn validate(&self, frame: &SensorFrame) -> Result<(), Error> {
        let d = frame.d_nv();
        let positive = |name: &str, v: f64| -> Result<(), Error> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidShape(format!("{name} must be > 0, got {v}")))
            }
        };
        match *self {
            SampleShape::SphericalCap { radius } => {
                positive("radius", radius)?;
                if radius <= d {
                    return Err(Error::InvalidShape(format!(
                        "cap radius {radius} must exceed d_nv = {d}"
                    )));
                }
            }
            SampleShape::Cone { radius, theta_max, .. } => {
                positive("radius", radius)?;
                if !theta_max.is_finite()
                    || theta_max <= 0.0
                    || theta_max >= std::f64::consts::FRAC_PI_2
                {
                    return Err(Error::InvalidShape(format!(
                        "theta_max must lie in (0, pi/2), got {theta_max}"
                    )));
                }
                if radius <= d / theta_max.cos() {
                    return Err(Error::InvalidShape(format!(
                        "cone radius {radius} must exceed d_nv/cos(theta_max) = {}",
                        d / theta_max.cos()
                    )));
                }
            }
            SampleShape::Sphere { radius, lateral_offset } => {
                positive("radius", radius)?;
                if !lateral_offset.is_finite() {
                    return Err(Error::InvalidShape("lateral_offset must be finite".into()));
                }
            }
            SampleShape::Cylinder { radius, height, lateral_offset } => {
                positive("radius", radius)?;
                positive("height", height)?;
                if !lateral_offset.is_finite() {
                    return Err(Error::InvalidShape("lateral_offset must be finite".into()));
                }
            }
            SampleShape::Sheet { radius, thickness } => {
                positive("radius", radius)?;
                positive("thickness", thickness)?;
            }
        }
        Ok(())
    }

    /// Exact analytic volume of the region.
    pub fn volume(&self, frame: &SensorFrame) -> f64 {
        let d = frame.d_nv();
        match *self {
            SampleShape::SphericalCap { radius: r } => {
                // cap of height r - d
                std::f64::consts::PI / 3.0 * (2.0 * r.powi(3) - 3.0 * d * r * r + d.powi(3))
            }
            SampleShape::Cone { radius: r, theta_max, clip_to_surface } => {
                let c = theta_max.cos();
                if clip_to_surface {
                    // spherical sector of radius r minus the solid cone below z = d
                    let t = theta_max.tan();
                    2.0 * std::f64::consts::PI / 3.0
                        * (r.powi(3) * (1.0 - c) - d.powi(3) * t * t / 2.0)
                } else {
                    2.0 * std::f64::consts::PI / 3.0 * (r.powi(3) - d.powi(3)) * (1.0 - c)
                }
            }
            SampleShape::Sphere { radius, .. } => {
                4.0 / 3.0 * std::f64::consts::PI * radius.powi(3)
            }
            SampleShape::Cylinder { radius, height, .. } => {
                std::f64::consts::PI * radius * radius * height
            }
            SampleShape::Sheet { radius, thickness } => {
                std::f64::consts::PI * radius * radius * thickness
            }
        }
    }

    /// True iff `p` lies inside the region (boundary points may go either
    /// way).
    pub fn contains(&self, p: Vec3, frame: &SensorFrame) -> bool {
        let d = frame.d_nv();
        match *self {
            SampleShape::SphericalCap { radius: r } => {
                p.z > d && p.norm_squared() <= r * r
            }
            SampleShape::Cone { radius: r_out, theta_max, clip_to_surface } => {
                let r = p.norm();
                let in_angle = p.z >= r * theta_max.cos();
                let lower = if clip_to_surface { p.z > d } else { r >= d };
                lower && r <= r_out && in_angle
            }
            SampleShape::Sphere { radius, lateral_offset } => {
                let c = Vec3::new(lateral_offset, 0.0, d + radius);
                (p - c).norm_squared() <= radius * radius
            }
            SampleShape::Cylinder { radius, height, lateral_offset } => {
                let dx = p.x - lateral_offset;
                dx * dx + p.y * p.y <= radius * radius && p.z >= d && p.z <= d + height
            }
            SampleShape::Sheet { radius, thickness } => {
                p.x * p.x + p.y * p.y <= radius * radius && p.z >= d && p.z <= d + thickness
            }
        }
    }

    /// Tight axis-aligned bounding box `(lower, upper)`.
    pub fn bounding_box(&self, frame: &SensorFrame) -> (Vec3, Vec3) {
        let d = frame.d_nv();
        match *self {
            SampleShape::SphericalCap { radius: r } => {
                let rho = (r * r - d * d).sqrt();
                (Vec3::new(-rho, -rho, d), Vec3::new(rho, rho, r))
            }
            SampleShape::Cone { radius: r, theta_max, clip_to_surface } => {
                let rho = r * theta_max.sin();
                let z_lo = if clip_to_surface { d } else { d * theta_max.cos() };
                (Vec3::new(-rho, -rho, z_lo), Vec3::new(rho, rho, r))
            }
            SampleShape::Sphere { radius, lateral_offset } => (
                Vec3::new(lateral_offset - radius, -radius, d),
                Vec3::new(lateral_offset + radius, radius, d + 2.0 * radius),
            ),
            SampleShape::Cylinder { radius, height, lateral_offset } => (
                Vec3::new(lateral_offset - radius, -radius, d),
                Vec3::new(lateral_offset + radius, radius, d + height),
            ),
            SampleShape::Sheet { radius, thickness } => (
                Vec3::new(-radius, -radius, d),
                Vec3::new(radius, radius, d + thickness),
            ),
        }
    }

    /// True when the region is rotationally symmetric about the z-axis, which
    /// the grid-quadrature oracle requires.
    pub fn is_axisymmetric(&self) -> bool {
        match *self {
            SampleShape::SphericalCap { .. } | SampleShape::Cone { .. } | SampleShape::Sheet { .. } => true,
            SampleShape::Sphere { lateral_offset, .. }
            | SampleShape::Cylinder { lateral_offset, .. } => lateral_offset == 0.0,
        }
    }

    /// Draw one point uniformly distributed over the region.
    ///
    /// Sphere, cylinder and sheet use direct transforms. Cap and cone reject
    /// from the tight bounding box; the expected acceptance ratio is
    /// volume/box, about 0.52 for a large cap (0.44 at radius = 2 d_nv) and
    /// about a third for a 45-degree cone, so a handful of draws per point.
    pub fn sample_uniform(&self, frame: &SensorFrame, rng: &mut RngStream) -> Result<Vec3, Error> {
        let d = frame.d_nv();
        match *self {
            SampleShape::Sphere { radius, lateral_offset } => {
                let center = Vec3::new(lateral_offset, 0.0, d + radius);
                let r = radius * rng.uniform().cbrt();
                Ok(center + r * unit_direction(rng))
            }
            SampleShape::Cylinder { radius, height, lateral_offset } => {
                let p = disk_point(radius, rng);
                Ok(Vec3::new(lateral_offset + p.0, p.1, d + height * rng.uniform()))
            }
            SampleShape::Sheet { radius, thickness } => {
                let p = disk_point(radius, rng);
                Ok(Vec3::new(p.0, p.1, d + thickness * rng.uniform()))
            }
            SampleShape::SphericalCap { .. } | SampleShape::Cone { .. } => {
                let (lo, hi) = self.bounding_box(frame);
                for _ in 0..MAX_REJECTION_DRAWS {
                    let p = Vec3::new(
                        rng.uniform_in(lo.x, hi.x),
                        rng.uniform_in(lo.y, hi.y),
                        rng.uniform_in(lo.z, hi.z),
                    );
                    if self.contains(p, frame) {
                        return Ok(p);
                    }
                }
                Err(Error::RejectionOverflow { max_draws: MAX_REJECTION_DRAWS })
            }
        }
    }
}

/// Uniform direction on the unit sphere.
#[inline]
fn unit_direction(rng: &mut RngStream) -> Vec3 {
    let z = rng.uniform_in(-1.0, 1.0);
    let phi = rng.uniform_in(0.0, std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

/// Uniform point in a disk of the given radius.
#[inline]
fn disk_point(radius: f64, rng: &mut RngStream) -> (f64, f64) {
    let rho = radius * rng.uniform().sqrt();
    let phi = rng.uniform_in(0.0, std::f64::consts::TAU);
    (rho * phi.cos(), rho * phi.sin())
}

/// Anything the Monte-Carlo estimator can integrate over: a volume, a
/// membership test and a uniform sampler.
///
/// [`SampleShape`] implements this; tests add synthetic regions (shells,
/// disjoint unions) that are not physical sample shapes.
pub trait SampleRegion: Sync {
    fn volume(&self, frame: &SensorFrame) -> f64;
    fn contains(&self, p: Vec3, frame: &SensorFrame) -> bool;
    fn sample_uniform(&self, frame: &SensorFrame, rng: &mut RngStream) -> Result<Vec3, Error>;
}

impl SampleRegion for SampleShape {
    fn volume(&self, frame: &SensorFrame) -> f64 {
        SampleShape::volume(self, frame)
    }
    fn contains(&self, p: Vec3, frame: &SensorFrame) -> bool {
        SampleShape::contains(self, p, frame)
    }
    fn sample_uniform(&self, frame: &SensorFrame, rng: &mut RngStream) -> Result<Vec3, Error> {
        SampleShape::sample_uniform(self, frame, rng)
    }
}
