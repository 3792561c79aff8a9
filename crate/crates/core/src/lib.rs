//! Geometry factors for NV-center NMR sensing.
//!
//! An NV center in diamond measures the projection, along its own axis, of the
//! dipolar field produced by precessing nuclear spins in a sample volume above
//! the diamond surface. For a uniformly polarized sample the total signal
//! factorizes as `S = K * G`: a field-scale prefactor `K` set by spin density
//! and thermal polarization ([`analytic::k_prefactor`]), and a dimensionless
//! geometry factor
//!
//! ```text
//! G = 3 * integral over sample of (r_hat . b0)(r_hat . m_max) / r^3 dV
//! ```
//!
//! that depends only on the sample region and the sensor orientation. This
//! crate provides:
//!
//! * [`kernel`]: the per-spin dipole-projection integrand,
//! * [`SampleShape`]: the sample regions (surface-truncated sphere, cone,
//!   tangent sphere, cylinder, thin sheet) with exact volumes, membership
//!   tests and uniform samplers,
//! * [`analytic`]: closed-form geometry factors and the physical prefactor,
//! * [`mc`]: a deterministic, parallel Monte-Carlo estimator of `G` for a
//!   single NV or an NV-ensemble layer,
//! * [`fieldmap`]: signed sensitivity maps on a plane and an independent
//!   grid-quadrature oracle for axisymmetric regions.
//!
//! Lengths are expressed in units of the NV depth `d_nv` unless stated
//! otherwise; `G` is invariant under a common rescaling of all lengths.

pub mod analytic;
pub mod error;
pub mod fieldmap;
pub mod frame;
pub mod kernel;
pub mod mc;
pub mod rng;
pub mod shape;
pub mod stats;
pub mod vec3;

pub use error::Error;
pub use fieldmap::{quadrant_signature, render, riemann_g_axisym, FieldMap, GridSpec};
pub use frame::{magic_angle, SensorFrame};
pub use kernel::{kernel, kernel_azimuthal_integral, kernel_unreduced};
pub use mc::{estimate_g, sweep, McConfig, McResult, NvLayer, SweepPoint};
pub use rng::RngStream;
pub use shape::{SampleRegion, SampleShape};
pub use vec3::Vec3;

/// Convenience result type used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
