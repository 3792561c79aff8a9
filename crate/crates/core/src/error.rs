use thiserror::Error;

/// Errors produced by geometry, sampling and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The separation vector between a sample spin and an NV center is zero;
    /// the dipole kernel is undefined there.
    #[error("zero-length separation: sample spin coincides with the NV center")]
    ZeroSeparation,

    #[error("invalid sensor frame: {0}")]
    InvalidFrame(String),

    #[error("invalid sample shape: {0}")]
    InvalidShape(String),

    #[error("invalid Monte-Carlo configuration: {0}")]
    InvalidConfig(String),

    /// A rejection sampler failed to produce a point; the shape is malformed
    /// with respect to its bounding box.
    #[error("rejection sampling exceeded {max_draws} draws for a single point")]
    RejectionOverflow { max_draws: u64 },

    /// More than 0.01% of NV-sample pairs fell inside the proximity cutoff
    /// `r_min`; the 1/r^3 kernel makes such a run statistically meaningless.
    #[error("proximity failure: {skipped} of {total} pairs closer than r_min (limit is 0.01%)")]
    Proximity { skipped: u64, total: u64 },

    /// Grid quadrature requires a shape that is rotationally symmetric about
    /// the z-axis.
    #[error("shape is not axisymmetric about the z-axis")]
    NotAxisymmetric,

    #[error("invalid field-map grid: {0}")]
    InvalidGrid(String),
}
