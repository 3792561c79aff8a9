use crate::error::Error;
use crate::vec3::Vec3;

/// Angle between the NV axis and the surface normal for a <100>-cut diamond,
/// `atan(sqrt(2))` = 54.7356...deg, stored exactly rather than as a rounded
/// degree value.
pub fn magic_angle() -> f64 {
    std::f64::consts::SQRT_2.atan()
}

/// Sensor geometry: NV orientation and depth, with the derived unit vectors.
///
/// Coordinate convention: the NV center sits at the origin, the diamond
/// surface is the plane `z = d_nv` with outward normal +z, and the sample
/// occupies `z > d_nv`. The bias field and NV axis direction is
/// `b0_hat = (sin gamma, 0, cos gamma)`.
///
/// `m_max_hat` is the sample-spin orientation of maximum signal amplitude: a
/// unit vector orthogonal to `b0_hat` in the plane spanned by `b0_hat` and the
/// surface normal. Of the two such vectors we take
/// `(-cos gamma, 0, sin gamma)`, the choice that makes the geometry factor of
/// the surface-truncated sphere positive (the opposite choice flips the sign
/// of every kernel value and geometry factor).
///
/// Frames are immutable after construction and cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    gamma: f64,
    d_nv: f64,
    b0_hat: Vec3,
    m_max_hat: Vec3,
}

impl SensorFrame {
    /// Build a frame from the NV-axis angle `gamma` (radians, measured from
    /// the surface normal, `0 <= gamma <= pi/2`) and the NV depth `d_nv > 0`.
    pub fn new(gamma: f64, d_nv: f64) -> Result<Self, Error> {
        if !gamma.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&gamma) {
            return Err(Error::InvalidFrame(format!(
                "gamma must lie in [0, pi/2], got {gamma}"
            )));
        }
        if !d_nv.is_finite() || d_nv <= 0.0 {
            return Err(Error::InvalidFrame(format!("d_nv must be > 0, got {d_nv}")));
        }
        let (sin_g, cos_g) = gamma.sin_cos();
        Ok(SensorFrame {
            gamma,
            d_nv,
            b0_hat: Vec3::new(sin_g, 0.0, cos_g),
            m_max_hat: Vec3::new(-cos_g, 0.0, sin_g),
        })
    }

    /// Frame at the <100>-cut magic angle with the given depth.
    pub fn magic(d_nv: f64) -> Result<Self, Error> {
        SensorFrame::new(magic_angle(), d_nv)
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn d_nv(&self) -> f64 {
        self.d_nv
    }

    #[inline]
    pub fn b0_hat(&self) -> Vec3 {
        self.b0_hat
    }

    #[inline]
    pub fn m_max_hat(&self) -> Vec3 {
        self.m_max_hat
    }

    /// `sin(gamma) * cos(gamma)`, the angular factor common to all closed
    /// forms.
    #[inline]
    pub fn sin_cos_gamma(&self) -> f64 {
        self.b0_hat.x * self.b0_hat.z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_and_orthogonal() {
        for gamma in [0.0, 0.3, magic_angle(), 1.0, std::f64::consts::FRAC_PI_2] {
            let f = SensorFrame::new(gamma, 1.0).unwrap();
            assert!(f.b0_hat().is_unit(1e-12));
            assert!(f.m_max_hat().is_unit(1e-12));
            assert!(f.b0_hat().dot(f.m_max_hat()).abs() <= 1e-12);
        }
    }

    #[test]
    fn magic_angle_is_atan_sqrt2() {
        let g = magic_angle();
        assert!((g.tan() - std::f64::consts::SQRT_2).abs() < 1e-15);
        // sin*cos = sqrt(2)/3 there
        let f = SensorFrame::magic(1.0).unwrap();
        assert!((f.sin_cos_gamma() - std::f64::consts::SQRT_2 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SensorFrame::new(-0.1, 1.0).is_err());
        assert!(SensorFrame::new(1.6, 1.0).is_err());
        assert!(SensorFrame::new(f64::NAN, 1.0).is_err());
        assert!(SensorFrame::new(0.5, 0.0).is_err());
        assert!(SensorFrame::new(0.5, -2.0).is_err());
    }
}
