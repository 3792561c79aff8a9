//! The per-spin dipole-projection integrand.
//!
//! A spin at position `p` relative to the NV center contributes
//! `3 (r_hat . b0)(r_hat . m_max) / r^3` to the geometry factor, where
//! `r = |p|`. The expression is the projection onto `b0_hat` of the dipole
//! field of a spin oriented along `m_max_hat`, reduced using the
//! orthogonality of the two frame vectors. It is even in `r_hat`, traceless
//! (zero average over directions) and falls off as `1/r^3`.

use crate::error::Error;
use crate::frame::SensorFrame;
use crate::vec3::Vec3;

/// Kernel without the zero-length check, for hot loops that guarantee
/// `|r_vec| > 0` themselves.
#[inline(always)]
pub(crate) fn kernel_unchecked(r_vec: Vec3, frame: &SensorFrame) -> f64 {
    let r2 = r_vec.norm_squared();
    let rb = r_vec.dot(frame.b0_hat());
    let rm = r_vec.dot(frame.m_max_hat());
    // 3 (r.b)(r.m) / r^5 == 3 (r_hat.b)(r_hat.m) / r^3
    3.0 * rb * rm / (r2 * r2 * r2.sqrt())
}

/// Dipole-projection kernel `3 (r_hat . b0)(r_hat . m_max) / r^3`.
///
/// `r_vec` is the separation between the sample spin and the NV center; the
/// kernel is even in `r_vec` so the direction of the separation does not
/// matter. Fails with [`Error::ZeroSeparation`] when `r_vec` is the zero
/// vector.
pub fn kernel(r_vec: Vec3, frame: &SensorFrame) -> Result<f64, Error> {
    if r_vec.norm_squared() == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    Ok(kernel_unchecked(r_vec, frame))
}

/// Unreduced projection `[3 r_hat (r_hat . m_hat) - m_hat] . b0 / r^3` for an
/// arbitrary spin orientation `m_hat` (|m_hat| = 1).
///
/// For `m_hat = frame.m_max_hat()` this equals [`kernel`]; the reduced form
/// drops the `m_hat . b0` term, which vanishes by orthogonality. Kept as the
/// independent route for testing that reduction.
pub fn kernel_unreduced(r_vec: Vec3, m_hat: Vec3, frame: &SensorFrame) -> Result<f64, Error> {
    let r2 = r_vec.norm_squared();
    if r2 == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    debug_assert!(m_hat.is_unit(1e-9), "m_hat must be a unit vector");
    let r = r2.sqrt();
    let r_hat = r_vec * (1.0 / r);
    let field_dir = 3.0 * r_hat.dot(m_hat) * r_hat - m_hat;
    Ok(field_dir.dot(frame.b0_hat()) / (r2 * r))
}

/// Integral of the kernel over the azimuthal angle at fixed cylindrical
/// coordinates `(rho, z)`:
///
/// ```text
/// integral over phi of kernel((rho cos phi, rho sin phi, z)) d phi
///     = 3 pi sin(gamma) cos(gamma) (2 z^2 - rho^2) / r^5,   r^2 = rho^2 + z^2
/// ```
///
/// This is the building block of the grid-quadrature oracle for axisymmetric
/// sample regions ([`crate::fieldmap::riemann_g_axisym`]); it integrates the
/// same kernel by a deterministic route independent of Monte-Carlo sampling.
pub fn kernel_azimuthal_integral(rho: f64, z: f64, frame: &SensorFrame) -> Result<f64, Error> {
    let r2 = rho * rho + z * z;
    if r2 == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    let r5 = r2 * r2 * r2.sqrt();
    Ok(3.0 * std::f64::consts::PI * frame.sin_cos_gamma() * (2.0 * z * z - rho * rho) / r5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::magic_angle;

    fn magic() -> SensorFrame {
        SensorFrame::magic(1.0).unwrap()
    }

    #[test]
    fn zero_separation_is_an_error() {
        assert_eq!(kernel(Vec3::ZERO, &magic()), Err(Error::ZeroSeparation));
        assert_eq!(
            kernel_unreduced(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), &magic()),
            Err(Error::ZeroSeparation)
        );
    }

    #[test]
    fn vanishes_along_frame_axes() {
        // r parallel to b0: r_hat.m_max = 0; r along y: both dots vanish.
        for gamma in [0.0, 0.4, magic_angle(), 1.2] {
            let f = SensorFrame::new(gamma, 1.0).unwrap();
            assert!(kernel(2.5 * f.b0_hat(), &f).unwrap().abs() <= 1e-12);
            assert_eq!(kernel(Vec3::new(0.0, 1.0, 0.0), &f).unwrap(), 0.0);
        }
    }

    #[test]
    fn value_directly_above_the_nv() {
        // At (0,0,1): 3 cos(g) sin(g); equals sqrt(2) at the magic angle.
        // Positive with this crate's m_max_hat orientation.
        let k = kernel(Vec3::new(0.0, 0.0, 1.0), &magic()).unwrap();
        assert!((k - std::f64::consts::SQRT_2).abs() < 1e-12, "k = {k}");
    }

    #[test]
    fn unreduced_axial_and_equatorial_dipole_factors() {
        // m parallel to b0 at gamma = 0: classic 2/r^3 on-axis, -1/r^3 equatorial.
        let f = SensorFrame::new(0.0, 1.0).unwrap();
        let b = f.b0_hat();
        let axial = kernel_unreduced(Vec3::new(0.0, 0.0, 1.0), b, &f).unwrap();
        assert!((axial - 2.0).abs() < 1e-12);
        let equatorial = kernel_unreduced(Vec3::new(1.0, 0.0, 0.0), b, &f).unwrap();
        assert!((equatorial + 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_equals_unreduced_for_m_max() {
        let f = SensorFrame::new(0.83, 1.0).unwrap();
        for p in [
            Vec3::new(1.0, 2.0, 3.0),
            Vec3::new(-0.3, 0.7, 1.9),
            Vec3::new(4.0, -1.0, 0.2),
        ] {
            let a = kernel(p, &f).unwrap();
            let b = kernel_unreduced(p, f.m_max_hat(), &f).unwrap();
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn scale_contravariance_and_point_symmetry() {
        let f = magic();
        let p = Vec3::new(0.7, -1.1, 2.2);
        let k = kernel(p, &f).unwrap();
        for lambda in [0.5, 2.0, 10.0] {
            let scaled = kernel(p * lambda, &f).unwrap();
            assert!((scaled - k / (lambda * lambda * lambda)).abs() <= 1e-12 * k.abs().max(1.0));
        }
        assert_eq!(kernel(-p, &f).unwrap(), k);
    }

    #[test]
    fn azimuthal_integral_matches_direct_quadrature() {
        let f = SensorFrame::new(0.65, 1.0).unwrap();
        for (rho, z) in [(0.5, 1.3), (2.0, 1.01), (1.0, -0.4), (3.0, 2.0)] {
            let n = 20_000;
            let mut sum = 0.0;
            for i in 0..n {
                let phi = (i as f64 + 0.5) / n as f64 * std::f64::consts::TAU;
                let p = Vec3::new(rho * phi.cos(), rho * phi.sin(), z);
                sum += kernel(p, &f).unwrap();
            }
            let direct = sum / n as f64 * std::f64::consts::TAU;
            let closed = kernel_azimuthal_integral(rho, z, &f).unwrap();
            assert!(
                (direct - closed).abs() <= 1e-9 * closed.abs().max(1.0),
                "rho={rho} z={z}: {direct} vs {closed}"
            );
        }
    }

    #[test]
    fn gamma_reflection_identity() {
        // Swapping x and z while replacing gamma by pi/2 - gamma negates the
        // kernel; for z-axisymmetric regions the geometry factor is still
        // symmetric because it carries the sin*cos prefactor.
        let gamma = 0.4;
        let f = SensorFrame::new(gamma, 1.0).unwrap();
        let g = SensorFrame::new(std::f64::consts::FRAC_PI_2 - gamma, 1.0).unwrap();
        for p in [Vec3::new(0.3, 1.0, 2.0), Vec3::new(-1.0, 0.5, 0.9)] {
            let swapped = Vec3::new(p.z, p.y, p.x);
            let a = kernel(p, &f).unwrap();
            let b = kernel(swapped, &g).unwrap();
            assert!((a + b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}
