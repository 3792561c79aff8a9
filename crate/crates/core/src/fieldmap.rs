//! Signed sensitivity maps and grid quadrature.
//!
//! [`render`] rasterizes the kernel on a plane (default y = 0, the plane
//! containing `b0_hat` and the surface normal) to show which sample locations
//! add to or cancel the NV signal: four alternating-sign sectors separated by
//! the kernel zero planes `r . b0 = 0` and `r . m_max = 0`.
//!
//! [`riemann_g_axisym`] integrates the azimuthally pre-integrated kernel on a
//! 2-D (rho, z) grid. It is a deterministic second oracle for the
//! Monte-Carlo engine on rotationally symmetric regions.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::frame::SensorFrame;
use crate::kernel::{kernel_azimuthal_integral, kernel_unchecked};
use crate::shape::SampleShape;
use crate::stats::{abs_percentile, CompensatedSum};
use crate::vec3::Vec3;

/// Rectangular cell grid on the y = 0 plane; values live at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub nx: usize,
    pub nz: usize,
}

impl GridSpec {
    /// Symmetric square grid spanning `[-half, half]` on both axes.
    pub fn centered(half: f64, n: usize) -> Self {
        GridSpec { x_min: -half, x_max: half, z_min: -half, z_max: half, nx: n, nz: n }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.nx < 2 || self.nz < 2 {
            return Err(Error::InvalidGrid("need at least 2 cells per axis".into()));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(Error::InvalidGrid("x range must be finite and non-empty".into()));
        }
        if !(self.z_min.is_finite() && self.z_max.is_finite() && self.z_max > self.z_min) {
            return Err(Error::InvalidGrid("z range must be finite and non-empty".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn x_at(&self, ix: usize) -> f64 {
        self.x_min + (ix as f64 + 0.5) * (self.x_max - self.x_min) / self.nx as f64
    }

    #[inline]
    pub fn z_at(&self, iz: usize) -> f64 {
        self.z_min + (iz as f64 + 0.5) * (self.z_max - self.z_min) / self.nz as f64
    }
}

/// Cell classification: regular sample-side cell, inside the diamond
/// (`z < d_nv`, kernel still evaluated, flagged for masking), or the single
/// invalid cell whose center coincides with the NV at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Sample,
    Diamond,
    Origin,
}

/// Rendered sensitivity map.
#[derive(Debug, Clone)]
pub struct FieldMap {
    spec: GridSpec,
    frame: SensorFrame,
    values: Vec<f64>,
    kinds: Vec<CellKind>,
}

/// Header describing a rendered map, serialized alongside the CSV data.
#[derive(Debug, Clone, Serialize)]
pub struct FieldMapMeta {
    pub schema: &'static str,
    pub gamma_rad: f64,
    pub gamma_deg: f64,
    pub d_nv: f64,
    pub grid: GridSpec,
    /// 99.5th percentile of |value| over valid cells: the recommended color
    /// clamp. Raw values in the CSV are never clamped.
    pub clamp_abs: f64,
    pub diamond_cells: usize,
}

/// Rasterize the kernel at the cell centers of `spec`.
///
/// Cells below the surface are flagged [`CellKind::Diamond`] but still carry
/// kernel values; a cell whose center is exactly the origin is flagged
/// [`CellKind::Origin`] and carries NaN.
pub fn render(frame: &SensorFrame, spec: &GridSpec) -> Result<FieldMap, Error> {
    spec.validate()?;
    let d = frame.d_nv();
    let nx = spec.nx;
    let nz = spec.nz;
    let mut values = vec![0.0; nx * nz];
    let mut kinds = vec![CellKind::Sample; nx * nz];

    values
        .par_chunks_mut(nz)
        .zip(kinds.par_chunks_mut(nz))
        .enumerate()
        .for_each(|(ix, (vrow, krow))| {
            let x = spec.x_at(ix);
            for iz in 0..nz {
                let z = spec.z_at(iz);
                if x == 0.0 && z == 0.0 {
                    vrow[iz] = f64::NAN;
                    krow[iz] = CellKind::Origin;
                    continue;
                }
                vrow[iz] = kernel_unchecked(Vec3::new(x, 0.0, z), frame);
                krow[iz] = if z < d { CellKind::Diamond } else { CellKind::Sample };
            }
        });

    Ok(FieldMap { spec: *spec, frame: *frame, values, kinds })
}

impl FieldMap {
    #[inline]
    fn index(&self, ix: usize, iz: usize) -> usize {
        ix * self.spec.nz + iz
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn frame(&self) -> &SensorFrame {
        &self.frame
    }

    pub fn value(&self, ix: usize, iz: usize) -> f64 {
        self.values[self.index(ix, iz)]
    }

    pub fn kind(&self, ix: usize, iz: usize) -> CellKind {
        self.kinds[self.index(ix, iz)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sum of values over cells selected by `keep`; used for symmetry checks.
    pub fn sum_where<F: Fn(f64, f64, CellKind) -> bool>(&self, keep: F) -> f64 {
        let mut sum = CompensatedSum::default();
        for ix in 0..self.spec.nx {
            for iz in 0..self.spec.nz {
                let k = self.kind(ix, iz);
                if k != CellKind::Origin && keep(self.spec.x_at(ix), self.spec.z_at(iz), k) {
                    sum.add(self.value(ix, iz));
                }
            }
        }
        sum.total()
    }

    pub fn metadata(&self) -> FieldMapMeta {
        let valid: Vec<f64> = self
            .values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        FieldMapMeta {
            schema: "nvgeom.fieldmap.v1",
            gamma_rad: self.frame.gamma(),
            gamma_deg: self.frame.gamma().to_degrees(),
            d_nv: self.frame.d_nv(),
            grid: self.spec,
            clamp_abs: abs_percentile(&valid, 99.5),
            diamond_cells: self.kinds.iter().filter(|k| **k == CellKind::Diamond).count(),
        }
    }

    /// Write `x,z,value,masked` rows (raw, unclamped values; 17 significant
    /// digits). `masked` is 1 for diamond and origin cells.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,z,value,masked")?;
        for ix in 0..self.spec.nx {
            for iz in 0..self.spec.nz {
                let kind = self.kind(ix, iz);
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{}",
                    self.spec.x_at(ix),
                    self.spec.z_at(iz),
                    self.value(ix, iz),
                    u8::from(kind != CellKind::Sample),
                )?;
            }
        }
        Ok(())
    }
}

/// One connected same-sign region of a map.
#[derive(Debug, Clone, PartialEq)]
pub struct SignRegion {
    pub sign: i8,
    pub cell_count: usize,
    /// Start of the minimal arc (degrees from the +z axis toward +x, in
    /// (-180, 180]) covering the region's cell directions.
    pub arc_start_deg: f64,
    pub arc_span_deg: f64,
}

/// Sign-region summary of a rendered map.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrantSignature {
    /// Regions ordered by arc start angle.
    pub regions: Vec<SignRegion>,
    /// True when every nonzero cell has the same sign.
    pub degenerate: bool,
}

/// Partition the map into connected regions of equal sign (4-neighbor
/// connectivity over all cells, diamond included, since the kernel is defined
/// there too) and summarize each region's angular extent around the origin.
///
/// For 0 < gamma < 90 degrees a grid centered on the origin shows exactly
/// four alternating regions bounded by the kernel zero planes.
pub fn quadrant_signature(map: &FieldMap) -> QuadrantSignature {
    let nx = map.spec.nx;
    let nz = map.spec.nz;
    let sign_of = |ix: usize, iz: usize| -> i8 {
        if map.kind(ix, iz) == CellKind::Origin {
            return 0;
        }
        let v = map.value(ix, iz);
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };

    let mut visited = vec![false; nx * nz];
    let mut regions = Vec::new();
    for ix in 0..nx {
        for iz in 0..nz {
            let start = ix * nz + iz;
            if visited[start] || sign_of(ix, iz) == 0 {
                continue;
            }
            let sign = sign_of(ix, iz);
            let mut stack = vec![(ix, iz)];
            visited[start] = true;
            let mut angles = Vec::new();
            let mut cell_count = 0usize;
            while let Some((cx, cz)) = stack.pop() {
                cell_count += 1;
                angles.push(map.spec.x_at(cx).atan2(map.spec.z_at(cz)).to_degrees());
                let mut push = |px: usize, pz: usize| {
                    let idx = px * nz + pz;
                    if !visited[idx] && sign_of(px, pz) == sign {
                        visited[idx] = true;
                        stack.push((px, pz));
                    }
                };
                if cx > 0 {
                    push(cx - 1, cz);
                }
                if cx + 1 < nx {
                    push(cx + 1, cz);
                }
                if cz > 0 {
                    push(cx, cz - 1);
                }
                if cz + 1 < nz {
                    push(cx, cz + 1);
                }
            }
            let (arc_start_deg, arc_span_deg) = minimal_arc(&mut angles);
            regions.push(SignRegion { sign, cell_count, arc_start_deg, arc_span_deg });
        }
    }
    regions.sort_by(|a, b| a.arc_start_deg.partial_cmp(&b.arc_start_deg).unwrap());
    let degenerate = regions.iter().map(|r| r.sign).collect::<std::collections::HashSet<_>>().len() < 2;
    QuadrantSignature { regions, degenerate }
}

/// Minimal circular arc covering a set of angles (degrees): sort, find the
/// largest gap, the arc is everything else.
fn minimal_arc(angles: &mut [f64]) -> (f64, f64) {
    if angles.len() == 1 {
        return (angles[0], 0.0);
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut largest_gap = 360.0 - (angles[angles.len() - 1] - angles[0]);
    let mut start = angles[0];
    for w in angles.windows(2) {
        let gap = w[1] - w[0];
        if gap > largest_gap {
            largest_gap = gap;
            start = w[1];
        }
    }
    (start, 360.0 - largest_gap)
}

/// Integrate the kernel over an axisymmetric shape on an `n_rho x n_z`
/// midpoint grid in the (rho, z) half-plane, using the closed-form azimuthal
/// integral per cell. Deterministic oracle for the Monte-Carlo estimator;
/// refuses shapes with a lateral offset.
pub fn riemann_g_axisym(
    shape: &SampleShape,
    frame: &SensorFrame,
    n_rho: usize,
    n_z: usize,
) -> Result<f64, Error> {
    if !shape.is_axisymmetric() {
        return Err(Error::NotAxisymmetric);
    }
    shape.validate(frame)?;
    if n_rho < 2 || n_z < 2 {
        return Err(Error::InvalidGrid("need at least 2 cells per axis".into()));
    }
    let (lo, hi) = shape.bounding_box(frame);
    let rho_max = hi.x;
    let d_rho = rho_max / n_rho as f64;
    let d_z = (hi.z - lo.z) / n_z as f64;

    let strip_sums: Vec<f64> = (0..n_rho)
        .into_par_iter()
        .map(|i| {
            let rho = (i as f64 + 0.5) * d_rho;
            let mut sum = CompensatedSum::default();
            for j in 0..n_z {
                let z = lo.z + (j as f64 + 0.5) * d_z;
                if shape.contains(Vec3::new(rho, 0.0, z), frame) {
                    // kernel is finite on the whole grid: shapes exclude the origin
                    let kbar = kernel_azimuthal_integral(rho, z, frame)
                        .expect("axisymmetric shapes exclude the origin");
                    sum.add(kbar * rho);
                }
            }
            sum.total()
        })
        .collect();

    let mut total = CompensatedSum::default();
    for s in strip_sums {
        total.add(s);
    }
    Ok(total.total() * d_rho * d_z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::frame::magic_angle;

    fn magic() -> SensorFrame {
        SensorFrame::magic(1.0).unwrap()
    }

    #[test]
    fn cell_above_the_nv_carries_the_kernel_value() {
        // 3 x 2 grid with a cell center exactly at (0, 1)
        let spec = GridSpec { x_min: -1.5, x_max: 1.5, z_min: 0.5, z_max: 2.5, nx: 3, nz: 2 };
        let map = render(&magic(), &spec).unwrap();
        assert_eq!(map.spec().x_at(1), 0.0);
        assert_eq!(map.spec().z_at(0), 1.0);
        let v = map.value(1, 0);
        assert!((v - std::f64::consts::SQRT_2).abs() < 1e-12, "v = {v}");
        assert_eq!(map.kind(1, 0), CellKind::Sample);
    }

    #[test]
    fn diamond_cells_are_masked_not_zeroed_and_origin_is_invalid() {
        let spec = GridSpec::centered(2.5, 5); // unit spacing, centers -2..2 include (0,0)
        let map = render(&magic(), &spec).unwrap();
        assert_eq!(map.kind(2, 2), CellKind::Origin);
        assert!(map.value(2, 2).is_nan());
        // a below-surface cell keeps its kernel value
        let below = map.value(2, 0); // (0, -2)
        assert_eq!(map.kind(2, 0), CellKind::Diamond);
        assert!(below.is_finite() && below != 0.0);
        let meta = map.metadata();
        assert!(meta.clamp_abs > 0.0);
        assert!(meta.diamond_cells > 0);
    }

    #[test]
    fn gamma_zero_and_ninety_cancel_over_x_symmetric_regions() {
        for gamma in [0.0, std::f64::consts::FRAC_PI_2] {
            let frame = SensorFrame::new(gamma, 1.0).unwrap();
            let spec = GridSpec { x_min: -3.0, x_max: 3.0, z_min: 1.0, z_max: 4.0, nx: 60, nz: 30 };
            let map = render(&frame, &spec).unwrap();
            let total = map.sum_where(|_, _, k| k == CellKind::Sample);
            let cells = (spec.nx * spec.nz) as f64;
            assert!(total.abs() <= 1e-9 * cells, "gamma {gamma}: sum {total}");
        }
    }

    #[test]
    fn four_alternating_sign_regions_at_intermediate_gamma() {
        let spec = GridSpec::centered(5.0, 200);
        for gamma_deg in [30.0, 45.0, magic_angle().to_degrees()] {
            let frame = SensorFrame::new(f64::to_radians(gamma_deg), 1.0).unwrap();
            let sig = quadrant_signature(&render(&frame, &spec).unwrap());
            assert_eq!(sig.regions.len(), 4, "gamma {gamma_deg}: {sig:?}");
            assert!(!sig.degenerate);
            let signs: Vec<i8> = sig.regions.iter().map(|r| r.sign).collect();
            assert!(signs.windows(2).all(|w| w[0] != w[1]), "not alternating: {signs:?}");
            for r in &sig.regions {
                assert!((r.arc_span_deg - 90.0).abs() < 6.0, "span {}", r.arc_span_deg);
            }
        }
    }

    #[test]
    fn region_boundaries_sit_on_the_kernel_zero_planes() {
        // at gamma = 45 deg the zero planes cut the xz-plane at 45 and 135 deg
        let spec = GridSpec::centered(5.0, 400);
        let frame = SensorFrame::new(std::f64::consts::FRAC_PI_4, 1.0).unwrap();
        let sig = quadrant_signature(&render(&frame, &spec).unwrap());
        let expected_starts = [-135.0, -45.0, 45.0, 135.0];
        for (region, expected) in sig.regions.iter().zip(expected_starts) {
            assert!(
                (region.arc_start_deg - expected).abs() < 2.0,
                "start {} vs {expected}",
                region.arc_start_deg
            );
        }
    }

    #[test]
    fn map_entirely_inside_one_lobe_is_degenerate() {
        let spec = GridSpec { x_min: 0.2, x_max: 1.0, z_min: 3.0, z_max: 4.0, nx: 20, nz: 20 };
        let sig = quadrant_signature(&render(&magic(), &spec).unwrap());
        assert!(sig.degenerate);
        assert_eq!(sig.regions.len(), 1);
        assert_eq!(sig.regions[0].sign, 1);
    }

    #[test]
    fn grid_quadrature_reproduces_the_cap_closed_form() {
        let frame = magic();
        let shape = SampleShape::SphericalCap { radius: 5.0 };
        let expected = analytic::g_cap(5.0, &frame).unwrap();
        let coarse = riemann_g_axisym(&shape, &frame, 400, 400).unwrap();
        let fine = riemann_g_axisym(&shape, &frame, 1200, 1200).unwrap();
        assert!((coarse - expected).abs() / expected < 0.02, "coarse {coarse} vs {expected}");
        assert!((fine - expected).abs() / expected < 0.005, "fine {fine} vs {expected}");
        // refinement moves toward the closed form
        assert!((fine - expected).abs() <= (coarse - expected).abs() + 1e-9);
    }

    #[test]
    fn quadrature_rejects_offset_shapes() {
        let shape = SampleShape::Sphere { radius: 1.0, lateral_offset: 0.5 };
        assert_eq!(
            riemann_g_axisym(&shape, &magic(), 100, 100).err(),
            Some(Error::NotAxisymmetric)
        );
    }

    #[test]
    fn csv_layout() {
        let spec = GridSpec { x_min: -1.0, x_max: 1.0, z_min: 0.5, z_max: 1.5, nx: 2, nz: 2 };
        let map = render(&magic(), &spec).unwrap();
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,z,value,masked");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].split(',').count() == 4);
        // below-surface rows are masked
        let masked: Vec<&str> = lines[1..].iter().filter(|l| l.ends_with(",1")).copied().collect();
        assert_eq!(masked.len(), 2);
    }
}
