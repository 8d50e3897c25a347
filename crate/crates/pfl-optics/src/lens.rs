//! Binary / multi-level phase Fresnel lens geometry and scalar efficiency.
//!
//! Zone boundaries use the exact point-source path-length condition
//! r_k = sqrt((f + k*lambda/2)^2 - f^2); the paraxial sqrt(k*lambda*f)
//! form errs at the rim for fast lenses and is deliberately not used.

use crate::constants::{FUSED_SILICA_SELLMEIER, SELLMEIER_BAND};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum LensError {
    #[error("wavelength {0} m outside supported dispersion band {1:?} m")]
    WavelengthOutsideBand(f64, (f64, f64)),
    #[error("refractive index must exceed 1, got {0}")]
    IndexNotAboveUnity(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("phase_levels must be >= 2, got {0}")]
    TooFewLevels(u32),
    #[error("numerical aperture must lie in [0, 1], got {0}")]
    NaOutOfRange(f64),
    #[error("phase must lie in [0, 2*pi], got {0}")]
    PhaseOutOfRange(f64),
}

/// Dispersive substrate described by a three-term Sellmeier fit.
#[derive(Clone, Debug, PartialEq)]
pub struct Material {
    pub name: String,
    /// (B, C) pairs; C in um^2.
    pub sellmeier: [(f64, f64); 3],
}

impl Material {
    pub fn fused_silica() -> Self {
        Material {
            name: "fused silica".into(),
            sellmeier: FUSED_SILICA_SELLMEIER,
        }
    }
}

/// Full geometric description of a phase Fresnel lens.
#[derive(Clone, Debug, PartialEq)]
pub struct LensPrescription {
    pub design_wavelength: f64,
    pub focal_length: f64,
    pub aperture_diameter: f64,
    pub phase_levels: u32,
    pub substrate: Material,
}

impl LensPrescription {
    pub fn validate(&self) -> Result<(), LensError> {
        for (name, value) in [
            ("design_wavelength", self.design_wavelength),
            ("focal_length", self.focal_length),
            ("aperture_diameter", self.aperture_diameter),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(LensError::NonPositive { name, value });
            }
        }
        if self.phase_levels < 2 {
            return Err(LensError::TooFewLevels(self.phase_levels));
        }
        Ok(())
    }

    pub fn aperture_radius(&self) -> f64 {
        self.aperture_diameter / 2.0
    }

    /// Scale focal length and diameter by `factor`, preserving NA.
    /// Used by the fast (reduced-aperture) simulation mode.
    pub fn scaled(&self, factor: f64) -> LensPrescription {
        LensPrescription {
            focal_length: self.focal_length * factor,
            aperture_diameter: self.aperture_diameter * factor,
            ..self.clone()
        }
    }
}

/// Zone boundary radii, strictly increasing, last <= aperture radius.
#[derive(Clone, Debug, PartialEq)]
pub struct ZoneSet {
    pub radii: Vec<f64>,
}

impl ZoneSet {
    pub fn count(&self) -> usize {
        self.radii.len()
    }

    /// Width of the outermost zone; the propagation grid must resolve this.
    pub fn outermost_width(&self) -> f64 {
        match self.radii.len() {
            0 => f64::INFINITY,
            1 => self.radii[0],
            n => self.radii[n - 1] - self.radii[n - 2],
        }
    }
}

/// n(lambda) from the three-term Sellmeier relation. Wavelength in meters.
pub fn sellmeier_index(material: &Material, wavelength: f64) -> Result<f64, LensError> {
    if !(SELLMEIER_BAND.0..=SELLMEIER_BAND.1).contains(&wavelength) {
        return Err(LensError::WavelengthOutsideBand(wavelength, SELLMEIER_BAND));
    }
    let l2 = (wavelength * 1e6).powi(2); // um^2
    let mut n2 = 1.0;
    for (b, c) in material.sellmeier {
        n2 += b * l2 / (l2 - c);
    }
    Ok(n2.sqrt())
}

/// Etch depth giving a pi phase step: d = lambda / (2 (n - 1)).
pub fn groove_depth(wavelength: f64, index: f64) -> Result<f64, LensError> {
    if !(index > 1.0) {
        return Err(LensError::IndexNotAboveUnity(index));
    }
    Ok(wavelength / (2.0 * (index - 1.0)))
}

/// All half-wave zone boundaries inside the aperture.
pub fn zone_radii(p: &LensPrescription) -> Result<ZoneSet, LensError> {
    p.validate()?;
    let f = p.focal_length;
    let half_wl = p.design_wavelength / 2.0;
    let r_max = p.aperture_radius();
    // K = floor((sqrt(f^2 + R^2) - f) / (lambda/2))
    let k_max = ((f.hypot(r_max) - f) / half_wl).floor() as usize;
    let radii = (1..=k_max)
        .map(|k| {
            let path = f + k as f64 * half_wl;
            (path * path - f * f).sqrt()
        })
        .collect();
    Ok(ZoneSet { radii })
}

/// NA = sin(atan(R / f)) for the configured geometry.
pub fn numerical_aperture(p: &LensPrescription) -> Result<f64, LensError> {
    p.validate()?;
    Ok((p.aperture_radius() / p.focal_length).atan().sin())
}

/// Fraction of the full sphere inside the NA cone: (1 - cos(asin(na))) / 2.
pub fn solid_angle_fraction(na: f64) -> Result<f64, LensError> {
    if !(0.0..=1.0).contains(&na) {
        return Err(LensError::NaOutOfRange(na));
    }
    Ok((1.0 - (1.0 - na * na).sqrt()) / 2.0)
}

/// Scalar first-order efficiency of an L-level profile: [sin(pi/L)/(pi/L)]^2.
pub fn ideal_multilevel_efficiency(levels: u32) -> Result<f64, LensError> {
    if levels < 2 {
        return Err(LensError::TooFewLevels(levels));
    }
    let x = std::f64::consts::PI / levels as f64;
    Ok((x.sin() / x).powi(2))
}

/// Binary-lens first-order efficiency at etch phase phi: (4/pi^2) sin^2(phi/2).
pub fn binary_efficiency_vs_phase(phase: f64) -> Result<f64, LensError> {
    if !(0.0..=2.0 * std::f64::consts::PI).contains(&phase) {
        return Err(LensError::PhaseOutOfRange(phase));
    }
    Ok(4.0 / std::f64::consts::PI.powi(2) * (phase / 2.0).sin().powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    pub(crate) fn paper_lens() -> LensPrescription {
        LensPrescription {
            design_wavelength: 369.5e-9,
            focal_length: 3.0e-3,
            aperture_diameter: 5.0e-3,
            phase_levels: 2,
            substrate: Material::fused_silica(),
        }
    }

    #[test]
    fn silica_index_near_uv() {
        let n = sellmeier_index(&Material::fused_silica(), 369.5e-9).unwrap();
        assert_abs_diff_eq!(n, 1.4736, epsilon = 5e-4);
        assert_relative_eq!(n, 1.4738959190105878, max_relative = 1e-9); // frozen
    }

    #[test]
    fn silica_index_sodium_d() {
        let n = sellmeier_index(&Material::fused_silica(), 587.6e-9).unwrap();
        assert_abs_diff_eq!(n, 1.4585, epsilon = 5e-4);
        assert_relative_eq!(n, 1.4584623420532408, max_relative = 1e-9); // frozen
    }

    #[test]
    fn sellmeier_is_deterministic() {
        let m = Material::fused_silica();
        assert_eq!(
            sellmeier_index(&m, 0.42e-6).unwrap(),
            sellmeier_index(&m, 0.42e-6).unwrap()
        );
    }

    #[test]
    fn sellmeier_band_enforced() {
        assert!(sellmeier_index(&Material::fused_silica(), 0.1e-6).is_err());
        assert!(sellmeier_index(&Material::fused_silica(), 3.0e-6).is_err());
    }

    #[test]
    fn groove_depth_at_design_index() {
        let d = groove_depth(369.5e-9, 1.4736).unwrap();
        assert_abs_diff_eq!(d, 390.2e-9, epsilon = 0.2e-9);
    }

    #[test]
    fn groove_depth_trivial_indices() {
        assert_relative_eq!(groove_depth(500e-9, 1.5).unwrap(), 500e-9);
        assert_relative_eq!(groove_depth(500e-9, 2.0).unwrap(), 250e-9);
        assert!(groove_depth(500e-9, 1.0).is_err());
    }

    #[test]
    fn groove_depth_from_dispersion_matches_fab() {
        let n = sellmeier_index(&Material::fused_silica(), 369.5e-9).unwrap();
        let d = groove_depth(369.5e-9, n).unwrap();
        assert_abs_diff_eq!(d, 390e-9, epsilon = 3e-9);
        assert_relative_eq!(d, 3.898535365861049e-7, max_relative = 1e-9); // frozen
    }

    #[test]
    fn first_zone_radius() {
        let zones = zone_radii(&paper_lens()).unwrap();
        assert_abs_diff_eq!(zones.radii[0], 33.3e-6, epsilon = 0.1e-6);
        assert_relative_eq!(zones.radii[0], 3.329465e-5, max_relative = 1e-5); // frozen
    }

    #[test]
    fn zone_count_full_aperture() {
        let zones = zone_radii(&paper_lens()).unwrap();
        assert_eq!(zones.count(), 4899);
        let r = paper_lens().aperture_radius();
        assert!(*zones.radii.last().unwrap() <= r);
    }

    #[test]
    fn zone_widths_shrink_but_areas_grow() {
        let zones = zone_radii(&paper_lens()).unwrap();
        let r = &zones.radii;
        for k in 2..r.len() {
            let w_prev = r[k - 1] - r[k - 2];
            let w = r[k] - r[k - 1];
            assert!(w < w_prev, "zone width must shrink toward the rim (k={k})");
            // exact zone formula: area_k/pi = lambda*f + (2k-1)*lambda^2/4, increasing
            assert!(
                r[k] * r[k] - r[k - 1] * r[k - 1] > r[k - 1] * r[k - 1] - r[k - 2] * r[k - 2]
            );
        }
    }

    #[test]
    fn na_of_paper_geometry() {
        let na = numerical_aperture(&paper_lens()).unwrap();
        assert_abs_diff_eq!(na, 0.640, epsilon = 5e-4);
        assert_relative_eq!(na, 0.6401844, max_relative = 1e-6); // frozen
    }

    #[test]
    fn na_limits() {
        let mut p = paper_lens();
        p.aperture_diameter = 1e-12;
        assert!(numerical_aperture(&p).unwrap() < 1e-9);
        p.aperture_diameter = 2.0 * p.focal_length;
        assert_relative_eq!(
            numerical_aperture(&p).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn solid_angle_values() {
        assert_abs_diff_eq!(solid_angle_fraction(0.64).unwrap(), 0.116, epsilon = 5e-4);
        assert_abs_diff_eq!(solid_angle_fraction(0.9).unwrap(), 0.282, epsilon = 5e-4);
        assert_relative_eq!(solid_angle_fraction(1.0).unwrap(), 0.5);
        assert_relative_eq!(solid_angle_fraction(0.0).unwrap(), 0.0);
        assert!(solid_angle_fraction(1.1).is_err());
    }

    #[test]
    fn multilevel_efficiency_values() {
        assert_relative_eq!(
            ideal_multilevel_efficiency(2).unwrap(),
            4.0 / std::f64::consts::PI.powi(2),
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(ideal_multilevel_efficiency(8).unwrap(), 0.9496, epsilon = 1e-4);
        assert!(ideal_multilevel_efficiency(1).is_err());
    }

    #[test]
    fn multilevel_efficiency_monotone_to_blazed_limit() {
        let mut prev = 0.0;
        for levels in 2..256 {
            let eta = ideal_multilevel_efficiency(levels).unwrap();
            assert!(eta > prev && eta < 1.0);
            prev = eta;
        }
        assert!(ideal_multilevel_efficiency(100_000).unwrap() > 0.999_999);
    }

    #[test]
    fn binary_efficiency_phase_sweep() {
        assert_relative_eq!(
            binary_efficiency_vs_phase(std::f64::consts::PI).unwrap(),
            4.0 / std::f64::consts::PI.powi(2),
            max_relative = 1e-12
        );
        assert_eq!(binary_efficiency_vs_phase(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            binary_efficiency_vs_phase(std::f64::consts::FRAC_PI_2).unwrap(),
            0.2026,
            epsilon = 1e-4
        );
        assert!(binary_efficiency_vs_phase(-0.1).is_err());
    }
}
