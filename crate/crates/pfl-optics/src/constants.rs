//! Physical constants (CODATA 2018, exact SI where defined) and built-in material data.

/// Planck constant, J s (exact since the 2019 SI redefinition).
pub const PLANCK_H: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Malitson three-term Sellmeier fit for fused silica.
/// B terms dimensionless, C terms in um^2; valid 0.21-3.7 um, used here over 0.2-2 um.
pub const FUSED_SILICA_SELLMEIER: [(f64, f64); 3] = [
    (0.696_166_3, 0.068_404_3 * 0.068_404_3),
    (0.407_942_6, 0.116_241_4 * 0.116_241_4),
    (0.897_479_4, 9.896_161 * 9.896_161),
];

/// Supported wavelength band for built-in material dispersion data, meters.
pub const SELLMEIER_BAND: (f64, f64) = (0.2e-6, 2.0e-6);
