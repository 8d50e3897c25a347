//! Job configuration: a versioned TOML file with a `mode` selector and one
//! section per mode, mirroring the library's domain types.

use pfl_optics::lens::{LensPrescription, Material};
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema_version: u32,
    pub mode: Mode,
    #[serde(default)]
    pub fast_mode: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub lens: Option<LensSection>,
    pub psf: Option<PsfSection>,
    pub spectrum: Option<SpectrumSection>,
    pub budget: Option<BudgetSection>,
    pub fit: Option<FitSection>,
    pub tolerance: Option<ToleranceSection>,
}

fn default_output_dir() -> String {
    "pflsim_out".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Design,
    Psf,
    Spectrum,
    Budget,
    Fit,
    Tolerance,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Design => "design",
            Mode::Psf => "psf",
            Mode::Spectrum => "spectrum",
            Mode::Budget => "budget",
            Mode::Fit => "fit",
            Mode::Tolerance => "tolerance",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensSection {
    pub design_wavelength_m: f64,
    pub focal_length_m: f64,
    pub aperture_diameter_m: f64,
    #[serde(default = "default_phase_levels")]
    pub phase_levels: u32,
    /// Optional custom substrate: three (B, C[um^2]) Sellmeier terms.
    pub sellmeier_terms: Option<[(f64, f64); 3]>,
    pub material_name: Option<String>,
}

fn default_phase_levels() -> u32 {
    2
}

impl LensSection {
    pub fn prescription(&self) -> LensPrescription {
        let substrate = match self.sellmeier_terms {
            Some(sellmeier) => Material {
                name: self
                    .material_name
                    .clone()
                    .unwrap_or_else(|| "custom".into()),
                sellmeier,
            },
            None => Material::fused_silica(),
        };
        LensPrescription {
            design_wavelength: self.design_wavelength_m,
            focal_length: self.focal_length_m,
            aperture_diameter: self.aperture_diameter_m,
            phase_levels: self.phase_levels,
            substrate,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Binary,
    Ideal,
}

impl Profile {
    pub fn to_lens_profile(self) -> pfl_optics::diffraction::LensProfile {
        match self {
            Profile::Binary => pfl_optics::diffraction::LensProfile::Binary,
            Profile::Ideal => pfl_optics::diffraction::LensProfile::IdealContinuous,
        }
    }
}

fn default_profile() -> Profile {
    Profile::Binary
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsfSection {
    #[serde(default = "default_profile")]
    pub profile: Profile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub beta: f64,
    pub rf_frequency_hz: f64,
    pub saturation: f64,
    #[serde(default = "default_linewidth_hz")]
    pub natural_linewidth_hz: f64,
    #[serde(default = "default_transition_wavelength")]
    pub transition_wavelength_m: f64,
    /// Half-span of the detuning grid beyond beta*Omega, in linewidths.
    #[serde(default = "default_grid_pad")]
    pub grid_pad_linewidths: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_linewidth_hz() -> f64 {
    19.6e6
}

fn default_transition_wavelength() -> f64 {
    369.5e-9
}

fn default_grid_pad() -> f64 {
    30.0
}

fn default_grid_points() -> usize {
    4001
}

/// (value, sigma) pair as written in TOML: `[3.5e5, 0.9e5]`.
pub type Vs = (f64, f64);

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub laser_power_w: Vs,
    pub calibration_wavelength_m: f64,
    #[serde(default)]
    pub attenuators_db: Vec<Vs>,
    pub total_db_override: Option<Vs>,
    /// Background-corrected calibration count rate on the camera.
    pub calibration_rate_cps: Vs,
    /// Background-corrected ion detection rate.
    pub detected_rate_cps: Vs,
    pub solid_angle_fraction: Vs,
    pub lens_diffraction_efficiency: Vs,
    pub window_transmission: Vs,
    pub filter_transmission: Vs,
    pub camera_qe: Vs,
    pub motion_reduction: Vs,
    #[serde(default = "default_linewidth_hz")]
    pub natural_linewidth_hz: f64,
    #[serde(default = "default_transition_wavelength")]
    pub emission_wavelength_m: f64,
    #[serde(default = "default_projection_solid_angle")]
    pub projection_solid_angle: Vs,
    #[serde(default = "default_projection_diffraction_efficiency")]
    pub projection_diffraction_efficiency: Vs,
    #[serde(default = "default_signal_to_background")]
    pub signal_to_background: Vs,
}

fn default_projection_solid_angle() -> Vs {
    (0.28, 0.0)
}

fn default_projection_diffraction_efficiency() -> Vs {
    (0.80, 0.0)
}

fn default_signal_to_background() -> Vs {
    (23.0, 4.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    Focus,
    Scalloped,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub kind: FitKind,
    /// Two- or three-column CSV (x, y[, sigma]) with a one-line header;
    /// relative paths resolve against the config file's directory.
    pub data_csv: String,
    #[serde(default = "default_rf_frequency_hz")]
    pub rf_frequency_hz: f64,
    #[serde(default = "default_linewidth_hz")]
    pub natural_linewidth_hz: f64,
    /// When > 0, refit that many noisy replicas of the best-fit model,
    /// seeded by --seed, and emit one row per trial.
    #[serde(default)]
    pub monte_carlo_trials: usize,
    #[serde(default = "default_noise_relative")]
    pub noise_relative: f64,
}

fn default_rf_frequency_hz() -> f64 {
    20.0e6
}

fn default_noise_relative() -> f64 {
    0.03
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsfModel {
    /// Hyperbolic Gaussian-beam defocus anchored to a measured waist.
    Gaussian,
    /// Full scalar propagation of the configured lens profile.
    Simulated,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    #[serde(default = "default_profile")]
    pub profile: Profile,
    pub source_blur_fwhm_m: f64,
    pub defocus_halfspan_m: f64,
    pub defocus_points: usize,
    #[serde(default = "default_psf_model")]
    pub psf_model: PsfModel,
    #[serde(default = "default_gaussian_waist")]
    pub gaussian_waist_m: f64,
    pub offset_max_m: f64,
    pub offset_points: usize,
}

fn default_psf_model() -> PsfModel {
    PsfModel::Gaussian
}

fn default_gaussian_waist() -> f64 {
    0.35e-6
}

pub fn parse(raw: &[u8]) -> Result<JobConfig, CliError> {
    let text = std::str::from_utf8(raw)
        .map_err(|_| CliError::Config("config file is not valid UTF-8".into()))?;
    let job: JobConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
    if job.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported schema_version {} (this build reads version {})",
            job.schema_version, SCHEMA_VERSION
        )));
    }
    job.validate()?;
    Ok(job)
}

impl JobConfig {
    fn require<'a, T>(section: &'a Option<T>, name: &str, mode: Mode) -> Result<&'a T, CliError> {
        section.as_ref().ok_or_else(|| {
            CliError::Config(format!(
                "mode \"{}\" requires a [{name}] section",
                mode.as_str()
            ))
        })
    }

    pub fn lens(&self) -> Result<&LensSection, CliError> {
        Self::require(&self.lens, "lens", self.mode)
    }

    pub fn psf(&self) -> Result<&PsfSection, CliError> {
        Self::require(&self.psf, "psf", self.mode)
    }

    pub fn spectrum(&self) -> Result<&SpectrumSection, CliError> {
        Self::require(&self.spectrum, "spectrum", self.mode)
    }

    pub fn budget(&self) -> Result<&BudgetSection, CliError> {
        Self::require(&self.budget, "budget", self.mode)
    }

    pub fn fit(&self) -> Result<&FitSection, CliError> {
        Self::require(&self.fit, "fit", self.mode)
    }

    pub fn tolerance(&self) -> Result<&ToleranceSection, CliError> {
        Self::require(&self.tolerance, "tolerance", self.mode)
    }

    /// Structural validation before any computation; field-level physics
    /// validation happens in the library types.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.mode {
            Mode::Design | Mode::Psf | Mode::Tolerance => {
                self.lens()?;
            }
            Mode::Spectrum | Mode::Budget | Mode::Fit => {}
        }
        match self.mode {
            Mode::Psf => {
                self.psf()?;
            }
            Mode::Spectrum => {
                let s = self.spectrum()?;
                if s.grid_points < 3 {
                    return Err(CliError::Config(
                        "spectrum.grid_points must be at least 3".into(),
                    ));
                }
            }
            Mode::Budget => {
                self.budget()?;
            }
            Mode::Fit => {
                let f = self.fit()?;
                if !(f.noise_relative >= 0.0) {
                    return Err(CliError::Config(
                        "fit.noise_relative must be non-negative".into(),
                    ));
                }
            }
            Mode::Tolerance => {
                let t = self.tolerance()?;
                if t.defocus_points < 5 {
                    return Err(CliError::Config(
                        "tolerance.defocus_points must be at least 5".into(),
                    ));
                }
                if !(t.defocus_halfspan_m > 0.0) {
                    return Err(CliError::Config(
                        "tolerance.defocus_halfspan_m must be positive".into(),
                    ));
                }
                if t.offset_points < 2 {
                    return Err(CliError::Config(
                        "tolerance.offset_points must be at least 2".into(),
                    ));
                }
                if !(t.offset_max_m > 0.0) {
                    return Err(CliError::Config(
                        "tolerance.offset_max_m must be positive".into(),
                    ));
                }
            }
            Mode::Design => {}
        }
        Ok(())
    }
}
