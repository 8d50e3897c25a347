//! Photon budget of the detection chain: ion emission through lens, vacuum
//! window, filter and camera to detected counts, forward and inverse, with
//! first-order uncertainty propagation throughout.

use thiserror::Error;

use crate::constants::{PLANCK_H, SPEED_OF_LIGHT};
use crate::fluorescence::Transition;
use crate::quantities::{db_to_linear, q_add, q_div, q_mul, Dimension, Quantity, QuantityError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum BudgetError {
    #[error(transparent)]
    Quantity(#[from] QuantityError),
    /// An inferred efficiency exceeded 1; the chain inputs are inconsistent.
    #[error("inferred {name} is {value}, above 1: inputs are inconsistent")]
    EfficiencyOutOfRange { name: &'static str, value: f64 },
    #[error("{0}")]
    BadInput(&'static str),
}

fn check_unit_interval(name: &'static str, q: Quantity) -> Result<(), BudgetError> {
    if !(0.0..=1.0).contains(&q.value()) || !q.value().is_finite() {
        return Err(BudgetError::EfficiencyOutOfRange {
            name,
            value: q.value(),
        });
    }
    Ok(())
}

/// Flag inferred efficiencies that exceed unity instead of passing them on.
fn flag_inferred(name: &'static str, q: Quantity) -> Result<Quantity, BudgetError> {
    if q.value() > 1.0 || !q.value().is_finite() {
        return Err(BudgetError::EfficiencyOutOfRange {
            name,
            value: q.value(),
        });
    }
    Ok(q)
}

/// Every transmission and efficiency between the ion and the camera counts.
#[derive(Clone, Copy, Debug)]
pub struct DetectionChain {
    pub solid_angle_fraction: Quantity,
    pub lens_diffraction_efficiency: Quantity,
    pub window_transmission: Quantity,
    pub filter_transmission: Quantity,
    pub camera_qe: Quantity,
}

impl DetectionChain {
    pub fn validate(&self) -> Result<(), BudgetError> {
        check_unit_interval("solid angle fraction", self.solid_angle_fraction)?;
        check_unit_interval("lens diffraction efficiency", self.lens_diffraction_efficiency)?;
        check_unit_interval("window transmission", self.window_transmission)?;
        check_unit_interval("filter transmission", self.filter_transmission)?;
        check_unit_interval("camera quantum efficiency", self.camera_qe)?;
        Ok(())
    }
}

/// A camera calibration exposure: attenuated laser light of known power.
#[derive(Clone, Debug)]
pub struct CalibrationRun {
    pub laser_power: Quantity,
    /// Calibration laser wavelength, meters.
    pub wavelength: f64,
    pub attenuators_db: Vec<Quantity>,
    /// Replaces the quadrature-summed stack when the stack uncertainty is
    /// known to understate the real one (e.g. filter leak checks dominate).
    pub total_db_override: Option<Quantity>,
    /// Background-corrected count rate on the camera.
    pub measured_rate: Quantity,
}

impl CalibrationRun {
    pub fn validate(&self) -> Result<(), BudgetError> {
        if !(self.laser_power.value() > 0.0) {
            return Err(BudgetError::BadInput("laser power must be positive"));
        }
        if !(self.wavelength > 0.0) || !self.wavelength.is_finite() {
            return Err(BudgetError::BadInput("wavelength must be positive"));
        }
        if self.measured_rate.value() < 0.0 {
            return Err(BudgetError::BadInput("measured rate must be non-negative"));
        }
        if self.attenuators_db.is_empty() && self.total_db_override.is_none() {
            return Err(BudgetError::BadInput(
                "no attenuators given and no total-dB override",
            ));
        }
        Ok(())
    }

    /// Total stack attenuation: the override if present, else the sum of the
    /// individual attenuators (sigmas in quadrature).
    pub fn total_attenuation_db(&self) -> Result<Quantity, BudgetError> {
        if let Some(total) = self.total_db_override {
            return Ok(total);
        }
        let mut iter = self.attenuators_db.iter();
        let first = *iter
            .next()
            .ok_or(BudgetError::BadInput("empty attenuator stack"))?;
        let mut total = first;
        for &a in iter {
            total = q_add(total, a)?;
        }
        Ok(total)
    }
}

/// Saturated two-level emission, scaled down by residual-motion dephasing.
#[derive(Clone, Copy, Debug)]
pub struct EmissionModel {
    pub transition: Transition,
    /// Fraction of the at-rest scattering rate that survives micromotion;
    /// either measured directly or computed from the line-shape model.
    pub motion_reduction: Quantity,
    pub saturated: bool,
}

impl EmissionModel {
    pub fn validate(&self) -> Result<(), BudgetError> {
        self.transition
            .validate()
            .map_err(|_| BudgetError::BadInput("invalid transition"))?;
        let mr = self.motion_reduction.value();
        if !(0.0..=1.0).contains(&mr) {
            return Err(BudgetError::BadInput(
                "motion reduction must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// Photon rate carried by an optical power: R = P lambda / (h c).
pub fn photon_rate_from_power(power: Quantity, wavelength: f64) -> Result<Quantity, BudgetError> {
    if power.dimension() != Dimension::POWER {
        return Err(BudgetError::BadInput("power must carry the W dimension"));
    }
    if power.value() < 0.0 {
        return Err(BudgetError::BadInput("power must be non-negative"));
    }
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(BudgetError::BadInput("wavelength must be positive"));
    }
    let per_watt = wavelength / (PLANCK_H * SPEED_OF_LIGHT);
    Ok(Quantity::new(
        power.value() * per_watt,
        power.sigma() * per_watt,
        Dimension::RATE,
    )?)
}

/// Camera quantum efficiency from a calibration exposure:
/// QE = measured / (photon rate x linear attenuation).
pub fn infer_qe(run: &CalibrationRun) -> Result<Quantity, BudgetError> {
    run.validate()?;
    let attenuation = db_to_linear(run.total_attenuation_db()?)?;
    let rate = photon_rate_from_power(run.laser_power, run.wavelength)?;
    let attenuated = q_mul(rate, attenuation)?;
    if attenuated.value() == 0.0 {
        return Err(BudgetError::BadInput("attenuated photon rate is zero"));
    }
    flag_inferred("quantum efficiency", q_div(run.measured_rate, attenuated)?)
}

/// Photon flux arriving at the lens, inverted from the detected rate.
/// Only the factors downstream of the lens (QE, filter, window) divide out;
/// lens efficiency and solid angle stay in because the flux is defined at
/// the lens aperture.
pub fn flux_at_lens(detected_rate: Quantity, chain: &DetectionChain) -> Result<Quantity, BudgetError> {
    chain.validate()?;
    if chain.camera_qe.value() == 0.0
        || chain.filter_transmission.value() == 0.0
        || chain.window_transmission.value() == 0.0
    {
        return Err(BudgetError::BadInput(
            "QE, filter and window transmissions must be positive",
        ));
    }
    let downstream = q_mul(
        q_mul(chain.camera_qe, chain.filter_transmission)?,
        chain.window_transmission)?;
    Ok(q_div(detected_rate, downstream)?)
}

/// Total saturated emission into 4 pi: (Gamma/2) x motion reduction.
pub fn emitted_rate(model: &EmissionModel) -> Result<Quantity, BudgetError> {
    model.validate()?;
    if !model.saturated {
        return Err(BudgetError::BadInput(
            "unsaturated emission needs an explicit drive; use the scatter-rate model",
        ));
    }
    let half_gamma = Quantity::exact(model.transition.gamma / 2.0, Dimension::RATE);
    Ok(q_mul(half_gamma, model.motion_reduction)?)
}

/// Fraction of emitted photons that reach the lens aperture.
pub fn collection_efficiency(
    flux_at_lens: Quantity,
    emitted: Quantity,
) -> Result<Quantity, BudgetError> {
    if emitted.value() <= 0.0 {
        return Err(BudgetError::BadInput("emitted rate must be positive"));
    }
    flag_inferred("collection efficiency", q_div(flux_at_lens, emitted)?)
}

/// Diffraction efficiency implied by a measured collection efficiency and
/// the geometric solid angle.
pub fn inferred_diffraction_efficiency(
    collection: Quantity,
    solid_angle: Quantity,
) -> Result<Quantity, BudgetError> {
    if solid_angle.value() <= 0.0 {
        return Err(BudgetError::BadInput("solid angle must be positive"));
    }
    flag_inferred("diffraction efficiency", q_div(collection, solid_angle)?)
}

/// Full forward chain: emission to detected counts.
pub fn forward_detected_rate(
    model: &EmissionModel,
    chain: &DetectionChain,
) -> Result<Quantity, BudgetError> {
    chain.validate()?;
    let mut rate = emitted_rate(model)?;
    for factor in [
        chain.solid_angle_fraction,
        chain.lens_diffraction_efficiency,
        chain.window_transmission,
        chain.filter_transmission,
        chain.camera_qe,
    ] {
        rate = q_mul(rate, factor)?;
    }
    Ok(rate)
}

/// Collection efficiency of a hypothetical chain: solid angle coverage times
/// lens diffraction efficiency.
pub fn projected_efficiency(
    solid_angle: Quantity,
    diffraction_eff: Quantity,
) -> Result<Quantity, BudgetError> {
    check_unit_interval("solid angle fraction", solid_angle)?;
    check_unit_interval("diffraction efficiency", diffraction_eff)?;
    Ok(q_mul(solid_angle, diffraction_eff)?)
}

/// Signal-to-background ratio with propagated sigma.
pub fn contrast_ratio(signal: Quantity, background: Quantity) -> Result<Quantity, BudgetError> {
    if background.value() <= 0.0 {
        return Err(BudgetError::BadInput("background rate must be positive"));
    }
    Ok(q_div(signal, background)?)
}
