//! Two-level scattering with RF micromotion broadening.
//!
//! All frequencies in this module are angular (rad/s); the CLI converts
//! to/from Hz at the boundary. Two line-shape models are shipped side by
//! side because the operating point Omega ~ Gamma is between their limits:
//! a resolved-sideband Bessel comb and an RF-phase-averaged quasi-static
//! average. Their spread is the model-form uncertainty.

use crate::bessel::sideband_weights;
use crate::constants::{PLANCK_H, SPEED_OF_LIGHT};
use crate::series::{self, SeriesError};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FluorescenceError {
    #[error("saturation parameter must be >= 0, got {0}")]
    NegativeSaturation(f64),
    #[error("transition fields must be positive")]
    BadTransition,
    #[error("micromotion parameters out of range (beta >= 0, rf_omega > 0)")]
    BadMicromotion,
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("bisection failed to bracket the half-asymptote saturation")]
    BisectionFailure,
}

/// Optical transition: wavelength (m) and natural linewidth Gamma (rad/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub wavelength: f64,
    pub gamma: f64,
}

impl Transition {
    pub fn validate(&self) -> Result<(), FluorescenceError> {
        if self.wavelength > 0.0 && self.gamma > 0.0 {
            Ok(())
        } else {
            Err(FluorescenceError::BadTransition)
        }
    }
}

/// Laser drive: detuning (rad/s) and saturation parameter s = I/I_sat.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drive {
    pub detuning: f64,
    pub saturation: f64,
}

/// Micromotion modulation: index beta and trap RF angular frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MicromotionParams {
    pub beta: f64,
    pub rf_omega: f64,
}

impl MicromotionParams {
    pub fn validate(&self) -> Result<(), FluorescenceError> {
        if self.beta >= 0.0 && self.rf_omega > 0.0 {
            Ok(())
        } else {
            Err(FluorescenceError::BadMicromotion)
        }
    }
}

/// Steady-state two-level scattering rate (Gamma/2) s / (1 + s + (2 delta/Gamma)^2).
pub fn scatter_rate(t: Transition, d: Drive) -> Result<f64, FluorescenceError> {
    t.validate()?;
    if d.saturation < 0.0 {
        return Err(FluorescenceError::NegativeSaturation(d.saturation));
    }
    let x = 2.0 * d.detuning / t.gamma;
    Ok(t.gamma / 2.0 * d.saturation / (1.0 + d.saturation + x * x))
}

/// Two-level saturation intensity pi h c Gamma / (3 lambda^3), in W/m^2
/// (divide by 10 for mW/cm^2).
pub fn saturation_intensity(t: Transition) -> Result<f64, FluorescenceError> {
    t.validate()?;
    Ok(PI * PLANCK_H * SPEED_OF_LIGHT * t.gamma / (3.0 * t.wavelength.powi(3)))
}

fn truncated_weights(beta: f64) -> Vec<f64> {
    sideband_weights(beta, 1e-9)
}

/// Resolved-sideband model: Bessel-weighted comb of saturated Lorentzians,
/// truncated where the weights sum to 1 - 1e-9.
pub fn spectrum_sideband(
    t: Transition,
    mm: MicromotionParams,
    s: f64,
    detunings: &[f64],
) -> Result<Vec<f64>, FluorescenceError> {
    t.validate()?;
    mm.validate()?;
    if s < 0.0 {
        return Err(FluorescenceError::NegativeSaturation(s));
    }
    let w = truncated_weights(mm.beta);
    let half_gamma = t.gamma / 2.0;
    Ok(detunings
        .iter()
        .map(|&delta| {
            let lorentz = |center: f64| {
                let x = 2.0 * (delta - center) / t.gamma;
                s / (1.0 + s + x * x)
            };
            let mut r = w[0] * lorentz(0.0);
            for (n, wn) in w.iter().enumerate().skip(1) {
                let shift = n as f64 * mm.rf_omega;
                r += wn * (lorentz(shift) + lorentz(-shift));
            }
            half_gamma * r
        })
        .collect())
}

/// RF-phase-averaged quasi-static model: the instantaneous detuning
/// delta - beta Omega cos(phi) averaged over the RF cycle by midpoint
/// quadrature (periodic integrand, spectrally convergent).
pub fn spectrum_phase_averaged(
    t: Transition,
    mm: MicromotionParams,
    s: f64,
    detunings: &[f64],
) -> Result<Vec<f64>, FluorescenceError> {
    t.validate()?;
    mm.validate()?;
    if s < 0.0 {
        return Err(FluorescenceError::NegativeSaturation(s));
    }
    const N_PHASE: usize = 512;
    let half_gamma = t.gamma / 2.0;
    let excursion = mm.beta * mm.rf_omega;
    let cos_table: Vec<f64> = (0..N_PHASE)
        .map(|j| ((j as f64 + 0.5) * 2.0 * PI / N_PHASE as f64).cos())
        .collect();
    Ok(detunings
        .iter()
        .map(|&delta| {
            let mut acc = 0.0;
            for c in &cos_table {
                let x = 2.0 * (delta - excursion * c) / t.gamma;
                acc += s / (1.0 + s + x * x);
            }
            half_gamma * acc / N_PHASE as f64
        })
        .collect())
}

/// Full width at half of the global maximum of a sampled spectrum,
/// outermost crossings, linear interpolation. Units follow `detunings`.
pub fn spectrum_fwhm(detunings: &[f64], rates: &[f64]) -> Result<f64, FluorescenceError> {
    Ok(series::fwhm(detunings, rates)?)
}

/// Detuning grid wide enough for width and area metrics of the scalloped
/// line: +-(beta Omega + pad * Gamma), odd count so delta = 0 is sampled.
pub fn default_detuning_grid(t: Transition, mm: MicromotionParams, pad: f64, n: usize) -> Vec<f64> {
    let l = mm.beta * mm.rf_omega + pad * t.gamma;
    let n_odd = if n % 2 == 0 { n + 1 } else { n };
    series::linspace(-l, l, n_odd)
}

/// Peak of the micromotion-broadened spectrum over the rate of an at-rest
/// ion driven on resonance at the same s. Parabolic refinement around the
/// grid maximum keeps the result grid-independent to ~1e-6.
pub fn peak_rate_ratio(
    t: Transition,
    mm: MicromotionParams,
    s: f64,
) -> Result<f64, FluorescenceError> {
    let peak = spectrum_peak(t, mm, s, spectrum_sideband)?;
    let rest = scatter_rate(
        t,
        Drive {
            detuning: 0.0,
            saturation: s,
        },
    )?;
    Ok(peak / rest)
}

/// Same ratio using the phase-averaged model, reported alongside.
pub fn peak_rate_ratio_phase_averaged(
    t: Transition,
    mm: MicromotionParams,
    s: f64,
) -> Result<f64, FluorescenceError> {
    let peak = spectrum_peak(t, mm, s, spectrum_phase_averaged)?;
    let rest = scatter_rate(
        t,
        Drive {
            detuning: 0.0,
            saturation: s,
        },
    )?;
    Ok(peak / rest)
}

type SpectrumFn =
    fn(Transition, MicromotionParams, f64, &[f64]) -> Result<Vec<f64>, FluorescenceError>;

fn spectrum_peak(
    t: Transition,
    mm: MicromotionParams,
    s: f64,
    model: SpectrumFn,
) -> Result<f64, FluorescenceError> {
    t.validate()?;
    mm.validate()?;
    if s < 0.0 {
        return Err(FluorescenceError::NegativeSaturation(s));
    }
    let span = mm.beta * mm.rf_omega + 6.0 * t.gamma;
    let n = 1 + 2 * ((span / (t.gamma / 200.0)).ceil() as usize);
    let grid = series::linspace(-span, span, n.min(120_001));
    let y = model(t, mm, s, &grid)?;
    let (i, &y_max) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if i == 0 || i == y.len() - 1 {
        return Ok(y_max);
    }
    // parabolic vertex through the three samples around the maximum
    let (ym, y0, yp) = (y[i - 1], y[i], y[i + 1]);
    let denom = ym - 2.0 * y0 + yp;
    if denom >= 0.0 {
        return Ok(y_max);
    }
    Ok(y0 - (yp - ym) * (yp - ym) / (8.0 * denom))
}

/// Ratio of the saturation parameter needed to reach half of the large-s
/// asymptotic peak rate, micromotion model over at-rest. Bisection in log s
/// over [1e-3, 1e6].
pub fn saturation_scale(t: Transition, mm: MicromotionParams) -> Result<f64, FluorescenceError> {
    t.validate()?;
    mm.validate()?;
    let w = truncated_weights(mm.beta);
    let weight_sum = w[0] + 2.0 * w[1..].iter().sum::<f64>();
    let target_mm = t.gamma / 2.0 * weight_sum / 2.0;
    let s_mm = bisect_half_peak(|s| spectrum_peak(t, mm, s, spectrum_sideband), target_mm)?;
    let target_rest = t.gamma / 4.0;
    let s_rest = bisect_half_peak(
        |s| {
            scatter_rate(
                t,
                Drive {
                    detuning: 0.0,
                    saturation: s,
                },
            )
        },
        target_rest,
    )?;
    Ok(s_mm / s_rest)
}

fn bisect_half_peak<F>(peak: F, target: f64) -> Result<f64, FluorescenceError>
where
    F: Fn(f64) -> Result<f64, FluorescenceError>,
{
    let (mut lo, mut hi) = (1e-3_f64, 1e6_f64);
    if peak(lo)? >= target || peak(hi)? < target {
        return Err(FluorescenceError::BisectionFailure);
    }
    for _ in 0..200 {
        let mid = ((lo.ln() + hi.ln()) / 2.0).exp();
        if peak(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-12 {
            break;
        }
    }
    Ok(((lo.ln() + hi.ln()) / 2.0).exp())
}
