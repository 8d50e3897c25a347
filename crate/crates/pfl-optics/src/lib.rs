//! Optical chain of a phase-Fresnel-lens ion imaging system: lens design,
//! scalar diffraction, micromotion-broadened fluorescence, photon budgets
//! with uncertainty propagation, and least-squares fitting of the measured
//! curves.

pub mod bessel;
pub mod budget;
pub mod constants;
pub mod diffraction;
pub mod fitting;
pub mod fluorescence;
pub mod lens;
pub mod quantities;
pub mod series;
