//! Unit-tagged scalars with first-order Gaussian uncertainty propagation.
//!
//! Every measured or derived number in the budget chain is a [`Quantity`]:
//! an SI-scaled value, a 1-sigma uncertainty and a dimension tag. Propagation
//! is strictly first order and assumes uncorrelated inputs.

use std::fmt;
use thiserror::Error;

/// Dimension tag. Exponents of the three base units that actually occur in
/// the photon-budget formulas, plus a marker for logarithmic (dB) values.
///
/// Multiplication and division compose exponents; dB values are additive
/// only and must pass through [`db_to_linear`] before entering a product.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Dimension {
    pub length: i8,
    pub time: i8,
    pub power: i8,
    pub decibel: bool,
}

impl Dimension {
    pub const DIMENSIONLESS: Dimension = Dimension::new(0, 0, 0);
    pub const LENGTH: Dimension = Dimension::new(1, 0, 0);
    pub const TIME: Dimension = Dimension::new(0, 1, 0);
    pub const RATE: Dimension = Dimension::new(0, -1, 0);
    pub const POWER: Dimension = Dimension::new(0, 0, 1);
    pub const DECIBEL: Dimension = Dimension {
        length: 0,
        time: 0,
        power: 0,
        decibel: true,
    };

    const fn new(length: i8, time: i8, power: i8) -> Self {
        Dimension {
            length,
            time,
            power,
            decibel: false,
        }
    }

    fn compose(self, other: Dimension, sign: i8) -> Result<Dimension, QuantityError> {
        if self.decibel || other.decibel {
            return Err(QuantityError::DecibelArithmetic);
        }
        Ok(Dimension {
            length: self.length + sign * other.length,
            time: self.time + sign * other.time,
            power: self.power + sign * other.power,
            decibel: false,
        })
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Dimension::DIMENSIONLESS => write!(f, ""),
            Dimension::LENGTH => write!(f, "m"),
            Dimension::TIME => write!(f, "s"),
            Dimension::RATE => write!(f, "s^-1"),
            Dimension::POWER => write!(f, "W"),
            Dimension::DECIBEL => write!(f, "dB"),
            d => {
                let mut parts = Vec::new();
                for (sym, e) in [("m", d.length), ("s", d.time), ("W", d.power)] {
                    match e {
                        0 => {}
                        1 => parts.push(sym.to_string()),
                        e => parts.push(format!("{sym}^{e}")),
                    }
                }
                write!(f, "{}", parts.join(" "))
            }
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum QuantityError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },
    #[error("decibel quantities only add; convert with db_to_linear first")]
    DecibelArithmetic,
    #[error("division by a zero-valued quantity")]
    DivisionByZero,
    #[error("negative sigma {0}")]
    NegativeSigma(f64),
}

/// A physical value with 1-sigma uncertainty and dimension tag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity {
    value: f64,
    sigma: f64,
    dimension: Dimension,
}

impl Quantity {
    pub fn new(value: f64, sigma: f64, dimension: Dimension) -> Result<Self, QuantityError> {
        if sigma < 0.0 {
            return Err(QuantityError::NegativeSigma(sigma));
        }
        Ok(Quantity {
            value,
            sigma,
            dimension,
        })
    }

    /// Exact (zero-sigma) value.
    pub fn exact(value: f64, dimension: Dimension) -> Self {
        Quantity {
            value,
            sigma: 0.0,
            dimension,
        }
    }

    pub fn dimensionless(value: f64, sigma: f64) -> Result<Self, QuantityError> {
        Quantity::new(value, sigma, Dimension::DIMENSIONLESS)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    /// Relative 1-sigma; infinite for zero-valued quantities with spread.
    pub fn relative_sigma(&self) -> f64 {
        if self.sigma == 0.0 {
            0.0
        } else {
            self.sigma / self.value.abs()
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} +- {}", self.value, self.sigma)?;
        if self.dimension != Dimension::DIMENSIONLESS {
            write!(f, " {}", self.dimension)?;
        }
        Ok(())
    }
}

/// Sum of same-dimension quantities; sigmas add in quadrature.
pub fn q_add(a: Quantity, b: Quantity) -> Result<Quantity, QuantityError> {
    if a.dimension != b.dimension {
        return Err(QuantityError::DimensionMismatch {
            left: a.dimension.to_string(),
            right: b.dimension.to_string(),
        });
    }
    Ok(Quantity {
        value: a.value + b.value,
        sigma: a.sigma.hypot(b.sigma),
        dimension: a.dimension,
    })
}

pub fn q_sub(a: Quantity, b: Quantity) -> Result<Quantity, QuantityError> {
    let neg = Quantity {
        value: -b.value,
        ..b
    };
    q_add(a, neg)
}

/// Product; dimensions compose, relative sigmas add in quadrature.
/// Falls back to the linearized absolute form when either value is zero.
pub fn q_mul(a: Quantity, b: Quantity) -> Result<Quantity, QuantityError> {
    let dimension = a.dimension.compose(b.dimension, 1)?;
    let value = a.value * b.value;
    // exact factors scale sigma exactly; the general relative-quadrature
    // form would lose an ulp to the value/value round trip
    let sigma = if a.sigma == 0.0 {
        (a.value * b.sigma).abs()
    } else if b.sigma == 0.0 {
        (b.value * a.sigma).abs()
    } else if a.value == 0.0 || b.value == 0.0 {
        (a.value * b.sigma).hypot(b.value * a.sigma)
    } else {
        value.abs() * a.relative_sigma().hypot(b.relative_sigma())
    };
    Ok(Quantity {
        value,
        sigma,
        dimension,
    })
}

/// Quotient; same propagation rule as [`q_mul`].
pub fn q_div(a: Quantity, b: Quantity) -> Result<Quantity, QuantityError> {
    if b.value == 0.0 {
        return Err(QuantityError::DivisionByZero);
    }
    let dimension = a.dimension.compose(b.dimension, -1)?;
    let value = a.value / b.value;
    let sigma = if b.sigma == 0.0 {
        a.sigma / b.value.abs()
    } else if a.sigma == 0.0 {
        (a.value * b.sigma / (b.value * b.value)).abs()
    } else if a.value == 0.0 {
        // d(a/b)/da = 1/b, d(a/b)/db = 0 at a = 0
        a.sigma / b.value.abs()
    } else {
        value.abs() * a.relative_sigma().hypot(b.relative_sigma())
    };
    Ok(Quantity {
        value,
        sigma,
        dimension,
    })
}

/// Attenuation in dB to a dimensionless linear factor 10^(-dB/10).
pub fn db_to_linear(a: Quantity) -> Result<Quantity, QuantityError> {
    if a.dimension != Dimension::DECIBEL {
        return Err(QuantityError::DimensionMismatch {
            left: a.dimension.to_string(),
            right: Dimension::DECIBEL.to_string(),
        });
    }
    let value = 10f64.powf(-a.value / 10.0);
    let sigma = value * std::f64::consts::LN_10 / 10.0 * a.sigma;
    Ok(Quantity {
        value,
        sigma,
        dimension: Dimension::DIMENSIONLESS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn q(value: f64, sigma: f64) -> Quantity {
        Quantity::dimensionless(value, sigma).unwrap()
    }

    fn db(value: f64, sigma: f64) -> Quantity {
        Quantity::new(value, sigma, Dimension::DECIBEL).unwrap()
    }

    #[test]
    fn add_exact_lengths() {
        let a = Quantity::exact(2.0, Dimension::LENGTH);
        let b = Quantity::exact(3.0, Dimension::LENGTH);
        let s = q_add(a, b).unwrap();
        assert_eq!(s.value(), 5.0);
        assert_eq!(s.sigma(), 0.0);
        assert_eq!(s.dimension(), Dimension::LENGTH);
    }

    #[test]
    fn add_is_identity_with_exact_zero() {
        let a = q(1.7, 0.3);
        let s = q_add(a, q(0.0, 0.0)).unwrap();
        assert_eq!(s.value(), 1.7);
        assert_eq!(s.sigma(), 0.3);
    }

    #[test]
    fn attenuator_stack_quadrature_sum() {
        // 3.2 + 43.2 + 27.7 + 12.6 dB, each +-0.1 dB
        let stack = [db(3.2, 0.1), db(43.2, 0.1), db(27.7, 0.1), db(12.6, 0.1)];
        let total = stack
            .iter()
            .copied()
            .reduce(|a, b| q_add(a, b).unwrap())
            .unwrap();
        assert_relative_eq!(total.value(), 86.7, max_relative = 1e-12);
        assert_relative_eq!(total.sigma(), 0.2, max_relative = 1e-12);
    }

    #[test]
    fn add_rejects_dimension_mismatch() {
        let a = Quantity::exact(1.0, Dimension::LENGTH);
        let b = Quantity::exact(1.0, Dimension::TIME);
        assert!(matches!(
            q_add(a, b),
            Err(QuantityError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mul_relative_quadrature() {
        let p = q_mul(q(10.0, 1.0), q(10.0, 1.0)).unwrap();
        assert_relative_eq!(p.value(), 100.0, max_relative = 1e-12);
        assert_relative_eq!(p.sigma(), 14.142135623730951, max_relative = 1e-12);
    }

    #[test]
    fn mul_identity() {
        let p = q_mul(q(1.23, 0.04), q(1.0, 0.0)).unwrap();
        assert_eq!(p.value(), 1.23);
        assert_eq!(p.sigma(), 0.04);
    }

    #[test]
    fn filter_window_product() {
        let p = q_mul(q(0.25, 0.05), q(0.92, 0.0)).unwrap();
        assert_relative_eq!(p.value(), 0.23, max_relative = 1e-12);
        assert_relative_eq!(p.sigma(), 0.046, max_relative = 1e-12);
    }

    #[test]
    fn mul_composes_dimensions() {
        let rate = Quantity::exact(5.0, Dimension::RATE);
        let eff = q(0.5, 0.0);
        assert_eq!(q_mul(rate, eff).unwrap().dimension(), Dimension::RATE);
        let ratio = q_div(rate, rate).unwrap();
        assert_eq!(ratio.dimension(), Dimension::DIMENSIONLESS);
        assert_eq!(ratio.value(), 1.0);
    }

    #[test]
    fn mul_zero_value_uses_linearized_sigma() {
        let p = q_mul(q(0.0, 0.5), q(4.0, 0.1)).unwrap();
        assert_eq!(p.value(), 0.0);
        assert_relative_eq!(p.sigma(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn div_by_zero_rejected() {
        assert!(matches!(
            q_div(q(1.0, 0.0), q(0.0, 0.1)),
            Err(QuantityError::DivisionByZero)
        ));
    }

    #[test]
    fn db_zero_is_unity() {
        let f = db_to_linear(db(0.0, 0.0)).unwrap();
        assert_eq!(f.value(), 1.0);
        assert_eq!(f.sigma(), 0.0);
    }

    #[test]
    fn db_decade() {
        let f = db_to_linear(db(10.0, 0.0)).unwrap();
        assert_relative_eq!(f.value(), 0.1, max_relative = 1e-12);
    }

    #[test]
    fn db_87_attenuation() {
        let f = db_to_linear(db(87.0, 1.0)).unwrap();
        assert_relative_eq!(f.value(), 1.9952623149688828e-9, max_relative = 1e-12);
        assert_relative_eq!(f.sigma(), 4.5942612630601406e-10, max_relative = 1e-9);
        // the bands quoted alongside the formula
        assert_abs_diff_eq!(f.value(), 1.995e-9, epsilon = 1e-12);
        assert_abs_diff_eq!(f.sigma(), 4.6e-10, epsilon = 1e-12);
    }

    #[test]
    fn db_rejects_multiplication() {
        assert!(matches!(
            q_mul(db(3.0, 0.0), q(1.0, 0.0)),
            Err(QuantityError::DecibelArithmetic)
        ));
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(Quantity::dimensionless(1.0, -0.1).is_err());
    }
}
