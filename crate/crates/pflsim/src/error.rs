//! CLI error taxonomy mapped onto the exit-code contract:
//! 2 config/validation, 3 numerical failure, 4 I/O.

use pfl_optics::diffraction::DiffractionError;
use pfl_optics::fitting::FitError;
use pfl_optics::fluorescence::FluorescenceError;
use pfl_optics::lens::LensError;
use pfl_optics::quantities::QuantityError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<LensError> for CliError {
    fn from(e: LensError) -> Self {
        CliError::Config(format!("invalid prescription: {e}"))
    }
}

impl From<QuantityError> for CliError {
    fn from(e: QuantityError) -> Self {
        CliError::Config(format!("invalid quantity: {e}"))
    }
}

impl From<DiffractionError> for CliError {
    fn from(e: DiffractionError) -> Self {
        match e {
            DiffractionError::Lens(inner) => inner.into(),
            DiffractionError::UnderResolvedGrid { got, need } => CliError::Config(format!(
                "{e}: lower the grid step from {got:.3e} m below {need:.3e} m, \
                 or run with --fast to simulate the reduced-aperture lens"
            )),
            DiffractionError::NotBinary(_)
            | DiffractionError::OffsetTooLarge(_)
            | DiffractionError::BadOffsets
            | DiffractionError::BadZList => CliError::Config(e.to_string()),
            DiffractionError::BadField
            | DiffractionError::DegenerateCurve(_)
            | DiffractionError::WindowOverflow => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<FluorescenceError> for CliError {
    fn from(e: FluorescenceError) -> Self {
        match e {
            FluorescenceError::NegativeSaturation(_)
            | FluorescenceError::BadTransition
            | FluorescenceError::BadMicromotion => CliError::Config(e.to_string()),
            FluorescenceError::Series(_) | FluorescenceError::BisectionFailure => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

/// Used after the input structs have passed `validate()`: an out-of-range
/// efficiency at this stage is an inconsistent inference, not a bad config.
impl From<pfl_optics::budget::BudgetError> for CliError {
    fn from(e: pfl_optics::budget::BudgetError) -> Self {
        use pfl_optics::budget::BudgetError;
        match e {
            BudgetError::Quantity(inner) => inner.into(),
            BudgetError::BadInput(_) => CliError::Config(e.to_string()),
            BudgetError::EfficiencyOutOfRange { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::MismatchedLengths
            | FitError::TooFewPoints { .. }
            | FitError::NotFinite
            | FitError::BadSigma => CliError::Config(e.to_string()),
            FitError::NoInteriorMinimum | FitError::DegenerateData | FitError::Series(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}
