//! Shared sampled-curve primitives (half-max widths, trapezoid areas).

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series needs >= 3 points, got {0}")]
    TooShort(usize),
    #[error("abscissa must be strictly increasing")]
    NotIncreasing,
    #[error("maximum sits on the series boundary, no interior peak")]
    NoInteriorMaximum,
    #[error("no half-maximum crossing within the sampled range")]
    NoCrossing,
    #[error("series values must be finite")]
    NotFinite,
}

fn check(x: &[f64], y: &[f64]) -> Result<(), SeriesError> {
    if x.len() < 3 || x.len() != y.len() {
        return Err(SeriesError::TooShort(x.len().min(y.len())));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SeriesError::NotIncreasing);
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(SeriesError::NotFinite);
    }
    Ok(())
}

/// Full width at half of the global maximum: distance between the outermost
/// rising and falling half-level crossings, linearly interpolated.
pub fn fwhm(x: &[f64], y: &[f64]) -> Result<f64, SeriesError> {
    let (left, right) = half_max_span(x, y)?;
    Ok(right - left)
}

/// The outermost half-maximum crossings themselves, for callers that also
/// need the line center.
pub fn half_max_span(x: &[f64], y: &[f64]) -> Result<(f64, f64), SeriesError> {
    check(x, y)?;
    let (i_max, &y_max) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("len checked");
    if i_max == 0 || i_max == y.len() - 1 {
        return Err(SeriesError::NoInteriorMaximum);
    }
    let half = y_max / 2.0;
    let mut left = None;
    for i in 0..y.len() - 1 {
        if y[i] < half && y[i + 1] >= half {
            let t = (half - y[i]) / (y[i + 1] - y[i]);
            left = Some(x[i] + t * (x[i + 1] - x[i]));
            break;
        }
    }
    let mut right = None;
    for i in (0..y.len() - 1).rev() {
        if y[i] >= half && y[i + 1] < half {
            let t = (half - y[i]) / (y[i + 1] - y[i]);
            right = Some(x[i] + t * (x[i + 1] - x[i]));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) if r > l => Ok((l, r)),
        _ => Err(SeriesError::NoCrossing),
    }
}

/// Trapezoid-rule integral of y dx.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (yw[0] + yw[1]) * (xw[1] - xw[0]))
        .sum()
}

/// Evenly spaced grid including both endpoints.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + i as f64 * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triangle_peak() {
        let x = vec![-1.0, 0.0, 1.0];
        let y = vec![0.0, 1.0, 0.0];
        assert_relative_eq!(fwhm(&x, &y).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn monotone_series_has_no_peak() {
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let y = vec![0.0, 1.0, 2.0, 3.0];
        assert!(matches!(fwhm(&x, &y), Err(SeriesError::NoInteriorMaximum)));
    }

    #[test]
    fn plateau_above_half_everywhere_is_an_error() {
        let x = vec![0.0, 1.0, 2.0];
        let y = vec![0.9, 1.0, 0.9];
        assert!(matches!(fwhm(&x, &y), Err(SeriesError::NoCrossing)));
    }

    #[test]
    fn outermost_crossings_bracket_multi_lobed_curves() {
        // two lobes above half with a dip between them: outer span, not lobe width
        let x: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let y = vec![0.0, 0.2, 1.0, 0.55, 0.4, 0.55, 1.0, 0.2, 0.0];
        let w = fwhm(&x, &y).unwrap();
        assert!(w > 4.0, "outer span expected, got {w}");
    }

    #[test]
    fn trapezoid_matches_closed_form() {
        let x = linspace(0.0, 2.0, 2001);
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert_relative_eq!(trapezoid(&x, &y), 8.0 / 3.0, max_relative = 1e-6);
    }
}
