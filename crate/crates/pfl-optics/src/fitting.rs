//! Nonlinear least squares (Levenberg-Marquardt) plus the two fit models
//! used by the imaging analysis: the focus hyperbola and the scalloped
//! micromotion spectrum.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::fluorescence::{spectrum_sideband, MicromotionParams, Transition};
use crate::series::{self, SeriesError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FitError {
    #[error("x, y and sigma arrays must be equal-length and non-empty")]
    MismatchedLengths,
    #[error("{params}-parameter fit needs at least {need} points, got {got}")]
    TooFewPoints {
        params: usize,
        need: usize,
        got: usize,
    },
    #[error("data and initial guesses must be finite")]
    NotFinite,
    #[error("y sigmas must be positive")]
    BadSigma,
    #[error("data have no interior minimum to seed the focus fit")]
    NoInteriorMinimum,
    #[error("data are degenerate (no spread in y)")]
    DegenerateData,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// A sampled curve to fit; `y_sigma` (if given) weights the residuals.
#[derive(Clone, Debug)]
pub struct DataSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_sigma: Option<Vec<f64>>,
}

impl DataSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, FitError> {
        let s = DataSeries {
            x,
            y,
            y_sigma: None,
        };
        s.check_shape()?;
        Ok(s)
    }

    pub fn with_sigma(x: Vec<f64>, y: Vec<f64>, y_sigma: Vec<f64>) -> Result<Self, FitError> {
        let s = DataSeries {
            x,
            y,
            y_sigma: Some(y_sigma),
        };
        s.check_shape()?;
        Ok(s)
    }

    fn check_shape(&self) -> Result<(), FitError> {
        if self.x.is_empty() || self.x.len() != self.y.len() {
            return Err(FitError::MismatchedLengths);
        }
        if let Some(s) = &self.y_sigma {
            if s.len() != self.x.len() {
                return Err(FitError::MismatchedLengths);
            }
            if s.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(FitError::BadSigma);
            }
        }
        if self
            .x
            .iter()
            .chain(self.y.iter())
            .any(|v| !v.is_finite())
        {
            return Err(FitError::NotFinite);
        }
        Ok(())
    }

    /// Canonical point order (sorted by x, then y): fit results become
    /// invariant under permutation of the input points.
    fn canonical(&self) -> DataSeries {
        let mut idx: Vec<usize> = (0..self.x.len()).collect();
        idx.sort_by(|&a, &b| {
            self.x[a]
                .total_cmp(&self.x[b])
                .then(self.y[a].total_cmp(&self.y[b]))
        });
        DataSeries {
            x: idx.iter().map(|&i| self.x[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            y_sigma: self
                .y_sigma
                .as_ref()
                .map(|s| idx.iter().map(|&i| s[i]).collect()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub parameters: Vec<f64>,
    pub parameter_sigmas: Vec<f64>,
    /// L2 norm of the (weighted) residual vector at the solution.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Populated when the fit ends abnormally (singular normal matrix,
    /// damping blow-up, iteration cap).
    pub diagnostic: Option<String>,
}

const MAX_ITERATIONS: usize = 500;
const REL_PARAM_TOL: f64 = 1e-10;
const REL_RESIDUAL_TOL: f64 = 1e-12;

/// Levenberg-Marquardt with additive damping and delayed gratification
/// (damping x2 on a rejected step, /3 on an accepted one). `model` fills
/// `out[i] = f(params, x[i])`. The Jacobian is forward-difference with
/// step max(1e-8, 1e-6 |p|). Parameter sigmas come from the inverse normal
/// matrix scaled by the reduced chi-square.
pub fn least_squares<F>(
    model: F,
    n_params: usize,
    data: &DataSeries,
    initial: &[f64],
) -> Result<FitResult, FitError>
where
    F: Fn(&[f64], &[f64], &mut [f64]),
{
    if n_params == 0 || initial.len() != n_params {
        return Err(FitError::MismatchedLengths);
    }
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(FitError::NotFinite);
    }
    data.check_shape()?;
    let n = data.x.len();
    if n < n_params + 1 {
        return Err(FitError::TooFewPoints {
            params: n_params,
            need: n_params + 1,
            got: n,
        });
    }
    let data = data.canonical();
    let inv_sigma: Vec<f64> = match &data.y_sigma {
        Some(s) => s.iter().map(|v| 1.0 / v).collect(),
        None => vec![1.0; n],
    };

    let mut scratch = vec![0.0_f64; n];
    let mut residuals = |p: &[f64], out: &mut DVector<f64>| -> bool {
        model(p, &data.x, &mut scratch);
        for i in 0..n {
            let r = (scratch[i] - data.y[i]) * inv_sigma[i];
            if !r.is_finite() {
                return false;
            }
            out[i] = r;
        }
        true
    };

    let mut p = DVector::from_column_slice(initial);
    let mut r = DVector::zeros(n);
    if !residuals(p.as_slice(), &mut r) {
        return Err(FitError::NotFinite);
    }
    let mut cost = r.norm_squared();

    let jacobian = |p: &DVector<f64>,
                    r0: &DVector<f64>,
                    residuals: &mut dyn FnMut(&[f64], &mut DVector<f64>) -> bool|
     -> DMatrix<f64> {
        let mut j = DMatrix::zeros(n, n_params);
        let mut r_h = DVector::zeros(n);
        for col in 0..n_params {
            let h = (1e-6 * p[col].abs()).max(1e-8);
            let mut p_h = p.clone();
            p_h[col] += h;
            let ok = residuals(p_h.as_slice(), &mut r_h);
            let (r_used, step) = if ok {
                (&r_h, h)
            } else {
                // forward point undefined: fall back to a backward step
                p_h[col] = p[col] - h;
                if residuals(p_h.as_slice(), &mut r_h) {
                    (&r_h, -h)
                } else {
                    continue; // leave the column zero
                }
            };
            for row in 0..n {
                j[(row, col)] = (r_used[row] - r0[row]) / step;
            }
        }
        j
    };

    let mut converged = false;
    let mut diagnostic = None;
    let mut iterations = 0;
    let mut lambda = f64::NAN; // initialized from the first normal matrix

    'outer: for iter in 1..=MAX_ITERATIONS {
        iterations = iter;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let j = jacobian(&p, &r, &mut residuals);
        let a = j.transpose() * &j;
        let g = j.transpose() * &r;
        // column norms equilibrate parameter scales (a detuning in rad/s and
        // a dimensionless depth can differ by 10^8); both the convergence
        // measure and the covariance work in this scaled space
        let scales: Vec<f64> = (0..n_params)
            .map(|c| {
                let nrm = j.column(c).norm();
                if nrm > 0.0 {
                    nrm
                } else {
                    1.0
                }
            })
            .collect();
        if lambda.is_nan() {
            let max_diag = (0..n_params).map(|i| a[(i, i)]).fold(0.0_f64, f64::max);
            lambda = 1e-3 * max_diag.max(1e-30);
        }

        loop {
            let mut damped = a.clone();
            for i in 0..n_params {
                damped[(i, i)] += lambda;
            }
            let step = damped.lu().solve(&g);
            let accepted = match step {
                Some(delta) if delta.iter().all(|v| v.is_finite()) => {
                    let p_try = &p - &delta;
                    let mut r_try = DVector::zeros(n);
                    if residuals(p_try.as_slice(), &mut r_try) {
                        let cost_try = r_try.norm_squared();
                        if cost_try < cost {
                            let scaled = |v: &DVector<f64>| {
                                v.iter()
                                    .zip(&scales)
                                    .map(|(x, s)| (x * s) * (x * s))
                                    .sum::<f64>()
                                    .sqrt()
                            };
                            let rel_param = scaled(&delta) / (scaled(&p_try) + 1e-300);
                            let rel_resid = (cost - cost_try) / cost;
                            p = p_try;
                            r = r_try;
                            cost = cost_try;
                            lambda /= 3.0;
                            if rel_param < REL_PARAM_TOL || rel_resid < REL_RESIDUAL_TOL {
                                converged = true;
                            }
                            true
                        } else {
                            false
                        }
                    } else {
                        false
                    }
                }
                _ => false,
            };
            if accepted {
                break;
            }
            lambda *= 2.0;
            if lambda > 1e100 {
                diagnostic = Some("damping blew up; normal matrix singular or stalled".into());
                break 'outer;
            }
        }
        if converged {
            break;
        }
    }
    if !converged && diagnostic.is_none() {
        diagnostic = Some(format!("iteration cap {MAX_ITERATIONS} reached"));
    }

    // Covariance at the solution: (J^T W J)^-1 scaled by reduced chi-square,
    // inverted in column-equilibrated form for numerical headroom.
    let j = jacobian(&p, &r, &mut residuals);
    let a = j.transpose() * &j;
    let dof = (n - n_params).max(1) as f64;
    let scale = cost / dof;
    let col_norms: Vec<f64> = (0..n_params).map(|c| j.column(c).norm()).collect();
    let max_norm = col_norms.iter().cloned().fold(0.0_f64, f64::max);
    let degenerate =
        max_norm == 0.0 || col_norms.iter().any(|&nrm| nrm < 1e-12 * max_norm);
    let sigmas = if degenerate {
        None
    } else {
        let mut a_hat = a;
        for i in 0..n_params {
            for k in 0..n_params {
                a_hat[(i, k)] /= col_norms[i] * col_norms[k];
            }
        }
        let inv = match a_hat.clone().cholesky() {
            Some(ch) => Some(ch.inverse()),
            None => a_hat.try_inverse(),
        };
        inv.map(|m| {
            (0..n_params)
                .map(|i| ((m[(i, i)] * scale).max(0.0)).sqrt() / col_norms[i])
                .collect()
        })
    };
    let (parameter_sigmas, converged) = match sigmas {
        Some(s) => (s, converged),
        None => {
            diagnostic = Some("singular normal matrix at the solution".into());
            (vec![f64::NAN; n_params], false)
        }
    };

    Ok(FitResult {
        parameters: p.as_slice().to_vec(),
        parameter_sigmas,
        residual_norm: cost.sqrt(),
        converged,
        iterations,
        diagnostic,
    })
}

/// Focus-scan model: y(z) = y0 sqrt(1 + ((z - z0)/w0)^2).
/// Parameters in order (y0, w0, z0); the reported w0 is non-negative.
pub fn fit_focus_hyperbola(data: &DataSeries) -> Result<FitResult, FitError> {
    let canonical = data.canonical();
    let n = canonical.x.len();
    if n < 4 {
        return Err(FitError::TooFewPoints {
            params: 3,
            need: 4,
            got: n,
        });
    }
    let (i_min, &y_min) = canonical
        .y
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let y_max = canonical.y.iter().cloned().fold(f64::MIN, f64::max);
    if y_max <= y_min {
        return Err(FitError::DegenerateData);
    }
    if i_min == 0 || i_min == n - 1 {
        return Err(FitError::NoInteriorMinimum);
    }
    let initial = [
        y_min,
        (canonical.x[n - 1] - canonical.x[0]) / 2.0,
        canonical.x[i_min],
    ];
    let mut result = least_squares(hyperbola_model, 3, &canonical, &initial)?;
    result.parameters[1] = result.parameters[1].abs(); // w0 enters squared
    Ok(result)
}

fn hyperbola_model(p: &[f64], xs: &[f64], out: &mut [f64]) {
    let (y0, w0, z0) = (p[0], p[1], p[2]);
    for (o, &x) in out.iter_mut().zip(xs) {
        let t = (x - z0) / w0;
        *o = y0 * (1.0 + t * t).sqrt();
    }
}

/// Scalloped-spectrum model: amplitude x sideband spectrum + offset, with
/// the line center delta0 free. `x`, `gamma` and `rf_omega` share units
/// (angular frequency). Parameters in order (beta, s, delta0, amplitude,
/// offset); beta and s enter through |.| and are reported non-negative.
pub fn fit_scalloped(
    data: &DataSeries,
    gamma: f64,
    rf_omega: f64,
) -> Result<FitResult, FitError> {
    if !(gamma > 0.0) || !(rf_omega > 0.0) {
        return Err(FitError::NotFinite);
    }
    let canonical = data.canonical();
    let n = canonical.x.len();
    if n < 6 {
        return Err(FitError::TooFewPoints {
            params: 5,
            need: 6,
            got: n,
        });
    }
    let offset0 = canonical.y.iter().cloned().fold(f64::MAX, f64::min);
    let peak = canonical.y.iter().cloned().fold(f64::MIN, f64::max);
    if peak <= offset0 {
        return Err(FitError::DegenerateData);
    }
    let above: Vec<f64> = canonical.y.iter().map(|v| v - offset0).collect();
    let (left, right) = series::half_max_span(&canonical.x, &above)?;
    let beta0 = (right - left) / (2.0 * rf_omega);
    let delta0 = (left + right) / 2.0;

    let model = move |p: &[f64], xs: &[f64], out: &mut [f64]| {
        let mm = MicromotionParams {
            beta: p[0].abs(),
            rf_omega,
        };
        let t = Transition {
            wavelength: 1e-6, // unused by the line shape
            gamma,
        };
        let shifted: Vec<f64> = xs.iter().map(|&x| x - p[2]).collect();
        match spectrum_sideband(t, mm, p[1].abs(), &shifted) {
            Ok(rates) => {
                for (o, v) in out.iter_mut().zip(rates) {
                    *o = p[3] * v + p[4];
                }
            }
            Err(_) => out.fill(f64::NAN),
        }
    };

    // amplitude guess: match the observed peak height to the model peak on
    // the data grid at the initial (beta, s)
    let s0 = 1.0;
    let mut probe = vec![0.0; n];
    model(&[beta0, s0, delta0, 1.0, 0.0], &canonical.x, &mut probe);
    let probe_peak = probe.iter().cloned().fold(f64::MIN, f64::max);
    let amplitude0 = if probe_peak > 0.0 {
        (peak - offset0) / probe_peak
    } else {
        1.0
    };

    let initial = [beta0, s0, delta0, amplitude0, offset0];
    let mut result = least_squares(&model, 5, &canonical, &initial)?;
    result.parameters[0] = result.parameters[0].abs();
    result.parameters[1] = result.parameters[1].abs();
    Ok(result)
}

/// Width at half maximum of a sampled series (measurement primitive used
/// on both spectra and focus scans).
pub fn fwhm_of_series(data: &DataSeries) -> Result<f64, FitError> {
    data.check_shape()?;
    Ok(series::fwhm(&data.x, &data.y)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::linspace;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::PI;

    fn hyperbola_series(y0: f64, w0: f64, z0: f64, n: usize, span: f64) -> DataSeries {
        let x = linspace(-span, span, n);
        let y: Vec<f64> = x
            .iter()
            .map(|&z| {
                let t = (z - z0) / w0;
                y0 * (1.0 + t * t).sqrt()
            })
            .collect();
        DataSeries::new(x, y).unwrap()
    }

    #[test]
    fn exact_linear_recovery() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let data = DataSeries::new(x, y).unwrap();
        let linear = |p: &[f64], xs: &[f64], out: &mut [f64]| {
            for (o, &x) in out.iter_mut().zip(xs) {
                *o = p[0] * x;
            }
        };
        let fit = least_squares(linear, 1, &data, &[0.5]).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.parameters[0], 2.0, max_relative = 1e-10);
    }

    #[test]
    fn two_parameter_hyperbola_from_coarse_start() {
        let data = hyperbola_series(3.7, 9.7, 0.0, 25, 30.0);
        let centered = |p: &[f64], xs: &[f64], out: &mut [f64]| {
            for (o, &x) in out.iter_mut().zip(xs) {
                let t = x / p[1];
                *o = p[0] * (1.0 + t * t).sqrt();
            }
        };
        let fit = least_squares(centered, 2, &data, &[5.0, 5.0]).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.parameters[0], 3.7, max_relative = 1e-6);
        assert_relative_eq!(fit.parameters[1].abs(), 9.7, max_relative = 1e-6);
    }

    #[test]
    fn constant_zero_data_do_not_crash() {
        let x = linspace(-10.0, 10.0, 15);
        let y = vec![0.0; 15];
        let data = DataSeries::new(x, y).unwrap();
        let fit = least_squares(hyperbola_model, 3, &data, &[1.0, 5.0, 0.0]).unwrap();
        assert!(!fit.converged || fit.diagnostic.is_some());
    }

    #[test]
    fn focus_fit_recovers_depth_of_focus() {
        let data = hyperbola_series(3.7, 9.7, 0.0, 25, 24.0);
        let fit = fit_focus_hyperbola(&data).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.parameters[0], 3.7, max_relative = 1e-6);
        assert_relative_eq!(2.0 * fit.parameters[1], 19.4, max_relative = 1e-6);
        assert!(fit.parameters[2].abs() < 1e-6);
    }

    #[test]
    fn focus_fit_flags_bad_data() {
        let x = linspace(0.0, 10.0, 8);
        let rising: Vec<f64> = x.iter().map(|v| 1.0 + v).collect();
        let data = DataSeries::new(x.clone(), rising).unwrap();
        assert!(matches!(
            fit_focus_hyperbola(&data),
            Err(FitError::NoInteriorMinimum)
        ));

        let flat = DataSeries::new(x, vec![2.0; 8]).unwrap();
        assert!(matches!(
            fit_focus_hyperbola(&flat),
            Err(FitError::DegenerateData)
        ));
    }

    #[test]
    fn focus_fit_monte_carlo_coverage() {
        let truth = (3.7, 9.7, 0.0);
        let clean = hyperbola_series(truth.0, truth.1, truth.2, 20, 25.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0xF0C05);
        let trials = 100;
        let mut covered_y0 = 0;
        let mut covered_w0 = 0;
        let mut within_10pct = 0;
        for _ in 0..trials {
            let noisy: Vec<f64> = clean
                .y
                .iter()
                .map(|&v| v * (1.0 + 0.05 * rng.sample::<f64, _>(StandardNormal)))
                .collect();
            let data = DataSeries::new(clean.x.clone(), noisy).unwrap();
            let fit = fit_focus_hyperbola(&data).unwrap();
            assert!(fit.converged);
            let (y0, w0) = (fit.parameters[0], fit.parameters[1]);
            let (s_y0, s_w0) = (fit.parameter_sigmas[0], fit.parameter_sigmas[1]);
            if (y0 - truth.0).abs() <= 2.0 * s_y0 {
                covered_y0 += 1;
            }
            if (w0 - truth.1).abs() <= 2.0 * s_w0 {
                covered_w0 += 1;
            }
            if (y0 / truth.0 - 1.0).abs() < 0.10 && (w0 / truth.1 - 1.0).abs() < 0.10 {
                within_10pct += 1;
            }
        }
        assert!(covered_y0 >= 90, "y0 coverage {covered_y0}/{trials}");
        assert!(covered_w0 >= 90, "w0 coverage {covered_w0}/{trials}");
        assert!(within_10pct >= 90, "10% accuracy {within_10pct}/{trials}");
    }

    fn scalloped_series(
        beta: f64,
        s: f64,
        delta0: f64,
        amplitude: f64,
        offset: f64,
        n: usize,
    ) -> DataSeries {
        let gamma = 2.0 * PI * 19.6e6;
        let rf = 2.0 * PI * 20.0e6;
        let span = 2.0 * PI * 500.0e6;
        let x = linspace(-span, span, n);
        let t = Transition {
            wavelength: 369.5e-9,
            gamma,
        };
        let mm = MicromotionParams {
            beta,
            rf_omega: rf,
        };
        let shifted: Vec<f64> = x.iter().map(|&v| v - delta0).collect();
        let base = spectrum_sideband(t, mm, s, &shifted).unwrap();
        let y: Vec<f64> = base.iter().map(|&v| amplitude * v + offset).collect();
        DataSeries::new(x, y).unwrap()
    }

    #[test]
    fn scalloped_fit_recovers_modulation_depth() {
        let data = scalloped_series(7.6, 0.5, 2.0 * PI * 1.5e6, 2.4e-3, 120.0, 321);
        let fit = fit_scalloped(&data, 2.0 * PI * 19.6e6, 2.0 * PI * 20.0e6).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.parameters[0], 7.6, max_relative = 1e-2);
        assert_relative_eq!(fit.parameters[1], 0.5, max_relative = 0.05);
        assert_relative_eq!(fit.parameters[2], 2.0 * PI * 1.5e6, max_relative = 1e-2);
    }

    #[test]
    fn scalloped_fit_degenerate_limit_is_lorentzian() {
        let data = scalloped_series(0.0, 0.5, 0.0, 2.4e-3, 120.0, 321);
        let fit = fit_scalloped(&data, 2.0 * PI * 19.6e6, 2.0 * PI * 20.0e6).unwrap();
        assert!(fit.parameters[0] < 0.2, "beta = {}", fit.parameters[0]);
    }

    #[test]
    fn scalloped_fit_monte_carlo_band() {
        let clean = scalloped_series(7.6, 0.5, 0.0, 2.4e-3, 120.0, 241);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5CA1);
        let trials = 100;
        let mut in_band = 0;
        for _ in 0..trials {
            let noisy: Vec<f64> = clean
                .y
                .iter()
                .map(|&v| v * (1.0 + 0.03 * rng.sample::<f64, _>(StandardNormal)))
                .collect();
            let data = DataSeries::new(clean.x.clone(), noisy).unwrap();
            let fit = fit_scalloped(&data, 2.0 * PI * 19.6e6, 2.0 * PI * 20.0e6).unwrap();
            if (fit.parameters[0] - 7.6).abs() <= 0.5 {
                in_band += 1;
            }
        }
        assert!(in_band >= 90, "beta in band {in_band}/{trials}");
    }

    #[test]
    fn fits_are_order_invariant() {
        let clean = hyperbola_series(3.7, 9.7, 1.5, 21, 25.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noisy: Vec<f64> = clean
            .y
            .iter()
            .map(|&v| v * (1.0 + 0.05 * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let data = DataSeries::new(clean.x.clone(), noisy).unwrap();
        let fit = fit_focus_hyperbola(&data).unwrap();

        // reversed point order must give bit-identical parameters
        let mut x_rev = data.x.clone();
        let mut y_rev = data.y.clone();
        x_rev.reverse();
        y_rev.reverse();
        let reversed = DataSeries::new(x_rev, y_rev).unwrap();
        let fit_rev = fit_focus_hyperbola(&reversed).unwrap();
        for (a, b) in fit.parameters.iter().zip(&fit_rev.parameters) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rescaling_x_leaves_residual_norm() {
        let data = hyperbola_series(3.7, 9.7, 0.0, 21, 25.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noisy: Vec<f64> = data
            .y
            .iter()
            .map(|&v| v * (1.0 + 0.02 * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let base = DataSeries::new(data.x.clone(), noisy.clone()).unwrap();
        let fit = fit_focus_hyperbola(&base).unwrap();

        let c = 1.0e3;
        let scaled = DataSeries::new(data.x.iter().map(|v| v * c).collect(), noisy).unwrap();
        let fit_scaled = fit_focus_hyperbola(&scaled).unwrap();
        assert_relative_eq!(
            fit.residual_norm,
            fit_scaled.residual_norm,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            fit_scaled.parameters[1],
            c * fit.parameters[1],
            max_relative = 1e-6
        );
    }

    #[test]
    fn residual_norm_never_exceeds_initial() {
        let clean = hyperbola_series(3.7, 9.7, 0.0, 21, 25.0);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let noisy: Vec<f64> = clean
            .y
            .iter()
            .map(|&v| v * (1.0 + 0.08 * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let data = DataSeries::new(clean.x.clone(), noisy).unwrap();
        let initial = [3.0, 12.0, 1.0];
        let fit = least_squares(hyperbola_model, 3, &data, &initial).unwrap();

        let mut model0 = vec![0.0; data.x.len()];
        hyperbola_model(&initial, &data.x, &mut model0);
        let initial_norm: f64 = model0
            .iter()
            .zip(&data.y)
            .map(|(m, y)| (m - y) * (m - y))
            .sum::<f64>()
            .sqrt();
        assert!(fit.residual_norm <= initial_norm * (1.0 + 1e-12));
    }

    #[test]
    fn solution_is_independent_of_start_inside_basin() {
        let data = hyperbola_series(3.7, 9.7, 0.0, 25, 24.0);
        let reference = least_squares(hyperbola_model, 3, &data, &[3.7, 9.7, 0.0]).unwrap();
        for start in [
            [1.85, 9.7, 0.0],
            [5.55, 9.7, 0.0],
            [3.7, 4.85, 0.0],
            [3.7, 14.55, 0.0],
            [3.7, 9.7, 4.85],
            [5.0, 13.0, -4.0],
        ] {
            let fit = least_squares(hyperbola_model, 3, &data, &start).unwrap();
            assert!(fit.converged, "start {start:?} failed to converge");
            for (a, b) in fit.parameters.iter().zip(&reference.parameters) {
                assert_relative_eq!(a.abs(), b.abs(), epsilon = 1e-9, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn uniform_weights_do_not_change_parameters() {
        let clean = hyperbola_series(3.7, 9.7, 0.0, 21, 25.0);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let noisy: Vec<f64> = clean
            .y
            .iter()
            .map(|&v| v * (1.0 + 0.05 * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let plain = DataSeries::new(clean.x.clone(), noisy.clone()).unwrap();
        let weighted =
            DataSeries::with_sigma(clean.x.clone(), noisy, vec![2.0; clean.x.len()]).unwrap();
        let a = fit_focus_hyperbola(&plain).unwrap();
        let b = fit_focus_hyperbola(&weighted).unwrap();
        for i in 0..3 {
            assert_relative_eq!(a.parameters[i], b.parameters[i], max_relative = 1e-8);
            assert_relative_eq!(
                a.parameter_sigmas[i],
                b.parameter_sigmas[i],
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn fwhm_primitive_anchors() {
        let tri = DataSeries::new(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(fwhm_of_series(&tri).unwrap(), 1.0, max_relative = 1e-12);

        let x = linspace(-200.0, 200.0, 4001); // MHz
        let y: Vec<f64> = x
            .iter()
            .map(|&d| 1.0 / (1.0 + (2.0 * d / 19.6).powi(2)))
            .collect();
        let lorentz = DataSeries::new(x, y).unwrap();
        let w = fwhm_of_series(&lorentz).unwrap();
        assert!((w / 19.6 - 1.0).abs() < 0.01, "FWHM {w} MHz");

        let rising = DataSeries::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]).unwrap();
        assert!(fwhm_of_series(&rising).is_err());
    }

    #[test]
    fn shape_validation() {
        assert!(matches!(
            DataSeries::new(vec![1.0, 2.0], vec![1.0]),
            Err(FitError::MismatchedLengths)
        ));
        assert!(matches!(
            DataSeries::with_sigma(vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 0.0]),
            Err(FitError::BadSigma)
        ));
        let tiny = DataSeries::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            least_squares(hyperbola_model, 3, &tiny, &[1.0, 1.0, 0.0]),
            Err(FitError::TooFewPoints { .. })
        ));
    }
}
