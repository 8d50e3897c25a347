//! Per-mode orchestration: validate, compute, and assemble output files.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use pfl_optics::budget::{
    collection_efficiency, contrast_ratio, emitted_rate, flux_at_lens, forward_detected_rate,
    infer_qe, inferred_diffraction_efficiency, photon_rate_from_power, projected_efficiency,
    CalibrationRun, DetectionChain, EmissionModel,
};
use pfl_optics::diffraction::{
    double_area_range, focal_psf, gaussian_defocus_curve, spot_vs_defocus, spot_vs_field_offset,
    SpotCurve, SpotObservable,
};
use pfl_optics::fitting::{
    fit_focus_hyperbola, fit_scalloped, least_squares, DataSeries, FitResult,
};
use pfl_optics::fluorescence::{
    default_detuning_grid, peak_rate_ratio, peak_rate_ratio_phase_averaged, saturation_scale,
    spectrum_fwhm, spectrum_phase_averaged, spectrum_sideband, MicromotionParams, Transition,
};
use pfl_optics::lens::{
    groove_depth, ideal_multilevel_efficiency, numerical_aperture, sellmeier_index,
    solid_angle_fraction, zone_radii, LensPrescription,
};
use pfl_optics::quantities::{q_div, q_mul, Dimension, Quantity};
use pfl_optics::series::linspace;

use crate::config::{FitKind, JobConfig, Mode, PsfModel, Vs};
use crate::error::CliError;
use crate::report::{num, Csv, Files, Stamp};

pub struct Context {
    pub stamp: Stamp,
    pub fast: bool,
    pub seed: u64,
    /// Directory of the config file; relative data paths resolve here.
    pub config_dir: PathBuf,
}

pub fn run(job: &JobConfig, ctx: &Context) -> Result<Files, CliError> {
    match job.mode {
        Mode::Design => run_design(job, ctx),
        Mode::Psf => run_psf(job, ctx),
        Mode::Spectrum => run_spectrum(job, ctx),
        Mode::Budget => run_budget(job, ctx),
        Mode::Fit => run_fit(job, ctx),
        Mode::Tolerance => run_tolerance(job, ctx),
    }
}

fn effective_prescription(p: &LensPrescription, fast: bool) -> LensPrescription {
    if fast {
        p.scaled(0.1)
    } else {
        p.clone()
    }
}

fn quantity(vs: Vs, dimension: Dimension, name: &str) -> Result<Quantity, CliError> {
    Quantity::new(vs.0, vs.1, dimension)
        .map_err(|e| CliError::Config(format!("{name}: {e}")))
}

fn run_design(job: &JobConfig, ctx: &Context) -> Result<Files, CliError> {
    let p = job.lens()?.prescription();
    p.validate()?;
    let zones = zone_radii(&p)?;
    let na = numerical_aperture(&p)?;
    let solid = solid_angle_fraction(na)?;
    let index = sellmeier_index(&p.substrate, p.design_wavelength)?;
    let groove = groove_depth(p.design_wavelength, index)?;
    let efficiency = ideal_multilevel_efficiency(p.phase_levels)?;

    let mut report = Csv::new(&ctx.stamp, "name,value");
    report.row(&["zone_count", &zones.count().to_string()]);
    report.row(&["numerical_aperture", &num(na)]);
    report.row(&["solid_angle_fraction", &num(solid)]);
    report.row(&["refractive_index", &num(index)]);
    report.row(&["groove_depth_m", &num(groove)]);
    report.row(&["phase_levels", &p.phase_levels.to_string()]);
    report.row(&["ideal_efficiency", &num(efficiency)]);
    report.row(&["innermost_zone_radius_m", &num(zones.radii[0])]);
    report.row(&["outermost_zone_width_m", &num(zones.outermost_width())]);

    let mut zcsv = Csv::new(&ctx.stamp, "index,radius_m");
    for (i, r) in zones.radii.iter().enumerate() {
        zcsv.row(&[&(i + 1).to_string(), &num(*r)]);
    }

    Ok(vec![
        ("design_report.csv", report.finish()),
        ("zones.csv", zcsv.finish()),
    ])
}

fn run_psf(job: &JobConfig, ctx: &Context) -> Result<Files, CliError> {
    let p = effective_prescription(&job.lens()?.prescription(), ctx.fast);
    p.validate()?;
    let profile = job.psf()?.profile;
    let metrics = focal_psf(&p, profile.to_lens_profile())?;
    let na = numerical_aperture(&p)?;

    let mut report = Csv::new(&ctx.stamp, "name,value");
    report.row(&["focal_length_m", &num(p.focal_length)]);
    report.row(&["aperture_diameter_m", &num(p.aperture_diameter)]);
    report.row(&["numerical_aperture", &num(na)]);
    report.row(&["fwhm_m", &num(metrics.fwhm)]);
    report.row(&["waist_1e2_radius_m", &num(metrics.waist_1e2_radius)]);
    report.row(&["peak_intensity_rel", &num(metrics.peak_intensity_rel)]);

    let mut enc = Csv::new(&ctx.stamp, "radius_m,fraction");
    for (r, f) in &metrics.encircled_energy {
        enc.row(&[&num(*r), &num(*f)]);
    }

    Ok(vec![
        ("psf_metrics.csv", report.finish()),
        ("encircled_energy.csv", enc.finish()),
    ])
}

fn run_spectrum(job: &JobConfig, ctx: &Context) -> Result<Files, CliError> {
    let s = job.spectrum()?;
    let t = Transition {
        wavelength: s.transition_wavelength_m,
        gamma: 2.0 * PI * s.natural_linewidth_hz,
    };
    let mm = MicromotionParams {
        beta: s.beta,
        rf_omega: 2.0 * PI * s.rf_frequency_hz,
    };
    let grid = default_detuning_grid(t, mm, s.grid_pad_linewidths, s.grid_points);
    let sideband = spectrum_sideband(t, mm, s.saturation, &grid)?;
    let averaged = spectrum_phase_averaged(t, mm, s.saturation, &grid)?;

    let mut spectrum = Csv::new(
        &ctx.stamp,
        "detuning_hz,rate_sideband_per_s,rate_phase_averaged_per_s",
    );
    for ((d, sb), pa) in grid.iter().zip(&sideband).zip(&averaged) {
        spectrum.row(&[&num(d / (2.0 * PI)), &num(*sb), &num(*pa)]);
    }

    let fwhm_sb = spectrum_fwhm(&grid, &sideband)? / (2.0 * PI);
    let fwhm_pa = spectrum_fwhm(&grid, &averaged)? / (2.0 * PI);
    let ratio_sb = peak_rate_ratio(t, mm, s.saturation)?;
    let ratio_pa = peak_rate_ratio_phase_averaged(t, mm, s.saturation)?;
    let sat_scale = saturation_scale(t, mm)?;

    let mut report = Csv::new(&ctx.stamp, "name,value");
    report.row(&["fwhm_sideband_hz", &num(fwhm_sb)]);
    report.row(&["fwhm_phase_averaged_hz", &num(fwhm_pa)]);
    // center-to-half-max distance: the other common linewidth convention
    report.row(&["half_width_sideband_hz", &num(fwhm_sb / 2.0)]);
    report.row(&["half_width_phase_averaged_hz", &num(fwhm_pa / 2.0)]);
    report.row(&["width_ratio", &num(fwhm_pa / fwhm_sb)]);
    report.row(&["peak_rate_ratio_sideband", &num(ratio_sb)]);
    report.row(&["peak_rate_ratio_phase_averaged", &num(ratio_pa)]);
    report.row(&["saturation_scale_sideband", &num(sat_scale)]);

    Ok(vec![
        ("spectrum.csv", spectrum.finish()),
        ("spectrum_report.csv", report.finish()),
    ])
}

fn run_budget(job: &JobConfig, ctx: &Context) -> Result<Files, CliError> {
    let b = job.budget()?;
    let cfg = |e: pfl_optics::budget::BudgetError| CliError::Config(e.to_string());

    let chain = DetectionChain {
        solid_angle_fraction: quantity(b.solid_angle_fraction, Dimension::DIMENSIONLESS, "budget.solid_angle_fraction")?,
        lens_diffraction_efficiency: quantity(b.lens_diffraction_efficiency, Dimension::DIMENSIONLESS, "budget.lens_diffraction_efficiency")?,
        window_transmission: quantity(b.window_transmission, Dimension::DIMENSIONLESS, "budget.window_transmission")?,
        filter_transmission: quantity(b.filter_transmission, Dimension::DIMENSIONLESS, "budget.filter_transmission")?,
        camera_qe: quantity(b.camera_qe, Dimension::DIMENSIONLESS, "budget.camera_qe")?,
    };
    chain.validate().map_err(cfg)?;

    let mut attenuators = Vec::with_capacity(b.attenuators_db.len());
    for (i, vs) in b.attenuators_db.iter().enumerate() {
        attenuators.push(quantity(*vs, Dimension::DECIBEL, &format!("budget.attenuators_db[{i}]"))?);
    }
    let run = CalibrationRun {
        laser_power: quantity(b.laser_power_w, Dimension::POWER, "budget.laser_power_w")?,
        wavelength: b.calibration_wavelength_m,
        attenuators_db: attenuators,
        total_db_override: match b.total_db_override {
            Some(vs) => Some(quantity(vs, Dimension::DECIBEL, "budget.total_db_override")?),
            None => None,
        },
        measured_rate: quantity(b.calibration_rate_cps, Dimension::RATE, "budget.calibration_rate_cps")?,
    };
    run.validate().map_err(cfg)?;

    let model = EmissionModel {
        transition: Transition {
            wavelength: b.emission_wavelength_m,
            gamma: 2.0 * PI * b.natural_linewidth_hz,
        },
        motion_reduction: quantity(b.motion_reduction, Dimension::DIMENSIONLESS, "budget.motion_reduction")?,
        saturated: true,
    };
    model.validate().map_err(cfg)?;

    let detected = quantity(b.detected_rate_cps, Dimension::RATE, "budget.detected_rate_cps")?;

    let photon_rate = photon_rate_from_power(run.laser_power, run.wavelength)?;
    let total_db = run.total_attenuation_db()?;
    let qe = infer_qe(&run)?;
    let flux = flux_at_lens(detected, &chain)?;
    let emitted = emitted_rate(&model)?;
    let half_gamma = Quantity::new(model.transition.gamma / 2.0, 0.0, Dimension::RATE)
        .expect("finite rate");
    let saturated_flux = q_mul(half_gamma, chain.solid_angle_fraction)?;
    let collection = collection_efficiency(flux, emitted)?;
    let diffraction = inferred_diffraction_efficiency(collection, chain.solid_angle_fraction)?;
    let forward = forward_detected_rate(&model, &chain)?;

    let projection = projected_efficiency(
        quantity(b.projection_solid_angle, Dimension::DIMENSIONLESS, "budget.projection_solid_angle")?,
        quantity(b.projection_diffraction_efficiency, Dimension::DIMENSIONLESS, "budget.projection_diffraction_efficiency")?,
    )?;
    let binary_limit = Quantity::new(4.0 / (PI * PI), 0.0, Dimension::DIMENSIONLESS)
        .expect("finite efficiency");
    let binary_ceiling = projected_efficiency(chain.solid_angle_fraction, binary_limit)?;

    let contrast = quantity(b.signal_to_background, Dimension::DIMENSIONLESS, "budget.signal_to_background")?;
    let background = Quantity::new(1.0, 0.0, Dimension::DIMENSIONLESS).expect("exact one");
    let contrast_measured = contrast_ratio(contrast, background)?;
    // at-rest signal projection: signal scaled by 1/motion_reduction,
    // background unchanged
    let contrast_projected = q_div(contrast_measured, model.motion_reduction)?;

    let mut report = Csv::new(&ctx.stamp, "name,value,sigma,unit");
    let mut row = |name: &str, q: Quantity, unit: &str| {
        report.row(&[name, &num(q.value()), &num(q.sigma()), unit]);
    };
    row("photon_rate_calibration", photon_rate, "1/s");
    row("total_attenuation", total_db, "dB");
    row("inferred_qe", qe, "");
    row("measured_detected_rate", detected, "1/s");
    row("flux_at_lens", flux, "1/s");
    row("emitted_rate_4pi", emitted, "1/s");
    row("saturated_flux_at_lens", saturated_flux, "1/s");
    row("collection_efficiency", collection, "");
    row("inferred_diffraction_efficiency", diffraction, "");
    row("forward_detected_rate", forward, "1/s");
    row("projected_collection_efficiency", projection, "");
    row("ideal_binary_ceiling", binary_ceiling, "");
    row("contrast_measured", contrast_measured, "");
    row("contrast_projected", contrast_projected, "");

    Ok(vec![("budget_report.csv", report.finish())])
}

/// Ingest a two- or three-column CSV (x, y[, sigma]); one header line,
/// leading '#' comment lines allowed.
fn read_series(path: &Path) -> Result<DataSeries, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read data file {}: {e}", path.display())))?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut sigma = Vec::new();
    let mut header_skipped = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_skipped {
            header_skipped = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 2 && cells.len() != 3 {
            return Err(CliError::Config(format!(
                "{}:{}: expected 2 or 3 columns, got {}",
                path.display(),
                lineno + 1,
                cells.len()
            )));
        }
        let parse = |cell: &str| {
            cell.parse::<f64>().map_err(|_| {
                CliError::Config(format!(
                    "{}:{}: \"{cell}\" is not a number",
                    path.display(),
                    lineno + 1
                ))
            })
        };
        x.push(parse(cells[0])?);
        y.push(parse(cells[1])?);
        if cells.len() == 3 {
            sigma.push(parse(cells[2])?);
        }
    }
    if !sigma.is_empty() && sigma.len() != x.len() {
        return Err(CliError::Config(format!(
            "{}: sigma column present on some rows but not all",
            path.display()
        )));
    }
    let series = if sigma.is_empty() {
        DataSeries::new(x, y)
    } else {
        DataSeries::with_sigma(x, y, sigma)
    };
    series.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

struct FitSetup {
    /// Data in model units (angular frequency for the scalloped kind).
    series: DataSeries,
    kind: FitKind,
    gamma: f64,
    rf_omega: f64,
}

impl FitSetup {
    fn check_converged(result: FitResult) -> Result<FitResult, CliError> {
        if !result.converged {
            return Err(CliError::Numerical(format!(
                "fit did not converge after {} iterations{}",
                result.iterations,
                result
                    .diagnostic
                    .as_deref()
                    .map(|d| format!(": {d}"))
                    .unwrap_or_default()
            )));
        }
        Ok(result)
    }

    fn fit(&self, series: &DataSeries) -> Result<FitResult, CliError> {
        let result = match self.kind {
            FitKind::Focus => fit_focus_hyperbola(series)?,
            FitKind::Scalloped => fit_scalloped(series, self.gamma, self.rf_omega)?,
        };
        Self::check_converged(result)
    }

    /// Refit from a known starting point (Monte-Carlo replicas perturb the
    /// best-fit model, so the solution is local to `initial`).
    fn fit_from(&self, series: &DataSeries, initial: &[f64]) -> Result<FitResult, CliError> {
        let model =
            |p: &[f64], xs: &[f64], out: &mut [f64]| self.model_into(p, xs, out);
        let mut result = least_squares(&model, initial.len(), series, initial)?;
        // fold the sign-symmetric parameters back to the reported branch
        match self.kind {
            FitKind::Focus => result.parameters[1] = result.parameters[1].abs(),
            FitKind::Scalloped => {
                result.parameters[0] = result.parameters[0].abs();
                result.parameters[1] = result.parameters[1].abs();
            }
        }
        Self::check_converged(result)
    }

    /// Model evaluation matching the fitted parameterization (beta, s and
    /// w0 enter through their absolute values).
    fn model_into(&self, params: &[f64], x: &[f64], out: &mut [f64]) {
        match self.kind {
            FitKind::Focus => {
                let (y0, w0, z0) = (params[0], params[1], params[2]);
                for (o, &xi) in out.iter_mut().zip(x) {
                    let t = (xi - z0) / w0;
                    *o = y0 * (1.0 + t * t).sqrt();
                }
            }
            FitKind::Scalloped => {
                let t = Transition {
                    wavelength: 1.0e-6, // wavelength does not enter the line shape
                    gamma: self.gamma,
                };
                let mm = MicromotionParams {
                    beta: params[0].abs(),
                    rf_omega: self.rf_omega,
                };
                let shifted: Vec<f64> = x.iter().map(|&xi| xi - params[2]).collect();
                match spectrum_sideband(t, mm, params[1].abs(), &shifted) {
                    Ok(rates) => {
                        for (o, r) in out.iter_mut().zip(rates) {
                            *o = params[3] * r + params[4];
                        }
                    }
                    Err(_) => out.fill(f64::NAN),
                }
            }
        }
    }

    fn model_values(&self, params: &[f64], x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.model_into(params, x, &mut out);
        out
    }

    fn parameter_names(&self) -> &'static [&'static str] {
        match self.kind {
            FitKind::Focus => &["y0_m", "w0_m", "z0_m"],
            FitKind::Scalloped => &[
                "beta",
                "saturation",
                "line_center_rad_per_s",
                "amplitude",
                "offset",
            ],
        }
    }
}

fn run_fit(job: &JobConfig, ctx: &Context) -> Result<Files, CliError> {
    let f = job.fit()?;
    let raw_path = Path::new(&f.data_csv);
    let path = if raw_path.is_absolute() {
        raw_path.to_path_buf()
    } else {
        ctx.config_dir.join(raw_path)
    };
    let ingested = read_series(&path)?;

    let setup = FitSetup {
        series: match f.kind {
            // detunings arrive in Hz; the line-shape model works in rad/s
            FitKind::Scalloped => DataSeries {
                x: ingested.x.iter().map(|v| v * 2.0 * PI).collect(),
                y: ingested.y.clone(),
                y_sigma: ingested.y_sigma.clone(),
            },
            FitKind::Focus => ingested,
        },
        kind: f.kind,
        gamma: 2.0 * PI * f.natural_linewidth_hz,
        rf_omega: 2.0 * PI * f.rf_frequency_hz,
    };

    let result = setup.fit(&setup.series)?;
    let model = setup.model_values(&result.parameters, &setup.series.x);

    let mut report = Csv::new(&ctx.stamp, "parameter,value,sigma");
    for ((name, value), sigma) in setup
        .parameter_names()
        .iter()
        .zip(&result.parameters)
        .zip(&result.parameter_sigmas)
    {
        report.row(&[name, &num(*value), &num(*sigma)]);
    }
    match setup.kind {
        FitKind::Focus => {
            // the doubling criterion: spot area doubles over z0 +/- w0
            report.row(&[
                "depth_of_focus_m",
                &num(2.0 * result.parameters[1]),
                &num(2.0 * result.parameter_sigmas[1]),
            ]);
        }
        FitKind::Scalloped => {
            report.row(&[
                "line_center_hz",
                &num(result.parameters[2] / (2.0 * PI)),
                &num(result.parameter_sigmas[2] / (2.0 * PI)),
            ]);
        }
    }
    report.row(&["residual_norm", &num(result.residual_norm), &num(0.0)]);
    report.row(&["iterations", &result.iterations.to_string(), "0"]);

    let mut residuals = Csv::new(&ctx.stamp, "x,y,model,residual");
    for ((xi, yi), mi) in setup.series.x.iter().zip(&setup.series.y).zip(&model) {
        residuals.row(&[&num(*xi), &num(*yi), &num(*mi), &num(yi - mi)]);
    }

    let mut files: Files = vec![
        ("fit_report.csv", report.finish()),
        ("fit_residuals.csv", residuals.finish()),
    ];

    if f.monte_carlo_trials > 0 {
        files.push((
            "fit_monte_carlo.csv",
            monte_carlo(
                &setup,
                &result.parameters,
                &model,
                f.monte_carlo_trials,
                f.noise_relative,
                ctx,
            )?,
        ));
    }
    Ok(files)
}

/// Refit noisy multiplicative replicas of the best-fit model, each trial
/// starting from the best-fit parameters; one row per trial. Seeded, so
/// identical seeds give byte-identical output.
fn monte_carlo(
    setup: &FitSetup,
    best: &[f64],
    model: &[f64],
    trials: usize,
    noise_relative: f64,
    ctx: &Context,
) -> Result<String, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let names = setup.parameter_names();
    let header = format!(
        "trial,{},{}",
        names.join(","),
        names
            .iter()
            .map(|n| format!("sigma_{n}"))
            .collect::<Vec<_>>()
            .join(",")
    );
    let mut csv = Csv::new(&ctx.stamp, &header);
    for trial in 0..trials {
        let noisy: Vec<f64> = model
            .iter()
            .map(|&m| {
                let eps: f64 = rng.sample(StandardNormal);
                m * (1.0 + noise_relative * eps)
            })
            .collect();
        let series = DataSeries {
            x: setup.series.x.clone(),
            y: noisy,
            y_sigma: setup.series.y_sigma.clone(),
        };
        let refit = setup.fit_from(&series, best).map_err(|e| match e {
            CliError::Numerical(msg) => {
                CliError::Numerical(format!("monte-carlo trial {trial}: {msg}"))
            }
            other => other,
        })?;
        let mut cells: Vec<String> = vec![trial.to_string()];
        cells.extend(refit.parameters.iter().map(|v| num(*v)));
        cells.extend(refit.parameter_sigmas.iter().map(|v| num(*v)));
        let refs: Vec<&str> = cells.iter().map(String::as_str).collect();
        csv.row(&refs);
    }
    Ok(csv.finish())
}

fn curve_rows(curve: &SpotCurve) -> (&'static str, Vec<(f64, f64)>) {
    match &curve.observable {
        SpotObservable::FwhmMeters(v) => (
            "spot_fwhm_m",
            curve.abscissa.iter().cloned().zip(v.iter().cloned()).collect(),
        ),
        SpotObservable::AreaSquareMeters(v) => (
            "spot_area_m2",
            curve.abscissa.iter().cloned().zip(v.iter().cloned()).collect(),
        ),
    }
}

fn run_tolerance(job: &JobConfig, ctx: &Context) -> Result<Files, CliError> {
    let t = job.tolerance()?;
    let p = effective_prescription(&job.lens()?.prescription(), ctx.fast);
    p.validate()?;

    let z = linspace(-t.defocus_halfspan_m, t.defocus_halfspan_m, t.defocus_points);
    let defocus = match t.psf_model {
        PsfModel::Gaussian => gaussian_defocus_curve(
            t.gaussian_waist_m,
            p.design_wavelength,
            t.source_blur_fwhm_m,
            &z,
        )?,
        PsfModel::Simulated => {
            spot_vs_defocus(&p, t.profile.to_lens_profile(), t.source_blur_fwhm_m, &z)?
        }
    };
    let depth = double_area_range(&defocus)?;

    let offsets = linspace(0.0, t.offset_max_m, t.offset_points);
    let fov_curve = spot_vs_field_offset(&p, t.profile.to_lens_profile(), &offsets)?;
    // the model is exactly mirror-symmetric, so the one-sided scan extends
    // evenly to a full transverse doubling range
    let areas = match &fov_curve.observable {
        SpotObservable::AreaSquareMeters(a) => a.clone(),
        SpotObservable::FwhmMeters(_) => unreachable!("offset scans report areas"),
    };
    let mut mirrored_x: Vec<f64> = offsets.iter().rev().map(|v| -v).collect();
    let mut mirrored_a: Vec<f64> = areas.iter().rev().cloned().collect();
    mirrored_x.extend_from_slice(&offsets[1..]);
    mirrored_a.extend_from_slice(&areas[1..]);
    let fov = double_area_range(&SpotCurve::from_area(mirrored_x, mirrored_a))?;

    let (defocus_col, defocus_rows) = curve_rows(&defocus);
    let mut dcsv = Csv::new(&ctx.stamp, &format!("defocus_m,{defocus_col}"));
    for (x, v) in defocus_rows {
        dcsv.row(&[&num(x), &num(v)]);
    }
    let mut fcsv = Csv::new(&ctx.stamp, "offset_m,spot_area_m2");
    for (x, v) in offsets.iter().zip(&areas) {
        fcsv.row(&[&num(*x), &num(*v)]);
    }

    let mut report = Csv::new(&ctx.stamp, "name,value");
    report.row(&["depth_of_focus_m", &num(depth.width())]);
    report.row(&["depth_of_focus_exact", if depth.is_exact() { "1" } else { "0" }]);
    report.row(&["field_of_view_m", &num(fov.width())]);
    report.row(&["field_of_view_exact", if fov.is_exact() { "1" } else { "0" }]);
    report.row(&[
        "psf_model",
        match t.psf_model {
            PsfModel::Gaussian => "gaussian",
            PsfModel::Simulated => "simulated",
        },
    ]);
    report.row(&["source_blur_fwhm_m", &num(t.source_blur_fwhm_m)]);

    Ok(vec![
        ("defocus_curve.csv", dcsv.finish()),
        ("fov_curve.csv", fcsv.finish()),
        ("tolerance_report.csv", report.finish()),
    ])
}
