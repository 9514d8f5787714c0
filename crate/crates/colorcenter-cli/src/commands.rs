//! Command implementations. Every command validates all of its inputs,
//! computes the full set of artifacts in memory and only then touches the
//! filesystem, so a nonzero exit never leaves partial output behind.

use std::path::{Path, PathBuf};

use colorcenter::constants::C_NM_GHZ;
use colorcenter::fit::lm::LmOptions;
use colorcenter::fit::{
    convert_dipole, convert_polarizability, convolved_decay, fit_decay, fit_hamiltonian_params,
    fit_lifetime_irf, fit_lorentzian, fit_stark_referenced, lorentzian_value, DecayFitOptions,
    HamiltonianFitConfig, LifetimeFitOptions, StarkModel,
};
use colorcenter::metrics::{
    correct_response, debye_waller, huang_rhys, subtract_background, BackgroundMethod,
    ResponseCurve, SpectrumTrace, XKind,
};
use colorcenter::spectrum::{
    ensemble_sweep, field_sweep, render_spectrum, transition_lines, IntensityModel, LineProfile,
    LineShape, TransitionLine,
};
use colorcenter::{DefectParameters, FieldConfig, FitResult};

use crate::csvio::{load_csv, validate_csv, Schema};
use crate::report::{fit_report_json, fmt_g, json_num, json_str};
use crate::svg::Plot;
use crate::{
    BackgroundArg, CliError, DecayFitArgs, FitCommonArgs, FitKind, HamiltonianFitArgs,
    IntensityModelArg, LifetimeFitArgs, MetricsArgs, ShapeArg, SimulateArgs, SpectrumAxisArg,
    StarkFitArgs, ValidateArgs,
};

/// Planned output files; nothing is written until every computation is done.
struct Outputs(Vec<(PathBuf, String)>);

impl Outputs {
    fn new() -> Self {
        Self(Vec::new())
    }

    fn add(&mut self, path: &Path, content: String) {
        self.0.push((path.to_path_buf(), content));
    }

    fn write_all(self) -> Result<(), CliError> {
        for (path, content) in self.0 {
            std::fs::write(&path, content)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn load_params(path: Option<&Path>) -> Result<DefectParameters, CliError> {
    let from_file = |p: &Path| -> Result<DefectParameters, CliError> {
        let text = std::fs::read_to_string(p)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", p.display())))?;
        DefectParameters::from_json_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
    };
    match path {
        Some(p) => from_file(p),
        None => match std::env::var_os("COLORCENTER_PARAMS") {
            Some(p) => from_file(Path::new(&p)),
            None => Ok(DefectParameters::default()),
        },
    }
}

fn intensity_model(arg: IntensityModelArg) -> IntensityModel {
    match arg {
        IntensityModelArg::Uniform => IntensityModel::Uniform,
        IntensityModelArg::SpinOverlap => IntensityModel::SpinOverlap,
    }
}

fn sweep_csv(rows: &[(f64, usize, &TransitionLine)]) -> String {
    let mut out = String::from("b_tesla,line_index,freq_offset_ghz,intensity\n");
    for (b, index, line) in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_g(*b),
            index,
            fmt_g(line.freq_offset),
            fmt_g(line.intensity)
        ));
    }
    out
}

pub fn simulate_zeeman(args: &SimulateArgs) -> Result<(), CliError> {
    let params = load_params(args.params.as_deref())?;
    let axis = crate::parse_vec3(&args.axis, "--axis")?;
    let field_dir = crate::parse_vec3(&args.field_dir, "--field-dir")?;
    if !(args.b_step > 0.0) {
        return Err(CliError::Input(format!(
            "--b-step must be positive, got {}",
            args.b_step
        )));
    }
    if args.b_max < args.b_min {
        return Err(CliError::Input(format!(
            "--b-max {} is below --b-min {}",
            args.b_max, args.b_min
        )));
    }
    let mut b_values = Vec::new();
    let mut b = args.b_min;
    while b <= args.b_max + args.b_step * 1e-9 {
        b_values.push(b);
        b += args.b_step;
    }
    let model = intensity_model(args.intensity_model);

    // flatten into (b, line_index, line) rows
    let sweeps = if args.ensemble {
        ensemble_sweep(&params, field_dir, &b_values, model)?.sweeps
    } else {
        vec![field_sweep(&params, axis, field_dir, &b_values, model)?]
    };
    let mut rows: Vec<(f64, usize, &TransitionLine)> = Vec::new();
    for (i, &b) in b_values.iter().enumerate() {
        let mut index = 0;
        for sweep in &sweeps {
            for line in &sweep.lines_per_field[i] {
                rows.push((b, index, line));
                index += 1;
            }
        }
    }

    let mut outputs = Outputs::new();
    outputs.add(&args.out_csv, sweep_csv(&rows));

    if let Some(svg_path) = &args.out_svg {
        let freq_lo = rows.iter().map(|r| r.2.freq_offset).fold(f64::MAX, f64::min);
        let freq_hi = rows.iter().map(|r| r.2.freq_offset).fold(f64::MIN, f64::max);
        let mut plot = Plot::new(
            &format!(
                "Emission lines vs field ({:.1} deg to axis)",
                sweeps[0].angle_to_axis_deg
            ),
            "B (T)",
            "frequency offset (GHz)",
            (b_values[0], *b_values.last().unwrap()),
            (freq_lo, freq_hi),
        );
        let markers: Vec<(f64, f64, f64)> = rows
            .iter()
            .map(|(b, _, line)| (*b, line.freq_offset, 1.0 + 2.5 * line.intensity.sqrt()))
            .collect();
        plot.circles(&markers, "black");
        outputs.add(svg_path, plot.render());
    }

    if let (Some(b_render), Some(spectrum_path)) = (args.spectrum_at_b, &args.spectrum_csv) {
        let field = FieldConfig::from_direction(b_render, field_dir, axis)?;
        let mut lines = transition_lines(&params, &field, model)?;
        if args.ensemble {
            lines.clear();
            for family_axis in colorcenter::spectrum::AXES_111 {
                let field = FieldConfig::from_direction(b_render, field_dir, family_axis)?;
                for line in transition_lines(&params, &field, model)? {
                    lines.push(TransitionLine {
                        intensity: line.intensity / 4.0,
                        ..line
                    });
                }
            }
        }
        let shape = match args.spectrum_shape {
            ShapeArg::Lorentzian => LineShape::Lorentzian,
            ShapeArg::Gaussian => LineShape::Gaussian,
        };
        let profile = LineProfile::new(shape, args.spectrum_fwhm_ghz)?;
        let lo = lines.iter().map(|l| l.freq_offset).fold(f64::MAX, f64::min)
            - 8.0 * args.spectrum_fwhm_ghz;
        let hi = lines.iter().map(|l| l.freq_offset).fold(f64::MIN, f64::max)
            + 8.0 * args.spectrum_fwhm_ghz;
        let grid: Vec<f64> = (0..2001)
            .map(|i| lo + (hi - lo) * i as f64 / 2000.0)
            .collect();
        let trace = render_spectrum(&lines, &profile, &grid)?;
        let mut csv = String::new();
        match args.spectrum_axis {
            SpectrumAxisArg::Ghz => {
                csv.push_str("freq_offset_ghz,intensity\n");
                for (x, y) in trace.x.iter().zip(&trace.y) {
                    csv.push_str(&format!("{},{}\n", fmt_g(*x), fmt_g(*y)));
                }
            }
            SpectrumAxisArg::Nm => {
                if !(args.zpl_center_nm > 0.0) {
                    return Err(CliError::Input(
                        "--zpl-center-nm must be positive".into(),
                    ));
                }
                let nu0 = C_NM_GHZ / args.zpl_center_nm;
                csv.push_str("wavelength_nm,intensity\n");
                // wavelength descends with frequency; emit ascending in nm
                for (x, y) in trace.x.iter().zip(&trace.y).rev() {
                    csv.push_str(&format!("{},{}\n", fmt_g(C_NM_GHZ / (nu0 + x)), fmt_g(*y)));
                }
            }
        }
        outputs.add(spectrum_path, csv);
    }

    outputs.write_all()
}

fn check_converged(fit: &FitResult) -> Result<(), CliError> {
    if fit.converged {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!(
            "iterations = {}, residual_norm = {}, degenerate = {}",
            fit.iterations,
            fmt_g(fit.residual_norm),
            fit.degenerate
        )))
    }
}

fn dense_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn overlay_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    data: &[(f64, f64)],
    model: &[(f64, f64)],
) -> String {
    let all_x: Vec<f64> = data.iter().chain(model).map(|p| p.0).collect();
    let all_y: Vec<f64> = data.iter().chain(model).map(|p| p.1).collect();
    let range = |v: &[f64]| {
        (
            v.iter().cloned().fold(f64::MAX, f64::min),
            v.iter().cloned().fold(f64::MIN, f64::max),
        )
    };
    let mut plot = Plot::new(title, x_label, y_label, range(&all_x), range(&all_y));
    plot.circles(
        &data.iter().map(|&(x, y)| (x, y, 2.2)).collect::<Vec<_>>(),
        "crimson",
    );
    plot.polyline(model, "black");
    plot.render()
}

pub fn fit(kind: &FitKind) -> Result<(), CliError> {
    match kind {
        FitKind::Lorentzian(args) => fit_lorentzian_cmd(args),
        FitKind::Stark(args) => fit_stark_cmd(args),
        FitKind::Decay(args) => fit_decay_cmd(args),
        FitKind::Lifetime(args) => fit_lifetime_cmd(args),
        FitKind::Hamiltonian(args) => fit_hamiltonian_cmd(args),
    }
}

fn fit_lorentzian_cmd(args: &FitCommonArgs) -> Result<(), CliError> {
    let table = load_csv(&args.input, Schema::Ple)?;
    let x_unit = table.header[0].clone();
    let trace = SpectrumTrace::new(table.x.clone(), table.y.clone(), XKind::FrequencyGhz)?;
    let fit = fit_lorentzian(&trace, &LmOptions::default())?;
    check_converged(&fit)?;

    let mut outputs = Outputs::new();
    let notes = vec![("x_unit".to_string(), json_str(&x_unit))];
    outputs.add(&args.out_json, fit_report_json("lorentzian", &fit, &[], &notes));

    let center = fit.value("center").unwrap();
    let fwhm = fit.value("fwhm").unwrap();
    let amplitude = fit.value("amplitude").unwrap();
    let offset = fit.value("offset").unwrap();
    let model_curve: Vec<(f64, f64)> = dense_grid(table.x[0], *table.x.last().unwrap(), 512)
        .into_iter()
        .map(|x| (x, lorentzian_value(x, center, fwhm, amplitude, offset)))
        .collect();
    if let Some(path) = &args.out_overlay {
        let mut csv = format!("{x_unit},model_counts\n");
        for (x, y) in &model_curve {
            csv.push_str(&format!("{},{}\n", fmt_g(*x), fmt_g(*y)));
        }
        outputs.add(path, csv);
    }
    if let Some(path) = &args.out_svg {
        outputs.add(
            path,
            overlay_plot(
                "Lorentzian fit",
                &x_unit,
                "counts",
                &table.points(),
                &model_curve,
            ),
        );
    }
    outputs.write_all()
}

fn fit_stark_cmd(args: &StarkFitArgs) -> Result<(), CliError> {
    let table = load_csv(&args.common.input, Schema::Stark)?;
    let points = table.points();
    if args.reference_index >= points.len() {
        return Err(CliError::Input(format!(
            "--reference-index {} out of range for {} rows",
            args.reference_index,
            points.len()
        )));
    }
    let geometry = StarkModel {
        epsilon_r: args.epsilon_r,
        junction_thickness_m: args.thickness_um * 1e-6,
        ..StarkModel::default()
    };
    let shifts = colorcenter::fit::shifts_from_reference(&points, args.reference_index)?;
    let reference_v = points[args.reference_index].0;
    let (fit, model) = fit_stark_referenced(
        &shifts,
        &geometry,
        None,
        Some(reference_v),
        &LmOptions::default(),
    )?;
    check_converged(&fit)?;

    let derived = vec![
        ("delta_mu_debye".to_string(), convert_dipole(model.delta_mu)),
        (
            "delta_alpha_a3".to_string(),
            convert_polarizability(model.delta_alpha),
        ),
    ];
    let notes = vec![
        ("epsilon_r".to_string(), json_num(args.epsilon_r)),
        ("thickness_um".to_string(), json_num(args.thickness_um)),
        (
            "reference_index".to_string(),
            args.reference_index.to_string(),
        ),
        ("reference_voltage_v".to_string(), json_num(reference_v)),
    ];
    let mut outputs = Outputs::new();
    outputs.add(
        &args.common.out_json,
        fit_report_json("stark", &fit, &derived, &notes),
    );

    let v_lo = points.iter().map(|p| p.0).fold(f64::MAX, f64::min);
    let v_hi = points.iter().map(|p| p.0).fold(f64::MIN, f64::max);
    let ref_shift = colorcenter::fit::stark_shift(
        colorcenter::fit::local_field(reference_v, &model),
        &model,
    );
    let model_curve: Vec<(f64, f64, f64)> = dense_grid(v_lo, v_hi, 256)
        .into_iter()
        .map(|v| {
            let f = colorcenter::fit::local_field(v, &model);
            (v, f, colorcenter::fit::stark_shift(f, &model) - ref_shift)
        })
        .collect();
    if let Some(path) = &args.common.out_overlay {
        let mut csv = String::from("voltage_v,local_field_mv_m,shift_ghz_model\n");
        for (v, f, s) in &model_curve {
            csv.push_str(&format!("{},{},{}\n", fmt_g(*v), fmt_g(*f), fmt_g(*s)));
        }
        outputs.add(path, csv);
    }
    if let Some(path) = &args.common.out_svg {
        outputs.add(
            path,
            overlay_plot(
                "Stark shift fit",
                "bias voltage (V)",
                "peak shift (GHz)",
                &shifts,
                &model_curve.iter().map(|&(v, _, s)| (v, s)).collect::<Vec<_>>(),
            ),
        );
    }
    outputs.write_all()
}

fn fit_decay_cmd(args: &DecayFitArgs) -> Result<(), CliError> {
    let table = load_csv(&args.common.input, Schema::Decay)?;
    let time_unit = table.header[0].trim_start_matches("time_").to_string();
    let window = match (args.window_start, args.window_end) {
        (None, None) => None,
        (start, end) => Some((
            start.unwrap_or(table.x[0]),
            end.unwrap_or(*table.x.last().unwrap()),
        )),
    };
    let options = DecayFitOptions {
        window,
        ..Default::default()
    };
    let (fit, model) = fit_decay(&table.x, &table.y, args.components, &options)?;
    check_converged(&fit)?;

    let mut notes = vec![
        ("time_unit".to_string(), json_str(&time_unit)),
        ("components".to_string(), args.components.to_string()),
    ];
    if let Some((lo, hi)) = window {
        notes.push(("window_start".to_string(), json_num(lo)));
        notes.push(("window_end".to_string(), json_num(hi)));
    }
    let mut outputs = Outputs::new();
    outputs.add(
        &args.common.out_json,
        fit_report_json("decay", &fit, &[], &notes),
    );

    let (t_lo, t_hi) = window.unwrap_or((table.x[0], *table.x.last().unwrap()));
    let model_curve: Vec<(f64, f64)> = dense_grid(t_lo, t_hi, 512)
        .into_iter()
        .map(|t| (t, model.evaluate(t)))
        .collect();
    if let Some(path) = &args.common.out_overlay {
        let mut csv = format!("{},model_counts\n", table.header[0]);
        for (t, y) in &model_curve {
            csv.push_str(&format!("{},{}\n", fmt_g(*t), fmt_g(*y)));
        }
        outputs.add(path, csv);
    }
    if let Some(path) = &args.common.out_svg {
        outputs.add(
            path,
            overlay_plot(
                "Charge decay fit",
                &table.header[0],
                "counts",
                &table.points(),
                &model_curve,
            ),
        );
    }
    outputs.write_all()
}

fn fit_lifetime_cmd(args: &LifetimeFitArgs) -> Result<(), CliError> {
    let table = load_csv(&args.common.input, Schema::Tcspc)?;
    let options = LifetimeFitOptions {
        fit_irf: args.fit_irf,
        ..Default::default()
    };
    let (fit, sigma) = fit_lifetime_irf(&table.x, &table.y, args.irf_fwhm_ns, &options)?;
    check_converged(&fit)?;

    let tau = fit.value("tau_ns").unwrap();
    let derived = vec![(
        "lifetime_limited_linewidth_mhz".to_string(),
        colorcenter::lifetime_limited_linewidth(tau)?,
    )];
    let notes = vec![
        ("irf_fwhm_ns".to_string(), json_num(args.irf_fwhm_ns)),
        ("irf_fitted".to_string(), args.fit_irf.to_string()),
    ];
    let mut outputs = Outputs::new();
    outputs.add(
        &args.common.out_json,
        fit_report_json("lifetime", &fit, &derived, &notes),
    );

    let amplitude = fit.value("amplitude").unwrap();
    let t0 = fit.value("t0_ns").unwrap();
    let baseline = fit.value("baseline").unwrap();
    let model_curve: Vec<(f64, f64)> = table
        .x
        .iter()
        .map(|&t| (t, convolved_decay(t, tau, amplitude, t0, sigma, baseline)))
        .collect();
    if let Some(path) = &args.common.out_overlay {
        let mut csv = String::from("time_ns,model_counts\n");
        for (t, y) in &model_curve {
            csv.push_str(&format!("{},{}\n", fmt_g(*t), fmt_g(*y)));
        }
        outputs.add(path, csv);
    }
    if let Some(path) = &args.common.out_svg {
        outputs.add(
            path,
            overlay_plot(
                "TCSPC lifetime fit",
                "time (ns)",
                "counts",
                &table.points(),
                &model_curve,
            ),
        );
    }
    outputs.write_all()
}

fn fit_hamiltonian_cmd(args: &HamiltonianFitArgs) -> Result<(), CliError> {
    let table = load_csv(&args.common.input, Schema::Peaks)?;
    let config = HamiltonianFitConfig {
        fixed: load_params(args.params.as_deref())?,
        axis: crate::parse_vec3(&args.axis, "--axis")?,
        field_dir: crate::parse_vec3(&args.field_dir, "--field-dir")?,
        ..Default::default()
    };
    let peaks = table.points();
    let fit = fit_hamiltonian_params(&peaks, &config)?;
    check_converged(&fit)?;

    let lambda = fit.value("lambda_soc_ghz").unwrap();
    let xi = fit.value("xi_ghz").unwrap();
    let derived = vec![(
        "zero_field_splitting_ghz".to_string(),
        (lambda * lambda + 4.0 * xi * xi).sqrt(),
    )];
    let notes = vec![
        ("axis".to_string(), json_str(&args.axis)),
        ("field_dir".to_string(), json_str(&args.field_dir)),
    ];
    let mut outputs = Outputs::new();
    outputs.add(
        &args.common.out_json,
        fit_report_json("hamiltonian", &fit, &derived, &notes),
    );

    // simulated lines at the fitted couplings, per distinct field
    let fitted = DefectParameters {
        lambda_soc: lambda,
        xi_x: xi,
        xi_y: 0.0,
        ..config.fixed.clone()
    };
    let mut fields: Vec<f64> = peaks.iter().map(|p| p.0).collect();
    fields.sort_by(f64::total_cmp);
    fields.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut sim_rows: Vec<(f64, usize, TransitionLine)> = Vec::new();
    for &b in &fields {
        let field = FieldConfig::from_direction(b, config.field_dir, config.axis)?;
        for (i, line) in transition_lines(&fitted, &field, IntensityModel::SpinOverlap)?
            .into_iter()
            .enumerate()
        {
            sim_rows.push((b, i, line));
        }
    }
    if let Some(path) = &args.common.out_overlay {
        let rows: Vec<(f64, usize, &TransitionLine)> =
            sim_rows.iter().map(|(b, i, l)| (*b, *i, l)).collect();
        outputs.add(path, sweep_csv(&rows));
    }
    if let Some(path) = &args.common.out_svg {
        let ys: Vec<f64> = peaks
            .iter()
            .map(|p| p.1)
            .chain(sim_rows.iter().map(|r| r.2.freq_offset))
            .collect();
        let mut plot = Plot::new(
            "Hamiltonian-parameter fit",
            "B (T)",
            "frequency offset (GHz)",
            (fields[0], *fields.last().unwrap()),
            (
                ys.iter().cloned().fold(f64::MAX, f64::min),
                ys.iter().cloned().fold(f64::MIN, f64::max),
            ),
        );
        plot.circles(
            &sim_rows
                .iter()
                .map(|(b, _, l)| (*b, l.freq_offset, 1.8))
                .collect::<Vec<_>>(),
            "black",
        );
        plot.circles(
            &peaks.iter().map(|&(b, f)| (b, f, 2.6)).collect::<Vec<_>>(),
            "crimson",
        );
        outputs.add(path, plot.render());
    }
    outputs.write_all()
}

pub fn metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let zpl_window = crate::parse_window(&args.zpl_window, "--zpl-window")?;
    let total_window = crate::parse_window(&args.total_window, "--total-window")?;
    let mut background_windows = Vec::new();
    for w in &args.background_windows {
        background_windows.push(crate::parse_window(w, "--background-window")?);
    }
    if args.background.is_some() && background_windows.is_empty() {
        return Err(CliError::Input(
            "--background requires at least one --background-window".into(),
        ));
    }

    let table = load_csv(&args.input, Schema::Spectrum)?;
    let mut trace = SpectrumTrace::new(table.x, table.y, XKind::WavelengthNm)?;

    let response_corrected = if let Some(path) = &args.response {
        let resp = load_csv(path, Schema::Response)?;
        let curve = ResponseCurve::new(resp.x, resp.y)?;
        trace = correct_response(&trace, &curve)?;
        true
    } else {
        false
    };

    let (method_name, clamped) = match args.background {
        None => ("none", 0usize),
        Some(arg) => {
            let method = match arg {
                BackgroundArg::Constant => BackgroundMethod::Constant,
                BackgroundArg::Linear => BackgroundMethod::Linear,
            };
            let result = subtract_background(&trace, method, &background_windows)?;
            trace = result.trace;
            (
                match arg {
                    BackgroundArg::Constant => "constant",
                    BackgroundArg::Linear => "linear",
                },
                result.clamped,
            )
        }
    };

    let dw = debye_waller(&trace, zpl_window, total_window)?;
    let s = huang_rhys(dw)?;

    let mut json = String::from("{\n");
    json.push_str(&format!("  \"dw\": {},\n", json_num(dw)));
    json.push_str(&format!("  \"huang_rhys\": {},\n", json_num(s)));
    json.push_str(&format!(
        "  \"zpl_window_nm\": [{}, {}],\n",
        json_num(zpl_window.0),
        json_num(zpl_window.1)
    ));
    json.push_str(&format!(
        "  \"total_window_nm\": [{}, {}],\n",
        json_num(total_window.0),
        json_num(total_window.1)
    ));
    json.push_str(&format!(
        "  \"background_method\": {},\n",
        json_str(method_name)
    ));
    json.push_str(&format!("  \"clamped_samples\": {clamped},\n"));
    json.push_str(&format!("  \"response_corrected\": {response_corrected}\n"));
    json.push_str("}\n");

    let mut outputs = Outputs::new();
    outputs.add(&args.out_json, json);
    outputs.write_all()
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let schema = Schema::from_name(&args.schema).ok_or_else(|| {
        CliError::Input(format!(
            "unknown schema '{}' (expected spectrum, response, stark, decay, tcspc, peaks or ple)",
            args.schema
        ))
    })?;
    match validate_csv(&args.input, schema) {
        Ok(rows) => {
            println!("{}: {} rows, schema {} OK", args.input.display(), rows, args.schema);
            Ok(())
        }
        Err(errors) => Err(errors.into()),
    }
}
