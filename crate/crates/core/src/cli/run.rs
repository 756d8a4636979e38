//! Single runs, sweeps and the canned figure configurations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{GridSpec, MethodSelection, RunConfig, SweepParameter, SweepSpec};
use super::output::{self, format_value, gnuplot_script, spectrum_csv, write_atomic, write_json, Sidecar, SUMMARY_HEADER};
use super::CliError;
use crate::error::Error;
use crate::features::{compare_methods, dit_metrics, extract_features, fit_pump_rate, ComparisonReport, DitMetrics, PumpFit, SpectralFeature};
use crate::iof::{iof_spectrum, Port};
use crate::operators::SystemParams;
use crate::spectra::{ipm_transmission_with, FrequencyGrid, Method, Spectrum};

/// Results of one parameter point.
#[derive(Clone, Debug)]
pub struct PointOutcome {
    pub params: SystemParams,
    pub iof: Option<Result<Spectrum, Error>>,
    pub ipm: Option<Result<Spectrum, Error>>,
    pub comparison: Option<ComparisonReport>,
    pub files: Vec<PathBuf>,
}

impl PointOutcome {
    pub fn first_error(&self) -> Option<&Error> {
        [&self.iof, &self.ipm].into_iter().flatten().find_map(|r| r.as_ref().err())
    }
}

#[derive(Serialize)]
struct MethodAnalysis {
    dit: Option<DitMetrics>,
    features: Vec<SpectralFeature>,
    error: Option<String>,
}

#[derive(Serialize)]
struct AnalysisFile<'a> {
    version: String,
    params: &'a SystemParams,
    port: Port,
    normalization: crate::spectra::Normalization,
    iof: Option<MethodAnalysis>,
    ipm: Option<MethodAnalysis>,
    comparison: Option<&'a ComparisonReport>,
}

fn analyse(result: &Result<Spectrum, Error>) -> MethodAnalysis {
    match result {
        Ok(s) => {
            let dit = dit_metrics(s);
            MethodAnalysis {
                error: dit.as_ref().err().map(|e| e.name().to_string()),
                dit: dit.ok(),
                features: extract_features(s),
            }
        }
        Err(e) => MethodAnalysis {
            dit: None,
            features: Vec::new(),
            error: Some(e.name().to_string()),
        },
    }
}

fn describe(params: &SystemParams) -> String {
    format!(
        "gamma_total={}, g={}, delta={}, pump={}, gamma={}",
        params.gamma_total(),
        params.g,
        params.delta,
        params.pump,
        params.gamma
    )
}

fn write_spectrum(
    dir: &Path,
    stem: &str,
    spectrum: &Spectrum,
    config: &RunConfig,
    seconds: f64,
    files: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let csv = dir.join(format!("{stem}.csv"));
    write_atomic(&csv, spectrum_csv(spectrum).as_bytes())?;
    let (method, port, n_max_used) = match spectrum.method {
        Method::Iof => (MethodSelection::Iof, Some(config.port), None),
        Method::Ipm => (MethodSelection::Ipm, None, Some(spectrum.params.n_max)),
    };
    let sidecar = Sidecar {
        version: output::version(),
        method: spectrum.method,
        channel: spectrum.channel,
        port,
        normalization: spectrum.normalization,
        n_max_used,
        points: spectrum.grid.len(),
        wall_clock_seconds: seconds,
        config: RunConfig {
            grid: Some(GridSpec::of(&spectrum.grid)),
            method,
            sweep: None,
            out: None,
            plot: false,
            ..config.clone()
        },
    };
    let json = dir.join(format!("{stem}.json"));
    write_json(&json, &sidecar)?;
    files.push(csv);
    files.push(json);
    Ok(())
}

/// Runs the selected methods at `params`, writing spectra, sidecars and the
/// analysis file into `dir`.
pub fn run_point(config: &RunConfig, params: &SystemParams, dir: &Path) -> Result<PointOutcome, CliError> {
    let grid: FrequencyGrid = config.grid_for(params).map_err(|e| CliError::Config(format!("grid: {e}")))?;
    let point_config = RunConfig {
        params: *params,
        ..config.clone()
    };
    let mut files = Vec::new();
    let timed = |f: &dyn Fn() -> Result<Spectrum, Error>| {
        let t = Instant::now();
        let r = f();
        (r, t.elapsed().as_secs_f64())
    };

    let iof = config.method.includes_iof().then(|| {
        timed(&|| iof_spectrum(params, &grid, config.port).and_then(|s| s.normalized(config.normalization)))
    });
    let ipm = config
        .method
        .includes_ipm()
        .then(|| timed(&|| ipm_transmission_with(params, &grid, config.normalization, config.max_truncation)));

    for (stem, run) in [("iof", &iof), ("ipm", &ipm)] {
        if let Some((Ok(s), secs)) = run {
            write_spectrum(dir, stem, s, &point_config, *secs, &mut files)?;
        }
    }
    let iof = iof.map(|(r, _)| r);
    let ipm = ipm.map(|(r, _)| r);

    let comparison = match (&iof, &ipm) {
        (Some(Ok(a)), Some(Ok(b))) => Some(compare_methods(a, b).map_err(|e| CliError::Numerical {
            point: describe(params),
            source: e,
        })?),
        _ => None,
    };
    let analysis = AnalysisFile {
        version: output::version(),
        params,
        port: config.port,
        normalization: config.normalization,
        iof: iof.as_ref().map(analyse),
        ipm: ipm.as_ref().map(analyse),
        comparison: comparison.as_ref(),
    };
    let path = dir.join("comparison.json");
    write_json(&path, &analysis)?;
    files.push(path);

    if config.plot {
        let mut series = Vec::new();
        if matches!(iof, Some(Ok(_))) {
            series.push(("iof.csv", "input-output"));
        }
        if matches!(ipm, Some(Ok(_))) {
            series.push(("ipm.csv", "incoherent pumping"));
        }
        if !series.is_empty() {
            let path = dir.join("plot.gp");
            write_atomic(&path, gnuplot_script(&series, &describe(params)).as_bytes())?;
            files.push(path);
        }
    }

    Ok(PointOutcome {
        params: *params,
        iof,
        ipm,
        comparison,
        files,
    })
}

fn output_dir(config: &RunConfig, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("output directory {}: {e}", dir.display())))?;
    Ok(dir)
}

/// Single parameter point. Numerical failure of any selected method is an
/// error; successful methods are still written.
pub fn run_spectrum(config: &RunConfig, out: Option<&Path>) -> Result<PointOutcome, CliError> {
    config.validate()?;
    let dir = output_dir(config, out)?;
    let outcome = run_point(config, &config.params, &dir)?;
    if let Some(e) = outcome.first_error() {
        return Err(CliError::Numerical {
            point: describe(&outcome.params),
            source: e.clone(),
        });
    }
    Ok(outcome)
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub values: Vec<f64>,
    pub points: Vec<PointOutcome>,
    pub summary: PathBuf,
}

impl SweepOutcome {
    pub fn succeeded(&self) -> usize {
        self.points.iter().filter(|p| p.first_error().is_none()).count()
    }
}

fn cell(value: Option<f64>, reason: Option<&str>) -> String {
    match value {
        Some(v) => format_value(v),
        None => reason.unwrap_or("NA").to_string(),
    }
}

fn method_cells(result: &Option<Result<Spectrum, Error>>) -> [String; 3] {
    match result {
        None => ["NA".into(), "NA".into(), "NA".into()],
        Some(Err(e)) => [e.name().into(), e.name().into(), e.name().into()],
        Some(Ok(s)) => match dit_metrics(s) {
            Ok(m) => [
                format_value(m.dit.value),
                cell(m.dit.fwhm, None),
                format_value(m.splitting),
            ],
            Err(e) => [e.name().into(), e.name().into(), e.name().into()],
        },
    }
}

fn summary_row(value: f64, p: &PointOutcome) -> String {
    let [dit_iof, fwhm_iof, split_iof] = method_cells(&p.iof);
    let [dit_ipm, fwhm_ipm, split_ipm] = method_cells(&p.ipm);
    let reason = p
        .first_error()
        .map(|e| e.name().to_string())
        .or_else(|| p.comparison.as_ref().and_then(|c| c.iof_error.clone().or_else(|| c.ipm_error.clone())));
    let (ratio, discrepancy) = match &p.comparison {
        Some(c) => (c.dit_peak_ratio, c.fwhm_discrepancy_pct),
        None => (None, None),
    };
    [
        format_value(value),
        dit_iof,
        dit_ipm,
        fwhm_iof,
        fwhm_ipm,
        split_iof,
        split_ipm,
        cell(ratio, reason.as_deref()),
        cell(discrepancy, reason.as_deref()),
    ]
    .join(",")
}

fn sweep_into(config: &RunConfig, sweep: &SweepSpec, dir: &Path) -> Result<SweepOutcome, CliError> {
    let points = sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(k, &v)| {
            let params = sweep.apply(&config.params, v);
            run_point(config, &params, &dir.join("points").join(format!("{k:03}")))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut csv = String::from(SUMMARY_HEADER);
    csv.push('\n');
    for (v, p) in sweep.values.iter().zip(&points) {
        csv.push_str(&summary_row(*v, p));
        csv.push('\n');
    }
    let summary = dir.join("summary.csv");
    write_atomic(&summary, csv.as_bytes())?;
    write_json(&dir.join("summary.json"), config)?;
    for (v, p) in sweep.values.iter().zip(&points) {
        if let Some(e) = p.first_error() {
            log::warn!("{} = {v}: {e}", sweep.parameter.as_str());
        }
    }
    Ok(SweepOutcome {
        dir: dir.to_path_buf(),
        values: sweep.values.clone(),
        points,
        summary,
    })
}

/// Runs every sweep value. Per-point numerical failures become named cells
/// of the summary; the sweep fails only if no point succeeded.
pub fn run_sweep(config: &RunConfig, out: Option<&Path>) -> Result<SweepOutcome, CliError> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: missing (required for the sweep command)".into()))?;
    let dir = output_dir(config, out)?;
    let outcome = sweep_into(config, sweep, &dir)?;
    if outcome.succeeded() == 0 {
        let first = &outcome.points[0];
        return Err(CliError::Numerical {
            point: describe(&first.params),
            source: first.first_error().cloned().unwrap_or(Error::NonFinite),
        });
    }
    Ok(outcome)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
}

impl FigureId {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
        }
    }
}

pub const FIG1_PUMPS: [f64; 4] = [1.0, 2.0, 2.5, 3.5];
pub const FIG2_GAMMAS: [f64; 7] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0];
/// Smallest Fock cutoff ceiling for figure sweeps; the Γ = 5γ, 10γ points at
/// the larger pumps need more than the library default.
pub const FIGURE_MIN_TRUNCATION: usize = 13;
pub const FIG3_GAMMAS: [f64; 6] = [10.0, 15.0, 20.0, 25.0, 30.0, 35.0];

/// Canned sweep configurations of the three figures, one per output
/// subdirectory.
pub fn figure_configs(id: FigureId, template: &RunConfig) -> Vec<(String, RunConfig)> {
    let base = |params: SystemParams, sweep: SweepSpec| RunConfig {
        params,
        sweep: Some(sweep),
        method: MethodSelection::Both,
        out: None,
        max_truncation: template.max_truncation.max(FIGURE_MIN_TRUNCATION),
        ..template.clone()
    };
    match id {
        FigureId::Fig1 => vec![(
            String::new(),
            base(
                SystemParams::from_total_decay(15.0, 7.5, 0.0, 2.5),
                SweepSpec {
                    parameter: SweepParameter::Pump,
                    values: FIG1_PUMPS.to_vec(),
                    tie_g_ratio: None,
                    tie_delta_ratio: None,
                },
            ),
        )],
        FigureId::Fig2 => FIG1_PUMPS
            .iter()
            .map(|&pump| {
                (
                    format!("pump_{pump}"),
                    base(
                        SystemParams::from_total_decay(15.0, 7.5, 0.0, pump),
                        SweepSpec {
                            parameter: SweepParameter::GammaTotal,
                            values: FIG2_GAMMAS.to_vec(),
                            tie_g_ratio: Some(0.5),
                            tie_delta_ratio: None,
                        },
                    ),
                )
            })
            .collect(),
        FigureId::Fig3 => vec![(
            String::new(),
            base(
                SystemParams::from_total_decay(15.0, 7.5, 22.5, 2.5),
                SweepSpec {
                    parameter: SweepParameter::GammaTotal,
                    values: FIG3_GAMMAS.to_vec(),
                    tie_g_ratio: Some(0.5),
                    tie_delta_ratio: Some(1.5),
                },
            ),
        )],
    }
}

#[derive(Clone, Debug)]
pub struct FigureOutcome {
    pub dir: PathBuf,
    pub sweeps: Vec<SweepOutcome>,
    pub pump_fit: Option<Result<PumpFit, Error>>,
}

#[derive(Serialize)]
struct PumpFitFile<'a> {
    version: String,
    params: SystemParams,
    port: Port,
    normalization: crate::spectra::Normalization,
    fit: Option<&'a PumpFit>,
    error: Option<String>,
}

/// Writes the figure data under `<out>/figures/<id>/`. `template` supplies
/// grid, port, normalization, truncation and plotting options.
pub fn reproduce_figure(id: FigureId, template: &RunConfig, out: Option<&Path>) -> Result<FigureOutcome, CliError> {
    let root = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let dir = root.join("figures").join(id.as_str());
    let mut sweeps = Vec::new();
    for (sub, config) in figure_configs(id, template) {
        config.validate()?;
        let target = if sub.is_empty() { dir.clone() } else { dir.join(sub) };
        let outcome = sweep_into(&config, config.sweep.as_ref().expect("canned sweep"), &target)?;
        if outcome.succeeded() == 0 {
            let first = &outcome.points[0];
            return Err(CliError::Numerical {
                point: describe(&first.params),
                source: first.first_error().cloned().unwrap_or(Error::NonFinite),
            });
        }
        sweeps.push(outcome);
    }

    let pump_fit = if id == FigureId::Fig1 {
        let config = &figure_configs(id, template)[0].1;
        let grid = config.grid_for(&config.params).map_err(|e| CliError::Config(format!("grid: {e}")))?;
        let fit = fit_pump_rate(&config.params, &grid, &FIG1_PUMPS, config.port, config.normalization);
        let file = PumpFitFile {
            version: output::version(),
            params: config.params,
            port: config.port,
            normalization: config.normalization,
            fit: fit.as_ref().ok(),
            error: fit.as_ref().err().map(|e| e.to_string()),
        };
        write_json(&dir.join("pump_fit.json"), &file)?;
        Some(fit)
    } else {
        None
    };
    Ok(FigureOutcome { dir, sweeps, pump_fit })
}
