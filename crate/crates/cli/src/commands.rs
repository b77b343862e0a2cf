//! The four subcommands. Each returns the files it wrote plus a short
//! human-readable summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sscdl_core::array_model::AngleDeg;
use sscdl_core::beamformers::{diagonal_loading, LoadingFactor};
use sscdl_core::experiments::{
    builtin_specs, point_context, run_experiment_with, trial_weights, ExperimentSpec, SweepAxis,
};
use sscdl_core::gamma_analysis::{default_grid, sweep_gamma};
use sscdl_core::metrics::{beampattern, magnitude_db, output_sinr};
use sscdl_core::signal_sim::exact_covariance;

use crate::config::{load_config, named_spec, FlatConfig};
use crate::output::{
    csv_table, curve_stems, fmt_num, gnuplot_beampattern, gnuplot_curves, gnuplot_gamma,
    projection_csv, sinr_csv,
};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum SpecSource {
    /// A builtin spec name, or `all`.
    Named(String),
    Config(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: SpecSource,
    pub out_dir: PathBuf,
    pub formats: Formats,
    pub emit_plots: bool,
    pub parallelism: usize,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl RunConfig {
    pub fn named(name: &str, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            source: SpecSource::Named(name.to_string()),
            out_dir: out_dir.into(),
            formats: Formats {
                csv: true,
                json: false,
            },
            emit_plots: false,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            seed: None,
            trials: None,
        }
    }
}

#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

impl Report {
    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
        let path = dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    fn names_since(&self, start: usize) -> Vec<String> {
        self.files[start..]
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }
}

struct Job {
    spec: ExperimentSpec,
    gamma_grid: Option<Vec<f64>>,
}

fn resolve_jobs(cfg: &RunConfig) -> Result<Vec<Job>, CliError> {
    if cfg.parallelism == 0 {
        return Err(CliError::Config("parallel: must be >= 1".into()));
    }
    if !cfg.formats.csv && !cfg.formats.json {
        return Err(CliError::Config(
            "format: at least one output format is required".into(),
        ));
    }
    let mut jobs = match &cfg.source {
        SpecSource::Named(name) if name == "all" => builtin_specs()
            .into_iter()
            .map(|spec| Job {
                spec,
                gamma_grid: None,
            })
            .collect(),
        SpecSource::Named(name) => vec![Job {
            spec: named_spec(name)?,
            gamma_grid: None,
        }],
        SpecSource::Config(path) => {
            let flat = load_config(path)?;
            vec![Job {
                spec: flat.resolve()?,
                gamma_grid: flat.gamma_grid,
            }]
        }
    };
    for job in &mut jobs {
        if let Some(seed) = cfg.seed {
            job.spec.seed = seed;
        }
        if let Some(trials) = cfg.trials {
            if trials == 0 {
                return Err(CliError::Config("trials: must be >= 1".into()));
            }
            job.spec.trials = trials;
        }
    }
    Ok(jobs)
}

fn create_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn experiment_err(e: impl std::fmt::Display) -> CliError {
    CliError::Experiment(e.to_string())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Everything needed to reproduce a command's numeric output.
#[derive(Serialize)]
struct Manifest<'a> {
    artifact_version: &'a str,
    command: &'a str,
    spec_name: &'a str,
    seed: u64,
    trials: usize,
    parallelism: usize,
    wall_time_s: f64,
    failures: usize,
    config: FlatConfig,
    outputs: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn write_manifest(
    report: &mut Report,
    cfg: &RunConfig,
    command: &str,
    file: &str,
    job: &Job,
    started: Instant,
    failures: usize,
    outputs: Vec<String>,
) -> Result<(), CliError> {
    let mut config = FlatConfig::from_spec(&job.spec);
    config.gamma_grid = job.gamma_grid.clone();
    let manifest = Manifest {
        artifact_version: env!("CARGO_PKG_VERSION"),
        command,
        spec_name: &job.spec.name,
        seed: job.spec.seed,
        trials: job.spec.trials,
        parallelism: cfg.parallelism,
        wall_time_s: started.elapsed().as_secs_f64(),
        failures,
        config,
        outputs,
    };
    report.write(&cfg.out_dir, file, &json(&manifest))
}

/// Runs every selected experiment and writes its curve files and manifest.
pub fn cmd_run(cfg: &RunConfig) -> Result<Report, CliError> {
    let jobs = resolve_jobs(cfg)?;
    create_out_dir(&cfg.out_dir)?;
    let mut report = Report::default();
    for job in &jobs {
        let started = Instant::now();
        let curve = run_experiment_with(&job.spec, cfg.parallelism)
            .map_err(|e| experiment_err(format!("{}: {e}", job.spec.name)))?;
        let (sinr_stem, proj_stem) = curve_stems(&curve);
        let first = report.files.len();
        if cfg.formats.csv {
            report.write(&cfg.out_dir, &format!("{sinr_stem}.csv"), &sinr_csv(&curve))?;
            if !curve.projection.is_empty() {
                report.write(
                    &cfg.out_dir,
                    &format!("{proj_stem}.csv"),
                    &projection_csv(&curve),
                )?;
            }
        }
        if cfg.formats.json {
            report.write(
                &cfg.out_dir,
                &format!("{}_result.json", curve.name),
                &json(&curve),
            )?;
        }
        if cfg.emit_plots {
            let csv = format!("{sinr_stem}.csv");
            let gp = gnuplot_curves(
                &csv,
                curve.axis,
                curve.sinr.len(),
                "output SINR (dB)",
                false,
            );
            report.write(&cfg.out_dir, &format!("{sinr_stem}.gp"), &gp)?;
            if !curve.projection.is_empty() {
                let csv = format!("{proj_stem}.csv");
                let gp = gnuplot_curves(
                    &csv,
                    curve.axis,
                    curve.projection.len(),
                    "projection ratio",
                    true,
                );
                report.write(&cfg.out_dir, &format!("{proj_stem}.gp"), &gp)?;
            }
        }
        let outputs = report.names_since(first);
        write_manifest(
            &mut report,
            cfg,
            "run",
            &format!("{}_manifest.json", curve.name),
            job,
            started,
            curve.failures,
            outputs,
        )?;
        report.summary.push(format!(
            "{}: {} points x {} trials in {:.2} s ({} failed trials)",
            curve.name,
            curve.axis_values.len(),
            curve.trials,
            started.elapsed().as_secs_f64(),
            curve.failures
        ));
    }
    Ok(report)
}

/// Beampattern angles: −89.9° to 89.9° in 0.1° steps.
pub fn beampattern_angles() -> Vec<AngleDeg> {
    (0..1799)
        .map(|i| AngleDeg::new((i as f64 - 899.0) / 10.0).expect("inside (-90, 90)"))
        .collect()
}

fn file_prefix(name: &str, builtin: &str, suffix: &str) -> String {
    if name == "baseline" {
        builtin.to_string()
    } else {
        format!("{name}_{suffix}")
    }
}

/// Magnitude response of each method for the first trial of the spec's
/// base scenario.
pub fn cmd_beampattern(cfg: &RunConfig) -> Result<Report, CliError> {
    let jobs = resolve_jobs(cfg)?;
    create_out_dir(&cfg.out_dir)?;
    let mut report = Report::default();
    for job in &jobs {
        let started = Instant::now();
        let spec = ExperimentSpec {
            axis: SweepAxis::None,
            values: Vec::new(),
            ..job.spec.clone()
        };
        let ctx = point_context(&spec, 0).map_err(experiment_err)?;
        let (sc, weights) = trial_weights(&spec, &ctx, 0).map_err(experiment_err)?;
        let angles = beampattern_angles();
        let curves = weights
            .iter()
            .map(|w| beampattern(w, &sc.geom, &angles))
            .collect::<Result<Vec<_>, _>>()
            .map_err(experiment_err)?;

        let stem = file_prefix(&spec.name, "fig2_beampattern", "beampattern");
        let first = report.files.len();
        let mut header = vec!["angle_deg".to_string()];
        for m in &spec.methods {
            header.push(format!("{}_mag", m.label()));
            header.push(format!("{}_db", m.label()));
        }
        if cfg.formats.csv {
            let rows = angles.iter().enumerate().map(|(i, a)| {
                let mut row = vec![a.deg()];
                for c in &curves {
                    row.push(c.magnitudes[i]);
                    row.push(magnitude_db(c.magnitudes[i]));
                }
                row
            });
            report.write(
                &cfg.out_dir,
                &format!("{stem}.csv"),
                &csv_table(&header, rows),
            )?;

            let mut markers = vec![("theta_d".to_string(), sc.theta_d)];
            for (j, int) in sc.interferers.iter().enumerate() {
                markers.push((format!("theta_i{}", j + 1), int.angle));
            }
            let mut text = String::from("marker,angle_deg,row");
            for m in &spec.methods {
                text.push_str(&format!(",{}_mag", m.label()));
            }
            text.push('\n');
            for (label, angle) in markers {
                let row = angles
                    .iter()
                    .position(|a| (a.deg() - angle.deg()).abs() < 1e-9)
                    .map_or_else(|| "-1".to_string(), |r| r.to_string());
                text.push_str(&format!("{label},{},{row}", fmt_num(angle.deg())));
                for w in &weights {
                    text.push_str(&format!(
                        ",{}",
                        fmt_num(w.response_at(&sc.geom, angle).norm())
                    ));
                }
                text.push('\n');
            }
            report.write(&cfg.out_dir, &format!("{stem}_markers.csv"), &text)?;
        }
        if cfg.formats.json {
            #[derive(Serialize)]
            struct Pattern<'a> {
                method: &'a str,
                magnitudes: &'a [f64],
            }
            let doc: Vec<Pattern> = spec
                .methods
                .iter()
                .zip(&curves)
                .map(|(m, c)| Pattern {
                    method: m.label(),
                    magnitudes: &c.magnitudes,
                })
                .collect();
            report.write(&cfg.out_dir, &format!("{stem}.json"), &json(&doc))?;
        }
        if cfg.emit_plots {
            let gp = gnuplot_beampattern(&format!("{stem}.csv"), spec.methods.len());
            report.write(&cfg.out_dir, &format!("{stem}.gp"), &gp)?;
        }
        let outputs = report.names_since(first);
        write_manifest(
            &mut report,
            cfg,
            "beampattern",
            &format!("{stem}_manifest.json"),
            job,
            started,
            0,
            outputs,
        )?;
        for (m, w) in spec.methods.iter().zip(&weights) {
            report.summary.push(format!(
                "{}: {:<16} |w^H a(theta_d)| = {:.4}",
                spec.name,
                m.label(),
                w.response_at(&sc.geom, sc.theta_d).norm()
            ));
        }
    }
    Ok(report)
}

#[derive(Serialize)]
struct GammaSummary<'a> {
    spec_name: &'a str,
    subspace_dim: usize,
    gamma_hat: f64,
    argbest: f64,
    best_sinr_db: f64,
    sinr_at_gamma_hat_db: f64,
    gap_db: f64,
    grid_points: usize,
    singular_points: usize,
}

/// Exact `f(γ)` and SINR over a grid of loading factors on the spec's base
/// scenario, with `γ̂` and the grid-best `γ`.
pub fn cmd_gamma_sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let jobs = resolve_jobs(cfg)?;
    create_out_dir(&cfg.out_dir)?;
    let mut report = Report::default();
    for job in &jobs {
        let started = Instant::now();
        let spec = &job.spec;
        let sc = &spec.base;
        let grid = job.gamma_grid.clone().unwrap_or_else(|| default_grid(sc));
        let sweep = sweep_gamma(sc, spec.subspace_dim, &grid).map_err(experiment_err)?;
        let r_y = exact_covariance(sc);
        let dl_db = |gamma: f64| -> f64 {
            LoadingFactor::new(gamma)
                .and_then(|g| diagonal_loading(&r_y, sc.theta_0, g, &sc.geom))
                .and_then(|w| output_sinr(&w, sc))
                .map_or(f64::NAN, |s| s.db)
        };

        let stem = file_prefix(&spec.name, "gamma_sweep", "gamma_sweep");
        let first = report.files.len();
        let summary = GammaSummary {
            spec_name: &spec.name,
            subspace_dim: spec.subspace_dim,
            gamma_hat: sweep.gamma_hat,
            argbest: sweep.argbest,
            best_sinr_db: sweep.best_sinr.db,
            sinr_at_gamma_hat_db: sweep.sinr_at_gamma_hat.db,
            gap_db: sweep.gap_db,
            grid_points: grid.len(),
            singular_points: sweep.sinr_values.iter().filter(|s| s.is_none()).count(),
        };
        if cfg.formats.csv {
            let mut text = format!(
                "# gamma_hat={}\n# argbest={}\n# sinr_at_gamma_hat_db={}\n# best_sinr_db={}\n",
                fmt_num(sweep.gamma_hat),
                fmt_num(sweep.argbest),
                fmt_num(sweep.sinr_at_gamma_hat.db),
                fmt_num(sweep.best_sinr.db),
            );
            let header = ["gamma", "f", "sscdl_sinr_db", "dl_sinr_db"].map(String::from);
            let rows = grid.iter().enumerate().map(|(i, &g)| {
                vec![
                    g,
                    sweep.f_values[i].unwrap_or(f64::NAN),
                    sweep.sinr_values[i].map_or(f64::NAN, |s| s.db),
                    dl_db(g),
                ]
            });
            text.push_str(&csv_table(&header, rows));
            report.write(&cfg.out_dir, &format!("{stem}.csv"), &text)?;
        }
        report.write(
            &cfg.out_dir,
            &format!("{stem}_summary.json"),
            &json(&summary),
        )?;
        if cfg.emit_plots {
            report.write(
                &cfg.out_dir,
                &format!("{stem}.gp"),
                &gnuplot_gamma(&format!("{stem}.csv")),
            )?;
        }
        let outputs = report.names_since(first);
        write_manifest(
            &mut report,
            cfg,
            "gamma-sweep",
            &format!("{stem}_manifest.json"),
            job,
            started,
            0,
            outputs,
        )?;
        report.summary.push(format!(
            "{}: gamma_hat = {:.4}, SINR {:.4} dB; grid best gamma = {:.4}, SINR {:.4} dB (gap {:.4} dB)",
            spec.name,
            sweep.gamma_hat,
            sweep.sinr_at_gamma_hat.db,
            sweep.argbest,
            sweep.best_sinr.db,
            sweep.gap_db
        ));
    }
    Ok(report)
}

/// One line per builtin spec.
pub fn list_specs() -> Vec<String> {
    builtin_specs()
        .iter()
        .map(|s| {
            let values: Vec<String> = s.values.iter().map(|v| v.to_string()).collect();
            let methods: Vec<&str> = s.methods.iter().map(|m| m.label()).collect();
            format!(
                "{:<13} axis={:<12} values=[{}] methods=[{}] trials={} N={} K={} M={}",
                s.name,
                s.axis.label(),
                values.join(","),
                methods.join(","),
                s.trials,
                s.base.n(),
                s.base.snapshots,
                s.subspace_dim
            )
        })
        .collect()
}
