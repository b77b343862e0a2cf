//! Monte Carlo harness: sweeps one scenario parameter, runs independent
//! trials per sweep point and reduces per-method SINR and projection ratios.
//!
//! Every trial draws fresh sources and noise from a seed derived from
//! `(spec.seed, axis_index, trial_index)`, so results do not depend on the
//! number of worker threads or their scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array_model::AngleDeg;
use crate::beamformers::{
    build_subspace, default_gamma, diagonal_loading, mvdr, optimal, sscdl_in_subspace,
    LoadingFactor, SubspaceBasis, WeightVector,
};
use crate::gamma_analysis::{exact_sscdl_sinr, exact_subspace};
use crate::metrics::{output_sinr, projection_ratio_dl, projection_ratio_sscdl, SinrValue};
use crate::numerics::CMatrix;
use crate::signal_sim::{
    exact_covariance, sample_covariance, synthesize_snapshots, Interferer, Scenario,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Sample-covariance MVDR steered at the assumed DoA.
    Mvdr,
    /// Sample-covariance MVDR with loading `γ̂`.
    Dl,
    /// SSC-DL: subspace from `SubspaceSource`, loaded solve on `R̂_y`.
    Sscdl,
    /// Exact-covariance MVDR at the true DoA.
    Optimal,
    /// Sample-covariance MVDR steered at the true DoA.
    MvdrNoMismatch,
    /// SSC-DL with the subspace always built from `R̂_y`.
    SscdlSample,
    /// SSC-DL with the exact `R_y` in both steps.
    SscdlExact,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Mvdr,
        Method::Dl,
        Method::Sscdl,
        Method::Optimal,
        Method::MvdrNoMismatch,
        Method::SscdlSample,
        Method::SscdlExact,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Mvdr => "mvdr",
            Method::Dl => "dl",
            Method::Sscdl => "sscdl",
            Method::Optimal => "optimal",
            Method::MvdrNoMismatch => "mvdr_no_mismatch",
            Method::SscdlSample => "sscdl_sample",
            Method::SscdlExact => "sscdl_exact",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.label() == s)
    }

    /// Methods whose result does not depend on the snapshots.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Method::Optimal | Method::SscdlExact)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    Snapshots,
    SubspaceDim,
    None,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::Snapshots => "snapshots",
            SweepAxis::SubspaceDim => "subspace_dim",
            SweepAxis::None => "point",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [
            SweepAxis::SnrDb,
            SweepAxis::Snapshots,
            SweepAxis::SubspaceDim,
            SweepAxis::None,
        ]
        .into_iter()
        .find(|a| a.label() == s)
    }
}

/// How per-trial SINRs are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Mean of linear SINR, then dB.
    #[default]
    Linear,
    /// Mean of per-trial dB values.
    Db,
}

/// Covariance used to build the SSC-DL constraint subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceSource {
    /// Exact `R_y` of the scenario; fixed across trials.
    #[default]
    TrueCovariance,
    /// The trial's `R̂_y`.
    SampleCovariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub base: Scenario,
    pub subspace_dim: usize,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub averaging: Averaging,
    #[serde(default)]
    pub subspace_source: SubspaceSource,
    /// Also reduce SSC-DL and DL projection ratios per interferer.
    #[serde(default)]
    pub projection_ratios: bool,
}

impl ExperimentSpec {
    /// Number of sweep points; an axis of `None` has one.
    pub fn num_points(&self) -> usize {
        match self.axis {
            SweepAxis::None => 1,
            _ => self.values.len(),
        }
    }

    pub fn axis_values(&self) -> Vec<f64> {
        match self.axis {
            SweepAxis::None => vec![0.0],
            _ => self.values.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.methods.is_empty() {
            return bad("methods is empty".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return bad(format!("methods lists {} twice", m.label()));
            }
        }
        if self.axis != SweepAxis::None && self.values.is_empty() {
            return bad("values must be nonempty when axis is not none".into());
        }
        for i in 0..self.num_points() {
            self.point(i)?.0.validate().map_err(|e| match e {
                Error::InvalidScenario(msg) => Error::InvalidSpec(msg),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Scenario and subspace dimension at one sweep point.
    pub fn point(&self, axis_index: usize) -> Result<(Scenario, usize)> {
        let mut sc = self.base.clone();
        let mut m = self.subspace_dim;
        let n = sc.n();
        let count = |v: f64, field: &str, lo: usize, hi: usize| -> Result<usize> {
            if v.fract() == 0.0 && v >= lo as f64 && v <= hi as f64 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidSpec(format!(
                    "values: {field} = {v} must be an integer in [{lo}, {hi}]"
                )))
            }
        };
        match self.axis {
            SweepAxis::None => {}
            SweepAxis::SnrDb => {
                let v = self.value(axis_index)?;
                if !v.is_finite() {
                    return Err(Error::InvalidSpec(format!("values: snr_db = {v}")));
                }
                sc.set_snr_db(v);
            }
            SweepAxis::Snapshots => {
                sc.snapshots = count(self.value(axis_index)?, "snapshots", 1, usize::MAX)?
            }
            SweepAxis::SubspaceDim => m = count(self.value(axis_index)?, "subspace_dim", 1, n)?,
        }
        if m == 0 || m > n {
            return Err(Error::InvalidSpec(format!(
                "subspace_dim = {m} must lie in [1, {n}]"
            )));
        }
        Ok((sc, m))
    }

    fn value(&self, axis_index: usize) -> Result<f64> {
        self.values
            .get(axis_index)
            .copied()
            .ok_or_else(|| Error::InvalidSpec(format!("axis index {axis_index} out of range")))
    }
}

/// Seed of one trial. Three rounds of splitmix64 over the spec seed, the
/// axis index and the trial index.
pub fn derive_seed(seed: u64, axis_index: usize, trial_index: usize) -> u64 {
    fn splitmix64(x: u64) -> u64 {
        let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let s = splitmix64(seed);
    let s = splitmix64(s ^ axis_index as u64);
    splitmix64(s ^ trial_index as u64)
}

/// Per-point quantities shared by all trials.
#[derive(Debug, Clone)]
pub struct PointContext {
    pub axis_index: usize,
    pub scenario: Scenario,
    pub subspace_dim: usize,
    /// Subspace from the exact `R_y`.
    pub exact_basis: SubspaceBasis,
    pub optimal_sinr: SinrValue,
    pub sscdl_exact_sinr: SinrValue,
}

pub fn point_context(spec: &ExperimentSpec, axis_index: usize) -> Result<PointContext> {
    let (scenario, m) = spec.point(axis_index)?;
    let exact_basis = exact_subspace(&scenario, m)?;
    let optimal_sinr = output_sinr(&optimal(&scenario)?, &scenario)?;
    let sscdl_exact_sinr =
        exact_sscdl_sinr(default_gamma(&scenario).value(), &scenario, &exact_basis)?;
    Ok(PointContext {
        axis_index,
        scenario,
        subspace_dim: m,
        exact_basis,
        optimal_sinr,
        sscdl_exact_sinr,
    })
}

/// Results of one trial at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Per requested method, in spec order.
    pub sinr: Vec<SinrValue>,
    /// `(sscdl, dl)` per interferer; empty unless requested.
    pub ratios: Vec<(f64, f64)>,
}

/// Seeded scenario and sample covariance of one trial.
fn trial_sample(
    spec: &ExperimentSpec,
    ctx: &PointContext,
    trial_index: usize,
) -> Result<(Scenario, CMatrix)> {
    let mut sc = ctx.scenario.clone();
    sc.seed = derive_seed(spec.seed, ctx.axis_index, trial_index);
    let r_hat = sample_covariance(&synthesize_snapshots(&sc)?)?;
    Ok((sc, r_hat))
}

/// Weight computation for one trial; the DL weight and the SSC-DL basis
/// are computed at most once.
struct TrialSolver<'a> {
    spec: &'a ExperimentSpec,
    ctx: &'a PointContext,
    sc: Scenario,
    r_hat: CMatrix,
    gamma: LoadingFactor,
    w_dl: Option<WeightVector>,
    sample_basis: Option<SubspaceBasis>,
}

impl<'a> TrialSolver<'a> {
    fn new(spec: &'a ExperimentSpec, ctx: &'a PointContext, trial_index: usize) -> Result<Self> {
        let (sc, r_hat) = trial_sample(spec, ctx, trial_index)?;
        Ok(Self {
            spec,
            ctx,
            gamma: default_gamma(&sc),
            sc,
            r_hat,
            w_dl: None,
            sample_basis: None,
        })
    }

    fn sample_basis(&mut self) -> Result<&SubspaceBasis> {
        if self.sample_basis.is_none() {
            let sc = &self.sc;
            self.sample_basis = Some(build_subspace(
                &self.r_hat,
                sc.theta_0,
                sc.theta_1,
                sc.theta_2,
                self.ctx.subspace_dim,
                &sc.geom,
            )?);
        }
        Ok(self.sample_basis.as_ref().expect("just set"))
    }

    fn sscdl_basis(&mut self) -> Result<&SubspaceBasis> {
        match self.spec.subspace_source {
            SubspaceSource::TrueCovariance => Ok(&self.ctx.exact_basis),
            SubspaceSource::SampleCovariance => self.sample_basis(),
        }
    }

    fn dl(&mut self) -> Result<WeightVector> {
        if self.w_dl.is_none() {
            self.w_dl = Some(diagonal_loading(
                &self.r_hat,
                self.sc.theta_0,
                self.gamma,
                &self.sc.geom,
            )?);
        }
        Ok(self.w_dl.clone().expect("just set"))
    }

    fn weight(&mut self, method: Method) -> Result<WeightVector> {
        let (theta_0, gamma, geom) = (self.sc.theta_0, self.gamma, self.sc.geom);
        match method {
            Method::Mvdr => mvdr(&self.r_hat, theta_0, &geom),
            Method::Dl => self.dl(),
            Method::Sscdl => {
                let basis = self.sscdl_basis()?.clone();
                sscdl_in_subspace(&self.r_hat, &basis, theta_0, gamma, &geom)
            }
            Method::Optimal => optimal(&self.sc),
            Method::MvdrNoMismatch => mvdr(&self.r_hat, self.sc.theta_d, &geom),
            Method::SscdlSample => {
                let basis = self.sample_basis()?.clone();
                sscdl_in_subspace(&self.r_hat, &basis, theta_0, gamma, &geom)
            }
            Method::SscdlExact => sscdl_in_subspace(
                &exact_covariance(&self.sc),
                &self.ctx.exact_basis,
                theta_0,
                gamma,
                &geom,
            ),
        }
    }
}

/// Weights of every requested method for one trial, in spec order.
pub fn trial_weights(
    spec: &ExperimentSpec,
    ctx: &PointContext,
    trial_index: usize,
) -> Result<(Scenario, Vec<WeightVector>)> {
    let mut solver = TrialSolver::new(spec, ctx, trial_index)?;
    let weights = spec
        .methods
        .iter()
        .map(|&m| solver.weight(m))
        .collect::<Result<Vec<_>>>()?;
    Ok((solver.sc, weights))
}

pub fn run_trial(
    spec: &ExperimentSpec,
    ctx: &PointContext,
    trial_index: usize,
) -> Result<TrialOutcome> {
    let mut solver = TrialSolver::new(spec, ctx, trial_index)?;
    let mut sinr = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        sinr.push(match method {
            Method::Optimal => ctx.optimal_sinr,
            Method::SscdlExact => ctx.sscdl_exact_sinr,
            _ => output_sinr(&solver.weight(method)?, &solver.sc)?,
        });
    }
    let mut ratios = Vec::new();
    if spec.projection_ratios {
        let w = solver.dl()?;
        let geom = solver.sc.geom;
        let interferers = solver.sc.interferers.clone();
        let basis = solver.sscdl_basis()?;
        for Interferer { angle, .. } in &interferers {
            ratios.push((
                projection_ratio_sscdl(basis, *angle, &geom)?.value,
                projection_ratio_dl(&w, *angle, &geom)?.value,
            ));
        }
    }
    Ok(TrialOutcome { sinr, ratios })
}

/// One method's SINR curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrSeries {
    pub method: Method,
    pub mean_db: Vec<f64>,
    pub stderr_db: Vec<f64>,
}

/// Mean projection ratio of one interferer under one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSeries {
    /// `"sscdl"` or `"dl"`.
    pub method: String,
    /// Zero-based interferer index.
    pub interferer: usize,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl RatioSeries {
    pub fn label(&self) -> String {
        format!("{}_int{}", self.method, self.interferer + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveResult {
    pub name: String,
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub sinr: Vec<SinrSeries>,
    pub projection: Vec<RatioSeries>,
    pub trials: usize,
    pub failures: usize,
}

impl CurveResult {
    pub fn series(&self, method: Method) -> Option<&SinrSeries> {
        self.sinr.iter().find(|s| s.method == method)
    }

    pub fn ratio(&self, method: &str, interferer: usize) -> Option<&RatioSeries> {
        self.projection
            .iter()
            .find(|s| s.method == method && s.interferer == interferer)
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    // identical samples (deterministic methods) reduce to themselves exactly
    if xs.iter().all(|x| x.to_bits() == xs[0].to_bits()) {
        return (xs[0], 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn reduce_sinr(values: &[SinrValue], averaging: Averaging) -> (f64, f64) {
    match averaging {
        Averaging::Linear => {
            let lin: Vec<f64> = values.iter().map(|v| v.linear).collect();
            let (mean, se) = mean_and_stderr(&lin);
            let db = SinrValue::from_linear(mean).db;
            // delta method: d(10 log10 x) = 10/(x ln 10) dx
            let se_db = if mean > 0.0 {
                10.0 / std::f64::consts::LN_10 * se / mean
            } else {
                f64::INFINITY
            };
            (db, se_db)
        }
        Averaging::Db => {
            let db: Vec<f64> = values.iter().map(|v| v.db).collect();
            mean_and_stderr(&db)
        }
    }
}

/// Runs every trial of `spec` on the global rayon pool.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<CurveResult> {
    run_points(spec)
}

/// Runs `spec` on a dedicated pool of `threads` workers. The result is
/// identical for any thread count.
pub fn run_experiment_with(spec: &ExperimentSpec, threads: usize) -> Result<CurveResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidSpec(format!("parallel: {e}")))?;
    pool.install(|| run_points(spec))
}

fn run_points(spec: &ExperimentSpec) -> Result<CurveResult> {
    spec.validate()?;
    let points = spec.num_points();
    let total = points * spec.trials;
    let mut per_point = Vec::with_capacity(points);
    let mut failures = 0usize;
    let mut first_failure: Option<(usize, usize, Error)> = None;
    for axis_index in 0..points {
        let ctx = point_context(spec, axis_index)?;
        let outcomes: Vec<Result<TrialOutcome>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, &ctx, t))
            .collect();
        let mut ok = Vec::with_capacity(outcomes.len());
        for (t, o) in outcomes.into_iter().enumerate() {
            match o {
                Ok(o) => ok.push(o),
                Err(e) => {
                    failures += 1;
                    first_failure.get_or_insert((axis_index, t, e));
                }
            }
        }
        per_point.push(ok);
    }
    if let Some((axis_index, trial, cause)) = first_failure {
        if failures * 100 > total || per_point.iter().any(|p| p.is_empty()) {
            return Err(Error::TrialFailures {
                failed: failures,
                total,
                axis_index,
                trial,
                cause: Box::new(cause),
            });
        }
    }

    let sinr = spec
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let (mean_db, stderr_db) = per_point
                .iter()
                .map(|ok| {
                    let vals: Vec<SinrValue> = ok.iter().map(|o| o.sinr[k]).collect();
                    reduce_sinr(&vals, spec.averaging)
                })
                .unzip();
            SinrSeries {
                method,
                mean_db,
                stderr_db,
            }
        })
        .collect();

    let mut projection = Vec::new();
    if spec.projection_ratios {
        for (slot, method) in ["sscdl", "dl"].into_iter().enumerate() {
            for j in 0..spec.base.interferers.len() {
                let (mean, stderr) = per_point
                    .iter()
                    .map(|ok| {
                        let xs: Vec<f64> = ok
                            .iter()
                            .map(|o| {
                                if slot == 0 {
                                    o.ratios[j].0
                                } else {
                                    o.ratios[j].1
                                }
                            })
                            .collect();
                        mean_and_stderr(&xs)
                    })
                    .unzip();
                projection.push(RatioSeries {
                    method: method.to_string(),
                    interferer: j,
                    mean,
                    stderr,
                });
            }
        }
    }

    Ok(CurveResult {
        name: spec.name.clone(),
        axis: spec.axis,
        axis_values: spec.axis_values(),
        sinr,
        projection,
        trials: spec.trials,
        failures,
    })
}

/// Names of the builtin specs, in canonical order.
pub const BUILTIN_NAMES: [&str; 6] = [
    "baseline",
    "snapshots",
    "subspace_dim",
    "doa_m45",
    "doa_m76",
    "n14",
];

fn deg(x: f64) -> AngleDeg {
    AngleDeg::new(x).expect("constant angle")
}

/// `asin(sin θ0 ∓ sin 4°)`, ordered so the first bound is the smaller.
fn bounds_around(theta_0: AngleDeg) -> (AngleDeg, AngleDeg) {
    let s4 = 4f64.to_radians().sin();
    let lo = AngleDeg::from_sin(theta_0.sin() - s4).expect("bound in range");
    let hi = AngleDeg::from_sin(theta_0.sin() + s4).expect("bound in range");
    if lo.deg() <= hi.deg() {
        (lo, hi)
    } else {
        (hi, lo)
    }
}

fn alternate_doa(theta_d: f64, theta_0: AngleDeg, ints: [f64; 2]) -> Scenario {
    let mut sc = Scenario::baseline();
    sc.theta_d = deg(theta_d);
    sc.theta_0 = theta_0;
    (sc.theta_1, sc.theta_2) = bounds_around(theta_0);
    sc.interferers[0].angle = deg(ints[0]);
    sc.interferers[1].angle = deg(ints[1]);
    sc
}

fn snr_values() -> Vec<f64> {
    (0..=6).map(|i| 5.0 * i as f64).collect()
}

/// The six canonical experiments: SINR and projection ratios vs SNR,
/// SINR and projection ratios vs K, SINR vs M, and SINR vs SNR for the
/// −45°, −76° and 14-sensor scenarios.
pub fn builtin_specs() -> Vec<ExperimentSpec> {
    let robust = vec![Method::Mvdr, Method::Dl, Method::Sscdl, Method::Optimal];
    let spec =
        |name: &str, base: Scenario, axis, values, methods: Vec<Method>, ratios| ExperimentSpec {
            name: name.to_string(),
            base,
            subspace_dim: 5,
            axis,
            values,
            methods,
            trials: 200,
            seed: 0,
            averaging: Averaging::Linear,
            subspace_source: SubspaceSource::TrueCovariance,
            projection_ratios: ratios,
        };

    let m45_theta_0 = AngleDeg::from_sin((-45f64).to_radians().sin() + 2.5f64.to_radians().sin())
        .expect("in range");
    let mut n14 = Scenario::baseline();
    n14.geom.num_sensors = 14;

    let mut with_no_mismatch = robust.clone();
    with_no_mismatch.push(Method::MvdrNoMismatch);
    vec![
        spec(
            "baseline",
            Scenario::baseline(),
            SweepAxis::SnrDb,
            snr_values(),
            robust.clone(),
            true,
        ),
        spec(
            "snapshots",
            Scenario::baseline(),
            SweepAxis::Snapshots,
            vec![10.0, 20.0, 30.0, 50.0, 100.0, 200.0, 300.0, 400.0],
            with_no_mismatch,
            true,
        ),
        spec(
            "subspace_dim",
            Scenario::baseline(),
            SweepAxis::SubspaceDim,
            (1..=10).map(f64::from).collect(),
            vec![Method::Dl, Method::Sscdl, Method::Optimal],
            false,
        ),
        spec(
            "doa_m45",
            alternate_doa(-45.0, m45_theta_0, [-21.41, -11.95]),
            SweepAxis::SnrDb,
            snr_values(),
            robust.clone(),
            false,
        ),
        spec(
            "doa_m76",
            alternate_doa(-76.0, deg(-67.92), [-38.92, -28.05]),
            SweepAxis::SnrDb,
            snr_values(),
            robust.clone(),
            false,
        ),
        spec("n14", n14, SweepAxis::SnrDb, snr_values(), robust, false),
    ]
}

pub fn builtin_spec(name: &str) -> Option<ExperimentSpec> {
    builtin_specs().into_iter().find(|s| s.name == name)
}
