//! Monte Carlo experiment runner: convergence curves, steady-state summaries,
//! parameter sweeps and timing comparisons.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analysis::{theta_cost, ThetaCost};
use crate::error::{io_err, KafError, Result};
use crate::filters::{FilterConfig, KernelFilter, Variant};
use crate::math::{GGDParams, KernelParams};
use crate::signals::{
    embed, load_series, mackey_glass_len, run_rng, sample_noise, scenario_noise, Column,
    Embedding, MGConfig, NoiseModel,
};

/// Version string written to run manifests.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Which noise scenario drives the run, or real data used as-is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Noise(u8),
    File,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Noise(k) => write!(f, "{k}"),
            Scenario::File => f.write_str("file"),
        }
    }
}

impl Serialize for Scenario {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scenario::Noise(k) => s.serialize_u8(*k),
            Scenario::File => s.serialize_str("file"),
        }
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(i64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(k) if (1..=4).contains(&k) => Ok(Scenario::Noise(k as u8)),
            Raw::Num(k) => Err(serde::de::Error::custom(format!(
                "scenario must be 1..=4 or \"file\", got {k}"
            ))),
            Raw::Name(s) if s == "file" => Ok(Scenario::File),
            Raw::Name(s) => Err(serde::de::Error::custom(format!(
                "scenario must be 1..=4 or \"file\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileData {
    pub path: PathBuf,
    pub column: Column,
    pub n_train: usize,
    pub n_test: usize,
    /// Rescale the loaded series to zero mean and unit variance.
    #[serde(default)]
    pub standardize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    MackeyGlass(MGConfig),
    File(FileData),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::MackeyGlass(MGConfig::default())
    }
}

impl DataSource {
    pub fn n_train(&self) -> usize {
        match self {
            DataSource::MackeyGlass(m) => m.n_train,
            DataSource::File(f) => f.n_train,
        }
    }

    pub fn n_test(&self) -> usize {
        match self {
            DataSource::MackeyGlass(m) => m.n_test,
            DataSource::File(f) => f.n_test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "L")]
    L,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "beta")]
    Beta,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::L => "L",
            SweepParam::Gamma => "gamma",
            SweepParam::Alpha => "alpha",
            SweepParam::Beta => "beta",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepParam {
    type Err = KafError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(SweepParam::L),
            "gamma" => Ok(SweepParam::Gamma),
            "alpha" => Ok(SweepParam::Alpha),
            "beta" => Ok(SweepParam::Beta),
            other => Err(KafError::Config(format!(
                "sweep.param must be one of L, gamma, alpha, beta; got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub param: SweepParam,
    pub values: Vec<f64>,
    /// Scenarios to repeat the sweep over; empty means the top-level one.
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
}

/// How per-run curves are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Mean of the MSE, then dB.
    #[default]
    Linear,
    /// Mean of the per-run dB values.
    Db,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub data: DataSource,
    #[serde(default)]
    pub embedding: Embedding,
    pub filters: Vec<FilterConfig>,
    #[serde(default = "default_mc_runs")]
    pub mc_runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_steady_window")]
    pub steady_window: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    /// Replaces the scenario's noise model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    #[serde(default)]
    pub averaging: Averaging,
    /// Subtract the series mean before embedding.
    #[serde(default = "default_center")]
    pub center: bool,
}

fn default_center() -> bool {
    true
}

fn default_mc_runs() -> usize {
    50
}

fn default_steady_window() -> usize {
    100
}

fn config_err(field: &str, msg: impl fmt::Display) -> KafError {
    KafError::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| KafError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| KafError::Config(e.to_string()))
    }

    pub fn n_train(&self) -> usize {
        self.data.n_train()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_runs == 0 {
            return Err(config_err("mc_runs", "must be >= 1"));
        }
        let n_train = self.n_train();
        if n_train == 0 {
            return Err(config_err("data.n_train", "must be >= 1"));
        }
        if self.data.n_test() == 0 {
            return Err(config_err("data.n_test", "must be >= 1"));
        }
        if self.steady_window == 0 || self.steady_window > n_train {
            return Err(config_err(
                "steady_window",
                format!("must lie in 1..={n_train}, got {}", self.steady_window),
            ));
        }
        self.embedding
            .validate()
            .map_err(|e| config_err("embedding", e))?;
        match (&self.scenario, &self.data) {
            (Scenario::File, DataSource::MackeyGlass(_)) => {
                return Err(config_err("scenario", "\"file\" requires data.source = \"file\""))
            }
            (Scenario::Noise(k), _) => {
                scenario_noise(*k).map_err(|e| config_err("scenario", e))?;
            }
            _ => {}
        }
        if let DataSource::MackeyGlass(mg) = &self.data {
            mg.validate().map_err(|e| config_err("data", e))?;
        }
        if let Some(n) = &self.noise {
            n.validate().map_err(|e| config_err("noise", e))?;
        }
        if self.filters.is_empty() {
            return Err(config_err("filters", "at least one filter is required"));
        }
        let mut labels = HashSet::new();
        for (i, f) in self.filters.iter().enumerate() {
            f.validate().map_err(|e| config_err(&format!("filters[{i}]"), e))?;
            if !labels.insert(f.label()) {
                return Err(config_err(
                    &format!("filters[{i}]"),
                    format!("duplicate label `{}`; set `name`", f.label()),
                ));
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return Err(config_err("sweep.values", "must not be empty"));
            }
            if self.noise.is_some() && !sw.scenarios.is_empty() {
                return Err(config_err(
                    "sweep.scenarios",
                    "cannot be combined with a `noise` override",
                ));
            }
            for s in &sw.scenarios {
                if *s == Scenario::File {
                    return Err(config_err("sweep.scenarios", "only noise scenarios 1..=4"));
                }
            }
            for &v in &sw.values {
                apply_sweep_value(self, sw.param, v)?;
            }
        }
        Ok(())
    }

    fn noise_model(&self) -> Result<Option<NoiseModel>> {
        if let Some(n) = self.noise {
            return Ok(Some(n));
        }
        match self.scenario {
            Scenario::Noise(k) => Ok(Some(scenario_noise(k)?)),
            Scenario::File => Ok(None),
        }
    }
}

/// Copy of `cfg` with sweep parameter `param` set to `value` on every
/// filter it applies to.
pub fn apply_sweep_value(cfg: &ExperimentConfig, param: SweepParam, value: f64) -> Result<ExperimentConfig> {
    let mut out = cfg.clone();
    out.sweep = None;
    for f in &mut out.filters {
        match param {
            SweepParam::L => {
                if !(value >= 1.0) || value.fract() != 0.0 {
                    return Err(config_err("sweep.values", format!("L must be a positive integer, got {value}")));
                }
                f.criterion.window_len = value as usize;
            }
            SweepParam::Gamma => {
                if !f.variant.is_unquantized() && f.variant != Variant::Krls {
                    f.gamma = value;
                }
            }
            SweepParam::Alpha | SweepParam::Beta => {
                if f.variant.criterion() == Some(crate::criteria::Criterion::Gmee) {
                    let g = f.criterion.ggd;
                    let (a, b) = match param {
                        SweepParam::Alpha => (value, g.beta()),
                        _ => (g.alpha(), value),
                    };
                    f.criterion.ggd = GGDParams::new(a, b).map_err(|e| config_err("sweep.values", e))?;
                }
            }
        }
        f.validate().map_err(|e| config_err("sweep.values", e))?;
    }
    Ok(out)
}

/// Training and clean test pairs for one experiment.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train_inputs: Vec<Vec<f64>>,
    pub train_desired: Vec<f64>,
    pub test_inputs: Vec<Vec<f64>>,
    pub test_desired: Vec<f64>,
}

/// Builds the embedded train/test split described by `cfg`.
pub fn prepare_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let (n_train, n_test) = (cfg.data.n_train(), cfg.data.n_test());
    let pairs = n_train + n_test;
    let series = match &cfg.data {
        DataSource::MackeyGlass(mg) => mackey_glass_len(mg, cfg.embedding.series_len(pairs))?,
        DataSource::File(fd) => {
            let mut s = load_series(&fd.path, &fd.column)?;
            if fd.standardize {
                let n = s.len() as f64;
                let mean = s.iter().sum::<f64>() / n;
                let sd = (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
                let sd = if sd > 0.0 { sd } else { 1.0 };
                s.iter_mut().for_each(|v| *v = (*v - mean) / sd);
            }
            s
        }
    };
    let series = if cfg.center {
        let m = mean(&series);
        series.into_iter().map(|v| v - m).collect()
    } else {
        series
    };
    let (mut inputs, mut desired) = embed(&series, &cfg.embedding)?;
    if inputs.len() < pairs {
        return Err(KafError::SeriesTooShort {
            needed: cfg.embedding.series_len(pairs),
            got: series.len(),
        });
    }
    inputs.truncate(pairs);
    desired.truncate(pairs);
    let test_inputs = inputs.split_off(n_train);
    let test_desired = desired.split_off(n_train);
    Ok(Dataset {
        train_inputs: inputs,
        train_desired: desired,
        test_inputs,
        test_desired,
    })
}

/// `κ(test_j, train_i)` stored row-major by test point.
struct TestKernel {
    sigma: f64,
    n_train: usize,
    values: Vec<f64>,
}

impl TestKernel {
    fn new(ds: &Dataset, kernel: &KernelParams) -> Self {
        let n_train = ds.train_inputs.len();
        let mut values = Vec::with_capacity(n_train * ds.test_inputs.len());
        for t in &ds.test_inputs {
            values.extend(ds.train_inputs.iter().map(|u| kernel.eval(t, u)));
        }
        Self {
            sigma: kernel.sigma(),
            n_train,
            values,
        }
    }

    /// Test MSE of a filter whose coefficients cover the first `coeffs.len()`
    /// training inputs.
    fn mse(&self, coeffs: &[f64], targets: &[f64]) -> f64 {
        let n = coeffs.len();
        let sum: f64 = targets
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let row = &self.values[j * self.n_train..j * self.n_train + n];
                let y: f64 = row.iter().zip(coeffs).map(|(k, a)| k * a).sum();
                (t - y) * (t - y)
            })
            .sum();
        sum / targets.len() as f64
    }
}

pub fn to_db(mse: f64) -> f64 {
    10.0 * mse.log10()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Per-filter results of one Monte Carlo run.
#[derive(Debug, Clone)]
struct RunFilterResult {
    mse: Vec<f64>,
    steady_db: f64,
    update_time: Duration,
    theta_time: Duration,
    h_mean: f64,
    singular_steps: usize,
}

/// Averaged results for one filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSeries {
    pub label: String,
    pub variant: Variant,
    /// Test MSE in dB after each training update.
    pub mse_db: Vec<f64>,
    /// Mean of the last `steady_window` entries of `mse_db`.
    pub steady_state_db: f64,
    /// Per-run steady state, in run order.
    pub run_steady_db: Vec<f64>,
    /// Mean seconds per update, excluding test evaluation.
    pub wall_per_iter: f64,
    /// Mean seconds per θ evaluation.
    pub theta_per_iter: f64,
    /// Mean codebook size over updates and runs (0 for KRLS).
    pub h_mean: f64,
    pub singular_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub series: Vec<MetricSeries>,
}

impl ExperimentResult {
    pub fn series(&self, label: &str) -> Option<&MetricSeries> {
        self.series.iter().find(|s| s.label == label)
    }
}

fn run_filter(
    cfg: &FilterConfig,
    ds: &Dataset,
    desired: &[f64],
    tk: &TestKernel,
    steady_window: usize,
) -> Result<RunFilterResult> {
    let n = ds.train_inputs.len();
    let mut mse = Vec::with_capacity(n);
    let t0 = Instant::now();
    let mut filter = KernelFilter::init(&ds.train_inputs[0], desired[0], cfg.clone())?;
    let mut update_time = t0.elapsed();
    mse.push(tk.mse(filter.coefficients(), &ds.test_desired));
    for (u, &d) in ds.train_inputs.iter().zip(desired).skip(1) {
        let t = Instant::now();
        filter.update(u, d)?;
        update_time += t.elapsed();
        mse.push(tk.mse(filter.coefficients(), &ds.test_desired));
    }
    let steady_db = mean(&mse[n - steady_window..].iter().map(|&m| to_db(m)).collect::<Vec<_>>());
    let stats = filter.stats();
    Ok(RunFilterResult {
        mse,
        steady_db,
        update_time,
        theta_time: stats.theta_time,
        h_mean: stats.mean_codebook_len(),
        singular_steps: stats.singular_steps,
    })
}

/// Runs every configured filter over `mc_runs` noisy realizations.
///
/// All filters in a run see the same noise draws. Runs execute in parallel
/// and are combined in run order, so the output does not depend on thread
/// count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let ds = prepare_dataset(cfg)?;
    run_on_dataset(cfg, &ds)
}

/// As [`run_experiment`] on a prepared dataset.
pub fn run_on_dataset(cfg: &ExperimentConfig, ds: &Dataset) -> Result<ExperimentResult> {
    let noise = cfg.noise_model()?;
    let n_train = ds.train_inputs.len();

    let mut kernels: Vec<TestKernel> = Vec::new();
    let kernel_of: Vec<usize> = cfg
        .filters
        .iter()
        .map(|f| {
            let s = f.kernel.sigma();
            match kernels.iter().position(|k| k.sigma == s) {
                Some(i) => i,
                None => {
                    kernels.push(TestKernel::new(ds, &f.kernel));
                    kernels.len() - 1
                }
            }
        })
        .collect();

    let runs: Vec<Vec<RunFilterResult>> = (0..cfg.mc_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(cfg.master_seed, run as u64);
            let desired: Vec<f64> = match &noise {
                Some(m) => ds
                    .train_desired
                    .iter()
                    .map(|&d| d + sample_noise(m, &mut rng))
                    .collect(),
                None => ds.train_desired.clone(),
            };
            cfg.filters
                .iter()
                .zip(&kernel_of)
                .map(|(f, &ki)| {
                    run_filter(f, ds, &desired, &kernels[ki], cfg.steady_window).map_err(|e| {
                        KafError::Run {
                            run,
                            filter: f.label(),
                            source: Box::new(e),
                        }
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let nruns = cfg.mc_runs as f64;
    let series = cfg
        .filters
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            let mut acc = vec![0.0; n_train];
            for run in &runs {
                let curve = &run[fi].mse;
                match cfg.averaging {
                    Averaging::Linear => acc.iter_mut().zip(curve).for_each(|(a, m)| *a += m),
                    Averaging::Db => acc.iter_mut().zip(curve).for_each(|(a, m)| *a += to_db(*m)),
                }
            }
            let mse_db: Vec<f64> = match cfg.averaging {
                Averaging::Linear => acc.iter().map(|a| to_db(a / nruns)).collect(),
                Averaging::Db => acc.iter().map(|a| a / nruns).collect(),
            };
            let steady_state_db = mean(&mse_db[n_train - cfg.steady_window..]);
            let per = |pick: &dyn Fn(&RunFilterResult) -> f64| {
                runs.iter().map(|r| pick(&r[fi])).sum::<f64>() / nruns
            };
            let updates = n_train as f64;
            MetricSeries {
                label: f.label(),
                variant: f.variant,
                mse_db,
                steady_state_db,
                run_steady_db: runs.iter().map(|r| r[fi].steady_db).collect(),
                wall_per_iter: per(&|r| r.update_time.as_secs_f64()) / updates,
                theta_per_iter: per(&|r| r.theta_time.as_secs_f64()) / (updates - 1.0).max(1.0),
                h_mean: per(&|r| r.h_mean),
                singular_steps: runs.iter().map(|r| r[fi].singular_steps).sum(),
            }
        })
        .collect();
    Ok(ExperimentResult {
        config: cfg.clone(),
        series,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: Scenario,
    pub filter: String,
    pub value: f64,
    pub steady_state_db: f64,
    pub wall_per_iter: f64,
    pub h_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Rows for one scenario and filter, in sweep order.
    pub fn column(&self, scenario: Scenario, filter: &str) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.scenario == scenario && r.filter == filter)
            .collect()
    }
}

/// One experiment per sweep value and scenario, all on the same seeds.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| config_err("sweep", "missing [sweep] section"))?;
    let scenarios = if sw.scenarios.is_empty() {
        vec![cfg.scenario]
    } else {
        sw.scenarios.clone()
    };
    let ds = prepare_dataset(cfg)?;
    let mut rows = Vec::new();
    for &scenario in &scenarios {
        for &value in &sw.values {
            let mut sub = apply_sweep_value(cfg, sw.param, value)?;
            sub.scenario = scenario;
            let res = run_on_dataset(&sub, &ds)?;
            rows.extend(res.series.into_iter().map(|s| SweepRow {
                scenario,
                filter: s.label,
                value,
                steady_state_db: s.steady_state_db,
                wall_per_iter: s.wall_per_iter,
                h_mean: s.h_mean,
            }));
        }
    }
    Ok(SweepTable {
        param: sw.param,
        rows,
    })
}

/// Timing summary for one filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub label: String,
    pub variant: Variant,
    pub window_len: usize,
    pub h_mean: f64,
    /// Median over repetitions.
    pub wall_per_iter: f64,
    pub theta_per_iter: f64,
    /// Operation counts at the observed codebook size; absent for KRLS.
    pub cost: Option<ThetaCost>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs the experiment `reps` times and reports median timings per filter.
pub fn bench(cfg: &ExperimentConfig, reps: usize) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let reps = reps.max(1);
    let ds = prepare_dataset(cfg)?;
    let results: Vec<ExperimentResult> = (0..reps)
        .map(|_| run_on_dataset(cfg, &ds))
        .collect::<Result<_>>()?;
    cfg.filters
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            let pick = |g: fn(&MetricSeries) -> f64| median(results.iter().map(|r| g(&r.series[fi])).collect());
            let h_mean = results[0].series[fi].h_mean;
            let l = f.criterion.window_len as u64;
            let cost = match f.variant {
                Variant::Krls => None,
                v => Some(theta_cost(l, (h_mean.round() as u64).max(1), v)?),
            };
            Ok(BenchRow {
                label: f.label(),
                variant: f.variant,
                window_len: f.criterion.window_len,
                h_mean,
                wall_per_iter: pick(|s| s.wall_per_iter),
                theta_per_iter: pick(|s| s.theta_per_iter),
                cost,
            })
        })
        .collect()
}

/// Anything [`emit_results`] can write.
#[derive(Debug, Clone)]
pub enum Results {
    Experiment(ExperimentResult),
    Sweep {
        config: ExperimentConfig,
        table: SweepTable,
    },
    Bench {
        config: ExperimentConfig,
        rows: Vec<BenchRow>,
    },
}

/// File-name-safe version of a filter label.
pub fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn write_manifest(dir: &Path, cfg: &ExperimentConfig, kind: &str) -> Result<()> {
    let toml_err = |e: &dyn fmt::Display| KafError::Config(e.to_string());
    let config: toml::Value = toml::Value::try_from(cfg).map_err(|e| toml_err(&e))?;
    let mut root = toml::map::Map::new();
    root.insert("kind".into(), kind.into());
    root.insert("version".into(), VERSION.into());
    root.insert("master_seed".into(), toml::Value::Integer(cfg.master_seed as i64));
    root.insert("config".into(), config);
    let text = toml::to_string(&toml::Value::Table(root)).map_err(|e| toml_err(&e))?;
    write_file(&dir.join("manifest.toml"), &text)
}

/// Writes curves, tables and a manifest under `out_dir`; returns the paths.
///
/// Experiment outputs hold no timings, so reruns are byte-identical.
pub fn emit_results(results: &Results, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    match results {
        Results::Experiment(res) => {
            for s in &res.series {
                let mut text = String::from("iteration,mse_db\n");
                for (i, v) in s.mse_db.iter().enumerate() {
                    text.push_str(&format!("{},{}\n", i + 1, v));
                }
                let path = dir.join(format!("curve_{}.csv", file_stem(&s.label)));
                write_file(&path, &text)?;
                written.push(path);
            }
            let mut text = String::from("filter,variant,steady_state_db,h_mean,singular_steps\n");
            for s in &res.series {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.label, s.variant, s.steady_state_db, s.h_mean, s.singular_steps
                ));
            }
            let path = dir.join("summary.csv");
            write_file(&path, &text)?;
            written.push(path);

            let mut text = String::from("run");
            for s in &res.series {
                text.push(',');
                text.push_str(&s.label);
            }
            text.push('\n');
            for run in 0..res.config.mc_runs {
                text.push_str(&run.to_string());
                for s in &res.series {
                    text.push_str(&format!(",{}", s.run_steady_db[run]));
                }
                text.push('\n');
            }
            let path = dir.join("run_steady_db.csv");
            write_file(&path, &text)?;
            written.push(path);
            write_manifest(dir, &res.config, "run")?;
        }
        Results::Sweep { config, table } => {
            let mut text = format!("scenario,filter,{},steady_state_db,wall_per_iter,h_mean\n", table.param);
            for r in &table.rows {
                text.push_str(&format!(
                    "{},{},{},{},{:e},{}\n",
                    r.scenario, r.filter, r.value, r.steady_state_db, r.wall_per_iter, r.h_mean
                ));
            }
            let path = dir.join(format!("sweep_{}.csv", table.param));
            write_file(&path, &text)?;
            written.push(path);
            write_manifest(dir, config, "sweep")?;
        }
        Results::Bench { config, rows } => {
            let mut text = String::from(
                "filter,variant,L,h_mean,wall_per_iter,theta_per_iter,theta_mults,theta_adds,theta_exps\n",
            );
            for r in rows {
                let (m, a, e) = r
                    .cost
                    .map(|c| (c.mults.to_string(), c.adds.to_string(), c.exps.to_string()))
                    .unwrap_or_default();
                text.push_str(&format!(
                    "{},{},{},{},{:e},{:e},{},{},{}\n",
                    r.label, r.variant, r.window_len, r.h_mean, r.wall_per_iter, r.theta_per_iter, m, a, e
                ));
            }
            let path = dir.join("bench.csv");
            write_file(&path, &text)?;
            written.push(path);
            write_manifest(dir, config, "bench")?;
        }
    }
    written.push(dir.join("manifest.toml"));
    Ok(written)
}
