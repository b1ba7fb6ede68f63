//! Test signals: the Mackey–Glass series, additive noise models, time-delay
//! embedding and delimited-text ingestion.

use std::collections::VecDeque;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, KafError, Result};

/// Emitted samples dropped before output starts.
pub const MG_TRANSIENT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MGConfig {
    pub tau: f64,
    pub dt: f64,
    pub subsample: usize,
    pub s0: f64,
    pub n_train: usize,
    pub n_test: usize,
}

impl Default for MGConfig {
    fn default() -> Self {
        Self {
            tau: 30.0,
            dt: 0.1,
            subsample: 6,
            s0: 1.2,
            n_train: 1000,
            n_test: 100,
        }
    }
}

impl MGConfig {
    /// Number of integration steps spanning one delay.
    pub fn delay_steps(&self) -> Result<usize> {
        if !(self.tau > 0.0) || !(self.dt > 0.0) {
            return Err(KafError::InvalidParameter {
                name: "tau/dt",
                reason: format!("both must be > 0, got tau = {}, dt = {}", self.tau, self.dt),
            });
        }
        let ratio = self.tau / self.dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio {
            return Err(KafError::InvalidParameter {
                name: "tau/dt",
                reason: format!("tau/dt must be a positive integer, got {ratio}"),
            });
        }
        Ok(steps as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.delay_steps()?;
        if self.subsample == 0 {
            return Err(KafError::InvalidParameter {
                name: "subsample",
                reason: "must be >= 1".into(),
            });
        }
        Ok(())
    }
}

/// Right-hand side `0.2 s(t−τ)/(1 + s(t−τ)¹⁰) − 0.1 s(t)`.
#[inline]
pub fn mackey_glass_rhs(s: f64, lagged: f64) -> f64 {
    0.2 * lagged / (1.0 + lagged.powi(10)) - 0.1 * s
}

/// `n_train + n_test` samples of the Mackey–Glass series.
pub fn mackey_glass(cfg: &MGConfig) -> Result<Vec<f64>> {
    mackey_glass_len(cfg, cfg.n_train + cfg.n_test)
}

/// `len` samples of the Mackey–Glass series, integrated with RK4.
///
/// The history is constant `s0` for t ≤ 0. Delayed values come from the
/// stored trajectory; the half-step value uses four-point cubic
/// interpolation, one-sided across the kink at t = 0.
pub fn mackey_glass_len(cfg: &MGConfig, len: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    let lag = cfg.delay_steps()?;
    let dt = cfg.dt;
    // history[1] = s(t − τ), history[lag + 1] = s(t)
    let mut history: VecDeque<f64> = std::iter::repeat_n(cfg.s0, lag + 2).collect();
    let mut s = cfg.s0;
    let mut out = Vec::with_capacity(len);
    let total = (MG_TRANSIENT + len) * cfg.subsample;
    for step in 1..=total {
        let lag0 = history[1];
        let lag1 = history[2];
        // grid index of t − τ; the history is constant up to index 0 and kinked there
        let j = step as i64 - 1 - lag as i64;
        let lag_mid = if lag < 3 || j < 0 {
            0.5 * (lag0 + lag1)
        } else if j == 0 {
            (5.0 * lag0 + 15.0 * lag1 - 5.0 * history[3] + history[4]) / 16.0
        } else {
            (9.0 * (lag0 + lag1) - history[0] - history[3]) / 16.0
        };
        let k1 = mackey_glass_rhs(s, lag0);
        let k2 = mackey_glass_rhs(s + 0.5 * dt * k1, lag_mid);
        let k3 = mackey_glass_rhs(s + 0.5 * dt * k2, lag_mid);
        let k4 = mackey_glass_rhs(s + dt * k3, lag1);
        s += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        history.pop_front();
        history.push_back(s);
        if step % cfg.subsample == 0 && step / cfg.subsample > MG_TRANSIENT {
            out.push(s);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedGaussian {
    /// Weight ς of the first component.
    pub varsigma: f64,
    pub a1: f64,
    pub a2: f64,
    /// Variances.
    pub mu1: f64,
    pub mu2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rayleigh {
    pub chi: f64,
    /// Subtract the analytic mean χ√(π/2).
    #[serde(default)]
    pub center: bool,
}

/// Additive noise distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// N(a, mu) with mean `a` and variance `mu`.
    Gaussian { a: f64, mu: f64 },
    MixedGaussian(MixedGaussian),
    Rayleigh(Rayleigh),
    /// `w·R + (1 − w)·M`.
    Mixture {
        weight_rayleigh: f64,
        rayleigh: Rayleigh,
        mixed: MixedGaussian,
    },
}

impl MixedGaussian {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.varsigma) {
            return Err(KafError::InvalidParameter {
                name: "varsigma",
                reason: format!("must lie in [0, 1], got {}", self.varsigma),
            });
        }
        if !(self.mu1 > 0.0 && self.mu2 > 0.0) {
            return Err(KafError::InvalidParameter {
                name: "mu1/mu2",
                reason: "variances must be > 0".into(),
            });
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let pick_first = rng.gen::<f64>() < self.varsigma;
        let z: f64 = rng.sample(StandardNormal);
        if pick_first {
            self.a1 + self.mu1.sqrt() * z
        } else {
            self.a2 + self.mu2.sqrt() * z
        }
    }

    pub fn mean(&self) -> f64 {
        self.varsigma * self.a1 + (1.0 - self.varsigma) * self.a2
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.varsigma * (self.mu1 + self.a1 * self.a1)
            + (1.0 - self.varsigma) * (self.mu2 + self.a2 * self.a2)
            - m * m
    }
}

impl Rayleigh {
    fn validate(&self) -> Result<()> {
        if !(self.chi > 0.0) {
            return Err(KafError::InvalidParameter {
                name: "chi",
                reason: format!("must be > 0, got {}", self.chi),
            });
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let v = self.chi * (-2.0 * (1.0 - u).ln()).sqrt();
        if self.center {
            v - self.analytic_mean()
        } else {
            v
        }
    }

    pub fn analytic_mean(&self) -> f64 {
        self.chi * (std::f64::consts::PI / 2.0).sqrt()
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Gaussian { mu, .. } => {
                if !(*mu > 0.0) {
                    return Err(KafError::InvalidParameter {
                        name: "mu",
                        reason: format!("variance must be > 0, got {mu}"),
                    });
                }
                Ok(())
            }
            NoiseModel::MixedGaussian(m) => m.validate(),
            NoiseModel::Rayleigh(r) => r.validate(),
            NoiseModel::Mixture {
                weight_rayleigh,
                rayleigh,
                mixed,
            } => {
                if !(0.0..=1.0).contains(weight_rayleigh) {
                    return Err(KafError::InvalidParameter {
                        name: "weight_rayleigh",
                        reason: format!("must lie in [0, 1], got {weight_rayleigh}"),
                    });
                }
                rayleigh.validate()?;
                mixed.validate()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseModel::Gaussian { a, mu } => {
                let z: f64 = rng.sample(StandardNormal);
                a + mu.sqrt() * z
            }
            NoiseModel::MixedGaussian(m) => m.sample(rng),
            NoiseModel::Rayleigh(r) => r.sample(rng),
            NoiseModel::Mixture {
                weight_rayleigh,
                rayleigh,
                mixed,
            } => {
                if rng.gen::<f64>() < *weight_rayleigh {
                    rayleigh.sample(rng)
                } else {
                    mixed.sample(rng)
                }
            }
        }
    }
}

/// One draw from `m`.
pub fn sample_noise<R: Rng + ?Sized>(m: &NoiseModel, rng: &mut R) -> f64 {
    m.sample(rng)
}

/// Noise model of experimental scenario `k` (1..=4).
pub fn scenario_noise(k: u8) -> Result<NoiseModel> {
    let impulsive = |varsigma| MixedGaussian {
        varsigma,
        a1: 0.0,
        a2: 0.0,
        mu1: 0.01,
        mu2: 64.0,
    };
    let rayleigh = Rayleigh {
        chi: 3.0,
        center: false,
    };
    match k {
        1 => Ok(NoiseModel::Rayleigh(rayleigh)),
        2 => Ok(NoiseModel::MixedGaussian(impulsive(0.95))),
        3 => Ok(NoiseModel::Gaussian { a: 0.0, mu: 0.01 }),
        4 => Ok(NoiseModel::Mixture {
            weight_rayleigh: 0.2,
            rayleigh,
            mixed: impulsive(0.8),
        }),
        _ => Err(KafError::InvalidParameter {
            name: "scenario",
            reason: format!("must be 1..=4, got {k}"),
        }),
    }
}

/// Independent RNG stream for Monte Carlo run `run` under `master_seed`.
pub fn run_rng(master_seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Embedding {
    pub dim: usize,
    pub horizon: usize,
}

impl Default for Embedding {
    fn default() -> Self {
        Self { dim: 7, horizon: 1 }
    }
}

impl Embedding {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.horizon == 0 {
            return Err(KafError::InvalidParameter {
                name: "embedding",
                reason: format!("dim and horizon must be >= 1, got {self:?}"),
            });
        }
        Ok(())
    }

    /// Series length needed for `pairs` input/target pairs.
    pub fn series_len(&self, pairs: usize) -> usize {
        pairs + self.dim + self.horizon - 1
    }
}

/// Delay vectors `(s_i, …, s_{i+dim−1})` with targets `s_{i+dim−1+horizon}`.
pub fn embed(series: &[f64], emb: &Embedding) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    emb.validate()?;
    let needed = emb.dim + emb.horizon;
    if series.len() <= needed {
        return Err(KafError::SeriesTooShort {
            needed,
            got: series.len(),
        });
    }
    let count = series.len() - needed + 1;
    let inputs = (0..count)
        .map(|i| series[i..i + emb.dim].to_vec())
        .collect();
    let desired = (0..count)
        .map(|i| series[i + emb.dim - 1 + emb.horizon])
        .collect();
    Ok((inputs, desired))
}

/// Column selector for [`load_series`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl From<&str> for Column {
    fn from(s: &str) -> Self {
        Column::Name(s.to_string())
    }
}

/// Reads one numeric column from a comma- or tab-separated file.
///
/// A first row containing any non-numeric cell is taken as the header.
pub fn load_series(path: impl AsRef<Path>, column: &Column) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let first_line = text.lines().next().unwrap_or("");
    let delimiter = if first_line.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records().peekable();

    let header: Option<Vec<String>> = match records.peek() {
        Some(Ok(first)) if first.iter().any(|c| c.parse::<f64>().is_err()) => {
            let h = first.iter().map(str::to_string).collect();
            records.next();
            Some(h)
        }
        _ => None,
    };

    let col = match column {
        Column::Index(i) => *i,
        Column::Name(name) => {
            let names = header.clone().unwrap_or_default();
            names
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| KafError::ColumnNotFound {
                    column: name.clone(),
                    available: names,
                })?
        }
    };

    let mut out = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let row = i + 1 + usize::from(header.is_some());
        let cell = rec.get(col).ok_or_else(|| KafError::ColumnNotFound {
            column: format!("#{col} (row {row})"),
            available: header.clone().unwrap_or_default(),
        })?;
        let v = cell.parse::<f64>().map_err(|_| KafError::BadCell {
            path: path.to_path_buf(),
            row,
            cell: cell.to_string(),
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(KafError::EmptySeries(path.to_path_buf()));
    }
    Ok(out)
}

/// Writes `series` as a two-column CSV (`t,value`).
pub fn write_series(path: impl AsRef<Path>, series: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    let mut buf = String::from("t,value\n");
    for (i, v) in series.iter().enumerate() {
        buf.push_str(&format!("{i},{v}\n"));
    }
    f.write_all(buf.as_bytes()).map_err(io_err(path))
}
