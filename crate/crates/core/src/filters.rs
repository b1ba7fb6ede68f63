//! Kernel recursive filters: KRLS and the (quantized) kernel recursive
//! MEE/GMEE family.
//!
//! Every filter keeps the full dictionary of past inputs, the coefficient
//! vector `A` and the inverse `Q = (K + s·Λ⁻¹)⁻¹` of the regularized Gram
//! matrix, where `K` is the kernel Gram matrix, `Λ` holds the per-sample
//! weights θ and `s` is the variant's ridge scale. One update grows all three
//! by one through the block-inverse rule:
//!
//! ```text
//! z = Q h,   r = κ(u,u) + s/θ − zᵀh
//! Q ← [[Q + z zᵀ/r, −z/r], [−zᵀ/r, 1/r]]
//! A ← [A − z (d̃ − y)/r ; (d̃ − y)/r]
//! ```
//!
//! with `h` the kernel vector of the new input against the dictionary, `y`
//! the prior prediction and `d̃` the κ-weighted effective desired value.
//! KRLS is the special case θ ≡ 1, `d̃ = d`.

use std::collections::VecDeque;
use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::criteria::{theta_terms, Criterion, CriterionParams, ThetaTerms};
use crate::error::{KafError, Result};
use crate::math::KernelParams;
use crate::quantizer::{build_codebook, Codebook};

/// Below this `r` is treated as a breakdown of the growing inverse.
pub const R_FLOOR: f64 = 1e-12;
/// Jitter added once to `r` before giving up.
pub const R_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variant {
    Krls,
    Krmee,
    Krgmee,
    Qkrmee,
    Qkrgmee,
}

impl Variant {
    pub fn criterion(self) -> Option<Criterion> {
        match self {
            Variant::Krls => None,
            Variant::Krmee | Variant::Qkrmee => Some(Criterion::Mee),
            Variant::Krgmee | Variant::Qkrgmee => Some(Criterion::Gmee),
        }
    }

    /// The unquantized variants run with a zero threshold whatever is configured.
    pub fn is_unquantized(self) -> bool {
        matches!(self, Variant::Krmee | Variant::Krgmee)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Krls => "KRLS",
            Variant::Krmee => "KRMEE",
            Variant::Krgmee => "KRGMEE",
            Variant::Qkrmee => "QKRMEE",
            Variant::Qkrgmee => "QKRGMEE",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = KafError;

    /// Case-insensitive variant name.
    fn from_str(s: &str) -> Result<Self> {
        [
            Variant::Krls,
            Variant::Krmee,
            Variant::Krgmee,
            Variant::Qkrmee,
            Variant::Qkrgmee,
        ]
        .into_iter()
        .find(|v| v.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| KafError::InvalidParameter {
            name: "variant",
            reason: format!("unknown variant `{s}`; expected one of KRLS, KRMEE, KRGMEE, QKRMEE, QKRGMEE"),
        })
    }
}

/// How the sliding-window codebook is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookMode {
    /// Insert the newest error, evict the oldest.
    #[default]
    Incremental,
    /// Rebuild from the window contents every step.
    Rebuild,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub variant: Variant,
    #[serde(default)]
    pub kernel: KernelParams,
    #[serde(default)]
    pub criterion: CriterionParams,
    #[serde(default)]
    pub gamma: f64,
    /// Regularization ϑ₂.
    #[serde(default = "default_reg")]
    pub reg: f64,
    #[serde(default)]
    pub codebook_mode: CodebookMode,
    /// Display label; defaults to the variant name.
    #[serde(default)]
    pub name: Option<String>,
}

fn default_reg() -> f64 {
    1.0
}

impl FilterConfig {
    pub fn new(variant: Variant, kernel: KernelParams, criterion: CriterionParams) -> Self {
        Self {
            variant,
            kernel,
            criterion,
            gamma: 0.0,
            reg: 1.0,
            codebook_mode: CodebookMode::Incremental,
            name: None,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_reg(mut self, reg: f64) -> Self {
        self.reg = reg;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.variant.name().to_string())
    }

    /// Quantization threshold actually used.
    pub fn effective_gamma(&self) -> f64 {
        if self.variant.is_unquantized() {
            0.0
        } else {
            self.gamma
        }
    }

    /// Multiplier `s` of θ⁻¹ in `r`: `β^α ϑ₂`, `σ² ϑ₂` or `ϑ₂`.
    pub fn ridge_scale(&self) -> f64 {
        match self.variant.criterion() {
            None => self.reg,
            Some(Criterion::Gmee) => self.criterion.ggd.beta_pow_alpha() * self.reg,
            Some(Criterion::Mee) => self.criterion.mee_sigma * self.criterion.mee_sigma * self.reg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.criterion.validate()?;
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(KafError::InvalidParameter {
                name: "gamma",
                reason: format!("must be finite and >= 0, got {}", self.gamma),
            });
        }
        if !(self.reg > 0.0) || !self.reg.is_finite() {
            return Err(KafError::InvalidParameter {
                name: "reg",
                reason: format!("must be > 0, got {}", self.reg),
            });
        }
        Ok(())
    }
}

/// Diagnostics from one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateReport {
    pub prediction: f64,
    pub error: f64,
    pub theta: f64,
    pub effective_desired: f64,
    pub r: f64,
    /// Codebook size when θ was evaluated (0 for KRLS).
    pub codebook_len: usize,
    pub singular: bool,
    pub jittered: bool,
}

/// Running counters over the life of a filter.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FilterStats {
    pub updates: usize,
    /// Time spent forming θ and d̃.
    pub theta_time: Duration,
    /// Σ of codebook sizes over updates.
    pub codebook_len_sum: usize,
    pub singular_steps: usize,
}

impl FilterStats {
    pub fn mean_codebook_len(&self) -> f64 {
        if self.updates == 0 {
            0.0
        } else {
            self.codebook_len_sum as f64 / self.updates as f64
        }
    }
}

/// State of one running filter.
#[derive(Debug, Clone)]
pub struct KernelFilter {
    cfg: FilterConfig,
    dictionary: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
    q: Vec<Vec<f64>>,
    window: VecDeque<(f64, usize)>,
    codebook: Codebook,
    step: usize,
    stats: FilterStats,
    // scratch for z = Q h
    z: Vec<f64>,
    h: Vec<f64>,
}

impl KernelFilter {
    /// Starts a filter from its first sample:
    /// `Q₁ = [s + κ(u₁,u₁)]⁻¹`, `A₁ = Q₁ d₁`.
    ///
    /// The first a-priori error is `d₁` (an empty filter predicts 0) and it
    /// enters the error window like every later error.
    pub fn init(u1: &[f64], d1: f64, cfg: FilterConfig) -> Result<Self> {
        cfg.validate()?;
        if u1.is_empty() {
            return Err(KafError::Empty("input vector"));
        }
        let q1 = 1.0 / (cfg.ridge_scale() + cfg.kernel.self_similarity());
        let mut codebook = Codebook::new(cfg.effective_gamma())?;
        let mut window = VecDeque::with_capacity(cfg.criterion.window_len + 1);
        if cfg.variant.criterion().is_some() {
            let idx = codebook.insert(d1);
            window.push_back((d1, idx));
        }
        Ok(Self {
            cfg,
            dictionary: vec![u1.to_vec()],
            coeffs: vec![q1 * d1],
            q: vec![vec![q1]],
            window,
            codebook,
            step: 1,
            stats: FilterStats::default(),
            z: Vec::new(),
            h: Vec::new(),
        })
    }

    pub fn config(&self) -> &FilterConfig {
        &self.cfg
    }

    pub fn dictionary(&self) -> &[Vec<f64>] {
        &self.dictionary
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Row-major view of `Q`.
    pub fn q_rows(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    /// Raw errors currently in the Parzen window, oldest first.
    pub fn window_errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.window.iter().map(|&(e, _)| e)
    }

    /// Number of samples absorbed so far.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn stats(&self) -> &FilterStats {
        &self.stats
    }

    pub fn input_dim(&self) -> usize {
        self.dictionary[0].len()
    }

    /// `Σ_j A_j κ(u, u_j)`.
    pub fn predict(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.input_dim() {
            return Err(KafError::DimensionMismatch {
                expected: self.input_dim(),
                got: u.len(),
            });
        }
        Ok(self
            .dictionary
            .iter()
            .zip(&self.coeffs)
            .map(|(c, a)| a * self.cfg.kernel.eval(u, c))
            .sum())
    }

    fn push_error(&mut self, e: f64) -> Result<()> {
        let window_len = self.cfg.criterion.window_len;
        match self.cfg.codebook_mode {
            CodebookMode::Incremental => {
                let idx = self.codebook.insert(e);
                self.window.push_back((e, idx));
                if self.window.len() > window_len {
                    let (_, old) = self.window.pop_front().expect("window is non-empty");
                    if self.codebook.remove_shifting(old)? {
                        for entry in self.window.iter_mut() {
                            if entry.1 > old {
                                entry.1 -= 1;
                            }
                        }
                    }
                }
            }
            CodebookMode::Rebuild => {
                self.window.push_back((e, 0));
                if self.window.len() > window_len {
                    self.window.pop_front();
                }
                let errs: Vec<f64> = self.window.iter().map(|&(e, _)| e).collect();
                self.codebook = build_codebook(&errs, self.cfg.effective_gamma())?;
            }
        }
        Ok(())
    }

    /// Absorbs one sample, growing the dictionary, `A` and `Q` by one.
    pub fn update(&mut self, u: &[f64], d: f64) -> Result<UpdateReport> {
        let n = self.dictionary.len();
        if u.len() != self.input_dim() {
            return Err(KafError::DimensionMismatch {
                expected: self.input_dim(),
                got: u.len(),
            });
        }
        let step = self.step + 1;
        let kernel = self.cfg.kernel;

        self.h.clear();
        self.h
            .extend(self.dictionary.iter().map(|c| kernel.eval(u, c)));
        let y: f64 = self.h.iter().zip(&self.coeffs).map(|(h, a)| h * a).sum();
        let e = d - y;

        let (terms, codebook_len) = match self.cfg.variant.criterion() {
            None => (
                ThetaTerms {
                    theta: 1.0,
                    weighted_codewords: 0.0,
                    singular: false,
                },
                0,
            ),
            Some(criterion) => {
                self.push_error(e)?;
                let start = Instant::now();
                let t = theta_terms(e, &self.codebook, &self.cfg.criterion, step, criterion)?;
                self.stats.theta_time += start.elapsed();
                (t, self.codebook.len())
            }
        };
        if !(terms.theta > 0.0) || !terms.theta.is_finite() {
            return Err(KafError::Breakdown {
                step,
                detail: format!("theta = {} is not a positive finite weight", terms.theta),
            });
        }
        let d_eff = if self.cfg.variant.criterion().is_some() {
            terms.effective_desired(d)
        } else {
            d
        };

        // z = Q h, using the symmetry of Q so the inner loop is an axpy
        self.z.clear();
        self.z.resize(n, 0.0);
        for (row, &hj) in self.q.iter().zip(&self.h) {
            for (zi, &qji) in self.z.iter_mut().zip(row) {
                *zi += hj * qji;
            }
        }
        let zh: f64 = self.z.iter().zip(&self.h).map(|(z, h)| z * h).sum();
        let mut r = kernel.self_similarity() + self.cfg.ridge_scale() / terms.theta - zh;
        let mut jittered = false;
        if !(r >= R_FLOOR) {
            r += R_JITTER;
            jittered = true;
            if !(r >= R_FLOOR) {
                return Err(KafError::Breakdown {
                    step,
                    detail: format!("r = {r:e} after jitter (theta = {:e})", terms.theta),
                });
            }
        }
        let inv_r = 1.0 / r;

        for (row, &zi) in self.q.iter_mut().zip(&self.z) {
            let s = zi * inv_r;
            for (qij, &zj) in row.iter_mut().zip(&self.z) {
                *qij += s * zj;
            }
            row.push(-s);
        }
        let mut last: Vec<f64> = self.z.iter().map(|&zj| -zj * inv_r).collect();
        last.push(inv_r);
        self.q.push(last);

        let innovation = (d_eff - y) * inv_r;
        for (a, &zi) in self.coeffs.iter_mut().zip(&self.z) {
            *a -= zi * innovation;
        }
        self.coeffs.push(innovation);
        self.dictionary.push(u.to_vec());
        self.step = step;

        self.stats.updates += 1;
        self.stats.codebook_len_sum += codebook_len;
        if terms.singular {
            self.stats.singular_steps += 1;
        }

        Ok(UpdateReport {
            prediction: y,
            error: e,
            theta: terms.theta,
            effective_desired: d_eff,
            r,
            codebook_len,
            singular: terms.singular,
            jittered,
        })
    }

    pub fn snapshot(&self) -> FilterSnapshot {
        FilterSnapshot {
            config: self.cfg.clone(),
            step: self.step,
            dictionary: self.dictionary.clone(),
            coefficients: self.coeffs.clone(),
            q_dim: self.q.len(),
            q: self.q.iter().flatten().copied().collect(),
            codebook: self.codebook.clone(),
            window: self.window.iter().copied().collect(),
        }
    }

    pub fn from_snapshot(s: FilterSnapshot) -> Result<Self> {
        s.config.validate()?;
        let n = s.dictionary.len();
        if n == 0 || s.coefficients.len() != n || s.q_dim != n || s.q.len() != n * n {
            return Err(KafError::Config(format!(
                "inconsistent snapshot: {} centers, {} coefficients, Q side {} with {} entries",
                n,
                s.coefficients.len(),
                s.q_dim,
                s.q.len()
            )));
        }
        Ok(Self {
            cfg: s.config,
            q: s.q.chunks(n).map(<[f64]>::to_vec).collect(),
            dictionary: s.dictionary,
            coeffs: s.coefficients,
            window: s.window.into_iter().collect(),
            codebook: s.codebook,
            step: s.step,
            stats: FilterStats::default(),
            z: Vec::new(),
            h: Vec::new(),
        })
    }
}

/// Serializable filter state.
///
/// Written as JSON: `config`, `step`, `dictionary` (one array per center),
/// `coefficients`, `q_dim` and `q` (row-major, `q_dim²` entries), `codebook`
/// (`codewords`, `counts`, `gamma`) and `window` (`[error, codeword_index]`
/// pairs, oldest first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSnapshot {
    pub config: FilterConfig,
    pub step: usize,
    pub dictionary: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub q_dim: usize,
    pub q: Vec<f64>,
    pub codebook: Codebook,
    pub window: Vec<(f64, usize)>,
}

impl FilterSnapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| KafError::Config(format!("snapshot: {e}")))
    }
}

/// Functional wrappers mirroring the operation list.
pub fn init(u1: &[f64], d1: f64, cfg: FilterConfig) -> Result<KernelFilter> {
    KernelFilter::init(u1, d1, cfg)
}

pub fn predict(st: &KernelFilter, u: &[f64]) -> Result<f64> {
    st.predict(u)
}

pub fn update(mut st: KernelFilter, u: &[f64], d: f64) -> Result<(KernelFilter, UpdateReport)> {
    let rep = st.update(u, d)?;
    Ok((st, rep))
}

/// Closed-form coefficients `A = (K + s·Λ⁻¹)⁻¹ d̃`.
///
/// `thetas` is the diagonal of Λ and `desired` the (effective) desired
/// values, one per input.
pub fn batch_solve(
    inputs: &[Vec<f64>],
    desired: &[f64],
    thetas: &[f64],
    cfg: &FilterConfig,
) -> Result<Vec<f64>> {
    let n = inputs.len();
    if n == 0 {
        return Err(KafError::Empty("inputs"));
    }
    if desired.len() != n || thetas.len() != n {
        return Err(KafError::DimensionMismatch {
            expected: n,
            got: if desired.len() != n {
                desired.len()
            } else {
                thetas.len()
            },
        });
    }
    if let Some(bad) = thetas.iter().find(|&&t| !(t > 0.0)) {
        return Err(KafError::InvalidParameter {
            name: "thetas",
            reason: format!("Λ entries must be > 0, got {bad}"),
        });
    }
    let scale = cfg.ridge_scale();
    let mut m = DMatrix::from_fn(n, n, |i, j| cfg.kernel.eval(&inputs[i], &inputs[j]));
    for i in 0..n {
        m[(i, i)] += scale / thetas[i];
    }
    m.lu()
        .solve(&DVector::from_column_slice(desired))
        .map(|a| a.iter().copied().collect())
        .ok_or_else(|| KafError::Singular("regularized Gram matrix".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::GGDParams;
    use std::f64::consts::PI;

    fn crit(alpha: f64, beta: f64, sigma: f64, window: usize) -> CriterionParams {
        CriterionParams::new(GGDParams::new(alpha, beta).unwrap(), sigma, 1.0, window).unwrap()
    }

    fn cfg(variant: Variant) -> FilterConfig {
        FilterConfig::new(variant, KernelParams::new(1.0).unwrap(), crit(2.0, 1.0, 1.0, 10))
    }

    #[test]
    fn init_example() {
        let f = KernelFilter::init(&[0.2, 0.4], 1.0, cfg(Variant::Qkrgmee)).unwrap();
        let expected = 1.0 / (1.0 + 1.0 / (2.0 * PI).sqrt());
        assert!((f.q_rows()[0][0] - expected).abs() < 1e-15);
        assert!((expected - 0.7148258).abs() < 1e-7);
        assert!((f.coefficients()[0] - expected).abs() < 1e-15);
        let p = f.predict(&[0.2, 0.4]).unwrap();
        assert!((p - expected / (2.0 * PI).sqrt()).abs() < 1e-15);

        let zero = KernelFilter::init(&[0.2, 0.4], 0.0, cfg(Variant::Qkrgmee)).unwrap();
        assert_eq!(zero.coefficients(), &[0.0]);
    }

    #[test]
    fn init_krls_matches_matched_ridge() {
        // β^α ϑ₂ = 1·1 with α = 2, β = 1 equals the KRLS ridge ϑ₂ = 1
        let a = KernelFilter::init(&[1.0], 0.3, cfg(Variant::Krls)).unwrap();
        let b = KernelFilter::init(&[1.0], 0.3, cfg(Variant::Qkrgmee)).unwrap();
        assert_eq!(a.q_rows(), b.q_rows());
    }

    #[test]
    fn predict_examples() {
        let mut f = KernelFilter::init(&[0.0], 1.0, cfg(Variant::Krls)).unwrap();
        f.update(&[1.0], -0.5).unwrap();
        let a = f.coefficients().to_vec();
        let u = [0.3];
        let k = KernelParams::new(1.0).unwrap();
        let expected = a[0] * k.eval(&u, &[0.0]) + a[1] * k.eval(&u, &[1.0]);
        assert!((f.predict(&u).unwrap() - expected).abs() < 1e-14);
        assert!(f.predict(&[0.3, 0.1]).is_err());

        let z = KernelFilter::init(&[0.0], 0.0, cfg(Variant::Krls)).unwrap();
        assert_eq!(z.predict(&[5.0]).unwrap(), 0.0);
    }

    #[test]
    fn two_step_hand_trace() {
        let c = cfg(Variant::Qkrgmee).with_gamma(0.1);
        let (u1, d1, u2, d2) = ([0.1, -0.2], 0.7, [0.4, 0.3], -0.2);
        let mut f = KernelFilter::init(&u1, d1, c.clone()).unwrap();
        let q1 = f.q_rows()[0][0];
        let rep = f.update(&u2, d2).unwrap();

        let k = c.kernel;
        let h = k.eval(&u1, &u2);
        let corner = k.self_similarity() + c.ridge_scale() / rep.theta;
        let a = 1.0 / q1;
        let det = a * corner - h * h;
        let inv = [[corner / det, -h / det], [-h / det, a / det]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((f.q_rows()[i][j] - inv[i][j]).abs() <= 1e-12 * inv[i][j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn growth_and_symmetry() {
        let mut f = KernelFilter::init(&[0.0, 0.0], 0.5, cfg(Variant::Qkrmee).with_gamma(0.05)).unwrap();
        for k in 1..40 {
            let t = k as f64 * 0.3;
            f.update(&[t.sin(), t.cos()], (2.0 * t).sin()).unwrap();
            let n = k + 1;
            assert_eq!(f.dictionary().len(), n);
            assert_eq!(f.coefficients().len(), n);
            assert_eq!(f.q_rows().len(), n);
            assert!(f.q_rows().iter().all(|r| r.len() == n));
            assert!(f.codebook().total() <= 10);
            assert_eq!(f.codebook().total(), f.window_errors().count());
            let q = f.q_rows();
            for i in 0..n {
                for j in 0..i {
                    let scale = q[i][j].abs().max(q[j][i].abs()).max(1e-300);
                    assert!((q[i][j] - q[j][i]).abs() <= 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn batch_solve_single_sample_is_init() {
        let c = cfg(Variant::Qkrgmee);
        let f = KernelFilter::init(&[0.3], 0.9, c.clone()).unwrap();
        let a = batch_solve(&[vec![0.3]], &[0.9], &[1.0], &c).unwrap();
        assert!((a[0] - f.coefficients()[0]).abs() < 1e-15);
    }

    #[test]
    fn batch_solve_ridge_limit() {
        let inputs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.4]).collect();
        let d = [0.3, -0.2, 0.8, 0.1, 0.5, -0.6];
        let mut prev_gap = f64::INFINITY;
        for &reg in &[1e2, 1e4, 1e6] {
            let c = cfg(Variant::Krls).with_reg(reg);
            let a = batch_solve(&inputs, &d, &[1.0; 6], &c).unwrap();
            let gap: f64 = a
                .iter()
                .zip(&d)
                .map(|(a, d)| (a * reg - d).abs())
                .fold(0.0, f64::max);
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-5);
        assert!(batch_solve(&inputs, &d, &[0.0; 6], &cfg(Variant::Krls)).is_err());
    }

    #[test]
    fn unquantized_variants_ignore_gamma() {
        let c = cfg(Variant::Krgmee).with_gamma(0.5);
        assert_eq!(c.effective_gamma(), 0.0);
        let f = KernelFilter::init(&[0.0], 1.0, c).unwrap();
        assert_eq!(f.codebook().gamma(), 0.0);
    }

    #[test]
    fn snapshot_round_trip() {
        let mut f = KernelFilter::init(&[0.0], 0.5, cfg(Variant::Qkrgmee).with_gamma(0.05)).unwrap();
        for k in 1..8 {
            f.update(&[k as f64 * 0.2], (k as f64).sin()).unwrap();
        }
        let text = f.snapshot().to_json();
        let back = KernelFilter::from_snapshot(FilterSnapshot::from_json(&text).unwrap()).unwrap();
        assert_eq!(back.snapshot(), f.snapshot());
        let mut a = f.clone();
        let mut b = back;
        assert_eq!(a.update(&[0.77], 0.1).unwrap(), b.update(&[0.77], 0.1).unwrap());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(KernelFilter::init(&[0.0], 1.0, cfg(Variant::Krls).with_reg(0.0)).is_err());
        assert!(KernelFilter::init(&[0.0], 1.0, cfg(Variant::Qkrmee).with_gamma(-1.0)).is_err());
        assert!(KernelFilter::init(&[], 1.0, cfg(Variant::Krls)).is_err());
    }

    #[test]
    fn duplicate_inputs_with_tiny_ridge_get_jitter() {
        let c = cfg(Variant::Krls).with_reg(1e-300);
        let mut f = KernelFilter::init(&[0.5], 1.0, c).unwrap();
        let rep = f.update(&[0.5], 1.0).unwrap();
        assert!(rep.jittered);
        assert!(rep.r >= R_FLOOR);
    }

    #[test]
    fn non_finite_r_is_a_breakdown() {
        let mut f = KernelFilter::init(&[0.5], 1.0, cfg(Variant::Krls)).unwrap();
        let err = f.update(&[f64::NAN], 1.0).unwrap_err();
        assert!(matches!(err, KafError::Breakdown { step: 2, .. }));
    }
}
