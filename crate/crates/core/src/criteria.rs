//! Information-potential estimators and the per-sample weights that drive the
//! recursive filters.
//!
//! The entropy order is fixed at 2, so every estimator here is a quadratic
//! information potential built from pairwise generalized Gaussian terms.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{KafError, Result};
use crate::math::{gaussian_density, GGDParams};
use crate::quantizer::Codebook;

/// Distance floor used when `|e − c|^(α−2)` would otherwise blow up.
pub const SINGULAR_EPS: f64 = 1e-8;

/// How the forgetting factor enters the per-codeword weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Forgetting {
    /// `λ^(L+h)`: time index plus codeword position.
    #[default]
    Literal,
    /// `λ^L`: time index only.
    TimeOnly,
}

/// Which error kernel the weights are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Generalized Gaussian `G_{α,β}` with the `|e − c|^(α−2)` factor.
    Gmee,
    /// Gaussian `G_σ`.
    Mee,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CriterionParams {
    pub ggd: GGDParams,
    pub mee_sigma: f64,
    pub lambda: f64,
    pub window_len: usize,
    pub forgetting: Forgetting,
}

impl Default for CriterionParams {
    /// α = 2, β = √2 (the Gaussian of unit bandwidth), λ = 1, L = 50.
    fn default() -> Self {
        Self {
            ggd: GGDParams::gaussian(1.0).expect("unit Gaussian parameters are valid"),
            mee_sigma: 1.0,
            lambda: 1.0,
            window_len: 50,
            forgetting: Forgetting::Literal,
        }
    }
}

impl CriterionParams {
    pub fn new(ggd: GGDParams, mee_sigma: f64, lambda: f64, window_len: usize) -> Result<Self> {
        let cp = Self {
            ggd,
            mee_sigma,
            lambda,
            window_len,
            forgetting: Forgetting::Literal,
        };
        cp.validate()?;
        Ok(cp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(KafError::InvalidParameter {
                name: "lambda",
                reason: format!("must lie in (0, 1], got {}", self.lambda),
            });
        }
        if self.window_len == 0 {
            return Err(KafError::InvalidParameter {
                name: "window_len",
                reason: "must be >= 1".into(),
            });
        }
        if !(self.mee_sigma > 0.0) || !self.mee_sigma.is_finite() {
            return Err(KafError::InvalidParameter {
                name: "mee_sigma",
                reason: format!("must be > 0, got {}", self.mee_sigma),
            });
        }
        Ok(())
    }
}

/// A non-negative information potential value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct IpValue(f64);

impl IpValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_counts(errors: &[f64], cb: &Codebook) -> Result<()> {
    if errors.is_empty() {
        return Err(KafError::Empty("error list"));
    }
    let counted = cb.total();
    if counted != errors.len() {
        return Err(KafError::CountMismatch {
            counted,
            expected: errors.len(),
        });
    }
    Ok(())
}

/// `(1/L²) Σ_i Σ_j G(e_i − e_j)` over the full error list.
pub fn empirical_ip(errors: &[f64], p: &GGDParams) -> Result<IpValue> {
    if errors.is_empty() {
        return Err(KafError::Empty("error list"));
    }
    let l = errors.len() as f64;
    let mut sum = 0.0;
    for &ei in errors {
        for &ej in errors {
            sum += p.density(ei - ej);
        }
    }
    Ok(IpValue(sum / (l * l)))
}

fn quantized_sum(errors: &[f64], cb: &Codebook, g: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for &ei in errors {
        for (c, n) in cb.iter() {
            sum += n as f64 * g(ei - c);
        }
    }
    sum
}

/// `(1/L²) Σ_i Σ_h H_h G(e_i − c_h)`.
pub fn quantized_ip(errors: &[f64], cb: &Codebook, p: &GGDParams) -> Result<IpValue> {
    check_counts(errors, cb)?;
    let l = errors.len() as f64;
    Ok(IpValue(quantized_sum(errors, cb, |x| p.density(x)) / (l * l)))
}

/// Quantized IP with the Gaussian `G_σ`.
pub fn qmee_ip(errors: &[f64], cb: &Codebook, sigma: f64) -> Result<IpValue> {
    check_counts(errors, cb)?;
    let l = errors.len() as f64;
    Ok(IpValue(
        quantized_sum(errors, cb, |x| gaussian_density(x, sigma)) / (l * l),
    ))
}

/// Parzen estimate `(1/L) Σ_i G(x − e_i)`.
pub fn parzen_density(x: f64, errors: &[f64], p: &GGDParams) -> f64 {
    errors.iter().map(|&e| p.density(x - e)).sum::<f64>() / errors.len() as f64
}

/// First-order large-β expansion of [`quantized_ip`].
pub fn large_beta_ip_approx(errors: &[f64], cb: &Codebook, p: &GGDParams) -> f64 {
    let l = errors.len() as f64;
    let alpha = p.alpha();
    let moment: f64 = errors
        .iter()
        .flat_map(|&e| cb.iter().map(move |(c, n)| n as f64 * crate::math::abs_pow(e - c, alpha)))
        .sum::<f64>()
        / (l * l);
    // α/(2|β|^(α+1)Γ(1/α)) = peak / β^α
    p.peak() - p.peak() / p.beta_pow_alpha() * moment
}

/// Aggregated codeword weights for one error sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaTerms {
    /// θ = Σ_h κ_h.
    pub theta: f64,
    /// Σ_h κ_h c_h.
    pub weighted_codewords: f64,
    /// Some distance was clamped at [`SINGULAR_EPS`] with α < 2.
    pub singular: bool,
}

impl ThetaTerms {
    /// `Σ_h κ_h (d − c_h) / θ`.
    pub fn effective_desired(&self, d: f64) -> f64 {
        d - self.weighted_codewords / self.theta
    }
}

/// Per-codeword weights `κ_h` and their sums for error `e` at time `time_index`.
pub fn theta_terms(
    e: f64,
    cb: &Codebook,
    cp: &CriterionParams,
    time_index: usize,
    criterion: Criterion,
) -> Result<ThetaTerms> {
    if cb.is_empty() {
        return Err(KafError::Empty("codebook"));
    }
    let lambda = cp.lambda;
    let mut decay = if lambda == 1.0 {
        1.0
    } else {
        lambda.powi(time_index as i32)
    };
    let step = match cp.forgetting {
        Forgetting::Literal => lambda,
        Forgetting::TimeOnly => 1.0,
    };

    let mut theta = 0.0;
    let mut weighted = 0.0;
    let mut singular = false;
    match criterion {
        Criterion::Gmee => {
            let ggd = &cp.ggd;
            let alpha = ggd.alpha();
            let inv_bpa = 1.0 / ggd.beta_pow_alpha();
            let peak = ggd.peak();
            for (c, n) in cb.iter() {
                decay *= step;
                let dist = (e - c).abs();
                let k = if alpha == 2.0 {
                    peak * (-dist * dist * inv_bpa).exp()
                } else {
                    let g = if dist == 0.0 {
                        peak
                    } else {
                        peak * (-(alpha * dist.ln()).exp() * inv_bpa).exp()
                    };
                    let clamped = if dist < SINGULAR_EPS {
                        if alpha < 2.0 {
                            singular = true;
                        }
                        SINGULAR_EPS
                    } else {
                        dist
                    };
                    g * ((alpha - 2.0) * clamped.ln()).exp()
                };
                let kappa = decay * n as f64 * k;
                theta += kappa;
                weighted += kappa * c;
            }
        }
        Criterion::Mee => {
            let sigma = cp.mee_sigma;
            for (c, n) in cb.iter() {
                decay *= step;
                let kappa = decay * n as f64 * gaussian_density(e - c, sigma);
                theta += kappa;
                weighted += kappa * c;
            }
        }
    }
    Ok(ThetaTerms {
        theta,
        weighted_codewords: weighted,
        singular,
    })
}

/// θ weight and singularity flag for error `e`.
pub fn theta_weight(
    e: f64,
    cb: &Codebook,
    cp: &CriterionParams,
    time_index: usize,
    criterion: Criterion,
) -> Result<(f64, bool)> {
    let t = theta_terms(e, cb, cp, time_index, criterion)?;
    Ok((t.theta, t.singular))
}

/// κ-weighted effective desired value `Σ_h κ_h (d − c_h) / θ`.
pub fn effective_desired(
    d: f64,
    e: f64,
    cb: &Codebook,
    cp: &CriterionParams,
    time_index: usize,
    criterion: Criterion,
) -> Result<f64> {
    let t = theta_terms(e, cb, cp, time_index, criterion)?;
    if !(t.theta > 0.0) {
        return Err(KafError::Domain(format!("theta = {} is not positive", t.theta)));
    }
    Ok(t.effective_desired(d))
}

/// Fixed point of the batch QGMEE normal equations for a linear model.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub weights: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<Vec<f64>>,
    /// `‖M − N w‖` at the returned weights.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub ridge: f64,
}

fn normal_equations(
    inputs: &[Vec<f64>],
    desired: &[f64],
    w: &DVector<f64>,
    cb: &Codebook,
    p: &GGDParams,
) -> (DMatrix<f64>, DVector<f64>) {
    let dim = w.len();
    let mut n = DMatrix::<f64>::zeros(dim, dim);
    let mut m = DVector::<f64>::zeros(dim);
    let alpha = p.alpha();
    for (u, &d) in inputs.iter().zip(desired) {
        let u = DVector::from_column_slice(u);
        let e = d - w.dot(&u);
        for (c, count) in cb.iter() {
            let dist = (e - c).abs().max(SINGULAR_EPS);
            let k = count as f64 * p.density(e - c) * crate::math::abs_pow(dist, alpha - 2.0);
            m.axpy(k * (d - c), &u, 1.0);
            n.ger(k, &u, &u, 1.0);
        }
    }
    (n, m)
}

fn solve_with_ridge(n: &DMatrix<f64>, m: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let sv = n.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let mut ridge = 0.0;
    let mut a = n.clone();
    if !(smin > 0.0) || smax / smin > 1e12 {
        ridge = smax.max(1e-300) * 1e-12;
        for i in 0..a.nrows() {
            a[(i, i)] += ridge;
        }
    }
    a.lu()
        .solve(m)
        .map(|x| (x, ridge))
        .ok_or_else(|| KafError::Singular("N_QGMEE cannot be inverted".into()))
}

/// Solves `w = N(w)⁻¹ M(w)` by fixed-point iteration from the least-squares start.
///
/// The codebook is held fixed; the errors `e_i = d_i − wᵀu_i` are recomputed
/// each sweep.
pub fn batch_qgmee_fixed_point(
    inputs: &[Vec<f64>],
    desired: &[f64],
    cb: &Codebook,
    p: &GGDParams,
) -> Result<FixedPoint> {
    if inputs.is_empty() {
        return Err(KafError::Empty("inputs"));
    }
    if inputs.len() != desired.len() {
        return Err(KafError::DimensionMismatch {
            expected: inputs.len(),
            got: desired.len(),
        });
    }
    if cb.is_empty() {
        return Err(KafError::Empty("codebook"));
    }
    let dim = inputs[0].len();
    if let Some(bad) = inputs.iter().find(|u| u.len() != dim) {
        return Err(KafError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }

    // least-squares start
    let x = DMatrix::from_fn(inputs.len(), dim, |i, j| inputs[i][j]);
    let y = DVector::from_column_slice(desired);
    let (mut w, _) = solve_with_ridge(&(x.transpose() * &x), &(x.transpose() * &y))?;

    const MAX_ITER: usize = 1000;
    let mut iterations = 0;
    let mut ridge = 0.0;
    for it in 1..=MAX_ITER {
        iterations = it;
        let (n, m) = normal_equations(inputs, desired, &w, cb, p);
        let (next, r) = solve_with_ridge(&n, &m)?;
        ridge = r;
        let change = (&next - &w).norm();
        w = next;
        if change <= 1e-15 * w.norm().max(1.0) {
            break;
        }
    }
    let (n, m) = normal_equations(inputs, desired, &w, cb, p);
    let gradient_norm = (&m - &n * &w).norm();
    Ok(FixedPoint {
        weights: w.iter().copied().collect(),
        m: m.iter().copied().collect(),
        n: (0..dim).map(|i| n.row(i).iter().copied().collect()).collect(),
        gradient_norm,
        iterations,
        ridge,
    })
}
