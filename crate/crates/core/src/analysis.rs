//! Checks on the mean and covariance recursions of the weight error, and
//! operation counts for the θ computation.

use std::fmt;
use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{theta_terms, Criterion, CriterionParams, Forgetting};
use crate::error::{KafError, Result};
use crate::filters::Variant;
use crate::math::GGDParams;
use crate::quantizer::Codebook;
use crate::signals::run_rng;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 10_000;
/// Largest side handed to the dense eigensolver when power iteration stalls.
const DENSE_FALLBACK_MAX: usize = 500;
/// Block-to-block increases within this many Monte Carlo standard errors
/// count as flat.
const MC_SLACK: f64 = 3.0;
/// Largest state dimension accepted by the Kronecker solve.
pub const LYAPUNOV_MAX_DIM: usize = 30;

fn check_square(r: &DMatrix<f64>) -> Result<()> {
    if r.nrows() != r.ncols() {
        return Err(KafError::DimensionMismatch {
            expected: r.nrows(),
            got: r.ncols(),
        });
    }
    Ok(())
}

/// Largest eigenvalue magnitude of `r`.
///
/// Power iteration first; if the eigenpair residual does not settle (complex
/// or tied dominant eigenvalues) the dense Schur eigensolver takes over.
pub fn spectral_radius(r: &DMatrix<f64>) -> Result<f64> {
    check_square(r)?;
    let m = r.nrows();
    if m == 0 {
        return Ok(0.0);
    }
    match power_iteration(r) {
        Ok(rho) => Ok(rho),
        Err(_) if m <= DENSE_FALLBACK_MAX => Ok(dense_spectral_radius(r)),
        Err(e) => Err(e),
    }
}

fn power_iteration(r: &DMatrix<f64>) -> Result<f64> {
    let m = r.nrows();
    // fixed, non-symmetric start so that no eigenvector is missed by symmetry
    let mut x = DVector::from_fn(m, |i, _| 1.0 + 0.1 * ((i * 7 + 3) % 11) as f64);
    x /= x.norm();
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        let y = r * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        // Rayleigh quotient; the dominant eigenvalue is real when this converges
        let lambda = x.dot(&y);
        residual = (&y - &x * lambda).norm();
        if residual <= POWER_TOL * lambda.abs().max(f64::MIN_POSITIVE) {
            return Ok(lambda.abs());
        }
        x = y / norm;
    }
    Err(KafError::NonConvergence {
        iterations: POWER_MAX_ITER,
        residual,
    })
}

fn dense_spectral_radius(r: &DMatrix<f64>) -> f64 {
    r.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `T_n = R T_{n−1} Rᵀ + Ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSystem {
    r: DMatrix<f64>,
    xi: DMatrix<f64>,
}

impl LyapunovSystem {
    pub fn new(r: DMatrix<f64>, xi: DMatrix<f64>) -> Result<Self> {
        check_square(&r)?;
        check_square(&xi)?;
        if r.nrows() != xi.nrows() {
            return Err(KafError::DimensionMismatch {
                expected: r.nrows(),
                got: xi.nrows(),
            });
        }
        let asym = (&xi - xi.transpose()).amax();
        if asym > 1e-12 * xi.amax().max(1.0) {
            return Err(KafError::InvalidParameter {
                name: "xi",
                reason: format!("must be symmetric, max asymmetry {asym:e}"),
            });
        }
        Ok(Self { r, xi })
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn xi(&self) -> &DMatrix<f64> {
        &self.xi
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    /// `‖T − R T Rᵀ − Ξ‖_F`.
    pub fn residual(&self, t: &DMatrix<f64>) -> f64 {
        (t - &self.r * t * self.r.transpose() - &self.xi).norm()
    }
}

/// Steady state of the covariance recursion via `vec T = (I − R⊗R)⁻¹ vec Ξ`.
pub fn lyapunov_steady_state(sys: &LyapunovSystem) -> Result<DMatrix<f64>> {
    let m = sys.dim();
    if m > LYAPUNOV_MAX_DIM {
        return Err(KafError::InvalidParameter {
            name: "R",
            reason: format!("dimension {m} exceeds the dense limit {LYAPUNOV_MAX_DIM}"),
        });
    }
    if m == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let rho = spectral_radius(&sys.r)?;
    if rho >= 1.0 {
        return Err(KafError::NoSteadyState(rho));
    }
    // column-major vec: vec(R T Rᵀ) = (R ⊗ R) vec(T)
    let a = DMatrix::identity(m * m, m * m) - sys.r.kronecker(&sys.r);
    let b = DVector::from_column_slice(sys.xi.as_slice());
    let v = a.lu().solve(&b).ok_or_else(|| KafError::Singular("I − R⊗R".into()))?;
    let t = DMatrix::from_column_slice(m, m, v.as_slice());
    Ok((&t + t.transpose()) * 0.5)
}

/// Operation counts for computing θ once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaCost {
    pub mults: u64,
    pub adds: u64,
    pub exps: u64,
}

fn check_positive(name: &'static str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(KafError::InvalidParameter {
            name,
            reason: "must be >= 1".into(),
        });
    }
    Ok(())
}

/// Multiplications, additions and exponentials per θ evaluation.
///
/// The quantized GMEE row counts additions as `4L − 1`, in terms of the
/// window length rather than the codebook size.
pub fn theta_cost(l: u64, h: u64, variant: Variant) -> Result<ThetaCost> {
    check_positive("L", l)?;
    check_positive("H", h)?;
    let (mults, adds, exps) = match variant {
        Variant::Krmee => (8 * l - 8, 3 * l - 3, 4 * l - 4),
        Variant::Qkrmee => (9 * h, 3 * h - 1, 4 * h),
        Variant::Krgmee => (9 * l - 9, 4 * l - 4, 6 * l - 6),
        Variant::Qkrgmee => (10 * h, 4 * l - 1, 6 * h),
        Variant::Krls => {
            return Err(KafError::InvalidParameter {
                name: "variant",
                reason: "KRLS has no θ computation".into(),
            })
        }
    };
    Ok(ThetaCost { mults, adds, exps })
}

/// Operations saved per iteration by quantizing: `15L − 14 − 16H` (MEE) or
/// `19L − 18 − 20H` (GMEE). Negative when quantization costs more.
pub fn complexity_delta(l: u64, h: u64, family: Criterion) -> i64 {
    let (l, h) = (l as i64, h as i64);
    match family {
        Criterion::Mee => 15 * l - 14 - 16 * h,
        Criterion::Gmee => 19 * l - 18 - 20 * h,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub variant: Variant,
    pub mults: u64,
    pub adds: u64,
    pub exps: u64,
    pub wall_seconds: f64,
    pub h_mean: f64,
    pub l: u64,
}

impl ComplexityReport {
    /// Counts at `H = round(h_mean)` (at least 1) plus measured θ time per iteration.
    pub fn new(variant: Variant, l: u64, h_mean: f64, theta_time: Duration, iterations: u64) -> Result<Self> {
        let h = (h_mean.round() as u64).max(1);
        let c = theta_cost(l, h, variant)?;
        Ok(Self {
            variant,
            mults: c.mults,
            adds: c.adds,
            exps: c.exps,
            wall_seconds: theta_time.as_secs_f64() / iterations.max(1) as f64,
            h_mean,
            l,
        })
    }
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "variant={}", self.variant)?;
        writeln!(f, "L={}", self.l)?;
        writeln!(f, "H_mean={}", self.h_mean)?;
        writeln!(f, "mults={}", self.mults)?;
        writeln!(f, "adds={}", self.adds)?;
        writeln!(f, "exps={}", self.exps)?;
        writeln!(f, "wall_seconds={:e}", self.wall_seconds)
    }
}

/// Settings for [`empirical_mean_error_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeanErrorConfig {
    pub runs: usize,
    pub steps: usize,
    /// Variance of the additive measurement noise.
    pub noise_var: f64,
    /// Ridge multiplier; the prior precision is `β^α · reg`.
    pub reg: f64,
    /// Exponential forgetting of past samples in the least-squares cost.
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub window_len: usize,
    pub gamma: f64,
    pub block: usize,
    pub seed: u64,
}

impl Default for MeanErrorConfig {
    fn default() -> Self {
        Self {
            runs: 200,
            steps: 300,
            noise_var: 0.0,
            reg: 1e-2,
            lambda: 0.95,
            alpha: 2.0,
            beta: 5.0,
            window_len: 20,
            gamma: 0.04,
            block: 10,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    NoConvergenceEvidence,
    SpectralRadiusTooLarge,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::NoConvergenceEvidence => "no convergence evidence",
            Verdict::SpectralRadiusTooLarge => "spectral radius >= 1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanErrorReport {
    pub m: usize,
    pub runs: usize,
    /// ρ(I − E[α_n φ_nᵀ]) with the expectation taken over runs and steps.
    pub spectral_radius: f64,
    /// `‖E[ε_n]‖` for n = 0..=steps.
    pub error_norms: Vec<f64>,
    /// Block means of `error_norms[1..]`.
    pub smoothed: Vec<f64>,
    pub verdict: Verdict,
}

impl MeanErrorReport {
    /// First step at which `‖E[ε_n]‖` drops below `tol`.
    pub fn first_below(&self, tol: f64) -> Option<usize> {
        self.error_norms.iter().position(|&v| v < tol)
    }
}

impl fmt::Display for MeanErrorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m={}", self.m)?;
        writeln!(f, "runs={}", self.runs)?;
        writeln!(f, "spectral_radius={}", self.spectral_radius)?;
        writeln!(f, "initial_error_norm={}", self.error_norms[0])?;
        writeln!(f, "final_error_norm={}", self.error_norms.last().copied().unwrap_or(0.0))?;
        let s: Vec<String> = self.smoothed.iter().map(|v| format!("{v:e}")).collect();
        writeln!(f, "smoothed={}", s.join(";"))?;
        writeln!(f, "verdict={}", self.verdict)
    }
}

/// Per-run weight errors and accumulated `α_n φ_nᵀ`.
struct RunTrace {
    errors: Vec<DVector<f64>>,
    gain_outer: DMatrix<f64>,
}

/// Monte Carlo estimate of the mean weight error of a quantized-GMEE RLS on
/// the explicit linear model `d = w*ᵀφ + v`, with `φ ~ N(0, I_m)`.
///
/// The verdict passes when ρ(I − E[αφᵀ]) < 1, the block-smoothed
/// `‖E[ε_n]‖` never rises by more than three Monte Carlo standard errors
/// between blocks, and the last block is at most half the first.
pub fn empirical_mean_error_check(m: usize, cfg: &MeanErrorConfig) -> Result<MeanErrorReport> {
    if m == 0 || m > 20 {
        return Err(KafError::InvalidParameter {
            name: "m",
            reason: format!("feature dimension must lie in 1..=20, got {m}"),
        });
    }
    if cfg.runs == 0 || cfg.steps == 0 || cfg.block == 0 {
        return Err(KafError::InvalidParameter {
            name: "runs/steps/block",
            reason: "must all be >= 1".into(),
        });
    }
    if !(cfg.noise_var >= 0.0) || !(cfg.reg > 0.0) {
        return Err(KafError::InvalidParameter {
            name: "noise_var/reg",
            reason: "noise variance must be >= 0 and reg > 0".into(),
        });
    }
    if !(cfg.lambda > 0.0 && cfg.lambda <= 1.0) {
        return Err(KafError::InvalidParameter {
            name: "lambda",
            reason: format!("must lie in (0, 1], got {}", cfg.lambda),
        });
    }
    let ggd = GGDParams::new(cfg.alpha, cfg.beta)?;
    let mut cp = CriterionParams::new(ggd, cfg.beta / std::f64::consts::SQRT_2, 1.0, cfg.window_len)?;
    cp.forgetting = Forgetting::Literal;
    let ridge = ggd.beta_pow_alpha() * cfg.reg;
    let w_star = DVector::from_element(m, 1.0);

    let traces: Vec<RunTrace> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| simulate_run(m, cfg, &cp, ridge, &w_star, run as u64))
        .collect::<Result<_>>()?;

    let mut mean_err = vec![DVector::zeros(m); cfg.steps + 1];
    let mut sq_norm = vec![0.0; cfg.steps + 1];
    let mut gain_outer = DMatrix::zeros(m, m);
    for t in &traces {
        for ((acc, sq), e) in mean_err.iter_mut().zip(sq_norm.iter_mut()).zip(&t.errors) {
            *acc += e;
            *sq += e.norm_squared();
        }
        gain_outer += &t.gain_outer;
    }
    let runs = cfg.runs as f64;
    for e in mean_err.iter_mut() {
        *e /= runs;
    }
    let error_norms: Vec<f64> = mean_err.iter().map(|e| e.norm()).collect();
    // standard error of the mean vector, from the total per-run scatter
    let std_err: Vec<f64> = sq_norm
        .iter()
        .zip(&mean_err)
        .map(|(&sq, e)| {
            let scatter = (sq - runs * e.norm_squared()).max(0.0) / (runs - 1.0).max(1.0);
            (scatter / runs).sqrt()
        })
        .collect();
    gain_outer /= runs * cfg.steps as f64;
    let spectral_radius = spectral_radius(&(DMatrix::identity(m, m) - gain_outer))?;

    let block_mean = |v: &[f64]| -> Vec<f64> {
        v[1..]
            .chunks(cfg.block)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect()
    };
    let smoothed = block_mean(&error_norms);
    let smoothed_se = block_mean(&std_err);
    let monotone = (1..smoothed.len())
        .all(|i| smoothed[i] <= smoothed[i - 1] + MC_SLACK * smoothed_se[i]);
    let substantial = match (smoothed.first(), smoothed.last()) {
        (Some(&a), Some(&b)) => smoothed.len() >= 2 && b <= 0.5 * a,
        _ => false,
    };
    let verdict = if spectral_radius >= 1.0 {
        Verdict::SpectralRadiusTooLarge
    } else if monotone && substantial {
        Verdict::Pass
    } else {
        Verdict::NoConvergenceEvidence
    };
    Ok(MeanErrorReport {
        m,
        runs: cfg.runs,
        spectral_radius,
        error_norms,
        smoothed,
        verdict,
    })
}

fn simulate_run(
    m: usize,
    cfg: &MeanErrorConfig,
    cp: &CriterionParams,
    ridge: f64,
    w_star: &DVector<f64>,
    run: u64,
) -> Result<RunTrace> {
    let mut rng = run_rng(cfg.seed, run);
    let noise_sd = cfg.noise_var.sqrt();
    let mut w = DVector::zeros(m);
    let mut p = DMatrix::identity(m, m) / ridge;
    let mut codebook = Codebook::new(cfg.gamma)?;
    let mut window: std::collections::VecDeque<usize> = Default::default();
    let mut errors = Vec::with_capacity(cfg.steps + 1);
    errors.push(w_star - &w);
    let mut gain_outer = DMatrix::zeros(m, m);

    for n in 1..=cfg.steps {
        let phi = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
        let v: f64 = StandardNormal.sample(&mut rng);
        let d = w_star.dot(&phi) + noise_sd * v;
        let e = d - w.dot(&phi);

        window.push_back(codebook.insert(e));
        if window.len() > cp.window_len {
            let old = window.pop_front().expect("window is non-empty");
            if codebook.remove_shifting(old)? {
                for idx in window.iter_mut().filter(|i| **i > old) {
                    *idx -= 1;
                }
            }
        }
        let terms = theta_terms(e, &codebook, cp, n, Criterion::Gmee)?;
        let d_eff = terms.effective_desired(d);

        let p_phi = &p * &phi;
        let denom = cfg.lambda / terms.theta + phi.dot(&p_phi);
        let gain = &p_phi / denom;
        w += &gain * (d_eff - w.dot(&phi));
        p -= &gain * p_phi.transpose();
        p /= cfg.lambda;
        gain_outer += &gain * phi.transpose();
        errors.push(w_star - &w);
    }
    Ok(RunTrace { errors, gain_outer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Characteristic polynomial coefficients (monic, highest first) via
    /// Faddeev–LeVerrier.
    fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
        let n = a.nrows();
        let mut coeffs = vec![1.0];
        let mut mk = DMatrix::<f64>::zeros(n, n);
        let id = DMatrix::<f64>::identity(n, n);
        let mut c = 1.0;
        for k in 1..=n {
            mk = a * &mk + &id * c;
            let amk = a * &mk;
            c = -amk.trace() / k as f64;
            coeffs.push(c);
        }
        coeffs
    }

    /// All roots of a monic polynomial via Durand–Kerner.
    fn poly_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
        let n = coeffs.len() - 1;
        let eval = |z: Complex<f64>| coeffs.iter().fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c);
        let seed = Complex::new(0.4, 0.9);
        let mut roots: Vec<Complex<f64>> = (0..n).map(|i| seed.powu(i as u32)).collect();
        for _ in 0..2000 {
            let prev = roots.clone();
            for i in 0..n {
                let mut denom = Complex::new(1.0, 0.0);
                for j in 0..n {
                    if j != i {
                        denom *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
            }
            let moved = roots.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if moved < 1e-15 {
                break;
            }
        }
        roots
    }

    fn random_matrix(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> DMatrix<f64> {
        DMatrix::from_fn(m, m, |_, _| scale * (rng.gen::<f64>() * 2.0 - 1.0))
    }

    #[test]
    fn spectral_radius_examples() {
        assert_relative_eq!(spectral_radius(&DMatrix::identity(4, 4)).unwrap(), 1.0, epsilon = 1e-12);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -0.9]));
        assert_relative_eq!(spectral_radius(&d).unwrap(), 0.9, epsilon = 1e-9);
        assert_eq!(spectral_radius(&DMatrix::zeros(3, 3)).unwrap(), 0.0);
        assert!(spectral_radius(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn spectral_radius_of_rotation_uses_fallback() {
        let (s, c) = (0.3f64.sin(), 0.3f64.cos());
        let r = DMatrix::from_row_slice(2, 2, &[0.8 * c, -0.8 * s, 0.8 * s, 0.8 * c]);
        assert!(power_iteration(&r).is_err());
        assert_relative_eq!(spectral_radius(&r).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn spectral_radius_matches_characteristic_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 5, 1.0);
            let oracle = poly_roots(&char_poly(&a)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let rho = spectral_radius(&a).unwrap();
            assert!((rho - oracle).abs() <= 1e-8, "rho {rho} vs {oracle}");
        }
    }

    #[test]
    fn lyapunov_examples() {
        let xi = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let sys = LyapunovSystem::new(DMatrix::zeros(2, 2), xi.clone()).unwrap();
        assert_eq!(lyapunov_steady_state(&sys).unwrap(), xi);

        let sys = LyapunovSystem::new(DMatrix::from_element(1, 1, 0.5), DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert_relative_eq!(lyapunov_steady_state(&sys).unwrap()[(0, 0)], 4.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn lyapunov_rejects_unstable_and_bad_shapes() {
        let sys = LyapunovSystem::new(DMatrix::identity(2, 2) * 1.01, DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(lyapunov_steady_state(&sys), Err(KafError::NoSteadyState(_))));
        assert!(LyapunovSystem::new(DMatrix::identity(2, 2), DMatrix::identity(3, 3)).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        assert!(LyapunovSystem::new(DMatrix::identity(2, 2), asym).is_err());
    }

    #[test]
    fn lyapunov_matches_fixed_point_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let mut r = random_matrix(&mut rng, 3, 1.0);
            r *= 0.7 / spectral_radius(&r).unwrap();
            let b = random_matrix(&mut rng, 3, 1.0);
            let xi = &b * b.transpose();
            let sys = LyapunovSystem::new(r.clone(), xi.clone()).unwrap();
            let t = lyapunov_steady_state(&sys).unwrap();
            assert!(sys.residual(&t) <= 1e-10 * xi.norm());
            let mut it = DMatrix::zeros(3, 3);
            for _ in 0..500 {
                it = &r * &it * r.transpose() + &xi;
            }
            assert!((&t - &it).amax() <= 1e-8);
        }
    }

    #[test]
    fn theta_cost_rows() {
        assert_eq!(
            theta_cost(50, 1, Variant::Krmee).unwrap(),
            ThetaCost { mults: 392, adds: 147, exps: 196 }
        );
        assert_eq!(
            theta_cost(1, 5, Variant::Qkrmee).unwrap(),
            ThetaCost { mults: 45, adds: 14, exps: 20 }
        );
        assert_eq!(
            theta_cost(50, 5, Variant::Qkrgmee).unwrap(),
            ThetaCost { mults: 50, adds: 199, exps: 30 }
        );
        assert_eq!(
            theta_cost(50, 5, Variant::Krgmee).unwrap(),
            ThetaCost { mults: 441, adds: 196, exps: 294 }
        );
        assert!(theta_cost(0, 5, Variant::Krmee).is_err());
        assert!(theta_cost(5, 5, Variant::Krls).is_err());
    }

    #[test]
    fn complexity_delta_examples() {
        assert_eq!(complexity_delta(50, 5, Criterion::Mee), 656);
        assert_eq!(complexity_delta(50, 5, Criterion::Gmee), 832);
        assert_eq!(complexity_delta(1, 1, Criterion::Mee), -15);
    }

    #[test]
    fn complexity_report_lines() {
        let r = ComplexityReport::new(Variant::Qkrgmee, 50, 4.6, Duration::from_millis(2), 1000).unwrap();
        assert_eq!((r.mults, r.adds, r.exps), (50, 199, 30));
        let text = r.to_string();
        assert!(text.contains("variant=QKRGMEE\n"));
        assert!(text.contains("H_mean=4.6\n"));
        assert!(text.lines().all(|l| l.contains('=')));
    }

    #[test]
    fn mean_error_noiseless_converges() {
        let report = empirical_mean_error_check(4, &MeanErrorConfig::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
        assert!(report.spectral_radius < 1.0);
        assert!(report.first_below(1e-3).is_some_and(|n| n <= 200), "{report}");
    }

    #[test]
    fn mean_error_noisy_still_converges_in_mean() {
        let cfg = MeanErrorConfig {
            noise_var: 0.1,
            ..MeanErrorConfig::default()
        };
        let report = empirical_mean_error_check(4, &cfg).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
    }

    #[test]
    fn mean_error_frozen_weights_show_no_evidence() {
        let cfg = MeanErrorConfig {
            reg: 1e12,
            runs: 200,
            steps: 100,
            ..MeanErrorConfig::default()
        };
        let report = empirical_mean_error_check(3, &cfg).unwrap();
        assert_eq!(report.verdict, Verdict::NoConvergenceEvidence, "{report}");
        let first = report.error_norms[0];
        assert!(report.error_norms.iter().all(|&v| (v - first).abs() < 1e-6 * first));
    }

    #[test]
    fn mean_error_is_deterministic() {
        let cfg = MeanErrorConfig {
            runs: 20,
            steps: 40,
            noise_var: 0.1,
            ..MeanErrorConfig::default()
        };
        assert_eq!(
            empirical_mean_error_check(3, &cfg).unwrap(),
            empirical_mean_error_check(3, &cfg).unwrap()
        );
    }
}
