//! Randomized self-checks of the quantized information potential and the
//! online quantizer. Backs the `kaf properties` command.

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::criteria::{
    batch_qgmee_fixed_point, empirical_ip, large_beta_ip_approx, parzen_density, quantized_ip,
};
use crate::error::Result;
use crate::math::GGDParams;
use crate::quantizer::{build_codebook, Codebook};

/// Outcome of one property over all of its random cases.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub cases: usize,
    /// Largest violation measure seen; compared against `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyCheck {
    fn new(name: &'static str, cases: usize, worst: f64, tolerance: f64) -> Self {
        Self {
            name,
            cases,
            worst,
            tolerance,
            passed: worst <= tolerance,
        }
    }
}

impl fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} cases={:<5} worst={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst,
            self.tolerance
        )
    }
}

fn errors(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// At zero threshold the quantized potential equals the pairwise one.
pub fn zero_threshold_identity(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let len = rng.gen_range(1..=50);
        let e = errors(rng, len, 3.0);
        let p = GGDParams::new(rng.gen_range(0.5..4.0), rng.gen_range(0.3..5.0))?;
        let cb = build_codebook(&e, 0.0)?;
        let q = quantized_ip(&e, &cb, &p)?.value();
        worst = worst.max(rel(q, empirical_ip(&e, &p)?.value()));
    }
    Ok(PropertyCheck::new("zero-threshold identity", cases, worst, 1e-14))
}

/// The potential never exceeds the density peak; coincident points attain it.
pub fn peak_bound(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let len = rng.gen_range(1..=40);
        let e = errors(rng, len, 4.0);
        let p = GGDParams::new(rng.gen_range(0.2..4.0), rng.gen_range(0.2..8.0))?;
        let cb = build_codebook(&e, rng.gen_range(0.0..1.0))?;
        let excess = quantized_ip(&e, &cb, &p)?.value() - p.peak();
        worst = worst.max(excess / p.peak());

        let x = rng.gen_range(-2.0..2.0);
        let same = vec![x; len];
        let cb = build_codebook(&same, 0.0)?;
        worst = worst.max(rel(quantized_ip(&same, &cb, &p)?.value(), p.peak()));
    }
    Ok(PropertyCheck::new("peak bound", cases, worst, 1e-14))
}

/// The potential is a count-weighted mix of Parzen estimates at the codewords.
pub fn codeword_decomposition(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let len = rng.gen_range(1..=50);
        let e = errors(rng, len, 3.0);
        let p = GGDParams::new(rng.gen_range(0.5..4.0), rng.gen_range(0.3..5.0))?;
        let cb = build_codebook(&e, rng.gen_range(0.0..1.5))?;
        let l = len as f64;
        let weight_sum: f64 = cb.counts().iter().map(|&n| n as f64 / l).sum();
        let mix: f64 = cb
            .iter()
            .map(|(c, n)| n as f64 / l * parzen_density(c, &e, &p))
            .sum();
        let q = quantized_ip(&e, &cb, &p)?.value();
        worst = worst.max(rel(q, mix)).max((weight_sum - 1.0).abs());
    }
    Ok(PropertyCheck::new("codeword decomposition", cases, worst, 1e-12))
}

/// A single codeword at zero reduces the potential to the correntropy sum.
pub fn correntropy_reduction(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let len = rng.gen_range(1..=50);
        let e = errors(rng, len, 3.0);
        let p = GGDParams::new(rng.gen_range(0.5..4.0), rng.gen_range(0.3..5.0))?;
        let cb = Codebook::from_parts(vec![0.0], vec![len], 0.0)?;
        let gcc = e.iter().map(|&x| p.density(x)).sum::<f64>() / len as f64;
        worst = worst.max(rel(quantized_ip(&e, &cb, &p)?.value(), gcc));
    }
    Ok(PropertyCheck::new("correntropy reduction", cases, worst, 1e-14))
}

/// The large-β expansion gets relatively closer as β grows.
///
/// Reports the number of datasets whose gap failed to shrink strictly.
pub fn large_beta_asymptotics(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertyCheck> {
    let mut failures = 0usize;
    for _ in 0..cases {
        let len = rng.gen_range(2..=30);
        let e = errors(rng, len, 1.0);
        let alpha = rng.gen_range(1.0..3.0);
        let cb = build_codebook(&e, rng.gen_range(0.0..0.5))?;
        let gaps = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&beta| {
                let p = GGDParams::new(alpha, beta)?;
                let q = quantized_ip(&e, &cb, &p)?.value();
                Ok(rel(large_beta_ip_approx(&e, &cb, &p), q))
            })
            .collect::<Result<Vec<f64>>>()?;
        if !(gaps[1] < gaps[0] && gaps[2] < gaps[1]) {
            failures += 1;
        }
    }
    Ok(PropertyCheck::new("large-beta asymptotics", cases, failures as f64, 0.0))
}

/// The batch fixed point zeroes the normal-equation residual.
pub fn fixed_point_stationarity(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let m = rng.gen_range(1..=5);
        let n = rng.gen_range(m + 5..=50);
        let w_true: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let inputs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let desired: Vec<f64> = inputs
            .iter()
            .map(|u| u.iter().zip(&w_true).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.1..0.1))
            .collect();
        let cb = build_codebook(&errors(rng, n, 0.2), 0.05)?;
        let p = GGDParams::new(2.0, rng.gen_range(1.0..3.0))?;
        let fp = batch_qgmee_fixed_point(&inputs, &desired, &cb, &p)?;
        let m_norm = fp.m.iter().map(|x| x * x).sum::<f64>().sqrt();
        worst = worst.max(fp.gradient_norm / m_norm.max(f64::MIN_POSITIVE));
    }
    Ok(PropertyCheck::new("fixed-point stationarity", cases, worst, 1e-8))
}

/// Codewords stay more than γ apart and counts add up to the samples seen.
pub fn quantizer_separation(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertyCheck> {
    let mut failures = 0usize;
    for _ in 0..cases {
        let len = rng.gen_range(1..=200);
        let gamma = rng.gen_range(0.0..1.0);
        let e = errors(rng, len, 5.0);
        let cb = build_codebook(&e, gamma)?;
        let c = cb.codewords();
        let separated = c
            .iter()
            .enumerate()
            .all(|(i, a)| c[i + 1..].iter().all(|b| (a - b).abs() > gamma));
        if !separated || cb.total() != len {
            failures += 1;
        }
    }
    Ok(PropertyCheck::new("quantizer separation", cases, failures as f64, 0.0))
}

/// Every check with its default case count, from one seed.
pub fn run_property_suite(seed: u64) -> Result<Vec<PropertyCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        zero_threshold_identity(&mut rng, 100)?,
        peak_bound(&mut rng, 1000)?,
        codeword_decomposition(&mut rng, 100)?,
        correntropy_reduction(&mut rng, 100)?,
        large_beta_asymptotics(&mut rng, 20)?,
        fixed_point_stationarity(&mut rng, 20)?,
        quantizer_separation(&mut rng, 200)?,
    ])
}
