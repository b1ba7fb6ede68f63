use kaf_core::criteria::CriterionParams;
use kaf_core::filters::{batch_solve, CodebookMode, FilterConfig, KernelFilter, Variant};
use kaf_core::math::{GGDParams, KernelParams};
use kaf_core::signals::{embed, mackey_glass_len, Embedding, MGConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mg_pairs(n: usize, noise: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let emb = Embedding::default();
    let series = mackey_glass_len(&MGConfig::default(), emb.series_len(n)).unwrap();
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let (u, mut d) = embed(&centered, &emb).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for x in d.iter_mut() {
        *x += noise * rng.gen_range(-1.0..1.0);
    }
    (u[..n].to_vec(), d[..n].to_vec())
}

fn crit(alpha: f64, beta: f64, mee_sigma: f64, window: usize) -> CriterionParams {
    CriterionParams::new(GGDParams::new(alpha, beta).unwrap(), mee_sigma, 1.0, window).unwrap()
}

/// A-priori predictions of every sample after the first.
fn predictions(cfg: &FilterConfig, u: &[Vec<f64>], d: &[f64]) -> Vec<f64> {
    let mut f = KernelFilter::init(&u[0], d[0], cfg.clone()).unwrap();
    u[1..]
        .iter()
        .zip(&d[1..])
        .map(|(ui, &di)| f.update(ui, di).unwrap().prediction)
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn zero_threshold_quantized_filters_match_unquantized() {
    let (u, d) = mg_pairs(200, 0.05);
    let k = KernelParams::new(0.5).unwrap();
    let c = crit(1.6, 1.2, 0.8, 30);
    for (q, full) in [(Variant::Qkrgmee, Variant::Krgmee), (Variant::Qkrmee, Variant::Krmee)] {
        let a = predictions(&FilterConfig::new(q, k, c).with_gamma(0.0), &u, &d);
        let b = predictions(&FilterConfig::new(full, k, c), &u, &d);
        assert!(max_abs_diff(&a, &b) <= 1e-10, "{q} vs {full}");
    }
}

#[test]
fn gmee_at_alpha_two_matches_mee() {
    let (u, d) = mg_pairs(200, 0.05);
    let k = KernelParams::new(0.5).unwrap();
    let sigma = 0.8;
    let gmee = FilterConfig::new(
        Variant::Qkrgmee,
        k,
        crit(2.0, std::f64::consts::SQRT_2 * sigma, 1.0, 30),
    )
    .with_gamma(0.04)
    .with_reg(0.5);
    // β² = 2σ², so the MEE ridge multiplier doubles to give the same s
    let mee = FilterConfig::new(Variant::Qkrmee, k, crit(2.0, 1.0, sigma, 30))
        .with_gamma(0.04)
        .with_reg(1.0);
    let a = predictions(&gmee, &u, &d);
    let b = predictions(&mee, &u, &d);
    assert!(max_abs_diff(&a, &b) <= 1e-10);
}

#[test]
fn incremental_codebook_matches_rebuild_at_zero_threshold() {
    let (u, d) = mg_pairs(150, 0.05);
    let k = KernelParams::new(0.5).unwrap();
    let base = FilterConfig::new(Variant::Qkrgmee, k, crit(2.0, 1.0, 1.0, 20)).with_gamma(0.0);
    let mut rebuild = base.clone();
    rebuild.codebook_mode = CodebookMode::Rebuild;
    let a = predictions(&base, &u, &d);
    let b = predictions(&rebuild, &u, &d);
    assert!(max_abs_diff(&a, &b) <= 1e-10);
}

/// Runs a filter and returns it together with the θ and d̃ used at each step.
fn traced(cfg: &FilterConfig, u: &[Vec<f64>], d: &[f64]) -> (KernelFilter, Vec<f64>, Vec<f64>) {
    let mut f = KernelFilter::init(&u[0], d[0], cfg.clone()).unwrap();
    // the first sample enters with unit weight and its raw target
    let mut thetas = vec![1.0];
    let mut targets = vec![d[0]];
    for (ui, &di) in u[1..].iter().zip(&d[1..]) {
        let rep = f.update(ui, di).unwrap();
        thetas.push(if cfg.variant == Variant::Krls { 1.0 } else { rep.theta });
        targets.push(rep.effective_desired);
    }
    (f, thetas, targets)
}

#[test]
fn q_matches_direct_inverse() {
    let (u, d) = mg_pairs(10, 0.05);
    let k = KernelParams::new(0.7).unwrap();
    for variant in [Variant::Krls, Variant::Qkrgmee, Variant::Krmee] {
        let cfg = FilterConfig::new(variant, k, crit(2.0, 1.0, 1.0, 8)).with_gamma(0.04);
        for n in [2, 5, 10] {
            let (f, thetas, _) = traced(&cfg, &u[..n], &d[..n]);
            let s = cfg.ridge_scale();
            let mut m = DMatrix::from_fn(n, n, |i, j| k.eval(&u[i], &u[j]));
            for i in 0..n {
                m[(i, i)] += s / thetas[i];
            }
            let inv = m.try_inverse().unwrap();
            let q = f.q_rows();
            for i in 0..n {
                for j in 0..n {
                    assert!(
                        (q[i][j] - inv[(i, j)]).abs() <= 1e-8,
                        "{variant} n={n} ({i},{j}): {} vs {}",
                        q[i][j],
                        inv[(i, j)]
                    );
                }
            }
        }
    }
}

#[test]
fn recursive_coefficients_match_batch_solution() {
    let (u, d) = mg_pairs(30, 0.05);
    let k = KernelParams::new(0.5).unwrap();
    for variant in [Variant::Krls, Variant::Krgmee, Variant::Qkrgmee, Variant::Qkrmee] {
        let cfg = FilterConfig::new(variant, k, crit(2.0, 1.0, 0.8, 10)).with_gamma(0.04);
        for n in [3, 12, 30] {
            let (f, thetas, targets) = traced(&cfg, &u[..n], &d[..n]);
            let batch = batch_solve(&u[..n], &targets, &thetas, &cfg).unwrap();
            let diff = max_abs_diff(f.coefficients(), &batch);
            assert!(diff <= 1e-8, "{variant} n={n}: {diff:e}");
        }
    }
}
