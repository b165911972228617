//! Statistical checks of the samplers against quadrature of the target densities.

use std::f64::consts::{PI, TAU as TWO_PI};

use approx::assert_abs_diff_eq;
use lhv::exec::Execution;
use lhv::model::{inverse_n, phase_crossings_in_time, rho_marginal, Flavour, HiddenVariable, ModelParams, NormTable};
use lhv::montecarlo::{event_stream, generate, sample_lambda, sample_side2, SimConfig};
use lhv::quad::{integrate, integrate_fallible, QuadOptions};

fn params() -> ModelParams {
    ModelParams::from_mixing(0.776).unwrap()
}

/// Loose upper bound on a chi-square with `dof` degrees of freedom.
fn chi2_bound(dof: usize) -> f64 {
    dof as f64 + 5.0 * (2.0 * dof as f64).sqrt()
}

fn lambda_draws(n: u64, seed: u64) -> Vec<f64> {
    let table = NormTable::new(params(), Execution::Parallel).unwrap();
    let mut rng = event_stream(seed, 0);
    (0..n)
        .map(|_| sample_lambda(&mut rng, &table, 10_000).unwrap().0.value())
        .collect()
}

#[test]
fn lambda_moment_matches_quadrature() {
    let p = params();
    let oracle = integrate_fallible(
        |l| Ok((2.0 * l).cos() * rho_marginal(HiddenVariable::new(l), &p)?),
        0.0,
        TWO_PI,
        &[PI / 2.0, 1.5 * PI],
        QuadOptions::default(),
    )
    .unwrap()
    .value;
    assert_abs_diff_eq!(oracle, 0.097_788_876_163_296_47, epsilon = 1e-10);

    let draws = lambda_draws(200_000, 11);
    let mean = draws.iter().map(|l| (2.0 * l).cos()).sum::<f64>() / draws.len() as f64;
    let se = (0.5 / draws.len() as f64).sqrt();
    assert!((mean - oracle).abs() < 5.0 * se, "mean {mean}, oracle {oracle}");
}

#[test]
fn lambda_histogram_follows_rho() {
    let p = params();
    let bins = 64;
    let draws = lambda_draws(200_000, 12);
    let mut counts = vec![0.0; bins];
    for l in &draws {
        counts[((l / TWO_PI) * bins as f64) as usize % bins] += 1.0;
    }
    let n = draws.len() as f64;
    let chi2: f64 = (0..bins)
        .map(|j| {
            let (a, b) = (TWO_PI * j as f64 / bins as f64, TWO_PI * (j + 1) as f64 / bins as f64);
            let kinks: Vec<f64> = [PI / 2.0, 1.5 * PI].into_iter().filter(|k| *k > a && *k < b).collect();
            let prob = integrate_fallible(|l| rho_marginal(HiddenVariable::new(l), &p), a, b, &kinks, QuadOptions::default())
                .unwrap()
                .value;
            let e = n * prob;
            (counts[j] - e).powi(2) / e
        })
        .sum();
    assert!(chi2 < chi2_bound(bins - 1), "chi2 = {chi2}");
}

#[test]
fn t2_density_at_fixed_lambda() {
    let p = params();
    let lambda = HiddenVariable::new(1.0);
    let norm = inverse_n(lambda, &p).unwrap();
    let mut rng = event_stream(13, 0);
    let n = 200_000;
    let (bins, t_max) = (50, 5.0);
    let mut counts = vec![[0.0f64; 2]; bins];
    let mut proposals = 0;
    for _ in 0..n {
        let (t, f, k) = sample_side2(&mut rng, lambda, &p, 10_000).unwrap();
        proposals += k;
        if t < t_max {
            counts[(t / t_max * bins as f64) as usize][f.index() as usize - 1] += 1.0;
        }
    }
    let mut chi2 = 0.0;
    for (j, c) in counts.iter().enumerate() {
        let (a, b) = (t_max * j as f64 / bins as f64, t_max * (j + 1) as f64 / bins as f64);
        let breaks = phase_crossings_in_time(lambda, &p, a, b);
        for flavour in Flavour::ALL {
            let sign = if flavour == Flavour::B0 { 1.0 } else { -1.0 };
            let mass = integrate(
                |t| (-t).exp() * (sign * (lambda.value() - p.delta_m() * t).cos()).max(0.0),
                a,
                b,
                &breaks,
                QuadOptions::default(),
            )
            .unwrap()
            .value;
            let e = n as f64 * mass / norm;
            if e > 0.0 {
                chi2 += (c[flavour.index() as usize - 1] - e).powi(2) / e;
            }
        }
    }
    assert!(chi2 < chi2_bound(2 * bins - 1), "chi2 = {chi2}");

    let acceptance = n as f64 / proposals as f64;
    assert!((acceptance - norm / p.tau()).abs() < 0.005, "acceptance {acceptance} vs {}", norm / p.tau());
}

#[test]
fn run_level_rates_and_marginals() {
    let cfg = SimConfig::new(params(), 200_000, 14);
    let batch = generate(cfg, Execution::Parallel).unwrap();
    let stats = batch.rng_stats();
    assert!((stats.lambda_acceptance_rate - 2.0 / PI).abs() < 0.005, "{stats:?}");

    let n = batch.events.len() as f64;
    let b0 = batch.events.iter().filter(|e| e.flavour1 == Flavour::B0).count() as f64 / n;
    assert!((b0 - 0.5).abs() < 5.0 * (0.25 / n).sqrt(), "P(B0) = {b0}");
    let mean_t1 = batch.events.iter().map(|e| e.t1).sum::<f64>() / n;
    assert!((mean_t1 - 1.0).abs() < 5.0 / n.sqrt(), "mean t1 = {mean_t1}");
}
