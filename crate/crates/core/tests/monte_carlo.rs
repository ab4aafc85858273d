//! Statistical properties checked against Monte Carlo and closed-form oracles.

use std::f64::consts::PI;

use distinf_core::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn normal_sample(seed: &SeedSpec, rep: usize, n: usize, mu: f64) -> Vec<f64> {
    let mut rng = seed.stream(0, rep);
    (0..n).map(|_| mu + Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

fn gini_u(table: &Table, k: usize, seed: &SeedSpec) -> f64 {
    let p = partition_random(table, k, seed).unwrap();
    distributed_u_stat_with(table, &p, &gini_kernel(), Evaluation::Auto).unwrap().aggregate
}

/// `zeta_1 = Var E|x - X'|` for a unit-variance normal.
fn zeta1_normal() -> f64 {
    1.0 / 3.0 + (2.0 * 3f64.sqrt() - 4.0) / PI
}

#[test]
fn gini_unbiased_for_every_k() {
    let seed = SeedSpec::new(101);
    let theta = 2.0 / PI.sqrt();
    for k in [1, 10, 50] {
        let vals: Vec<f64> = (0..400)
            .map(|r| {
                let t = Table::from_column(normal_sample(&seed, r, 2000, 1.0)).unwrap();
                gini_u(&t, k, &seed.child(r as u64))
            })
            .collect();
        let (m, v) = mean_var(&vals);
        let se = (v / vals.len() as f64).sqrt();
        assert!((m - theta).abs() <= 3.0 * se, "K={k}: mean {m}, theta {theta}, se {se}");
    }
}

#[test]
fn degenerate_variance_grows_by_k() {
    let seed = SeedSpec::new(202);
    let n = 2000;
    let kernel = product_kernel(0.0);
    let reps = 800;
    let mut full = Vec::new();
    let mut split = Vec::new();
    for r in 0..reps {
        let t = Table::from_column(normal_sample(&seed, r, n, 0.0)).unwrap();
        full.push(u_stat_with(&t, &kernel, Evaluation::Auto).unwrap());
        let p = partition_random(&t, 10, &seed.child(r as u64)).unwrap();
        split.push(distributed_u_stat_with(&t, &p, &kernel, Evaluation::Auto).unwrap().aggregate);
    }
    let (_, v_full) = mean_var(&full);
    let (_, v_split) = mean_var(&split);
    let exact = 2.0 / (n as f64 * (n - 1) as f64);
    assert!((v_full / exact - 1.0).abs() < 0.15, "Var(U_N) {v_full} vs {exact}");
    let ratio = v_split / (10.0 * v_full);
    assert!((0.7..=1.3).contains(&ratio), "ratio/K = {ratio}");
}

#[test]
fn jackknife_tracks_monte_carlo_variance() {
    let seed = SeedSpec::new(303);
    let reps = 2000;
    let mut u = Vec::with_capacity(reps);
    let mut vh = Vec::with_capacity(reps);
    for r in 0..reps {
        let xs = normal_sample(&seed, r, 10_000, 1.0);
        vh.push(jackknife_gini_variance(&xs).unwrap().var_hat);
        u.push(u_stat_with(&Table::from_column(xs).unwrap(), &gini_kernel(), Evaluation::Auto).unwrap());
    }
    let (_, v_mc) = mean_var(&u);
    let mean_vh = vh.iter().sum::<f64>() / reps as f64;
    assert!((mean_vh / v_mc - 1.0).abs() < 0.2, "jackknife {mean_vh} vs MC {v_mc}");
}

#[test]
fn distributed_jackknife_targets_distributed_variance() {
    let seed = SeedSpec::new(304);
    let reps = 600;
    let (mut u, mut vh) = (Vec::new(), Vec::new());
    for r in 0..reps {
        let t = Table::from_column(normal_sample(&seed, r, 5000, 1.0)).unwrap();
        let p = partition_random(&t, 20, &seed.child(r as u64)).unwrap();
        u.push(distributed_u_stat_with(&t, &p, &gini_kernel(), Evaluation::Auto).unwrap().aggregate);
        vh.push(distributed_jackknife_variance(&t, &p).unwrap().value);
    }
    let (_, v_mc) = mean_var(&u);
    let mean_vh = vh.iter().sum::<f64>() / reps as f64;
    assert!((mean_vh / v_mc - 1.0).abs() < 0.2, "distributed jackknife {mean_vh} vs MC {v_mc}");
}

#[test]
fn sigma_alpha_matches_projection_oracle() {
    // Oracle: Var of 2 g(X), g(x) = E|x - X'| in closed form, averaged over
    // independent draws; cross-checked with the exact zeta_1.
    let nd = Normal::new(0.0, 1.0).unwrap();
    let g = |x: f64| x * (2.0 * nd.cdf(x) - 1.0) + 2.0 * nd.pdf(x);
    let draws = normal_sample(&SeedSpec::new(9), 0, 400_000, 0.0);
    let proj: Vec<f64> = draws.iter().map(|&x| 2.0 * g(x)).collect();
    let (_, oracle) = mean_var(&proj);
    assert!((oracle / (4.0 * zeta1_normal()) - 1.0).abs() < 0.01);

    let t = Table::from_column(normal_sample(&SeedSpec::new(10), 0, 10_000, 1.0)).unwrap();
    let p = partition_random(&t, 50, &SeedSpec::new(11)).unwrap();
    let est = sigma_alpha_hat(&t, &p, &gini_kernel(), Evaluation::Auto).unwrap().value;
    assert!((est / oracle - 1.0).abs() < 0.1, "sigma_alpha {est} vs {oracle}");
}

#[test]
fn db_sample_variance_matches_distributed_variance() {
    let seed = SeedSpec::new(404);
    let (n, k) = (10_000, 100);
    let mc: Vec<f64> = (0..400)
        .map(|r| {
            let t = Table::from_column(normal_sample(&seed, r, n, 1.0)).unwrap();
            gini_u(&t, k, &seed.child(r as u64))
        })
        .collect();
    let (_, v_mc) = mean_var(&mc);

    let t = Table::from_column(normal_sample(&SeedSpec::new(405), 0, n, 1.0)).unwrap();
    let p = partition_random(&t, k, &SeedSpec::new(406)).unwrap();
    let cfg = DbConfig { b: 500, seed: SeedSpec::new(407), budget: None, eval: Evaluation::Auto };
    let r = db_run(&t, &p, &gini_kernel(), &cfg).unwrap();
    let v_db = bootstrap_sample_variance(&r).unwrap();
    assert!((v_db / v_mc - 1.0).abs() < 0.15, "DB {v_db} vs MC {v_mc}");
}

#[test]
fn db_replicates_are_centered() {
    let t = Table::from_column(normal_sample(&SeedSpec::new(1), 0, 4000, 0.0)).unwrap();
    let p = partition_random(&t, 40, &SeedSpec::new(2)).unwrap();
    let cfg = DbConfig { b: 4000, seed: SeedSpec::new(3), budget: None, eval: Evaluation::Auto };
    let r = db_run(&t, &p, &gini_kernel(), &cfg).unwrap();
    let (m, v) = mean_var(&r.replicates);
    assert!(m.abs() < 4.0 * (v / r.b() as f64).sqrt(), "mean {m}");
}

fn gaussian_rows(rng: &mut impl Rng, n: usize, d: usize) -> Table {
    let v: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
    Table::new(v, n, d).unwrap()
}

#[test]
fn dcov_unbiased_under_independence() {
    let seed = SeedSpec::new(505);
    let vals: Vec<f64> = (0..120)
        .map(|r| {
            let mut rng = seed.stream(1, r);
            let pair = Pair::new(gaussian_rows(&mut rng, 10_000, 5), gaussian_rows(&mut rng, 10_000, 5)).unwrap();
            let p = partition_random_n(10_000, 50, &seed.child(r as u64)).unwrap();
            dcov_distributed(&pair, &p).unwrap().aggregate_yz
        })
        .collect();
    let (m, v) = mean_var(&vals);
    let se = (v / vals.len() as f64).sqrt();
    assert!(m.abs() <= 3.0 * se, "mean {m}, se {se}");
}

#[test]
fn sigma_beta_converges() {
    let seed = SeedSpec::new(606);
    // oracle: full-sample unbiased dcov(Y,Y) on independent large draws
    let oracle_yy: f64 = (0..4)
        .map(|r| {
            let mut rng = seed.stream(2, r);
            let y = gaussian_rows(&mut rng, 3000, 5);
            dcov_unbiased_rows(y.view(), y.view()).unwrap()
        })
        .sum::<f64>()
        / 4.0;
    let oracle = 4.0 * oracle_yy * oracle_yy;
    let mut rng = seed.stream(3, 0);
    let pair = Pair::new(gaussian_rows(&mut rng, 10_000, 5), gaussian_rows(&mut rng, 10_000, 5)).unwrap();
    let p = partition_random_n(10_000, 50, &seed).unwrap();
    let est = sigma_beta_hat(&dcov_distributed(&pair, &p).unwrap());
    assert!((est / oracle - 1.0).abs() < 0.1, "sigma_beta {est} vs {oracle}");
}

#[test]
fn dependence_measure_null_band() {
    let seed = SeedSpec::new(707);
    let reps = 300;
    let inside = (0..reps)
        .filter(|&r| {
            let mut rng = seed.stream(4, r);
            let pair = Pair::new(gaussian_rows(&mut rng, 4000, 2), gaussian_rows(&mut rng, 4000, 2)).unwrap();
            let p = partition_random_n(4000, 50, &seed.child(r as u64)).unwrap();
            dependence_measure(&dcov_distributed(&pair, &p).unwrap()).unwrap().abs() < 3.29
        })
        .count();
    assert!(inside as f64 >= 0.99 * reps as f64, "{inside}/{reps}");
}
