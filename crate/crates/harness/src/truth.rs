//! Population quantities of the Gini mean difference under the simulation
//! laws: `theta = E|X - X'|`, `zeta_1 = Var g(X)` with `g(x) = E|x - X'|`,
//! and `zeta_2 = Var |X - X'|`.

use std::f64::consts::PI;

use distinf_core::SeedSpec;
use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF, Discrete, DiscreteCDF};
use statrs::function::gamma::ln_gamma;

use crate::error::{HarnessError, Result};
use crate::scenario::Univariate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TruthSource {
    ClosedForm,
    Quadrature,
    ExactSum,
    MonteCarlo,
}

/// Population moments of the Gini kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GiniTruth {
    pub theta: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub source: TruthSource,
    /// Standard error of `theta` for Monte Carlo values, else 0.
    pub theta_se: f64,
}

impl GiniTruth {
    /// Exact variance of the U-statistic on `n` observations.
    pub fn var_u(&self, n: usize) -> f64 {
        let nf = n as f64;
        (4.0 * (nf - 2.0) * self.zeta1 + 2.0 * self.zeta2) / (nf * (nf - 1.0))
    }

    /// Exact variance of the size-weighted block average over `sizes`.
    pub fn var_distributed(&self, sizes: &[usize]) -> f64 {
        let n: usize = sizes.iter().sum();
        let nf = n as f64;
        sizes.iter().map(|&s| (s as f64 / nf).powi(2) * self.var_u(s)).sum()
    }

    /// Asymptotic variance of `sqrt(N) (U - theta)`.
    pub fn sigma_alpha_sq(&self) -> f64 {
        4.0 * self.zeta1
    }
}

/// Number of Monte Carlo draws used when no deterministic route exists.
pub const MC_DRAWS: usize = 2_000_000;

pub fn gini_truth(dist: &Univariate) -> Result<GiniTruth> {
    dist.validate()?;
    match *dist {
        Univariate::Normal { sd, .. } => {
            let theta = 2.0 * sd / PI.sqrt();
            let zeta1 = sd * sd * (1.0 / 3.0 + (2.0 * 3f64.sqrt() - 4.0) / PI);
            Ok(GiniTruth {
                theta,
                zeta1,
                zeta2: 2.0 * sd * sd - theta * theta,
                source: TruthSource::ClosedForm,
                theta_se: 0.0,
            })
        }
        Univariate::Gamma { shape, scale } if shape >= 1.0 => gamma_truth(shape, scale),
        Univariate::Gamma { .. } => monte_carlo_truth(dist, MC_DRAWS, &SeedSpec::new(0x7E57)),
        Univariate::Poisson { lambda } => poisson_truth(lambda),
    }
}

fn gamma_truth(shape: f64, scale: f64) -> Result<GiniTruth> {
    let f = statrs::distribution::Gamma::new(shape, 1.0).map_err(|e| HarnessError::Config(e.to_string()))?;
    let f1 = statrs::distribution::Gamma::new(shape + 1.0, 1.0).map_err(|e| HarnessError::Config(e.to_string()))?;
    // unit scale; theta scales linearly, the zetas quadratically
    let theta = 2.0 * (ln_gamma(shape + 0.5) - ln_gamma(shape)).exp() / PI.sqrt();
    let g = |x: f64| x * (2.0 * f.cdf(x) - 1.0) + shape * (1.0 - 2.0 * f1.cdf(x));
    let upper = shape + 60.0 * shape.sqrt() + 60.0;
    let m2 = simpson(|x| g(x).powi(2) * f.pdf(x), 0.0, upper, 200_000);
    let zeta1 = m2 - theta * theta;
    let zeta2 = 2.0 * shape - theta * theta;
    Ok(GiniTruth {
        theta: theta * scale,
        zeta1: zeta1 * scale * scale,
        zeta2: zeta2 * scale * scale,
        source: TruthSource::Quadrature,
        theta_se: 0.0,
    })
}

fn poisson_truth(lambda: f64) -> Result<GiniTruth> {
    let d = statrs::distribution::Poisson::new(lambda).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut imax = (lambda + 40.0 * lambda.sqrt() + 40.0) as u64;
    while d.sf(imax) > 1e-300 && imax < 1 << 24 {
        imax *= 2;
    }
    let p: Vec<f64> = (0..=imax).map(|i| d.pmf(i)).collect();
    // g(i) = sum_j p_j |i - j| via running sums
    let len = p.len();
    let mut g = vec![0.0; len];
    let (mut mass_below, mut first_below) = (0.0, 0.0);
    let total_first: f64 = p.iter().enumerate().map(|(j, &pj)| j as f64 * pj).sum();
    let total_mass: f64 = p.iter().sum();
    for i in 0..len {
        let x = i as f64;
        let above_mass = total_mass - mass_below;
        let above_first = total_first - first_below;
        g[i] = x * mass_below - first_below + above_first - x * above_mass;
        mass_below += p[i];
        first_below += x * p[i];
    }
    let theta: f64 = p.iter().zip(&g).map(|(pi, gi)| pi * gi).sum();
    let m2: f64 = p.iter().zip(&g).map(|(pi, gi)| pi * gi * gi).sum();
    Ok(GiniTruth {
        theta,
        zeta1: m2 - theta * theta,
        zeta2: 2.0 * lambda - theta * theta,
        source: TruthSource::ExactSum,
        theta_se: 0.0,
    })
}

/// Monte Carlo estimate from `draws` independent pairs.
pub fn monte_carlo_truth(dist: &Univariate, draws: usize, seed: &SeedSpec) -> Result<GiniTruth> {
    if draws < 2 {
        return Err(HarnessError::Config("Monte Carlo truth needs at least 2 draws".into()));
    }
    let mut rng = seed.stream(0, 0);
    let x = dist.sample(&mut rng, draws);
    let xp = dist.sample(&mut rng, draws);
    let h: Vec<f64> = x.iter().zip(&xp).map(|(a, b)| (a - b).abs()).collect();
    let n = draws as f64;
    let theta = h.iter().sum::<f64>() / n;
    let var_h = h.iter().map(|v| (v - theta).powi(2)).sum::<f64>() / (n - 1.0);
    // zeta_1 = Cov(|X - X'|, |X - X''|)
    let xpp = dist.sample(&mut rng, draws);
    let h2: Vec<f64> = x.iter().zip(&xpp).map(|(a, b)| (a - b).abs()).collect();
    let m2 = h2.iter().sum::<f64>() / n;
    let cov = h.iter().zip(&h2).map(|(a, b)| (a - theta) * (b - m2)).sum::<f64>() / (n - 1.0);
    Ok(GiniTruth {
        theta,
        zeta1: cov,
        zeta2: var_h,
        source: TruthSource::MonteCarlo,
        theta_se: (var_h / n).sqrt(),
    })
}

/// Composite Simpson rule with `intervals` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_mc(dist: Univariate, seed: u64) {
        let exact = gini_truth(&dist).unwrap();
        let mc = monte_carlo_truth(&dist, 1_000_000, &SeedSpec::new(seed)).unwrap();
        assert!((exact.theta - mc.theta).abs() < 4.0 * mc.theta_se, "{dist}: {exact:?} vs {mc:?}");
        assert!((exact.zeta1 / mc.zeta1 - 1.0).abs() < 0.03, "{dist}: {exact:?} vs {mc:?}");
        assert!((exact.zeta2 / mc.zeta2 - 1.0).abs() < 0.02, "{dist}: {exact:?} vs {mc:?}");
    }

    #[test]
    fn normal_closed_form() {
        let t = gini_truth(&Univariate::GAUSSIAN).unwrap();
        assert!((t.theta - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-15);
        assert!((t.sigma_alpha_sq() - 0.651).abs() < 1e-3);
        check_mc(Univariate::GAUSSIAN, 1);
    }

    #[test]
    fn gamma_quadrature() {
        let t = gini_truth(&Univariate::GAMMA).unwrap();
        assert!((t.theta - 1.875).abs() < 1e-12);
        check_mc(Univariate::GAMMA, 2);
        // exponential: g(x) = x + 2 e^{-x} - 1, zeta_1 = 1/3
        let e = gini_truth(&Univariate::Gamma { shape: 1.0, scale: 2.0 }).unwrap();
        assert!((e.theta - 2.0).abs() < 1e-12);
        assert!((e.zeta1 - 4.0 / 3.0).abs() < 1e-8, "{}", e.zeta1);
    }

    #[test]
    fn poisson_exact_sum() {
        let t = gini_truth(&Univariate::POISSON).unwrap();
        assert_eq!(t.source, TruthSource::ExactSum);
        check_mc(Univariate::POISSON, 3);
    }

    #[test]
    fn var_u_matches_pair_variance() {
        let t = gini_truth(&Univariate::GAUSSIAN).unwrap();
        assert!((t.var_u(2) - t.zeta2).abs() < 1e-15);
        let sizes = [100, 100];
        assert!((t.var_distributed(&sizes) - t.var_u(100) / 2.0).abs() < 1e-18);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|x| x * x * x - x, 0.0, 2.0, 4);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
