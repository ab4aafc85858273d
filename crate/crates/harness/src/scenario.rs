//! Data-generating scenarios for the simulation suites.

use std::fmt;
use std::str::FromStr;

use distinf_core::{Pair, SeedSpec, Table};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Univariate law of `X_i` for the Gini experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Univariate {
    Normal { mean: f64, sd: f64 },
    Gamma { shape: f64, scale: f64 },
    Poisson { lambda: f64 },
}

impl Univariate {
    pub const GAUSSIAN: Univariate = Univariate::Normal { mean: 1.0, sd: 1.0 };
    pub const GAMMA: Univariate = Univariate::Gamma { shape: 3.0, scale: 1.0 };
    pub const POISSON: Univariate = Univariate::Poisson { lambda: 4.0 };

    pub fn label(&self) -> &'static str {
        match self {
            Univariate::Normal { .. } => "gaussian",
            Univariate::Gamma { .. } => "gamma",
            Univariate::Poisson { .. } => "poisson",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Univariate::Normal { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
            Univariate::Gamma { shape, scale } => shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite(),
            Univariate::Poisson { lambda } => lambda > 0.0 && lambda.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(HarnessError::Config(format!("invalid distribution parameters {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        match *self {
            Univariate::Normal { mean, sd } => {
                let d = Normal::new(mean, sd).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Univariate::Gamma { shape, scale } => {
                let d = Gamma::new(shape, scale).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Univariate::Poisson { lambda } => {
                let d = Poisson::new(lambda).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
        }
    }

    /// Sample of size `n` for replication `rep` under `seed`.
    pub fn table(&self, seed: &SeedSpec, rep: usize, n: usize) -> Result<Table> {
        let mut rng = seed.child(DATA_TAG).stream(0, rep);
        Ok(Table::from_column(self.sample(&mut rng, n))?)
    }
}

impl FromStr for Univariate {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::GAUSSIAN),
            "gamma" => Ok(Self::GAMMA),
            "poisson" => Ok(Self::POISSON),
            other => Err(HarnessError::Usage(format!("unknown scenario '{other}' (gaussian, gamma, poisson)"))),
        }
    }
}

impl fmt::Display for Univariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Marginal families of `(Y, Z)` for the independence-test experiments:
/// I Gaussian/Gaussian, II Gaussian/t6, III t6/t6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DcovFamily {
    I,
    II,
    III,
}

impl DcovFamily {
    fn heavy_tails(&self) -> (bool, bool) {
        match self {
            DcovFamily::I => (false, false),
            DcovFamily::II => (false, true),
            DcovFamily::III => (true, true),
        }
    }
}

impl FromStr for DcovFamily {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(DcovFamily::I),
            "II" | "2" => Ok(DcovFamily::II),
            "III" | "3" => Ok(DcovFamily::III),
            other => Err(HarnessError::Usage(format!("unknown dcov scenario '{other}' (I, II, III)"))),
        }
    }
}

impl fmt::Display for DcovFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DcovFamily::I => "I",
            DcovFamily::II => "II",
            DcovFamily::III => "III",
        })
    }
}

/// Degrees of freedom of the heavy-tailed marginals.
pub const T_DF: f64 = 6.0;

/// Generator of `p`-dimensional `(Y, Z)` pairs with
/// `cor(Y_j, Z_k) = rho^{|j - k - p|}` on the latent Gaussian scale.
#[derive(Debug, Clone)]
pub struct DcovScenario {
    pub family: DcovFamily,
    pub p: usize,
    pub rho: f64,
    chol: Option<DMatrix<f64>>,
}

impl DcovScenario {
    pub fn new(family: DcovFamily, p: usize, rho: f64) -> Result<Self> {
        if p == 0 {
            return Err(HarnessError::Config("dimension p must be positive".into()));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(HarnessError::Config(format!("rho must lie in [0, 1), got {rho}")));
        }
        let chol = if rho > 0.0 {
            let cov = cross_covariance(p, rho);
            let l = cov
                .cholesky()
                .ok_or_else(|| HarnessError::Config(format!("rho = {rho} gives a non-positive-definite covariance at p = {p}")))?;
            Some(l.l())
        } else {
            None
        };
        Ok(Self { family, p, rho, chol })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Pair> {
        let p = self.p;
        let mut y = Vec::with_capacity(n * p);
        let mut z = Vec::with_capacity(n * p);
        let mut w = vec![0.0; 2 * p];
        let chi = ChiSquared::new(T_DF).expect("positive df");
        let (ty, tz) = self.family.heavy_tails();
        for _ in 0..n {
            for v in w.iter_mut() {
                *v = StandardNormal.sample(rng);
            }
            if let Some(l) = &self.chol {
                let e = nalgebra::DVector::from_column_slice(&w);
                w.copy_from_slice((l * e).as_slice());
            }
            for (j, &v) in w.iter().enumerate() {
                let heavy = if j < p { ty } else { tz };
                let x = if heavy { v / (chi.sample(rng) / T_DF).sqrt() } else { v };
                if j < p {
                    y.push(x);
                } else {
                    z.push(x);
                }
            }
        }
        Ok(Pair::new(Table::new(y, n, p)?, Table::new(z, n, p)?)?)
    }

    /// Pair sample of size `n` for replication `rep` under `seed`.
    pub fn pair(&self, seed: &SeedSpec, rep: usize, n: usize) -> Result<Pair> {
        let mut rng = seed.child(DATA_TAG).stream(1, rep);
        self.sample(&mut rng, n)
    }
}

/// `[[I, C], [C^T, I]]` with `C_jk = rho^{|j - k - p|}`.
pub fn cross_covariance(p: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(2 * p, 2 * p, |r, c| {
        if r == c {
            1.0
        } else if r < p && c >= p {
            cross(r, c - p, p, rho)
        } else if r >= p && c < p {
            cross(c, r - p, p, rho)
        } else {
            0.0
        }
    })
}

fn cross(j: usize, k: usize, p: usize, rho: f64) -> f64 {
    let e = (j as i64 - k as i64 - p as i64).unsigned_abs();
    rho.powi(e as i32)
}

/// Seed-derivation tag for data generation.
pub const DATA_TAG: u64 = 0xDA7A;
