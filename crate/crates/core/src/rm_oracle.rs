//! Monte Carlo oracle: trace moments of `(XY + YX)/√2` and `(X² − Y²)/√2`
//! for independent real symmetric Gaussian matrices `X, Y`, normalized so
//! that each approximates a standard semicircular element.
//!
//! Every trial draws from its own ChaCha8 stream, selected by
//! `set_stream(representation · 2³² + trial)` on a generator seeded with
//! `seed`, so results do not depend on how trials are scheduled.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::transforms::{tetilla_moment_closed, DistributionSpec};

pub const MAX_DIM: usize = 2048;
pub const MAX_TRIALS: usize = 1000;
pub const MAX_K: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub k_max: usize,
}

impl SimConfig {
    pub fn new(dim: usize, trials: usize, seed: u64, k_max: usize) -> Result<Self> {
        let cfg = SimConfig { dim, trials, seed, k_max };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidInput(format!("matrix dimension {} must be ≥ 2", self.dim)));
        }
        if self.dim > MAX_DIM {
            return Err(Error::capacity("matrix dimension", self.dim as u128, MAX_DIM as u128));
        }
        if self.trials < 2 {
            return Err(Error::InvalidInput("need at least 2 trials for a standard error".into()));
        }
        if self.trials > MAX_TRIALS {
            return Err(Error::capacity("trials", self.trials as u128, MAX_TRIALS as u128));
        }
        if self.k_max == 0 || self.k_max > MAX_K {
            return Err(Error::InvalidInput(format!("k_max = {} outside 1..={MAX_K}", self.k_max)));
        }
        Ok(())
    }
}

/// Which random matrix the trace moments are taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    /// `(XY + YX)/√2`.
    Product,
    /// `(X² − Y²)/√2`.
    SquareDifference,
    /// `X` alone, a semicircular sanity check.
    Semicircle,
}

impl Representation {
    fn stream_base(self) -> u64 {
        match self {
            Representation::Product => 0,
            Representation::SquareDifference => 1,
            Representation::Semicircle => 2,
        }
    }

    /// Limiting moment of order `k`.
    pub fn target(self, k: usize) -> Rational {
        match self {
            Representation::Semicircle => DistributionSpec::Semicircular { t: Rational::from_integer(1) }
                .moments(k)
                .map(|m| m[k].clone())
                .expect("order ≤ 8"),
            _ if k % 2 == 1 => Rational::from_integer(0),
            _ => tetilla_moment_closed(k / 2),
        }
    }
}

/// Real symmetric Gaussian matrix with off-diagonal variance `1/N` and
/// diagonal variance `2/N`, so that `(1/N) E Tr X² → 1`.
pub fn sample_gue<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Array2<f64> {
    assert!(dim >= 2, "dimension must be ≥ 2");
    let off = (1.0 / dim as f64).sqrt();
    let diag = (2.0 / dim as f64).sqrt();
    let mut x = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        for j in i..dim {
            let z: f64 = rng.sample(StandardNormal);
            if i == j {
                x[[i, i]] = diag * z;
            } else {
                x[[i, j]] = off * z;
                x[[j, i]] = off * z;
            }
        }
    }
    x
}

fn frobenius_dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `(1/N) Tr W^k` for `k = 1..=k_max` and symmetric `W`, using
/// `Tr W^{a+b} = ⟨W^a, W^b⟩_F` so at most three products are needed.
pub fn normalized_traces(w: &Array2<f64>, k_max: usize) -> Vec<f64> {
    let n = w.nrows() as f64;
    let mut powers = vec![w.clone()];
    let needed = k_max.div_ceil(2);
    while powers.len() < needed {
        let next = if powers.len() % 2 == 1 {
            // W^{2m} = W^m · W^m
            let h = &powers[powers.len() / 2];
            h.dot(h)
        } else {
            powers.last().unwrap().dot(w)
        };
        powers.push(next);
    }
    (1..=k_max)
        .map(|k| {
            let t = if k == 1 {
                w.diag().sum()
            } else {
                let a = k / 2;
                let b = k - a;
                frobenius_dot(&powers[a - 1], &powers[b - 1])
            };
            t / n
        })
        .collect()
}

fn sample_matrix(repr: Representation, dim: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match repr {
        Representation::Semicircle => sample_gue(dim, rng),
        Representation::Product => {
            let x = sample_gue(dim, rng);
            let y = sample_gue(dim, rng);
            let p = x.dot(&y);
            // YX = (XY)ᵀ for symmetric X, Y
            (&p + &p.t()) * s
        }
        Representation::SquareDifference => {
            let x = sample_gue(dim, rng);
            let y = sample_gue(dim, rng);
            (x.dot(&x) - y.dot(&y)) * s
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub k: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub target: Rational,
    /// `(estimate − target) / stderr`.
    pub z_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalMoments {
    pub config: SimConfig,
    pub representation: Representation,
    pub orders: Vec<MomentEstimate>,
}

impl EmpiricalMoments {
    pub fn get(&self, k: usize) -> Option<&MomentEstimate> {
        self.orders.iter().find(|m| m.k == k)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,estimate,stderr,target,z_score\n");
        for m in &self.orders {
            out.push_str(&format!(
                "{},{:?},{:?},{},{:?}\n",
                m.k, m.estimate, m.stderr, m.target, m.z_score
            ));
        }
        out
    }
}

/// Runs `cfg.trials` independent draws of `repr` and averages the
/// normalized trace moments.
pub fn simulate(cfg: &SimConfig, repr: Representation) -> Result<EmpiricalMoments> {
    cfg.validate()?;
    let per_trial: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream((repr.stream_base() << 32) | trial as u64);
            let w = sample_matrix(repr, cfg.dim, &mut rng);
            normalized_traces(&w, cfg.k_max)
        })
        .collect();
    let t = cfg.trials as f64;
    let orders = (1..=cfg.k_max)
        .map(|k| {
            let values: Vec<f64> = per_trial.iter().map(|v| v[k - 1]).collect();
            let mean = values.iter().sum::<f64>() / t;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
            let stderr = (var / t).sqrt();
            let target = repr.target(k);
            let z_score = (mean - target.to_f64()) / stderr;
            MomentEstimate {
                k,
                estimate: mean,
                stderr,
                target,
                z_score,
            }
        })
        .collect();
    Ok(EmpiricalMoments {
        config: cfg.clone(),
        representation: repr,
        orders,
    })
}

pub fn tetilla_trace_moments(cfg: &SimConfig) -> Result<EmpiricalMoments> {
    simulate(cfg, Representation::Product)
}

pub fn alternative_representation_moments(cfg: &SimConfig) -> Result<EmpiricalMoments> {
    simulate(cfg, Representation::SquareDifference)
}

pub fn semicircle_trace_moments(cfg: &SimConfig) -> Result<EmpiricalMoments> {
    simulate(cfg, Representation::Semicircle)
}

/// `|a − b| / √(se_a² + se_b²)` for one order of two estimators.
pub fn combined_z(a: &MomentEstimate, b: &MomentEstimate) -> f64 {
    (a.estimate - b.estimate).abs() / (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traces_of_a_diagonal_matrix() {
        let mut w = Array2::<f64>::zeros((2, 2));
        w[[0, 0]] = 2.0;
        w[[1, 1]] = -1.0;
        let t = normalized_traces(&w, 8);
        for (k, v) in t.iter().enumerate() {
            let expect = (2f64.powi(k as i32 + 1) + (-1f64).powi(k as i32 + 1)) / 2.0;
            assert!((v - expect).abs() < 1e-9, "k = {}", k + 1);
        }
    }

    #[test]
    fn sample_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = sample_gue(5, &mut rng);
        assert_eq!(x, x.t());
    }

    #[test]
    fn targets() {
        assert_eq!(Representation::Product.target(6), Rational::new(33, 4));
        assert_eq!(Representation::Product.target(3), Rational::from_integer(0));
        assert_eq!(Representation::Semicircle.target(4), Rational::from_integer(2));
    }

    #[test]
    fn config_limits() {
        assert!(SimConfig::new(1, 10, 0, 4).is_err());
        assert!(SimConfig::new(4096, 10, 0, 4).unwrap_err().is_capacity());
        assert!(SimConfig::new(8, 1, 0, 4).is_err());
        assert!(SimConfig::new(8, 10, 0, 9).is_err());
    }
}
