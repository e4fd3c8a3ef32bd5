//! Monte-Carlo check of the bounds.
//!
//! Each trial draws a true temperature from the prior, simulates `v` energy
//! measurements on the probe, forms an estimate from the grid posterior and
//! records the squared log error. The average over trials estimates the mean
//! logarithmic error of the estimator, which must not fall below the optimal
//! biased bound beyond statistical fluctuation.
//!
//! Trial `i` draws from a ChaCha8 stream selected by `(seed, i)`, so a batch
//! is a pure function of its inputs regardless of how trials are scheduled.

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec::Execution;
use crate::grid::{TemperatureGrid, DEFAULT_NODES};
use crate::models::{FisherModel, ModelSpec, NLevelLikelihood, Prior, SpinGasLikelihood};
use crate::quadrature::simpson_weights;

/// A measurable probe: either likelihood from the built-in models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probe {
    SpinGas(SpinGasLikelihood),
    NLevel(NLevelLikelihood),
}

impl Probe {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        match *spec {
            ModelSpec::SpinGas { n, epsilon } => {
                Ok(Probe::SpinGas(SpinGasLikelihood::new(n, epsilon)?))
            }
            ModelSpec::NLevel { levels, epsilon } => {
                Ok(Probe::NLevel(NLevelLikelihood::new(levels, epsilon)?))
            }
        }
    }

    pub fn fisher_model(&self) -> FisherModel {
        match self {
            Probe::SpinGas(l) => l.fisher_model(),
            Probe::NLevel(l) => l.fisher_model(),
        }
    }

    fn gap(&self) -> f64 {
        match self {
            Probe::SpinGas(l) => l.gap(),
            Probe::NLevel(l) => l.gap(),
        }
    }

    /// Largest possible outcome of one measurement.
    pub fn max_outcome(&self) -> u64 {
        match self {
            Probe::SpinGas(l) => l.n(),
            Probe::NLevel(_) => 1,
        }
    }

    fn degeneracy_log(&self) -> f64 {
        match self {
            Probe::SpinGas(_) => 0.0,
            Probe::NLevel(l) => l.degeneracy_log(),
        }
    }

    /// One energy measurement at temperature `theta`: the number of excited
    /// spins, or `0`/`1` for ground/excited on the level probe.
    pub fn sample<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> u64 {
        match self {
            Probe::SpinGas(l) => Binomial::new(l.n(), l.excited_probability(theta))
                .expect("excitation probability lies in [0, 1]")
                .sample(rng),
            Probe::NLevel(l) => Bernoulli::new(l.excited_probability(theta))
                .expect("excitation probability lies in [0, 1]")
                .sample(rng) as u64,
        }
    }
}

/// Draws a temperature from the prior by inverse-CDF sampling.
pub fn sample_true_temperature<R: Rng + ?Sized>(prior: &Prior, rng: &mut R) -> f64 {
    prior.quantile(rng.random::<f64>())
}

/// `v` independent measurements at temperature `theta`.
pub fn simulate_measurements<R: Rng + ?Sized>(
    probe: &Probe,
    theta: f64,
    v: u64,
    rng: &mut R,
) -> Vec<u64> {
    (0..v).map(|_| probe.sample(theta, rng)).collect()
}

/// Point estimator applied to the grid posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// `exp(E[ln theta | data])`, the Bayes rule for squared log error.
    #[default]
    PosteriorMeanLog,
    /// `E[theta | data]`.
    PosteriorMean,
    /// Grid maximizer of the likelihood alone.
    MaxLikelihood,
}

/// Prior and likelihood terms tabulated on a temperature grid.
///
/// Outcomes enter only through their sum `S` and count, since for both
/// probes `ln p(data | theta) = -S x + S ln(N-1) - T ln(1 + (N-1) e^{-x}) + const`
/// with `x = eps/theta` and `T` the number of two-level subsystems measured.
#[derive(Debug, Clone)]
pub struct PosteriorGrid {
    probe: Probe,
    theta: Vec<f64>,
    log_theta: Vec<f64>,
    /// ln(prior density * jacobian * quadrature weight)
    log_prior_weight: Vec<f64>,
    x: Vec<f64>,
    softplus: Vec<f64>,
}

impl PosteriorGrid {
    pub fn new(probe: Probe, prior: &Prior, grid: &TemperatureGrid) -> Result<Self> {
        let weights = simpson_weights(grid.len(), grid.step())?;
        let k_log = probe.degeneracy_log();
        let gap = probe.gap();
        let theta = grid.nodes().to_vec();
        let log_theta = theta.iter().map(|t| t.ln()).collect();
        let log_prior_weight = theta
            .iter()
            .enumerate()
            .map(|(i, &t)| (prior.density(t) * grid.jacobian(i) * weights[i]).ln())
            .collect();
        let x: Vec<f64> = theta.iter().map(|t| gap / t).collect();
        let softplus = x.iter().map(|&x| (k_log - x).exp().ln_1p()).collect();
        Ok(PosteriorGrid {
            probe,
            theta,
            log_theta,
            log_prior_weight,
            x,
            softplus,
        })
    }

    fn summarize(&self, outcomes: &[u64]) -> Result<(f64, f64)> {
        if outcomes.is_empty() {
            return domain("at least one measurement outcome is required");
        }
        let max = self.probe.max_outcome();
        if let Some(o) = outcomes.iter().find(|&&o| o > max) {
            return domain(format!("outcome {o} exceeds the probe maximum {max}"));
        }
        let excitations: u64 = outcomes.iter().sum();
        let count = outcomes.len() as u64 * max;
        Ok((excitations as f64, count as f64))
    }

    fn log_likelihood(&self, i: usize, excitations: f64, count: f64) -> f64 {
        -excitations * self.x[i] + excitations * self.probe.degeneracy_log()
            - count * self.softplus[i]
    }

    /// Point estimate of the temperature from `outcomes`.
    pub fn estimate(&self, outcomes: &[u64], estimator: Estimator) -> Result<f64> {
        let (s, t) = self.summarize(outcomes)?;
        if estimator == Estimator::MaxLikelihood {
            let mut best = (f64::NEG_INFINITY, 0);
            for i in 0..self.theta.len() {
                let l = self.log_likelihood(i, s, t);
                if l > best.0 {
                    best = (l, i);
                }
            }
            if !best.0.is_finite() {
                return Err(Error::Estimation(
                    "likelihood vanishes on the whole grid".into(),
                ));
            }
            return Ok(self.theta[best.1]);
        }
        let log_post: Vec<f64> = (0..self.theta.len())
            .map(|i| self.log_prior_weight[i] + self.log_likelihood(i, s, t))
            .collect();
        let peak = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(Error::Estimation(
                "posterior vanishes on the whole grid".into(),
            ));
        }
        let target = match estimator {
            Estimator::PosteriorMeanLog => &self.log_theta,
            _ => &self.theta,
        };
        let (mut norm, mut acc) = (0.0, 0.0);
        for (lp, y) in log_post.iter().zip(target) {
            let w = (lp - peak).exp();
            norm += w;
            acc += w * y;
        }
        let mean = acc / norm;
        Ok(match estimator {
            Estimator::PosteriorMeanLog => mean.exp(),
            _ => mean,
        })
    }
}

/// Posterior-mean-of-log estimate from `outcomes` on `grid`.
pub fn bayes_log_estimator(
    outcomes: &[u64],
    probe: &Probe,
    prior: &Prior,
    grid: &TemperatureGrid,
) -> Result<f64> {
    PosteriorGrid::new(*probe, prior, grid)?.estimate(outcomes, Estimator::PosteriorMeanLog)
}

/// Per-trial record kept when requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub theta: f64,
    pub outcomes: Vec<u64>,
    pub estimate: f64,
}

/// Result of a Monte-Carlo batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialBatch {
    pub trials: usize,
    pub v: u64,
    pub seed: u64,
    pub estimator: Estimator,
    pub empirical_mle: f64,
    pub standard_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<TrialRecord>>,
}

/// Settings for [`run_trials`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub v: u64,
    pub trials: usize,
    pub seed: u64,
    pub grid_nodes: usize,
    pub estimator: Estimator,
    pub keep_records: bool,
    pub exec: Execution,
}

impl McOptions {
    pub fn new(v: u64, trials: usize, seed: u64) -> Self {
        McOptions {
            v,
            trials,
            seed,
            grid_nodes: DEFAULT_NODES,
            estimator: Estimator::default(),
            keep_records: false,
            exec: Execution::default(),
        }
    }
}

/// RNG stream of trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs a Monte-Carlo batch.
pub fn run_trials(probe: &Probe, prior: &Prior, opts: &McOptions) -> Result<TrialBatch> {
    if opts.v == 0 {
        return domain("number of measurements v must be at least 1");
    }
    if opts.trials < 100 {
        return domain(format!(
            "at least 100 trials are required, got {}",
            opts.trials
        ));
    }
    let grid = TemperatureGrid::log_uniform(prior.a1(), prior.a2(), opts.grid_nodes)?;
    let posterior = PosteriorGrid::new(*probe, prior, &grid)?;
    let results = opts
        .exec
        .map(opts.trials, |i| -> Result<(f64, Option<TrialRecord>)> {
            let mut rng = trial_rng(opts.seed, i);
            let theta = sample_true_temperature(prior, &mut rng);
            let outcomes = simulate_measurements(probe, theta, opts.v, &mut rng);
            let estimate = posterior.estimate(&outcomes, opts.estimator)?;
            let err = (estimate.ln() - theta.ln()).powi(2);
            let record = opts.keep_records.then_some(TrialRecord {
                theta,
                outcomes,
                estimate,
            });
            Ok((err, record))
        });
    let mut errors = Vec::with_capacity(opts.trials);
    let mut records = opts.keep_records.then(|| Vec::with_capacity(opts.trials));
    for r in results {
        let (err, rec) = r?;
        errors.push(err);
        if let (Some(list), Some(rec)) = (records.as_mut(), rec) {
            list.push(rec);
        }
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(TrialBatch {
        trials: opts.trials,
        v: opts.v,
        seed: opts.seed,
        estimator: opts.estimator,
        empirical_mle: mean,
        standard_error: (var / n).sqrt(),
        records,
    })
}

/// Empirical mean logarithmic error of the posterior-mean-of-log estimator.
pub fn empirical_mle(
    probe: &Probe,
    prior: &Prior,
    v: u64,
    trials: usize,
    seed: u64,
) -> Result<TrialBatch> {
    run_trials(probe, prior, &McOptions::new(v, trials, seed))
}
