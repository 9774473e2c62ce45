//! Exact epsilon-predictors for Gaussian-mixture data distributions.
//!
//! Under the variance-preserving marginal `x_t = sqrt(ab) * x0 + sqrt(1-ab) * eps`
//! with `x0` drawn from an isotropic Gaussian mixture, the Bayes-optimal
//! denoiser `E[x0 | x_t]` is closed form: each component contributes a
//! conjugate posterior mean, weighted by its responsibility under the
//! marginal likelihood `N(x_t; sqrt(ab) * mu_k, (ab * var_k + 1 - ab) * I)`.
//! Responsibilities are computed in log space and normalized with
//! log-sum-exp, since likelihoods become sharply peaked as `ab -> 1`.
//!
//! The predictor pair (conditional on a subset of components vs. the full
//! mixture) plays the role of prompt conditioning for classifier-free
//! guidance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One isotropic mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variance: f64,
}

/// Closed-form score model for an isotropic Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureScoreModel {
    components: Vec<MixtureComponent>,
    dim: usize,
}

impl GaussianMixtureScoreModel {
    /// Validates weights (positive, summing to 1 within 1e-12), variances
    /// (positive) and mean lengths.
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyInput("mixture components"));
        }
        let dim = components[0].mean.len();
        if dim == 0 {
            return Err(Error::InvalidMixture("zero-dimensional mean".into()));
        }
        let mut total = 0.0;
        for (i, c) in components.iter().enumerate() {
            if c.mean.len() != dim {
                return Err(Error::InvalidMixture(format!(
                    "component {i} mean has length {}, expected {dim}",
                    c.mean.len()
                )));
            }
            let weight_ok = c.weight > 0.0;
            if !weight_ok {
                return Err(Error::InvalidMixture(format!(
                    "component {i} weight {} must be positive",
                    c.weight
                )));
            }
            let variance_ok = c.variance > 0.0;
            if !variance_ok {
                return Err(Error::InvalidMixture(format!(
                    "component {i} variance {} must be positive",
                    c.variance
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMixture(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { components, dim })
    }

    pub fn standard_normal(dim: usize) -> Result<Self> {
        Self::new(vec![MixtureComponent {
            weight: 1.0,
            mean: vec![0.0; dim],
            variance: 1.0,
        }])
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_input(&self, x_t: &[f64]) -> Result<()> {
        if x_t.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: x_t.len(),
                right: self.dim,
            });
        }
        Ok(())
    }

    /// Log responsibilities of each component given `x_t`, normalized so
    /// `logsumexp == 0`.
    fn log_responsibilities(&self, x_t: &[f64], alpha_bar_t: f64) -> Vec<f64> {
        let signal = alpha_bar_t.sqrt();
        let mut logs: Vec<f64> = self
            .components
            .iter()
            .map(|c| {
                // Marginal of x_t under this component: N(signal*mu, s2*I).
                let s2 = alpha_bar_t * c.variance + (1.0 - alpha_bar_t);
                let sq_dist: f64 = x_t
                    .iter()
                    .zip(&c.mean)
                    .map(|(&xi, &mi)| {
                        let d = xi - signal * mi;
                        d * d
                    })
                    .sum();
                c.weight.ln() - 0.5 * (self.dim as f64) * s2.ln() - 0.5 * sq_dist / s2
            })
            .collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        for l in &mut logs {
            *l -= lse;
        }
        logs
    }

    /// Posterior responsibilities (sum to 1).
    pub fn responsibilities(&self, x_t: &[f64], alpha_bar_t: f64) -> Result<Vec<f64>> {
        self.check_input(x_t)?;
        check_alpha_bar(alpha_bar_t, false)?;
        Ok(self
            .log_responsibilities(x_t, alpha_bar_t)
            .iter()
            .map(|l| l.exp())
            .collect())
    }

    /// Bayes-optimal denoiser `E[x0 | x_t]` at noise level `alpha_bar_t`.
    ///
    /// Valid for `0 < alpha_bar_t <= 1`; at the clean boundary it returns
    /// `x_t` itself.
    pub fn posterior_x0_mean(&self, x_t: &[f64], alpha_bar_t: f64) -> Result<Vec<f64>> {
        self.check_input(x_t)?;
        check_alpha_bar(alpha_bar_t, false)?;
        let signal = alpha_bar_t.sqrt();
        let resp = self.log_responsibilities(x_t, alpha_bar_t);
        let mut out = vec![0.0; self.dim];
        for (c, &log_r) in self.components.iter().zip(&resp) {
            let r = log_r.exp();
            let s2 = alpha_bar_t * c.variance + (1.0 - alpha_bar_t);
            // Conjugate posterior mean for this component.
            for (o, (&xi, &mi)) in out.iter_mut().zip(x_t.iter().zip(&c.mean)) {
                *o += r * (c.variance * signal * xi + (1.0 - alpha_bar_t) * mi) / s2;
            }
        }
        Ok(out)
    }

    /// Noise prediction `(x_t - sqrt(ab) * E[x0 | x_t]) / sqrt(1 - ab)`.
    ///
    /// Requires `0 < alpha_bar_t < 1` strictly; at `alpha_bar_t == 1` the
    /// denominator vanishes and callers must use the posterior mean directly.
    pub fn epsilon_hat(&self, x_t: &[f64], alpha_bar_t: f64) -> Result<Vec<f64>> {
        self.check_input(x_t)?;
        check_alpha_bar(alpha_bar_t, true)?;
        let signal = alpha_bar_t.sqrt();
        let spread = (1.0 - alpha_bar_t).sqrt();
        let x0 = self.posterior_x0_mean(x_t, alpha_bar_t)?;
        Ok(x_t
            .iter()
            .zip(&x0)
            .map(|(&xi, &x0i)| (xi - signal * x0i) / spread)
            .collect())
    }
}

fn check_alpha_bar(alpha_bar_t: f64, strict_upper: bool) -> Result<()> {
    let ok = if strict_upper {
        alpha_bar_t > 0.0 && alpha_bar_t < 1.0
    } else {
        alpha_bar_t > 0.0 && alpha_bar_t <= 1.0
    };
    if !ok {
        let bound = if strict_upper { "(0, 1)" } else { "(0, 1]" };
        return Err(Error::range(
            "alpha_bar_t",
            format!("must lie in {bound}, got {alpha_bar_t}"),
        ));
    }
    Ok(())
}

/// Conditional/unconditional predictor pair combined by CFG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPair {
    pub cond: GaussianMixtureScoreModel,
    pub uncond: GaussianMixtureScoreModel,
}

impl ConditionalPair {
    pub fn new(cond: GaussianMixtureScoreModel, uncond: GaussianMixtureScoreModel) -> Result<Self> {
        if cond.dim() != uncond.dim() {
            return Err(Error::DimensionMismatch {
                left: cond.dim(),
                right: uncond.dim(),
            });
        }
        Ok(Self { cond, uncond })
    }

    /// Builds the pair from a scenario: the conditional model keeps only the
    /// target components (reweighted to sum 1), the unconditional model is
    /// the full mixture.
    pub fn from_scenario(scenario: &ScenarioSpec) -> Result<Self> {
        scenario.validate()?;
        let uncond = GaussianMixtureScoreModel::new(scenario.components.clone())?;
        let picked: Vec<MixtureComponent> = scenario
            .target
            .iter()
            .map(|&i| scenario.components[i].clone())
            .collect();
        let total: f64 = picked.iter().map(|c| c.weight).sum();
        let cond = GaussianMixtureScoreModel::new(
            picked
                .into_iter()
                .map(|mut c| {
                    c.weight /= total;
                    c
                })
                .collect(),
        )?;
        Self::new(cond, uncond)
    }

    pub fn dim(&self) -> usize {
        self.cond.dim()
    }
}

/// Mixture scenario as consumed from harness configs: the components of the
/// data distribution plus the conditioning target (the "prompt").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub dimension: usize,
    pub components: Vec<MixtureComponent>,
    pub target: Vec<usize>,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::EmptyInput("scenario components"));
        }
        if self.target.is_empty() {
            return Err(Error::EmptyInput("scenario target"));
        }
        for c in &self.components {
            if c.mean.len() != self.dimension {
                return Err(Error::InvalidMixture(format!(
                    "scenario `{}`: mean length {} != dimension {}",
                    self.name,
                    c.mean.len(),
                    self.dimension
                )));
            }
        }
        for &i in &self.target {
            if i >= self.components.len() {
                return Err(Error::UnknownTarget {
                    index: i,
                    len: self.components.len(),
                });
            }
        }
        Ok(())
    }
}
