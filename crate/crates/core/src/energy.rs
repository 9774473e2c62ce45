//! Latent energy, energy clipping, adaptive thresholds, noise refresh, and
//! cross-run trajectory aggregation.
//!
//! Energy is the mean squared latent component, `E = ||x||^2 / N`. Clipping
//! rescales the latent whenever its energy exceeds a cap `E_max`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the clip rescale factor is computed once `E > E_max`.
///
/// `Paper` applies the factor `E_max / E` as printed, which drives post-clip
/// energy to `E_max^2 / E`. `Sqrt` applies `sqrt(E_max / E)`, landing exactly
/// on `E_max`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipMode {
    #[default]
    Paper,
    Sqrt,
}

/// Energy-aware enhancement switches for a sampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyControl {
    pub clipping_enabled: bool,
    pub e_base: f64,
    pub gamma: f64,
    pub adaptive_threshold: bool,
    pub refresh_enabled: bool,
    /// Position of the refresh, as a fraction of the run (0, 1).
    pub refresh_fraction: f64,
    /// Convex blend weight used when the refresh fires; not part of the
    /// config surface, see [`noise_refresh`].
    #[serde(default = "default_refresh_blend")]
    pub refresh_blend: f64,
    #[serde(default)]
    pub clip_mode: ClipMode,
}

fn default_refresh_blend() -> f64 {
    0.5
}

impl Default for EnergyControl {
    fn default() -> Self {
        Self {
            clipping_enabled: false,
            e_base: 1.0,
            gamma: 0.0,
            adaptive_threshold: false,
            refresh_enabled: false,
            refresh_fraction: 0.5,
            refresh_blend: 0.5,
            clip_mode: ClipMode::Paper,
        }
    }
}

impl EnergyControl {
    pub fn validate(&self) -> Result<()> {
        if self.adaptive_threshold && !self.clipping_enabled {
            return Err(Error::range(
                "energy_control",
                "adaptive_threshold requires clipping_enabled",
            ));
        }
        let e_base_ok = self.e_base.is_finite() && self.e_base > 0.0;
        if self.clipping_enabled && !e_base_ok {
            return Err(Error::range("e_base", "must be > 0"));
        }
        if self.gamma < 0.0 {
            return Err(Error::range("gamma", "must be >= 0"));
        }
        if self.refresh_enabled && !(self.refresh_fraction > 0.0 && self.refresh_fraction < 1.0) {
            return Err(Error::range("refresh_fraction", "must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.refresh_blend) {
            return Err(Error::range("refresh_blend", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Cap in effect at step `t` of `T`: `e_base` or the adaptive ramp.
    pub fn threshold_at(&self, t: usize, total: usize) -> f64 {
        if self.adaptive_threshold {
            adaptive_threshold(self.e_base, self.gamma, t, total)
        } else {
            self.e_base
        }
    }
}

/// Per-step energy sequence of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrajectory {
    energies: Vec<f64>,
}

impl EnergyTrajectory {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::EmptyInput("energy trajectory"));
        }
        if let Some((i, &e)) = energies
            .iter()
            .enumerate()
            .find(|(_, e)| !e.is_finite() || **e < 0.0)
        {
            return Err(Error::NonFiniteEnergy { step: i, value: e });
        }
        Ok(Self { energies })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Number of sampling steps; entry 0 is the initial noise state.
    pub fn step_count(&self) -> usize {
        self.energies.len() - 1
    }
}

/// `E = ||x||^2 / N`.
pub fn energy(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyInput("latent vector"));
    }
    let sumsq: f64 = x.iter().map(|v| v * v).sum();
    Ok(sumsq / x.len() as f64)
}

/// Rescales `x` by `min(1, E_max / E)` (or its square root in [`ClipMode::Sqrt`]).
/// Returns the possibly rescaled vector and whether clipping activated.
pub fn clip_energy(x: &[f64], e_max: f64, mode: ClipMode) -> Result<(Vec<f64>, bool)> {
    // NaN fails the comparison; +inf is a valid never-clipping cap.
    let e_max_ok = e_max > 0.0;
    if !e_max_ok {
        return Err(Error::range("e_max", "must be > 0"));
    }
    let e = energy(x)?;
    if e <= e_max {
        return Ok((x.to_vec(), false));
    }
    let factor = match mode {
        ClipMode::Paper => e_max / e,
        ClipMode::Sqrt => (e_max / e).sqrt(),
    };
    Ok((x.iter().map(|v| v * factor).collect(), true))
}

/// Step-dependent cap `E_max(t) = E_base * (1 + gamma * t / T)`.
pub fn adaptive_threshold(e_base: f64, gamma: f64, t: usize, total: usize) -> f64 {
    e_base * (1.0 + gamma * t as f64 / total.max(1) as f64)
}

/// Convex blend in standard-deviation space between the latent and a fresh
/// draw at the current noise level:
/// `out = sqrt(1 - blend) * x + sqrt(blend) * sqrt(1 - alpha_bar_t) * z`.
///
/// Per-component output variance is `(1 - blend) * Var(x) + blend * (1 - alpha_bar_t)`;
/// `blend = 0` is the identity.
pub fn noise_refresh(x: &[f64], alpha_bar_t: f64, z: &[f64], blend: f64) -> Result<Vec<f64>> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: z.len(),
        });
    }
    if !(alpha_bar_t > 0.0 && alpha_bar_t < 1.0) {
        return Err(Error::range(
            "alpha_bar_t",
            format!("refresh requires 0 < alpha_bar < 1, got {alpha_bar_t}"),
        ));
    }
    if !(0.0..=1.0).contains(&blend) {
        return Err(Error::range("blend", "must lie in [0, 1]"));
    }
    if blend == 0.0 {
        return Ok(x.to_vec());
    }
    let keep = (1.0 - blend).sqrt();
    let fresh = blend.sqrt() * (1.0 - alpha_bar_t).sqrt();
    Ok(x.iter()
        .zip(z)
        .map(|(&xi, &zi)| keep * xi + fresh * zi)
        .collect())
}

/// Per-step mean and population variance over the step index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub mean: f64,
    pub variance: f64,
}

/// Per-step mean/variance of energy across runs. All trajectories must have
/// equal length.
pub fn aggregate_trajectories(runs: &[EnergyTrajectory]) -> Result<Vec<StepStats>> {
    let first = runs.first().ok_or(Error::EmptyInput("trajectory list"))?;
    let len = first.energies().len();
    for r in runs {
        if r.energies().len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: r.energies().len(),
            });
        }
    }
    let n = runs.len() as f64;
    let stats = (0..len)
        .map(|i| {
            let mean = runs.iter().map(|r| r.energies()[i]).sum::<f64>() / n;
            let variance = runs
                .iter()
                .map(|r| {
                    let d = r.energies()[i] - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            StepStats { mean, variance }
        })
        .collect();
    Ok(stats)
}
