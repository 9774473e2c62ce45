//! Variance-preserving noise schedule, timestep grid, and exact forward diffusion.
//!
//! The forward process mixes a clean latent with Gaussian noise through the
//! closed-form marginal `x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise`,
//! where `alpha_bar_t` is the running product of `1 - beta_u`. Timesteps are
//! addressed as `i64`; the sentinel [`CLEAN_TIMESTEP`] (`-1`) denotes the clean
//! boundary where `alpha_bar` is exactly 1, so reverse-process formulas never
//! divide by zero when they land on clean data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timestep sentinel for the clean boundary (`alpha_bar == 1`).
pub const CLEAN_TIMESTEP: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Linear,
}

/// The `beta_t` sequence and derived `alpha_bar_t` products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    kind: ScheduleKind,
    t_train: usize,
    beta: Vec<f64>,
    alpha_bar: Vec<f64>,
}

impl NoiseSchedule {
    /// Builds a schedule with `beta` interpolated linearly from `beta_min` to
    /// `beta_max` over `t_train` timesteps. With `t_train == 1` the single beta
    /// is `beta_min`.
    pub fn new(kind: ScheduleKind, t_train: usize, beta_min: f64, beta_max: f64) -> Result<Self> {
        if t_train == 0 {
            return Err(Error::range("t_train", "must be >= 1"));
        }
        if !(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0) {
            return Err(Error::range(
                "beta",
                format!("need 0 < beta_min <= beta_max < 1, got ({beta_min}, {beta_max})"),
            ));
        }
        let ScheduleKind::Linear = kind;
        let beta: Vec<f64> = if t_train == 1 {
            vec![beta_min]
        } else {
            (0..t_train)
                .map(|t| beta_min + (beta_max - beta_min) * t as f64 / (t_train - 1) as f64)
                .collect()
        };
        let mut alpha_bar = Vec::with_capacity(t_train);
        let mut prod = 1.0;
        for &b in &beta {
            prod *= 1.0 - b;
            alpha_bar.push(prod);
        }
        Ok(Self {
            kind,
            t_train,
            beta,
            alpha_bar,
        })
    }

    /// The standard default: linear 1e-4 -> 0.02 over 1000 training timesteps.
    pub fn default_linear() -> Self {
        Self::new(ScheduleKind::Linear, 1000, 1e-4, 0.02).expect("default schedule is valid")
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn t_train(&self) -> usize {
        self.t_train
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha_bar_values(&self) -> &[f64] {
        &self.alpha_bar
    }

    /// `alpha_bar` at timestep `t`; `t == CLEAN_TIMESTEP` yields exactly 1.
    pub fn alpha_bar(&self, t: i64) -> Result<f64> {
        if t == CLEAN_TIMESTEP {
            return Ok(1.0);
        }
        usize::try_from(t)
            .ok()
            .and_then(|i| self.alpha_bar.get(i).copied())
            .ok_or_else(|| {
                Error::range("timestep", format!("t={t} outside [-1, {})", self.t_train))
            })
    }
}

/// Strictly decreasing selection of sampling timesteps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimestepGrid {
    steps: usize,
    indices: Vec<i64>,
}

impl TimestepGrid {
    /// Evenly strided indices starting at `t_train - 1`. Stride is
    /// `t_train / steps`, so the last index is the one whose `alpha_bar`
    /// is closest to 1 among those selected.
    pub fn new(schedule: &NoiseSchedule, steps: usize) -> Result<Self> {
        let t_train = schedule.t_train();
        if steps == 0 || steps > t_train {
            return Err(Error::range(
                "steps",
                format!("need 1 <= steps <= {t_train}, got {steps}"),
            ));
        }
        let stride = (t_train / steps) as i64;
        let first = t_train as i64 - 1;
        let indices = (0..steps as i64).map(|i| first - i * stride).collect();
        Ok(Self { steps, indices })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    /// Timestep reached after transition `k` (0-based); the final transition
    /// lands on the clean boundary.
    pub fn target_of(&self, k: usize) -> i64 {
        self.indices.get(k + 1).copied().unwrap_or(CLEAN_TIMESTEP)
    }
}

/// A latent vector pinned to a timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentState {
    pub x: Vec<f64>,
    pub t: i64,
}

impl LatentState {
    pub fn new(x: Vec<f64>, t: i64) -> Result<Self> {
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::range(
                "latent",
                format!("non-finite component {bad}"),
            ));
        }
        Ok(Self { x, t })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Exact forward marginal `x_t = sqrt(ab) * x0 + sqrt(1 - ab) * noise`.
pub fn forward_diffuse(
    x0: &[f64],
    t: i64,
    noise: &[f64],
    schedule: &NoiseSchedule,
) -> Result<LatentState> {
    if x0.len() != noise.len() {
        return Err(Error::DimensionMismatch {
            left: x0.len(),
            right: noise.len(),
        });
    }
    let ab = schedule.alpha_bar(t)?;
    let signal = ab.sqrt();
    let spread = (1.0 - ab).sqrt();
    let x = x0
        .iter()
        .zip(noise)
        .map(|(&x0i, &ni)| signal * x0i + spread * ni)
        .collect();
    LatentState::new(x, t)
}
