//! Reverse-process samplers (DDIM, Euler-ancestral, DPM++ 2M) and the guided
//! sampling loop with energy instrumentation.
//!
//! All samplers share the epsilon-parameterization with `alpha = sqrt(ab)` and
//! `sigma = sqrt(1 - ab)`. A run makes `steps` transitions over the timestep
//! grid; the final transition lands on the clean boundary (`alpha_bar == 1`),
//! so the terminal state is the sampler's x0 estimate. Trajectories therefore
//! carry `steps + 1` entries, the first being the initial noise draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::energy::{clip_energy, energy, EnergyControl};
use crate::error::{Error, Result};
use crate::guidance::{combine_cfg, GuidanceSchedule};
use crate::oracle::ConditionalPair;
use crate::schedule::{NoiseSchedule, TimestepGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Ddim,
    EulerAncestral,
    DpmppTwoM,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 3] = [
        SamplerKind::Ddim,
        SamplerKind::EulerAncestral,
        SamplerKind::DpmppTwoM,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Ddim => "ddim",
            SamplerKind::EulerAncestral => "euler_ancestral",
            SamplerKind::DpmppTwoM => "dpmpp_2m",
        }
    }
}

/// One recorded step of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub step: usize,
    pub timestep: i64,
    pub s_effective: f64,
    pub energy: f64,
    pub clipped: bool,
    pub refreshed: bool,
}

/// Full trace of one sampling run: `steps + 1` entries plus the terminal
/// latent (the x0 estimate delivered by the final transition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub sampler: SamplerKind,
    pub seed: u64,
    pub steps: usize,
    pub entries: Vec<StepEntry>,
    pub final_latent: Vec<f64>,
}

impl RunRecord {
    pub fn energy_trajectory(&self) -> crate::energy::EnergyTrajectory {
        crate::energy::EnergyTrajectory::new(self.entries.iter().map(|e| e.energy).collect())
            .expect("run records hold finite energies")
    }
}

fn check_pair(x: &[f64], eps: &[f64]) -> Result<()> {
    if x.len() != eps.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: eps.len(),
        });
    }
    Ok(())
}

fn check_alpha_bars(alpha_bar_t: f64, alpha_bar_next: f64) -> Result<()> {
    if !(alpha_bar_t > 0.0 && alpha_bar_t < 1.0) {
        return Err(Error::range(
            "alpha_bar_t",
            format!("must lie in (0, 1), got {alpha_bar_t}"),
        ));
    }
    if !(alpha_bar_next > 0.0 && alpha_bar_next <= 1.0) {
        return Err(Error::range(
            "alpha_bar_next",
            format!("must lie in (0, 1], got {alpha_bar_next}"),
        ));
    }
    Ok(())
}

fn predict_x0(x_t: &[f64], eps_hat: &[f64], alpha_bar_t: f64) -> Vec<f64> {
    let signal = alpha_bar_t.sqrt();
    let spread = (1.0 - alpha_bar_t).sqrt();
    x_t.iter()
        .zip(eps_hat)
        .map(|(&xi, &ei)| (xi - spread * ei) / signal)
        .collect()
}

/// Deterministic DDIM update (eta = 0):
/// `x0 = (x_t - sqrt(1-ab_t) * eps) / sqrt(ab_t)`, then
/// `out = sqrt(ab_next) * x0 + sqrt(1-ab_next) * eps`.
pub fn ddim_step(
    x_t: &[f64],
    eps_hat: &[f64],
    alpha_bar_t: f64,
    alpha_bar_next: f64,
) -> Result<Vec<f64>> {
    check_pair(x_t, eps_hat)?;
    check_alpha_bars(alpha_bar_t, alpha_bar_next)?;
    let x0 = predict_x0(x_t, eps_hat, alpha_bar_t);
    let signal = alpha_bar_next.sqrt();
    let spread = (1.0 - alpha_bar_next).sqrt();
    Ok(x0
        .iter()
        .zip(eps_hat)
        .map(|(&x0i, &ei)| signal * x0i + spread * ei)
        .collect())
}

/// Ancestral update (eta = 1): injects `sigma_up * z` of fresh noise with
/// `sigma_up^2 = ((1-ab_next)/(1-ab_t)) * (1 - ab_t/ab_next)`.
///
/// Tiny negative radicands from rounding near the terminal step are clamped
/// to zero; anything larger is a range error.
pub fn euler_ancestral_step(
    x_t: &[f64],
    eps_hat: &[f64],
    alpha_bar_t: f64,
    alpha_bar_next: f64,
    z: &[f64],
) -> Result<Vec<f64>> {
    check_pair(x_t, eps_hat)?;
    check_pair(x_t, z)?;
    check_alpha_bars(alpha_bar_t, alpha_bar_next)?;
    let sigma_up_sq = guard_radicand(
        ((1.0 - alpha_bar_next) / (1.0 - alpha_bar_t)) * (1.0 - alpha_bar_t / alpha_bar_next),
        "sigma_up^2",
    )?;
    let dir_sq = guard_radicand(1.0 - alpha_bar_next - sigma_up_sq, "direction radicand")?;
    let x0 = predict_x0(x_t, eps_hat, alpha_bar_t);
    let signal = alpha_bar_next.sqrt();
    let dir = dir_sq.sqrt();
    let sigma_up = sigma_up_sq.sqrt();
    Ok(x0
        .iter()
        .zip(eps_hat.iter().zip(z))
        .map(|(&x0i, (&ei, &zi))| signal * x0i + dir * ei + sigma_up * zi)
        .collect())
}

fn guard_radicand(value: f64, name: &'static str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value > -1e-12 {
        log::warn!("clamping tiny negative {name} ({value}) to zero");
        Ok(0.0)
    } else {
        Err(Error::range(
            "radicand",
            format!("{name} is negative ({value}); alpha_bar inputs out of order"),
        ))
    }
}

/// Half-log-SNR `lambda = ln(alpha / sigma)` at noise level `ab`.
pub fn half_log_snr(alpha_bar: f64) -> f64 {
    0.5 * (alpha_bar / (1.0 - alpha_bar)).ln()
}

/// DPM-Solver++(2M) data-prediction update.
///
/// `lambdas` is `(lambda_prev2, lambda_prev, lambda_curr)` where `prev2` is
/// absent on the first step. With history, the update extrapolates the two
/// x0 predictions:
/// `r = (lambda_prev - lambda_prev2) / h`,
/// `D = x0_curr + (x0_curr - x0_prev) / (2r)`,
/// `out = (sigma_curr/sigma_prev) * x_prev - alpha_curr * (exp(-h) - 1) * D`.
pub fn dpmpp_2m_step(
    x_prev: &[f64],
    x0_pred_curr: &[f64],
    x0_pred_prev: Option<&[f64]>,
    lambdas: (Option<f64>, f64, f64),
    alpha_curr: f64,
    sigma_prev: f64,
    sigma_curr: f64,
) -> Result<Vec<f64>> {
    check_pair(x_prev, x0_pred_curr)?;
    let (lambda_prev2, lambda_prev, lambda_curr) = lambdas;
    if !lambda_prev.is_finite() || !lambda_curr.is_finite() {
        return Err(Error::range(
            "lambda",
            format!("lambda values must be finite, got ({lambda_prev}, {lambda_curr})"),
        ));
    }
    let h = lambda_curr - lambda_prev;
    if h == 0.0 {
        return Err(Error::DegenerateStep("h == 0".into()));
    }
    let scale = sigma_curr / sigma_prev;
    let coeff = -alpha_curr * ((-h).exp() - 1.0);
    let d: Vec<f64> = match x0_pred_prev {
        None => x0_pred_curr.to_vec(),
        Some(prev) => {
            check_pair(x0_pred_curr, prev)?;
            let lambda_prev2 = lambda_prev2.ok_or_else(|| {
                Error::DegenerateStep("multistep update requires lambda_prev2".into())
            })?;
            if !lambda_prev2.is_finite() {
                return Err(Error::range("lambda", "lambda_prev2 must be finite"));
            }
            let r = (lambda_prev - lambda_prev2) / h;
            if r == 0.0 {
                return Err(Error::DegenerateStep("repeated lambda history".into()));
            }
            x0_pred_curr
                .iter()
                .zip(prev)
                .map(|(&c, &p)| c + (c - p) / (2.0 * r))
                .collect()
        }
    };
    Ok(x_prev
        .iter()
        .zip(&d)
        .map(|(&xp, &di)| scale * xp + coeff * di)
        .collect())
}

/// Runs the full guided sampling loop.
///
/// The latent starts at a seeded `N(0, I)` draw. Each transition `k` of
/// `steps` evaluates the guidance scale at step index `k`, queries both
/// oracle branches, combines them, advances with the chosen sampler, then
/// applies noise refresh and energy clipping (in that order). Entry `k + 1`
/// records the scale used, the post-processing energy, and the enhancement
/// flags; entry 0 records the initial noise state with the first scale.
/// Clipping thresholds are evaluated at the produced entry's index.
///
/// Deterministic for a given `(config, seed)`: DDIM draws no noise beyond
/// the initial state, the stochastic samplers consume a private ChaCha
/// stream. A noise refresh resets the DPM++ 2M prediction history, since
/// extrapolating across the reset would mix incompatible latents.
pub fn run_sampler(
    pair: &ConditionalPair,
    schedule: &NoiseSchedule,
    grid: &TimestepGrid,
    guidance: &GuidanceSchedule,
    sampler: SamplerKind,
    energy_ctrl: &EnergyControl,
    seed: u64,
) -> Result<RunRecord> {
    energy_ctrl.validate()?;
    let steps = grid.steps();
    let dim = pair.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut x: Vec<f64> = (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();

    // Entry index at which the refresh fires (none if the run is too short).
    let refresh_entry = if energy_ctrl.refresh_enabled && steps >= 2 {
        let r = (energy_ctrl.refresh_fraction * steps as f64).round() as usize;
        Some(r.clamp(1, steps - 1))
    } else {
        None
    };

    let mut entries = Vec::with_capacity(steps + 1);
    let s_first = guidance.evaluate(0, steps)?;
    let e0 = energy(&x)?;
    entries.push(StepEntry {
        step: 0,
        timestep: grid.indices()[0],
        s_effective: s_first,
        energy: e0,
        clipped: false,
        refreshed: false,
    });

    let mut prev_x0_pred: Option<Vec<f64>> = None;
    let mut lambda_prev2: Option<f64> = None;

    for k in 0..steps {
        let t_curr = grid.indices()[k];
        let t_next = grid.target_of(k);
        let ab_curr = schedule.alpha_bar(t_curr)?;
        let ab_next = schedule.alpha_bar(t_next)?;

        let s = guidance.evaluate(k, steps)?;
        let eps_cond = pair.cond.epsilon_hat(&x, ab_curr)?;
        let eps_uncond = pair.uncond.epsilon_hat(&x, ab_curr)?;
        let eps = combine_cfg(&eps_cond, &eps_uncond, s)?;

        x = match sampler {
            SamplerKind::Ddim => ddim_step(&x, &eps, ab_curr, ab_next)?,
            SamplerKind::EulerAncestral => {
                let z: Vec<f64> = (0..dim)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                euler_ancestral_step(&x, &eps, ab_curr, ab_next, &z)?
            }
            SamplerKind::DpmppTwoM => {
                let x0_pred = predict_x0(&x, &eps, ab_curr);
                let lambda_prev = half_log_snr(ab_curr);
                let out = if ab_next == 1.0 {
                    // Terminal hop: sigma_curr = 0 makes lambda diverge; the
                    // first-order limit of the update is the x0 prediction.
                    x0_pred.clone()
                } else {
                    let lambda_curr = half_log_snr(ab_next);
                    dpmpp_2m_step(
                        &x,
                        &x0_pred,
                        prev_x0_pred.as_deref(),
                        (lambda_prev2, lambda_prev, lambda_curr),
                        ab_next.sqrt(),
                        (1.0 - ab_curr).sqrt(),
                        (1.0 - ab_next).sqrt(),
                    )?
                };
                prev_x0_pred = Some(x0_pred);
                lambda_prev2 = Some(lambda_prev);
                out
            }
        };

        let entry_index = k + 1;
        let mut refreshed = false;
        if refresh_entry == Some(entry_index) {
            let ab_here = schedule.alpha_bar(t_next)?;
            let z: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            x = crate::energy::noise_refresh(&x, ab_here, &z, energy_ctrl.refresh_blend)?;
            refreshed = true;
            prev_x0_pred = None;
            lambda_prev2 = None;
        }

        let mut clipped = false;
        if energy_ctrl.clipping_enabled {
            let cap = energy_ctrl.threshold_at(entry_index, steps);
            let (cx, did) = clip_energy(&x, cap, energy_ctrl.clip_mode)?;
            x = cx;
            clipped = did;
        }

        let e = energy(&x)?;
        if !e.is_finite() {
            return Err(Error::NonFiniteEnergy {
                step: entry_index,
                value: e,
            });
        }
        entries.push(StepEntry {
            step: entry_index,
            timestep: t_next,
            s_effective: s,
            energy: e,
            clipped,
            refreshed,
        });
    }

    Ok(RunRecord {
        sampler,
        seed,
        steps,
        entries,
        final_latent: x,
    })
}
