//! Desk-scale diffusion sampling laboratory.
//!
//! Everything a neural denoiser would normally hide is replaced by
//! closed-form Gaussian-mixture oracles, so sampler behavior, guidance
//! schedules, and latent-energy dynamics can be verified exactly:
//!
//! * [`schedule`] — variance-preserving noise schedule, timestep grid, and
//!   the exact forward marginal.
//! * [`oracle`] — Bayes-optimal denoisers for isotropic Gaussian mixtures
//!   and the conditional/unconditional pair used for guidance.
//! * [`guidance`] — the CFG combination rule and the time-indexed schedule
//!   family (fixed, linear-decreasing, cosine, step, exponential, sigmoid).
//! * [`samplers`] — DDIM, Euler-ancestral, and DPM++ 2M steps plus the full
//!   guided sampling loop with energy hooks.
//! * [`energy`] — latent energy, clipping, adaptive thresholds, noise
//!   refresh, and cross-run aggregation.
//! * [`metrics`] — the four energy scores (stability, consistency,
//!   efficiency, convergence) and grouped reporting.

pub mod energy;
pub mod error;
pub mod guidance;
pub mod metrics;
pub mod oracle;
pub mod samplers;
pub mod schedule;

pub use energy::{
    adaptive_threshold, aggregate_trajectories, clip_energy, energy, noise_refresh, ClipMode,
    EnergyControl, EnergyTrajectory, StepStats,
};
pub use error::{Error, Result};
pub use guidance::{combine_cfg, GuidanceKind, GuidanceSchedule};
pub use metrics::{
    aggregate_report, energy_metrics, EnergyScores, GroupAggregate, GroupKey, MetricsReport, RunKey,
};
pub use oracle::{ConditionalPair, GaussianMixtureScoreModel, MixtureComponent, ScenarioSpec};
pub use samplers::{
    ddim_step, dpmpp_2m_step, euler_ancestral_step, half_log_snr, run_sampler, RunRecord,
    SamplerKind, StepEntry,
};
pub use schedule::{
    forward_diffuse, LatentState, NoiseSchedule, ScheduleKind, TimestepGrid, CLEAN_TIMESTEP,
};
