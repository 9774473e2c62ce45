//! Classifier-free guidance: the combination rule and the time-indexed
//! schedule family that modulates guidance strength over a sampling run.
//!
//! Schedule formulas, with `u = t / T`:
//!
//! * `fixed`:              `s_t = s0`
//! * `linear_decreasing`:  `s_t = s1 - (s1 - s0) * u`   (runs s1 -> s0)
//! * `cosine_ramp`:        `s_t = s0 + (s1 - s0) * (1 - cos(pi * u)) / 2`
//! * `step`:               `s_t = s0` for `t < T/2`, else `s1`
//! * `exponential`:        `s_t = s0 + (s1 - s0) * (1 - exp(-alpha * u))`
//! * `sigmoid`:            `s_t = s0 + (s1 - s0) / (1 + exp(-beta * (u - 1/2)))`
//!
//! Each formula is implemented literally; a decreasing ramp with the
//! cosine/exponential/sigmoid kinds is obtained by passing `s0 > s1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceKind {
    Fixed,
    LinearDecreasing,
    CosineRamp,
    Step,
    Exponential,
    Sigmoid,
}

impl GuidanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            GuidanceKind::Fixed => "fixed",
            GuidanceKind::LinearDecreasing => "linear_decreasing",
            GuidanceKind::CosineRamp => "cosine_ramp",
            GuidanceKind::Step => "step",
            GuidanceKind::Exponential => "exponential",
            GuidanceKind::Sigmoid => "sigmoid",
        }
    }
}

/// A guidance schedule `s_t` over sampling steps `0..=T`.
///
/// `alpha` (exponential steepness) and `beta_steep` (sigmoid steepness,
/// serialized as `beta`) are only consulted by their respective kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceSchedule {
    pub kind: GuidanceKind,
    pub s0: f64,
    pub s1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "beta", default, skip_serializing_if = "Option::is_none")]
    pub beta_steep: Option<f64>,
}

impl GuidanceSchedule {
    pub fn fixed(s: f64) -> Self {
        Self {
            kind: GuidanceKind::Fixed,
            s0: s,
            s1: s,
            alpha: None,
            beta_steep: None,
        }
    }

    pub fn linear_decreasing(s0: f64, s1: f64) -> Self {
        Self {
            kind: GuidanceKind::LinearDecreasing,
            s0,
            s1,
            alpha: None,
            beta_steep: None,
        }
    }

    pub fn cosine_ramp(s0: f64, s1: f64) -> Self {
        Self {
            kind: GuidanceKind::CosineRamp,
            s0,
            s1,
            alpha: None,
            beta_steep: None,
        }
    }

    pub fn step(s0: f64, s1: f64) -> Self {
        Self {
            kind: GuidanceKind::Step,
            s0,
            s1,
            alpha: None,
            beta_steep: None,
        }
    }

    pub fn exponential(s0: f64, s1: f64, alpha: f64) -> Self {
        Self {
            kind: GuidanceKind::Exponential,
            s0,
            s1,
            alpha: Some(alpha),
            beta_steep: None,
        }
    }

    pub fn sigmoid(s0: f64, s1: f64, beta_steep: f64) -> Self {
        Self {
            kind: GuidanceKind::Sigmoid,
            s0,
            s1,
            alpha: None,
            beta_steep: Some(beta_steep),
        }
    }

    /// Evaluates `s_t` at sampling step `t` of `T`.
    pub fn evaluate(&self, t: usize, total: usize) -> Result<f64> {
        if total == 0 {
            return Err(Error::range("total_steps", "must be >= 1"));
        }
        if t > total {
            return Err(Error::range("step", format!("t={t} outside [0, {total}]")));
        }
        let u = t as f64 / total as f64;
        let (s0, s1) = (self.s0, self.s1);
        match self.kind {
            GuidanceKind::Fixed => Ok(s0),
            GuidanceKind::LinearDecreasing => Ok(s1 - (s1 - s0) * u),
            GuidanceKind::CosineRamp => {
                Ok(s0 + (s1 - s0) * (1.0 - (std::f64::consts::PI * u).cos()) / 2.0)
            }
            GuidanceKind::Step => {
                if (t as f64) < total as f64 / 2.0 {
                    Ok(s0)
                } else {
                    Ok(s1)
                }
            }
            GuidanceKind::Exponential => {
                let alpha = self.alpha.ok_or(Error::MissingParameter {
                    kind: "exponential",
                    param: "alpha",
                })?;
                Ok(s0 + (s1 - s0) * (1.0 - (-alpha * u).exp()))
            }
            GuidanceKind::Sigmoid => {
                let beta = self.beta_steep.ok_or(Error::MissingParameter {
                    kind: "sigmoid",
                    param: "beta",
                })?;
                Ok(s0 + (s1 - s0) / (1.0 + (-beta * (u - 0.5)).exp()))
            }
        }
    }

    /// Short label for grouping and legends, e.g. `"7"` or `"18->3"`.
    pub fn scale_label(&self) -> String {
        match self.kind {
            GuidanceKind::Fixed => trim_float(self.s0),
            GuidanceKind::LinearDecreasing => {
                format!("{}->{}", trim_float(self.s1), trim_float(self.s0))
            }
            _ => format!("{}->{}", trim_float(self.s0), trim_float(self.s1)),
        }
    }
}

fn trim_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Eq-style CFG combination `(1 + s) * eps_cond - s * eps_uncond`, computed
/// as `eps_cond + s * (eps_cond - eps_uncond)` so that `s = 0` and
/// `eps_cond == eps_uncond` return `eps_cond` bit-exactly.
pub fn combine_cfg(eps_cond: &[f64], eps_uncond: &[f64], s: f64) -> Result<Vec<f64>> {
    if eps_cond.len() != eps_uncond.len() {
        return Err(Error::DimensionMismatch {
            left: eps_cond.len(),
            right: eps_uncond.len(),
        });
    }
    if !s.is_finite() {
        return Err(Error::range("cfg_scale", format!("non-finite scale {s}")));
    }
    Ok(eps_cond
        .iter()
        .zip(eps_uncond)
        .map(|(&c, &u)| c + s * (c - u))
        .collect())
}
