//! Mean-reverting SDE models whose steady states are the family members,
//! Euler–Maruyama integration, and the parameter maps from SDE coefficients
//! to closed-form steady-state distributions.
//!
//! Five drift/diffusion models are provided:
//!
//! ```text
//! B2:       dx = −γ(x−θ)dt            + √(κ²x + κ₂²x²) dW
//! GB2:      dx = −γ(x−θx^(1−α))dt     + √(κ²x^(2−α) + κ₂²x²) dW
//! mB:       dx = −γ(x−θ)dt            + √(κ²x(1−(κ₁²/κ²)x)(1+(κ₂²/κ²)x)) dW
//! tildeMGB: dx = −γ(x−θx^(1−α))dt     + √(κ²x^(2−α)(1−(κ₁²/κ²)x^α)(1+(κ₂²/κ²)x^α)) dW
//! B2B1mix:  dx = −γ(x−θ)dt            + √(κ²x + (2c−1)κ̃²x²) dW
//! ```
//!
//! The mB/tildeMGB forms use the scale identification β₁,₂^α = κ²/κ₁,₂²; the
//! rescaled forms (κ = 1) are canonical, and a κ-form input is the same model
//! with time measured in units of κ², so its stationary map carries γ/κ²
//! where the rescaled form carries γ.
//!
//! The B2B1mix diffusion uses the x² reading of its second term, which is the
//! one that actually degenerates to the bounded (c = 0) and power-law (c = 1)
//! members; c = 1/2 leaves pure √x noise and a Gamma steady state.

use crate::dist::{
    B2Params, BParams, DistSpec, GGaParams, GIGaParams, Gb1Params, Gb2Params, GbParams,
};
use crate::error::{Error, Result};
use crate::parallel;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Drift/diffusion model identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdeModel {
    B2,
    #[serde(rename = "GB2")]
    Gb2,
    #[serde(rename = "mB")]
    MB,
    #[serde(rename = "tildeMGB")]
    TildeMGb,
    #[serde(rename = "B2B1mix")]
    B2B1Mix,
}

impl std::fmt::Display for SdeModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SdeModel::B2 => "B2",
            SdeModel::Gb2 => "GB2",
            SdeModel::MB => "mB",
            SdeModel::TildeMGb => "tildeMGB",
            SdeModel::B2B1Mix => "B2B1mix",
        })
    }
}

/// SDE model plus physical parameters. Fields not used by the chosen model
/// are ignored; `irrelevant_set_fields` reports which ones were set anyway.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSde", into = "RawSde")]
pub struct SdeSpec {
    pub model: SdeModel,
    /// Mean-reversion rate (1/time).
    pub gamma: f64,
    /// Reversion level. For the power models (GB2, tildeMGB) this is the
    /// level of x^α.
    pub theta: f64,
    pub kappa: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa_tilde: f64,
    pub alpha: f64,
    /// Mixing weight of the B2B1mix model, in [0, 1].
    pub c: f64,
    set_fields: Vec<&'static str>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct RawSde {
    model: SdeModel,
    gamma: f64,
    theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
}

impl From<SdeSpec> for RawSde {
    fn from(s: SdeSpec) -> RawSde {
        let relevant = |name| s.relevant_fields().contains(&name);
        RawSde {
            model: s.model,
            gamma: s.gamma,
            theta: s.theta,
            kappa: relevant("kappa").then_some(s.kappa),
            kappa1: relevant("kappa1").then_some(s.kappa1),
            kappa2: relevant("kappa2").then_some(s.kappa2),
            kappa_tilde: relevant("kappa_tilde").then_some(s.kappa_tilde),
            alpha: relevant("alpha").then_some(s.alpha),
            c: relevant("c").then_some(s.c),
        }
    }
}

impl TryFrom<RawSde> for SdeSpec {
    type Error = Error;

    fn try_from(raw: RawSde) -> Result<SdeSpec> {
        let mut set_fields = Vec::new();
        for (name, present) in [
            ("kappa", raw.kappa.is_some()),
            ("kappa1", raw.kappa1.is_some()),
            ("kappa2", raw.kappa2.is_some()),
            ("kappa_tilde", raw.kappa_tilde.is_some()),
            ("alpha", raw.alpha.is_some()),
            ("c", raw.c.is_some()),
        ] {
            if present {
                set_fields.push(name);
            }
        }
        let needs_alpha = matches!(raw.model, SdeModel::Gb2 | SdeModel::TildeMGb);
        if needs_alpha && raw.alpha.is_none() {
            return Err(Error::parse(format!("model {} requires alpha", raw.model)));
        }
        if raw.model == SdeModel::B2B1Mix && raw.c.is_none() {
            return Err(Error::parse("model B2B1mix requires c"));
        }
        // The rescaled bounded forms default to κ = 1.
        let kappa_default = match raw.model {
            SdeModel::MB | SdeModel::TildeMGb => 1.0,
            _ => 0.0,
        };
        let spec = SdeSpec {
            model: raw.model,
            gamma: raw.gamma,
            theta: raw.theta,
            kappa: raw.kappa.unwrap_or(kappa_default),
            kappa1: raw.kappa1.unwrap_or(0.0),
            kappa2: raw.kappa2.unwrap_or(0.0),
            kappa_tilde: raw.kappa_tilde.unwrap_or(0.0),
            alpha: raw.alpha.unwrap_or(1.0),
            c: raw.c.unwrap_or(0.0),
            set_fields,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl SdeSpec {
    fn base(model: SdeModel, gamma: f64, theta: f64) -> SdeSpec {
        SdeSpec {
            model,
            gamma,
            theta,
            kappa: 0.0,
            kappa1: 0.0,
            kappa2: 0.0,
            kappa_tilde: 0.0,
            alpha: 1.0,
            c: 0.0,
            set_fields: Vec::new(),
        }
    }

    pub fn b2(gamma: f64, theta: f64, kappa: f64, kappa2: f64) -> SdeSpec {
        SdeSpec {
            kappa,
            kappa2,
            ..Self::base(SdeModel::B2, gamma, theta)
        }
    }

    pub fn gb2(gamma: f64, theta: f64, alpha: f64, kappa: f64, kappa2: f64) -> SdeSpec {
        SdeSpec {
            kappa,
            kappa2,
            alpha,
            ..Self::base(SdeModel::Gb2, gamma, theta)
        }
    }

    /// Rescaled bounded model (κ = 1) with the scales given directly:
    /// κ₁,₂ = 1/√β₁,₂.
    pub fn mb(gamma: f64, theta: f64, beta1: f64, beta2: f64) -> SdeSpec {
        SdeSpec {
            kappa: 1.0,
            kappa1: 1.0 / beta1.sqrt(),
            kappa2: 1.0 / beta2.sqrt(),
            ..Self::base(SdeModel::MB, gamma, theta)
        }
    }

    /// κ-form of the bounded model; its stationary behaviour matches the
    /// rescaled form with rate γ/κ².
    pub fn mb_kappa_form(gamma: f64, theta: f64, kappa: f64, kappa1: f64, kappa2: f64) -> SdeSpec {
        SdeSpec {
            kappa,
            kappa1,
            kappa2,
            ..Self::base(SdeModel::MB, gamma, theta)
        }
    }

    /// Rescaled powered bounded model (κ = 1): κ₁,₂ = β₁,₂^(−α/2). `theta` is
    /// the reversion level of x^α.
    pub fn tilde_mgb(gamma: f64, theta: f64, alpha: f64, beta1: f64, beta2: f64) -> SdeSpec {
        SdeSpec {
            kappa: 1.0,
            kappa1: beta1.powf(-alpha / 2.0),
            kappa2: beta2.powf(-alpha / 2.0),
            alpha,
            ..Self::base(SdeModel::TildeMGb, gamma, theta)
        }
    }

    pub fn b2b1_mix(gamma: f64, theta: f64, kappa: f64, kappa_tilde: f64, c: f64) -> SdeSpec {
        SdeSpec {
            kappa,
            kappa_tilde,
            c,
            ..Self::base(SdeModel::B2B1Mix, gamma, theta)
        }
    }

    fn relevant_fields(&self) -> &'static [&'static str] {
        match self.model {
            SdeModel::B2 => &["kappa", "kappa2"],
            SdeModel::Gb2 => &["alpha", "kappa", "kappa2"],
            SdeModel::MB => &["kappa", "kappa1", "kappa2"],
            SdeModel::TildeMGb => &["alpha", "kappa", "kappa1", "kappa2"],
            SdeModel::B2B1Mix => &["kappa", "kappa_tilde", "c"],
        }
    }

    /// Fields present in the parsed input that the chosen model ignores.
    pub fn irrelevant_set_fields(&self) -> Vec<&'static str> {
        self.set_fields
            .iter()
            .copied()
            .filter(|f| !self.relevant_fields().contains(f))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::domain(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::domain(format!(
                "theta must be positive, got {}",
                self.theta
            )));
        }
        for (name, v) in [
            ("kappa", self.kappa),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("kappa_tilde", self.kappa_tilde),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::domain(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if matches!(self.model, SdeModel::MB | SdeModel::TildeMGb) && !(self.kappa > 0.0) {
            return Err(Error::domain(format!(
                "model {} requires kappa > 0 (use kappa = 1 for the rescaled form)",
                self.model
            )));
        }
        if self.model == SdeModel::B2B1Mix && !(0.0..=1.0).contains(&self.c) {
            return Err(Error::domain(format!(
                "c must lie in [0, 1], got {}",
                self.c
            )));
        }
        Ok(())
    }

    /// Upper bound of the open support; None for the unbounded models.
    pub fn support_upper(&self) -> Option<f64> {
        match self.model {
            SdeModel::B2 | SdeModel::Gb2 => None,
            SdeModel::MB => (self.kappa1 > 0.0).then(|| (self.kappa / self.kappa1).powi(2)),
            SdeModel::TildeMGb => (self.kappa1 > 0.0)
                .then(|| ((self.kappa / self.kappa1).powi(2)).powf(1.0 / self.alpha)),
            SdeModel::B2B1Mix => {
                let a2 = (2.0 * self.c - 1.0) * self.kappa_tilde.powi(2);
                (a2 < 0.0).then(|| -self.kappa.powi(2) / a2)
            }
        }
    }

    /// Mean-reversion rate used for the desk integration defaults.
    pub fn relaxation_rate(&self) -> f64 {
        self.gamma
    }

    /// Drift μ(x) and diffusion σ(x), exactly as the model equations read.
    pub fn drift_diffusion(&self, x: f64) -> Result<(f64, f64)> {
        self.validate()?;
        let inside = x > 0.0 && self.support_upper().is_none_or(|b| x <= b);
        if !inside {
            return Err(Error::domain(format!(
                "x={x} lies outside the support of model {}",
                self.model
            )));
        }
        Ok(self.drift_diffusion_unchecked(x))
    }

    #[inline]
    fn drift_diffusion_unchecked(&self, x: f64) -> (f64, f64) {
        let g = self.gamma;
        let th = self.theta;
        let k2 = self.kappa * self.kappa;
        match self.model {
            SdeModel::B2 => {
                let mu = -g * (x - th);
                let var = k2 * x + self.kappa2 * self.kappa2 * x * x;
                (mu, var.max(0.0).sqrt())
            }
            SdeModel::Gb2 => {
                let xa = x.powf(self.alpha);
                let mu = -g * (x - th * x / xa);
                let var = k2 * x * x / xa + self.kappa2 * self.kappa2 * x * x;
                (mu, var.max(0.0).sqrt())
            }
            SdeModel::MB => {
                let mu = -g * (x - th);
                let var = x * (k2 - self.kappa1 * self.kappa1 * x)
                    * (1.0 + self.kappa2 * self.kappa2 * x / k2);
                (mu, var.max(0.0).sqrt())
            }
            SdeModel::TildeMGb => {
                let xa = x.powf(self.alpha);
                let mu = -g * (x - th * x / xa);
                let var = (x * x / xa)
                    * (k2 - self.kappa1 * self.kappa1 * xa)
                    * (1.0 + self.kappa2 * self.kappa2 * xa / k2);
                (mu, var.max(0.0).sqrt())
            }
            SdeModel::B2B1Mix => {
                let mu = -g * (x - th);
                let a2 = (2.0 * self.c - 1.0) * self.kappa_tilde * self.kappa_tilde;
                let var = k2 * x + a2 * x * x;
                (mu, var.max(0.0).sqrt())
            }
        }
    }

    fn has_noise(&self) -> bool {
        match self.model {
            SdeModel::B2 | SdeModel::Gb2 => self.kappa > 0.0 || self.kappa2 > 0.0,
            SdeModel::MB | SdeModel::TildeMGb => self.kappa > 0.0,
            SdeModel::B2B1Mix => self.kappa > 0.0 || (self.c != 0.5 && self.kappa_tilde > 0.0),
        }
    }

    /// Steady-state distribution from the zero-flux stationary solution of
    /// the model's Fokker–Planck equation. Errors carry the violated
    /// positivity inequality.
    pub fn param_map(&self) -> Result<DistSpec> {
        self.validate()?;
        let g = self.gamma;
        let th = self.theta;
        let k2 = self.kappa * self.kappa;
        let require = |ok: bool, ineq: String| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::domain(format!(
                    "no normalizable steady state: requires {ineq}"
                )))
            }
        };
        match self.model {
            SdeModel::B2 => {
                let k22 = self.kappa2 * self.kappa2;
                if k2 > 0.0 && k22 > 0.0 {
                    Ok(DistSpec::MB2(B2Params {
                        beta2: k2 / k22,
                        p: 2.0 * g * th / k2,
                        q: 2.0 * g / k22,
                    }))
                } else if k2 > 0.0 {
                    Ok(DistSpec::GGa(GGaParams {
                        alpha: 1.0,
                        beta: k2 / (2.0 * g),
                        p: 2.0 * g * th / k2,
                    }))
                } else if k22 > 0.0 {
                    Ok(DistSpec::GIGa(GIGaParams {
                        alpha: 1.0,
                        beta: 2.0 * g * th / k22,
                        q: 1.0 + 2.0 * g / k22,
                    }))
                } else {
                    Err(Error::domain(
                        "zero-noise model has no steady-state distribution".to_string(),
                    ))
                }
            }
            SdeModel::Gb2 => {
                let a = self.alpha;
                let k22 = self.kappa2 * self.kappa2;
                if k2 > 0.0 && k22 > 0.0 {
                    let p_a = a - 1.0 + 2.0 * g * th / k2;
                    let q_a = 1.0 - a + 2.0 * g / k22;
                    require(
                        p_a > 0.0,
                        format!("alpha - 1 + 2*gamma*theta/kappa^2 > 0 (got {p_a})"),
                    )?;
                    require(
                        q_a > 0.0,
                        format!("1 - alpha + 2*gamma/kappa2^2 > 0 (got {q_a})"),
                    )?;
                    Ok(DistSpec::MGb2(Gb2Params {
                        alpha: a,
                        beta2: (k2 / k22).powf(1.0 / a),
                        p: p_a / a,
                        q: q_a / a,
                    }))
                } else if k2 > 0.0 {
                    let p_a = a - 1.0 + 2.0 * g * th / k2;
                    require(
                        p_a > 0.0,
                        format!("alpha - 1 + 2*gamma*theta/kappa^2 > 0 (got {p_a})"),
                    )?;
                    Ok(DistSpec::GGa(GGaParams {
                        alpha: a,
                        beta: (a * k2 / (2.0 * g)).powf(1.0 / a),
                        p: p_a / a,
                    }))
                } else if k22 > 0.0 {
                    Ok(DistSpec::GIGa(GIGaParams {
                        alpha: a,
                        beta: (2.0 * g * th / (a * k22)).powf(1.0 / a),
                        q: (1.0 + 2.0 * g / k22) / a,
                    }))
                } else {
                    Err(Error::domain(
                        "zero-noise model has no steady-state distribution".to_string(),
                    ))
                }
            }
            SdeModel::MB => {
                // κ-form: stationary law of the rescaled form at rate γ/κ².
                let ge = g / k2;
                let k12 = self.kappa1 * self.kappa1;
                let k22 = self.kappa2 * self.kappa2;
                let p = 2.0 * ge * th;
                if k12 > 0.0 && k22 > 0.0 {
                    let b1 = k2 / k12;
                    let b2 = k2 / k22;
                    let q = 2.0 * ge * (b1 - th) / (1.0 + b1 / b2);
                    require(q > 0.0, format!("theta < beta1 = kappa^2/kappa1^2 (q = {q})"))?;
                    Ok(DistSpec::MB(BParams {
                        beta1: b1,
                        beta2: b2,
                        p,
                        q,
                    }))
                } else if k22 > 0.0 {
                    Ok(DistSpec::MB2(B2Params {
                        beta2: k2 / k22,
                        p,
                        q: 2.0 * ge * (k2 / k22),
                    }))
                } else if k12 > 0.0 {
                    let b1 = k2 / k12;
                    let q = 2.0 * ge * (b1 - th);
                    require(q > 0.0, format!("theta < beta1 = kappa^2/kappa1^2 (q = {q})"))?;
                    Ok(DistSpec::Gb1(Gb1Params {
                        alpha: 1.0,
                        beta1: b1,
                        p,
                        q,
                    }))
                } else {
                    Ok(DistSpec::GGa(GGaParams {
                        alpha: 1.0,
                        beta: 1.0 / (2.0 * ge),
                        p,
                    }))
                }
            }
            SdeModel::TildeMGb => {
                let a = self.alpha;
                let ge = g / k2;
                let k12 = self.kappa1 * self.kappa1;
                let k22 = self.kappa2 * self.kappa2;
                let p_a = a - 1.0 + 2.0 * ge * th;
                require(
                    p_a > 0.0,
                    format!("alpha - 1 + 2*(gamma/kappa^2)*theta > 0 (got {p_a})"),
                )?;
                if k12 > 0.0 && k22 > 0.0 {
                    // The scales enter through their α-th powers.
                    let b1a = k2 / k12;
                    let b2a = k2 / k22;
                    let q_a = 1.0 - a + 2.0 * ge * (b1a - th) / (1.0 + b1a / b2a);
                    require(
                        q_a > 0.0,
                        format!(
                            "1 - alpha + 2*(gamma/kappa^2)*(beta1^a - theta)/(1 + (beta1/beta2)^a) > 0 (got {q_a})"
                        ),
                    )?;
                    Ok(DistSpec::TildeMGb(GbParams {
                        alpha: a,
                        beta1: b1a.powf(1.0 / a),
                        beta2: b2a.powf(1.0 / a),
                        p: p_a / a,
                        q: q_a / a,
                    }))
                } else if k22 > 0.0 {
                    let q_a = 1.0 - a + 2.0 * ge * (k2 / k22);
                    require(
                        q_a > 0.0,
                        format!("1 - alpha + 2*(gamma/kappa^2)*beta2^a > 0 (got {q_a})"),
                    )?;
                    Ok(DistSpec::MGb2(Gb2Params {
                        alpha: a,
                        beta2: (k2 / k22).powf(1.0 / a),
                        p: p_a / a,
                        q: q_a / a,
                    }))
                } else if k12 > 0.0 {
                    let b1a = k2 / k12;
                    let q = 2.0 * ge * (b1a - th) / a;
                    require(q > 0.0, format!("theta < beta1^a = kappa^2/kappa1^2 (q = {q})"))?;
                    Ok(DistSpec::Gb1(Gb1Params {
                        alpha: a,
                        beta1: b1a.powf(1.0 / a),
                        p: p_a / a,
                        q,
                    }))
                } else {
                    Ok(DistSpec::GGa(GGaParams {
                        alpha: a,
                        beta: (a / (2.0 * ge)).powf(1.0 / a),
                        p: p_a / a,
                    }))
                }
            }
            SdeModel::B2B1Mix => {
                require(k2 > 0.0, "kappa > 0".to_string())?;
                let p = 2.0 * g * th / k2;
                let a2 = (2.0 * self.c - 1.0) * self.kappa_tilde * self.kappa_tilde;
                if a2 == 0.0 {
                    Ok(DistSpec::GGa(GGaParams {
                        alpha: 1.0,
                        beta: k2 / (2.0 * g),
                        p,
                    }))
                } else if a2 > 0.0 {
                    Ok(DistSpec::MB2(B2Params {
                        beta2: k2 / a2,
                        p,
                        q: 2.0 * g / a2,
                    }))
                } else {
                    let b1 = -k2 / a2;
                    let q = 2.0 * g * (b1 - th) / k2;
                    require(
                        q > 0.0,
                        format!("theta < kappa^2/((1-2c)*kappa_tilde^2) (q = {q})"),
                    )?;
                    Ok(DistSpec::Gb1(Gb1Params {
                        alpha: 1.0,
                        beta1: b1,
                        p,
                        q,
                    }))
                }
            }
        }
    }
}

/// Boundary handling when an Euler step exits the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    /// Mirror the excess back inside. The diffusion vanishes at the bounds,
    /// so excursions are O(dt) and reflection preserves the stationary law
    /// to leading order.
    Reflect,
    /// Clamp onto the boundary.
    Clamp,
}

/// Euler–Maruyama settings. Desk defaults are expressed in units of the
/// relaxation time 1/γ: dt = 1e−3/γ, burn_in = 20/γ, thin = 1/γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    /// Time step.
    pub dt: f64,
    /// Time discarded before sampling starts.
    pub burn_in: f64,
    /// Time between retained samples.
    pub thin: f64,
    /// Independent paths.
    pub paths: usize,
    /// Samples retained per path.
    pub samples_per_path: usize,
    pub seed: u64,
    pub boundary_policy: BoundaryPolicy,
}

impl IntegrationConfig {
    /// Desk defaults for a process with relaxation rate `rate`, sized to
    /// retain at least `total_samples` approximately independent draws.
    pub fn desk(rate: f64, total_samples: usize, seed: u64) -> IntegrationConfig {
        let paths = 64;
        IntegrationConfig {
            dt: 1e-3 / rate,
            burn_in: 20.0 / rate,
            thin: 1.0 / rate,
            paths,
            samples_per_path: total_samples.div_ceil(paths),
            seed,
            boundary_policy: BoundaryPolicy::Reflect,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::domain(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.burn_in >= 0.0) {
            return Err(Error::domain(format!(
                "burn_in must be nonnegative, got {}",
                self.burn_in
            )));
        }
        if !(self.thin > 0.0) {
            return Err(Error::domain(format!(
                "thin must be positive, got {}",
                self.thin
            )));
        }
        if self.paths < 1 {
            return Err(Error::domain("paths must be >= 1"));
        }
        if self.samples_per_path < 1 {
            return Err(Error::domain("samples_per_path must be >= 1"));
        }
        Ok(())
    }
}

/// Thinned steady-state samples from an SDE run with full provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ensemble {
    pub samples: Vec<f64>,
    pub effective_count: usize,
    /// Boundary reflections applied across all paths and steps.
    pub reflections: u64,
    /// Euler steps taken across all paths, burn-in included.
    pub steps: u64,
    pub spec: SdeSpec,
    pub config: IntegrationConfig,
}

impl Ensemble {
    /// Writes one sample per line to `<stem>.txt` plus a JSON sidecar
    /// `<stem>.json` with the spec, settings, seed and counts.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut text = String::with_capacity(self.samples.len() * 20);
        for s in &self.samples {
            text.push_str(&format!("{s}\n"));
        }
        std::fs::write(dir.join(format!("{stem}.txt")), text)?;
        let sidecar = serde_json::json!({
            "spec": self.spec,
            "config": self.config,
            "seed": self.config.seed,
            "effective_count": self.effective_count,
            "reflections": self.reflections,
            "steps": self.steps,
        });
        let mut f = std::fs::File::create(dir.join(format!("{stem}.json")))?;
        writeln!(f, "{}", serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-path generator derived from (seed, path index) by counter mixing, so
/// results do not depend on execution order or thread count.
fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(path as u64 + 1)))
}

impl SdeSpec {
    /// Euler–Maruyama integration: x ← x + μ dt + σ √dt Z with the boundary
    /// policy applied whenever a step exits (0, β₁). Deterministic given the
    /// seed; paths run concurrently with identical output for any schedule.
    pub fn integrate(&self, config: &IntegrationConfig) -> Result<Ensemble> {
        self.validate()?;
        config.validate()?;
        if self.has_noise() {
            // Refuse parameter sets with no normalizable steady state before
            // spending any work. Deterministic (zero-noise) relaxation runs
            // are allowed through.
            self.param_map()?;
        }
        let upper = self.support_upper();
        let x0 = match upper {
            Some(b) => self.theta.min(b * (1.0 - 1e-9)).max(b * 1e-12),
            None => self.theta,
        };
        let burn_steps = (config.burn_in / config.dt).round() as u64;
        let thin_steps = ((config.thin / config.dt).round() as u64).max(1);
        let sqrt_dt = config.dt.sqrt();
        let dt = config.dt;
        let reflect = config.boundary_policy == BoundaryPolicy::Reflect;
        let spp = config.samples_per_path;

        let per_path = |path: usize| -> (Vec<f64>, u64) {
            let mut rng = path_rng(config.seed, path);
            let mut x = x0;
            let mut reflections = 0u64;
            let mut step = |x: &mut f64, rng: &mut ChaCha8Rng| {
                let (mu, sigma) = self.drift_diffusion_unchecked(*x);
                let z: f64 = rng.sample(StandardNormal);
                let mut xn = *x + mu * dt + sigma * sqrt_dt * z;
                if reflect {
                    for _ in 0..64 {
                        if xn < 0.0 {
                            xn = -xn;
                            reflections += 1;
                        } else if upper.is_some_and(|b| xn > b) {
                            xn = 2.0 * upper.unwrap() - xn;
                            reflections += 1;
                        } else {
                            break;
                        }
                    }
                    if xn < 0.0 || upper.is_some_and(|b| xn > b) {
                        xn = x0;
                    }
                } else {
                    xn = xn.max(0.0);
                    if let Some(b) = upper {
                        xn = xn.min(b);
                    }
                }
                *x = xn;
            };
            for _ in 0..burn_steps {
                step(&mut x, &mut rng);
            }
            let mut out = Vec::with_capacity(spp);
            for _ in 0..spp {
                for _ in 0..thin_steps {
                    step(&mut x, &mut rng);
                }
                out.push(x);
            }
            (out, reflections)
        };

        let results = parallel::for_each_job(config.paths, per_path);
        let mut samples = Vec::with_capacity(config.paths * spp);
        let mut reflections = 0u64;
        for (chunk, refl) in results {
            samples.extend_from_slice(&chunk);
            reflections += refl;
        }
        let steps = (config.paths as u64) * (burn_steps + thin_steps * spp as u64);
        Ok(Ensemble {
            effective_count: samples.len(),
            samples,
            reflections,
            steps,
            spec: self.clone(),
            config: config.clone(),
        })
    }
}

/// Which coefficient a hierarchy sweep degenerates (or scans).
#[derive(Debug, Clone, PartialEq)]
pub enum SweepKnob {
    Kappa1ToZero,
    Kappa2ToZero,
    KappaToZero,
    CGrid(Vec<f64>),
}

/// One swept point: the degenerate SDE, the predicted limiting closed form,
/// and the KS distance of the integrated ensemble against it.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub spec: SdeSpec,
    pub target: DistSpec,
    pub ks: f64,
}

/// Integrates the base model with one coefficient degenerated and reports
/// the KS distance against the predicted limiting member.
pub fn hierarchy_sweep(
    base: &SdeSpec,
    knob: SweepKnob,
    config: &IntegrationConfig,
) -> Result<Vec<SweepPoint>> {
    base.validate()?;
    let specs: Vec<SdeSpec> = match knob {
        SweepKnob::Kappa1ToZero => {
            if !matches!(base.model, SdeModel::MB | SdeModel::TildeMGb) {
                return Err(Error::domain(format!(
                    "kappa1 -> 0 applies to the bounded models, not {}",
                    base.model
                )));
            }
            vec![SdeSpec {
                kappa1: 0.0,
                ..base.clone()
            }]
        }
        SweepKnob::Kappa2ToZero => {
            if base.model == SdeModel::B2B1Mix {
                return Err(Error::domain("kappa2 -> 0 does not apply to B2B1mix"));
            }
            vec![SdeSpec {
                kappa2: 0.0,
                ..base.clone()
            }]
        }
        SweepKnob::KappaToZero => {
            if !matches!(base.model, SdeModel::B2 | SdeModel::Gb2) {
                return Err(Error::domain(format!(
                    "kappa -> 0 applies to the unbounded models, not {}",
                    base.model
                )));
            }
            vec![SdeSpec {
                kappa: 0.0,
                ..base.clone()
            }]
        }
        SweepKnob::CGrid(grid) => {
            if base.model != SdeModel::B2B1Mix {
                return Err(Error::domain("the c grid applies to B2B1mix only"));
            }
            grid.iter()
                .map(|&c| SdeSpec { c, ..base.clone() })
                .collect()
        }
    };
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let target = spec.param_map()?;
        let ensemble = spec.integrate(config)?;
        let ks = crate::fit::ks_statistic(&ensemble.samples, &target)?;
        out.push(SweepPoint { spec, target, ks });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Family;
    use approx::assert_relative_eq;

    #[test]
    fn drift_vanishes_at_reversion_level() {
        let spec = SdeSpec::mb(2.0, 0.5, 1.0, 1.0);
        let (mu, _) = spec.drift_diffusion(0.5).unwrap();
        assert_eq!(mu, 0.0);
    }

    #[test]
    fn mb_diffusion_squared_reads_off_the_form() {
        let spec = SdeSpec::mb(1.0, 0.5, 2.0, 0.5);
        let x = 0.7;
        let (_, sigma) = spec.drift_diffusion(x).unwrap();
        let want = x * (1.0 - x / 2.0) * (1.0 + x / 0.5);
        assert_relative_eq!(sigma * sigma, want, max_relative = 1e-12);
    }

    #[test]
    fn mix_at_half_is_pure_sqrt_noise() {
        let spec = SdeSpec::b2b1_mix(1.5, 0.5, 1.3, 0.9, 0.5);
        let x = 0.8;
        let (_, sigma) = spec.drift_diffusion(x).unwrap();
        assert_relative_eq!(sigma * sigma, 1.3 * 1.3 * x, max_relative = 1e-12);
    }

    #[test]
    fn param_map_b2_reference_point() {
        let spec = SdeSpec::b2(1.0, 1.0, 1.0, 1.0);
        match spec.param_map().unwrap() {
            DistSpec::MB2(b) => {
                assert_relative_eq!(b.beta2, 1.0, epsilon = 1e-14);
                assert_relative_eq!(b.p, 2.0, epsilon = 1e-14);
                assert_relative_eq!(b.q, 2.0, epsilon = 1e-14);
            }
            other => panic!("expected mB2, got {}", other.family()),
        }
    }

    #[test]
    fn param_map_gb2_reference_point() {
        // Stationary zero-flux solution at these coefficients is
        // x²(1+x²)^(−3) up to normalization: αp − 1 = 2, p + q + 1 = 3.
        let spec = SdeSpec::gb2(1.0, 1.0, 2.0, 1.0, 1.0);
        match spec.param_map().unwrap() {
            DistSpec::MGb2(g) => {
                assert_relative_eq!(g.beta2, 1.0, epsilon = 1e-14);
                assert_relative_eq!(g.p, 1.5, epsilon = 1e-14);
                assert_relative_eq!(g.q, 0.5, epsilon = 1e-14);
            }
            other => panic!("expected mGB2, got {}", other.family()),
        }
    }

    #[test]
    fn param_map_mb_reference_point() {
        let spec = SdeSpec::mb(1.0, 0.5, 1.0, 1.0);
        match spec.param_map().unwrap() {
            DistSpec::MB(b) => {
                assert_relative_eq!(b.p, 1.0, epsilon = 1e-14);
                assert_relative_eq!(b.q, 0.5, epsilon = 1e-14);
            }
            other => panic!("expected mB, got {}", other.family()),
        }
    }

    #[test]
    fn param_map_rejects_nonnormalizable_sets() {
        // Large alpha with weak reversion drives the implied q negative.
        let spec = SdeSpec::gb2(0.1, 1.0, 3.0, 1.0, 1.0);
        let msg = spec.param_map().unwrap_err().to_string();
        assert!(msg.contains("1 - alpha + 2*gamma/kappa2^2"), "{msg}");
        // And integrate refuses up front.
        let cfg = IntegrationConfig::desk(0.1, 100, 1);
        assert!(spec.integrate(&cfg).is_err());
    }

    #[test]
    fn zero_noise_relaxes_to_theta() {
        let spec = SdeSpec::b2(2.0, 0.7, 0.0, 0.0);
        let cfg = IntegrationConfig {
            dt: 1e-3,
            burn_in: 10.0,
            thin: 0.5,
            paths: 3,
            samples_per_path: 5,
            seed: 9,
            boundary_policy: BoundaryPolicy::Reflect,
        };
        let ens = spec.integrate(&cfg).unwrap();
        for &x in &ens.samples {
            assert_relative_eq!(x, 0.7, max_relative = 1e-6);
        }
    }

    #[test]
    fn integration_is_deterministic_in_seed() {
        let spec = SdeSpec::mb(2.0, 0.5, 1.0, 1.0);
        let cfg = IntegrationConfig {
            dt: 5e-4,
            burn_in: 5.0,
            thin: 0.5,
            paths: 7,
            samples_per_path: 40,
            seed: 123,
            boundary_policy: BoundaryPolicy::Reflect,
        };
        let a = spec.integrate(&cfg).unwrap();
        let b = spec.integrate(&cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.reflections, b.reflections);
        let c = spec
            .integrate(&IntegrationConfig { seed: 124, ..cfg })
            .unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn kappa_form_matches_rescaled_form() {
        // κ-form with κ = 2 is the rescaled model on a 4x faster clock; the
        // stationary maps agree exactly.
        let kf = SdeSpec::mb_kappa_form(4.0, 0.5, 2.0, 2.0, 2.0);
        let rescaled = SdeSpec::mb(1.0, 0.5, 1.0, 1.0);
        assert_eq!(kf.param_map().unwrap(), rescaled.param_map().unwrap());
    }

    #[test]
    fn samples_confined_to_open_support_with_reflection() {
        let spec = SdeSpec::mb(2.0, 0.5, 1.0, 1.0);
        let cfg = IntegrationConfig {
            dt: 5e-4,
            burn_in: 5.0,
            thin: 0.25,
            paths: 8,
            samples_per_path: 500,
            seed: 11,
            boundary_policy: BoundaryPolicy::Reflect,
        };
        let ens = spec.integrate(&cfg).unwrap();
        assert!(ens.samples.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn reflection_rate_falls_with_finer_steps() {
        // Boundary error of the Euler scheme shrinks with the step, so
        // quartering dt must cut the per-step reflection rate.
        let spec = SdeSpec::mb(2.0, 0.5, 1.0, 1.0);
        let mut rates = Vec::new();
        for dt in [2e-3, 5e-4] {
            let cfg = IntegrationConfig {
                dt,
                burn_in: 2.0,
                thin: 0.1,
                paths: 16,
                samples_per_path: (0.4 / dt) as usize,
                seed: 5,
                boundary_policy: BoundaryPolicy::Reflect,
            };
            let ens = spec.integrate(&cfg).unwrap();
            rates.push(ens.reflections as f64 / ens.steps as f64 * 1e6);
        }
        assert!(
            rates[1] < rates[0],
            "reflections per 1e6 steps did not fall: {rates:?}"
        );
    }

    #[test]
    fn drift_sign_and_diffusion_nonnegative_across_support() {
        let specs = [
            SdeSpec::b2(1.0, 1.0, 1.0, 1.0),
            SdeSpec::gb2(1.0, 1.0, 2.0, 1.0, 1.0),
            SdeSpec::mb(2.0, 0.5, 1.0, 1.0),
            SdeSpec::tilde_mgb(3.0, 0.25, 2.0, 1.0, 1.0),
            SdeSpec::b2b1_mix(1.5, 0.5, 1.0, 1.0, 0.3),
        ];
        for spec in specs {
            let upper = spec.support_upper().unwrap_or(8.0);
            // Mean reversion acts toward the x-space level θ^(1/α).
            let level = spec.theta.powf(1.0 / spec.alpha);
            for i in 1..100 {
                let x = upper * i as f64 / 100.0;
                let (mu, sigma) = spec.drift_diffusion(x).unwrap();
                assert!(
                    (x - level) * mu <= 1e-12,
                    "{}: drift not mean-reverting at x={x}",
                    spec.model
                );
                assert!(sigma >= 0.0);
            }
            // The diffusion vanishes at the upper bound of bounded models.
            if let Some(b) = spec.support_upper() {
                let (_, sigma) = spec.drift_diffusion_unchecked(b);
                assert!(sigma.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn steady_state_matches_closed_form_at_desk_scale() {
        let spec = SdeSpec::mb(2.0, 0.5, 1.0, 1.0);
        let target = spec.param_map().unwrap();
        let cfg = IntegrationConfig::desk(2.0, 20_000, 77);
        let ens = spec.integrate(&cfg).unwrap();
        let ks = crate::fit::ks_statistic(&ens.samples, &target).unwrap();
        assert!(ks < 0.02, "KS = {ks}");
    }

    #[test]
    fn burn_in_growth_drives_ks_down() {
        // All paths start at the point mass x₀ = θ, so with no burn-in the
        // early samples are under-dispersed; the seed-averaged KS against
        // the stationary law must fall as the burn-in grows by doubling.
        let spec = SdeSpec::mb(2.0, 0.5, 1.0, 1.0);
        let target = spec.param_map().unwrap();
        let mut avg = Vec::new();
        for burn in [0.0, 0.4, 3.2] {
            let mut total = 0.0;
            for seed in [1, 2, 3] {
                let cfg = IntegrationConfig {
                    dt: 5e-4,
                    burn_in: burn,
                    thin: 0.25,
                    paths: 48,
                    samples_per_path: 280,
                    seed,
                    boundary_policy: BoundaryPolicy::Reflect,
                };
                let ens = spec.integrate(&cfg).unwrap();
                total += crate::fit::ks_statistic(&ens.samples, &target).unwrap();
            }
            avg.push(total / 3.0);
        }
        assert!(
            avg[0] > avg[1] && avg[1] > 0.8 * avg[2],
            "KS did not fall with burn-in: {avg:?}"
        );
        assert!(avg[2] < 0.03, "converged KS too large: {avg:?}");
    }

    #[test]
    fn sweep_reports_limiting_members() {
        let base = SdeSpec::mb(2.0, 0.5, 1.0, 1.0);
        let cfg = IntegrationConfig::desk(2.0, 8_000, 3);
        let pts = hierarchy_sweep(&base, SweepKnob::Kappa1ToZero, &cfg).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].target.family(), Family::MB2);
        assert!(pts[0].ks < 0.03, "KS = {}", pts[0].ks);

        let mix = SdeSpec::b2b1_mix(1.5, 0.5, 1.0, 1.0, 0.0);
        let pts = hierarchy_sweep(&mix, SweepKnob::CGrid(vec![0.0, 0.5, 1.0]), &cfg).unwrap();
        let families: Vec<Family> = pts.iter().map(|p| p.target.family()).collect();
        assert_eq!(families, vec![Family::Gb1, Family::GGa, Family::MB2]);
        for p in &pts {
            assert!(p.ks < 0.03, "{}: KS = {}", p.target.family(), p.ks);
        }
        assert!(hierarchy_sweep(&base, SweepKnob::KappaToZero, &cfg).is_err());
    }

    #[test]
    fn sde_json_round_trip_flags_irrelevant_fields() {
        let text = r#"{"model":"mB","gamma":2.0,"theta":0.5,"kappa1":1.0,"kappa2":1.0,"c":0.3}"#;
        let spec: SdeSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.model, SdeModel::MB);
        assert_eq!(spec.kappa, 1.0); // rescaled-form default
        assert_eq!(spec.irrelevant_set_fields(), vec!["c"]);
        let back = serde_json::to_string(&spec).unwrap();
        let spec2: SdeSpec = serde_json::from_str(&back).unwrap();
        assert_eq!(spec.param_map().unwrap(), spec2.param_map().unwrap());
        assert!(
            serde_json::from_str::<SdeSpec>(r#"{"model":"GB2","gamma":1.0,"theta":1.0}"#).is_err()
        );
        assert!(
            serde_json::from_str::<SdeSpec>(r#"{"model":"B2","gamma":-1.0,"theta":1.0}"#).is_err()
        );
    }
}
