//! Noise levels, preconditioning, loss weighting and the Heun sampler of the
//! EDM formulation.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::denoiser::{DenoiseContext, Denoiser};
use super::features::FeatureTriple;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_data: f64,
    /// Mean of `ln σ` during training.
    pub p_mean: f64,
    /// Standard deviation of `ln σ` during training.
    pub p_std: f64,
    pub sampler_steps: usize,
    /// Exponent of the sampling schedule.
    pub rho: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma_min: 0.002,
            sigma_max: 80.0,
            sigma_data: 0.5,
            p_mean: -1.2,
            p_std: 1.2,
            sampler_steps: 32,
            rho: 7.0,
        }
    }
}

/// Scalars that wrap a raw network `F` into a denoiser
/// `D(x; σ) = c_skip x + c_out F(c_in x; c_noise)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preconditioning {
    pub c_skip: f64,
    pub c_out: f64,
    pub c_in: f64,
    pub c_noise: f64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_min > 0.0 && self.sigma_min < self.sigma_max && self.sigma_data > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise levels need 0 < sigma_min ({}) < sigma_max ({}) and sigma_data ({}) > 0",
                self.sigma_min, self.sigma_max, self.sigma_data
            )));
        }
        if self.sampler_steps == 0 || self.p_std < 0.0 || self.rho <= 0.0 {
            return Err(Error::InvalidParameter(
                "sampler_steps and rho must be positive, p_std non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn preconditioning(&self, sigma: f64) -> Preconditioning {
        let sd = self.sigma_data;
        let total = sigma * sigma + sd * sd;
        Preconditioning {
            c_skip: sd * sd / total,
            c_out: sigma * sd / total.sqrt(),
            c_in: 1.0 / total.sqrt(),
            c_noise: sigma.ln() / 4.0,
        }
    }

    /// Loss weight `λ(σ) = (σ² + σ_d²) / (σ σ_d)²`, which makes the effective
    /// target of the raw network unit-variance.
    pub fn loss_weight(&self, sigma: f64) -> f64 {
        let sd = self.sigma_data;
        (sigma * sigma + sd * sd) / (sigma * sd).powi(2)
    }

    /// Training noise level, `ln σ ~ N(p_mean, p_std²)`.
    pub fn sample_sigma(&self, rng: &mut impl Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        (self.p_mean + self.p_std * z).exp()
    }

    /// `sampler_steps` decreasing noise levels from `sigma_max` to `sigma_min`,
    /// followed by a final 0.
    pub fn schedule(&self) -> Vec<f64> {
        let n = self.sampler_steps;
        let inv = 1.0 / self.rho;
        let (hi, lo) = (self.sigma_max.powf(inv), self.sigma_min.powf(inv));
        let mut t: Vec<f64> = (0..n)
            .map(|i| {
                if n == 1 {
                    self.sigma_max
                } else {
                    (hi + i as f64 / (n - 1) as f64 * (lo - hi)).powf(self.rho)
                }
            })
            .collect();
        t.push(0.0);
        t
    }
}

/// Mean squared error of `pred` against `target`, averaged per group and then
/// across the non-empty groups.
pub fn grouped_mse(pred: &FeatureTriple, target: &FeatureTriple) -> f64 {
    let mut total = 0.0;
    let mut groups = 0;
    for (p, t) in pred.groups().iter().zip(target.groups()) {
        if p.is_empty() {
            continue;
        }
        let sse: f64 = p.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum();
        total += sse / p.len() as f64;
        groups += 1;
    }
    if groups == 0 {
        0.0
    } else {
        total / groups as f64
    }
}

/// Weighted denoising loss `λ(σ) · mse(D(x0 + σε; σ), x0)` for a given noise draw `eps`.
pub fn edm_loss(
    d: &dyn Denoiser,
    cfg: &NoiseConfig,
    x0: &FeatureTriple,
    eps: &FeatureTriple,
    sigma: f64,
    ctx: &DenoiseContext<'_>,
) -> f64 {
    let x = x0.combine(1.0, eps, sigma);
    let pred = d.denoise(&x, sigma, ctx);
    cfg.loss_weight(sigma) * grouped_mse(&pred, x0)
}

/// Deterministic second-order (Heun) integration of the probability-flow ODE
/// from `sigma_max` down to 0. Only the initial noise is random.
pub fn reverse_sde_sample(
    d: &dyn Denoiser,
    cfg: &NoiseConfig,
    ctx: &DenoiseContext<'_>,
    rng: &mut impl Rng,
) -> FeatureTriple {
    let t = cfg.schedule();
    let mut x =
        FeatureTriple::standard_normal(&FeatureTriple::zeros_for(ctx.host), rng).map(|z| z * t[0]);
    for i in 0..t.len() - 1 {
        let (cur, next) = (t[i], t[i + 1]);
        let denoised = d.denoise(&x, cur, ctx);
        let slope = x.combine(1.0 / cur, &denoised, -1.0 / cur);
        let euler = x.combine(1.0, &slope, next - cur);
        x = if next > 0.0 {
            let denoised2 = d.denoise(&euler, next, ctx);
            let slope2 = euler.combine(1.0 / next, &denoised2, -1.0 / next);
            let avg = slope.combine(0.5, &slope2, 0.5);
            x.combine(1.0, &avg, next - cur)
        } else {
            euler
        };
    }
    x
}
