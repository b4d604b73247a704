use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::types::ChannelData;

/// Additive `N(0, 50)` and multiplicative `N(1, 0.8)` noise; second
/// parameters are variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianNoiseParams {
    pub additive_variance: f64,
    pub multiplicative_mean: f64,
    pub multiplicative_variance: f64,
}

impl Default for GaussianNoiseParams {
    fn default() -> Self {
        GaussianNoiseParams {
            additive_variance: 50.0,
            multiplicative_mean: 1.0,
            multiplicative_variance: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaussianBranch {
    Additive,
    Multiplicative,
}

/// Fair coin between the two branches, drawn from `seed`.
pub fn choose_gaussian_branch(seed: Seed) -> GaussianBranch {
    if seed.derive(0).rng().random_bool(0.5) {
        GaussianBranch::Additive
    } else {
        GaussianBranch::Multiplicative
    }
}

pub fn gaussian_noise_with(
    cd: &ChannelData,
    p: &GaussianNoiseParams,
    branch: GaussianBranch,
    seed: Seed,
) -> Result<ChannelData> {
    let (mean, var) = match branch {
        GaussianBranch::Additive => (0.0, p.additive_variance),
        GaussianBranch::Multiplicative => (p.multiplicative_mean, p.multiplicative_variance),
    };
    let normal = Normal::new(mean, var.sqrt())
        .map_err(|_| Error::param(format!("invalid noise variance {var}")))?;
    let mut rng = seed.derive(1).rng();
    let mut data = cd.data().clone();
    data.iter_mut().for_each(|x| {
        let z = normal.sample(&mut rng);
        *x = match branch {
            GaussianBranch::Additive => (*x as f64 + z) as f32,
            GaussianBranch::Multiplicative => (*x as f64 * z) as f32,
        };
    });
    cd.with_data(data)
}

pub fn gaussian_noise(cd: &ChannelData, p: &GaussianNoiseParams, seed: Seed) -> Result<ChannelData> {
    gaussian_noise_with(cd, p, choose_gaussian_branch(seed), seed)
}
