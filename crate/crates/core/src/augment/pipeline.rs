//! Seeded probabilistic chain of all augmentations.
//!
//! Stage order is fixed: speckle, Gaussian, SpecAugment, subsampling, coarse
//! dropout. Each stage fires independently with its own probability. The
//! firing coin and the stage's random stream come from separate sub-seeds of
//! the pipeline seed, so disabling one stage never shifts another's draws.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    coarse_dropout, gaussian_noise, spec_augment, speckle_noise, subsample_mask, DropoutParams,
    GaussianNoiseParams, SpecAugmentParams, SpeckleParams, SubsampleParams,
};
use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::types::ChannelData;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub speckle_prob: f64,
    pub gaussian_prob: f64,
    pub specaugment_prob: f64,
    pub subsample_prob: f64,
    pub dropout_prob: f64,
    pub seed: Seed,
    pub speckle: SpeckleParams,
    pub gaussian: GaussianNoiseParams,
    pub spec_augment: SpecAugmentParams,
    pub subsample: SubsampleParams,
    pub dropout: DropoutParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            speckle_prob: 0.5,
            gaussian_prob: 1.0 / 3.0,
            specaugment_prob: 1.0 / 3.0,
            subsample_prob: 1.0 / 3.0,
            dropout_prob: 1.0 / 3.0,
            seed: Seed(0),
            speckle: SpeckleParams::default(),
            gaussian: GaussianNoiseParams::default(),
            spec_augment: SpecAugmentParams::default(),
            subsample: SubsampleParams::default(),
            dropout: DropoutParams::default(),
        }
    }
}

impl PipelineConfig {
    /// Every stage disabled.
    pub fn disabled() -> Self {
        PipelineConfig {
            speckle_prob: 0.0,
            gaussian_prob: 0.0,
            specaugment_prob: 0.0,
            subsample_prob: 0.0,
            dropout_prob: 0.0,
            ..Default::default()
        }
    }

    pub fn probability(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Speckle => self.speckle_prob,
            Stage::Gaussian => self.gaussian_prob,
            Stage::SpecAugment => self.specaugment_prob,
            Stage::Subsample => self.subsample_prob,
            Stage::Dropout => self.dropout_prob,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for stage in Stage::ALL {
            let p = self.probability(stage);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("{stage:?} probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Speckle,
    Gaussian,
    SpecAugment,
    Subsample,
    Dropout,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Speckle,
        Stage::Gaussian,
        Stage::SpecAugment,
        Stage::Subsample,
        Stage::Dropout,
    ];

    fn index(self) -> u64 {
        Stage::ALL.iter().position(|s| *s == self).unwrap() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub fired: bool,
}

/// Runs the chain and reports which stages fired.
pub fn augment_pipeline_logged(
    cd: &ChannelData,
    cfg: &PipelineConfig,
) -> Result<(ChannelData, Vec<StageRecord>)> {
    cfg.validate()?;
    let mut current = cd.clone();
    let mut log = Vec::with_capacity(Stage::ALL.len());
    for stage in Stage::ALL {
        let p = cfg.probability(stage);
        let fired = p > 0.0 && cfg.seed.derive(stage.index()).rng().random_bool(p);
        if fired {
            let seed = cfg.seed.derive(100 + stage.index());
            current = match stage {
                Stage::Speckle => speckle_noise(&current, &cfg.speckle, seed)?,
                Stage::Gaussian => gaussian_noise(&current, &cfg.gaussian, seed)?,
                Stage::SpecAugment => spec_augment(&current, &cfg.spec_augment, seed)?,
                Stage::Subsample => subsample_mask(&current, &cfg.subsample, seed)?,
                Stage::Dropout => coarse_dropout(&current, &cfg.dropout, seed)?,
            };
        }
        log.push(StageRecord { stage, fired });
    }
    Ok((current, log))
}

pub fn augment_pipeline(cd: &ChannelData, cfg: &PipelineConfig) -> Result<ChannelData> {
    augment_pipeline_logged(cd, cfg).map(|(out, _)| out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_validated() {
        let cfg = PipelineConfig { gaussian_prob: 1.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn config_json_is_strict() {
        let ok: PipelineConfig = serde_json::from_str(r#"{"speckle_prob": 1.0, "seed": 4}"#).unwrap();
        assert_eq!(ok.seed, Seed(4));
        assert_eq!(ok.dropout, DropoutParams::default());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"speckle_prb": 1.0}"#).is_err());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"speckle": {"noise": 1.0}}"#).is_err());
    }
}
