//! Channel-data augmentations.
//!
//! Every augmentation maps a [`ChannelData`](crate::ChannelData) to a new one
//! with identical shape and metadata, and is a deterministic function of its
//! input, parameters and [`Seed`](crate::Seed).

mod dropout;
mod noise;
mod pipeline;
mod spec_augment;
mod speckle;
mod subsample;

pub use dropout::{coarse_dropout, dropout_corners, DropoutParams};
pub use noise::{choose_gaussian_branch, gaussian_noise, gaussian_noise_with, GaussianBranch, GaussianNoiseParams};
pub use pipeline::{augment_pipeline, augment_pipeline_logged, PipelineConfig, Stage, StageRecord};
pub use spec_augment::{
    frame_count, hann_window, istft, spec_augment, spec_augment_with_plan, stft, stretched_len, SpecAugmentParams,
    SpecAugmentPlan, Stretch,
};
pub use speckle::{speckle_noise, speckled_elements, SpeckleParams, DEFAULT_KERNEL};
pub use subsample::{subsample_mask, SubsampleParams};
