//! Ultrasound channel-data toolkit.
//!
//! The crate covers the full path from raw per-element RF recordings to
//! clinical contrast numbers:
//!
//! - [`simulate`]: phantom generation and focused line-by-line RF synthesis.
//! - [`beamform`]: time-of-flight correction, delay-and-sum and minimum-variance
//!   apodization, B-mode image formation.
//! - [`augment`]: channel-data augmentations (speckle noise, Gaussian noise,
//!   spectrogram masking/stretching, subsampling, coarse dropout) and a seeded
//!   probabilistic pipeline.
//! - [`quality`]: SSIM / MS-SSIM, the compound beamforming and task losses,
//!   histogram matching, and CNR / gCNR / CR contrast metrics.
//! - [`io`]: the USCD channel-data container and 16-bit PNG images.
//!
//! All tensors use the axis order `[element, time sample, scan line]`.

pub mod augment;
pub mod beamform;
pub mod cli;
pub mod error;
pub mod io;
pub mod quality;
pub mod rng;
pub mod simulate;
pub mod types;

pub use error::{Error, Result};
pub use rng::Seed;
pub use types::{Alignment, BModeImage, ChannelData, ProbeConfig, RegionMask, IMAGE_SIZE};
