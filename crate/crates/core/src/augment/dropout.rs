use ndarray::s;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::types::ChannelData;

/// Rectangular time x line patches zeroed across all elements. The firing
/// probability lives in [`PipelineConfig::dropout_prob`](super::PipelineConfig).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DropoutParams {
    pub num_patches: usize,
    pub patch_time: usize,
    pub patch_lines: usize,
}

impl Default for DropoutParams {
    fn default() -> Self {
        DropoutParams {
            num_patches: 5,
            patch_time: 64,
            patch_lines: 16,
        }
    }
}

/// Top-left `(t, l)` corners of the patches drawn from `seed`.
pub fn dropout_corners(
    p: &DropoutParams,
    num_samples: usize,
    num_lines: usize,
    seed: Seed,
) -> Result<Vec<(usize, usize)>> {
    if p.patch_time > num_samples || p.patch_lines > num_lines {
        return Err(Error::param(format!(
            "dropout patch {}x{} does not fit in {num_samples}x{num_lines}",
            p.patch_time, p.patch_lines
        )));
    }
    let mut rng = seed.rng();
    Ok((0..p.num_patches)
        .map(|_| {
            (
                rng.random_range(0..=num_samples - p.patch_time),
                rng.random_range(0..=num_lines - p.patch_lines),
            )
        })
        .collect())
}

pub fn coarse_dropout(cd: &ChannelData, p: &DropoutParams, seed: Seed) -> Result<ChannelData> {
    let (_, n_t, n_lines) = cd.probe().shape();
    let corners = dropout_corners(p, n_t, n_lines, seed)?;
    let mut data = cd.data().clone();
    for (t0, l0) in corners {
        data.slice_mut(s![.., t0..t0 + p.patch_time, l0..l0 + p.patch_lines])
            .fill(0.0);
    }
    cd.with_data(data)
}
