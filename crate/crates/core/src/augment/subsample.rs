use ndarray::Axis;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::types::ChannelData;

/// Zero-stuffing subsampling along time and lines plus random element masking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubsampleParams {
    pub time_factor: usize,
    pub line_factor: usize,
    pub element_keep_fraction_range: [f64; 2],
}

impl Default for SubsampleParams {
    fn default() -> Self {
        SubsampleParams {
            time_factor: 2,
            line_factor: 2,
            element_keep_fraction_range: [0.25, 0.5],
        }
    }
}

impl SubsampleParams {
    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.element_keep_fraction_range;
        if self.time_factor < 1 || self.line_factor < 1 {
            return Err(Error::param("subsampling factors must be >= 1"));
        }
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::param("element_keep_fraction_range must satisfy 0 < lo <= hi <= 1"));
        }
        Ok(())
    }

    /// Inclusive range of kept element counts for `num_elements`.
    pub fn keep_count_range(&self, num_elements: usize) -> (usize, usize) {
        let [lo, hi] = self.element_keep_fraction_range;
        let n = num_elements as f64;
        let min = ((lo * n).ceil() as usize).clamp(1, num_elements);
        let max = ((hi * n).floor() as usize).clamp(min, num_elements);
        (min, max)
    }
}

pub fn subsample_mask(cd: &ChannelData, p: &SubsampleParams, seed: Seed) -> Result<ChannelData> {
    p.validate()?;
    let (n_el, _, _) = cd.probe().shape();
    let (kmin, kmax) = p.keep_count_range(n_el);
    let mut rng = seed.rng();
    let keep_count = rng.random_range(kmin..=kmax);
    let mut keep = vec![false; n_el];
    for e in index::sample(&mut rng, n_el, keep_count) {
        keep[e] = true;
    }

    let mut data = cd.data().clone();
    for (e, mut slice) in data.axis_iter_mut(Axis(0)).enumerate() {
        if !keep[e] {
            slice.fill(0.0);
            continue;
        }
        for ((t, l), v) in slice.indexed_iter_mut() {
            if t % p.time_factor != 0 || l % p.line_factor != 0 {
                *v = 0.0;
            }
        }
    }
    cd.with_data(data)
}
