//! Speckle noise on channel data.
//!
//! Each selected element's `T x L` slice is treated as an image. Two Gaussian
//! fields `Gx, Gy ~ N(0, σ²)` are correlated with a 5x3 weighting kernel to
//! give `U` and `V`, and the slice becomes
//!
//! ```text
//! X + 2 sgn(X) sqrt|X| U + U² + V²
//! ```
//!
//! With `abs_mode` the cross term uses `|X|` instead of `sqrt|X|`.

use ndarray::{Array2, ArrayViewMut2, Axis};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::types::ChannelData;

/// Default weighting kernel, rows along time, columns along scan lines.
pub const DEFAULT_KERNEL: [[f64; 3]; 5] = [
    [0.9 / 2.9, 0.9 / 2.9, 0.9 / 2.9],
    [0.8 / 2.9, 0.8 / 2.9, 0.8 / 2.9],
    [0.6 / 2.9, 0.0, 0.6 / 2.9],
    [0.4 / 2.9, 0.4 / 2.9, 0.4 / 2.9],
    [0.2 / 2.9, 0.2 / 2.9, 0.2 / 2.9],
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeckleParams {
    /// Variance σ² of the Gaussian fields.
    pub noise_level: f64,
    pub num_noisy_channels: usize,
    pub kernel: [[f64; 3]; 5],
    pub abs_mode: bool,
}

impl Default for SpeckleParams {
    fn default() -> Self {
        SpeckleParams {
            noise_level: 4.5,
            num_noisy_channels: 25,
            kernel: DEFAULT_KERNEL,
            abs_mode: false,
        }
    }
}

impl SpeckleParams {
    /// Number of phasors summed per sample, one less than the kernel size.
    pub fn num_phasors(&self) -> usize {
        15 - 1
    }
}

/// Element indices that receive noise: `{0, S, 2S, ..}` with `S = E / C̃`.
pub fn speckled_elements(num_elements: usize, num_noisy: usize) -> Vec<usize> {
    let stride = num_elements / num_noisy;
    (0..num_noisy).map(|j| j * stride).collect()
}

/// Same-size 2-D correlation with zero padding, kernel centred at (2, 1).
fn correlate(g: &Array2<f64>, k: &[[f64; 3]; 5]) -> Array2<f64> {
    let (h, w) = g.dim();
    let mut out = Array2::<f64>::zeros((h, w));
    for (a, row) in k.iter().enumerate() {
        for (b, &kv) in row.iter().enumerate() {
            if kv == 0.0 {
                continue;
            }
            let dt = a as isize - 2;
            let dl = b as isize - 1;
            for t in 0..h {
                let ts = t as isize + dt;
                if ts < 0 || ts >= h as isize {
                    continue;
                }
                let src = g.row(ts as usize);
                let mut dst = out.row_mut(t);
                for l in 0..w {
                    let ls = l as isize + dl;
                    if ls >= 0 && ls < w as isize {
                        dst[l] += kv * src[ls as usize];
                    }
                }
            }
        }
    }
    out
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn speckle_slice(mut slice: ArrayViewMut2<'_, f32>, p: &SpeckleParams, seed: Seed) {
    let dim = slice.dim();
    let normal = Normal::new(0.0, p.noise_level.sqrt()).expect("validated noise level");
    let mut rng = seed.rng();
    let gx = Array2::from_shape_simple_fn(dim, || normal.sample(&mut rng));
    let gy = Array2::from_shape_simple_fn(dim, || normal.sample(&mut rng));
    let u = correlate(&gx, &p.kernel);
    let v = correlate(&gy, &p.kernel);
    ndarray::Zip::from(&mut slice)
        .and(&u)
        .and(&v)
        .for_each(|x, &u, &v| {
            let xf = *x as f64;
            let mag = if p.abs_mode { xf.abs() } else { xf.abs().sqrt() };
            *x = (xf + 2.0 * sgn(xf) * mag * u + u * u + v * v) as f32;
        });
}

pub fn speckle_noise(cd: &ChannelData, p: &SpeckleParams, seed: Seed) -> Result<ChannelData> {
    if !(p.noise_level >= 0.0 && p.noise_level.is_finite()) {
        return Err(Error::param("speckle noise_level must be >= 0"));
    }
    let n_el = cd.probe().num_elements;
    if p.num_noisy_channels < 1 || p.num_noisy_channels > n_el {
        return Err(Error::param(format!(
            "num_noisy_channels must be in [1, {n_el}]"
        )));
    }
    if p.noise_level == 0.0 {
        return Ok(cd.clone());
    }
    let mut data = cd.data().clone();
    for e in speckled_elements(n_el, p.num_noisy_channels) {
        speckle_slice(data.index_axis_mut(Axis(0), e), p, seed.derive(e as u64));
    }
    cd.with_data(data)
}
