//! Single- and multi-scale structural similarity.
//!
//! Local statistics use a separable 11-tap Gaussian window (σ = 1.5) over the
//! valid region only. With `C3 = C2 / 2` the contrast and structure terms
//! combine into `cs = (2σxy + C2) / (σx² + σy² + C2)`.
//!
//! MS-SSIM halves resolution between scales with a 2x2 mean and combines
//! `l_M^α_M · Π_m cs_m^β_m` (β_m = γ_m).

use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MsSsimParams {
    pub k1: f64,
    pub k2: f64,
    /// Dynamic range `L` of pixel values.
    pub dynamic_range: f64,
    pub window_size: usize,
    pub window_sigma: f64,
    /// Per-scale contrast/structure exponents; the last one is also the
    /// luminance exponent. Its length is the number of scales.
    pub scale_weights: Vec<f64>,
}

impl Default for MsSsimParams {
    fn default() -> Self {
        MsSsimParams {
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
            window_size: 11,
            window_sigma: 1.5,
            scale_weights: vec![0.0448, 0.2856, 0.3001, 0.2363, 0.1333],
        }
    }
}

impl MsSsimParams {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    pub fn c3(&self) -> f64 {
        self.c2() / 2.0
    }

    pub fn num_scales(&self) -> usize {
        self.scale_weights.len()
    }

    /// Smallest image side MS-SSIM accepts.
    pub fn min_size(&self) -> usize {
        (1 << (self.num_scales().max(1) - 1)) * self.window_size
    }
}

/// Normalized 1-D Gaussian taps.
pub fn gaussian_window(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..size)
        .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Valid-mode separable filtering.
fn filter(x: &Array2<f64>, w: &[f64]) -> Array2<f64> {
    let (h, wd) = x.dim();
    let n = w.len();
    let (oh, ow) = (h + 1 - n, wd + 1 - n);
    let mut tmp = Array2::<f64>::zeros((h, ow));
    for i in 0..h {
        let row = x.row(i);
        for j in 0..ow {
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                acc += wk * row[j + k];
            }
            tmp[[i, j]] = acc;
        }
    }
    let mut out = Array2::<f64>::zeros((oh, ow));
    for i in 0..oh {
        for (k, wk) in w.iter().enumerate() {
            let src = tmp.row(i + k);
            let mut dst = out.row_mut(i);
            dst.scaled_add(*wk, &src);
        }
    }
    out
}

/// Per-pixel luminance and contrast-structure maps over the valid region.
struct Components {
    luminance: Array2<f64>,
    cs: Array2<f64>,
}

fn components(x: &Array2<f64>, y: &Array2<f64>, p: &MsSsimParams) -> Components {
    let w = gaussian_window(p.window_size, p.window_sigma);
    let mu_x = filter(x, &w);
    let mu_y = filter(y, &w);
    let xx = filter(&(x * x), &w);
    let yy = filter(&(y * y), &w);
    let xy = filter(&(x * y), &w);
    let (c1, c2) = (p.c1(), p.c2());
    let luminance = Zip::from(&mu_x)
        .and(&mu_y)
        .map_collect(|&mx, &my| (2.0 * mx * my + c1) / (mx * mx + my * my + c1));
    let mut cs = Array2::zeros(mu_x.dim());
    Zip::from(&mut cs)
        .and(&mu_x)
        .and(&mu_y)
        .and(&xx)
        .and(&yy)
        .and(&xy)
        .for_each(|c, &mx, &my, &sxx, &syy, &sxy| {
            let vx = sxx - mx * mx;
            let vy = syy - my * my;
            let cov = sxy - mx * my;
            *c = (2.0 * cov + c2) / (vx + vy + c2);
        });
    Components { luminance, cs }
}

fn check_dims(x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::Shape {
            expected: x.shape().to_vec(),
            got: y.shape().to_vec(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsimMap {
    pub map: Array2<f64>,
    pub mean: f64,
}

/// Single-scale SSIM with unit exponents.
pub fn ssim_map(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, p: &MsSsimParams) -> Result<SsimMap> {
    check_dims(&x, &y)?;
    let (h, w) = x.dim();
    if h < p.window_size || w < p.window_size {
        return Err(Error::ImageTooSmall {
            height: h,
            width: w,
            min: p.window_size,
        });
    }
    let c = components(&x.to_owned(), &y.to_owned(), p);
    let map = c.luminance * c.cs;
    let mean = map.mean().unwrap_or(0.0);
    Ok(SsimMap { map, mean })
}

fn downsample(x: &Array2<f64>) -> Array2<f64> {
    let (h, w) = x.dim();
    Array2::from_shape_fn((h / 2, w / 2), |(i, j)| {
        0.25 * (x[[2 * i, 2 * j]] + x[[2 * i + 1, 2 * j]] + x[[2 * i, 2 * j + 1]] + x[[2 * i + 1, 2 * j + 1]])
    })
}

pub fn ms_ssim(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, p: &MsSsimParams) -> Result<f64> {
    check_dims(&x, &y)?;
    let (h, w) = x.dim();
    let min = p.min_size();
    if p.num_scales() == 0 {
        return Err(Error::param("at least one scale is required"));
    }
    if h < min || w < min {
        return Err(Error::ImageTooSmall {
            height: h,
            width: w,
            min,
        });
    }
    let mut xs = x.to_owned();
    let mut ys = y.to_owned();
    let mut result = 1.0;
    let last = p.num_scales() - 1;
    for (m, &weight) in p.scale_weights.iter().enumerate() {
        let c = components(&xs, &ys, p);
        let cs = c.cs.mean().unwrap_or(0.0).max(0.0);
        result *= cs.powf(weight);
        if m == last {
            let l = c.luminance.mean().unwrap_or(0.0).max(0.0);
            result *= l.powf(weight);
        } else {
            xs = downsample(&xs);
            ys = downsample(&ys);
        }
    }
    Ok(result.min(1.0))
}

pub fn ms_ssim_loss(yhat: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, p: &MsSsimParams) -> Result<f64> {
    Ok(1.0 - ms_ssim(yhat, y, p)?)
}
