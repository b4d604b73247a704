use ndarray::{Array2, ArrayView2};

use crate::error::Result;
use crate::types::BModeImage;

pub const HISTOGRAM_BINS: usize = 256;

fn bin_of(p: f64) -> (usize, f64) {
    let x = p.clamp(0.0, 1.0) * HISTOGRAM_BINS as f64;
    let b = (x as usize).min(HISTOGRAM_BINS - 1);
    (b, (x - b as f64).min(1.0))
}

fn lerp_sorted(sorted: &[f64], pos: f64) -> f64 {
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    let f = pos - i as f64;
    sorted[i] + f * (sorted[j] - sorted[i])
}

/// CDF matching: source pixels are binned into 256 uniform bins on `[0, 1]`.
/// Bin `b` owns the reference samples between the source CDF before and after
/// `b`; a pixel is placed among them by its position inside the bin.
pub fn histogram_match_pixels(src: ArrayView2<'_, f64>, reference: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut sorted: Vec<f64> = reference.iter().copied().collect();
    if sorted.is_empty() || src.is_empty() {
        return src.to_owned();
    }
    sorted.sort_by(f64::total_cmp);
    let mut hist = [0usize; HISTOGRAM_BINS];
    for &p in src.iter() {
        hist[bin_of(p).0] += 1;
    }
    let (n_src, n_ref) = (src.len(), sorted.len());
    let mut span = [(0usize, 0usize); HISTOGRAM_BINS];
    let mut cum = 0usize;
    for (b, count) in hist.iter().enumerate() {
        let lo = (cum * n_ref / n_src).min(n_ref - 1);
        cum += count;
        let hi = (cum * n_ref).div_ceil(n_src).saturating_sub(1).clamp(lo, n_ref - 1);
        span[b] = (lo, hi);
    }
    src.mapv(|p| {
        let (b, f) = bin_of(p);
        let (lo, hi) = span[b];
        lerp_sorted(&sorted, lo as f64 + f * (hi - lo) as f64).clamp(0.0, 1.0)
    })
}

pub fn histogram_match(img: &BModeImage, reference: &BModeImage) -> Result<BModeImage> {
    BModeImage::new(
        histogram_match_pixels(img.pixels(), reference.pixels()),
        img.dynamic_range_db(),
    )
}
