//! Lesion/background contrast metrics.
//!
//! - CNR = 20 log10(|μc − μb| / sqrt(σc² + σb²)), population standard deviations.
//! - gCNR = 1 − Σ min(pc, pb) over shared-range histograms.
//! - CR = −20 log10(μlesion / μbackground).
//!
//! Degenerate cases are reported as infinities rather than errors: equal means
//! give CNR = −∞ and a zero lesion mean gives CR = +∞.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BModeImage, RegionMask};

/// Histogram bin count for gCNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GcnrBins {
    /// Freedman–Diaconis width on the pooled pixels, clamped to `[2, 256]` bins.
    #[default]
    Auto,
    Fixed(usize),
}

/// JSON encoding of metric values with `"inf"`, `"-inf"` and `"nan"` strings
/// for non-finite numbers.
mod sentinel {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_str("nan")
        } else if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("unexpected metric value {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    #[serde(with = "sentinel")]
    pub cnr_db: f64,
    #[serde(with = "sentinel")]
    pub gcnr: f64,
    #[serde(with = "sentinel")]
    pub cr_db: f64,
    pub lesion_pixel_count: usize,
    pub background_pixel_count: usize,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.iter().all(|&x| x == v[0]) {
        return (v[0], 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn cnr_db(lesion: &[f64], background: &[f64]) -> f64 {
    let (mc, sc) = mean_std(lesion);
    let (mb, sb) = mean_std(background);
    let diff = (mc - mb).abs();
    if diff == 0.0 {
        return f64::NEG_INFINITY;
    }
    20.0 * (diff / (sc * sc + sb * sb).sqrt()).log10()
}

pub fn cr_db(lesion: &[f64], background: &[f64]) -> f64 {
    let (ml, _) = mean_std(lesion);
    let (mb, _) = mean_std(background);
    if ml == 0.0 {
        return f64::INFINITY;
    }
    -20.0 * (ml / mb).log10()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}

fn bin_count(bins: GcnrBins, lesion: &[f64], background: &[f64], range: f64) -> usize {
    match bins {
        GcnrBins::Fixed(n) => n.max(1),
        GcnrBins::Auto => {
            let mut pooled: Vec<f64> = lesion.iter().chain(background).copied().collect();
            pooled.sort_by(f64::total_cmp);
            let iqr = quantile(&pooled, 0.75) - quantile(&pooled, 0.25);
            let width = 2.0 * iqr / (pooled.len() as f64).cbrt();
            if width > 0.0 {
                ((range / width).ceil() as usize).clamp(2, 256)
            } else {
                256
            }
        }
    }
}

pub fn gcnr(lesion: &[f64], background: &[f64], bins: GcnrBins) -> f64 {
    let lo = lesion.iter().chain(background).cloned().fold(f64::INFINITY, f64::min);
    let hi = lesion.iter().chain(background).cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if !(range > 0.0) {
        // both regions hold one identical value
        return 0.0;
    }
    let n_bins = bin_count(bins, lesion, background, range);
    let hist = |v: &[f64]| {
        let mut h = vec![0usize; n_bins];
        for &x in v {
            let b = (((x - lo) / range) * n_bins as f64) as usize;
            h[b.min(n_bins - 1)] += 1;
        }
        h
    };
    let (hc, hb) = (hist(lesion), hist(background));
    let (nc, nb) = (lesion.len() as f64, background.len() as f64);
    let overlap: f64 = hc
        .iter()
        .zip(&hb)
        .map(|(&a, &b)| (a as f64 / nc).min(b as f64 / nb))
        .sum();
    (1.0 - overlap).clamp(0.0, 1.0)
}

fn region(pixels: ArrayView2<'_, f64>, mask: ArrayView2<'_, bool>) -> Vec<f64> {
    pixels
        .iter()
        .zip(mask.iter())
        .filter_map(|(p, m)| m.then_some(*p))
        .collect()
}

pub fn contrast_metrics_with(
    pixels: ArrayView2<'_, f64>,
    mask: &RegionMask,
    bins: GcnrBins,
) -> Result<ContrastReport> {
    if pixels.dim() != mask.lesion().dim() {
        return Err(Error::Shape {
            expected: mask.lesion().shape().to_vec(),
            got: pixels.shape().to_vec(),
        });
    }
    let lesion = region(pixels, mask.lesion());
    let background = region(pixels, mask.background());
    if lesion.is_empty() {
        return Err(Error::EmptyRegion("lesion"));
    }
    if background.is_empty() {
        return Err(Error::EmptyRegion("background"));
    }
    Ok(ContrastReport {
        cnr_db: cnr_db(&lesion, &background),
        gcnr: gcnr(&lesion, &background, bins),
        cr_db: cr_db(&lesion, &background),
        lesion_pixel_count: lesion.len(),
        background_pixel_count: background.len(),
    })
}

pub fn contrast_metrics(img: &BModeImage, mask: &RegionMask) -> Result<ContrastReport> {
    contrast_metrics_with(img.pixels(), mask, GcnrBins::Auto)
}

/// Width in pixels of the main lobe on `row` at `drop_db` below the row
/// maximum, for a log-compressed image spanning `dynamic_range_db`.
pub fn lateral_width(pixels: ArrayView2<'_, f64>, row: usize, drop_db: f64, dynamic_range_db: f64) -> f64 {
    let r = pixels.row(row);
    let (peak_at, peak) = r
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
    let level = peak - drop_db / dynamic_range_db;
    let crossing = |step: isize| -> f64 {
        let mut j = peak_at as isize;
        loop {
            let next = j + step;
            if next < 0 || next >= r.len() as isize {
                return j as f64;
            }
            let (a, b) = (r[j as usize], r[next as usize]);
            if b < level {
                return j as f64 + step as f64 * (a - level) / (a - b);
            }
            j = next;
        }
    };
    crossing(1) - crossing(-1)
}
