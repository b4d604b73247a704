//! Spectrogram-domain augmentation of channel data.
//!
//! Every `(element, line)` trace is turned into a one-sided complex STFT
//! (periodic Hann window). The spectrogram stack may be stretched along
//! frames or along scan lines, then contiguous ranges along frames, frequency
//! bins and lines are zeroed. The result is inverted by least-squares
//! overlap-add and cut or zero-padded back to the input shape.
//!
//! Each trace is padded with `fft_size - hop` zeros on both ends before
//! analysis, so every real sample is covered by the same number of frames and
//! the overlap-add normalization is constant over the output.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{s, Array2, Array3, Axis};
use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::types::ChannelData;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Stretch {
    /// Resample frames by this factor.
    Time(f64),
    /// Resample scan lines by this factor.
    Lines(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecAugmentParams {
    pub fft_size: usize,
    pub hop: usize,
    pub max_mask_time_frames: usize,
    pub max_mask_freq_bins: usize,
    pub max_mask_lines: usize,
    pub time_stretch_range: [f64; 2],
    pub line_stretch_range: [f64; 2],
    pub enable_stretch: bool,
    pub enable_mask: bool,
    /// Overrides the random stretch draw when set.
    pub forced_stretch: Option<Stretch>,
}

impl Default for SpecAugmentParams {
    fn default() -> Self {
        SpecAugmentParams {
            fft_size: 256,
            hop: 64,
            max_mask_time_frames: 20,
            max_mask_freq_bins: 16,
            max_mask_lines: 16,
            time_stretch_range: [0.9, 1.2],
            line_stretch_range: [0.95, 1.1],
            enable_stretch: true,
            enable_mask: true,
            forced_stretch: None,
        }
    }
}

impl SpecAugmentParams {
    /// Only modification-free inversion: no stretch and no masks.
    pub fn identity() -> Self {
        SpecAugmentParams {
            enable_stretch: false,
            enable_mask: false,
            ..Default::default()
        }
    }

    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    fn validate(&self, num_samples: usize) -> Result<()> {
        if self.fft_size < 2 || self.hop == 0 || self.hop > self.fft_size {
            return Err(Error::param("need fft_size >= 2 and 0 < hop <= fft_size"));
        }
        // periodic Hann has a single zero per frame; any hop below fft_size
        // covers every interior sample with a nonzero window value
        if self.hop == self.fft_size {
            return Err(Error::param("hop must be smaller than fft_size for overlap-add coverage"));
        }
        if self.fft_size > num_samples {
            return Err(Error::param(format!(
                "fft_size {} exceeds the {num_samples} time samples",
                self.fft_size
            )));
        }
        for (name, [lo, hi]) in [
            ("time_stretch_range", self.time_stretch_range),
            ("line_stretch_range", self.line_stretch_range),
        ] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::param(format!("{name} must satisfy 0 < lo <= hi")));
            }
        }
        if let Some(Stretch::Time(f) | Stretch::Lines(f)) = self.forced_stretch {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::param("stretch factor must be positive"));
            }
        }
        Ok(())
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
        .collect()
}

/// Frames of a `len`-sample trace, including the edge padding.
pub fn frame_count(len: usize, fft_size: usize, hop: usize) -> usize {
    1 + (edge_pad(fft_size, hop) + len - 1) / hop
}

fn edge_pad(fft_size: usize, hop: usize) -> usize {
    fft_size - hop
}

pub fn stretched_len(n: usize, factor: f64) -> usize {
    ((n as f64 * factor).round() as usize).max(1)
}

struct Transform {
    fft_size: usize,
    hop: usize,
    window: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
}

impl Transform {
    fn new(fft_size: usize, hop: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transform {
            fft_size,
            hop,
            window: hann_window(fft_size),
            fwd: planner.plan_fft_forward(fft_size),
            inv: planner.plan_fft_inverse(fft_size),
            buf: vec![Complex64::default(); fft_size],
        }
    }

    /// `[frame, bin]` one-sided spectrum.
    fn stft(&mut self, x: impl Iterator<Item = f64> + Clone, len: usize) -> Array2<Complex64> {
        let n_frames = frame_count(len, self.fft_size, self.hop);
        let n_bins = self.fft_size / 2 + 1;
        let pad = edge_pad(self.fft_size, self.hop);
        let samples: Vec<f64> = x.collect();
        let mut out = Array2::<Complex64>::zeros((n_frames, n_bins));
        for f in 0..n_frames {
            let start = f * self.hop;
            for (i, b) in self.buf.iter_mut().enumerate() {
                let v = (start + i)
                    .checked_sub(pad)
                    .and_then(|j| samples.get(j))
                    .copied()
                    .unwrap_or(0.0);
                *b = Complex64::new(v * self.window[i], 0.0);
            }
            self.fwd.process(&mut self.buf);
            for (o, b) in out.row_mut(f).iter_mut().zip(&self.buf) {
                *o = *b;
            }
        }
        out
    }

    /// Least-squares overlap-add inverse, `sum w·frame / sum w²`, cut to `len`.
    fn istft(&mut self, spec: &Array2<Complex64>, len: usize) -> Vec<f64> {
        let (n_frames, n_bins) = spec.dim();
        let n = self.fft_size;
        let total = (n_frames - 1) * self.hop + n;
        let mut num = vec![0.0; total];
        let mut den = vec![0.0; total];
        for f in 0..n_frames {
            let row = spec.row(f);
            for k in 0..n {
                // rebuild the Hermitian spectrum from the one-sided bins
                self.buf[k] = if k < n_bins {
                    row[k]
                } else {
                    row[n - k].conj()
                };
            }
            self.real_edge_bins(n_bins);
            self.inv.process(&mut self.buf);
            let start = f * self.hop;
            for k in 0..n {
                let w = self.window[k];
                num[start + k] += w * self.buf[k].re / n as f64;
                den[start + k] += w * w;
            }
        }
        let pad = edge_pad(n, self.hop);
        (pad..pad + len)
            .map(|i| match (num.get(i), den.get(i)) {
                (Some(&a), Some(&d)) if d > 1e-10 => a / d,
                _ => 0.0,
            })
            .collect()
    }

    /// DC and (even-length) Nyquist bins of a real signal are real.
    fn real_edge_bins(&mut self, n_bins: usize) {
        self.buf[0].im = 0.0;
        if self.fft_size % 2 == 0 {
            self.buf[n_bins - 1].im = 0.0;
        }
    }
}

/// One-sided STFT of a real signal, `[frame, bin]`.
pub fn stft(signal: &[f64], fft_size: usize, hop: usize) -> Array2<Complex64> {
    Transform::new(fft_size, hop).stft(signal.iter().copied(), signal.len())
}

/// Least-squares inverse of [`stft`], output length `len`.
pub fn istft(spec: &Array2<Complex64>, fft_size: usize, hop: usize, len: usize) -> Vec<f64> {
    Transform::new(fft_size, hop).istft(spec, len)
}

/// All random draws of one augmentation, fixed before any data is touched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecAugmentPlan {
    pub stretch: Option<Stretch>,
    /// Frame count before and after stretching.
    pub frames: (usize, usize),
    /// Line count before and after stretching.
    pub lines: (usize, usize),
    /// `(start, len)` of each zeroed range.
    pub time_mask: (usize, usize),
    pub freq_mask: (usize, usize),
    pub line_mask: (usize, usize),
}

fn draw_mask(rng: &mut impl Rng, max_len: usize, extent: usize) -> (usize, usize) {
    let len = rng.random_range(0..=max_len).min(extent);
    let start = rng.random_range(0..=extent - len);
    (start, len)
}

impl SpecAugmentPlan {
    pub fn draw(p: &SpecAugmentParams, num_samples: usize, num_lines: usize, seed: Seed) -> Result<Self> {
        p.validate(num_samples)?;
        let mut rng = seed.rng();
        let n_frames = frame_count(num_samples, p.fft_size, p.hop);
        let stretch = if !p.enable_stretch {
            None
        } else if let Some(forced) = p.forced_stretch {
            Some(forced)
        } else if rng.random_bool(0.5) {
            let [lo, hi] = p.time_stretch_range;
            Some(Stretch::Time(rng.random_range(lo..=hi)))
        } else {
            let [lo, hi] = p.line_stretch_range;
            Some(Stretch::Lines(rng.random_range(lo..=hi)))
        };
        let frames_out = match stretch {
            Some(Stretch::Time(a)) => stretched_len(n_frames, a),
            _ => n_frames,
        };
        let lines_out = match stretch {
            Some(Stretch::Lines(b)) => stretched_len(num_lines, b),
            _ => num_lines,
        };
        let (time_mask, freq_mask, line_mask) = if p.enable_mask {
            (
                draw_mask(&mut rng, p.max_mask_time_frames, frames_out),
                draw_mask(&mut rng, p.max_mask_freq_bins, p.num_bins()),
                draw_mask(&mut rng, p.max_mask_lines, lines_out),
            )
        } else {
            ((0, 0), (0, 0), (0, 0))
        };
        Ok(SpecAugmentPlan {
            stretch,
            frames: (n_frames, frames_out),
            lines: (num_lines, lines_out),
            time_mask,
            freq_mask,
            line_mask,
        })
    }
}

/// Linear resampling of `n_out` positions at `i / factor` along `axis`.
fn resample(a: &Array3<Complex64>, axis: usize, factor: f64, n_out: usize) -> Array3<Complex64> {
    let n_in = a.len_of(Axis(axis));
    let mut shape = [a.dim().0, a.dim().1, a.dim().2];
    shape[axis] = n_out;
    let mut out = Array3::<Complex64>::zeros(shape);
    for i in 0..n_out {
        let src = (i as f64 / factor).min((n_in - 1) as f64);
        let i0 = src.floor() as usize;
        let i1 = (i0 + 1).min(n_in - 1);
        let frac = src - i0 as f64;
        let lo = a.index_axis(Axis(axis), i0);
        let hi = a.index_axis(Axis(axis), i1);
        let mut dst = out.index_axis_mut(Axis(axis), i);
        ndarray::Zip::from(&mut dst)
            .and(&lo)
            .and(&hi)
            .for_each(|d, &x, &y| *d = x + (y - x) * frac);
    }
    out
}

pub fn spec_augment_with_plan(
    cd: &ChannelData,
    p: &SpecAugmentParams,
    plan: &SpecAugmentPlan,
) -> Result<ChannelData> {
    let (n_el, n_t, n_lines) = cd.probe().shape();
    p.validate(n_t)?;
    if plan.frames.0 != frame_count(n_t, p.fft_size, p.hop) || plan.lines.0 != n_lines {
        return Err(Error::param("plan was drawn for a different tensor shape"));
    }
    let mut tf = Transform::new(p.fft_size, p.hop);
    let n_bins = p.num_bins();
    let mut out = Array3::<f32>::zeros((n_el, n_t, n_lines));

    for e in 0..n_el {
        let slice = cd.data().index_axis(Axis(0), e);
        // [line, frame, bin]
        let mut spec = Array3::<Complex64>::zeros((n_lines, plan.frames.0, n_bins));
        for l in 0..n_lines {
            let col = slice.column(l);
            let s = tf.stft(col.iter().map(|&v| v as f64), n_t);
            spec.index_axis_mut(Axis(0), l).assign(&s);
        }
        match plan.stretch {
            Some(Stretch::Time(a)) => spec = resample(&spec, 1, a, plan.frames.1),
            Some(Stretch::Lines(b)) => spec = resample(&spec, 0, b, plan.lines.1),
            None => {}
        }
        let (ts, tl) = plan.time_mask;
        let (fs, fl) = plan.freq_mask;
        let (ls, ll) = plan.line_mask;
        spec.slice_mut(s![.., ts..ts + tl, ..]).fill(Complex64::default());
        spec.slice_mut(s![.., .., fs..fs + fl]).fill(Complex64::default());
        spec.slice_mut(s![ls..ls + ll, .., ..]).fill(Complex64::default());

        let mut dst = out.index_axis_mut(Axis(0), e);
        for l in 0..n_lines.min(plan.lines.1) {
            let frames = spec.index_axis(Axis(0), l).to_owned();
            let x = tf.istft(&frames, n_t);
            for (d, v) in dst.column_mut(l).iter_mut().zip(x) {
                *d = v as f32;
            }
        }
    }
    cd.with_data(out)
}

pub fn spec_augment(cd: &ChannelData, p: &SpecAugmentParams, seed: Seed) -> Result<ChannelData> {
    let (_, n_t, n_lines) = cd.probe().shape();
    let plan = SpecAugmentPlan::draw(p, n_t, n_lines, seed)?;
    spec_augment_with_plan(cd, p, &plan)
}
