use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::PreImage;
use crate::error::{Error, Result};
use crate::types::{BModeImage, IMAGE_SIZE};

pub const DEFAULT_DYNAMIC_RANGE_DB: f64 = 60.0;

/// Magnitude of the analytic signal along the axial axis of every line.
pub fn envelope(pre: &PreImage) -> Array2<f64> {
    let (n_t, n_lines) = pre.dim();
    let mut out = Array2::<f64>::zeros((n_t, n_lines));
    if n_t == 0 {
        return out;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n_t);
    let inv = planner.plan_fft_inverse(n_t);
    // one-sided spectrum multiplier: DC and Nyquist kept, positive bins doubled
    let gain: Vec<f64> = (0..n_t)
        .map(|k| {
            if k == 0 || (n_t % 2 == 0 && k == n_t / 2) {
                1.0
            } else if k < n_t.div_ceil(2) {
                2.0
            } else {
                0.0
            }
        })
        .collect();
    let mut buf = vec![Complex64::default(); n_t];
    for l in 0..n_lines {
        for (b, v) in buf.iter_mut().zip(pre.values.column(l)) {
            *b = Complex64::new(*v, 0.0);
        }
        fwd.process(&mut buf);
        for (b, g) in buf.iter_mut().zip(&gain) {
            *b *= *g;
        }
        inv.process(&mut buf);
        for (o, b) in out.column_mut(l).iter_mut().zip(&buf) {
            *o = b.norm() / n_t as f64;
        }
    }
    out
}

fn bilinear(src: &Array2<f64>, rows: usize, cols: usize) -> Array2<f64> {
    let (h, w) = src.dim();
    let coord = |i: usize, n_src: usize, n_dst: usize| -> (usize, usize, f64) {
        if n_src == 1 || n_dst == 1 {
            return (0, 0, 0.0);
        }
        let x = i as f64 * (n_src - 1) as f64 / (n_dst - 1) as f64;
        let i0 = (x.floor() as usize).min(n_src - 1);
        let i1 = (i0 + 1).min(n_src - 1);
        (i0, i1, x - i0 as f64)
    };
    let rc: Vec<_> = (0..rows).map(|i| coord(i, h, rows)).collect();
    let cc: Vec<_> = (0..cols).map(|j| coord(j, w, cols)).collect();
    Array2::from_shape_fn((rows, cols), |(i, j)| {
        let (r0, r1, fr) = rc[i];
        let (c0, c1, fc) = cc[j];
        let top = src[[r0, c0]] + fc * (src[[r0, c1]] - src[[r0, c0]]);
        let bot = src[[r1, c0]] + fc * (src[[r1, c1]] - src[[r1, c0]]);
        top + fr * (bot - top)
    })
}

/// Envelope detection, log compression to `dynamic_range_db` and bilinear
/// resampling to the 1024x1024 display grid.
///
/// Pixels are quantized to the 16-bit display levels `k / 65535`, which makes
/// the output independent of the pre-image's overall scale. An all-zero
/// pre-image yields an all-zero image.
pub fn image(pre: &PreImage, dynamic_range_db: f64) -> Result<BModeImage> {
    if !(dynamic_range_db > 0.0 && dynamic_range_db.is_finite()) {
        return Err(Error::param("dynamic range must be positive"));
    }
    if pre.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("pre-image contains non-finite values"));
    }
    let (n_t, n_lines) = pre.dim();
    if n_t == 0 || n_lines == 0 {
        return Err(Error::param("empty pre-image"));
    }
    let peak = pre.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(BModeImage::zeros(dynamic_range_db));
    }
    let scaled = PreImage {
        values: pre.values.mapv(|v| v / peak),
    };
    let env = envelope(&scaled);
    let env_max = env.iter().cloned().fold(0.0, f64::max);
    let compressed = env.mapv(|v| {
        let db = 20.0 * (v / env_max).log10();
        (db.max(-dynamic_range_db).min(0.0) + dynamic_range_db) / dynamic_range_db
    });
    let pixels = bilinear(&compressed, IMAGE_SIZE, IMAGE_SIZE)
        .mapv(|p| (p.clamp(0.0, 1.0) * 65535.0).round() / 65535.0);
    BModeImage::new(pixels, dynamic_range_db)
}
