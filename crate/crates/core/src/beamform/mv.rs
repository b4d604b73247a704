//! Minimum-variance (Capon) apodization with subaperture smoothing and
//! diagonal loading.
//!
//! For each pixel the aligned element vector is split into overlapping
//! subapertures `y_k` of length `Lsub`. With `R0 = mean_k y_k y_kᵀ` (optionally
//! also averaged over neighbouring axial samples),
//!
//! ```text
//! R = R0 + ε I,   ε = Δ · trace(R0) / Lsub
//! w = R⁻¹ 1 / (1ᵀ R⁻¹ 1)
//! out = mean_k wᵀ y_k
//! ```
//!
//! The unit steering vector is correct because ToF-corrected data is already
//! steered to the pixel.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Array3, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use super::PreImage;
use crate::error::{Error, Result};
use crate::types::{Alignment, ChannelData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MvParams {
    pub subaperture_len: usize,
    pub diagonal_loading: f64,
    pub temporal_averaging: usize,
}

impl Default for MvParams {
    fn default() -> Self {
        MvParams {
            subaperture_len: 64,
            diagonal_loading: 0.01,
            temporal_averaging: 1,
        }
    }
}

impl MvParams {
    pub fn validate(&self, num_elements: usize) -> Result<()> {
        if self.subaperture_len < 1 || self.subaperture_len > num_elements {
            return Err(Error::param(format!(
                "subaperture_len {} must be in [1, {num_elements}]",
                self.subaperture_len
            )));
        }
        if !(self.diagonal_loading > 0.0 && self.diagonal_loading.is_finite()) {
            return Err(Error::param("diagonal_loading must be positive"));
        }
        if self.temporal_averaging < 1 {
            return Err(Error::param("temporal_averaging must be at least 1"));
        }
        Ok(())
    }
}

struct Solver {
    lsub: usize,
    loading: f64,
    cov: DMatrix<f64>,
    ones: DVector<f64>,
}

impl Solver {
    fn new(p: &MvParams) -> Self {
        Solver {
            lsub: p.subaperture_len,
            loading: p.diagonal_loading,
            cov: DMatrix::zeros(p.subaperture_len, p.subaperture_len),
            ones: DVector::from_element(p.subaperture_len, 1.0),
        }
    }

    /// Weights for one pixel. `None` when the covariance has zero trace.
    fn weights<'a>(&mut self, columns: impl Iterator<Item = ArrayView1<'a, f64>>) -> Option<DVector<f64>> {
        let n = self.lsub;
        self.cov.fill(0.0);
        let mut count = 0usize;
        for col in columns {
            let n_sub = col.len() - n + 1;
            for k in 0..n_sub {
                let y = col.slice(ndarray::s![k..k + n]);
                for i in 0..n {
                    let yi = y[i];
                    for j in i..n {
                        self.cov[(i, j)] += yi * y[j];
                    }
                }
            }
            count += n_sub;
        }
        for i in 0..n {
            for j in i..n {
                let v = self.cov[(i, j)] / count as f64;
                self.cov[(i, j)] = v;
                self.cov[(j, i)] = v;
            }
        }
        let trace = self.cov.trace();
        if trace == 0.0 {
            return None;
        }
        let eps = self.loading * trace / n as f64;
        for i in 0..n {
            self.cov[(i, i)] += eps;
        }
        let z = match self.cov.clone().cholesky() {
            Some(ch) => ch.solve(&self.ones),
            None => self.cov.clone().lu().solve(&self.ones)?,
        };
        let norm = z.sum();
        Some(z / norm)
    }
}

fn apply<F>(cd: &ChannelData, p: &MvParams, mut visit: F) -> Result<()>
where
    F: FnMut(usize, usize, Option<&DVector<f64>>, ArrayView1<'_, f64>),
{
    cd.require(Alignment::TofCorrected)?;
    let (n_el, n_t, n_lines) = cd.probe().shape();
    p.validate(n_el)?;
    let mut solver = Solver::new(p);
    let back = (p.temporal_averaging - 1) / 2;
    let fwd = p.temporal_averaging / 2;
    for l in 0..n_lines {
        // [t, e] for this line, in f64
        let line: Array2<f64> = cd
            .data()
            .index_axis(Axis(2), l)
            .t()
            .mapv(f64::from);
        for t in 0..n_t {
            let lo = t.saturating_sub(back);
            let hi = (t + fwd).min(n_t - 1);
            let w = solver.weights((lo..=hi).map(|tt| line.row(tt)));
            visit(t, l, w.as_ref(), line.row(t));
        }
    }
    Ok(())
}

fn beamsum(w: &DVector<f64>, y: ArrayView1<'_, f64>) -> f64 {
    let n = w.len();
    let n_sub = y.len() - n + 1;
    let mut acc = 0.0;
    for k in 0..n_sub {
        for i in 0..n {
            acc += w[i] * y[k + i];
        }
    }
    acc / n_sub as f64
}

pub fn mv(cd: &ChannelData, p: &MvParams) -> Result<PreImage> {
    let (_, n_t, n_lines) = cd.probe().shape();
    let mut values = Array2::<f64>::zeros((n_t, n_lines));
    apply(cd, p, |t, l, w, y| {
        if let Some(w) = w {
            values[[t, l]] = beamsum(w, y);
        }
    })?;
    Ok(PreImage { values })
}

/// Per-pixel apodization weights, `[t, l, i]`. Pixels with zero-trace
/// covariance report uniform weights.
pub fn mv_weights(cd: &ChannelData, p: &MvParams) -> Result<Array3<f64>> {
    let (_, n_t, n_lines) = cd.probe().shape();
    let n = p.subaperture_len;
    let mut out = Array3::<f64>::from_elem((n_t, n_lines, n), 1.0 / n as f64);
    apply(cd, p, |t, l, w, _| {
        if let Some(w) = w {
            for i in 0..n {
                out[[t, l, i]] = w[i];
            }
        }
    })?;
    Ok(out)
}
