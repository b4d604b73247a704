//! Shared data types.
//!
//! Channel tensors are indexed `[e, t, l]`: element, time sample, scan line.
//! Every module consumes and produces this order; a tensor whose shape does not
//! match its probe's `(num_elements, num_samples, num_lines)` is rejected.

use ndarray::{Array2, Array3, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of every B-mode image and region mask.
pub const IMAGE_SIZE: usize = 1024;

/// Transducer geometry, sampling and medium parameters.
///
/// Elements sit on the lateral axis centred at `x = 0` with spacing
/// `element_pitch`. Scan lines are spread evenly over the same lateral extent,
/// first line at the first element and last line at the last element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub num_elements: usize,
    pub element_pitch: f64,
    pub center_freq: f64,
    pub sample_rate: f64,
    pub sound_speed: f64,
    pub num_samples: usize,
    pub num_lines: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            num_elements: 128,
            element_pitch: 3.0e-4,
            center_freq: 7.6e6,
            sample_rate: 31.25e6,
            sound_speed: 1540.0,
            num_samples: 1579,
            num_lines: 128,
        }
    }
}

impl ProbeConfig {
    /// Smaller grid (64 elements, 1024 samples, 64 lines) for desk-scale runs.
    pub fn reduced() -> Self {
        ProbeConfig {
            num_elements: 64,
            num_samples: 1024,
            num_lines: 64,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidProbe(m.to_string()));
        if self.num_elements < 2 {
            return bad("num_elements must be at least 2");
        }
        if self.num_samples == 0 || self.num_lines == 0 {
            return bad("num_samples and num_lines must be positive");
        }
        for (name, v) in [
            ("element_pitch", self.element_pitch),
            ("center_freq", self.center_freq),
            ("sample_rate", self.sample_rate),
            ("sound_speed", self.sound_speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(&format!("{name} must be finite and positive, got {v}"));
            }
        }
        if self.sample_rate <= 2.0 * self.center_freq {
            return bad("sample_rate must exceed twice center_freq");
        }
        Ok(())
    }

    /// Tensor shape `(E, T, L)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.num_elements, self.num_samples, self.num_lines)
    }

    /// Depth covered by the recorded samples, `T * c / (2 fs)`.
    pub fn max_depth(&self) -> f64 {
        self.num_samples as f64 * self.sound_speed / (2.0 * self.sample_rate)
    }

    /// Depth imaged by time sample `t` under the two-way propagation model.
    pub fn sample_depth(&self, t: f64) -> f64 {
        t * self.sound_speed / (2.0 * self.sample_rate)
    }

    pub fn aperture_width(&self) -> f64 {
        (self.num_elements - 1) as f64 * self.element_pitch
    }

    pub fn element_x(&self, e: usize) -> f64 {
        (e as f64 - (self.num_elements - 1) as f64 / 2.0) * self.element_pitch
    }

    pub fn line_x(&self, l: usize) -> f64 {
        let half = self.aperture_width() / 2.0;
        if self.num_lines == 1 {
            return 0.0;
        }
        -half + l as f64 * self.aperture_width() / (self.num_lines - 1) as f64
    }

    /// Depth at row `i` of the 1024-row display grid.
    pub fn pixel_depth(&self, i: usize) -> f64 {
        self.sample_depth(i as f64 * (self.num_samples - 1) as f64 / (IMAGE_SIZE - 1) as f64)
    }

    /// Lateral position at column `j` of the 1024-column display grid.
    pub fn pixel_x(&self, j: usize) -> f64 {
        let (x0, x1) = (self.line_x(0), self.line_x(self.num_lines - 1));
        x0 + j as f64 / (IMAGE_SIZE - 1) as f64 * (x1 - x0)
    }

    /// Physical parameters rounded to the f32 precision of the USCD header.
    pub fn quantized(&self) -> Self {
        let q = |v: f64| v as f32 as f64;
        ProbeConfig {
            element_pitch: q(self.element_pitch),
            center_freq: q(self.center_freq),
            sample_rate: q(self.sample_rate),
            sound_speed: q(self.sound_speed),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alignment {
    Raw,
    TofCorrected,
}

impl Alignment {
    pub fn code(self) -> u8 {
        match self {
            Alignment::Raw => 0,
            Alignment::TofCorrected => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Alignment::Raw),
            1 => Some(Alignment::TofCorrected),
            _ => None,
        }
    }
}

/// Per-element channel recordings with their acquisition metadata.
///
/// The probe is held at f32 header precision so that a USCD round trip is
/// exact on metadata as well as payload.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelData {
    probe: ProbeConfig,
    alignment: Alignment,
    data: Array3<f32>,
}

impl ChannelData {
    pub fn new(probe: ProbeConfig, alignment: Alignment, data: Array3<f32>) -> Result<Self> {
        probe.validate()?;
        let (e, t, l) = probe.shape();
        if data.dim() != (e, t, l) {
            return Err(Error::Shape {
                expected: vec![e, t, l],
                got: data.shape().to_vec(),
            });
        }
        if let Some((idx, _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(vec![idx.0, idx.1, idx.2]));
        }
        Ok(ChannelData {
            probe: probe.quantized(),
            alignment,
            data,
        })
    }

    pub fn zeros(probe: ProbeConfig, alignment: Alignment) -> Result<Self> {
        let data = Array3::zeros(probe.shape());
        Self::new(probe, alignment, data)
    }

    pub fn probe(&self) -> &ProbeConfig {
        &self.probe
    }

    pub fn alignment(&self) -> Alignment {
        self.alignment
    }

    pub fn data(&self) -> &Array3<f32> {
        &self.data
    }

    pub fn into_data(self) -> Array3<f32> {
        self.data
    }

    /// Same metadata, new payload. The payload is validated like [`ChannelData::new`].
    pub fn with_data(&self, data: Array3<f32>) -> Result<Self> {
        Self::new(self.probe, self.alignment, data)
    }

    #[cfg(test)]
    pub(crate) fn from_parts_unchecked(
        probe: ProbeConfig,
        alignment: Alignment,
        data: Array3<f32>,
    ) -> Self {
        ChannelData {
            probe,
            alignment,
            data,
        }
    }

    pub(crate) fn require(&self, alignment: Alignment) -> Result<()> {
        if self.alignment != alignment {
            return Err(Error::Alignment {
                expected: alignment,
                got: self.alignment,
            });
        }
        Ok(())
    }
}

/// Log-compressed grayscale image on the fixed 1024x1024 display grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BModeImage {
    pixels: Array2<f64>,
    dynamic_range_db: f64,
}

impl BModeImage {
    pub fn new(pixels: Array2<f64>, dynamic_range_db: f64) -> Result<Self> {
        if pixels.dim() != (IMAGE_SIZE, IMAGE_SIZE) {
            return Err(Error::Shape {
                expected: vec![IMAGE_SIZE, IMAGE_SIZE],
                got: pixels.shape().to_vec(),
            });
        }
        if let Some(((r, c), v)) = pixels
            .indexed_iter()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(Error::param(format!("pixel ({r}, {c}) = {v} outside [0, 1]")));
        }
        Ok(BModeImage {
            pixels,
            dynamic_range_db,
        })
    }

    pub fn zeros(dynamic_range_db: f64) -> Self {
        BModeImage {
            pixels: Array2::zeros((IMAGE_SIZE, IMAGE_SIZE)),
            dynamic_range_db,
        }
    }

    pub fn pixels(&self) -> ArrayView2<'_, f64> {
        self.pixels.view()
    }

    pub fn into_pixels(self) -> Array2<f64> {
        self.pixels
    }

    pub fn dynamic_range_db(&self) -> f64 {
        self.dynamic_range_db
    }
}

/// Disjoint lesion and background regions on the image grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    lesion: Array2<bool>,
    background: Array2<bool>,
}

impl RegionMask {
    pub fn new(lesion: Array2<bool>, background: Array2<bool>) -> Result<Self> {
        if lesion.dim() != background.dim() {
            return Err(Error::Shape {
                expected: lesion.shape().to_vec(),
                got: background.shape().to_vec(),
            });
        }
        if lesion.iter().zip(background.iter()).any(|(a, b)| *a && *b) {
            return Err(Error::param("lesion and background masks overlap"));
        }
        Ok(RegionMask { lesion, background })
    }

    pub fn lesion(&self) -> ArrayView2<'_, bool> {
        self.lesion.view()
    }

    pub fn background(&self) -> ArrayView2<'_, bool> {
        self.background.view()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_probe_depth() {
        let p = ProbeConfig::default();
        assert!((p.max_depth() - 0.038_906).abs() < 1e-5);
        p.validate().unwrap();
    }

    #[test]
    fn nyquist_and_element_count_enforced() {
        let mut p = ProbeConfig::default();
        p.sample_rate = 15.0e6;
        assert!(p.validate().is_err());
        let mut p = ProbeConfig::default();
        p.num_elements = 1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn lines_span_the_aperture() {
        let p = ProbeConfig::default();
        assert_eq!(p.line_x(0), p.element_x(0));
        assert!((p.line_x(127) - p.element_x(127)).abs() < 1e-15);
    }

    #[test]
    fn channel_data_rejects_wrong_shape_and_nan() {
        let p = ProbeConfig {
            num_elements: 2,
            num_samples: 4,
            num_lines: 3,
            ..Default::default()
        };
        assert!(ChannelData::new(p, Alignment::Raw, Array3::zeros((4, 2, 3))).is_err());
        let mut d = Array3::zeros((2, 4, 3));
        d[[1, 2, 0]] = f32::NAN;
        assert!(matches!(
            ChannelData::new(p, Alignment::Raw, d),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn masks_must_be_disjoint() {
        let mut a = Array2::from_elem((4, 4), false);
        let mut b = a.clone();
        a[[1, 1]] = true;
        b[[1, 1]] = true;
        assert!(RegionMask::new(a, b).is_err());
    }
}
