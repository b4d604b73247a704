//! Desk-scale RF channel-data simulator.
//!
//! Single scattering in a homogeneous, lossless medium. Each scan line is a
//! focused transmit centred on the line's lateral position with its focus at
//! half the imaging depth; the transmit path length follows the virtual-source
//! model and the receive path is the straight distance to each element.

use std::f64::consts::PI;

use ndarray::{Array2, Array3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::types::{Alignment, ChannelData, ProbeConfig, RegionMask, IMAGE_SIZE};

/// Scatterers per square millimetre for the speckle presets.
const SCATTERER_DENSITY_PER_MM2: f64 = 20.0;
const MIN_SPECKLE_SCATTERERS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub x: f64,
    pub z: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LesionKind {
    Anechoic,
    Hypoechoic,
    Hyperechoic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center_x: f64,
    pub center_z: f64,
    pub radius_x: f64,
    pub radius_z: f64,
    pub kind: LesionKind,
    pub amplitude_scale: f64,
}

impl Ellipse {
    /// Squared normalized radius; `< 1` inside.
    pub fn rho2(&self, x: f64, z: f64) -> f64 {
        let dx = (x - self.center_x) / self.radius_x;
        let dz = (z - self.center_z) / self.radius_z;
        dx * dx + dz * dz
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Phantom {
    pub scatterers: Vec<Scatterer>,
    pub lesions: Vec<Ellipse>,
}

impl Phantom {
    /// Checks scatterer placement against the probe's field of view and the
    /// lesion invariants.
    pub fn validate(&self, probe: &ProbeConfig) -> Result<()> {
        let half = probe.aperture_width() / 2.0;
        let depth = probe.max_depth();
        let tol = 1e-12;
        for s in &self.scatterers {
            if !(s.x.abs() <= half + tol && (0.0..=depth + tol).contains(&s.z)) {
                return Err(Error::param(format!(
                    "scatterer at ({}, {}) outside the field of view",
                    s.x, s.z
                )));
            }
            if !s.amplitude.is_finite() {
                return Err(Error::param("non-finite scatterer amplitude"));
            }
        }
        for l in &self.lesions {
            if !(0.0..=10.0).contains(&l.amplitude_scale) {
                return Err(Error::param("lesion amplitude_scale must be in [0, 10]"));
            }
            if !(l.radius_x > 0.0 && l.radius_z > 0.0) {
                return Err(Error::param("lesion radii must be positive"));
            }
            if l.kind == LesionKind::Anechoic
                && self.scatterers.iter().any(|s| l.rho2(s.x, s.z) < 1.0)
            {
                return Err(Error::param("anechoic lesion contains scatterers"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    PointTarget,
    AnechoicCyst,
    HypoechoicLesion,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" | "point-target" => Ok(Preset::PointTarget),
            "cyst" | "anechoic-cyst" => Ok(Preset::AnechoicCyst),
            "hypoechoic" | "hypoechoic-lesion" => Ok(Preset::HypoechoicLesion),
            other => Err(Error::param(format!(
                "unknown preset {other:?} (expected point, cyst or hypoechoic)"
            ))),
        }
    }
}

pub fn make_phantom(preset: Preset, seed: Seed, probe: &ProbeConfig) -> Phantom {
    let depth = probe.max_depth();
    if preset == Preset::PointTarget {
        return Phantom {
            scatterers: vec![Scatterer {
                x: 0.0,
                z: depth / 2.0,
                amplitude: 1.0,
            }],
            lesions: Vec::new(),
        };
    }

    let radius = depth / 8.0;
    let (kind, scale) = match preset {
        Preset::AnechoicCyst => (LesionKind::Anechoic, 0.0),
        _ => (LesionKind::Hypoechoic, 0.25),
    };
    let lesion = Ellipse {
        center_x: 0.0,
        center_z: depth / 2.0,
        radius_x: radius,
        radius_z: radius,
        kind,
        amplitude_scale: scale,
    };

    let half = probe.aperture_width() / 2.0;
    let area_mm2 = 2.0 * half * depth * 1e6;
    let count = MIN_SPECKLE_SCATTERERS.max((area_mm2 * SCATTERER_DENSITY_PER_MM2).round() as usize);
    let mut rng = seed.rng();
    let mut scatterers = Vec::with_capacity(count);
    while scatterers.len() < count {
        let x = rng.random_range(-half..=half);
        let z = rng.random_range(0.0..depth);
        let inside = lesion.rho2(x, z) < 1.0;
        if inside && kind == LesionKind::Anechoic {
            continue;
        }
        let amplitude = if inside { scale } else { 1.0 };
        scatterers.push(Scatterer { x, z, amplitude });
    }
    Phantom {
        scatterers,
        lesions: vec![lesion],
    }
}

/// Gaussian-modulated cosine pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSpec {
    pub center_freq: f64,
    pub fractional_bandwidth: f64,
}

impl Default for PulseSpec {
    fn default() -> Self {
        PulseSpec {
            center_freq: 7.6e6,
            fractional_bandwidth: 0.67,
        }
    }
}

impl PulseSpec {
    pub fn for_probe(probe: &ProbeConfig) -> Self {
        PulseSpec {
            center_freq: probe.center_freq,
            ..Default::default()
        }
    }

    /// Standard deviation of the Gaussian envelope in seconds. The bandwidth is
    /// the -6 dB full width of the spectrum relative to `center_freq`.
    pub fn envelope_sigma(&self) -> f64 {
        let sigma_f =
            self.fractional_bandwidth * self.center_freq / (2.0 * (2.0 * 2f64.ln()).sqrt());
        1.0 / (2.0 * PI * sigma_f)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = self.envelope_sigma();
        (-(t * t) / (2.0 * s * s)).exp() * (2.0 * PI * self.center_freq * t).cos()
    }

    fn validate(&self) -> Result<()> {
        if !(self.fractional_bandwidth > 0.0 && self.fractional_bandwidth < 2.0) {
            return Err(Error::param("fractional_bandwidth must be in (0, 2)"));
        }
        if !(self.center_freq.is_finite() && self.center_freq > 0.0) {
            return Err(Error::param("pulse center_freq must be positive"));
        }
        Ok(())
    }
}

/// Transmit path length from the line origin to `(x, z)` via the focal point.
pub fn transmit_distance(line_x: f64, focal_depth: f64, x: f64, z: f64) -> f64 {
    let r = (x - line_x).hypot(z - focal_depth);
    if z >= focal_depth {
        focal_depth + r
    } else {
        focal_depth - r
    }
}

pub fn synthesize_rf(phantom: &Phantom, probe: &ProbeConfig, pulse: &PulseSpec) -> Result<ChannelData> {
    let probe = probe.quantized();
    probe.validate()?;
    pulse.validate()?;
    if phantom.scatterers.is_empty() {
        return Err(Error::param("phantom has no scatterers"));
    }
    phantom.validate(&probe)?;

    let (n_el, n_t, n_lines) = probe.shape();
    let fs = probe.sample_rate;
    let c = probe.sound_speed;
    let focal_depth = probe.max_depth() / 2.0;
    let sigma = pulse.envelope_sigma();
    let half_width = (4.0 * sigma * fs).ceil() as i64;

    // Per-sample recurrences: with u = n/fs - tau,
    //   G(n+1) = G(n) * q(n),  q(n+1) = q(n) * exp(-h^2 / s^2)
    //   phasor(n+1) = phasor(n) * exp(i w h)
    let h = 1.0 / fs;
    let inv2s2 = 1.0 / (2.0 * sigma * sigma);
    let q_step = (-2.0 * h * h * inv2s2).exp();
    let omega = 2.0 * PI * pulse.center_freq;
    let (rot_s, rot_c) = (omega * h).sin_cos();

    let element_x: Vec<f64> = (0..n_el).map(|e| probe.element_x(e)).collect();
    let mut out = Array3::<f32>::zeros((n_el, n_t, n_lines));
    let mut acc = Array2::<f64>::zeros((n_el, n_t));

    for l in 0..n_lines {
        acc.fill(0.0);
        let lx = probe.line_x(l);
        for s in &phantom.scatterers {
            let d_tx = transmit_distance(lx, focal_depth, s.x, s.z);
            for (e, &ex) in element_x.iter().enumerate() {
                let tau = (d_tx + (s.x - ex).hypot(s.z)) / c;
                let centre = tau * fs;
                let lo = ((centre.round() as i64) - half_width).max(0);
                let hi = ((centre.round() as i64) + half_width).min(n_t as i64 - 1);
                if lo > hi {
                    continue;
                }
                let u0 = lo as f64 * h - tau;
                let mut g = (-u0 * u0 * inv2s2).exp();
                let mut q = (-(2.0 * u0 * h + h * h) * inv2s2).exp();
                let (mut ps, mut pc) = (omega * u0).sin_cos();
                let mut row = acc.row_mut(e);
                for t in lo..=hi {
                    row[t as usize] += s.amplitude * (g * pc);
                    g *= q;
                    q *= q_step;
                    let npc = pc * rot_c - ps * rot_s;
                    ps = ps * rot_c + pc * rot_s;
                    pc = npc;
                }
            }
        }
        for e in 0..n_el {
            for t in 0..n_t {
                out[[e, t, l]] = acc[[e, t]] as f32;
            }
        }
    }
    ChannelData::new(probe, Alignment::Raw, out)
}

/// Lesion and background regions of the first lesion on the display grid.
///
/// The lesion region is the ellipse shrunk to 90% of its radii; the background
/// is the elliptical annulus between 120% and 170%.
pub fn ground_truth_masks(phantom: &Phantom, probe: &ProbeConfig) -> Result<RegionMask> {
    let lesion = phantom
        .lesions
        .first()
        .ok_or_else(|| Error::param("phantom has no lesion"))?;
    let (x0, x1) = (probe.pixel_x(0), probe.pixel_x(IMAGE_SIZE - 1));
    let (z0, z1) = (probe.pixel_depth(0), probe.pixel_depth(IMAGE_SIZE - 1));
    if !((x0..=x1).contains(&lesion.center_x) && (z0..=z1).contains(&lesion.center_z)) {
        return Err(Error::param("lesion centre outside the image grid"));
    }
    let xs: Vec<f64> = (0..IMAGE_SIZE).map(|j| probe.pixel_x(j)).collect();
    let zs: Vec<f64> = (0..IMAGE_SIZE).map(|i| probe.pixel_depth(i)).collect();
    let rho2 = Array2::from_shape_fn((IMAGE_SIZE, IMAGE_SIZE), |(i, j)| lesion.rho2(xs[j], zs[i]));
    let inner = rho2.mapv(|r| r < 0.9 * 0.9);
    let annulus = rho2.mapv(|r| (1.2 * 1.2..=1.7 * 1.7).contains(&r));
    if !inner.iter().any(|&b| b) {
        return Err(Error::param("lesion does not cover any pixel"));
    }
    RegionMask::new(inner, annulus)
}
