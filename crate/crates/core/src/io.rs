//! File formats: the USCD channel-data container and 16-bit grayscale PNG.
//!
//! USCD v1, little-endian:
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0  | 4 | ASCII `USCD` |
//! | 4  | 1 | version (1) |
//! | 5  | 3 | zero |
//! | 8  | 4 | u32 elements `E` |
//! | 12 | 4 | u32 time samples `T` |
//! | 16 | 4 | u32 scan lines `L` |
//! | 20 | 4 | f32 sample rate (Hz) |
//! | 24 | 4 | f32 center frequency (Hz) |
//! | 28 | 4 | f32 sound speed (m/s) |
//! | 32 | 4 | f32 element pitch (m) |
//! | 36 | 1 | alignment, 0 = raw, 1 = ToF corrected |
//! | 37 | 3 | zero |
//! | 40 | `4·E·T·L` | f32 samples, index `((e·T)+t)·L + l` |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::Path;

use ndarray::{Array2, Array3, ArrayView2};

use crate::error::{Error, Result};
use crate::types::{Alignment, BModeImage, ChannelData, ProbeConfig};

pub const USCD_MAGIC: [u8; 4] = *b"USCD";
pub const USCD_VERSION: u8 = 1;
pub const USCD_HEADER_LEN: usize = 40;

const DYNAMIC_RANGE_KEY: &str = "dynamic_range_db";

pub fn encode_channel_data(cd: &ChannelData) -> Result<Vec<u8>> {
    if let Some((idx, _)) = cd.data().indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite(vec![idx.0, idx.1, idx.2]));
    }
    let p = cd.probe();
    let (e, t, l) = p.shape();
    let dim = |n: usize| {
        u32::try_from(n).map_err(|_| Error::Header(format!("dimension {n} exceeds u32")))
    };
    let mut out = Vec::with_capacity(USCD_HEADER_LEN + 4 * e * t * l);
    out.extend_from_slice(&USCD_MAGIC);
    out.push(USCD_VERSION);
    out.extend_from_slice(&[0; 3]);
    for n in [e, t, l] {
        out.extend_from_slice(&dim(n)?.to_le_bytes());
    }
    for v in [p.sample_rate, p.center_freq, p.sound_speed, p.element_pitch] {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.push(cd.alignment().code());
    out.extend_from_slice(&[0; 3]);
    // standard layout iteration order is exactly ((e*T)+t)*L + l
    for v in cd.data().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_channel_data(bytes: &[u8]) -> Result<ChannelData> {
    if bytes.len() < USCD_HEADER_LEN {
        return Err(Error::Truncated {
            expected: USCD_HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != USCD_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes[4] != USCD_VERSION {
        return Err(Error::UnsupportedVersion(bytes[4]));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let (e, t, l) = (u32_at(8), u32_at(12), u32_at(16));
    let alignment = Alignment::from_code(bytes[36])
        .ok_or_else(|| Error::Header(format!("unknown alignment code {}", bytes[36])))?;

    let count = (e as u64)
        .checked_mul(t as u64)
        .and_then(|n| n.checked_mul(l as u64))
        .and_then(|n| n.checked_mul(4))
        .filter(|n| usize::try_from(*n).is_ok())
        .ok_or(Error::DimensionOverflow(e, t, l))?;
    let expected = USCD_HEADER_LEN as u64 + count;
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::Truncated { expected, found });
    }
    if found > expected {
        return Err(Error::Header(format!(
            "{} trailing bytes after payload",
            found - expected
        )));
    }

    let probe = ProbeConfig {
        num_elements: e as usize,
        num_samples: t as usize,
        num_lines: l as usize,
        sample_rate: f32_at(20) as f64,
        center_freq: f32_at(24) as f64,
        sound_speed: f32_at(28) as f64,
        element_pitch: f32_at(32) as f64,
    };
    probe.validate()?;
    let payload: Vec<f32> = bytes[USCD_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let data = Array3::from_shape_vec(probe.shape(), payload)
        .map_err(|err| Error::Header(err.to_string()))?;
    ChannelData::new(probe, alignment, data)
}

pub fn write_channel_data(cd: &ChannelData, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_channel_data(cd)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_channel_data(path: impl AsRef<Path>) -> Result<ChannelData> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_channel_data(&bytes)
}

/// Maps a unit-interval intensity to its 16-bit sample, `round(p * 65535)`.
pub fn to_u16_sample(p: f64) -> u16 {
    (p.clamp(0.0, 1.0) * 65535.0).round() as u16
}

fn png_err(e: impl std::fmt::Display) -> Error {
    Error::Png(e.to_string())
}

fn write_png16(
    pixels: ArrayView2<'_, f64>,
    path: &Path,
    text: Option<(&str, String)>,
) -> Result<()> {
    let (h, w) = pixels.dim();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), w as u32, h as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Sixteen);
    if let Some((k, v)) = text {
        enc.add_text_chunk(k.to_string(), v).map_err(png_err)?;
    }
    let mut writer = enc.write_header().map_err(png_err)?;
    let mut buf = Vec::with_capacity(2 * w * h);
    for &p in pixels.iter() {
        buf.extend_from_slice(&to_u16_sample(p).to_be_bytes());
    }
    writer.write_image_data(&buf).map_err(png_err)?;
    writer.finish().map_err(png_err)?;
    Ok(())
}

/// Writes a B-mode image as a 16-bit grayscale PNG. The dynamic range is kept
/// in a text chunk.
pub fn write_image(img: &BModeImage, path: impl AsRef<Path>) -> Result<()> {
    write_png16(
        img.pixels(),
        path.as_ref(),
        Some((DYNAMIC_RANGE_KEY, img.dynamic_range_db().to_string())),
    )
}

/// Writes any unit-interval matrix as a 16-bit grayscale PNG.
pub fn write_gray(pixels: ArrayView2<'_, f64>, path: impl AsRef<Path>) -> Result<()> {
    write_png16(pixels, path.as_ref(), None)
}

pub fn write_mask(mask: ArrayView2<'_, bool>, path: impl AsRef<Path>) -> Result<()> {
    write_gray(mask.mapv(|b| if b { 1.0 } else { 0.0 }).view(), path)
}

struct Decoded {
    pixels: Array2<f64>,
    dynamic_range_db: Option<f64>,
}

fn read_png(path: &Path) -> Result<Decoded> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or_else(|| png_err("image too large"))?];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    let (w, h) = (info.width as usize, info.height as usize);
    if info.color_type != png::ColorType::Grayscale {
        return Err(Error::Png(format!(
            "{}: expected grayscale, got {:?}",
            path.display(),
            info.color_type
        )));
    }
    let values: Vec<f64> = match info.bit_depth {
        png::BitDepth::Sixteen => buf[..2 * w * h]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / 65535.0)
            .collect(),
        png::BitDepth::Eight => buf[..w * h].iter().map(|&v| v as f64 / 255.0).collect(),
        other => return Err(Error::Png(format!("unsupported bit depth {other:?}"))),
    };
    let dynamic_range_db = reader
        .info()
        .uncompressed_latin1_text
        .iter()
        .find(|c| c.keyword == DYNAMIC_RANGE_KEY)
        .and_then(|c| c.text.parse().ok());
    Ok(Decoded {
        pixels: Array2::from_shape_vec((h, w), values).map_err(png_err)?,
        dynamic_range_db,
    })
}

/// Reads a grayscale PNG of any size into `[0, 1]` intensities.
pub fn read_gray(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    Ok(read_png(path.as_ref())?.pixels)
}

/// Reads a 1024x1024 B-mode image; a missing dynamic-range chunk defaults to 60 dB.
pub fn read_image(path: impl AsRef<Path>) -> Result<BModeImage> {
    let d = read_png(path.as_ref())?;
    BModeImage::new(d.pixels, d.dynamic_range_db.unwrap_or(60.0))
}

/// Nonzero pixels are inside the mask.
pub fn read_mask(path: impl AsRef<Path>) -> Result<Array2<bool>> {
    Ok(read_gray(path)?.mapv(|v| v > 0.0))
}
