use ndarray::{Array2, Array3};
use proptest::prelude::*;

use usbeam::io::{
    decode_channel_data, encode_channel_data, read_gray, read_image, read_mask, write_gray, write_image,
    write_mask, USCD_HEADER_LEN,
};
use usbeam::{Alignment, BModeImage, ChannelData, Error, ProbeConfig, IMAGE_SIZE};

fn small_probe(e: usize, t: usize, l: usize) -> ProbeConfig {
    ProbeConfig {
        num_elements: e,
        num_samples: t,
        num_lines: l,
        ..ProbeConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn uscd_round_trip(
        e in 2usize..6,
        t in 1usize..40,
        l in 1usize..6,
        tof in any::<bool>(),
        pitch in 1e-4f64..1e-3,
        seed in any::<u64>(),
    ) {
        let probe = ProbeConfig { element_pitch: pitch, ..small_probe(e, t, l) };
        let mut state = seed;
        let data = Array3::from_shape_simple_fn((e, t, l), || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            f32::from_bits(((state >> 41) as u32) | 0x3f00_0000) - 1.0
        });
        let alignment = if tof { Alignment::TofCorrected } else { Alignment::Raw };
        let cd = ChannelData::new(probe, alignment, data).unwrap();
        let bytes = encode_channel_data(&cd).unwrap();
        prop_assert_eq!(bytes.len(), USCD_HEADER_LEN + 4 * e * t * l);
        let back = decode_channel_data(&bytes).unwrap();
        prop_assert_eq!(&back, &cd);
        prop_assert_eq!(encode_channel_data(&back).unwrap(), bytes);
    }

    #[test]
    fn truncated_payload_is_rejected(cut in 1usize..64) {
        let cd = ChannelData::zeros(small_probe(2, 8, 4), Alignment::Raw).unwrap();
        let bytes = encode_channel_data(&cd).unwrap();
        let short = &bytes[..bytes.len() - cut];
        prop_assert!(decode_channel_data(short).is_err());
    }
}

#[test]
fn trailing_bytes_are_rejected() {
    let cd = ChannelData::zeros(small_probe(2, 8, 4), Alignment::Raw).unwrap();
    let mut bytes = encode_channel_data(&cd).unwrap();
    bytes.extend_from_slice(&[0, 0, 0, 0]);
    assert!(decode_channel_data(&bytes).is_err());
}

#[test]
fn bad_magic_is_rejected() {
    let cd = ChannelData::zeros(small_probe(2, 4, 1), Alignment::Raw).unwrap();
    let mut bytes = encode_channel_data(&cd).unwrap();
    bytes[0] = b'X';
    assert!(matches!(decode_channel_data(&bytes), Err(Error::BadMagic(_))));
}

#[test]
fn png_image_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let px = Array2::from_shape_fn((IMAGE_SIZE, IMAGE_SIZE), |(i, j)| ((i * 31 + j * 7) % 65536) as f64 / 65535.0);
    let img = BModeImage::new(px, 40.0).unwrap();
    let path = dir.path().join("img.png");
    write_image(&img, &path).unwrap();
    let back = read_image(&path).unwrap();
    assert_eq!(back, img);
    assert_eq!(back.dynamic_range_db(), 40.0);
}

#[test]
fn gray_and_mask_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let px = Array2::from_shape_fn((40, 30), |(i, j)| (i * 30 + j) as f64 / 1199.0);
    let quantized = px.mapv(|v| (v * 65535.0).round() / 65535.0);
    let path = dir.path().join("gray.png");
    write_gray(px.view(), &path).unwrap();
    assert_eq!(read_gray(&path).unwrap(), quantized);

    let mask = Array2::from_shape_fn((20, 10), |(i, j)| (i + j) % 3 == 0);
    let path = dir.path().join("mask.png");
    write_mask(mask.view(), &path).unwrap();
    assert_eq!(read_mask(&path).unwrap(), mask);
}

#[test]
fn missing_file_error_names_the_path() {
    let err = read_mask("/nonexistent/lesion.png").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/lesion.png"));
}
