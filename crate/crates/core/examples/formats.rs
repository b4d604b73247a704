//! Writes channel data, an image and region masks to a temporary directory
//! and reads them back.

use usbeam::beamform::{das, image, tof_correct};
use usbeam::io::{read_channel_data, read_image, read_mask, write_channel_data, write_image, write_mask};
use usbeam::simulate::{ground_truth_masks, make_phantom, synthesize_rf, Preset, PulseSpec};
use usbeam::{ProbeConfig, Seed};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("usbeam-formats-example");
    std::fs::create_dir_all(&dir)?;

    let probe = ProbeConfig::reduced();
    let phantom = make_phantom(Preset::AnechoicCyst, Seed(1), &probe);
    let rf = synthesize_rf(&phantom, &probe, &PulseSpec::for_probe(&probe))?;
    let rf_path = dir.join("cyst.uscd");
    write_channel_data(&rf, &rf_path)?;
    let back = read_channel_data(&rf_path)?;
    println!("{}: {} bytes, identical: {}", rf_path.display(), std::fs::metadata(&rf_path)?.len(), back == rf);

    let img = image(&das(&tof_correct(&back)?)?, 50.0)?;
    let img_path = dir.join("cyst.png");
    write_image(&img, &img_path)?;
    let img_back = read_image(&img_path)?;
    println!("{}: dynamic range {} dB", img_path.display(), img_back.dynamic_range_db());

    let mask = ground_truth_masks(&phantom, &probe)?;
    let mask_path = dir.join("cyst.lesion.png");
    write_mask(mask.lesion(), &mask_path)?;
    println!("{}: identical: {}", mask_path.display(), read_mask(&mask_path)? == mask.lesion());
    Ok(())
}
