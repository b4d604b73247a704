//! Applies speckle noise to a silent recording and shows which elements
//! receive it and how strong it is.

use usbeam::augment::{speckle_noise, speckled_elements, SpeckleParams};
use usbeam::{Alignment, ChannelData, ProbeConfig, Seed};

fn main() -> usbeam::Result<()> {
    let probe = ProbeConfig::reduced();
    let silent = ChannelData::zeros(probe, Alignment::Raw)?;
    let params = SpeckleParams {
        num_noisy_channels: 8,
        ..SpeckleParams::default()
    };
    let noisy = speckle_noise(&silent, &params, Seed(3))?;

    let elements = speckled_elements(probe.num_elements, params.num_noisy_channels);
    println!("noisy elements: {elements:?}");
    for &e in elements.iter().take(3) {
        let slice = noisy.data().index_axis(ndarray::Axis(0), e);
        let var = slice.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / slice.len() as f64;
        println!("element {e:>2}: mean power {var:.3}");
    }
    let untouched = noisy.data().index_axis(ndarray::Axis(0), 1).iter().all(|&v| v == 0.0);
    println!("element  1 untouched: {untouched}");
    Ok(())
}
