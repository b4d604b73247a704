//! Round-trips channel data through the spectrogram augmentation, first with
//! everything disabled and then with a drawn plan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use usbeam::augment::{spec_augment, SpecAugmentParams, SpecAugmentPlan};
use usbeam::{Alignment, ChannelData, ProbeConfig, Seed};

fn main() -> usbeam::Result<()> {
    let probe = ProbeConfig {
        num_elements: 4,
        ..ProbeConfig::reduced()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = ndarray::Array3::from_shape_simple_fn(probe.shape(), || rng.random_range(-1.0f32..1.0));
    let cd = ChannelData::new(probe, Alignment::Raw, data)?;
    let energy = |c: &ChannelData| c.data().iter().map(|&v| (v as f64).powi(2)).sum::<f64>();

    let same = spec_augment(&cd, &SpecAugmentParams::identity(), Seed(0))?;
    let err = same
        .data()
        .iter()
        .zip(cd.data().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f32, f32::max);
    println!("identity round trip: max error {err:.2e}");

    let params = SpecAugmentParams::default();
    let plan = SpecAugmentPlan::draw(&params, probe.num_samples, probe.num_lines, Seed(5))?;
    println!("plan: {plan:?}");
    let out = spec_augment(&cd, &params, Seed(5))?;
    println!("energy before {:.1}, after {:.1}", energy(&cd), energy(&out));
    Ok(())
}
