//! Runs the seeded augmentation pipeline over a simulated cyst and prints
//! which stages fired for a handful of seeds.

use usbeam::augment::{augment_pipeline_logged, PipelineConfig};
use usbeam::simulate::{make_phantom, synthesize_rf, Preset, PulseSpec};
use usbeam::{ProbeConfig, Seed};

fn main() -> usbeam::Result<()> {
    let probe = ProbeConfig::reduced();
    let phantom = make_phantom(Preset::AnechoicCyst, Seed(2), &probe);
    let rf = synthesize_rf(&phantom, &probe, &PulseSpec::for_probe(&probe))?;

    for seed in 0..4 {
        let cfg = PipelineConfig {
            seed: Seed(seed),
            ..PipelineConfig::default()
        };
        let (out, log) = augment_pipeline_logged(&rf, &cfg)?;
        let fired: Vec<String> = log.iter().filter(|r| r.fired).map(|r| format!("{:?}", r.stage)).collect();
        let changed = out.data().iter().zip(rf.data().iter()).filter(|(a, b)| a != b).count();
        println!("seed {seed}: fired [{}], {changed} samples changed", fired.join(", "));
    }
    Ok(())
}
