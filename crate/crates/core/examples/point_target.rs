//! Simulates a point target on the reduced grid and reports where its echo
//! lands in the raw and time-of-flight-corrected channel data.

use usbeam::beamform::tof_correct;
use usbeam::simulate::{make_phantom, synthesize_rf, Preset, PulseSpec};
use usbeam::{ProbeConfig, Seed};

fn main() -> usbeam::Result<()> {
    let probe = ProbeConfig::reduced();
    let phantom = make_phantom(Preset::PointTarget, Seed(0), &probe);
    let target = phantom.scatterers[0];
    println!("target at x = {:.2} mm, z = {:.2} mm", target.x * 1e3, target.z * 1e3);

    let raw = synthesize_rf(&phantom, &probe, &PulseSpec::for_probe(&probe))?;
    let aligned = tof_correct(&raw)?;
    let line = probe.num_lines / 2;
    for (name, cd) in [("raw", &raw), ("aligned", &aligned)] {
        let peaks: Vec<usize> = [0, probe.num_elements / 2, probe.num_elements - 1]
            .iter()
            .map(|&e| {
                let col = cd.data().slice(ndarray::s![e, .., line]);
                col.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap().0
            })
            .collect();
        println!("{name:>8}: peak sample on edge/centre/edge elements = {peaks:?}");
    }
    Ok(())
}
