//! Beamforms a point target with delay-and-sum and minimum variance and
//! compares the -6 dB lateral width of the two images.

use usbeam::beamform::{das, image, mv, tof_correct, MvParams};
use usbeam::quality::lateral_width;
use usbeam::simulate::{make_phantom, synthesize_rf, Preset, PulseSpec};
use usbeam::{ProbeConfig, Seed};

fn main() -> usbeam::Result<()> {
    let probe = ProbeConfig::reduced();
    let phantom = make_phantom(Preset::PointTarget, Seed(0), &probe);
    let aligned = tof_correct(&synthesize_rf(&phantom, &probe, &PulseSpec::for_probe(&probe))?)?;
    let dr = 60.0;

    let params = MvParams {
        subaperture_len: probe.num_elements / 2,
        ..MvParams::default()
    };
    for (name, pre) in [("DAS", das(&aligned)?), ("MV", mv(&aligned, &params)?)] {
        let img = image(&pre, dr)?;
        let px = img.pixels();
        let (peak, _) = px.indexed_iter().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let width = lateral_width(px, peak.0, 6.0, dr);
        println!("{name:>3}: peak {peak:?}, -6 dB width {width:.2} px");
    }
    Ok(())
}
