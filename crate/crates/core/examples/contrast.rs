//! Measures lesion contrast on a simulated hypoechoic phantom, before and
//! after histogram matching to the delay-and-sum image.

use usbeam::beamform::{das, image, mv, tof_correct, MvParams};
use usbeam::quality::{contrast_metrics, histogram_match};
use usbeam::simulate::{ground_truth_masks, make_phantom, synthesize_rf, Preset, PulseSpec};
use usbeam::{ProbeConfig, Seed};

fn main() -> usbeam::Result<()> {
    let probe = ProbeConfig::reduced();
    let phantom = make_phantom(Preset::HypoechoicLesion, Seed(7), &probe);
    let mask = ground_truth_masks(&phantom, &probe)?;
    let aligned = tof_correct(&synthesize_rf(&phantom, &probe, &PulseSpec::for_probe(&probe))?)?;

    let reference = image(&das(&aligned)?, 60.0)?;
    let params = MvParams {
        subaperture_len: probe.num_elements / 2,
        ..MvParams::default()
    };
    let minvar = image(&mv(&aligned, &params)?, 60.0)?;
    let matched = histogram_match(&minvar, &reference)?;

    for (name, img) in [("DAS", &reference), ("MV", &minvar), ("MV matched", &matched)] {
        let r = contrast_metrics(img, &mask)?;
        println!(
            "{name:>10}: CNR {:6.2} dB  gCNR {:.3}  CR {:6.2} dB",
            r.cnr_db, r.gcnr, r.cr_db
        );
    }
    Ok(())
}
