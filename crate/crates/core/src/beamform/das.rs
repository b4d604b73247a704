use ndarray::Axis;

use super::PreImage;
use crate::error::Result;
use crate::types::{Alignment, ChannelData};

/// Delay-and-sum with uniform apodization: the element mean of aligned data.
pub fn das(cd: &ChannelData) -> Result<PreImage> {
    cd.require(Alignment::TofCorrected)?;
    let n_el = cd.probe().num_elements as f64;
    let values = cd
        .data()
        .mapv(f64::from)
        .sum_axis(Axis(0))
        .mapv(|v| v / n_el);
    Ok(PreImage { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ProbeConfig;
    use ndarray::Array3;

    fn probe() -> ProbeConfig {
        ProbeConfig {
            num_elements: 4,
            num_samples: 8,
            num_lines: 3,
            ..Default::default()
        }
    }

    #[test]
    fn constant_over_elements() {
        let cd = ChannelData::new(probe(), Alignment::TofCorrected, Array3::from_elem((4, 8, 3), 2.5))
            .unwrap();
        assert!(das(&cd).unwrap().values.iter().all(|&v| v == 2.5));
    }

    #[test]
    fn raw_input_rejected() {
        let cd = ChannelData::zeros(probe(), Alignment::Raw).unwrap();
        assert!(das(&cd).is_err());
    }
}
