use ndarray::{Array3, Axis};

use crate::error::Result;
use crate::types::{Alignment, ChannelData, ProbeConfig};

/// Fractional raw-sample index whose echo maps to depth sample `t` on line `l`
/// for element `e`: transmit straight down to depth `z`, return to the element.
pub fn tof_sample(probe: &ProbeConfig, e: usize, t: usize, l: usize) -> f64 {
    let z = probe.sample_depth(t as f64);
    let dx = probe.element_x(e) - probe.line_x(l);
    probe.sample_rate * (z + z.hypot(dx)) / probe.sound_speed
}

/// Aligns every element's recording to the depth grid of each scan line using
/// linear interpolation. Samples that fall past the end of the record are zero.
pub fn tof_correct(raw: &ChannelData) -> Result<ChannelData> {
    raw.require(Alignment::Raw)?;
    let probe = *raw.probe();
    let (n_el, n_t, n_lines) = probe.shape();
    let last = (n_t - 1) as f64;
    let mut out = Array3::<f32>::zeros((n_el, n_t, n_lines));
    for (e, (src, mut dst)) in raw
        .data()
        .axis_iter(Axis(0))
        .zip(out.axis_iter_mut(Axis(0)))
        .enumerate()
    {
        for l in 0..n_lines {
            for t in 0..n_t {
                let tp = tof_sample(&probe, e, t, l);
                if tp > last {
                    // later depths only map further out
                    break;
                }
                let i0 = tp.floor() as usize;
                let frac = tp - i0 as f64;
                let a = src[[i0, l]] as f64;
                let v = if i0 + 1 < n_t {
                    a + frac * (src[[i0 + 1, l]] as f64 - a)
                } else {
                    a
                };
                dst[[t, l]] = v as f32;
            }
        }
    }
    ChannelData::new(probe, Alignment::TofCorrected, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_offset_element_has_two_way_delay() {
        let p = ProbeConfig::reduced();
        // line 10 coincides with element 10 on the reduced grid
        assert_eq!(p.line_x(10), p.element_x(10));
        for t in [0usize, 17, 500, 1023] {
            let expected = 2.0 * p.sample_depth(t as f64) / p.sound_speed * p.sample_rate;
            assert!((tof_sample(&p, 10, t, 10) - expected).abs() < 1e-9);
            assert!((expected - t as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_in_zero_out_and_alignment_checks() {
        let p = ProbeConfig {
            num_elements: 8,
            num_samples: 64,
            num_lines: 4,
            ..Default::default()
        };
        let raw = ChannelData::zeros(p, Alignment::Raw).unwrap();
        let out = tof_correct(&raw).unwrap();
        assert_eq!(out.alignment(), Alignment::TofCorrected);
        assert!(out.data().iter().all(|&v| v == 0.0));
        assert!(tof_correct(&out).is_err());
    }
}
