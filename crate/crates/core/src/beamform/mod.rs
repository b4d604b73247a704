//! Conventional beamforming: time-of-flight correction, apodization and
//! B-mode image formation.
//!
//! ```text
//! raw ChannelData --tof_correct--> aligned ChannelData --das / mv--> PreImage --image--> BModeImage
//! ```

mod bmode;
mod das;
mod mv;
mod tof;

pub use bmode::{envelope, image, DEFAULT_DYNAMIC_RANGE_DB};
pub use das::das;
pub use mv::{mv, mv_weights, MvParams};
pub use tof::{tof_correct, tof_sample};

use ndarray::Array2;

/// Beamsummed RF before envelope detection, indexed `[t, l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreImage {
    pub values: Array2<f64>,
}

impl PreImage {
    pub fn dim(&self) -> (usize, usize) {
        self.values.dim()
    }
}
