//! Image similarity, training losses and clinical contrast metrics.

mod contrast;
mod histogram;
mod loss;
mod ssim;

pub use contrast::{
    cnr_db, contrast_metrics, contrast_metrics_with, cr_db, gcnr, lateral_width, ContrastReport, GcnrBins,
};
pub use histogram::{histogram_match, histogram_match_pixels, HISTOGRAM_BINS};
pub use loss::{cdcb_loss, cross_entropy, feedback_loss, jbc_loss, mse, ubb_loss, LossParams};
pub use ssim::{gaussian_window, ms_ssim, ms_ssim_loss, ssim_map, MsSsimParams, SsimMap};
