//! Evaluates MS-SSIM and the training losses on a synthetic target and a
//! degraded prediction.

use ndarray::Array2;
use usbeam::quality::{cdcb_loss, jbc_loss, ms_ssim, mse, ubb_loss, LossParams, MsSsimParams};

fn main() -> usbeam::Result<()> {
    let n = 192;
    let target = Array2::from_shape_fn((n, n), |(i, j)| {
        let (x, z) = (j as f64 - 96.0, i as f64 - 96.0);
        if x * x + z * z < 30.0 * 30.0 {
            0.1
        } else {
            0.5 + 0.2 * (i as f64 / 7.0).sin() * (j as f64 / 5.0).cos()
        }
    });
    let prediction = target.mapv(|v| 0.9 * v + 0.04);
    let (lp, mp) = (LossParams::default(), MsSsimParams::default());

    println!("mse      {:.5}", mse(prediction.view(), target.view())?);
    println!("ms-ssim  {:.5}", ms_ssim(prediction.view(), target.view(), &mp)?);
    println!("ubb      {:.5}", ubb_loss(prediction.view(), target.view(), &lp, &mp)?);

    let (logits_pred, logits_target) = ([1.2, -0.3], [2.0, -1.0]);
    println!(
        "jbc      {:.5}",
        jbc_loss(prediction.view(), target.view(), &logits_pred, &logits_target, 0, &lp, &mp)?
    );
    println!("cdcb     {:.5}", cdcb_loss(prediction.view(), target.view(), &logits_pred, 0, &lp, &mp)?);
    Ok(())
}
