//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ndarray::{s, Array2, Array3, Axis};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use usbeam::augment::{
    coarse_dropout, gaussian_noise, spec_augment, spec_augment_with_plan, speckle_noise, speckled_elements,
    subsample_mask, augment_pipeline_logged, DropoutParams, GaussianNoiseParams, PipelineConfig,
    SpecAugmentParams, SpecAugmentPlan, SpeckleParams, SubsampleParams,
};
use usbeam::beamform::{das, image, mv, mv_weights, tof_correct, MvParams, PreImage};
use usbeam::io;
use usbeam::quality::{
    cdcb_loss, cnr_db, contrast_metrics, feedback_loss, gcnr, jbc_loss, lateral_width, ms_ssim, ms_ssim_loss,
    ubb_loss, GcnrBins, LossParams, MsSsimParams,
};
use usbeam::simulate::{ground_truth_masks, make_phantom, synthesize_rf, Phantom, Preset, PulseSpec, Scatterer};
use usbeam::{Alignment, BModeImage, ChannelData, ProbeConfig, RegionMask, Seed, IMAGE_SIZE};

type Outcome = Result<String, Box<dyn std::error::Error>>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+).into());
        }
    };
}

fn random_tensor(probe: ProbeConfig, seed: u64) -> ChannelData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = Array3::from_shape_simple_fn(probe.shape(), || rng.random_range(-1.0f32..1.0));
    ChannelData::new(probe, Alignment::Raw, data).unwrap()
}

fn probe(num_elements: usize, num_samples: usize, num_lines: usize) -> ProbeConfig {
    ProbeConfig {
        num_elements,
        num_samples,
        num_lines,
        ..ProbeConfig::default()
    }
}

fn differing_elements(a: &ChannelData, b: &ChannelData) -> Vec<usize> {
    (0..a.probe().num_elements)
        .filter(|&e| a.data().index_axis(Axis(0), e) != b.data().index_axis(Axis(0), e))
        .collect()
}

// 1
fn speckle_identity() -> Outcome {
    let cd = random_tensor(probe(128, 256, 32), 11);
    let silent = SpeckleParams {
        noise_level: 0.0,
        ..SpeckleParams::default()
    };
    let out = speckle_noise(&cd, &silent, Seed(5))?;
    let identical = out
        .data()
        .iter()
        .zip(cd.data().iter())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    check!(identical, "σ² = 0 changed the tensor");

    let out = speckle_noise(&cd, &SpeckleParams::default(), Seed(5))?;
    let changed = differing_elements(&cd, &out);
    let strided: Vec<usize> = (0..25).map(|i| i * (128 / 25)).collect();
    check!(changed == strided, "modified elements {changed:?}, expected {strided:?}");
    check!(speckled_elements(128, 25) == strided, "selection helper disagrees");
    Ok("σ²=0 bit-identical; 25 strided slices modified".into())
}

// 2
fn speckle_statistics() -> Outcome {
    let cd = ChannelData::zeros(ProbeConfig::default(), Alignment::Raw)?;
    let p = SpeckleParams::default();
    let out = speckle_noise(&cd, &p, Seed(2024))?;
    let entries = [
        0.9, 0.9, 0.9, 0.8, 0.8, 0.8, 0.6, 0.0, 0.6, 0.4, 0.4, 0.4, 0.2, 0.2, 0.2,
    ];
    let sum_k2: f64 = entries.iter().map(|k: &f64| (k / 2.9).powi(2)).sum();
    let expected = 2.0 * p.noise_level * sum_k2;

    // stride over the kernel support so that samples are independent
    let mut samples = Vec::new();
    for e in speckled_elements(128, 25) {
        let slice = out.data().index_axis(Axis(0), e);
        for t in (4..1579 - 4).step_by(5) {
            for l in (2..128 - 2).step_by(3) {
                samples.push(slice[[t, l]] as f64);
            }
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let se = sd / n.sqrt();
    check!(n >= 1e5, "only {n} samples");
    check!(
        (mean - expected).abs() <= 3.0 * se,
        "mean {mean:.4}, expected {expected:.4}, 3·SE {:.4}",
        3.0 * se
    );
    Ok(format!(
        "mean {mean:.4} vs {expected:.4} (|Δ| = {:.2} SE, n = {n})",
        (mean - expected).abs() / se
    ))
}

// 3
fn spec_augment_round_trip() -> Outcome {
    let cd = random_tensor(ProbeConfig::default(), 3);
    let p = SpecAugmentParams::identity();
    let out = spec_augment(&cd, &p, Seed(9))?;
    let interior = s![.., p.fft_size..1579 - p.fft_size, ..];
    let err = out
        .data()
        .slice(interior)
        .iter()
        .zip(cd.data().slice(interior).iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f32, f32::max);
    check!(err < 1e-6, "max-abs error {err:e}");
    Ok(format!("max-abs interior error {err:.2e}"))
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Energy in bins `[lo, hi)` of a naive windowed DFT over frames that fit
/// entirely inside the signal.
fn band_energy(x: &[f64], n_fft: usize, hop: usize, lo: usize, hi: usize) -> f64 {
    let w = hann(n_fft);
    let mut total = 0.0;
    let mut start = 0;
    while start + n_fft <= x.len() {
        for k in lo..hi {
            let mut acc = Complex64::new(0.0, 0.0);
            for (n, wn) in w.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (k * n) as f64 / n_fft as f64;
                acc += Complex64::from_polar(x[start + n] * wn, phase);
            }
            total += acc.norm_sqr();
        }
        start += hop;
    }
    total
}

// 4
fn spec_augment_masking() -> Outcome {
    let pr = probe(2, 1579, 4);
    let (n_fft, hop) = (256, 64);
    let (lo, len) = (40usize, 16usize);
    let tone = |k: f64, t: usize| (2.0 * std::f64::consts::PI * k * t as f64 / n_fft as f64).cos();
    let data = Array3::from_shape_fn(pr.shape(), |(e, t, l)| {
        let a = 1.0 + 0.1 * (e + l) as f64;
        (a * (tone(44.0, t) + 0.7 * tone(48.5, t) + 0.5 * tone(52.0, t)) + 0.8 * tone(90.0, t)) as f32
    });
    let cd = ChannelData::new(pr, Alignment::Raw, data)?;
    let p = SpecAugmentParams {
        enable_stretch: false,
        ..SpecAugmentParams::default()
    };
    let mut plan = SpecAugmentPlan::draw(&p, 1579, 4, Seed(1))?;
    plan.time_mask = (0, 0);
    plan.line_mask = (0, 0);
    plan.freq_mask = (lo, len);
    let out = spec_augment_with_plan(&cd, &p, &plan)?;

    let mut worst: f64 = 0.0;
    for e in 0..2 {
        for l in 0..4 {
            let x: Vec<f64> = cd.data().slice(s![e, .., l]).iter().map(|&v| v as f64).collect();
            let y: Vec<f64> = out.data().slice(s![e, .., l]).iter().map(|&v| v as f64).collect();
            let ratio = band_energy(&y, n_fft, hop, lo, lo + len) / band_energy(&x, n_fft, hop, lo, lo + len);
            worst = worst.max(ratio);
        }
    }
    check!(worst < 0.01, "masked-band energy ratio {worst:.4}");
    Ok(format!("masked-band energy ratio {:.2e}", worst))
}

fn gaussian_2d(size: usize, sigma: f64) -> Array2<f64> {
    let c = (size / 2) as f64;
    let g = Array2::from_shape_fn((size, size), |(i, j)| {
        let (di, dj) = (i as f64 - c, j as f64 - c);
        (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp()
    });
    let total = g.sum();
    g / total
}

/// Direct MS-SSIM: per-pixel 2-D window sums, explicit l, c, s terms.
fn ms_ssim_oracle(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let weights = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
    let (c1, c2) = (0.0001, 0.0009);
    let c3 = c2 / 2.0;
    let g = gaussian_2d(11, 1.5);
    let mut x = x.clone();
    let mut y = y.clone();
    let mut result = 1.0;
    for (m, w) in weights.iter().enumerate() {
        let (h, wd) = x.dim();
        let (mut cs_sum, mut l_sum, mut count) = (0.0, 0.0, 0.0);
        for i in 0..=h - 11 {
            for j in 0..=wd - 11 {
                let px = x.slice(s![i..i + 11, j..j + 11]);
                let py = y.slice(s![i..i + 11, j..j + 11]);
                let mx = (&px * &g).sum();
                let my = (&py * &g).sum();
                let vx = (&px.mapv(|v| (v - mx) * (v - mx)) * &g).sum();
                let vy = (&py.mapv(|v| (v - my) * (v - my)) * &g).sum();
                let cov = (&(px.mapv(|v| v - mx) * py.mapv(|v| v - my)) * &g).sum();
                let (sx, sy) = (vx.max(0.0).sqrt(), vy.max(0.0).sqrt());
                let lum = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
                let con = (2.0 * sx * sy + c2) / (vx + vy + c2);
                let st = (cov + c3) / (sx * sy + c3);
                cs_sum += con * st;
                l_sum += lum;
                count += 1.0;
            }
        }
        result *= (cs_sum / count).powf(*w);
        if m == weights.len() - 1 {
            result *= (l_sum / count).powf(*w);
        } else {
            let half = |a: &Array2<f64>| {
                Array2::from_shape_fn((a.nrows() / 2, a.ncols() / 2), |(i, j)| {
                    a.slice(s![2 * i..2 * i + 2, 2 * j..2 * j + 2]).mean().unwrap()
                })
            };
            x = half(&x);
            y = half(&y);
        }
    }
    result
}

fn random_image(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, n), || rng.random_range(0.0..1.0))
}

fn smooth_pair(rng: &mut ChaCha8Rng, n: usize, noise: f64) -> (Array2<f64>, Array2<f64>) {
    let (fx, fy) = (rng.random_range(2.0..8.0), rng.random_range(2.0..8.0));
    let x = Array2::from_shape_fn((n, n), |(i, j)| {
        0.5 + 0.3 * (fx * i as f64 / n as f64).sin() * (fy * j as f64 / n as f64).cos() + 0.1 * rng.random_range(-1.0..1.0)
    });
    let y = x.mapv(|v| (v + noise * rng.random_range(-1.0..1.0)).clamp(0.0, 1.0));
    (x.mapv(|v: f64| v.clamp(0.0, 1.0)), y)
}

// 5
fn ms_ssim_correctness() -> Outcome {
    let p = MsSsimParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let x = random_image(&mut rng, 256);
    let self_sim = ms_ssim(x.view(), x.view(), &p)?;
    check!((self_sim - 1.0).abs() <= 1e-9, "ms_ssim(x, x) = {self_sim}");

    let mut worst: f64 = 0.0;
    for k in 0..3 {
        let (a, b) = smooth_pair(&mut rng, 256, 0.1 + 0.1 * k as f64);
        let lib = ms_ssim(a.view(), b.view(), &p)?;
        let oracle = ms_ssim_oracle(&a, &b);
        worst = worst.max((lib - oracle).abs());
    }
    check!(worst <= 1e-6, "oracle disagreement {worst:e}");

    for _ in 0..100 {
        let a = random_image(&mut rng, 176);
        let b = random_image(&mut rng, 176);
        let loss = ms_ssim_loss(a.view(), b.view(), &p)?;
        check!(loss >= 0.0, "negative loss {loss}");
    }
    Ok(format!("self = {self_sim}; oracle |Δ| ≤ {worst:.1e}; 100 losses ≥ 0"))
}

fn naive_ce(logits: &[f64], label: usize) -> f64 {
    let z: f64 = logits.iter().map(|v| v.exp()).sum();
    -(logits[label].exp() / z).ln()
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

// 6
fn loss_decompositions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let (yhat, y) = smooth_pair(&mut rng, 176, 0.2);
    let mp = MsSsimParams::default();
    let mse: f64 = yhat.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64;
    let structural = 1.0 - ms_ssim(yhat.view(), y.view(), &mp)?;
    let logits_yhat = [0.3, -1.2, 2.0];
    let logits_y = [1.1, 0.4, -0.5];
    let bottleneck = [-0.7, 0.2, 0.9];
    let label = 2;
    let fb = naive_ce(&logits_yhat, label) + naive_ce(&logits_y, label);
    check!(rel_close(feedback_loss(&logits_yhat, &logits_y, label)?, fb), "feedback loss");

    for lambda in [0.0, 0.8, 1.0] {
        for gamma in [0.0, 100.0] {
            let lp = LossParams { lambda, gamma };
            let ubb = lambda * mse + (1.0 - lambda) * structural;
            let got = ubb_loss(yhat.view(), y.view(), &lp, &mp)?;
            check!(rel_close(got, ubb), "ubb λ={lambda}: {got} vs {ubb}");
            let jbc = jbc_loss(yhat.view(), y.view(), &logits_yhat, &logits_y, label, &lp, &mp)?;
            check!(rel_close(jbc, gamma * ubb + fb), "jbc λ={lambda} γ={gamma}: {jbc}");
            let cdcb = cdcb_loss(yhat.view(), y.view(), &bottleneck, label, &lp, &mp)?;
            let expected = ubb + naive_ce(&bottleneck, label);
            check!(rel_close(cdcb, expected), "cdcb λ={lambda}: {cdcb} vs {expected}");
        }
    }
    Ok("λ ∈ {0, 0.8, 1}, γ ∈ {0, 100} within 1e-12 relative".into())
}

fn two_region_mask(n: usize) -> RegionMask {
    let lesion = Array2::from_shape_fn((n, n), |(i, _)| i < n / 2);
    let background = lesion.mapv(|b| !b);
    RegionMask::new(lesion, background).unwrap()
}

// 7
fn metric_oracles() -> Outcome {
    let mask = two_region_mask(IMAGE_SIZE);
    let px = mask.lesion().mapv(|b| if b { 0.1 } else { 0.8 });
    let img = BModeImage::new(px, 60.0)?;
    let cr = contrast_metrics(&img, &mask)?.cr_db;
    let cr_expected = 20.0 * 8f64.log10();
    check!((cr - cr_expected).abs() <= 1e-6, "CR {cr}");

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut draw = |lo: f64, hi: f64| -> Vec<f64> { (0..10_000).map(|_| rng.random_range(lo..hi)).collect() };
    let a = draw(0.0, 0.4);
    let b = draw(0.6, 1.0);
    let disjoint = gcnr(&a, &b, GcnrBins::Auto);
    check!(disjoint == 1.0, "disjoint gCNR {disjoint}");
    let c = draw(0.2, 0.8);
    let d = draw(0.2, 0.8);
    let same = gcnr(&c, &d, GcnrBins::Auto);
    check!(same <= 0.05, "identical-distribution gCNR {same}");
    let e = draw(0.0, 0.5);
    let f = draw(0.25, 0.75);
    let half = gcnr(&e, &f, GcnrBins::Auto);
    check!((half - 0.5).abs() <= 0.03, "half-overlap gCNR {half}");

    let lesion: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 0.1 } else { 0.3 }).collect();
    let background: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 0.5 } else { 0.7 }).collect();
    let cnr = cnr_db(&lesion, &background);
    let cnr_expected = 20.0 * (0.4 / 0.02f64.sqrt()).log10();
    check!((cnr - cnr_expected).abs() <= 1e-4, "CNR {cnr}");
    check!((cnr_expected - 9.0309).abs() < 1e-4, "hand value");
    Ok(format!(
        "CR {cr:.6} dB; gCNR {disjoint} / {same:.3} / {half:.3}; CNR {cnr:.4} dB"
    ))
}

fn argmax_abs(a: &Array2<f64>) -> (usize, usize) {
    let mut best = ((0, 0), f64::NEG_INFINITY);
    for (idx, &v) in a.indexed_iter() {
        if v.abs() > best.1 {
            best = (idx, v.abs());
        }
    }
    best.0
}

fn near(t: usize, l: usize, t_true: f64, x_true: f64, pr: &ProbeConfig) -> bool {
    let spacing = pr.line_x(1) - pr.line_x(0);
    (t as f64 - t_true).abs() <= 1.0 && (pr.line_x(l) - x_true).abs() <= spacing + 1e-12
}

fn simulate_reduced(phantom: &Phantom) -> ChannelData {
    let pr = ProbeConfig::reduced();
    synthesize_rf(phantom, &pr, &PulseSpec::for_probe(&pr)).unwrap()
}

// 8
fn beamforming_geometry() -> Outcome {
    let pr = ProbeConfig::reduced().quantized();
    let phantom = make_phantom(Preset::PointTarget, Seed(8), &pr);
    let target = phantom.scatterers[0];
    let t_true = 2.0 * target.z / pr.sound_speed * pr.sample_rate;
    let aligned = tof_correct(&simulate_reduced(&phantom))?;
    let d = das(&aligned)?;
    let m = mv(&aligned, &MvParams::default())?;
    let (dt, dl) = argmax_abs(&d.values);
    let (mt, ml) = argmax_abs(&m.values);
    check!(near(dt, dl, t_true, target.x, &pr), "DAS peak at ({dt}, {dl}), target t = {t_true}");
    check!(near(mt, ml, t_true, target.x, &pr), "MV peak at ({mt}, {ml}), target t = {t_true}");

    // per-element alignment needs the scatterer under a scan line
    let l0 = pr.num_lines / 2;
    let on_axis = Phantom {
        scatterers: vec![Scatterer {
            x: pr.line_x(l0),
            z: target.z,
            amplitude: 1.0,
        }],
        lesions: vec![],
    };
    let aligned_axis = tof_correct(&simulate_reduced(&on_axis))?;
    let expected = t_true.round() as i64;
    let mut worst = 0;
    for e in 0..pr.num_elements {
        let col = aligned_axis.data().slice(s![e, .., l0]);
        let (peak, _) = col
            .iter()
            .enumerate()
            .fold((0, 0.0f32), |acc, (t, &v)| if v.abs() > acc.1 { (t, v.abs()) } else { acc });
        worst = worst.max((peak as i64 - expected).abs());
    }
    check!(worst <= 1, "per-element alignment off by {worst} samples");

    let bd = image(&d, 60.0)?;
    let bm = image(&m, 60.0)?;
    let row = argmax_abs(&bd.pixels().to_owned()).0;
    let (wd, wm) = (
        lateral_width(bd.pixels(), row, 6.0, 60.0),
        lateral_width(bm.pixels(), row, 6.0, 60.0),
    );
    check!(wm <= wd, "MV width {wm:.2} px > DAS width {wd:.2} px");
    Ok(format!(
        "peaks DAS ({dt}, {dl}) MV ({mt}, {ml}) vs t = {t_true:.1}; alignment ±{worst}; -6 dB width MV {wm:.2} ≤ DAS {wd:.2} px"
    ))
}

fn rel_rms(a: &PreImage, b: &PreImage) -> f64 {
    let num: f64 = a.values.iter().zip(b.values.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.values.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

// 9
fn mv_limit() -> Outcome {
    let pr = ProbeConfig::reduced();
    let phantom = make_phantom(Preset::HypoechoicLesion, Seed(9), &pr);
    let aligned = tof_correct(&simulate_reduced(&phantom))?;
    let heavy = MvParams {
        diagonal_loading: 1e6,
        ..MvParams::default()
    };
    let rms = rel_rms(&mv(&aligned, &heavy)?, &das(&aligned)?);
    check!(rms < 0.01, "relative RMS {rms}");

    let mut worst: f64 = 0.0;
    for p in [MvParams::default(), heavy] {
        let w = mv_weights(&aligned, &p)?;
        for sum in w.sum_axis(Axis(2)).iter() {
            worst = worst.max((sum - 1.0).abs());
        }
    }
    check!(worst <= 1e-10, "aᵀw deviates by {worst:e}");
    Ok(format!("relative RMS {rms:.2e}; max |aᵀw − 1| = {worst:.1e}"))
}

// 10
fn contrast_ordering() -> Outcome {
    let pr = ProbeConfig::reduced();
    let phantom = make_phantom(Preset::AnechoicCyst, Seed(10), &pr);
    let mask = ground_truth_masks(&phantom, &pr)?;
    let raw = simulate_reduced(&phantom);
    let aligned = tof_correct(&raw)?;
    let g_das = contrast_metrics(&image(&das(&aligned)?, 60.0)?, &mask)?.gcnr;
    let g_mv = contrast_metrics(&image(&mv(&aligned, &MvParams::default())?, 60.0)?, &mask)?.gcnr;
    check!(g_das > 0.5, "DAS gCNR {g_das}");
    check!(g_mv > 0.5, "MV gCNR {g_mv}");

    let mut noisy = Vec::new();
    for seed in 0..3 {
        let speckled = speckle_noise(&raw, &SpeckleParams::default(), Seed(100 + seed))?;
        let g = contrast_metrics(&image(&das(&tof_correct(&speckled)?)?, 60.0)?, &mask)?.gcnr;
        check!(g <= g_das + 0.02, "speckle raised DAS gCNR from {g_das} to {g}");
        noisy.push(format!("{g:.3}"));
    }
    Ok(format!(
        "gCNR DAS {g_das:.3}, MV {g_mv:.3}; speckled DAS {}",
        noisy.join("/")
    ))
}

fn same_bits(a: &ChannelData, b: &ChannelData) -> bool {
    a.data().iter().zip(b.data().iter()).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_usbeam"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

// 11
fn determinism_and_formats() -> Outcome {
    let pr = probe(32, 512, 16);
    let cd = random_tensor(pr, 1);
    let ops: Vec<(&str, Box<dyn Fn(Seed) -> ChannelData>)> = vec![
        ("speckle", Box::new(|s| speckle_noise(&cd, &SpeckleParams::default(), s).unwrap())),
        ("gaussian", Box::new(|s| gaussian_noise(&cd, &GaussianNoiseParams::default(), s).unwrap())),
        ("spec_augment", Box::new(|s| spec_augment(&cd, &SpecAugmentParams::default(), s).unwrap())),
        ("subsample", Box::new(|s| subsample_mask(&cd, &SubsampleParams::default(), s).unwrap())),
        (
            "dropout",
            Box::new(|s| coarse_dropout(&cd, &DropoutParams::default(), s).unwrap()),
        ),
        (
            "pipeline",
            Box::new(|s| {
                let cfg = PipelineConfig {
                    seed: s,
                    ..PipelineConfig::default()
                };
                augment_pipeline_logged(&cd, &cfg).unwrap().0
            }),
        ),
    ];
    for (name, op) in &ops {
        check!(same_bits(&op(Seed(42)), &op(Seed(42))), "{name} not reproducible");
    }
    let phantom = |s| make_phantom(Preset::AnechoicCyst, s, &ProbeConfig::reduced());
    check!(phantom(Seed(3)) == phantom(Seed(3)), "phantom not reproducible");
    check!(phantom(Seed(3)) != phantom(Seed(4)), "phantom ignores seed");

    let bytes = io::encode_channel_data(&cd)?;
    let back = io::decode_channel_data(&bytes)?;
    check!(same_bits(&back, &cd) && back.probe() == cd.probe(), "USCD round trip");
    check!(io::encode_channel_data(&back)? == bytes, "USCD re-encode");

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let px = Array2::from_shape_simple_fn((IMAGE_SIZE, IMAGE_SIZE), || {
        rng.random_range(0..=65535u32) as f64 / 65535.0
    });
    let img = BModeImage::new(px, 45.0)?;
    let png = dir.path().join("img.png");
    io::write_image(&img, &png)?;
    check!(io::read_image(&png)? == img, "PNG round trip");

    let start = Instant::now();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let config = serde_json::json!({ "probe": ProbeConfig::reduced(), "augment": { "speckle_prob": 1.0 } });
    std::fs::write(path("run.json"), config.to_string()).map_err(|e| e.to_string())?;
    run_cli(&["simulate", "--preset", "cyst", "--seed", "7", "--config", &path("run.json"), "--out", &path("rf.uscd")])?;
    let log = run_cli(&["augment", &path("rf.uscd"), "--config", &path("run.json"), "--seed", "3", "--out", &path("aug.uscd")])?;
    let log_again = run_cli(&["augment", &path("rf.uscd"), "--config", &path("run.json"), "--seed", "3", "--out", &path("aug2.uscd")])?;
    check!(log == log_again, "stage log differs between runs");
    let aug = std::fs::read(path("aug.uscd")).map_err(|e| e.to_string())?;
    check!(aug == std::fs::read(path("aug2.uscd")).map_err(|e| e.to_string())?, "augment output differs");
    run_cli(&["beamform", &path("rf.uscd"), "--method", "das", "--out", &path("ref.png")])?;
    run_cli(&["beamform", &path("aug.uscd"), "--method", "mv", "--config", &path("run.json"), "--out", &path("aug.png")])?;
    let report = run_cli(&[
        "metrics",
        &path("aug.png"),
        "--reference",
        &path("ref.png"),
        "--lesion",
        &path("rf.lesion.png"),
        "--background",
        &path("rf.background.png"),
        "--method",
        "mv",
    ])?;
    let record: serde_json::Value = serde_json::from_str(report.trim()).map_err(|e| e.to_string())?;
    check!(record.get("gcnr").is_some(), "metrics record {report}");
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(300), "CLI pipeline took {elapsed:?}");
    Ok(format!(
        "6 stochastic ops + phantom reproducible; USCD/PNG exact; CLI pipeline {:.1} s",
        elapsed.as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 11] = [
        ("speckle identity", speckle_identity, 1),
        ("speckle statistics", speckle_statistics, 10),
        ("spec_augment round trip", spec_augment_round_trip, 60),
        ("spec_augment masking", spec_augment_masking, 60),
        ("ms-ssim correctness", ms_ssim_correctness, 30),
        ("loss decompositions", loss_decompositions, 1),
        ("metric oracles", metric_oracles, 10),
        ("beamforming geometry", beamforming_geometry, 60),
        ("mv loading limit", mv_limit, 60),
        ("contrast ordering", contrast_ordering, 120),
        ("determinism and formats", determinism_and_formats, 300),
    ];
    let mut failures = 0;
    for (i, (name, f, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()))
            .map_err(|e| e.to_string());
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{detail} (took {:.1} s, budget {budget} s)", elapsed.as_secs_f64()))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{:.2} s]", i + 1, elapsed.as_secs_f64()),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} [{:.2} s]", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
