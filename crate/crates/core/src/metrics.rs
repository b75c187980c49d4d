//! Full-reference quality metrics (PSNR, SSIM, MS-SSIM) and the loss
//! functions used by the preprocessing math: L1 reconstruction loss,
//! MS-SSIM perceptual loss, and the weighted total.
//!
//! Metrics operate on the luma plane by default; `PlaneMode::All`
//! averages per-plane scores weighted 6:1:1 for YUV420 and uniformly
//! otherwise. MS-SSIM follows the standard 5-scale formulation (window
//! 11, sigma 1.5, K1=0.01, K2=0.03, scale weights 0.0448/0.2856/0.3001/
//! 0.2363/0.1333), with 2x2-mean downsampling (trailing odd row/column
//! dropped), the luminance term at the coarsest scale only, and
//! per-scale means clamped at zero before exponentiation.

use crate::dct::{adaptive_dct_loss_multi, DctConfig};
use crate::error::{Error, Result};
use crate::frame::{to_luma, Frame, PixelFormat, Plane};

/// Rate and perceptual coefficients for the total loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for LossWeights {
    /// The training defaults: lambda1 = 10, lambda2 = 0.1.
    fn default() -> Self {
        LossWeights {
            lambda1: 10.0,
            lambda2: 0.1,
        }
    }
}

impl LossWeights {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        if lambda1 < 0.0 || lambda2 < 0.0 || !lambda1.is_finite() || !lambda2.is_finite() {
            return Err(Error::Config("loss weights must be finite and >= 0".into()));
        }
        Ok(LossWeights { lambda1, lambda2 })
    }
}

/// SSIM window parameters.
#[derive(Debug, Clone, Copy)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
        }
    }
}

/// MS-SSIM parameters: per-scale weights (their count sets the scale count).
#[derive(Debug, Clone)]
pub struct MsSsimParams {
    pub weights: Vec<f64>,
    pub ssim: SsimParams,
}

impl Default for MsSsimParams {
    fn default() -> Self {
        MsSsimParams {
            weights: vec![0.0448, 0.2856, 0.3001, 0.2363, 0.1333],
            ssim: SsimParams::default(),
        }
    }
}

impl MsSsimParams {
    /// Smallest frame side the scale pyramid supports.
    pub fn min_dimension(&self) -> usize {
        self.ssim.window << (self.weights.len() - 1)
    }
}

/// Which planes to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlaneMode {
    /// Luma only (the default working plane).
    #[default]
    Luma,
    /// All planes, weighted 6:1:1 for YUV420 and uniformly otherwise.
    All,
}

fn check_same_dims(a: &Frame, b: &Frame) -> Result<()> {
    if !a.same_dims(b) {
        return Err(Error::Contract(format!(
            "frames differ: {}x{} {:?} vs {}x{} {:?}",
            a.width(),
            a.height(),
            a.format(),
            b.width(),
            b.height(),
            b.format()
        )));
    }
    Ok(())
}

fn plane_weights(frame: &Frame, mode: PlaneMode) -> Vec<(usize, f64)> {
    match mode {
        PlaneMode::Luma => vec![(0, 1.0)],
        PlaneMode::All => match frame.format() {
            PixelFormat::Yuv420 => vec![(0, 6.0 / 8.0), (1, 1.0 / 8.0), (2, 1.0 / 8.0)],
            PixelFormat::Rgb => vec![(0, 1.0 / 3.0), (1, 1.0 / 3.0), (2, 1.0 / 3.0)],
            PixelFormat::Gray => vec![(0, 1.0)],
        },
    }
}

fn weighted_plane_score(
    a: &Frame,
    b: &Frame,
    mode: PlaneMode,
    score: impl Fn(&Plane, &Plane) -> Result<f64>,
) -> Result<f64> {
    check_same_dims(a, b)?;
    let la;
    let lb;
    let (fa, fb) = if mode == PlaneMode::Luma && a.format() != PixelFormat::Gray {
        la = to_luma(a);
        lb = to_luma(b);
        (&la, &lb)
    } else {
        (a, b)
    };
    let mut total = 0.0;
    for (i, w) in plane_weights(fa, mode) {
        total += w * score(fa.plane(i), fb.plane(i))?;
    }
    Ok(total)
}

/// Peak signal-to-noise ratio in dB on normalized samples
/// (`10*log10(1/MSE)`); identical inputs give +infinity.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    psnr_with(a, b, PlaneMode::Luma)
}

pub fn psnr_with(a: &Frame, b: &Frame, mode: PlaneMode) -> Result<f64> {
    weighted_plane_score(a, b, mode, |pa, pb| {
        let mut acc = 0.0;
        for (x, y) in pa.data.iter().zip(&pb.data) {
            let d = x - y;
            acc += d * d;
        }
        let mse = acc / pa.data.len() as f64;
        Ok(if mse == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (1.0 / mse).log10()
        })
    })
}

/// Mean local SSIM over valid window positions (Gaussian window).
pub fn ssim(a: &Frame, b: &Frame) -> Result<f64> {
    ssim_with(a, b, &SsimParams::default(), PlaneMode::Luma)
}

pub fn ssim_with(a: &Frame, b: &Frame, params: &SsimParams, mode: PlaneMode) -> Result<f64> {
    weighted_plane_score(a, b, mode, |pa, pb| {
        let (mean_ssim, _mean_cs) = ssim_plane_means(pa, pb, params)?;
        Ok(mean_ssim)
    })
}

/// Pooled (mean(l*cs), mean(cs)) over valid windows for one plane pair.
fn ssim_plane_means(a: &Plane, b: &Plane, params: &SsimParams) -> Result<(f64, f64)> {
    let win = params.window;
    if a.width < win || a.height < win {
        return Err(Error::Contract(format!(
            "plane {}x{} is smaller than the {win}x{win} SSIM window",
            a.width, a.height
        )));
    }
    let c1 = params.k1 * params.k1;
    let c2 = params.k2 * params.k2;
    let kernel = gaussian_kernel(win, params.sigma);

    let mul: Vec<f64> = a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect();
    let sqa: Vec<f64> = a.data.iter().map(|x| x * x).collect();
    let sqb: Vec<f64> = b.data.iter().map(|y| y * y).collect();

    let (w, h) = (a.width, a.height);
    let mu_a = convolve_valid(&a.data, w, h, &kernel);
    let mu_b = convolve_valid(&b.data, w, h, &kernel);
    let e_aa = convolve_valid(&sqa, w, h, &kernel);
    let e_bb = convolve_valid(&sqb, w, h, &kernel);
    let e_ab = convolve_valid(&mul, w, h, &kernel);

    let mut sum_ssim = 0.0;
    let mut sum_cs = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        let l = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        let cs = (2.0 * cov + c2) / (va + vb + c2);
        sum_ssim += l * cs;
        sum_cs += cs;
    }
    let count = mu_a.len() as f64;
    Ok((sum_ssim / count, sum_cs / count))
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size as f64 - 1.0) / 2.0;
    let mut k: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Separable valid-region convolution with a symmetric 1-D kernel applied
/// along rows then columns. Output is (w-win+1) x (h-win+1), row-major.
fn convolve_valid(src: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let win = kernel.len();
    let ow = w - win + 1;
    let oh = h - win + 1;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            let mut acc = 0.0;
            for (t, k) in kernel.iter().enumerate() {
                acc += src[y * w + x + t] * k;
            }
            rows[y * ow + x] = acc;
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (t, k) in kernel.iter().enumerate() {
                acc += rows[(y + t) * ow + x] * k;
            }
            out[y * ow + x] = acc;
        }
    }
    out
}

fn downsample2(src: &[f64], w: usize, h: usize) -> (Vec<f64>, usize, usize) {
    let ow = w / 2;
    let oh = h / 2;
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let i = 2 * y * w + 2 * x;
            out[y * ow + x] = (src[i] + src[i + 1] + src[i + w] + src[i + w + 1]) * 0.25;
        }
    }
    (out, ow, oh)
}

/// Multi-scale SSIM in `[0,1]`-ish range (can reach 0 when a scale's pooled
/// contrast-structure term is non-positive).
pub fn ms_ssim(a: &Frame, b: &Frame) -> Result<f64> {
    ms_ssim_with(a, b, &MsSsimParams::default(), PlaneMode::Luma)
}

pub fn ms_ssim_with(a: &Frame, b: &Frame, params: &MsSsimParams, mode: PlaneMode) -> Result<f64> {
    weighted_plane_score(a, b, mode, |pa, pb| ms_ssim_plane(pa, pb, params))
}

fn ms_ssim_plane(a: &Plane, b: &Plane, params: &MsSsimParams) -> Result<f64> {
    let min_dim = params.min_dimension();
    if a.width < min_dim || a.height < min_dim {
        return Err(Error::Contract(format!(
            "plane {}x{} is below the MS-SSIM minimum of {min_dim}x{min_dim} \
             ({} scales x window {})",
            a.width,
            a.height,
            params.weights.len(),
            params.ssim.window
        )));
    }
    let scales = params.weights.len();
    let mut pa = a.data.clone();
    let mut pb = b.data.clone();
    let (mut w, mut h) = (a.width, a.height);
    let mut score = 1.0;
    for (scale, &weight) in params.weights.iter().enumerate() {
        let plane_a = Plane {
            width: w,
            height: h,
            data: pa.clone(),
        };
        let plane_b = Plane {
            width: w,
            height: h,
            data: pb.clone(),
        };
        let (mean_ssim, mean_cs) = ssim_plane_means(&plane_a, &plane_b, &params.ssim)?;
        if scale + 1 == scales {
            score *= mean_ssim.max(0.0).powf(weight);
        } else {
            score *= mean_cs.max(0.0).powf(weight);
            let (da, ow, oh) = downsample2(&pa, w, h);
            let (db, _, _) = downsample2(&pb, w, h);
            pa = da;
            pb = db;
            w = ow;
            h = oh;
        }
    }
    Ok(score)
}

/// L1 reconstruction loss on luma: mean absolute difference.
pub fn reconstruction_loss(gt: &Frame, pred: &Frame) -> Result<f64> {
    check_same_dims(gt, pred)?;
    let (a, b) = (to_luma(gt), to_luma(pred));
    let pa = a.plane(0);
    let pb = b.plane(0);
    let mut acc = 0.0;
    for (x, y) in pa.data.iter().zip(&pb.data) {
        acc += (x - y).abs();
    }
    Ok(acc / pa.data.len() as f64)
}

/// Perceptual loss: 1 - MS-SSIM(pred, gt).
pub fn perceptual_loss(pred: &Frame, gt: &Frame) -> Result<f64> {
    Ok(1.0 - ms_ssim(pred, gt)?)
}

/// Per-term breakdown of the total loss, before weighting.
#[derive(Debug, Clone, Copy)]
pub struct TotalLoss {
    pub total: f64,
    pub dct: f64,
    pub perceptual: f64,
    pub reconstruction: f64,
    pub weights: LossWeights,
}

/// Weighted total loss: `lambda1 * L_dct(pred) + lambda2 * L_p + L_r`.
/// The rate term is reference-free (evaluated on the prediction only).
pub fn total_loss(
    pred: &Frame,
    gt: &Frame,
    dct_configs: &[DctConfig],
    weights: LossWeights,
) -> Result<TotalLoss> {
    check_same_dims(pred, gt)?;
    let pred_luma = to_luma(pred);
    let dct = adaptive_dct_loss_multi(&pred_luma, dct_configs)?;
    let perceptual = perceptual_loss(pred, gt)?;
    let reconstruction = reconstruction_loss(gt, pred)?;
    Ok(TotalLoss {
        total: weights.lambda1 * dct + weights.lambda2 * perceptual + reconstruction,
        dct,
        perceptual,
        reconstruction,
        weights,
    })
}

/// Scores of one frame pair; `ssim`/`ms_ssim` are None when the frame is
/// smaller than the metric's minimum size, `vmaf` is None unless an
/// external scorer filled it in.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct MetricReport {
    pub psnr: f64,
    pub ssim: Option<f64>,
    pub ms_ssim: Option<f64>,
    pub vmaf: Option<f64>,
}

/// Best-effort report: PSNR always, SSIM/MS-SSIM when the dimensions
/// permit. Real contract violations (dimension mismatch) still error.
pub fn metric_report(a: &Frame, b: &Frame, mode: PlaneMode) -> Result<MetricReport> {
    check_same_dims(a, b)?;
    let psnr = psnr_with(a, b, mode)?;
    let ssim = match ssim_with(a, b, &SsimParams::default(), mode) {
        Ok(v) => Some(v),
        Err(Error::Contract(_)) => None,
        Err(e) => return Err(e),
    };
    let ms_ssim = match ms_ssim_with(a, b, &MsSsimParams::default(), mode) {
        Ok(v) => Some(v),
        Err(Error::Contract(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(MetricReport {
        psnr,
        ssim,
        ms_ssim,
        vmaf: None,
    })
}
