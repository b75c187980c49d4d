//! Seeded, reproducible image degradation pipeline: anisotropic Gaussian
//! blur, Gaussian/Poisson noise, area/bilinear/bicubic resizing, an
//! internal luma-only JPEG-style compression stage, and an optional
//! external-codec round trip, composed in randomized orders.
//!
//! The pipeline is luma-only: stages operate on gray frames. Recipes are
//! fully materialized at sampling time (including per-noise-stage RNG
//! seeds), so `(frame, recipe) -> output` is a pure function and replaying
//! a serialized recipe reproduces bit-identical output. Parameter ranges
//! are not prescribed by the underlying method; the defaults here follow
//! common second-order degradation practice and are config-overridable.
//! Stage order within an order is fixed: blur, resize, noise, compression.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Frame, PixelFormat, Plane};

/// Resampling algorithm for the resize stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResizeMode {
    Area,
    Bilinear,
    Bicubic,
}

/// One materialized degradation stage with all parameters fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DegradationStage {
    Blur {
        sigma_x: f64,
        sigma_y: f64,
        /// Rotation of the anisotropic kernel, radians in `[0, pi)`.
        angle: f64,
        kernel_size: usize,
    },
    NoiseGaussian {
        sigma: f64,
        seed: u64,
    },
    NoisePoisson {
        /// Shot-noise scale: samples Poisson(pixel * scale) / scale.
        scale: f64,
        seed: u64,
    },
    Resize {
        mode: ResizeMode,
        scale: f64,
    },
    Jpeg {
        quality: u8,
    },
    Codec {
        qp: u32,
    },
}

impl DegradationStage {
    /// Hard parameter bounds for stages, enforced on apply so hand-edited
    /// recipe files are checked too.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DegradationStage::Blur {
                sigma_x,
                sigma_y,
                angle,
                kernel_size,
            } => {
                if !(0.1..=3.0).contains(&sigma_x) || !(0.1..=3.0).contains(&sigma_y) {
                    return Err(Error::Config(format!(
                        "blur sigma ({sigma_x}, {sigma_y}) outside [0.1, 3.0]"
                    )));
                }
                if !(0.0..std::f64::consts::PI).contains(&angle) {
                    return Err(Error::Config(format!("blur angle {angle} outside [0, pi)")));
                }
                if kernel_size % 2 == 0 || !(3..=21).contains(&kernel_size) {
                    return Err(Error::Config(format!(
                        "kernel size {kernel_size} must be odd and in [3, 21]"
                    )));
                }
            }
            DegradationStage::NoiseGaussian { sigma, .. } => {
                if !(0.0..=0.5).contains(&sigma) {
                    return Err(Error::Config(format!(
                        "noise sigma {sigma} outside [0, 0.5]"
                    )));
                }
            }
            DegradationStage::NoisePoisson { scale, .. } => {
                if !(1.0..=100_000.0).contains(&scale) {
                    return Err(Error::Config(format!(
                        "poisson scale {scale} outside [1, 1e5]"
                    )));
                }
            }
            DegradationStage::Resize { scale, .. } => {
                if !(0.5..=2.0).contains(&scale) {
                    return Err(Error::Config(format!(
                        "resize scale {scale} outside [0.5, 2.0]"
                    )));
                }
            }
            DegradationStage::Jpeg { quality } => {
                if !(10..=95).contains(&quality) {
                    return Err(Error::Config(format!(
                        "jpeg quality {quality} outside [10, 95]"
                    )));
                }
            }
            DegradationStage::Codec { qp } => {
                if qp > 63 {
                    return Err(Error::Config(format!("codec qp {qp} outside [0, 63]")));
                }
            }
        }
        Ok(())
    }
}

/// One round of degradation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DegradationOrder {
    #[serde(default)]
    pub stages: Vec<DegradationStage>,
}

/// A reproducible record of one multi-order degradation: the master seed
/// plus every sampled stage parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationRecipe {
    pub seed: u64,
    pub orders: Vec<DegradationOrder>,
}

impl DegradationRecipe {
    /// Identity recipe (no stages).
    pub fn identity(seed: u64) -> Self {
        DegradationRecipe {
            seed,
            orders: vec![],
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let recipe: DegradationRecipe =
            toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        for order in &recipe.orders {
            for stage in &order.stages {
                stage.validate()?;
            }
        }
        Ok(recipe)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_toml()?).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text =
            std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_toml(&text)
    }
}

/// Sampling ranges and inclusion probabilities for recipe generation.
/// All ranges must sit inside the hard stage bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DegradeRanges {
    pub orders: usize,
    pub p_blur: f64,
    pub p_resize: f64,
    pub p_noise: f64,
    pub p_compress: f64,
    pub blur_sigma: (f64, f64),
    pub blur_isotropic_prob: f64,
    pub kernel_sizes: Vec<usize>,
    pub gaussian_sigma: (f64, f64),
    pub poisson_scale: (f64, f64),
    pub gaussian_noise_prob: f64,
    pub resize_scale: (f64, f64),
    pub resize_modes: Vec<ResizeMode>,
    pub jpeg_quality: (u8, u8),
    /// Probability that a sampled compression stage is a codec round trip
    /// instead of JPEG. Zero by default: codec stages need an encoder.
    pub codec_prob: f64,
    pub codec_qp: (u32, u32),
}

impl Default for DegradeRanges {
    fn default() -> Self {
        DegradeRanges {
            orders: 2,
            p_blur: 0.9,
            p_resize: 0.75,
            p_noise: 0.9,
            p_compress: 0.8,
            blur_sigma: (0.1, 3.0),
            blur_isotropic_prob: 0.5,
            kernel_sizes: vec![3, 5, 7, 9, 11, 13, 15, 17, 19, 21],
            gaussian_sigma: (1.0 / 255.0, 25.0 / 255.0),
            poisson_scale: (50.0, 1000.0),
            gaussian_noise_prob: 0.5,
            resize_scale: (0.5, 2.0),
            resize_modes: vec![ResizeMode::Area, ResizeMode::Bilinear, ResizeMode::Bicubic],
            jpeg_quality: (10, 95),
            codec_prob: 0.0,
            codec_qp: (20, 45),
        }
    }
}

impl DegradeRanges {
    pub fn validate(&self) -> Result<()> {
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !(prob_ok(self.p_blur)
            && prob_ok(self.p_resize)
            && prob_ok(self.p_noise)
            && prob_ok(self.p_compress)
            && prob_ok(self.blur_isotropic_prob)
            && prob_ok(self.gaussian_noise_prob)
            && prob_ok(self.codec_prob))
        {
            return Err(Error::Config("probabilities must lie in [0,1]".into()));
        }
        if self.orders == 0 {
            return Err(Error::Config(
                "at least one degradation order required".into(),
            ));
        }
        let range_ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !range_ok(self.blur_sigma)
            || !range_ok(self.gaussian_sigma)
            || !range_ok(self.poisson_scale)
            || !range_ok(self.resize_scale)
        {
            return Err(Error::Config("empty or inverted parameter range".into()));
        }
        if self.kernel_sizes.is_empty() {
            return Err(Error::Config("kernel size list is empty".into()));
        }
        if self.resize_modes.is_empty() {
            return Err(Error::Config("resize mode list is empty".into()));
        }
        if self.jpeg_quality.0 > self.jpeg_quality.1 || self.codec_qp.0 > self.codec_qp.1 {
            return Err(Error::Config("empty or inverted quality range".into()));
        }
        // Probe the hard bounds with representative stages.
        DegradationStage::Blur {
            sigma_x: self.blur_sigma.0,
            sigma_y: self.blur_sigma.1,
            angle: 0.0,
            kernel_size: *self.kernel_sizes.iter().max().unwrap(),
        }
        .validate()?;
        DegradationStage::Blur {
            sigma_x: self.blur_sigma.1,
            sigma_y: self.blur_sigma.0,
            angle: 0.0,
            kernel_size: *self.kernel_sizes.iter().min().unwrap(),
        }
        .validate()?;
        for &q in &[self.jpeg_quality.0, self.jpeg_quality.1] {
            DegradationStage::Jpeg { quality: q }.validate()?;
        }
        for &scale in &[self.resize_scale.0, self.resize_scale.1] {
            DegradationStage::Resize {
                mode: ResizeMode::Bilinear,
                scale,
            }
            .validate()?;
        }
        Ok(())
    }
}

/// Draw a fully materialized two-order (by default) recipe from a seed.
pub fn sample_recipe(seed: u64, ranges: &DegradeRanges) -> Result<DegradationRecipe> {
    ranges.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let uniform =
        |rng: &mut ChaCha12Rng, (lo, hi): (f64, f64)| lo + rng.random::<f64>() * (hi - lo);
    let mut orders = Vec::with_capacity(ranges.orders);
    for _ in 0..ranges.orders {
        let mut stages = Vec::new();
        if rng.random::<f64>() < ranges.p_blur {
            let kernel_size = ranges.kernel_sizes[rng.random_range(0..ranges.kernel_sizes.len())];
            if rng.random::<f64>() < ranges.blur_isotropic_prob {
                let sigma = uniform(&mut rng, ranges.blur_sigma);
                stages.push(DegradationStage::Blur {
                    sigma_x: sigma,
                    sigma_y: sigma,
                    angle: 0.0,
                    kernel_size,
                });
            } else {
                stages.push(DegradationStage::Blur {
                    sigma_x: uniform(&mut rng, ranges.blur_sigma),
                    sigma_y: uniform(&mut rng, ranges.blur_sigma),
                    angle: rng.random::<f64>() * std::f64::consts::PI * 0.999_999,
                    kernel_size,
                });
            }
        }
        if rng.random::<f64>() < ranges.p_resize {
            let mode = ranges.resize_modes[rng.random_range(0..ranges.resize_modes.len())];
            stages.push(DegradationStage::Resize {
                mode,
                scale: uniform(&mut rng, ranges.resize_scale),
            });
        }
        if rng.random::<f64>() < ranges.p_noise {
            if rng.random::<f64>() < ranges.gaussian_noise_prob {
                stages.push(DegradationStage::NoiseGaussian {
                    sigma: uniform(&mut rng, ranges.gaussian_sigma),
                    seed: rng.random::<u64>(),
                });
            } else {
                stages.push(DegradationStage::NoisePoisson {
                    scale: uniform(&mut rng, ranges.poisson_scale),
                    seed: rng.random::<u64>(),
                });
            }
        }
        if rng.random::<f64>() < ranges.p_compress {
            if rng.random::<f64>() < ranges.codec_prob {
                stages.push(DegradationStage::Codec {
                    qp: rng.random_range(ranges.codec_qp.0..=ranges.codec_qp.1),
                });
            } else {
                stages.push(DegradationStage::Jpeg {
                    quality: rng.random_range(ranges.jpeg_quality.0..=ranges.jpeg_quality.1),
                });
            }
        }
        orders.push(DegradationOrder { stages });
    }
    Ok(DegradationRecipe { seed, orders })
}

fn require_gray(frame: &Frame) -> Result<()> {
    if frame.format() != PixelFormat::Gray {
        return Err(Error::Contract(
            "degradation stages operate on gray frames; convert with to_luma first".into(),
        ));
    }
    Ok(())
}

/// Apply one stage. The CODEC stage needs an encoder and is reported as
/// unavailable here; use [`apply_stage_with`] to supply one.
pub fn apply_stage(frame: &Frame, stage: &DegradationStage) -> Result<Frame> {
    apply_stage_with(frame, stage, None)
}

/// Apply one stage, with an optional encoder profile for CODEC stages.
pub fn apply_stage_with(
    frame: &Frame,
    stage: &DegradationStage,
    codec: Option<&crate::rd::EncoderProfile>,
) -> Result<Frame> {
    require_gray(frame)?;
    stage.validate()?;
    match *stage {
        DegradationStage::Blur {
            sigma_x,
            sigma_y,
            angle,
            kernel_size,
        } => Ok(blur(frame, sigma_x, sigma_y, angle, kernel_size)),
        DegradationStage::NoiseGaussian { sigma, seed } => Ok(gaussian_noise(frame, sigma, seed)),
        DegradationStage::NoisePoisson { scale, seed } => poisson_noise(frame, scale, seed),
        DegradationStage::Resize { mode, scale } => Ok(resize_by(frame, mode, scale)),
        DegradationStage::Jpeg { quality } => Ok(jpeg_degrade(frame, quality)),
        DegradationStage::Codec { qp } => match codec {
            Some(profile) => codec_roundtrip(frame, profile, qp),
            None => Err(Error::StageUnavailable(
                "codec stage requires a configured encoder profile".into(),
            )),
        },
    }
}

/// Apply a full recipe. Output is clamped to `[0,1]` and restored to the
/// input dimensions at the end of each order (fixed bicubic resample)
/// when a resize stage changed them, so recipes stay comparable against
/// their input. The recipe itself is the reproducible record.
pub fn apply_recipe(frame: &Frame, recipe: &DegradationRecipe) -> Result<Frame> {
    apply_recipe_with(frame, recipe, None)
}

pub fn apply_recipe_with(
    frame: &Frame,
    recipe: &DegradationRecipe,
    codec: Option<&crate::rd::EncoderProfile>,
) -> Result<Frame> {
    require_gray(frame)?;
    let (w0, h0) = (frame.width(), frame.height());
    let mut current = frame.clone();
    for order in &recipe.orders {
        for stage in &order.stages {
            current = apply_stage_with(&current, stage, codec)?;
        }
        if current.width() != w0 || current.height() != h0 {
            current = resize_to(&current, ResizeMode::Bicubic, w0, h0);
        }
    }
    Ok(current)
}

// ---------------------------------------------------------------------------
// Blur

/// Normalized anisotropic Gaussian kernel from (sigma_x, sigma_y, angle).
pub fn gaussian_blur_kernel(sigma_x: f64, sigma_y: f64, angle: f64, size: usize) -> Vec<f64> {
    let (sin, cos) = angle.sin_cos();
    // Inverse covariance of the rotated Gaussian.
    let a = cos * cos / (sigma_x * sigma_x) + sin * sin / (sigma_y * sigma_y);
    let b = sin * cos * (1.0 / (sigma_x * sigma_x) - 1.0 / (sigma_y * sigma_y));
    let c = sin * sin / (sigma_x * sigma_x) + cos * cos / (sigma_y * sigma_y);
    let half = (size as isize - 1) / 2;
    let mut kernel = Vec::with_capacity(size * size);
    for dy in -half..=half {
        for dx in -half..=half {
            let (x, y) = (dx as f64, dy as f64);
            kernel.push((-0.5 * (a * x * x + 2.0 * b * x * y + c * y * y)).exp());
        }
    }
    let sum: f64 = kernel.iter().sum();
    for v in &mut kernel {
        *v /= sum;
    }
    kernel
}

fn reflect_index(i: isize, n: isize) -> usize {
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

fn blur(frame: &Frame, sigma_x: f64, sigma_y: f64, angle: f64, kernel_size: usize) -> Frame {
    let kernel = gaussian_blur_kernel(sigma_x, sigma_y, angle, kernel_size);
    let plane = frame.plane(0);
    let (w, h) = (plane.width as isize, plane.height as isize);
    let half = (kernel_size as isize - 1) / 2;
    let mut out = vec![0.0; plane.data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            let mut k = 0;
            for dy in -half..=half {
                let sy = reflect_index(y + dy, h);
                for dx in -half..=half {
                    let sx = reflect_index(x + dx, w);
                    acc += plane.data[sy * w as usize + sx] * kernel[k];
                    k += 1;
                }
            }
            out[(y * w + x) as usize] = acc.clamp(0.0, 1.0);
        }
    }
    Frame::gray_clamped(Plane {
        width: plane.width,
        height: plane.height,
        data: out,
    })
}

// ---------------------------------------------------------------------------
// Noise

fn gaussian_noise(frame: &Frame, sigma: f64, seed: u64) -> Frame {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    let data: Vec<f64> = frame
        .plane(0)
        .data
        .iter()
        .map(|v| (v + normal.sample(&mut rng)).clamp(0.0, 1.0))
        .collect();
    Frame::gray_clamped(Plane {
        width: frame.width(),
        height: frame.height(),
        data,
    })
}

fn poisson_noise(frame: &Frame, scale: f64, seed: u64) -> Result<Frame> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(frame.plane(0).data.len());
    for &v in &frame.plane(0).data {
        let lambda = v * scale;
        let sample = if lambda > 0.0 {
            let poisson = Poisson::new(lambda)
                .map_err(|e| Error::Config(format!("poisson lambda {lambda}: {e}")))?;
            poisson.sample(&mut rng) / scale
        } else {
            0.0
        };
        data.push(sample.clamp(0.0, 1.0));
    }
    Ok(Frame::gray_clamped(Plane {
        width: frame.width(),
        height: frame.height(),
        data,
    }))
}

// ---------------------------------------------------------------------------
// Resize

fn resize_by(frame: &Frame, mode: ResizeMode, scale: f64) -> Frame {
    let w = ((frame.width() as f64 * scale).round() as usize).max(1);
    let h = ((frame.height() as f64 * scale).round() as usize).max(1);
    resize_to(frame, mode, w, h)
}

/// Resample a gray frame to explicit dimensions.
pub fn resize_to(frame: &Frame, mode: ResizeMode, out_w: usize, out_h: usize) -> Frame {
    let plane = frame.plane(0);
    let horizontal = resample_axis(&plane.data, plane.width, plane.height, out_w, mode, true);
    let data = resample_axis(&horizontal, out_w, plane.height, out_h, mode, false);
    let mut out = Plane {
        width: out_w,
        height: out_h,
        data,
    };
    out.clamp_unit();
    Frame::gray_clamped(out)
}

/// Resample one axis. `horizontal` selects whether rows or columns are
/// resampled; the other axis keeps its length (`w`/`h` are the *input*
/// dims of `src`).
fn resample_axis(
    src: &[f64],
    w: usize,
    h: usize,
    out_len: usize,
    mode: ResizeMode,
    horizontal: bool,
) -> Vec<f64> {
    let in_len = if horizontal { w } else { h };
    let lines = if horizontal { h } else { w };
    let taps = axis_taps(in_len, out_len, mode);
    let (ow, oh) = if horizontal {
        (out_len, h)
    } else {
        (w, out_len)
    };
    let mut out = vec![0.0; ow * oh];
    for line in 0..lines {
        for (o, tap) in taps.iter().enumerate() {
            let mut acc = 0.0;
            for &(idx, weight) in tap {
                let v = if horizontal {
                    src[line * w + idx]
                } else {
                    src[idx * w + line]
                };
                acc += v * weight;
            }
            if horizontal {
                out[line * ow + o] = acc;
            } else {
                out[o * ow + line] = acc;
            }
        }
    }
    out
}

/// Per-output-pixel (source index, weight) lists for one axis.
fn axis_taps(in_len: usize, out_len: usize, mode: ResizeMode) -> Vec<Vec<(usize, f64)>> {
    let ratio = in_len as f64 / out_len as f64;
    let clamp = |i: isize| i.clamp(0, in_len as isize - 1) as usize;
    (0..out_len)
        .map(|o| match mode {
            ResizeMode::Area => {
                // Exact box integration over the covered source interval.
                let lo = o as f64 * ratio;
                let hi = (o + 1) as f64 * ratio;
                let mut taps = Vec::new();
                let first = lo.floor() as usize;
                let last = ((hi.ceil() as usize).max(first + 1)).min(in_len);
                for i in first..last {
                    let cover = (hi.min((i + 1) as f64) - lo.max(i as f64)).max(0.0);
                    if cover > 0.0 {
                        taps.push((i, cover / (hi - lo)));
                    }
                }
                taps
            }
            ResizeMode::Bilinear => {
                let center = (o as f64 + 0.5) * ratio - 0.5;
                let i0 = center.floor();
                let frac = center - i0;
                vec![
                    (clamp(i0 as isize), 1.0 - frac),
                    (clamp(i0 as isize + 1), frac),
                ]
            }
            ResizeMode::Bicubic => {
                let center = (o as f64 + 0.5) * ratio - 0.5;
                let i0 = center.floor();
                let frac = center - i0;
                (-1..=2)
                    .map(|t| (clamp(i0 as isize + t), cubic_weight(t as f64 - frac)))
                    .collect()
            }
        })
        .collect()
}

/// Catmull-Rom cubic (a = -0.5).
fn cubic_weight(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        (A + 2.0) * t * t * t - (A + 3.0) * t * t + 1.0
    } else if t < 2.0 {
        A * t * t * t - 5.0 * A * t * t + 8.0 * A * t - 4.0 * A
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// JPEG-style compression

/// Standard JPEG luminance quantization table, row-major.
pub const JPEG_LUMA_QUANT: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// IJG quality scaling of the luminance table. Quality 100 yields the
/// all-ones table.
pub fn jpeg_quality_table(quality: u8) -> [f64; 64] {
    let q = quality.clamp(1, 100) as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut table = [0.0; 64];
    for (t, &base) in table.iter_mut().zip(JPEG_LUMA_QUANT.iter()) {
        *t = ((u32::from(base) * scale + 50) / 100).clamp(1, 255) as f64;
    }
    table
}

/// Luma-only JPEG-style degradation: 8x8 block DCT on samples quantized
/// to the 8-bit grid and centered at zero, coefficient quantization by
/// the quality-scaled table, dequantization, inverse DCT.
///
/// Quality >= 100 bypasses the stage entirely: even the all-ones table
/// is lossy once coefficients are rounded, so the lossless limit is
/// implemented as a bypass.
pub fn jpeg_degrade(frame: &Frame, quality: u8) -> Frame {
    if quality >= 100 {
        return frame.clone();
    }
    let table = jpeg_quality_table(quality);
    jpeg_quantize_roundtrip(frame, &table)
}

/// The quantization round trip itself, with an explicit table (test hook).
pub fn jpeg_quantize_roundtrip(frame: &Frame, table: &[f64; 64]) -> Frame {
    use crate::dct::{
        blockize, dct2d_forward, dct2d_inverse, unblockize, BlockSpectrum, DctConfig,
    };
    let cfg = DctConfig::with_block_size(8).unwrap();
    let plane = frame.plane(0);
    let centered = Plane {
        width: plane.width,
        height: plane.height,
        data: plane
            .data
            .iter()
            .map(|&v| (v * 255.0).round() - 128.0)
            .collect(),
    };
    let mut grid = blockize(&centered, 8);
    for block in &mut grid.blocks {
        let spectrum = dct2d_forward(block, &cfg).expect("8x8 block");
        let coeffs: Vec<f64> = spectrum
            .coeffs
            .iter()
            .zip(table.iter())
            .map(|(&f, &q)| (f / q).round() * q)
            .collect();
        let rebuilt = dct2d_inverse(
            &BlockSpectrum {
                n: 8,
                block_row: block.block_row,
                block_col: block.block_col,
                coeffs,
            },
            &cfg,
        )
        .expect("orthonormal inverse");
        block.data = rebuilt.data;
    }
    let restored = unblockize(&grid);
    let data: Vec<f64> = restored
        .data
        .iter()
        .map(|&v| (v + 128.0).round().clamp(0.0, 255.0) / 255.0)
        .collect();
    Frame::gray_clamped(Plane {
        width: plane.width,
        height: plane.height,
        data,
    })
}

// ---------------------------------------------------------------------------
// Codec round trip

/// Round-trip the luma plane through an external encoder at a fixed QP.
/// The plane is wrapped into a single-frame YUV420 sequence with neutral
/// chroma (padded to even dimensions, cropped back afterwards).
fn codec_roundtrip(frame: &Frame, profile: &crate::rd::EncoderProfile, qp: u32) -> Result<Frame> {
    let (w, h) = (frame.width(), frame.height());
    let (ew, eh) = (w + w % 2, h + h % 2);
    let src = frame.plane(0);
    let mut y = vec![0.0; ew * eh];
    for row in 0..eh {
        let sy = row.min(h - 1);
        for col in 0..ew {
            let sx = col.min(w - 1);
            y[row * ew + col] = src.data[sy * w + sx];
        }
    }
    let chroma = vec![0.5; (ew / 2) * (eh / 2)];
    let seq = crate::frame::VideoSequence::new(
        "degrade-codec",
        25,
        1,
        vec![Frame::yuv420(ew, eh, y, chroma.clone(), chroma)?],
    )?;
    let dir = tempfile::Builder::new()
        .prefix("vprep-codec-stage")
        .tempdir()
        .map_err(|e| Error::io("tempdir", e))?;
    let outcome = crate::rd::encode_decode(&seq, profile, qp, dir.path())?;
    let decoded = &outcome.decoded.frames()[0];
    let mut data = Vec::with_capacity(w * h);
    for row in 0..h {
        let base = row * ew;
        data.extend_from_slice(&decoded.plane(0).data[base..base + w]);
    }
    Ok(Frame::gray_clamped(Plane {
        width: w,
        height: h,
        data,
    }))
}
