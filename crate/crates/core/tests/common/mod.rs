//! Shared test fixtures: independent oracles (naive transforms, direct
//! window metrics, finite differences, quadrature) and deterministic
//! frame/sequence generators.

#![allow(dead_code)]

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use vprep::frame::{Frame, VideoSequence};
use vprep::rd::EncoderProfile;

// ---------------------------------------------------------------------------
// Frame generators

pub fn random_gray(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Frame::gray(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Smooth structured content (gradient + blobs + edge + sine texture),
/// quantized to the 8-bit grid like ingested natural images.
pub fn natural_gray(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let cx = rng.random::<f64>() * w as f64;
    let cy = rng.random::<f64>() * h as f64;
    let cx2 = rng.random::<f64>() * w as f64;
    let cy2 = rng.random::<f64>() * h as f64;
    let fx = 0.02 + rng.random::<f64>() * 0.2;
    let fy = 0.02 + rng.random::<f64>() * 0.2;
    let edge_x = (rng.random::<f64>() * w as f64 * 0.8 + w as f64 * 0.1).floor();
    let gx = rng.random::<f64>() * 0.4;
    let gy = rng.random::<f64>() * 0.4;
    let data: Vec<f64> = (0..w * h)
        .map(|i| {
            let x = (i % w) as f64;
            let y = (i / w) as f64;
            let g = 0.3 + gx * (x / w as f64) + gy * (y / h as f64);
            let blob = 0.25 * (-((x - cx).powi(2) + (y - cy).powi(2)) / 600.0).exp()
                - 0.15 * (-((x - cx2).powi(2) + (y - cy2).powi(2)) / 900.0).exp();
            let edge = if x > edge_x { 0.12 } else { 0.0 };
            let tex = 0.04 * (fx * x).sin() * (fy * y).cos();
            let v = (g + blob + edge + tex).clamp(0.0, 1.0);
            (v * 255.0).round() / 255.0
        })
        .collect();
    Frame::gray(w, h, data).unwrap()
}

/// Random YUV420 sequence on the 8-bit grid.
pub fn random_yuv_sequence(
    name: &str,
    frames: usize,
    w: usize,
    h: usize,
    fps: (u32, u32),
    seed: u64,
) -> VideoSequence {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut draw = |len: usize| -> Vec<f64> {
        (0..len)
            .map(|_| f64::from(rng.random_range(0u32..=255)) / 255.0)
            .collect()
    };
    let frames = (0..frames)
        .map(|_| Frame::yuv420(w, h, draw(w * h), draw(w * h / 4), draw(w * h / 4)).unwrap())
        .collect();
    VideoSequence::new(name, fps.0, fps.1, frames).unwrap()
}

/// Natural-looking moving content: panning gradient, drifting blob,
/// static texture, slowly varying chroma.
pub fn synthetic_clip(
    name: &str,
    frames: usize,
    w: usize,
    h: usize,
    fps: (u32, u32),
    seed: u64,
) -> VideoSequence {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let fx = 0.05 + rng.random::<f64>() * 0.15;
    let fy = 0.05 + rng.random::<f64>() * 0.15;
    let speed = 1.0 + rng.random::<f64>() * 2.0;
    let mk = |t: usize| -> Frame {
        let tt = t as f64 * speed;
        let cx = w as f64 * 0.5 + (tt * 0.07).sin() * w as f64 * 0.3;
        let cy = h as f64 * 0.5 + (tt * 0.05).cos() * h as f64 * 0.3;
        let y: Vec<f64> = (0..w * h)
            .map(|i| {
                let x = (i % w) as f64;
                let yy = (i / w) as f64;
                let g = 0.35 + 0.3 * ((x + tt) / w as f64).fract();
                let blob = 0.3 * (-((x - cx).powi(2) + (yy - cy).powi(2)) / 1500.0).exp();
                let tex = 0.05 * (fx * x).sin() * (fy * yy).cos();
                let v = (g + blob + tex).clamp(0.0, 1.0);
                (v * 255.0).round() / 255.0
            })
            .collect();
        let (cw, ch) = (w / 2, h / 2);
        let u: Vec<f64> = (0..cw * ch)
            .map(|i| {
                let x = (i % cw) as f64;
                let v = 0.5 + 0.1 * ((x + tt) * 0.02).sin();
                ((v * 255.0).round() / 255.0).clamp(0.0, 1.0)
            })
            .collect();
        let v: Vec<f64> = (0..cw * ch)
            .map(|i| {
                let yy = (i / cw) as f64;
                let v = 0.5 + 0.08 * ((yy - tt) * 0.03).cos();
                ((v * 255.0).round() / 255.0).clamp(0.0, 1.0)
            })
            .collect();
        Frame::yuv420(w, h, y, u, v).unwrap()
    };
    VideoSequence::new(name, fps.0, fps.1, (0..frames).map(mk).collect()).unwrap()
}

// ---------------------------------------------------------------------------
// Naive DCT oracle (literal 2-D cosine sum)

/// Raw unnormalized 2-D DCT by direct quadruple loop (cosines cached
/// per (frequency, position) pair).
pub fn naive_dct2d_raw(block: &[f64], n: usize) -> Vec<f64> {
    let mut cos_table = vec![0.0; n * n];
    for k in 0..n {
        for i in 0..n {
            cos_table[k * n + i] =
                (std::f64::consts::PI * k as f64 / n as f64 * (i as f64 + 0.5)).cos();
        }
    }
    let mut out = vec![0.0; n * n];
    for h in 0..n {
        for w in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += block[i * n + j] * cos_table[h * n + i] * cos_table[w * n + j];
                }
            }
            out[h * n + w] = acc;
        }
    }
    out
}

/// Orthonormal scale factor c(k).
pub fn ortho_scale(k: usize, n: usize) -> f64 {
    if k == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Naive threshold / selection / loss oracle (given a spectrum)

pub struct NaiveBlockLoss {
    pub threshold: f64,
    pub selected: Vec<(usize, usize)>,
    pub block_loss: f64,
}

/// Literal masking, thresholding, selection, and absolute-sum loss over
/// one spectrum: mask is h+w >= s, threshold divides by n*n (or the
/// masked count when `masked_count_divisor`), selection is strict `<`.
pub fn naive_block_loss(
    spectrum: &[f64],
    n: usize,
    s: usize,
    masked_count_divisor: bool,
) -> NaiveBlockLoss {
    let mut sum = 0.0;
    let mut masked = 0usize;
    for h in 0..n {
        for w in 0..n {
            if h + w >= s {
                sum += spectrum[h * n + w].abs();
                masked += 1;
            }
        }
    }
    let divisor = if masked_count_divisor {
        masked.max(1) as f64
    } else {
        (n * n) as f64
    };
    let threshold = sum / divisor;
    let mut selected = Vec::new();
    let mut block_loss = 0.0;
    for h in 0..n {
        for w in 0..n {
            if h + w >= s && spectrum[h * n + w].abs() < threshold {
                selected.push((h, w));
                block_loss += spectrum[h * n + w].abs();
            }
        }
    }
    NaiveBlockLoss {
        threshold,
        selected,
        block_loss,
    }
}

// ---------------------------------------------------------------------------
// Naive metric oracles (direct 2-D windows, no separable tricks)

pub fn naive_psnr(a: &Frame, b: &Frame) -> f64 {
    let (pa, pb) = (a.plane(0), b.plane(0));
    let mut acc = 0.0;
    for (x, y) in pa.data.iter().zip(&pb.data) {
        acc += (x - y) * (x - y);
    }
    let mse = acc / pa.data.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

fn naive_gaussian_window(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size as f64 - 1.0) / 2.0;
    let mut w = vec![0.0; size * size];
    for r in 0..size {
        for c in 0..size {
            let dr = r as f64 - half;
            let dc = c as f64 - half;
            w[r * size + c] = (-(dr * dr + dc * dc) / (2.0 * sigma * sigma)).exp();
        }
    }
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    w
}

/// (mean SSIM, mean contrast-structure) over valid positions, direct
/// per-window sums.
pub fn naive_ssim_means(a: &Frame, b: &Frame) -> (f64, f64) {
    naive_ssim_means_planes(&a.plane(0).data, &b.plane(0).data, a.width(), a.height())
}

fn naive_ssim_means_planes(a: &[f64], b: &[f64], w: usize, h: usize) -> (f64, f64) {
    const WIN: usize = 11;
    const C1: f64 = 0.01 * 0.01;
    const C2: f64 = 0.03 * 0.03;
    let window = naive_gaussian_window(WIN, 1.5);
    let mut sum_ssim = 0.0;
    let mut sum_cs = 0.0;
    let mut count = 0.0;
    for y0 in 0..=(h - WIN) {
        for x0 in 0..=(w - WIN) {
            let mut mua = 0.0;
            let mut mub = 0.0;
            let mut eaa = 0.0;
            let mut ebb = 0.0;
            let mut eab = 0.0;
            for r in 0..WIN {
                for c in 0..WIN {
                    let wt = window[r * WIN + c];
                    let va = a[(y0 + r) * w + x0 + c];
                    let vb = b[(y0 + r) * w + x0 + c];
                    mua += wt * va;
                    mub += wt * vb;
                    eaa += wt * va * va;
                    ebb += wt * vb * vb;
                    eab += wt * va * vb;
                }
            }
            let va = eaa - mua * mua;
            let vb = ebb - mub * mub;
            let cov = eab - mua * mub;
            let l = (2.0 * mua * mub + C1) / (mua * mua + mub * mub + C1);
            let cs = (2.0 * cov + C2) / (va + vb + C2);
            sum_ssim += l * cs;
            sum_cs += cs;
            count += 1.0;
        }
    }
    (sum_ssim / count, sum_cs / count)
}

pub fn naive_ssim(a: &Frame, b: &Frame) -> f64 {
    naive_ssim_means(a, b).0
}

/// 5-scale MS-SSIM by direct windows with 2x2-mean downsampling.
pub fn naive_ms_ssim(a: &Frame, b: &Frame) -> f64 {
    const WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
    let mut pa = a.plane(0).data.clone();
    let mut pb = b.plane(0).data.clone();
    let (mut w, mut h) = (a.width(), a.height());
    let mut score = 1.0;
    for (scale, &weight) in WEIGHTS.iter().enumerate() {
        let (mean_ssim, mean_cs) = naive_ssim_means_planes(&pa, &pb, w, h);
        if scale == WEIGHTS.len() - 1 {
            score *= mean_ssim.max(0.0).powf(weight);
        } else {
            score *= mean_cs.max(0.0).powf(weight);
            let (ow, oh) = (w / 2, h / 2);
            let down = |src: &[f64]| -> Vec<f64> {
                let mut out = vec![0.0; ow * oh];
                for y in 0..oh {
                    for x in 0..ow {
                        let i = 2 * y * w + 2 * x;
                        out[y * ow + x] =
                            (src[i] + src[i + 1] + src[i + w] + src[i + w + 1]) * 0.25;
                    }
                }
                out
            };
            pa = down(&pa);
            pb = down(&pb);
            w = ow;
            h = oh;
        }
    }
    score
}

pub fn naive_l1(a: &Frame, b: &Frame) -> f64 {
    let (pa, pb) = (a.plane(0), b.plane(0));
    let mut acc = 0.0;
    for (x, y) in pa.data.iter().zip(&pb.data) {
        acc += (x - y).abs();
    }
    acc / pa.data.len() as f64
}

// ---------------------------------------------------------------------------
// Fake codec (QP-dependent padding around a verbatim payload)

/// Write a POSIX-sh fake encoder/decoder pair into `dir` and return a
/// profile driving them. The "bitstream" is an 18-byte header, the input
/// bytes, and (60 - qp) * 997 zero bytes of padding, so sizes decrease
/// strictly with QP and decoding is bit-exact.
pub fn fake_codec_profile(dir: &Path) -> EncoderProfile {
    use std::os::unix::fs::PermissionsExt;
    let enc = dir.join("fake-enc.sh");
    let dec = dir.join("fake-dec.sh");
    std::fs::write(
        &enc,
        "#!/bin/sh\nset -e\nin=\"$1\"; out=\"$2\"; qp=\"$3\"\n\
         size=$(wc -c < \"$in\")\n\
         printf 'FKC1 %012d\\n' \"$size\" > \"$out\"\n\
         cat \"$in\" >> \"$out\"\n\
         pad=$(( (60 - qp) * 997 ))\n\
         if [ \"$pad\" -gt 0 ]; then head -c \"$pad\" /dev/zero >> \"$out\"; fi\n",
    )
    .unwrap();
    std::fs::write(
        &dec,
        "#!/bin/sh\nset -e\nin=\"$1\"; out=\"$2\"\n\
         size=$(head -c 17 \"$in\" | cut -d' ' -f2)\n\
         tail -c +19 \"$in\" | head -c \"$size\" > \"$out\"\n",
    )
    .unwrap();
    for p in [&enc, &dec] {
        std::fs::set_permissions(p, std::fs::Permissions::from_mode(0o755)).unwrap();
    }
    EncoderProfile {
        name: "fakecodec".into(),
        command_template: format!("{} {{input}} {{output}} {{qp}}", enc.display()),
        decode_template: format!("{} {{input}} {{output}}", dec.display()),
        preset: "instant".into(),
        qp_list: vec![20, 28, 36, 44],
    }
}
