//! Test clip generation for the codec experiments.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use vprep::frame::{Frame, VideoSequence};

/// Moving gradient + drifting blob + fine texture + per-frame sensor
/// noise, quantized to the 8-bit grid. The temporally independent noise
/// mimics camera grain: expensive for the encoder, cheap to thin out.
pub fn textured_clip(
    name: &str,
    frames: usize,
    w: usize,
    h: usize,
    fps: (u32, u32),
    seed: u64,
) -> VideoSequence {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let fx = 0.3 + rng.random::<f64>() * 0.4;
    let fy = 0.3 + rng.random::<f64>() * 0.4;
    let speed = 1.5 + rng.random::<f64>() * 2.0;
    let mk = |t: usize| -> Frame {
        let tt = t as f64 * speed;
        let cx = w as f64 * 0.5 + (tt * 0.06).sin() * w as f64 * 0.3;
        let cy = h as f64 * 0.5 + (tt * 0.045).cos() * h as f64 * 0.3;
        let mut frame_rng =
            ChaCha12Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let y: Vec<f64> = (0..w * h)
            .map(|i| {
                let x = (i % w) as f64;
                let yy = (i / w) as f64;
                let g = 0.35
                    + 0.25 * (((x + 2.0 * tt) / w as f64) * std::f64::consts::TAU).sin() * 0.5
                    + 0.1 * (yy / h as f64);
                let blob = 0.25 * (-((x - cx).powi(2) + (yy - cy).powi(2)) / 2500.0).exp();
                let tex = 0.05 * (fx * x).sin() * (fy * yy).sin();
                let grain = (frame_rng.random::<f64>() - 0.5) * 0.2;
                let v = (g + blob + tex + grain).clamp(0.0, 1.0);
                (v * 255.0).round() / 255.0
            })
            .collect();
        let (cw, ch) = (w / 2, h / 2);
        let u: Vec<f64> = (0..cw * ch)
            .map(|i| {
                let x = (i % cw) as f64;
                (((0.5 + 0.08 * ((x + tt) * 0.03).sin()) * 255.0).round() / 255.0).clamp(0.0, 1.0)
            })
            .collect();
        let v: Vec<f64> = (0..cw * ch)
            .map(|i| {
                let yy = (i / cw) as f64;
                (((0.5 + 0.06 * ((yy - tt) * 0.04).cos()) * 255.0).round() / 255.0).clamp(0.0, 1.0)
            })
            .collect();
        Frame::yuv420(w, h, y, u, v).unwrap()
    };
    VideoSequence::new(name, fps.0, fps.1, (0..frames).map(mk).collect()).unwrap()
}
