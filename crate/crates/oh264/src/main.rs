//! Fixed-QP H.264 helper around the bundled openh264 encoder/decoder.
//!
//! Meant to be driven through vprep encoder-profile templates when no
//! system encoder is installed:
//!
//! ```text
//! vprep-oh264 encode --input in.y4m --output out.264 --qp 32 --preset veryfast
//! vprep-oh264 decode --input out.264 --output rec.y4m --fps 25/1
//! ```
//!
//! Fixed QP is enforced by clamping the rate-control quantizer range to
//! a single value with frame skipping disabled and a non-binding bitrate
//! target, so the bitstream size tracks content at equal QP.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use openh264::decoder::Decoder;
use openh264::encoder::{
    BitRate, Complexity, Encoder, EncoderConfig, FrameRate, QpRange, RateControlMode, UsageType,
};
use openh264::formats::{YUVBuffer, YUVSource};
use openh264::OpenH264API;

use vprep::frame::{Frame, VideoSequence};

#[derive(Parser)]
#[command(
    name = "vprep-oh264",
    version,
    about = "openh264-backed H.264 encode/decode helper"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a Y4M file to a raw Annex B H.264 bitstream at fixed QP
    Encode {
        /// Input .y4m (8-bit 4:2:0)
        #[arg(long)]
        input: PathBuf,
        /// Output raw .264 bitstream
        #[arg(long)]
        output: PathBuf,
        /// Quantization parameter, 0..=51
        #[arg(long)]
        qp: u8,
        /// Speed preset; x264-style names map onto openh264 complexity
        #[arg(long, default_value = "veryfast")]
        preset: String,
    },
    /// Decode a raw Annex B H.264 bitstream back to Y4M
    Decode {
        /// Input raw .264 bitstream
        #[arg(long)]
        input: PathBuf,
        /// Output .y4m
        #[arg(long)]
        output: PathBuf,
        /// Frame rate to stamp into the Y4M header ("num/den", "num:den", or "num")
        #[arg(long, default_value = "25/1")]
        fps: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Encode {
            input,
            output,
            qp,
            preset,
        } => encode(&input, &output, qp, &preset),
        Command::Decode { input, output, fps } => decode(&input, &output, &fps),
    }
}

fn complexity_for_preset(preset: &str) -> Complexity {
    match preset {
        "ultrafast" | "superfast" | "veryfast" | "faster" | "fast" => Complexity::Low,
        "medium" => Complexity::Medium,
        _ => Complexity::High,
    }
}

fn encode(input: &PathBuf, output: &PathBuf, qp: u8, preset: &str) -> Result<(), String> {
    if qp > 51 {
        return Err(format!("qp {qp} outside 0..=51"));
    }
    let seq = vprep::y4m::read_y4m(input).map_err(|e| e.to_string())?;
    if seq.is_empty() {
        return Err("input has no frames".into());
    }
    let (w, h) = (seq.width(), seq.height());

    let config = EncoderConfig::new()
        .usage_type(UsageType::CameraVideoRealTime)
        .rate_control_mode(RateControlMode::Quality)
        .qp(QpRange::new(qp, qp))
        .skip_frames(false)
        // Non-binding: QP is clamped to a single value, this only needs to
        // stay below the level's max spatial bitrate check.
        .bitrate(BitRate::from_bps(50_000_000))
        .max_frame_rate(FrameRate::from_hz(seq.frame_rate() as f32))
        .complexity(complexity_for_preset(preset))
        // Single-threaded keeps bitstreams reproducible run to run.
        .num_threads(1);
    let mut encoder = Encoder::with_api_config(OpenH264API::from_source(), config)
        .map_err(|e| format!("encoder init: {e}"))?;

    let mut bitstream = Vec::new();
    for frame in seq.frames() {
        let mut packed = vec![0u8; w * h + w * h / 2];
        pack_i420(frame, &mut packed);
        let buffer = YUVBuffer::from_vec(packed, w, h);
        let encoded = encoder
            .encode(&buffer)
            .map_err(|e| format!("encode: {e}"))?;
        encoded.write_vec(&mut bitstream);
    }
    std::fs::write(output, &bitstream).map_err(|e| format!("{}: {e}", output.display()))?;
    Ok(())
}

fn pack_i420(frame: &Frame, out: &mut [u8]) {
    let mut offset = 0;
    for plane in frame.planes() {
        for &v in &plane.data {
            out[offset] = (v * 255.0).round().clamp(0.0, 255.0) as u8;
            offset += 1;
        }
    }
}

fn decode(input: &PathBuf, output: &PathBuf, fps: &str) -> Result<(), String> {
    let (fps_num, fps_den) = parse_fps(fps)?;
    let bitstream = std::fs::read(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let mut decoder = Decoder::new().map_err(|e| format!("decoder init: {e}"))?;
    let mut frames = Vec::new();
    for nal in openh264::nal_units(&bitstream) {
        match decoder.decode(nal) {
            Ok(Some(yuv)) => frames.push(frame_from_decoded(&yuv)?),
            Ok(None) => {}
            Err(e) => return Err(format!("decode: {e}")),
        }
    }
    if frames.is_empty() {
        return Err("bitstream decoded to zero frames".into());
    }
    let seq = VideoSequence::new("decoded", fps_num, fps_den, frames).map_err(|e| e.to_string())?;
    vprep::y4m::write_y4m(&seq, output).map_err(|e| e.to_string())?;
    Ok(())
}

fn frame_from_decoded(yuv: &openh264::decoder::DecodedYUV<'_>) -> Result<Frame, String> {
    let (w, h) = yuv.dimensions();
    let (sy, su, sv) = yuv.strides();
    let (cw, ch) = (w / 2, h / 2);
    let depack = |data: &[u8], stride: usize, pw: usize, ph: usize| -> Vec<f64> {
        let mut out = Vec::with_capacity(pw * ph);
        for row in 0..ph {
            for col in 0..pw {
                out.push(f64::from(data[row * stride + col]) / 255.0);
            }
        }
        out
    };
    Frame::yuv420(
        w,
        h,
        depack(yuv.y(), sy, w, h),
        depack(yuv.u(), su, cw, ch),
        depack(yuv.v(), sv, cw, ch),
    )
    .map_err(|e| e.to_string())
}

fn parse_fps(text: &str) -> Result<(u32, u32), String> {
    let normalized = text.replace(':', "/");
    let (num, den) = match normalized.split_once('/') {
        Some((n, d)) => (n.trim().to_string(), d.trim().to_string()),
        None => (normalized.trim().to_string(), "1".to_string()),
    };
    let num: u32 = num.parse().map_err(|_| format!("bad fps {text:?}"))?;
    let den: u32 = den.parse().map_err(|_| format!("bad fps {text:?}"))?;
    if num == 0 || den == 0 {
        return Err(format!("bad fps {text:?}"));
    }
    Ok((num, den))
}
