//! External encoder/decoder invocation through command templates.
//!
//! Templates are whitespace-split argument lists with `{input}`,
//! `{output}`, `{qp}`, `{preset}`, and `{fps}` placeholders (`{fps}` is
//! "num/den", mainly for decoders of raw bitstreams that carry no timing).
//! The executable (first token) is resolved against the directories in
//! `VPREP_ENCODER_PATH`, then `PATH`.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::VideoSequence;
use crate::y4m;

const KNOWN_PLACEHOLDERS: &[&str] = &["input", "output", "qp", "preset", "fps"];

/// Command templates and QP list for one external encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderProfile {
    /// Codec name, e.g. "h264".
    pub name: String,
    /// Encode template; needs {input}, {output}, {qp}.
    pub command_template: String,
    /// Decode (reconstruction) template; needs {input}, {output}.
    pub decode_template: String,
    pub preset: String,
    /// Strictly increasing; at least 4 entries for BD-rate use.
    pub qp_list: Vec<u32>,
}

impl EncoderProfile {
    pub fn validate(&self) -> Result<()> {
        for (what, template, required) in [
            (
                "command_template",
                &self.command_template,
                &["input", "output", "qp"][..],
            ),
            (
                "decode_template",
                &self.decode_template,
                &["input", "output"][..],
            ),
        ] {
            for name in required {
                if !template.contains(&format!("{{{name}}}")) {
                    return Err(Error::Config(format!(
                        "profile {}: {what} is missing the {{{name}}} placeholder",
                        self.name
                    )));
                }
            }
            for placeholder in find_placeholders(template) {
                if !KNOWN_PLACEHOLDERS.contains(&placeholder.as_str()) {
                    return Err(Error::Config(format!(
                        "profile {}: unknown placeholder {{{placeholder}}} in {what}",
                        self.name
                    )));
                }
            }
        }
        if self.qp_list.len() < 4 {
            return Err(Error::Config(format!(
                "profile {}: qp list has {} entries; at least 4 are required",
                self.name,
                self.qp_list.len()
            )));
        }
        if self.qp_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "profile {}: qp list must be strictly increasing",
                self.name
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let profile: EncoderProfile =
            toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text =
            std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_toml()?).map_err(|e| Error::io(path.as_ref(), e))
    }

    /// Built-in profiles for common encoders. `x264`/`x265` target the
    /// reference CLIs with ffmpeg reconstruction; `openh264` targets the
    /// bundled vprep-oh264 helper.
    pub fn builtin(name: &str) -> Option<EncoderProfile> {
        let qp_list = vec![22, 27, 32, 37];
        match name {
            "x264" => Some(EncoderProfile {
                name: "h264".into(),
                command_template:
                    "x264 --qp {qp} --preset {preset} --output {output} {input}".into(),
                decode_template:
                    "ffmpeg -y -loglevel error -framerate {fps} -i {input} {output}".into(),
                preset: "veryfast".into(),
                qp_list: qp_list.clone(),
            }),
            "x265" => Some(EncoderProfile {
                name: "h265".into(),
                command_template:
                    "x265 --input {input} --qp {qp} --preset {preset} --output {output}".into(),
                decode_template:
                    "ffmpeg -y -loglevel error -framerate {fps} -i {input} {output}".into(),
                preset: "veryfast".into(),
                qp_list: qp_list.clone(),
            }),
            "openh264" => Some(EncoderProfile {
                name: "h264".into(),
                command_template:
                    "vprep-oh264 encode --input {input} --output {output} --qp {qp} --preset {preset}"
                        .into(),
                decode_template:
                    "vprep-oh264 decode --input {input} --output {output} --fps {fps}".into(),
                preset: "veryfast".into(),
                qp_list,
            }),
            _ => None,
        }
    }

    /// Resolve `name` as a builtin, else as a TOML profile path.
    pub fn resolve(name: &str) -> Result<EncoderProfile> {
        if let Some(profile) = Self::builtin(name) {
            return Ok(profile);
        }
        let path = Path::new(name);
        if path.exists() {
            return Self::load(path);
        }
        Err(Error::Config(format!(
            "unknown profile {name:?}: not a builtin (x264, x265, openh264) and not a file"
        )))
    }

    /// The executable this profile's encode template invokes.
    pub fn encoder_executable(&self) -> Option<String> {
        self.command_template
            .split_whitespace()
            .next()
            .map(str::to_string)
    }

    /// True when both the encode and decode executables resolve.
    pub fn is_available(&self) -> bool {
        let ok = |template: &str| {
            template
                .split_whitespace()
                .next()
                .map(resolve_executable)
                .map(|r| r.is_ok())
                .unwrap_or(false)
        };
        ok(&self.command_template) && ok(&self.decode_template)
    }
}

fn find_placeholders(template: &str) -> Vec<String> {
    let mut found = Vec::new();
    let bytes = template.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(end) = template[i + 1..].find('}') {
                found.push(template[i + 1..i + 1 + end].to_string());
                i += end + 2;
                continue;
            }
        }
        i += 1;
    }
    found
}

/// Expand a template into an argument vector. Errors on any placeholder
/// left unfilled, naming it.
fn fill_template(template: &str, vars: &[(&str, &str)]) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for token in template.split_whitespace() {
        let mut arg = token.to_string();
        for (key, value) in vars {
            arg = arg.replace(&format!("{{{key}}}"), value);
        }
        if let Some(start) = arg.find('{') {
            if let Some(len) = arg[start..].find('}') {
                return Err(Error::Config(format!(
                    "unfilled placeholder {} in template",
                    &arg[start..=start + len]
                )));
            }
        }
        args.push(arg);
    }
    if args.is_empty() {
        return Err(Error::Config("empty command template".into()));
    }
    Ok(args)
}

/// Locate an executable: explicit paths are used as-is, bare names are
/// searched in `VPREP_ENCODER_PATH` then `PATH`.
pub fn resolve_executable(name: &str) -> Result<PathBuf> {
    if name.contains('/') {
        let path = PathBuf::from(name);
        if path.is_file() {
            return Ok(path);
        }
        return Err(Error::ExecutableNotFound {
            name: name.into(),
            searched: path.display().to_string(),
        });
    }
    let mut searched = Vec::new();
    let mut dirs: Vec<PathBuf> = Vec::new();
    if let Ok(extra) = std::env::var("VPREP_ENCODER_PATH") {
        dirs.extend(std::env::split_paths(&extra));
    }
    if let Some(path) = std::env::var_os("PATH") {
        dirs.extend(std::env::split_paths(&path));
    }
    for dir in dirs {
        let candidate = dir.join(name);
        if candidate.is_file() {
            return Ok(candidate);
        }
        searched.push(dir.display().to_string());
    }
    Err(Error::ExecutableNotFound {
        name: name.into(),
        searched: searched.join(":"),
    })
}

fn run_command(args: &[String], what: &str) -> Result<()> {
    let exe = resolve_executable(&args[0])?;
    let output = Command::new(&exe)
        .args(&args[1..])
        .output()
        .map_err(|e| Error::io(&exe, e))?;
    if !output.status.success() {
        let mut stderr = String::from_utf8_lossy(&output.stderr).into_owned();
        if stderr.len() > 2000 {
            stderr = format!("...{}", &stderr[stderr.len() - 2000..]);
        }
        return Err(Error::Subprocess {
            name: format!("{what} ({})", args.join(" ")),
            status: output.status.to_string(),
            stderr,
        });
    }
    Ok(())
}

/// Result of one encode + reconstruction round trip.
#[derive(Debug)]
pub struct EncodeOutcome {
    pub bitstream_bytes: u64,
    pub bitstream_path: PathBuf,
    pub decoded_path: PathBuf,
    pub decoded: VideoSequence,
}

impl EncodeOutcome {
    /// `8 * bytes * frame_rate / (1000 * frames)` in kilobits/second.
    pub fn bitrate_kbps(&self, fps_num: u32, fps_den: u32, frames: usize) -> f64 {
        8.0 * self.bitstream_bytes as f64 * (f64::from(fps_num) / f64::from(fps_den))
            / (1000.0 * frames as f64)
    }
}

/// Source geometry the reconstruction must reproduce.
#[derive(Debug, Clone, Copy)]
pub struct SourceMeta {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub fps: (u32, u32),
}

impl SourceMeta {
    pub fn of(seq: &VideoSequence) -> Self {
        SourceMeta {
            frames: seq.len(),
            width: seq.width(),
            height: seq.height(),
            fps: (seq.fps_num, seq.fps_den),
        }
    }
}

/// Encode a sequence at one QP and decode the bitstream back, verifying
/// the reconstruction matches the source geometry.
pub fn encode_decode(
    seq: &VideoSequence,
    profile: &EncoderProfile,
    qp: u32,
    workdir: &Path,
) -> Result<EncodeOutcome> {
    let input = workdir.join("encode_input.y4m");
    y4m::write_y4m(seq, &input)?;
    encode_decode_path(&input, SourceMeta::of(seq), profile, qp, workdir)
}

/// Same as [`encode_decode`], reusing an already-written Y4M input.
pub fn encode_decode_path(
    input: &Path,
    meta: SourceMeta,
    profile: &EncoderProfile,
    qp: u32,
    workdir: &Path,
) -> Result<EncodeOutcome> {
    profile.validate()?;
    let bitstream = workdir.join(format!("bitstream_qp{qp}.bin"));
    let decoded_path = workdir.join(format!("decoded_qp{qp}.y4m"));
    let qp_str = qp.to_string();
    let fps_str = format!("{}/{}", meta.fps.0, meta.fps.1);

    let encode_args = fill_template(
        &profile.command_template,
        &[
            ("input", &input.display().to_string()),
            ("output", &bitstream.display().to_string()),
            ("qp", &qp_str),
            ("preset", &profile.preset),
            ("fps", &fps_str),
        ],
    )?;
    run_command(&encode_args, "encoder")?;

    let bitstream_bytes = std::fs::metadata(&bitstream)
        .map_err(|e| Error::io(&bitstream, e))?
        .len();
    if bitstream_bytes == 0 {
        return Err(Error::Integrity(format!(
            "encoder produced an empty bitstream at qp {qp}"
        )));
    }

    let decode_args = fill_template(
        &profile.decode_template,
        &[
            ("input", &bitstream.display().to_string()),
            ("output", &decoded_path.display().to_string()),
            ("qp", &qp_str),
            ("preset", &profile.preset),
            ("fps", &fps_str),
        ],
    )?;
    run_command(&decode_args, "decoder")?;

    let decoded = y4m::read_y4m(&decoded_path)?;
    if decoded.len() != meta.frames {
        return Err(Error::Integrity(format!(
            "decoded {} frames, source has {}",
            decoded.len(),
            meta.frames
        )));
    }
    if decoded.width() != meta.width || decoded.height() != meta.height {
        return Err(Error::Integrity(format!(
            "decoded {}x{}, source is {}x{}",
            decoded.width(),
            decoded.height(),
            meta.width,
            meta.height
        )));
    }
    if u64::from(decoded.fps_num) * u64::from(meta.fps.1)
        != u64::from(meta.fps.0) * u64::from(decoded.fps_den)
    {
        return Err(Error::Integrity(format!(
            "decoded frame rate {}:{} does not match source {}:{}",
            decoded.fps_num, decoded.fps_den, meta.fps.0, meta.fps.1
        )));
    }
    Ok(EncodeOutcome {
        bitstream_bytes,
        bitstream_path: bitstream,
        decoded_path,
        decoded,
    })
}
