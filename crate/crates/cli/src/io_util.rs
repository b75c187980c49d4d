//! Container detection by extension and uniform load/save for the
//! commands that accept either still images or video.

use std::path::Path;

use vprep::error::{Error, Result};
use vprep::frame::{Frame, VideoSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Png,
    Y4m,
}

pub struct LoadedFrames {
    pub kind: InputKind,
    pub frames: Vec<Frame>,
    /// Frame rate for Y4M inputs, carried through to outputs.
    pub fps: (u32, u32),
    pub name: String,
}

pub fn load_frames(path: &Path) -> Result<LoadedFrames> {
    match detect_kind(path)? {
        InputKind::Png => {
            let frame = vprep::png_io::read_png(path)?;
            Ok(LoadedFrames {
                kind: InputKind::Png,
                frames: vec![frame],
                fps: (25, 1),
                name: stem(path),
            })
        }
        InputKind::Y4m => {
            let seq = vprep::y4m::read_y4m(path)?;
            if seq.is_empty() {
                return Err(Error::Contract(format!(
                    "{} contains no frames",
                    path.display()
                )));
            }
            Ok(LoadedFrames {
                kind: InputKind::Y4m,
                fps: (seq.fps_num, seq.fps_den),
                name: seq.name.clone(),
                frames: seq.frames().to_vec(),
            })
        }
    }
}

pub fn save_frames(loaded: &LoadedFrames, path: &Path) -> Result<()> {
    match detect_kind(path)? {
        InputKind::Png => {
            if loaded.frames.len() != 1 {
                return Err(Error::Contract(
                    "PNG output can hold exactly one frame; use a .y4m output".into(),
                ));
            }
            vprep::png_io::write_png(&loaded.frames[0], path)
        }
        InputKind::Y4m => {
            let seq = VideoSequence::new(
                loaded.name.clone(),
                loaded.fps.0,
                loaded.fps.1,
                loaded.frames.clone(),
            )?;
            vprep::y4m::write_y4m(&seq, path)
        }
    }
}

fn detect_kind(path: &Path) -> Result<InputKind> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => Ok(InputKind::Png),
        Some("y4m") => Ok(InputKind::Y4m),
        other => Err(Error::Contract(format!(
            "{}: unsupported container {:?} (expected .png or .y4m)",
            path.display(),
            other.unwrap_or("none")
        ))),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "frame".into())
}
