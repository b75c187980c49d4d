//! YUV4MPEG2 (Y4M) reader and writer, 8-bit 4:2:0 only.
//!
//! Round trips are bit-exact at the 8-bit sample level. The writer emits a
//! canonical header (`YUV4MPEG2 W.. H.. F..:.. Ip A1:1 C420`); the reader
//! accepts any C420 variant (jpeg/mpeg2/paldv differ only in chroma siting)
//! and ignores unknown X parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{Frame, VideoSequence};

const MAGIC: &str = "YUV4MPEG2";

/// Read a Y4M file into a sequence. The sequence name is the file stem.
pub fn read_y4m(path: impl AsRef<Path>) -> Result<VideoSequence> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".to_string());
    read_y4m_from(&mut reader, &name)
}

/// Read a Y4M stream from any reader.
pub fn read_y4m_from(reader: &mut impl Read, name: &str) -> Result<VideoSequence> {
    let header = read_line(reader)?;
    let mut tokens = header.split(' ').filter(|t| !t.is_empty());
    match tokens.next() {
        Some(MAGIC) => {}
        Some(other) => {
            return Err(Error::Y4mParse(format!(
                "expected {MAGIC} signature, found {other:?}"
            )))
        }
        None => return Err(Error::Y4mParse("empty stream header".into())),
    }

    let mut width: Option<usize> = None;
    let mut height: Option<usize> = None;
    let mut fps: Option<(u32, u32)> = None;
    for token in tokens {
        let (tag, value) = token.split_at(1);
        match tag {
            "W" => width = Some(parse_number(token, value)?),
            "H" => height = Some(parse_number(token, value)?),
            "F" => fps = Some(parse_ratio(token, value)?),
            "I" | "A" | "X" => {} // interlacing, aspect, extensions: accepted, unused
            "C" => {
                if !value.starts_with("420") {
                    return Err(Error::UnsupportedFormat(format!(
                        "chroma subsampling {token:?}; only 8-bit C420 is supported"
                    )));
                }
                if value.contains("p10") || value.contains("p12") || value.contains("p16") {
                    return Err(Error::UnsupportedFormat(format!(
                        "bit depth in {token:?}; only 8-bit C420 is supported"
                    )));
                }
            }
            _ => {
                return Err(Error::Y4mParse(format!(
                    "unrecognized header token {token:?}"
                )))
            }
        }
    }

    let width = width.ok_or_else(|| Error::Y4mParse("missing W token in header".into()))?;
    let height = height.ok_or_else(|| Error::Y4mParse("missing H token in header".into()))?;
    let (fps_num, fps_den) =
        fps.ok_or_else(|| Error::Y4mParse("missing F token in header".into()))?;
    if width == 0 || height == 0 {
        return Err(Error::Y4mParse(format!(
            "degenerate dimensions {width}x{height}"
        )));
    }
    if width % 2 != 0 || height % 2 != 0 {
        return Err(Error::UnsupportedFormat(format!(
            "odd dimensions {width}x{height} are not representable in 4:2:0"
        )));
    }

    let y_len = width * height;
    let c_len = (width / 2) * (height / 2);
    let mut frames = Vec::new();
    loop {
        let mut marker = Vec::new();
        match read_line_opt(reader, &mut marker)? {
            None => break, // clean EOF between frames
            Some(line) => {
                if line != "FRAME" && !line.starts_with("FRAME ") {
                    return Err(Error::Y4mParse(format!(
                        "expected FRAME marker, found {line:?}"
                    )));
                }
            }
        }
        let mut payload = vec![0u8; y_len + 2 * c_len];
        reader.read_exact(&mut payload).map_err(|_| {
            Error::Y4mParse(format!(
                "truncated payload in frame {} (expected {} bytes)",
                frames.len(),
                y_len + 2 * c_len
            ))
        })?;
        let y = payload[..y_len].to_vec();
        let u = payload[y_len..y_len + c_len].to_vec();
        let v = payload[y_len + c_len..].to_vec();
        frames.push(Frame::yuv420(
            width,
            height,
            y.iter().map(|&b| crate::frame::u8_to_norm(b)).collect(),
            u.iter().map(|&b| crate::frame::u8_to_norm(b)).collect(),
            v.iter().map(|&b| crate::frame::u8_to_norm(b)).collect(),
        )?);
    }

    VideoSequence::new(name, fps_num, fps_den, frames)
}

/// Write a YUV420 sequence as Y4M. Errors on empty or non-4:2:0 input.
pub fn write_y4m(seq: &VideoSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    write_y4m_to(seq, &mut writer).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn write_y4m_to(seq: &VideoSequence, writer: &mut impl Write) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::Contract("cannot write an empty sequence".into()));
    }
    let first = &seq.frames()[0];
    if first.format() != crate::frame::PixelFormat::Yuv420 {
        return Err(Error::Contract("y4m output requires YUV420 frames".into()));
    }
    let io = |e| Error::io("<writer>", e);
    writeln!(
        writer,
        "{MAGIC} W{} H{} F{}:{} Ip A1:1 C420",
        first.width(),
        first.height(),
        seq.fps_num,
        seq.fps_den
    )
    .map_err(io)?;
    for frame in seq.frames() {
        writer.write_all(b"FRAME\n").map_err(io)?;
        for plane in frame.planes() {
            writer.write_all(&plane.to_u8()).map_err(io)?;
        }
    }
    writer.flush().map_err(io)?;
    Ok(())
}

fn read_line(reader: &mut impl Read) -> Result<String> {
    let mut buf = Vec::new();
    match read_line_opt(reader, &mut buf)? {
        Some(line) => Ok(line),
        None => Err(Error::Y4mParse("unexpected end of stream".into())),
    }
}

/// Read bytes up to a newline. Returns None on immediate EOF.
fn read_line_opt(reader: &mut impl Read, buf: &mut Vec<u8>) -> Result<Option<String>> {
    buf.clear();
    let mut byte = [0u8; 1];
    loop {
        match reader.read(&mut byte) {
            Ok(0) => {
                if buf.is_empty() {
                    return Ok(None);
                }
                return Err(Error::Y4mParse("stream ended inside a header line".into()));
            }
            Ok(_) => {
                if byte[0] == b'\n' {
                    return String::from_utf8(std::mem::take(buf))
                        .map(Some)
                        .map_err(|_| Error::Y4mParse("non-utf8 header line".into()));
                }
                if buf.len() > 4096 {
                    return Err(Error::Y4mParse("header line exceeds 4096 bytes".into()));
                }
                buf.push(byte[0]);
            }
            Err(e) => return Err(Error::io("<reader>", e)),
        }
    }
}

fn parse_number(token: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Y4mParse(format!("malformed numeric token {token:?}")))
}

fn parse_ratio(token: &str, value: &str) -> Result<(u32, u32)> {
    let (num, den) = value
        .split_once(':')
        .ok_or_else(|| Error::Y4mParse(format!("malformed ratio token {token:?}")))?;
    let num = num
        .parse()
        .map_err(|_| Error::Y4mParse(format!("malformed ratio token {token:?}")))?;
    let den = den
        .parse()
        .map_err(|_| Error::Y4mParse(format!("malformed ratio token {token:?}")))?;
    if num == 0 || den == 0 {
        return Err(Error::Y4mParse(format!("zero in ratio token {token:?}")));
    }
    Ok((num, den))
}
