//! PNG input/output for the still-image corpus.
//!
//! Supports 8-bit grayscale and RGB, non-interlaced; everything else is a
//! declared limit and reported as an unsupported-format error. Round trips
//! are bit-exact at the 8-bit sample level.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{Frame, Plane};

/// Read an 8-bit gray or RGB PNG into a frame.
pub fn read_png(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| Error::Png {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;

    let info = reader.info();
    if info.interlaced {
        return Err(Error::UnsupportedFormat(format!(
            "{}: interlaced PNG is not supported",
            path.display()
        )));
    }
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!(
            "{}: only 8-bit PNG is supported (got {:?})",
            path.display(),
            info.bit_depth
        )));
    }
    let color = info.color_type;
    if !matches!(color, png::ColorType::Grayscale | png::ColorType::Rgb) {
        return Err(Error::UnsupportedFormat(format!(
            "{}: only grayscale and RGB PNG are supported (got {:?})",
            path.display(),
            color
        )));
    }
    let (width, height) = (info.width as usize, info.height as usize);

    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    reader.next_frame(&mut buf).map_err(|e| Error::Png {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;

    match color {
        png::ColorType::Grayscale => {
            let plane = Plane::from_u8(width, height, &buf[..width * height])?;
            Frame::gray(width, height, plane.data)
        }
        png::ColorType::Rgb => {
            let n = width * height;
            let mut r = Vec::with_capacity(n);
            let mut g = Vec::with_capacity(n);
            let mut b = Vec::with_capacity(n);
            for px in buf[..n * 3].chunks_exact(3) {
                r.push(crate::frame::u8_to_norm(px[0]));
                g.push(crate::frame::u8_to_norm(px[1]));
                b.push(crate::frame::u8_to_norm(px[2]));
            }
            Frame::rgb(width, height, [r, g, b])
        }
        _ => unreachable!(),
    }
}

/// Write a gray or RGB frame as an 8-bit non-interlaced PNG.
pub fn write_png(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (color, data) = match frame.format() {
        crate::frame::PixelFormat::Gray => (png::ColorType::Grayscale, frame.plane(0).to_u8()),
        crate::frame::PixelFormat::Rgb => {
            let r = frame.plane(0).to_u8();
            let g = frame.plane(1).to_u8();
            let b = frame.plane(2).to_u8();
            let mut data = Vec::with_capacity(r.len() * 3);
            for i in 0..r.len() {
                data.extend_from_slice(&[r[i], g[i], b[i]]);
            }
            (png::ColorType::Rgb, data)
        }
        crate::frame::PixelFormat::Yuv420 => {
            return Err(Error::Contract(
                "PNG output supports gray and RGB frames; convert YUV with to_luma first".into(),
            ))
        }
    };

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        frame.width() as u32,
        frame.height() as u32,
    );
    encoder.set_color(color);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| Error::Png {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    writer.write_image_data(&data).map_err(|e| Error::Png {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    Ok(())
}
