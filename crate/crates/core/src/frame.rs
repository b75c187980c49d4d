//! Planar frame and sequence types.
//!
//! Samples are held in double precision, normalized to `[0,1]`. Quantization
//! to 8 bits happens only at file boundaries (round half away from zero),
//! so `v -> v/255 -> round(v*255)` is the identity for every 8-bit value.
//! Frames are immutable plain data and safe to share across threads.

use crate::error::{Error, Result};

/// Pixel layout of a [`Frame`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelFormat {
    /// Single luma plane.
    Gray,
    /// Y + half-size Cb/Cr planes (8-bit 4:2:0 at I/O boundaries).
    Yuv420,
    /// Three full-size planes in R, G, B order.
    Rgb,
}

/// One 2-D sample array, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Contract(format!(
                "plane data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("plane contains non-finite samples".into()));
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height {
            return Err(Error::Contract(format!(
                "byte length {} does not match {}x{}",
                bytes.len(),
                width,
                height
            )));
        }
        Ok(Plane {
            width,
            height,
            data: bytes.iter().map(|&b| u8_to_norm(b)).collect(),
        })
    }

    /// Quantize to 8 bits, round half away from zero, clamped.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| norm_to_u8(v)).collect()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Clamp-to-edge sampling; any (x, y) is valid.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }
}

#[inline]
pub fn u8_to_norm(v: u8) -> f64 {
    f64::from(v) / 255.0
}

#[inline]
pub fn norm_to_u8(v: f64) -> u8 {
    // f64::round is round-half-away-from-zero.
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Planar image with normalized samples. See module docs for conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    format: PixelFormat,
    planes: Vec<Plane>,
}

impl Frame {
    /// Single-plane grayscale frame from normalized samples.
    pub fn gray(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let plane = Plane::new(width, height, data)?;
        check_unit_range(&plane)?;
        Ok(Frame {
            width,
            height,
            format: PixelFormat::Gray,
            planes: vec![plane],
        })
    }

    /// RGB frame from three full-size normalized planes.
    pub fn rgb(width: usize, height: usize, planes: [Vec<f64>; 3]) -> Result<Self> {
        let planes: Vec<Plane> = planes
            .into_iter()
            .map(|p| Plane::new(width, height, p))
            .collect::<Result<_>>()?;
        for p in &planes {
            check_unit_range(p)?;
        }
        Ok(Frame {
            width,
            height,
            format: PixelFormat::Rgb,
            planes,
        })
    }

    /// YUV 4:2:0 frame. Luma dimensions must be even; chroma planes are
    /// exactly half-size.
    pub fn yuv420(
        width: usize,
        height: usize,
        y: Vec<f64>,
        u: Vec<f64>,
        v: Vec<f64>,
    ) -> Result<Self> {
        if !width.is_multiple_of(2) || !height.is_multiple_of(2) {
            return Err(Error::Contract(format!(
                "yuv420 requires even luma dimensions, got {}x{}",
                width, height
            )));
        }
        let (cw, ch) = (width / 2, height / 2);
        let planes = vec![
            Plane::new(width, height, y)?,
            Plane::new(cw, ch, u)?,
            Plane::new(cw, ch, v)?,
        ];
        for p in &planes {
            check_unit_range(p)?;
        }
        Ok(Frame {
            width,
            height,
            format: PixelFormat::Yuv420,
            planes,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Frame {
            width,
            height,
            format: PixelFormat::Gray,
            planes: vec![Plane::constant(width, height, value)],
        }
    }

    /// Build a gray frame from an arbitrary plane, clamping into `[0,1]`.
    pub fn gray_clamped(plane: Plane) -> Self {
        let mut plane = plane;
        plane.clamp_unit();
        Frame {
            width: plane.width,
            height: plane.height,
            format: PixelFormat::Gray,
            planes: vec![plane],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn format(&self) -> PixelFormat {
        self.format
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    /// First plane; for YUV and gray frames this is the luma plane.
    pub fn plane(&self, i: usize) -> &Plane {
        &self.planes[i]
    }

    /// Replace plane `i`, keeping dimensions. Samples are clamped to `[0,1]`.
    pub fn with_plane(&self, i: usize, mut plane: Plane) -> Result<Self> {
        let old = &self.planes[i];
        if plane.width != old.width || plane.height != old.height {
            return Err(Error::Contract(format!(
                "replacement plane {}x{} does not match {}x{}",
                plane.width, plane.height, old.width, old.height
            )));
        }
        plane.clamp_unit();
        let mut f = self.clone();
        f.planes[i] = plane;
        Ok(f)
    }

    pub fn same_dims(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height && self.format == other.format
    }

    /// Exact sample equality (bitwise on every plane).
    pub fn samples_equal(&self, other: &Frame) -> bool {
        self.same_dims(other)
            && self.planes.iter().zip(&other.planes).all(|(a, b)| {
                a.data
                    .iter()
                    .zip(&b.data)
                    .all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}

fn check_unit_range(plane: &Plane) -> Result<()> {
    if plane.data.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::Contract(
            "samples outside [0,1]; clamp before constructing a frame".into(),
        ));
    }
    Ok(())
}

/// Luma conversion weights for RGB input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LumaWeights {
    /// BT.709 (0.2126, 0.7152, 0.0722) — default, HD-centric.
    #[default]
    Bt709,
    /// BT.601 (0.299, 0.587, 0.114).
    Bt601,
}

impl LumaWeights {
    pub fn coefficients(self) -> (f64, f64, f64) {
        match self {
            LumaWeights::Bt709 => (0.2126, 0.7152, 0.0722),
            LumaWeights::Bt601 => (0.299, 0.587, 0.114),
        }
    }
}

/// Reduce any frame to its luma plane (BT.709 weights for RGB).
///
/// YUV input returns the Y plane bit-identical; gray input is cloned.
pub fn to_luma(frame: &Frame) -> Frame {
    to_luma_with(frame, LumaWeights::Bt709)
}

pub fn to_luma_with(frame: &Frame, weights: LumaWeights) -> Frame {
    match frame.format() {
        PixelFormat::Gray => frame.clone(),
        PixelFormat::Yuv420 => Frame {
            width: frame.width,
            height: frame.height,
            format: PixelFormat::Gray,
            planes: vec![frame.planes[0].clone()],
        },
        PixelFormat::Rgb => {
            let (wr, wg, wb) = weights.coefficients();
            let r = &frame.planes[0].data;
            let g = &frame.planes[1].data;
            let b = &frame.planes[2].data;
            let data: Vec<f64> = r
                .iter()
                .zip(g.iter())
                .zip(b.iter())
                .map(|((&r, &g), &b)| (wr * r + wg * g + wb * b).clamp(0.0, 1.0))
                .collect();
            Frame {
                width: frame.width,
                height: frame.height,
                format: PixelFormat::Gray,
                planes: vec![Plane {
                    width: frame.width,
                    height: frame.height,
                    data,
                }],
            }
        }
    }
}

/// Ordered frames sharing dimensions and format, plus the frame rate as
/// an exact rational so Y4M headers round-trip.
#[derive(Debug, Clone)]
pub struct VideoSequence {
    pub name: String,
    pub fps_num: u32,
    pub fps_den: u32,
    frames: Vec<Frame>,
}

impl VideoSequence {
    pub fn new(
        name: impl Into<String>,
        fps_num: u32,
        fps_den: u32,
        frames: Vec<Frame>,
    ) -> Result<Self> {
        if fps_num == 0 || fps_den == 0 {
            return Err(Error::Contract("frame rate must be positive".into()));
        }
        if let Some(first) = frames.first() {
            if frames.iter().any(|f| !f.same_dims(first)) {
                return Err(Error::Contract(
                    "all frames in a sequence must share dimensions and format".into(),
                ));
            }
        }
        Ok(VideoSequence {
            name: name.into(),
            fps_num,
            fps_den,
            frames,
        })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame_rate(&self) -> f64 {
        f64::from(self.fps_num) / f64::from(self.fps_den)
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn width(&self) -> usize {
        self.frames.first().map_or(0, |f| f.width())
    }

    pub fn height(&self) -> usize {
        self.frames.first().map_or(0, |f| f.height())
    }

    /// Apply a per-frame transform, keeping name and rate.
    pub fn map_frames(&self, f: impl Fn(&Frame) -> Result<Frame> + Sync) -> Result<VideoSequence> {
        use rayon::prelude::*;
        let frames: Vec<Frame> = self.frames.par_iter().map(&f).collect::<Result<_>>()?;
        VideoSequence::new(self.name.clone(), self.fps_num, self.fps_den, frames)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_roundtrip_all_256_values() {
        for v in 0..=255u8 {
            assert_eq!(norm_to_u8(u8_to_norm(v)), v);
        }
    }

    #[test]
    fn white_rgb_to_luma_is_one() {
        let f = Frame::rgb(4, 4, [vec![1.0; 16], vec![1.0; 16], vec![1.0; 16]]).unwrap();
        let l = to_luma(&f);
        assert!(l.plane(0).data.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn pure_green_uses_bt709_weight() {
        let f = Frame::rgb(2, 2, [vec![0.0; 4], vec![1.0; 4], vec![0.0; 4]]).unwrap();
        let l = to_luma(&f);
        assert!(l.plane(0).data.iter().all(|&v| (v - 0.7152).abs() < 1e-12));
        let l601 = to_luma_with(&f, LumaWeights::Bt601);
        assert!(l601
            .plane(0)
            .data
            .iter()
            .all(|&v| (v - 0.587).abs() < 1e-12));
    }

    #[test]
    fn yuv_luma_is_bit_identical() {
        let y: Vec<f64> = (0..16).map(|i| i as f64 / 255.0).collect();
        let f = Frame::yuv420(4, 4, y.clone(), vec![0.5; 4], vec![0.5; 4]).unwrap();
        let l = to_luma(&f);
        assert!(l
            .plane(0)
            .data
            .iter()
            .zip(&y)
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn yuv420_rejects_odd_dims() {
        assert!(Frame::yuv420(3, 4, vec![0.0; 12], vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn sequence_rejects_mixed_dims() {
        let a = Frame::constant(4, 4, 0.0);
        let b = Frame::constant(8, 8, 0.0);
        assert!(VideoSequence::new("s", 25, 1, vec![a, b]).is_err());
    }
}
