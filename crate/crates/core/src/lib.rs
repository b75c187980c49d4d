//! Rate-perception preprocessing math for video coding, plus the
//! evaluation harness around it.
//!
//! The crate has two halves:
//!
//! - deterministic, oracle-tested components: block DCT machinery with an
//!   adaptive high-frequency loss, its frozen-selection gradient and the
//!   derived coefficient filter ([`dct`]); a seeded degradation model
//!   ([`degrade`]); PSNR/SSIM/MS-SSIM and the combined training-style
//!   losses ([`metrics`]); Y4M/PNG I/O ([`y4m`], [`png_io`]);
//! - a codec evaluation harness ([`rd`]) that drives external encoders
//!   through command templates, sweeps QP, assembles RD curves, and
//!   computes BD-rate, with optional external VMAF scoring ([`vmaf`]).

pub mod dct;
pub mod degrade;
pub mod error;
pub mod frame;
pub mod metrics;
pub mod png_io;
pub mod rd;
pub mod vmaf;
pub mod y4m;

pub use error::{Error, Result};
pub use frame::{to_luma, to_luma_with, Frame, LumaWeights, PixelFormat, Plane, VideoSequence};
