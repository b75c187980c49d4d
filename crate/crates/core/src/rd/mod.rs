//! Rate-distortion evaluation harness: alpha-blended preprocessing,
//! external-encoder QP sweeps, RD-curve assembly, BD-rate, and reports.

mod bdrate;
mod encode;
mod report;
mod sweep;

pub use bdrate::{bd_rate, BdInterpolation, BdRateResult, RateInterpolant};
pub use encode::{encode_decode, resolve_executable, EncodeOutcome, EncoderProfile, SourceMeta};
pub use report::{emit_plot, emit_report, read_csv, write_csv, write_summary};
pub use sweep::{sweep, Preprocessor, SweepOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::metrics::MetricReport;

/// Preprocessing intensity for the convex blend
/// `f_p = alpha * f_o + (1 - alpha) * f_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlendConfig {
    alpha: f64,
}

impl Default for BlendConfig {
    fn default() -> Self {
        BlendConfig { alpha: 0.5 }
    }
}

impl BlendConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha {alpha} outside [0,1]")));
        }
        Ok(BlendConfig { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Per-sample convex blend of the processed frame `f_o` with the original
/// `f_i`, clamped to `[0,1]`. The endpoints are bit-exact passthroughs.
pub fn alpha_blend(f_o: &Frame, f_i: &Frame, cfg: &BlendConfig) -> Result<Frame> {
    if !f_o.same_dims(f_i) {
        return Err(Error::Contract(format!(
            "blend inputs differ: {}x{} vs {}x{}",
            f_o.width(),
            f_o.height(),
            f_i.width(),
            f_i.height()
        )));
    }
    if cfg.alpha == 0.0 {
        return Ok(f_i.clone());
    }
    if cfg.alpha == 1.0 {
        return Ok(f_o.clone());
    }
    let a = cfg.alpha;
    let mut out = f_o.clone();
    for i in 0..f_o.planes().len() {
        let blended: Vec<f64> = f_o
            .plane(i)
            .data
            .iter()
            .zip(&f_i.plane(i).data)
            .map(|(&o, &x)| (a * o + (1.0 - a) * x).clamp(0.0, 1.0))
            .collect();
        out = out.with_plane(
            i,
            crate::frame::Plane {
                width: f_o.plane(i).width,
                height: f_o.plane(i).height,
                data: blended,
            },
        )?;
    }
    Ok(out)
}

/// One rate-quality measurement: decoded-vs-original scores at one QP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    pub qp: u32,
    pub bitrate_kbps: f64,
    pub metrics: MetricReport,
}

/// Rate-distortion curve for one (sequence, profile, preprocessing label),
/// points ordered by QP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdCurve {
    pub sequence: String,
    pub codec: String,
    pub preset: String,
    /// Preprocessing label; "none" for the baseline.
    pub label: String,
    pub points: Vec<RdPoint>,
}

impl RdCurve {
    /// BD-rate preconditions: at least four points, positive bitrate
    /// strictly decreasing in QP.
    pub fn validate_for_bd(&self) -> Result<()> {
        if self.points.len() < 4 {
            return Err(Error::Data(format!(
                "curve {}/{}/{} has {} points; BD-rate needs at least 4",
                self.sequence,
                self.codec,
                self.label,
                self.points.len()
            )));
        }
        let mut offending = Vec::new();
        for pair in self.points.windows(2) {
            if pair[1].qp <= pair[0].qp {
                offending.push(format!("qp {} -> {}", pair[0].qp, pair[1].qp));
            }
            if pair[1].bitrate_kbps >= pair[0].bitrate_kbps {
                offending.push(format!(
                    "bitrate {:.3} at qp {} -> {:.3} at qp {}",
                    pair[0].bitrate_kbps, pair[0].qp, pair[1].bitrate_kbps, pair[1].qp
                ));
            }
        }
        if self
            .points
            .iter()
            .any(|p| !p.bitrate_kbps.is_finite() || p.bitrate_kbps <= 0.0)
        {
            offending.push("non-positive bitrate".into());
        }
        if !offending.is_empty() {
            return Err(Error::Data(format!(
                "curve {}/{}/{} is not strictly rate-decreasing in qp: {}",
                self.sequence,
                self.codec,
                self.label,
                offending.join("; ")
            )));
        }
        Ok(())
    }
}

/// Metric selector for BD-rate and plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Psnr,
    Ssim,
    MsSsim,
    Vmaf,
}

impl MetricKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "psnr" => Ok(MetricKind::Psnr),
            "ssim" => Ok(MetricKind::Ssim),
            "msssim" | "ms_ssim" | "ms-ssim" => Ok(MetricKind::MsSsim),
            "vmaf" => Ok(MetricKind::Vmaf),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Psnr => "psnr",
            MetricKind::Ssim => "ssim",
            MetricKind::MsSsim => "msssim",
            MetricKind::Vmaf => "vmaf",
        }
    }

    pub fn extract(&self, report: &MetricReport) -> Option<f64> {
        match self {
            MetricKind::Psnr => Some(report.psnr),
            MetricKind::Ssim => report.ssim,
            MetricKind::MsSsim => report.ms_ssim,
            MetricKind::Vmaf => report.vmaf,
        }
    }
}
