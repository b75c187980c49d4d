//! QP sweep: optional preprocessing, per-QP encode/decode, metrics
//! against the original source, RD-curve assembly.

use std::path::Path;

use rayon::prelude::*;

use crate::dct::{adaptive_dct_filter_frame, DctConfig};
use crate::error::{Error, Result};
use crate::frame::VideoSequence;
use crate::metrics::{metric_report, MetricReport, PlaneMode};
use crate::rd::{alpha_blend, BlendConfig, EncoderProfile, RdCurve, RdPoint};
use crate::vmaf::VmafScorer;
use crate::y4m;

/// Filter-plus-blend preprocessing applied to every frame before encoding.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub dct_configs: Vec<DctConfig>,
    pub strength: f64,
    pub blend: BlendConfig,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Preprocessor {
            dct_configs: DctConfig::default_pair(),
            strength: 1.0,
            blend: BlendConfig::default(),
        }
    }
}

impl Preprocessor {
    /// Human-readable curve label, e.g.
    /// `filter(n=8+16,strength=1.00)+blend(alpha=0.50)`.
    pub fn label(&self) -> String {
        let sizes: Vec<String> = self
            .dct_configs
            .iter()
            .map(|c| c.block_size().to_string())
            .collect();
        format!(
            "filter(n={},strength={:.2})+blend(alpha={:.2})",
            sizes.join("+"),
            self.strength,
            self.blend.alpha()
        )
    }

    /// Preprocess one sequence: filter each frame, then blend with the
    /// original.
    pub fn apply(&self, seq: &VideoSequence) -> Result<VideoSequence> {
        seq.map_frames(|frame| {
            let filtered = adaptive_dct_filter_frame(frame, &self.dct_configs, self.strength)?;
            alpha_blend(&filtered, frame, &self.blend)
        })
    }
}

/// Sweep knobs beyond the profile itself.
#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// External VMAF scorer; when set, every RD point carries a VMAF score.
    pub vmaf: Option<VmafScorer>,
    /// Score all planes (6:1:1 for YUV) instead of luma only.
    pub all_planes: bool,
}

/// Run a full QP sweep for one sequence and profile. Artifacts (encoder
/// input, bitstreams, reconstructions) are left in `workdir`.
///
/// Metrics are always computed against the original, unpreprocessed
/// source; preprocessing gains must show up as rate savings, not as
/// self-scored quality.
pub fn sweep(
    seq: &VideoSequence,
    profile: &EncoderProfile,
    preprocessor: Option<&Preprocessor>,
    workdir: &Path,
    options: &SweepOptions,
) -> Result<RdCurve> {
    profile.validate()?;
    if seq.is_empty() {
        return Err(Error::Contract("cannot sweep an empty sequence".into()));
    }
    std::fs::create_dir_all(workdir).map_err(|e| Error::io(workdir, e))?;

    let source_path = workdir.join("source.y4m");
    y4m::write_y4m(seq, &source_path)?;

    let (label, input_path) = match preprocessor {
        None => ("none".to_string(), source_path.clone()),
        Some(pre) => {
            let processed = pre.apply(seq)?;
            let path = workdir.join("preprocessed.y4m");
            y4m::write_y4m(&processed, &path)?;
            (pre.label(), path)
        }
    };

    let plane_mode = if options.all_planes {
        PlaneMode::All
    } else {
        PlaneMode::Luma
    };

    let mut points = Vec::with_capacity(profile.qp_list.len());
    for &qp in &profile.qp_list {
        let outcome = super::encode::encode_decode_path(
            &input_path,
            super::encode::SourceMeta::of(seq),
            profile,
            qp,
            workdir,
        )?;
        let mut metrics = mean_metrics(seq, &outcome.decoded, plane_mode)?;
        if let Some(scorer) = &options.vmaf {
            metrics.vmaf =
                Some(scorer.score_files(&source_path, &outcome.decoded_path, workdir)?);
        }
        points.push(RdPoint {
            qp,
            bitrate_kbps: outcome.bitrate_kbps(seq.fps_num, seq.fps_den, seq.len()),
            metrics,
        });
    }

    Ok(RdCurve {
        sequence: seq.name.clone(),
        codec: profile.name.clone(),
        preset: profile.preset.clone(),
        label,
        points,
    })
}

/// Frame-mean metric report of `decoded` against `source`. Optional
/// metrics stay present only when every frame produced them.
fn mean_metrics(
    source: &VideoSequence,
    decoded: &VideoSequence,
    mode: PlaneMode,
) -> Result<MetricReport> {
    let reports: Vec<MetricReport> = source
        .frames()
        .par_iter()
        .zip(decoded.frames().par_iter())
        .map(|(a, b)| metric_report(a, b, mode))
        .collect::<Result<_>>()?;
    let n = reports.len() as f64;
    let mean_opt = |get: fn(&MetricReport) -> Option<f64>| -> Option<f64> {
        let values: Vec<f64> = reports.iter().filter_map(get).collect();
        (values.len() == reports.len()).then(|| values.iter().sum::<f64>() / n)
    };
    Ok(MetricReport {
        psnr: reports.iter().map(|r| r.psnr).sum::<f64>() / n,
        ssim: mean_opt(|r| r.ssim),
        ms_ssim: mean_opt(|r| r.ms_ssim),
        vmaf: None,
    })
}
