//! Optional TOML config file. Values present here override the
//! corresponding command-line flags.
//!
//! ```toml
//! [vmaf]
//! template = "vmaf --reference {reference} --distorted {distorted} --output {output} --json"
//!
//! [encoders]
//! search_path = "/opt/encoders/bin"
//!
//! [dct]
//! block_sizes = [8, 16]
//! # s = 8
//! normalization = "orthonormal"   # or "paper-raw"
//! divisor = "full-block"          # or "masked-count"
//! reduction = "mean"              # or "sum"
//!
//! [degrade]
//! # any DegradeRanges field, e.g.:
//! orders = 2
//! jpeg_quality = [10, 95]
//! ```

use std::path::Path;

use serde::Deserialize;

use vprep::dct::{BlockReduction, DctConfig, Normalization, ThresholdDivisor};
use vprep::degrade::DegradeRanges;
use vprep::error::{Error, Result};
use vprep::vmaf::VmafScorer;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub vmaf: Option<VmafSection>,
    pub encoders: Option<EncoderSection>,
    pub dct: Option<DctSection>,
    pub degrade: Option<DegradeRanges>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VmafSection {
    pub template: Option<String>,
    pub executable: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderSection {
    /// Prepended to the encoder executable search path.
    pub search_path: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DctSection {
    pub block_sizes: Option<Vec<usize>>,
    pub s: Option<usize>,
    pub normalization: Option<String>,
    pub divisor: Option<String>,
    pub reduction: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: FileConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(degrade) = &config.degrade {
            degrade.validate()?;
        }
        Ok(config)
    }

    /// Push environment-level settings (encoder search path) so the
    /// template resolver sees them.
    pub fn apply_environment(&self) {
        if let Some(search) = self.encoders.as_ref().and_then(|e| e.search_path.as_ref()) {
            let merged = match std::env::var("VPREP_ENCODER_PATH") {
                Ok(existing) if !existing.is_empty() => format!("{search}:{existing}"),
                _ => search.clone(),
            };
            std::env::set_var("VPREP_ENCODER_PATH", merged);
        }
    }

    pub fn vmaf_scorer(&self) -> Option<VmafScorer> {
        let section = self.vmaf.as_ref()?;
        if let Some(template) = &section.template {
            return VmafScorer::new(template.clone()).ok();
        }
        section
            .executable
            .as_ref()
            .map(|exe| VmafScorer::from_executable(exe))
    }
}

impl DctSection {
    pub fn to_configs(&self) -> Result<Vec<DctConfig>> {
        let sizes = self.block_sizes.clone().unwrap_or_else(|| vec![8, 16]);
        let normalization = match self.normalization.as_deref() {
            Some("paper-raw") => Normalization::PaperRaw,
            Some("orthonormal") | None => Normalization::Orthonormal,
            Some(other) => return Err(Error::Config(format!("unknown normalization {other:?}"))),
        };
        let divisor = match self.divisor.as_deref() {
            Some("masked-count") => ThresholdDivisor::MaskedCount,
            Some("full-block") | None => ThresholdDivisor::FullBlock,
            Some(other) => return Err(Error::Config(format!("unknown divisor {other:?}"))),
        };
        let reduction = match self.reduction.as_deref() {
            Some("sum") => BlockReduction::Sum,
            Some("mean") | None => BlockReduction::Mean,
            Some(other) => return Err(Error::Config(format!("unknown reduction {other:?}"))),
        };
        sizes
            .iter()
            .map(|&n| {
                DctConfig::new(n, self.s.unwrap_or(n)).map(|c| {
                    c.normalization(normalization)
                        .threshold_divisor(divisor)
                        .block_reduction(reduction)
                })
            })
            .collect()
    }
}
