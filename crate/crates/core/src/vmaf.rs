//! External VMAF scorer integration.
//!
//! VMAF is a trained fused model and is not reimplemented here; when a
//! scorer executable is configured the harness shells out and parses its
//! pooled JSON score. The default template matches the libvmaf CLI
//! (`vmaf -r ref.y4m -d dist.y4m -o out.json --json`); any command that
//! accepts the `{reference}`/`{distorted}`/`{output}` placeholders and
//! writes libvmaf-style JSON works.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable consulted by [`VmafScorer::from_env`]: either a
/// bare executable name/path or a full command template.
pub const VMAF_ENV: &str = "VPREP_VMAF";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VmafScorer {
    pub command_template: String,
}

impl VmafScorer {
    pub fn new(command_template: impl Into<String>) -> Result<Self> {
        let scorer = VmafScorer {
            command_template: command_template.into(),
        };
        for name in ["reference", "distorted", "output"] {
            if !scorer.command_template.contains(&format!("{{{name}}}")) {
                return Err(Error::Config(format!(
                    "vmaf template is missing the {{{name}}} placeholder"
                )));
            }
        }
        Ok(scorer)
    }

    /// Wrap a bare executable in the standard libvmaf CLI arguments.
    pub fn from_executable(exe: &str) -> Self {
        VmafScorer {
            command_template: format!(
                "{exe} --reference {{reference}} --distorted {{distorted}} --output {{output}} --json"
            ),
        }
    }

    /// Build from `VPREP_VMAF` if set; a value containing `{reference}`
    /// is treated as a full template, anything else as an executable.
    pub fn from_env() -> Option<Self> {
        let value = std::env::var(VMAF_ENV).ok()?;
        if value.trim().is_empty() {
            return None;
        }
        if value.contains("{reference}") {
            VmafScorer::new(value).ok()
        } else {
            Some(VmafScorer::from_executable(&value))
        }
    }

    /// Score a distorted file against a reference, returning the pooled
    /// mean VMAF.
    pub fn score_files(&self, reference: &Path, distorted: &Path, workdir: &Path) -> Result<f64> {
        let output = workdir.join("vmaf_output.json");
        let mut args = Vec::new();
        for token in self.command_template.split_whitespace() {
            args.push(
                token
                    .replace("{reference}", &reference.display().to_string())
                    .replace("{distorted}", &distorted.display().to_string())
                    .replace("{output}", &output.display().to_string()),
            );
        }
        if args.is_empty() {
            return Err(Error::Config("empty vmaf template".into()));
        }
        let exe = crate::rd::resolve_executable(&args[0])?;
        let result = std::process::Command::new(&exe)
            .args(&args[1..])
            .output()
            .map_err(|e| Error::io(&exe, e))?;
        if !result.status.success() {
            return Err(Error::Subprocess {
                name: format!("vmaf ({})", args.join(" ")),
                status: result.status.to_string(),
                stderr: String::from_utf8_lossy(&result.stderr).into_owned(),
            });
        }
        let text = std::fs::read_to_string(&output).map_err(|e| Error::io(&output, e))?;
        parse_vmaf_json(&text)
    }
}

/// Extract the pooled mean VMAF from libvmaf JSON output. Falls back to
/// averaging per-frame scores when no pooled section is present.
pub fn parse_vmaf_json(text: &str) -> Result<f64> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Serialization(format!("vmaf output is not valid JSON: {e}")))?;
    if let Some(mean) = value
        .pointer("/pooled_metrics/vmaf/mean")
        .and_then(serde_json::Value::as_f64)
    {
        return Ok(mean);
    }
    if let Some(frames) = value.get("frames").and_then(serde_json::Value::as_array) {
        let scores: Vec<f64> = frames
            .iter()
            .filter_map(|f| {
                f.pointer("/metrics/vmaf")
                    .and_then(serde_json::Value::as_f64)
            })
            .collect();
        if !scores.is_empty() {
            return Ok(scores.iter().sum::<f64>() / scores.len() as f64);
        }
    }
    Err(Error::Serialization(
        "vmaf output carries neither pooled_metrics.vmaf.mean nor frames[].metrics.vmaf".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pooled_mean() {
        let json = r#"{"pooled_metrics": {"vmaf": {"min": 80.1, "max": 99.0, "mean": 94.25}}}"#;
        assert_eq!(parse_vmaf_json(json).unwrap(), 94.25);
    }

    #[test]
    fn falls_back_to_frame_mean() {
        let json = r#"{"frames": [
            {"frameNum": 0, "metrics": {"vmaf": 90.0}},
            {"frameNum": 1, "metrics": {"vmaf": 94.0}}
        ]}"#;
        assert_eq!(parse_vmaf_json(json).unwrap(), 92.0);
    }

    #[test]
    fn garbage_is_a_serialization_error() {
        assert!(parse_vmaf_json("not json").is_err());
        assert!(parse_vmaf_json("{}").is_err());
    }

    #[test]
    fn template_validation() {
        assert!(VmafScorer::new("vmaf -r {reference} -d {distorted}").is_err());
        assert!(VmafScorer::new("vmaf -r {reference} -d {distorted} -o {output}").is_ok());
        let s = VmafScorer::from_executable("/usr/bin/vmaf");
        assert!(s.command_template.contains("{output}"));
    }

    #[test]
    fn scoring_via_fake_scorer_script() {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("fake-vmaf.sh");
        std::fs::write(
            &script,
            "#!/bin/sh\nprintf '{\"pooled_metrics\":{\"vmaf\":{\"mean\":87.5}}}' > \"$6\"\n",
        )
        .unwrap();
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
        }
        let scorer = VmafScorer::new(format!(
            "{} --reference {{reference}} --distorted {{distorted}} --output {{output}}",
            script.display()
        ))
        .unwrap();
        let refe = dir.path().join("r.y4m");
        let dist = dir.path().join("d.y4m");
        std::fs::write(&refe, b"x").unwrap();
        std::fs::write(&dist, b"x").unwrap();
        let score = scorer.score_files(&refe, &dist, dir.path()).unwrap();
        assert_eq!(score, 87.5);
    }
}
