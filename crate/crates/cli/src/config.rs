//! Defaults file + flag resolution. Flags always win over the config file;
//! the fully resolved settings are echoed on stdout so a run is reproducible
//! from its own log.

use std::path::Path;

use epdwave::profile::ProfileFunction;

use crate::CliError;

/// Optional defaults, loaded from `--config <file.json>`. Every field can be
/// overridden by the matching command-line flag.
#[derive(Debug, Clone, Default, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub family: Option<String>,
    pub n: Option<u32>,
    pub a: Option<f64>,
    pub domain_lo: Option<f64>,
    pub domain_hi: Option<f64>,
    pub t_profile: Option<String>,
    pub x_profile: Option<String>,
    pub grid: Option<usize>,
    pub t_final: Option<f64>,
    pub tol: Option<f64>,
    pub levels: Option<Vec<usize>>,
    pub cfl: Option<f64>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// `gaussian:amp,center,width` | `sinusoid:amp,freq,phase` | `poly:c0,c1,…`
/// | `zero`.
pub fn parse_profile(spec: &str) -> Result<ProfileFunction, CliError> {
    let bad = |msg: &str| CliError::Usage(format!("profile `{spec}`: {msg}"));
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k, r),
        None => (spec, ""),
    };
    let nums: Vec<f64> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(&format!("bad number ({e})")))?
    };
    match kind {
        "zero" => {
            if !nums.is_empty() {
                return Err(bad("zero takes no parameters"));
            }
            Ok(ProfileFunction::Zero)
        }
        "gaussian" => {
            let [amp, center, width] = nums[..] else {
                return Err(bad("expected gaussian:amp,center,width"));
            };
            if width <= 0.0 {
                return Err(bad("width must be positive"));
            }
            Ok(ProfileFunction::gaussian(amp, center, width))
        }
        "sinusoid" => {
            let [amp, freq, phase] = nums[..] else {
                return Err(bad("expected sinusoid:amp,freq,phase"));
            };
            Ok(ProfileFunction::sinusoid(amp, freq, phase))
        }
        "poly" => {
            if nums.is_empty() {
                return Err(bad("expected poly:c0,c1,…"));
            }
            Ok(ProfileFunction::polynomial(&nums))
        }
        other => Err(bad(&format!(
            "unknown kind `{other}` (use zero | gaussian | sinusoid | poly)"
        ))),
    }
}

pub fn parse_levels(spec: &str) -> Result<Vec<usize>, CliError> {
    let levels: Vec<usize> = spec
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad levels `{spec}`: {e}")))?;
    if levels.len() < 2 {
        return Err(CliError::Usage(
            "need at least two grid levels to measure convergence".into(),
        ));
    }
    Ok(levels)
}
