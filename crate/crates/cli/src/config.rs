//! Optional `key=value` configuration for clustering parameters.

use std::path::Path;

use modview_core::cluster::DsmcParams;
use modview_core::{Error, Result};

use crate::DsmcFlags;

#[derive(Default)]
pub struct ConfigValues {
    powcc: Option<f64>,
    powbid: Option<f64>,
    powdep: Option<f64>,
    times: Option<usize>,
    rand_accept: Option<u64>,
    convergence_threshold: Option<f64>,
    max_stable_passes: Option<usize>,
}

pub fn load(path: &Path) -> Result<ConfigValues> {
    let text = crate::io_util::read_to_string(path)?;
    parse(&text)
}

fn parse(text: &str) -> Result<ConfigValues> {
    let mut values = ConfigValues::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| Error::Parse {
            line: lineno + 1,
            message: format!("invalid {what} `{value}` for `{key}`"),
        };
        match key {
            "powcc" => values.powcc = Some(value.parse().map_err(|_| bad("number"))?),
            "powbid" => values.powbid = Some(value.parse().map_err(|_| bad("number"))?),
            "powdep" => values.powdep = Some(value.parse().map_err(|_| bad("number"))?),
            "times" => values.times = Some(value.parse().map_err(|_| bad("integer"))?),
            "rand_accept" => values.rand_accept = Some(value.parse().map_err(|_| bad("integer"))?),
            "threshold" => {
                values.convergence_threshold = Some(value.parse().map_err(|_| bad("number"))?)
            }
            "stable_passes" => {
                values.max_stable_passes = Some(value.parse().map_err(|_| bad("integer"))?)
            }
            other => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("unknown configuration key `{other}`"),
                })
            }
        }
    }
    Ok(values)
}

/// Resolve the effective parameters: tuned defaults, overridden by the
/// config file, overridden by explicit flags.
pub fn resolve_params(
    config_path: Option<&Path>,
    flags: &DsmcFlags,
    seed: Option<u64>,
) -> Result<DsmcParams> {
    let mut params = DsmcParams::default();
    if let Some(path) = config_path {
        let config = load(path)?;
        apply(&mut params, &config);
    }
    if let Some(v) = flags.powcc {
        params.powcc = v;
    }
    if let Some(v) = flags.powbid {
        params.powbid = v;
    }
    if let Some(v) = flags.powdep {
        params.powdep = v;
    }
    if let Some(v) = flags.times {
        params.times = v;
    }
    if let Some(v) = flags.rand_accept {
        params.rand_accept = v;
    }
    if let Some(v) = flags.convergence_threshold {
        params.convergence_threshold = v;
    }
    if let Some(v) = flags.max_stable_passes {
        params.max_stable_passes = v;
    }
    if let Some(v) = seed {
        params.seed = v;
    }
    params.validate()?;
    Ok(params)
}

fn apply(params: &mut DsmcParams, config: &ConfigValues) {
    if let Some(v) = config.powcc {
        params.powcc = v;
    }
    if let Some(v) = config.powbid {
        params.powbid = v;
    }
    if let Some(v) = config.powdep {
        params.powdep = v;
    }
    if let Some(v) = config.times {
        params.times = v;
    }
    if let Some(v) = config.rand_accept {
        params.rand_accept = v;
    }
    if let Some(v) = config.convergence_threshold {
        params.convergence_threshold = v;
    }
    if let Some(v) = config.max_stable_passes {
        params.max_stable_passes = v;
    }
}
