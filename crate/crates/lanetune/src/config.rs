//! Pipeline configuration files (TOML) and command-line overrides.

use std::fs;
use std::path::Path;

use lanetune_core::pipeline::{ChannelSource, ChannelSpec, PipelineConfig};

use crate::error::{Error, Result};

/// Reads a config file; keys it leaves out keep their defaults.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config: PipelineConfig = toml::from_str(&text).map_err(|e| Error::Config {
        path: path.to_owned(),
        reason: e.message().to_owned(),
    })?;
    config.validate().map_err(|e| Error::Config {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    Ok(config)
}

pub fn config_to_toml(config: &PipelineConfig) -> String {
    toml::to_string(config).expect("pipeline config serializes to TOML")
}

/// Parses `edge,green,edge` style channel lists.
pub fn parse_channel_spec(text: &str) -> Result<ChannelSpec> {
    let invalid = |reason: String| Error::InvalidSpec {
        field: "channels",
        reason,
    };
    let sources = text
        .split(',')
        .map(|s| match s.trim().to_ascii_lowercase().as_str() {
            "edge" => Ok(ChannelSource::Edge),
            "blue" => Ok(ChannelSource::Blue),
            "green" => Ok(ChannelSource::Green),
            "red" => Ok(ChannelSource::Red),
            other => Err(invalid(format!(
                "unknown source `{other}`; expected edge, blue, green or red"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    let planes: [ChannelSource; 3] = sources
        .try_into()
        .map_err(|v: Vec<_>| invalid(format!("expected 3 entries, got {}", v.len())))?;
    Ok(ChannelSpec(planes))
}

/// Values given on the command line, applied over the file's.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub initial_threshold: Option<f64>,
    pub kernel_size: Option<usize>,
    pub sigma_spatial: Option<f64>,
    pub sigma_intensity: Option<f64>,
    pub vote_threshold: Option<u32>,
    pub roi_apex_x: Option<f64>,
    pub roi_apex_y: Option<f64>,
    pub channels: Option<ChannelSpec>,
    pub allocate_masked_edges: Option<bool>,
}

impl ConfigOverrides {
    pub fn apply(&self, config: &mut PipelineConfig) {
        fn set<T: Copy>(slot: &mut T, value: Option<T>) {
            if let Some(v) = value {
                *slot = v;
            }
        }
        set(&mut config.initial_threshold, self.initial_threshold);
        set(&mut config.bilateral.kernel_size, self.kernel_size);
        set(&mut config.bilateral.sigma_spatial, self.sigma_spatial);
        set(&mut config.bilateral.sigma_intensity, self.sigma_intensity);
        set(&mut config.hough.vote_threshold, self.vote_threshold);
        set(&mut config.roi.apex_x, self.roi_apex_x);
        set(&mut config.roi.apex_y, self.roi_apex_y);
        set(&mut config.channels, self.channels);
        set(
            &mut config.allocate_masked_edges,
            self.allocate_masked_edges,
        );
    }
}

/// The config a run uses: defaults, then the file, then the overrides.
pub fn effective_config(
    path: Option<&Path>,
    overrides: &ConfigOverrides,
) -> Result<PipelineConfig> {
    let mut config = match path {
        Some(p) => load_config(p)?,
        None => PipelineConfig::default(),
    };
    overrides.apply(&mut config);
    config.validate()?;
    Ok(config)
}
