//! Built-in experiment presets, embedded at compile time so the CLI works
//! from any directory. The same files ship under `presets/`.

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};

/// (name, TOML source) of every built-in preset.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "filter_compare",
        include_str!("../presets/filter_compare.toml"),
    ),
    ("sensor_count", include_str!("../presets/sensor_count.toml")),
    ("height_sweep", include_str!("../presets/height_sweep.toml")),
    (
        "horizontal_sweep",
        include_str!("../presets/horizontal_sweep.toml"),
    ),
    (
        "five_positions",
        include_str!("../presets/five_positions.toml"),
    ),
];

/// Names of all built-in presets.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}

/// Parse a built-in preset by name.
pub fn load_preset(name: &str) -> Result<RunConfig> {
    for (preset_name, text) in PRESETS {
        if *preset_name == name {
            return RunConfig::from_toml(text);
        }
    }
    Err(HarnessError::UnknownPreset {
        name: name.to_string(),
        available: preset_names().join(", "),
    })
}
