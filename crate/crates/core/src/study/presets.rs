//! Shipped study configurations.

use super::StudyConfig;
use crate::error::{Error, Result};

const PRESETS: [(&str, &str); 6] = [
    ("heat-temporal-beta1", include_str!("presets/heat_temporal_beta1.json")),
    ("heat-spatial-beta075", include_str!("presets/heat_spatial_beta075.json")),
    ("volterra-temporal-rho15", include_str!("presets/volterra_temporal_rho15.json")),
    ("wave-temporal-cn", include_str!("presets/wave_temporal_cn.json")),
    ("wave-spatial-cn", include_str!("presets/wave_spatial_cn.json")),
    ("heat-monte-carlo", include_str!("presets/heat_monte_carlo.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn json(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn load(name: &str) -> Result<StudyConfig> {
    let text = json(name).ok_or_else(|| {
        let known: Vec<&str> = names().collect();
        Error::Config(format!("unknown preset {name}; known presets: {}", known.join(", ")))
    })?;
    StudyConfig::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_under_its_own_name() {
        for name in names() {
            let config = load(name).unwrap();
            assert_eq!(config.name, name);
            assert!(config.ladder.values().len() >= 5);
        }
        assert!(load("nope").is_err());
    }
}
