//! The three tuned configurations distributed with the library.

use super::config::CmcsConfig;

const MCHH: &str = include_str!("../../../../configs/mchh.json");
const REDUCED: &str = include_str!("../../../../configs/reduced.json");
const TWO_ROW: &str = include_str!("../../../../configs/two_row.json");

fn load(text: &str) -> CmcsConfig {
    CmcsConfig::from_json_str(text).expect("shipped configuration is valid")
}

/// Full MCHH-style configuration over five components (`msucc = mfail`).
pub fn mchh() -> CmcsConfig {
    load(MCHH)
}

/// Six-component configuration with separate success and failure matrices.
pub fn reduced() -> CmcsConfig {
    load(REDUCED)
}

/// Six-component configuration with at most two non-zeros per row.
pub fn two_row() -> CmcsConfig {
    load(TWO_ROW)
}

pub fn all() -> Vec<CmcsConfig> {
    vec![mchh(), reduced(), two_row()]
}

/// Looks up a shipped configuration by file stem or display name.
pub fn by_name(name: &str) -> Option<CmcsConfig> {
    match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
        "mchh" => Some(mchh()),
        "reduced" => Some(reduced()),
        "tworow" => Some(two_row()),
        _ => None,
    }
}
