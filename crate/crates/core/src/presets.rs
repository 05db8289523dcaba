//! Named stride schedules.

use std::sync::Arc;

use serde::Serialize;

use crate::registry::Registry;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub strides: Vec<usize>,
    /// Output sample rate in Hz.
    pub sample_rate: f64,
}

/// Registry holding the built-in presets.
pub fn registry() -> Registry<Preset> {
    let mut r = Registry::new("preset");
    r.register(
        "encodec48k",
        Arc::new(Preset {
            name: "encodec48k",
            strides: vec![8, 5, 4, 2],
            sample_rate: 48000.0,
        }),
    );
    r
}

pub fn get(name: &str) -> Result<Arc<Preset>> {
    registry().get(name)
}
