use serde::{Deserialize, Serialize};

use super::LandscapeProfile;
use crate::{Error, Result, ScalarField};

/// Linear RGB ramp from `dark` (lowest average loss) to `light`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorRamp {
    pub dark: String,
    pub light: String,
}

impl Default for ColorRamp {
    fn default() -> Self {
        Self { dark: "#08306b".into(), light: "#c6dbef".into() }
    }
}

pub(crate) fn parse_hex(s: &str) -> Result<[u8; 3]> {
    let bad = || Error::param(format!("invalid hex color {s:?}"));
    let digits = s.strip_prefix('#').ok_or_else(bad)?;
    if digits.len() != 6 || !digits.is_ascii() {
        return Err(bad());
    }
    let mut rgb = [0u8; 3];
    for (i, c) in rgb.iter_mut().enumerate() {
        *c = u8::from_str_radix(&digits[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
    }
    Ok(rgb)
}

impl ColorRamp {
    pub fn validate(&self) -> Result<()> {
        parse_hex(&self.dark)?;
        parse_hex(&self.light)?;
        Ok(())
    }

    /// Hex color at `t ∈ [0, 1]`.
    pub fn at(&self, t: f64) -> Result<String> {
        let (a, b) = (parse_hex(&self.dark)?, parse_hex(&self.light)?);
        let t = t.clamp(0.0, 1.0);
        let mix = |i: usize| (a[i] as f64 + (b[i] as f64 - a[i] as f64) * t).round() as u8;
        Ok(format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2)))
    }
}

pub fn color_basins(profile: LandscapeProfile, field: &ScalarField) -> Result<LandscapeProfile> {
    color_basins_with(profile, field, &ColorRamp::default())
}

/// Mean loss of each basin's own vertices (nested basins excluded), mapped
/// linearly onto the ramp between the smallest and largest mean.
pub fn color_basins_with(mut profile: LandscapeProfile, field: &ScalarField, ramp: &ColorRamp) -> Result<LandscapeProfile> {
    if field.len() != profile.vertex_count {
        return Err(Error::Dimension(format!(
            "profile covers {} vertices, field has {}",
            profile.vertex_count,
            field.len()
        )));
    }
    let values = field.values();
    let mut means = Vec::with_capacity(profile.basins.len());
    for basin in &profile.basins {
        if basin.members.is_empty() {
            return Err(Error::param(format!("basin {} has no member vertices", basin.id)));
        }
        let sum: f64 = basin.members.iter().map(|&v| values[v]).sum();
        means.push(sum / basin.members.len() as f64);
    }
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for (basin, mean) in profile.basins.iter_mut().zip(means) {
        let shade = if hi > lo { (mean - lo) / (hi - lo) } else { 0.0 };
        basin.avg_loss = Some(mean);
        basin.shade = Some(shade);
        basin.color = Some(ramp.at(shade)?);
    }
    Ok(profile)
}
