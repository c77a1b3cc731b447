//! Configurable defaults (lane layouts, junction parameters).

use serde::Deserialize;

use crate::lanes::{LaneType, RoadMark};

const BUILTIN: &str = include_str!("../defaults.toml");

#[derive(Debug, thiserror::Error)]
pub enum DefaultsError {
    #[error("defaults: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("defaults: {0}")]
    Value(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadDefaults {
    pub lanes: u32,
    pub width: f64,
    #[serde(rename = "type", deserialize_with = "keyword")]
    pub lane_type: LaneType,
    #[serde(deserialize_with = "keyword")]
    pub mark: RoadMark,
    #[serde(deserialize_with = "keyword")]
    pub center_mark: RoadMark,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionDefaults {
    pub clearance: f64,
    pub turn_lane_length: f64,
    pub turn_lane_widening: f64,
    pub turn_lane_width: f64,
    #[serde(deserialize_with = "keyword")]
    pub connecting_mark: RoadMark,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosingDefaults {
    pub transition: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    pub main: RoadDefaults,
    pub access: RoadDefaults,
    pub roundabout: RoadDefaults,
    pub junction: JunctionDefaults,
    pub closing: ClosingDefaults,
}

fn keyword<'de, D, T>(d: D) -> Result<T, D::Error>
where
    D: serde::Deserializer<'de>,
    T: std::str::FromStr<Err = String>,
{
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl Default for Defaults {
    fn default() -> Self {
        toml::from_str(BUILTIN).expect("built-in defaults are valid")
    }
}

impl Defaults {
    /// The built-in defaults with the keys of `text` replaced.
    pub fn with_overrides(text: &str) -> Result<Defaults, DefaultsError> {
        let mut base: toml::Value = toml::from_str(BUILTIN).expect("built-in defaults are valid");
        merge(&mut base, toml::from_str(text)?);
        let d: Defaults = base.try_into()?;
        d.check()?;
        Ok(d)
    }

    /// The text of the built-in defaults file.
    pub fn builtin_text() -> &'static str {
        BUILTIN
    }

    fn check(&self) -> Result<(), DefaultsError> {
        for (name, r) in [("main", &self.main), ("access", &self.access), ("roundabout", &self.roundabout)] {
            if !(r.width > 0.0) || r.lanes == 0 {
                return Err(DefaultsError::Value(format!("[{name}] needs at least one lane of positive width")));
            }
        }
        let j = &self.junction;
        if !(j.clearance >= 0.0 && j.turn_lane_length > 0.0 && j.turn_lane_widening > 0.0 && j.turn_lane_width >= 0.0) {
            return Err(DefaultsError::Value("[junction] lengths must be positive".into()));
        }
        if !(self.closing.transition > 0.0) {
            return Err(DefaultsError::Value("[closing] transition must be positive".into()));
        }
        Ok(())
    }
}
