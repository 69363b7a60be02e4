use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Horizontal air velocity, cm/s.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WindVector {
    pub north: f64,
    pub east: f64,
}

impl WindVector {
    pub fn magnitude(&self) -> f64 {
        self.north.hypot(self.east)
    }

    /// Direction the air moves toward, degrees clockwise from north.
    pub fn bearing(&self) -> f64 {
        self.east.atan2(self.north).to_degrees()
    }
}

/// An oscillating fan: constant speed, bearing sweeping sinusoidally across
/// `traversal` degrees centred on `base_bearing`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindModel {
    /// cm/s
    pub speed: f64,
    /// s
    pub period: f64,
    /// Total sweep, degrees.
    pub traversal: f64,
    pub base_bearing: f64,
}

impl Default for WindModel {
    fn default() -> Self {
        // Fan in the north-west corner blowing toward the south-east.
        Self { speed: 500.0, period: 10.0, traversal: 120.0, base_bearing: 135.0 }
    }
}

impl WindModel {
    pub fn calm() -> Self {
        Self { speed: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.speed >= 0.0 && self.period > 0.0 && (0.0..=360.0).contains(&self.traversal)) {
            return Err("wind speed must be >= 0, period > 0, traversal in [0, 360]".into());
        }
        Ok(())
    }

    pub fn bearing_at(&self, t: f64) -> f64 {
        self.base_bearing + 0.5 * self.traversal * (2.0 * PI * t / self.period).sin()
    }
}

pub fn wind_at(t: f64, model: &WindModel) -> WindVector {
    let (s, c) = model.bearing_at(t).to_radians().sin_cos();
    WindVector { north: model.speed * c, east: model.speed * s }
}
