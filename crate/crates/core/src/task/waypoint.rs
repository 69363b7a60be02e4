use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 6-tuple of setpoints: attitude in degrees, position in cm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Waypoint {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub p_n: f64,
    pub p_e: f64,
    pub h: f64,
}

/// Piecewise-constant waypoint schedule: waypoint `i` is active on
/// `[i * segment, (i + 1) * segment)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub segment: f64,
    pub waypoints: Vec<Waypoint>,
}

impl Default for Schedule {
    fn default() -> Self {
        let centre = |h, psi| Waypoint { h, psi, ..Default::default() };
        Self {
            segment: 8.0,
            waypoints: vec![
                centre(10.0, 40.0),
                Waypoint { p_n: 8.0, p_e: -8.0, h: 10.0, psi: 0.0, ..Default::default() },
                Waypoint { p_n: -8.0, p_e: 8.0, h: 14.0, psi: 0.0, ..Default::default() },
                centre(10.0, 80.0),
                centre(10.0, 40.0),
            ],
        }
    }
}

impl Schedule {
    pub fn duration(&self) -> f64 {
        self.segment * self.waypoints.len() as f64
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.waypoints.is_empty() || !(self.segment > 0.0) {
            return Err("schedule needs at least one waypoint and a positive segment length".into());
        }
        if self.waypoints.iter().any(|w| w.phi != 0.0 || w.theta != 0.0) {
            return Err("hover waypoints must command level attitude (phi = theta = 0)".into());
        }
        Ok(())
    }

    pub fn index_at(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t < self.duration()) {
            return Err(Error::ScheduleRange(t));
        }
        Ok(((t / self.segment).floor() as usize).min(self.waypoints.len() - 1))
    }

    pub fn waypoint_at(&self, t: f64) -> Result<Waypoint> {
        self.index_at(t).map(|i| self.waypoints[i])
    }
}

/// Waypoint of the standard hover trajectory at time `t`.
pub fn waypoint_at(t: f64) -> Result<Waypoint> {
    Schedule::default().waypoint_at(t)
}
