//! Per-cycle hover fitness, maximum 10 per control step.
//!
//! Eight bounded components reward level attitude, low velocities, low
//! roll/pitch rates, small height/yaw/position errors and unsaturated
//! motors. Height, yaw and position use a two-slope score: 1 at zero error
//! falling to 1/4 at the core limit, then to 0 at the range limit.

use serde::{Deserialize, Serialize};

use crate::sim::SensorEstimate;
use crate::task::Waypoint;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateLimits {
    /// Max roll/pitch rate and its noise threshold, deg/s.
    pub omega: f64,
    pub omega_noise: f64,
    /// Horizontal velocity noise threshold and maximum, cm/s.
    pub vh_noise: f64,
    pub vh: f64,
    /// Vertical velocity noise threshold and maximum, cm/s.
    pub vv_noise: f64,
    pub vv: f64,
    /// Attitude range limit, degrees.
    pub attitude: f64,
    /// Height range and core limits, cm.
    pub height: f64,
    pub height_core: f64,
    /// Yaw core and range limits, degrees.
    pub yaw_core: f64,
    pub yaw: f64,
    /// Position core and range limits, cm.
    pub position_core: f64,
    pub position: f64,
}

impl Default for StateLimits {
    fn default() -> Self {
        Self {
            omega: 115.0,
            omega_noise: 30.0,
            vh_noise: 5.0,
            vh: 15.0,
            vv_noise: 2.0,
            vv: 20.0,
            attitude: 15.0,
            height: 10.0,
            height_core: 5.0,
            yaw_core: 15.0,
            yaw: 160.0,
            position_core: 8.0,
            position: 20.0,
        }
    }
}

impl StateLimits {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.omega,
            self.omega_noise,
            self.vh_noise,
            self.vh,
            self.vv_noise,
            self.vv,
            self.attitude,
            self.height,
            self.height_core,
            self.yaw_core,
            self.yaw,
            self.position_core,
            self.position,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err("state limits must be positive".into());
        }
        if !(self.height_core < self.height && self.yaw_core < self.yaw && self.position_core < self.position) {
            return Err("core limits must be below range limits".into());
        }
        if !(self.omega_noise < self.omega && self.vh_noise < self.vh && self.vv_noise < self.vv) {
            return Err("noise thresholds must be below range limits".into());
        }
        Ok(())
    }
}

/// `x` if `x > l`, else 0.
pub fn deadband(x: f64, l: f64) -> f64 {
    if x > l {
        x
    } else {
        0.0
    }
}

/// Wrap an angle in degrees into `(-180, 180]`. Equivalent to
/// `atan2(sin a, cos a)` with the `-180` branch folded onto `+180`.
pub fn wrap_angle(alpha: f64) -> f64 {
    let r = (alpha + 180.0).rem_euclid(360.0) - 180.0;
    if r <= -180.0 {
        r + 360.0
    } else {
        r
    }
}

fn linear_score(x: f64, limit: f64) -> f64 {
    (1.0 - x / limit).max(0.0)
}

/// Two-slope score: `1 - 3e/(4 core)` on `[0, core]`, then
/// `(range - e) / (4 (range - core))` down to 0.
pub fn core_range_score(err: f64, core: f64, range: f64) -> f64 {
    let e = err.abs();
    if e > core {
        ((range - e) / (4.0 * (range - core))).max(0.0)
    } else {
        1.0 - 3.0 * e / (4.0 * core)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FitnessComponents {
    /// Roll + pitch tracking, [0, 2].
    pub attitude: f64,
    pub horizontal_velocity: f64,
    pub vertical_velocity: f64,
    /// Roll + pitch rate, [0, 2].
    pub rates: f64,
    pub height: f64,
    pub yaw: f64,
    pub position: f64,
    /// 0 when a motor command sits on a PWM limit, else 1.
    pub pwm: f64,
}

impl FitnessComponents {
    pub fn total(&self) -> f64 {
        self.attitude
            + self.horizontal_velocity
            + self.vertical_velocity
            + self.height
            + self.yaw
            + self.position
            + self.pwm
            + self.rates
    }
}

pub fn fitness_components(
    est: &SensorEstimate,
    wp: &Waypoint,
    pwm_at_limit: bool,
    l: &StateLimits,
) -> FitnessComponents {
    let speed = est.v_n.hypot(est.v_e);
    let p_err = (wp.p_n - est.p_n).hypot(wp.p_e - est.p_e);
    FitnessComponents {
        attitude: linear_score((wp.phi - est.phi).abs(), l.attitude)
            + linear_score((wp.theta - est.theta).abs(), l.attitude),
        horizontal_velocity: linear_score(deadband(speed, l.vh_noise), l.vh),
        vertical_velocity: linear_score(deadband(est.v_h.abs(), l.vv_noise), l.vv),
        rates: linear_score(deadband(est.omega_p.abs(), l.omega_noise), l.omega)
            + linear_score(deadband(est.omega_q.abs(), l.omega_noise), l.omega),
        height: core_range_score(wp.h - est.h, l.height_core, l.height),
        yaw: core_range_score(wrap_angle(wp.psi - est.psi), l.yaw_core, l.yaw),
        position: core_range_score(p_err, l.position_core, l.position),
        pwm: if pwm_at_limit { 0.0 } else { 1.0 },
    }
}

/// Fitness for one control step, in [0, 10].
pub fn fitness_cycle(est: &SensorEstimate, wp: &Waypoint, pwm_at_limit: bool, limits: &StateLimits) -> f64 {
    fitness_components(est, wp, pwm_at_limit, limits).total()
}
