//! Flight termination rules, checked on the state estimate every cycle.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;

use crate::pid::MotorCommands;
use crate::sim::SensorEstimate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HealthConfig {
    /// Height ceiling, cm.
    pub max_height: f64,
    /// Per-axis horizontal speed limit, cm/s.
    pub max_horizontal_speed: f64,
    /// Vertical speed limit, cm/s.
    pub max_vertical_speed: f64,
    /// Roll/pitch limit, degrees.
    pub max_tilt: f64,
    /// Yaw tracking limit, degrees.
    pub max_yaw_error: f64,
    /// After a heading setpoint change the yaw error is measured against
    /// the whole arc between old and new setpoint for this long, s.
    pub yaw_slew_time: f64,
    /// Maximum upper-PWM-limit hits per second, counted over a sliding
    /// window of `pwm_window` seconds.
    pub max_pwm_limit_rate: f64,
    pub pwm_window: f64,
    /// Motor current proxy: terminate when the mean command stays above
    /// `current_pwm` for `current_duration` seconds.
    pub current_enabled: bool,
    pub current_pwm: f64,
    pub current_duration: f64,
    /// Terminate if the vehicle has not moved by this time, s.
    pub no_movement_time: f64,
    /// Displacement from the start that counts as moving, cm.
    pub no_movement_displacement: f64,
    /// Continuous ground contact after flight that counts as landed, s.
    pub landed_duration: f64,
}

impl Default for HealthConfig {
    fn default() -> Self {
        Self {
            max_height: 18.0,
            max_horizontal_speed: 50.0,
            max_vertical_speed: 25.0,
            max_tilt: 15.0,
            max_yaw_error: 45.0,
            yaw_slew_time: 2.0,
            max_pwm_limit_rate: 75.0,
            pwm_window: 1.0,
            current_enabled: true,
            current_pwm: 1900.0,
            current_duration: 1.0,
            no_movement_time: 5.0,
            no_movement_displacement: 1.0,
            landed_duration: 1.0,
        }
    }
}

impl HealthConfig {
    pub fn validate(&self) -> Result<(), String> {
        let v = [
            self.max_height,
            self.max_horizontal_speed,
            self.max_vertical_speed,
            self.max_tilt,
            self.max_yaw_error,
            self.max_pwm_limit_rate,
            self.pwm_window,
            self.current_pwm,
            self.current_duration,
            self.yaw_slew_time,
            self.no_movement_time,
            self.no_movement_displacement,
            self.landed_duration,
        ];
        if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err("health limits must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HealthRule {
    Height,
    HorizontalSpeed,
    VerticalSpeed,
    Tilt,
    Yaw,
    PwmLimitRate,
    Current,
}

impl HealthRule {
    pub fn name(self) -> &'static str {
        match self {
            HealthRule::Height => "height",
            HealthRule::HorizontalSpeed => "horizontal_speed",
            HealthRule::VerticalSpeed => "vertical_speed",
            HealthRule::Tilt => "tilt",
            HealthRule::Yaw => "yaw",
            HealthRule::PwmLimitRate => "pwm_limit_rate",
            HealthRule::Current => "current",
        }
    }
}

/// Why a flight ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    Completed,
    Health(HealthRule),
    NoMovement,
    Landed,
    Diverged,
}

impl Termination {
    pub fn is_completed(self) -> bool {
        self == Termination::Completed
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Completed => f.write_str("completed"),
            Termination::Health(r) => write!(f, "health:{}", r.name()),
            Termination::NoMovement => f.write_str("no_movement"),
            Termination::Landed => f.write_str("landed"),
            Termination::Diverged => f.write_str("diverged"),
        }
    }
}

/// Distance in degrees from `psi` to the arc swept from `from` to `to` the
/// short way round. Zero anywhere on the arc.
///
/// A heading setpoint change is a step, and the vehicle needs time to slew
/// across it; measuring against the arc for a short while after the change
/// stops a 45-degree rule from firing on every step larger than 45 degrees.
pub fn yaw_arc_error(psi: f64, from: f64, to: f64) -> f64 {
    let span = super::wrap_angle(to - from);
    let (lo, sweep) = if span >= 0.0 { (from, span) } else { (to, -span) };
    let d = (psi - lo).rem_euclid(360.0);
    if d <= sweep {
        0.0
    } else {
        (d - sweep).min(360.0 - d)
    }
}

fn steps(seconds: f64, dt: f64) -> usize {
    (seconds / dt).round().max(1.0) as usize
}

/// Stateful monitor for one flight. Call [`HealthMonitor::check`] once per
/// control cycle after the new estimate is available.
#[derive(Clone, Debug)]
pub struct HealthMonitor {
    cfg: HealthConfig,
    pwm_max: f64,
    start: [f64; 3],
    pwm_hits: VecDeque<bool>,
    pwm_hit_count: usize,
    pwm_window_steps: usize,
    current_steps: usize,
    current_limit_steps: usize,
    ground_steps: usize,
    landed_limit_steps: usize,
    no_movement_step: usize,
    yaw_slew_steps: usize,
    yaw_from: f64,
    yaw_to: f64,
    yaw_changed_at: usize,
    has_flown: bool,
    moved: bool,
    step: usize,
}

impl HealthMonitor {
    /// `yaw_sp` is the heading setpoint in force at the start of the flight.
    pub fn new(cfg: HealthConfig, pwm_max: f64, start: &SensorEstimate, yaw_sp: f64, dt: f64) -> Self {
        let pwm_window_steps = steps(cfg.pwm_window, dt);
        Self {
            pwm_max,
            start: [start.p_n, start.p_e, start.h],
            pwm_hits: VecDeque::with_capacity(pwm_window_steps + 1),
            pwm_hit_count: 0,
            pwm_window_steps,
            current_steps: 0,
            current_limit_steps: steps(cfg.current_duration, dt),
            ground_steps: 0,
            landed_limit_steps: steps(cfg.landed_duration, dt),
            no_movement_step: steps(cfg.no_movement_time, dt),
            yaw_slew_steps: (cfg.yaw_slew_time / dt).round() as usize,
            yaw_from: yaw_sp,
            yaw_to: yaw_sp,
            yaw_changed_at: 0,
            has_flown: false,
            moved: false,
            step: 0,
            cfg,
        }
    }

    pub fn has_flown(&self) -> bool {
        self.has_flown
    }

    /// Yaw error under the slew allowance, degrees.
    fn yaw_error(&self, psi: f64) -> f64 {
        if self.step - self.yaw_changed_at <= self.yaw_slew_steps {
            yaw_arc_error(psi, self.yaw_from, self.yaw_to)
        } else {
            super::wrap_angle(self.yaw_to - psi).abs()
        }
    }

    /// Update with this cycle's estimate, commands and heading setpoint.
    pub fn check(&mut self, est: &SensorEstimate, cmds: &MotorCommands, yaw_sp: f64) -> Option<Termination> {
        let c = &self.cfg;
        self.step += 1;
        if yaw_sp != self.yaw_to {
            self.yaw_from = self.yaw_to;
            self.yaw_to = yaw_sp;
            self.yaw_changed_at = self.step - 1;
        }

        let hit = cmds.any_at_or_above(self.pwm_max);
        self.pwm_hits.push_back(hit);
        self.pwm_hit_count += hit as usize;
        if self.pwm_hits.len() > self.pwm_window_steps {
            self.pwm_hit_count -= self.pwm_hits.pop_front().unwrap() as usize;
        }
        self.current_steps = if cmds.mean() > c.current_pwm { self.current_steps + 1 } else { 0 };

        if est.on_ground {
            self.ground_steps += 1;
        } else {
            self.ground_steps = 0;
            self.has_flown = true;
        }
        let disp = {
            let [n, e, h] = self.start;
            ((est.p_n - n).powi(2) + (est.p_e - e).powi(2) + (est.h - h).powi(2)).sqrt()
        };
        if self.has_flown && disp >= c.no_movement_displacement {
            self.moved = true;
        }

        let rule = if est.h > c.max_height {
            Some(HealthRule::Height)
        } else if est.v_n.abs() > c.max_horizontal_speed || est.v_e.abs() > c.max_horizontal_speed {
            Some(HealthRule::HorizontalSpeed)
        } else if est.v_h.abs() > c.max_vertical_speed {
            Some(HealthRule::VerticalSpeed)
        } else if est.phi.abs() > c.max_tilt || est.theta.abs() > c.max_tilt {
            Some(HealthRule::Tilt)
        } else if self.yaw_error(est.psi) > c.max_yaw_error {
            Some(HealthRule::Yaw)
        } else if self.pwm_hit_count as f64 > c.max_pwm_limit_rate * c.pwm_window {
            Some(HealthRule::PwmLimitRate)
        } else if c.current_enabled && self.current_steps >= self.current_limit_steps {
            Some(HealthRule::Current)
        } else {
            None
        };
        if let Some(r) = rule {
            return Some(Termination::Health(r));
        }
        if self.has_flown && self.ground_steps > self.landed_limit_steps {
            return Some(Termination::Landed);
        }
        if self.step >= self.no_movement_step && !self.moved {
            return Some(Termination::NoMovement);
        }
        None
    }
}
