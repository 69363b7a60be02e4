//! Two-loop cascaded PID control for a hex-X multirotor.
//!
//! The outer loop turns horizontal position errors into roll/pitch
//! setpoints; the inner loop turns attitude and height errors into the four
//! mixer inputs `(d_phi, d_theta, d_psi, d_t)`, all in PWM units. Every error
//! is saturated at its channel limit before it reaches a PID.

use serde::{Deserialize, Serialize};

use crate::de::Genome;
use crate::sim::SensorEstimate;
use crate::task::{wrap_angle, Waypoint};

pub const MOTORS: usize = 6;

/// Motor azimuths, degrees clockwise from the nose.
pub const MOTOR_AZIMUTH_DEG: [f64; MOTORS] = [30.0, 90.0, 150.0, 210.0, 270.0, 330.0];

/// Spin sign per motor. A positive yaw command raises the `+1` motors and
/// lowers the `-1` motors by the same amount.
pub const MOTOR_SPIN: [f64; MOTORS] = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];

/// Roll mixing coefficient, `-sin(azimuth)`.
pub fn roll_coefficient(m: usize) -> f64 {
    -MOTOR_AZIMUTH_DEG[m].to_radians().sin()
}

/// Pitch mixing coefficient, `cos(azimuth)`.
pub fn pitch_coefficient(m: usize) -> f64 {
    MOTOR_AZIMUTH_DEG[m].to_radians().cos()
}

/// The six controlled channels, in genome order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    Roll,
    Pitch,
    Yaw,
    Height,
    North,
    East,
}

impl Channel {
    pub const ALL: [Channel; 6] =
        [Channel::Roll, Channel::Pitch, Channel::Yaw, Channel::Height, Channel::North, Channel::East];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
    pub initialized: bool,
}

impl PidState {
    /// Advance one tick. The integral is a rectangle-rule sum capped at
    /// `±windup_cap`; the derivative is taken on the error and is zero on the
    /// first call.
    pub fn step(&mut self, error: f64, dt: f64, gains: &PidGains, windup_cap: f64) -> f64 {
        debug_assert!(dt > 0.0);
        self.integral = (self.integral + error * dt).clamp(-windup_cap, windup_cap);
        let derivative = if self.initialized { (error - self.prev_error) / dt } else { 0.0 };
        self.prev_error = error;
        self.initialized = true;
        gains.kp * error + gains.ki * self.integral + gains.kd * derivative
    }
}

/// Saturate an error at `±l_er`.
pub fn limit_error(raw_error: f64, l_er: f64) -> f64 {
    raw_error.clamp(-l_er, l_er)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerLimits {
    /// Height error limit, cm.
    pub height_error: f64,
    /// Roll/pitch/yaw error limit, degrees. Also bounds the roll and pitch
    /// setpoints produced by the position loop.
    pub attitude_error: f64,
    /// North/east error limit, cm.
    pub position_error: f64,
    pub pwm_min: f64,
    pub pwm_max: f64,
    /// Integral cap per channel, as seconds of saturated error.
    pub windup_seconds: f64,
}

impl Default for ControllerLimits {
    fn default() -> Self {
        Self {
            height_error: 10.0,
            attitude_error: 15.0,
            position_error: 15.0,
            pwm_min: 1000.0,
            pwm_max: 2000.0,
            windup_seconds: 2.0,
        }
    }
}

impl ControllerLimits {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.pwm_min < self.pwm_max) {
            return Err("pwm_min must be below pwm_max".into());
        }
        if [self.height_error, self.attitude_error, self.position_error, self.windup_seconds]
            .iter()
            .any(|v| !(*v > 0.0))
        {
            return Err("controller error limits must be positive".into());
        }
        Ok(())
    }

    pub fn error_limit(&self, ch: Channel) -> f64 {
        match ch {
            Channel::Roll | Channel::Pitch | Channel::Yaw => self.attitude_error,
            Channel::Height => self.height_error,
            Channel::North | Channel::East => self.position_error,
        }
    }
}

/// PWM commands for the six motors, microseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotorCommands(pub [f64; MOTORS]);

impl MotorCommands {
    pub fn uniform(u: f64) -> Self {
        Self([u; MOTORS])
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / MOTORS as f64
    }

    pub fn any_at_or_above(&self, u: f64) -> bool {
        self.0.iter().any(|&m| m >= u)
    }

    pub fn any_at_limit(&self, limits: &ControllerLimits) -> bool {
        self.0.iter().any(|&m| m >= limits.pwm_max || m <= limits.pwm_min)
    }
}

/// Linear hex-X mixer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mixer {
    pub hover_base: f64,
    pub pwm_min: f64,
    pub pwm_max: f64,
}

impl Mixer {
    pub fn mix(&self, d_phi: f64, d_theta: f64, d_psi: f64, d_t: f64) -> MotorCommands {
        let mut u = [0.0; MOTORS];
        for (m, out) in u.iter_mut().enumerate() {
            let raw = self.hover_base
                + d_t
                + roll_coefficient(m) * d_phi
                + pitch_coefficient(m) * d_theta
                + MOTOR_SPIN[m] * d_psi;
            *out = if raw.is_nan() { self.pwm_min } else { raw.clamp(self.pwm_min, self.pwm_max) };
        }
        MotorCommands(u)
    }
}

/// All six PID gain triples, decoded from an 18-gene genome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CascadeGains(pub [PidGains; 6]);

impl CascadeGains {
    pub const GENES: usize = 18;

    pub fn from_genome(genome: &Genome) -> Option<Self> {
        if genome.len() != Self::GENES {
            return None;
        }
        let mut g = [PidGains::default(); 6];
        for (i, pid) in g.iter_mut().enumerate() {
            *pid = PidGains { kp: genome[3 * i], ki: genome[3 * i + 1], kd: genome[3 * i + 2] };
        }
        Some(Self(g))
    }

    pub fn to_genome(&self) -> Genome {
        self.0.iter().flat_map(|p| [p.kp, p.ki, p.kd]).collect::<Vec<_>>().into()
    }

    pub fn get(&self, ch: Channel) -> &PidGains {
        &self.0[ch.index()]
    }
}

/// The intermediate quantities of one cascade tick, useful for logging and
/// tests.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CascadeOutput {
    pub phi_sp: f64,
    pub theta_sp: f64,
    pub d_phi: f64,
    pub d_theta: f64,
    pub d_psi: f64,
    pub d_t: f64,
}

#[derive(Clone, Debug)]
pub struct Cascade {
    gains: CascadeGains,
    states: [PidState; 6],
    limits: ControllerLimits,
    mixer: Mixer,
}

impl Cascade {
    pub fn new(gains: CascadeGains, limits: ControllerLimits, hover_base: f64) -> Self {
        Self {
            gains,
            states: [PidState::default(); 6],
            mixer: Mixer { hover_base, pwm_min: limits.pwm_min, pwm_max: limits.pwm_max },
            limits,
        }
    }

    pub fn states(&self) -> &[PidState; 6] {
        &self.states
    }

    pub fn mixer(&self) -> &Mixer {
        &self.mixer
    }

    fn pid(&mut self, ch: Channel, raw_error: f64, dt: f64) -> f64 {
        let l = self.limits.error_limit(ch);
        let e = limit_error(raw_error, l);
        let cap = l * self.limits.windup_seconds;
        self.states[ch.index()].step(e, dt, self.gains.get(ch), cap)
    }

    /// One control tick: estimate and waypoint in, six motor commands out.
    pub fn step(&mut self, est: &SensorEstimate, wp: &Waypoint, dt: f64) -> (MotorCommands, CascadeOutput) {
        let l_att = self.limits.attitude_error;

        // Outer loop, world frame: tilt (degrees) toward north and east.
        let tilt_n = self.pid(Channel::North, wp.p_n - est.p_n, dt);
        let tilt_e = self.pid(Channel::East, wp.p_e - est.p_e, dt);
        let (s, c) = est.psi.to_radians().sin_cos();
        // Nose-down pitch accelerates forward, right roll accelerates right.
        let phi_sp = (wp.phi + (-tilt_n * s + tilt_e * c)).clamp(-l_att, l_att);
        let theta_sp = (wp.theta - (tilt_n * c + tilt_e * s)).clamp(-l_att, l_att);

        let d_phi = self.pid(Channel::Roll, phi_sp - est.phi, dt);
        let d_theta = self.pid(Channel::Pitch, theta_sp - est.theta, dt);
        let d_psi = self.pid(Channel::Yaw, wrap_angle(wp.psi - est.psi), dt);
        let d_t = self.pid(Channel::Height, wp.h - est.h, dt);

        let out = CascadeOutput { phi_sp, theta_sp, d_phi, d_theta, d_psi, d_t };
        (self.mixer.mix(d_phi, d_theta, d_psi, d_t), out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DT: f64 = 1.0 / 400.0;

    fn mixer() -> Mixer {
        Mixer { hover_base: 1500.0, pwm_min: 1000.0, pwm_max: 2000.0 }
    }

    fn at(wp: &Waypoint) -> SensorEstimate {
        SensorEstimate { p_n: wp.p_n, p_e: wp.p_e, h: wp.h, psi: wp.psi, ..Default::default() }
    }

    #[test]
    fn zero_error_zero_output() {
        let mut s = PidState::default();
        let g = PidGains { kp: 3.0, ki: 2.0, kd: 1.0 };
        for _ in 0..1000 {
            assert_eq!(s.step(0.0, DT, &g, 10.0), 0.0);
        }
    }

    #[test]
    fn proportional_only() {
        let mut s = PidState::default();
        assert_eq!(s.step(3.0, DT, &PidGains { kp: 2.0, ki: 0.0, kd: 0.0 }, 10.0), 6.0);
    }

    #[test]
    fn integral_of_unit_error_over_one_second() {
        let mut s = PidState::default();
        let g = PidGains { kp: 0.0, ki: 1.0, kd: 0.0 };
        let mut out = 0.0;
        for _ in 0..400 {
            out = s.step(1.0, DT, &g, 10.0);
        }
        assert!((out - 1.0).abs() < 0.01, "{out}");
    }

    #[test]
    fn first_derivative_is_zero_then_difference_quotient() {
        let mut s = PidState::default();
        let g = PidGains { kp: 0.0, ki: 0.0, kd: 1.0 };
        assert_eq!(s.step(5.0, DT, &g, 10.0), 0.0);
        assert!((s.step(6.0, DT, &g, 10.0) - 400.0).abs() < 1e-9);
    }

    #[test]
    fn windup_is_capped() {
        let mut s = PidState::default();
        let g = PidGains { kp: 0.0, ki: 1.0, kd: 0.0 };
        for _ in 0..100_000 {
            s.step(15.0, DT, &g, 30.0);
        }
        assert_eq!(s.integral, 30.0);
    }

    #[test]
    fn error_limiting() {
        assert_eq!(limit_error(5.0, 10.0), 5.0);
        assert_eq!(limit_error(40.0, 15.0), 15.0);
        assert_eq!(limit_error(-40.0, 15.0), -15.0);
    }

    #[test]
    fn mixer_coefficients_sum_to_zero() {
        let a: f64 = (0..MOTORS).map(roll_coefficient).sum();
        let b: f64 = (0..MOTORS).map(pitch_coefficient).sum();
        let s: f64 = MOTOR_SPIN.iter().sum();
        assert!(a.abs() < 1e-12 && b.abs() < 1e-12 && s == 0.0);
    }

    #[test]
    fn neutral_mix_is_hover() {
        assert_eq!(mixer().mix(0.0, 0.0, 0.0, 0.0), MotorCommands::uniform(1500.0));
    }

    #[test]
    fn yaw_mix_is_antisymmetric() {
        let u = mixer().mix(0.0, 0.0, 40.0, 0.0).0;
        for m in 0..MOTORS {
            let expected = 1500.0 + 40.0 * MOTOR_SPIN[m];
            assert_eq!(u[m], expected);
        }
    }

    #[test]
    fn mixer_clamps() {
        let u = mixer().mix(0.0, 0.0, 0.0, 1000.0);
        assert_eq!(u, MotorCommands::uniform(2000.0));
        let u = mixer().mix(0.0, 0.0, 0.0, -1000.0);
        assert_eq!(u, MotorCommands::uniform(1000.0));
    }

    #[test]
    fn roll_command_raises_left_side() {
        // Positive roll (right side down) needs more thrust on the left.
        let u = mixer().mix(100.0, 0.0, 0.0, 0.0).0;
        assert!(u[4] > 1500.0 && u[1] < 1500.0);
    }

    #[test]
    fn cascade_at_waypoint_hovers() {
        let genome = Genome::new((0..18).map(|i| 1.0 + i as f64).collect());
        let mut c = Cascade::new(CascadeGains::from_genome(&genome).unwrap(), ControllerLimits::default(), 1500.0);
        let wp = Waypoint { p_n: 3.0, p_e: -2.0, h: 10.0, psi: 40.0, ..Default::default() };
        for _ in 0..2000 {
            let (u, _) = c.step(&at(&wp), &wp, DT);
            assert_eq!(u, MotorCommands::uniform(1500.0));
        }
    }

    #[test]
    fn yaw_error_wraps_across_180() {
        let mut g = [PidGains::default(); 6];
        g[Channel::Yaw.index()].kp = 1.0;
        let mut c =
            Cascade::new(CascadeGains(g), ControllerLimits { attitude_error: 90.0, ..Default::default() }, 1500.0);
        let wp = Waypoint { psi: -170.0, ..Default::default() };
        let est = SensorEstimate { psi: 170.0, ..Default::default() };
        let (_, out) = c.step(&est, &wp, DT);
        assert!((out.d_psi - 20.0).abs() < 1e-9, "{}", out.d_psi);
    }

    #[test]
    fn position_error_saturates_before_pid() {
        let mut g = [PidGains::default(); 6];
        g[Channel::North.index()].kp = 0.5;
        let mut c = Cascade::new(CascadeGains(g), ControllerLimits::default(), 1500.0);
        let wp = Waypoint { p_n: 50.0, ..Default::default() };
        let (_, out) = c.step(&SensorEstimate::default(), &wp, DT);
        // 15 cm saturated error times kp, as nose-down pitch.
        assert!((out.theta_sp + 7.5).abs() < 1e-12, "{}", out.theta_sp);
    }

    #[test]
    fn position_setpoints_clamped() {
        let mut g = [PidGains::default(); 6];
        g[Channel::North.index()].kp = 10.0;
        g[Channel::East.index()].kp = 10.0;
        let mut c = Cascade::new(CascadeGains(g), ControllerLimits::default(), 1500.0);
        let wp = Waypoint { p_n: 50.0, p_e: 50.0, ..Default::default() };
        let (_, out) = c.step(&SensorEstimate::default(), &wp, DT);
        assert_eq!(out.theta_sp, -15.0);
        assert_eq!(out.phi_sp, 15.0);
    }

    proptest! {
        #[test]
        fn motors_always_within_pwm(d in prop::array::uniform4(-1e6f64..1e6)) {
            let u = mixer().mix(d[0], d[1], d[2], d[3]);
            prop_assert!(u.0.iter().all(|m| (1000.0..=2000.0).contains(m)));
        }

        #[test]
        fn cascade_invariant_under_full_turn(
            genes in prop::collection::vec(0.0f64..30.0, 18),
            psi in -180.0f64..180.0,
            psi_sp in -180.0f64..180.0,
            pn in -20.0f64..20.0,
            phi in -10.0f64..10.0,
        ) {
            let gains = CascadeGains::from_genome(&Genome::new(genes)).unwrap();
            let mut a = Cascade::new(gains, ControllerLimits::default(), 1500.0);
            let mut b = a.clone();
            let wp = Waypoint { psi: psi_sp, h: 10.0, ..Default::default() };
            let wp2 = Waypoint { psi: psi_sp + 360.0, ..wp };
            let est = SensorEstimate { psi, p_n: pn, phi, h: 8.0, ..Default::default() };
            let est2 = SensorEstimate { psi: psi + 360.0, ..est };
            for _ in 0..3 {
                let (ua, _) = a.step(&est, &wp, DT);
                let (ub, _) = b.step(&est2, &wp2, DT);
                for m in 0..MOTORS {
                    prop_assert!((ua.0[m] - ub.0[m]).abs() < 1e-6);
                }
            }
        }
    }
}
