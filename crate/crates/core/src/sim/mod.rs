//! Simplified rigid-body hexacopter on a tethered test rig.
//!
//! The vehicle is a point mass with a diagonal inertia tensor, six
//! fixed-pitch rotors in a hex-X layout, linear aerodynamic drag relative to
//! the surrounding air, and a semi-implicit Euler integrator at the control
//! rate. Tethers are modelled as hard clamps on tilt and yaw plus a soft
//! spring at the edge of the flight volume. Units follow the rig's
//! conventions: centimetres, degrees, seconds.

mod sensor;
mod wind;

pub use sensor::{Sensor, SensorConfig, SensorEstimate};
pub use wind::{wind_at, WindModel, WindVector};

use serde::{Deserialize, Serialize};

use crate::pid::{pitch_coefficient, roll_coefficient, MotorCommands, MOTORS, MOTOR_SPIN};

pub const CONTROL_RATE_HZ: f64 = 400.0;
pub const DT: f64 = 1.0 / CONTROL_RATE_HZ;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// North / east position, cm.
    pub p_n: f64,
    pub p_e: f64,
    /// Height above the floor, cm.
    pub h: f64,
    /// Euler angles, degrees.
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    /// Body rates, degrees/s.
    pub omega_p: f64,
    pub omega_q: f64,
    pub omega_r: f64,
    /// Velocities, cm/s; `v_h` is positive upward.
    pub v_n: f64,
    pub v_e: f64,
    pub v_h: f64,
    pub on_ground: bool,
    pub t: f64,
}

impl VehicleState {
    /// Resting on the floor at the given horizontal position and heading.
    pub fn parked(p_n: f64, p_e: f64, psi: f64) -> Self {
        Self { p_n, p_e, psi, on_ground: true, ..Default::default() }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.p_n,
            self.p_e,
            self.h,
            self.phi,
            self.theta,
            self.psi,
            self.omega_p,
            self.omega_q,
            self.omega_r,
            self.v_n,
            self.v_e,
            self.v_h,
            self.t,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Physical constants of the vehicle and rig, SI unless noted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    pub mass: f64,
    pub arm_length: f64,
    /// Principal moments of inertia, kg m^2.
    pub inertia: [f64; 3],
    /// Thrust per PWM step above the idle command, N.
    pub thrust_coeff: f64,
    /// Reaction torque per newton of rotor thrust, m.
    pub yaw_torque_coeff: f64,
    /// Linear drag against the relative airflow, N per m/s.
    pub drag_coeff: f64,
    /// Rotational damping, N m s / rad.
    pub angular_damping: f64,
    pub gravity: f64,
    pub pwm_idle: f64,
    /// Tether limits, degrees.
    pub tilt_limit: f64,
    pub yaw_limit: f64,
    /// Flight volume half-width (cm) and ceiling (cm), and the tether spring
    /// engaged beyond them (N/m, N s/m).
    pub volume_half_width: f64,
    pub volume_ceiling: f64,
    pub tether_stiffness: f64,
    pub tether_damping: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        let mass = 1.5;
        let gravity = 9.81;
        Self {
            mass,
            arm_length: 0.25,
            inertia: [0.03, 0.03, 0.05],
            thrust_coeff: mass * gravity / (MOTORS as f64 * 500.0),
            yaw_torque_coeff: 0.02,
            drag_coeff: 0.15,
            angular_damping: 0.005,
            gravity,
            pwm_idle: 1000.0,
            tilt_limit: 60.0,
            yaw_limit: 160.0,
            volume_half_width: 30.0,
            volume_ceiling: 20.0,
            tether_stiffness: 60.0,
            tether_damping: 4.0,
        }
    }
}

impl VehicleParams {
    /// PWM command at which six rotors exactly carry the vehicle's weight.
    pub fn hover_pwm(&self) -> f64 {
        self.pwm_idle + self.mass * self.gravity / (MOTORS as f64 * self.thrust_coeff)
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            self.mass,
            self.arm_length,
            self.inertia[0],
            self.inertia[1],
            self.inertia[2],
            self.thrust_coeff,
            self.gravity,
            self.tilt_limit,
            self.yaw_limit,
            self.volume_half_width,
            self.volume_ceiling,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err("vehicle mass, geometry, inertia, thrust and limits must be positive".into());
        }
        if [self.drag_coeff, self.angular_damping, self.yaw_torque_coeff, self.tether_stiffness, self.tether_damping]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err("drag, damping and tether coefficients must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("non-finite motor command")]
    BadCommand,
    #[error("integration diverged at t = {0} s")]
    Diverged(f64),
}

/// The rig: vehicle parameters plus the heading the yaw tether is anchored
/// at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HexSim {
    pub params: VehicleParams,
    pub yaw_anchor: f64,
}

impl HexSim {
    pub fn new(params: VehicleParams, yaw_anchor: f64) -> Self {
        Self { params, yaw_anchor }
    }

    /// Advance one integration step of length `dt`.
    pub fn step(
        &self,
        s: &VehicleState,
        cmds: &MotorCommands,
        wind: WindVector,
        dt: f64,
    ) -> Result<VehicleState, SimError> {
        if cmds.0.iter().any(|u| !u.is_finite()) {
            return Err(SimError::BadCommand);
        }
        if !s.is_finite() {
            return Err(SimError::Diverged(s.t));
        }
        let p = &self.params;

        let thrusts: [f64; MOTORS] = std::array::from_fn(|m| p.thrust_coeff * (cmds.0[m] - p.pwm_idle).max(0.0));
        let thrust: f64 = thrusts.iter().sum();
        let tau = [
            p.arm_length * (0..MOTORS).map(|m| roll_coefficient(m) * thrusts[m]).sum::<f64>(),
            p.arm_length * (0..MOTORS).map(|m| pitch_coefficient(m) * thrusts[m]).sum::<f64>(),
            p.yaw_torque_coeff * (0..MOTORS).map(|m| MOTOR_SPIN[m] * thrusts[m]).sum::<f64>(),
        ];

        let (phi, theta, psi) = (s.phi.to_radians(), s.theta.to_radians(), s.psi.to_radians());
        let (sphi, cphi) = phi.sin_cos();
        let (sth, cth) = theta.sin_cos();
        let (spsi, cpsi) = psi.sin_cos();

        // Translational dynamics in SI.
        let v = [s.v_n / 100.0, s.v_e / 100.0, s.v_h / 100.0];
        let w = [wind.north / 100.0, wind.east / 100.0];
        let pos = [s.p_n / 100.0, s.p_e / 100.0, s.h / 100.0];
        let t_over_m = thrust / p.mass;
        let mut acc = [
            -t_over_m * (cphi * sth * cpsi + sphi * spsi) + p.drag_coeff * (w[0] - v[0]) / p.mass,
            -t_over_m * (cphi * sth * spsi - sphi * cpsi) + p.drag_coeff * (w[1] - v[1]) / p.mass,
            t_over_m * cphi * cth - p.gravity - p.drag_coeff * v[2] / p.mass,
        ];
        let half = p.volume_half_width / 100.0;
        for k in 0..2 {
            let excess = pos[k].abs() - half;
            if excess > 0.0 {
                acc[k] -= pos[k].signum() * (p.tether_stiffness * excess) / p.mass + p.tether_damping * v[k] / p.mass;
            }
        }
        let over = pos[2] - p.volume_ceiling / 100.0;
        if over > 0.0 {
            acc[2] -= (p.tether_stiffness * over + p.tether_damping * v[2].max(0.0)) / p.mass;
        }

        let mut next = *s;
        next.t = s.t + dt;

        if s.on_ground && acc[2] <= 0.0 {
            // Resting on the landing gear: held level and still.
            next.v_n = 0.0;
            next.v_e = 0.0;
            next.v_h = 0.0;
            next.omega_p = 0.0;
            next.omega_q = 0.0;
            next.omega_r = 0.0;
            next.phi = 0.0;
            next.theta = 0.0;
            next.h = 0.0;
            next.on_ground = true;
            return Ok(next);
        }

        let v_new = [v[0] + acc[0] * dt, v[1] + acc[1] * dt, v[2] + acc[2] * dt];
        let pos_new = [pos[0] + v_new[0] * dt, pos[1] + v_new[1] * dt, pos[2] + v_new[2] * dt];

        // Rotational dynamics.
        let om = [s.omega_p.to_radians(), s.omega_q.to_radians(), s.omega_r.to_radians()];
        let inertia = p.inertia;
        let i_om = [inertia[0] * om[0], inertia[1] * om[1], inertia[2] * om[2]];
        let gyro =
            [om[1] * i_om[2] - om[2] * i_om[1], om[2] * i_om[0] - om[0] * i_om[2], om[0] * i_om[1] - om[1] * i_om[0]];
        let om_new: [f64; 3] =
            std::array::from_fn(|k| om[k] + dt * (tau[k] - gyro[k] - p.angular_damping * om[k]) / inertia[k]);

        let tth = sth / cth;
        let phi_dot = om_new[0] + tth * (om_new[1] * sphi + om_new[2] * cphi);
        let theta_dot = om_new[1] * cphi - om_new[2] * sphi;
        let psi_dot = (om_new[1] * sphi + om_new[2] * cphi) / cth;

        next.phi = (phi + phi_dot * dt).to_degrees();
        next.theta = (theta + theta_dot * dt).to_degrees();
        next.psi = (psi + psi_dot * dt).to_degrees();
        next.omega_p = om_new[0].to_degrees();
        next.omega_q = om_new[1].to_degrees();
        next.omega_r = om_new[2].to_degrees();
        next.p_n = pos_new[0] * 100.0;
        next.p_e = pos_new[1] * 100.0;
        next.h = pos_new[2] * 100.0;
        next.v_n = v_new[0] * 100.0;
        next.v_e = v_new[1] * 100.0;
        next.v_h = v_new[2] * 100.0;
        next.on_ground = false;

        self.apply_tethers(&mut next);

        if next.h <= 0.0 {
            next.h = 0.0;
            next.v_n = 0.0;
            next.v_e = 0.0;
            next.v_h = 0.0;
            next.phi = 0.0;
            next.theta = 0.0;
            next.omega_p = 0.0;
            next.omega_q = 0.0;
            next.omega_r = 0.0;
            next.on_ground = true;
        }

        if !next.is_finite() {
            return Err(SimError::Diverged(next.t));
        }
        Ok(next)
    }

    fn apply_tethers(&self, s: &mut VehicleState) {
        let tilt = self.params.tilt_limit;
        if s.phi.abs() > tilt {
            s.phi = s.phi.clamp(-tilt, tilt);
            if s.omega_p * s.phi > 0.0 {
                s.omega_p = 0.0;
            }
        }
        if s.theta.abs() > tilt {
            s.theta = s.theta.clamp(-tilt, tilt);
            if s.omega_q * s.theta > 0.0 {
                s.omega_q = 0.0;
            }
        }
        let yaw = s.psi - self.yaw_anchor;
        let lim = self.params.yaw_limit;
        if yaw.abs() > lim {
            s.psi = self.yaw_anchor + yaw.clamp(-lim, lim);
            if s.omega_r * yaw > 0.0 {
                s.omega_r = 0.0;
            }
        }
    }
}
