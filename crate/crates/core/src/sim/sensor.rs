use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use super::VehicleState;
use crate::task::wrap_angle;

/// State estimate as seen by the controller, fitness function and health
/// monitor. Same channels and units as [`VehicleState`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SensorEstimate {
    pub p_n: f64,
    pub p_e: f64,
    pub h: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub omega_p: f64,
    pub omega_q: f64,
    pub omega_r: f64,
    pub v_n: f64,
    pub v_e: f64,
    pub v_h: f64,
    pub on_ground: bool,
    pub t: f64,
}

impl SensorEstimate {
    /// Noise-free snapshot of every channel.
    pub fn exact(s: &VehicleState) -> Self {
        Self {
            p_n: s.p_n,
            p_e: s.p_e,
            h: s.h,
            phi: s.phi,
            theta: s.theta,
            psi: s.psi,
            omega_p: s.omega_p,
            omega_q: s.omega_q,
            omega_r: s.omega_r,
            v_n: s.v_n,
            v_e: s.v_e,
            v_h: s.v_h,
            on_ground: s.on_ground,
            t: s.t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub noise_enabled: bool,
    /// Per-sample standard deviations: cm for position and height, degrees
    /// for attitude.
    pub position_noise: f64,
    pub height_noise: f64,
    pub attitude_noise: f64,
    pub heading_noise: f64,
    /// Correlation time of the filtered attitude error, s. Zero gives white
    /// noise.
    pub attitude_noise_tau: f64,
    /// Refresh periods in control steps.
    pub position_period: u32,
    pub height_period: u32,
    /// Samples used by the velocity regression.
    pub regression_window: usize,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            noise_enabled: true,
            position_noise: 0.25,
            height_noise: 0.25,
            attitude_noise: 0.2,
            heading_noise: 1.0,
            attitude_noise_tau: 2.0,
            // 400 / 7 = 57 Hz, the closest whole-step period to 60 Hz.
            position_period: 7,
            height_period: 20,
            regression_window: 5,
        }
    }
}

impl SensorConfig {
    pub fn noiseless() -> Self {
        Self { noise_enabled: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.position_period == 0 || self.height_period == 0 {
            return Err("sensor refresh periods must be at least one step".into());
        }
        if self.regression_window < 2 {
            return Err("velocity regression needs at least two samples".into());
        }
        let sd =
            [self.position_noise, self.height_noise, self.attitude_noise, self.heading_noise, self.attitude_noise_tau];
        if sd.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err("sensor noise parameters must be non-negative".into());
        }
        Ok(())
    }
}

/// Least-squares slope of `(t, x)` samples; zero with fewer than two.
pub(crate) fn regression_slope<'a>(samples: impl Iterator<Item = &'a (f64, f64)> + Clone) -> f64 {
    let n = samples.clone().count();
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let (st, sx) = samples.clone().fold((0.0, 0.0), |(a, b), (t, x)| (a + t, b + x));
    let (tm, xm) = (st / nf, sx / nf);
    let (num, den) =
        samples.fold((0.0, 0.0), |(num, den), (t, x)| (num + (t - tm) * (x - xm), den + (t - tm) * (t - tm)));
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Multirate state estimator.
///
/// Attitude refreshes every step, position every `position_period` steps,
/// height every `height_period` steps; between refreshes a channel holds its
/// last value. Velocities are regression slopes over the most recent
/// position (or height) samples, and angular rates are differences of
/// consecutive attitude estimates.
#[derive(Clone, Debug)]
pub struct Sensor {
    cfg: SensorConfig,
    dt: f64,
    step: u64,
    est: SensorEstimate,
    north: VecDeque<(f64, f64)>,
    east: VecDeque<(f64, f64)>,
    height: VecDeque<(f64, f64)>,
    attitude_error: [f64; 3],
    prev_attitude: Option<[f64; 3]>,
}

impl Sensor {
    pub fn new(cfg: SensorConfig, dt: f64) -> Self {
        Self {
            cfg,
            dt,
            step: 0,
            est: SensorEstimate::default(),
            north: VecDeque::with_capacity(cfg.regression_window),
            east: VecDeque::with_capacity(cfg.regression_window),
            height: VecDeque::with_capacity(cfg.regression_window),
            attitude_error: [0.0; 3],
            prev_attitude: None,
        }
    }

    pub fn config(&self) -> &SensorConfig {
        &self.cfg
    }

    pub fn latest(&self) -> &SensorEstimate {
        &self.est
    }

    fn push(buf: &mut VecDeque<(f64, f64)>, cap: usize, sample: (f64, f64)) {
        if buf.len() == cap {
            buf.pop_front();
        }
        buf.push_back(sample);
    }

    fn gauss<R: Rng + ?Sized>(&self, rng: &mut R, sd: f64) -> f64 {
        if self.cfg.noise_enabled && sd > 0.0 {
            sd * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        }
    }

    fn advance_attitude_error<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let sds = [self.cfg.attitude_noise, self.cfg.attitude_noise, self.cfg.heading_noise];
        let tau = self.cfg.attitude_noise_tau;
        let first = self.step == 0;
        for (k, sd) in sds.into_iter().enumerate() {
            let fresh = self.gauss(rng, sd);
            self.attitude_error[k] = if tau == 0.0 || first {
                fresh
            } else {
                // First-order Gauss-Markov process with stationary std `sd`.
                let a = (-self.dt / tau).exp();
                a * self.attitude_error[k] + (1.0 - a * a).sqrt() * fresh
            };
        }
    }

    /// Produce the estimate for the current control step.
    pub fn sense<R: Rng + ?Sized>(&mut self, state: &VehicleState, rng: &mut R) -> SensorEstimate {
        let k = self.step;
        let w = self.cfg.regression_window;

        self.advance_attitude_error(rng);
        let att = [
            state.phi + self.attitude_error[0],
            state.theta + self.attitude_error[1],
            state.psi + self.attitude_error[2],
        ];
        let rates = match self.prev_attitude {
            Some(prev) => {
                [(att[0] - prev[0]) / self.dt, (att[1] - prev[1]) / self.dt, wrap_angle(att[2] - prev[2]) / self.dt]
            }
            None => [0.0; 3],
        };
        self.prev_attitude = Some(att);
        self.est.phi = att[0];
        self.est.theta = att[1];
        self.est.psi = att[2];
        self.est.omega_p = rates[0];
        self.est.omega_q = rates[1];
        self.est.omega_r = rates[2];

        if k.is_multiple_of(self.cfg.position_period as u64) {
            let n = state.p_n + self.gauss(rng, self.cfg.position_noise);
            let e = state.p_e + self.gauss(rng, self.cfg.position_noise);
            Self::push(&mut self.north, w, (state.t, n));
            Self::push(&mut self.east, w, (state.t, e));
            self.est.p_n = n;
            self.est.p_e = e;
            self.est.v_n = regression_slope(self.north.iter());
            self.est.v_e = regression_slope(self.east.iter());
        }
        if k.is_multiple_of(self.cfg.height_period as u64) {
            let h = state.h + self.gauss(rng, self.cfg.height_noise);
            Self::push(&mut self.height, w, (state.t, h));
            self.est.h = h;
            self.est.v_h = regression_slope(self.height.iter());
        }

        self.est.on_ground = state.on_ground;
        self.est.t = state.t;
        self.step += 1;
        self.est
    }
}
