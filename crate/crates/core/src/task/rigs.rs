//! Idealised plants for checking the evaluation protocol without the
//! physics: one that always sits exactly on the active waypoint, and one
//! that never leaves the floor.

use super::{Plant, PlantFactory, Schedule, TaskConfig};
use crate::pid::MotorCommands;
use crate::sim::{SensorEstimate, SimError, CONTROL_RATE_HZ};

/// After every step the estimate equals the waypoint in force during that
/// step, with zero velocities and rates.
#[derive(Clone, Debug)]
pub struct IdealTracker {
    schedule: Schedule,
    step: usize,
    est: SensorEstimate,
}

impl IdealTracker {
    pub fn new(cfg: &TaskConfig) -> Self {
        let s = cfg.start;
        Self {
            schedule: cfg.schedule.clone(),
            step: 0,
            est: SensorEstimate { p_n: s.p_n, p_e: s.p_e, psi: s.psi, on_ground: true, ..Default::default() },
        }
    }
}

impl Plant for IdealTracker {
    fn estimate(&self) -> &SensorEstimate {
        &self.est
    }

    fn advance(&mut self, _cmds: &MotorCommands) -> Result<(), SimError> {
        let t = self.step as f64 / CONTROL_RATE_HZ;
        let wp = self.schedule.waypoint_at(t).map_err(|_| SimError::Diverged(t))?;
        self.step += 1;
        self.est = SensorEstimate {
            p_n: wp.p_n,
            p_e: wp.p_e,
            h: wp.h,
            phi: wp.phi,
            theta: wp.theta,
            psi: wp.psi,
            t: self.step as f64 / CONTROL_RATE_HZ,
            ..Default::default()
        };
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Ideal;

impl PlantFactory for Ideal {
    type Plant = IdealTracker;

    fn build(&self, cfg: &TaskConfig, _seed: u64) -> IdealTracker {
        IdealTracker::new(cfg)
    }
}

/// A vehicle that stays parked whatever it is commanded.
#[derive(Clone, Debug)]
pub struct GroundedPlant {
    est: SensorEstimate,
}

impl Plant for GroundedPlant {
    fn estimate(&self) -> &SensorEstimate {
        &self.est
    }

    fn advance(&mut self, _cmds: &MotorCommands) -> Result<(), SimError> {
        self.est.t += 1.0 / CONTROL_RATE_HZ;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Grounded;

impl PlantFactory for Grounded {
    type Plant = GroundedPlant;

    fn build(&self, cfg: &TaskConfig, _seed: u64) -> GroundedPlant {
        let s = cfg.start;
        GroundedPlant {
            est: SensorEstimate { p_n: s.p_n, p_e: s.p_e, psi: s.psi, on_ground: true, ..Default::default() },
        }
    }
}
