//! Flight evaluation: one controller flies the waypoint schedule against a
//! plant, accumulating per-cycle fitness until it completes or a health rule
//! terminates the flight. A completed flight is flown a second time from the
//! reset state and the two fitnesses are averaged.

use serde::{Deserialize, Serialize};

use super::{fitness_cycle, HealthConfig, HealthMonitor, Schedule, StateLimits, Termination, Waypoint};
use crate::de::{EvalError, Evaluation, Evaluator, Genome};
use crate::error::{Error, Result};
use crate::pid::{Cascade, CascadeGains, ControllerLimits, MotorCommands};
use crate::rng::{derive_seed, stream, Stream};
use crate::sim::{
    wind_at, HexSim, Sensor, SensorConfig, SensorEstimate, VehicleParams, VehicleState, WindModel, CONTROL_RATE_HZ,
};

/// Something that can be flown: it reports a state estimate and accepts
/// motor commands one control step at a time.
pub trait Plant {
    fn estimate(&self) -> &SensorEstimate;
    fn advance(&mut self, cmds: &MotorCommands) -> std::result::Result<(), crate::sim::SimError>;
}

/// Anything that maps an estimate and a waypoint to motor commands.
pub trait Controller {
    fn command(&mut self, est: &SensorEstimate, wp: &Waypoint, dt: f64) -> MotorCommands;
}

impl Controller for Cascade {
    fn command(&mut self, est: &SensorEstimate, wp: &Waypoint, dt: f64) -> MotorCommands {
        self.step(est, wp, dt).0
    }
}

/// Builds a fresh plant for each flight.
pub trait PlantFactory: Sync {
    type Plant: Plant;
    fn build(&self, cfg: &TaskConfig, seed: u64) -> Self::Plant;
}

/// Where the vehicle sits at reset: on the floor, heading `psi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartPose {
    pub p_n: f64,
    pub p_e: f64,
    pub psi: f64,
}

impl Default for StartPose {
    fn default() -> Self {
        Self { p_n: 0.0, p_e: 0.0, psi: 40.0 }
    }
}

/// Everything that defines the hover benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub schedule: Schedule,
    pub limits: StateLimits,
    pub health: HealthConfig,
    pub controller: ControllerLimits,
    pub vehicle: VehicleParams,
    pub wind: WindModel,
    pub sensor: SensorConfig,
    pub start: StartPose,
    /// Length of the seeding probe flight, s.
    pub probe_duration: f64,
    /// Longest continuous airborne stretch a probe must exceed, s.
    pub probe_airborne: f64,
    /// Give up seeding after this many probe flights.
    pub max_seed_attempts: usize,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            schedule: Schedule::default(),
            limits: StateLimits::default(),
            health: HealthConfig::default(),
            controller: ControllerLimits::default(),
            vehicle: VehicleParams::default(),
            wind: WindModel::default(),
            sensor: SensorConfig::default(),
            start: StartPose::default(),
            probe_duration: 5.0,
            probe_airborne: 0.2,
            max_seed_attempts: 10_000,
        }
    }
}

impl TaskConfig {
    pub fn dt(&self) -> f64 {
        1.0 / CONTROL_RATE_HZ
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            self.schedule.validate(),
            self.limits.validate(),
            self.health.validate(),
            self.controller.validate(),
            self.vehicle.validate(),
            self.wind.validate(),
            self.sensor.validate(),
        ];
        for c in checks {
            c.map_err(Error::Config)?;
        }
        if !(self.probe_duration > 0.0 && self.probe_airborne >= 0.0 && self.probe_airborne < self.probe_duration) {
            return Err(Error::Config("probe_airborne must lie in [0, probe_duration)".into()));
        }
        if self.max_seed_attempts == 0 {
            return Err(Error::Config("max_seed_attempts must be positive".into()));
        }
        Ok(())
    }
}

/// The simulated rig: rigid body, fan and sensor, with its own noise stream.
#[derive(Clone, Debug)]
pub struct SimPlant {
    sim: HexSim,
    sensor: Sensor,
    wind: WindModel,
    state: VehicleState,
    est: SensorEstimate,
    rng: Stream,
    dt: f64,
}

impl SimPlant {
    pub fn new(cfg: &TaskConfig, seed: u64) -> Self {
        let state = VehicleState::parked(cfg.start.p_n, cfg.start.p_e, cfg.start.psi);
        let mut sensor = Sensor::new(cfg.sensor, cfg.dt());
        let mut rng = stream(seed);
        let est = sensor.sense(&state, &mut rng);
        Self { sim: HexSim::new(cfg.vehicle, cfg.start.psi), sensor, wind: cfg.wind, state, est, rng, dt: cfg.dt() }
    }

    pub fn state(&self) -> &VehicleState {
        &self.state
    }
}

impl Plant for SimPlant {
    fn estimate(&self) -> &SensorEstimate {
        &self.est
    }

    fn advance(&mut self, cmds: &MotorCommands) -> std::result::Result<(), crate::sim::SimError> {
        let wind = wind_at(self.state.t, &self.wind);
        self.state = self.sim.step(&self.state, cmds, wind, self.dt)?;
        self.est = self.sensor.sense(&self.state, &mut self.rng);
        Ok(())
    }
}

/// The standard simulated plant.
#[derive(Clone, Copy, Debug, Default)]
pub struct Simulated;

impl PlantFactory for Simulated {
    type Plant = SimPlant;

    fn build(&self, cfg: &TaskConfig, seed: u64) -> SimPlant {
        SimPlant::new(cfg, seed)
    }
}

/// Outcome of a single flight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flight {
    pub fitness: f64,
    /// Flight time, s.
    pub duration: f64,
    pub steps: usize,
    pub termination: Termination,
    /// Longest continuous stretch without ground contact, s.
    pub longest_airborne: f64,
}

/// Outcome of a full evaluation (one or two flights).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub fitness: f64,
    pub duration: f64,
    pub termination: Termination,
    pub success: bool,
    pub first: Flight,
    pub second: Option<Flight>,
}

impl From<EvalResult> for Evaluation {
    fn from(r: EvalResult) -> Self {
        Evaluation { fitness: r.fitness, success: r.success }
    }
}

/// Fly `controller` against `plant` for at most `max_duration` seconds.
///
/// Each cycle: command from the current estimate, advance the plant, score
/// the new estimate against the waypoint in force, then run the health
/// checks.
pub fn fly<P: Plant, C: Controller>(plant: &mut P, controller: &mut C, cfg: &TaskConfig, max_duration: f64) -> Flight {
    let dt = cfg.dt();
    let max_steps = ((max_duration.min(cfg.schedule.duration())) / dt).round() as usize;
    let mut est = *plant.estimate();
    let first_wp = cfg.schedule.waypoints[0];
    let mut health = HealthMonitor::new(cfg.health, cfg.controller.pwm_max, &est, first_wp.psi, dt);
    let mut fitness = 0.0;
    let mut airborne = 0usize;
    let mut longest = 0usize;

    let finish = |fitness, steps: usize, termination, longest: usize| Flight {
        fitness,
        duration: steps as f64 * dt,
        steps,
        termination,
        longest_airborne: longest as f64 * dt,
    };

    for k in 0..max_steps {
        let t = k as f64 / CONTROL_RATE_HZ;
        let wp = cfg.schedule.waypoint_at(t).expect("step time inside schedule");

        let cmds = controller.command(&est, &wp, dt);
        if plant.advance(&cmds).is_err() {
            return finish(fitness, k, Termination::Diverged, longest);
        }
        est = *plant.estimate();
        fitness += fitness_cycle(&est, &wp, cmds.any_at_limit(&cfg.controller), &cfg.limits);

        if est.on_ground {
            airborne = 0;
        } else {
            airborne += 1;
            longest = longest.max(airborne);
        }
        if let Some(term) = health.check(&est, &cmds, wp.psi) {
            return finish(fitness, k + 1, term, longest);
        }
    }
    finish(fitness, max_steps, Termination::Completed, longest)
}

/// The hover benchmark as a DE fitness function over 18 PID gains.
#[derive(Clone, Debug, Default)]
pub struct HoverTask<F = Simulated> {
    pub cfg: TaskConfig,
    pub factory: F,
}

impl HoverTask<Simulated> {
    pub fn new(cfg: TaskConfig) -> Self {
        Self { cfg, factory: Simulated }
    }
}

impl<F: PlantFactory> HoverTask<F> {
    pub fn with_factory(cfg: TaskConfig, factory: F) -> Self {
        Self { cfg, factory }
    }

    fn controller(&self, gains: CascadeGains) -> Cascade {
        Cascade::new(gains, self.cfg.controller, self.cfg.vehicle.hover_pwm())
    }

    fn gains(genome: &Genome) -> std::result::Result<CascadeGains, EvalError> {
        CascadeGains::from_genome(genome)
            .ok_or_else(|| EvalError(format!("expected {} genes, got {}", CascadeGains::GENES, genome.len())))
    }

    /// One flight of `genome` with plant stream `seed`.
    pub fn flight(&self, genome: &Genome, seed: u64, max_duration: f64) -> std::result::Result<Flight, EvalError> {
        let mut plant = self.factory.build(&self.cfg, seed);
        let mut ctrl = self.controller(Self::gains(genome)?);
        Ok(fly(&mut plant, &mut ctrl, &self.cfg, max_duration))
    }

    /// Short seeding flight.
    pub fn probe(&self, genome: &Genome, seed: u64) -> std::result::Result<Flight, EvalError> {
        self.flight(genome, seed, self.cfg.probe_duration)
    }

    /// Full evaluation: fly the schedule; if the flight completes, fly it
    /// again from reset with a fresh noise stream and average.
    pub fn evaluate_genome(&self, genome: &Genome, seed: u64) -> std::result::Result<EvalResult, EvalError> {
        let full = self.cfg.schedule.duration();
        let first = self.flight(genome, derive_seed(seed, &[0]), full)?;
        if !first.termination.is_completed() {
            return Ok(EvalResult {
                fitness: first.fitness,
                duration: first.duration,
                termination: first.termination,
                success: false,
                first,
                second: None,
            });
        }
        let second = self.flight(genome, derive_seed(seed, &[1]), full)?;
        Ok(EvalResult {
            fitness: 0.5 * (first.fitness + second.fitness),
            duration: second.duration,
            termination: second.termination,
            success: second.termination.is_completed(),
            first,
            second: Some(second),
        })
    }
}

impl<F: PlantFactory> Evaluator for HoverTask<F> {
    fn evaluate(&self, genome: &Genome, seed: u64) -> std::result::Result<Evaluation, EvalError> {
        self.evaluate_genome(genome, seed).map(Evaluation::from)
    }
}
