//! Self-adaptive DE/rand/1/bin with rate restarts, plus a simulated
//! hexacopter hover benchmark for comparing restart strategies.
//!
//! The crate is organised bottom-up:
//!
//! * [`de`] holds the optimiser: genomes, lognormal rate self-adaptation,
//!   donor construction, binomial crossover, greedy selection and the
//!   generation loop.
//! * [`restart`] holds the stagnation counters and rate reinitialisation at
//!   individual or population scope.
//! * [`pid`] is the two-loop cascaded PID controller and hex-X mixer.
//! * [`sim`] is the rigid-body hexacopter, the oscillating fan, and the
//!   multirate sensor model.
//! * [`task`] is the hover evaluation protocol: waypoints, per-cycle fitness,
//!   health monitoring, re-evaluation and population seeding.
//! * [`stats`] has the Mann-Whitney U test and run summaries.
//! * [`runner`] drives whole experiments and writes CSV logs.
//!
//! Child evaluations inside a generation, and independent repeats, fan out
//! over rayon when the `parallel` feature is on (the default). Every random
//! draw comes from a stream derived from the run seed, so results do not
//! depend on the execution backend.

pub mod de;
pub mod error;
pub mod exec;
pub mod pid;
pub mod restart;
pub mod rng;
pub mod runner;
pub mod sim;
pub mod stats;
pub mod task;

pub use error::{Error, Result};
pub use exec::Execution;
