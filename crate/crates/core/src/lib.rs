//! Benchmarking annealers with mirror-symmetric composite Ising problems.
//!
//! A random instance is embedded next to a mirror plane on a Chimera host,
//! copied onto the other side, and joined to its copy by mirror couplings.
//! The ground states of the composite then carry a known symmetry, so the
//! quality of a sampler can be judged without knowing the true ground state:
//! [`analysis`] measures how often the lowest-energy answers are symmetric
//! and how far they are from symmetric, column by column.

pub mod analysis;
pub mod embedding;
pub mod error;
pub mod harness;
pub mod instances;
pub mod ising;
pub mod rng;
pub mod solvers;
pub mod topology;

pub use embedding::{build_composite, CompositeConfig, CompositeProblem, MirrorSign};
pub use error::{Error, Result};
pub use instances::{generate_batch, generate_instance, InstanceBatch, IsingInstance, Region};
pub use solvers::{Backend, SampleSet, ScheduleConfig};
pub use topology::{ChimeraTopology, Coupler, MirrorPlane, QubitId};
