//! Spectral vorticity solver on the 2-torus together with the Lagrangian and
//! ODE tooling used to study gradient growth near hyperbolic stagnation points.

pub mod characteristics;
pub mod diagnostics;
pub mod error;
pub mod evolution;
mod fft;
pub mod field_io;
pub mod initial_data;
pub mod ode_lab;
pub mod oracle;
pub mod polyline;
pub mod spectral;

pub use characteristics::{sn_accounting, FieldProvider, FlowSense, SnRecord};
pub use diagnostics::DiagnosticsRecord;
pub use error::{EglError, Result};
pub use evolution::{run, run_with, Checkpoint, RunOptions, RunOutcome, RunSummary, SimState, TimeStep};
pub use initial_data::{SaddleFrame, Symmetry, Theorem1Params, Theorem2Params};
pub use ode_lab::{PerturbedSaddleSystem, Perturbation, Trajectory, Variant};
pub use polyline::{Point, Polyline};
pub use spectral::{GridField, MeanPolicy, SpectralField};
