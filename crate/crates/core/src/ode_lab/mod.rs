//! Planar saddle ODEs with bounded perturbations: trapping and escape near
//! the stagnation point, the sector-curve construction of a decaying
//! trajectory, and partial sums of reciprocals.

pub mod decay;
pub mod perturbation;
pub mod reciprocal;
pub mod snapshot;
pub mod system;
pub mod trapping;

pub use decay::{
    axis_crossing, evolve_curve, find_decaying_trajectory, in_omega_minus, in_omega_plus, in_s1, in_s2, is_simple,
    CurveEvolutionState, DecayReport, DecayVerdict, LegReport, CURVE_MAX_SEG, LEG,
};
pub use perturbation::{Perturbation, TrigPolynomial, TrigTerm};
pub use reciprocal::{
    min_reciprocal_sum, partial_sums_csv, reciprocal_partial_sums, reciprocal_partial_sums_of, reciprocal_sum,
    PartialSumRow,
};
pub use snapshot::SnapshotPerturbation;
pub use system::{integrate_saddle, CheckDomain, PerturbedSaddleSystem, Trajectory, Variant, MAX_DT};
pub use trapping::{initial_point, trapping_escape_check, Adversary, TrapEscapeReport};
