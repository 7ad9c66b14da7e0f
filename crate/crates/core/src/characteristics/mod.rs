//! Lagrangian tools: off-grid velocity, particle and curve tracing, level-curve
//! extraction and the area bookkeeping of superlevel sets near a saddle.

mod clip;
mod contour;
mod sn;
mod trace;
pub(crate) mod velocity;

pub use clip::{clip_to_box, AbBox};
pub use contour::{extract_level_curve, extract_level_curve_refined, AbWindow};
pub use sn::{pixel_component, sn_accounting, sn_accounting_csv, sn_crosscheck_csv, sn_record, PixelComponent, SnFlag, SnRecord};
pub use trace::{advect_polyline, trace, trace_with, FlowSense};
pub use velocity::{
    velocity_sample, ExactProvider, FieldProvider, SnapshotProvider, StaticProvider, VelocityGrid,
};
