//! Surface coefficients, integrated forces, flow diagnostics and time-series
//! statistics.

pub mod fields;
pub mod io;
pub mod plot;
pub mod stats;
pub mod surface;

pub use fields::{q_criterion, q_criterion_field, streamwise_projection};
pub use stats::{
    convergence_time, histogram, is_uniform, psd, resample_uniform, running_average, Convergence, Histogram, Spectrum,
};
pub use surface::{force_coefficients, surface_coefficients, FlowReference, ForceCoefficients, SurfaceDistribution};
