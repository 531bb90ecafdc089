//! Error metrics, convergence orders and truncation-error fits.

mod envelope;
mod errors;
mod orders;
mod truncation;

pub use envelope::{envelope_bound, fit_envelope, EnvelopeFit};
pub use errors::{error_series, march_final_states, spatial_floor, two_mesh_error, two_mesh_series, ErrorSeries};
pub use orders::{expected_orders, fit_orders, ConvergenceReport, ExpectedOrders};
pub use truncation::{
    r1_fit_series, truncation_r1_oracle, truncation_r3_oracle, BoundFit, BoundFitSeries, SpatialFits,
};
