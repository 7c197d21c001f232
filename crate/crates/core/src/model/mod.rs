//! The DAR(1) and BDAR(1) processes.

mod dar1;
mod moments;
mod params;
mod pmf;
mod series;
mod simulate;

pub use dar1::{dar1_conditional_pmf, dar1_simulate};
pub use moments::{cross_moments, cross_moments_with_values, CrossMoments};
pub use params::{Bdar1Params, Variant};
pub use pmf::{joint_conditional_pmf, stationary_joint_pmf, TransitionKernel};
pub use series::BivariateOrdinalSeries;
pub use simulate::{simulate, simulate_from, InitialState};
