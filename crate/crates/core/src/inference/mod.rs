//! Conditional maximum-likelihood estimation and model comparison.

mod criteria;
mod fit;
mod kendall;
mod likelihood;
pub mod optim;
mod reparam;
mod replicate;

pub use criteria::{chi_square_sf, information_criteria, likelihood_ratio_test, lrt_from_logliks, LrtResult};
pub use fit::{embed_params, fit, fit_variants, fit_with_starts, FitOptions, FitReport};
pub use kendall::{kendall_tau, serial_kendall_tau};
pub use likelihood::{conditional_loglik, dar1_conditional_loglik, TransitionCounts};
pub use reparam::{ParamLayout, PHI_MAX};
pub use replicate::{quantile, run_replicates, ParamSummary, ReplicateRecord, ReplicateStudy};
