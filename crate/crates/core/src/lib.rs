//! Bivariate discrete autoregressive models of order one for ordinal time
//! series.
//!
//! Each series follows its own DAR(1) recursion: with probability `phi` the
//! previous state is kept, otherwise a fresh innovation is drawn. The two
//! Bernoulli selection mechanisms are coupled through one copula and the two
//! innovations through another, which yields five nested variants ranging
//! from two independent chains to fully coupled mechanisms and innovations.
//!
//! The crate covers
//!
//! * copula CDFs and the rectangle construction of joint pmfs on discrete
//!   margins ([`copula`], [`jointdiscrete`]);
//! * exact conditional, stationary and moment formulas plus simulation
//!   ([`model`]);
//! * conditional maximum likelihood, standard errors, information criteria,
//!   likelihood-ratio tests and Kendall's tau ([`inference`]);
//! * Monte-Carlo and exact h-step forecasting ([`forecast`]).
//!
//! ```
//! use bdar::copula::CopulaSpec;
//! use bdar::jointdiscrete::CategoricalMarginal;
//! use bdar::model::{stationary_joint_pmf, Bdar1Params};
//!
//! let gumbel = CopulaSpec::gumbel(2.0)?;
//! let params = Bdar1Params::full(
//!     0.4,
//!     0.25,
//!     gumbel,
//!     gumbel,
//!     CategoricalMarginal::new(vec![0.15, 0.6, 0.25])?,
//!     CategoricalMarginal::new(vec![0.2, 0.3, 0.5])?,
//! )?;
//! let joint = stationary_joint_pmf(&params)?;
//! assert!((joint.row_sums()[1] - 0.6).abs() < 1e-12);
//! # Ok::<(), bdar::Error>(())
//! ```
// Negated comparisons on floats are deliberate throughout: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod copula;
mod error;
pub mod forecast;
pub mod inference;
pub mod jointdiscrete;
pub mod model;
pub mod rng;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/copulas.md")]
    mod copulas {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/forecasting.md")]
    mod forecasting {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
