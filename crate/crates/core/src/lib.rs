//! Normal-(G1,G2) composed distributions and the Normal-Weibull-Weibull
//! (NWW) model.
//!
//! The class has cdf F(x) = Φ(G₁/(1−G₁)) − Φ(log[1−G₂]) for two baseline
//! cdfs G₁, G₂. This crate provides evaluation, series-based moments,
//! acceptance-rejection sampling, maximum likelihood with analytic score and
//! observed information, a bias/MSE simulation harness, and goodness-of-fit
//! comparison against Normal, Weibull and two-component mixture models.
//!
//! Batch loops run on rayon when the default `parallel` feature is enabled
//! and fall back to plain iteration otherwise; see [`parallel::Exec`].

pub mod baselines;
pub mod composed;
pub mod error;
pub mod gof;
pub mod inference;
pub mod montecarlo;
pub mod parallel;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod series;
pub mod roots;
pub mod sampling;
pub mod special;

pub use baselines::{Baseline, DerivOrder, DerivTable, Normal, Support, Weibull};
pub use composed::{ComposedModel, NwwModel};
pub use error::{Error, Result};
pub use parallel::Exec;
pub use params::ParamVector;
