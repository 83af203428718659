//! Imprecise-Dirichlet inference for categorical latent variables that are
//! only seen through noisy manifest channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`simplex`] — points, grids and Dirichlet densities on the probability
//!   simplex, plus the brute-force grid integrator used as an oracle.
//! * [`idm`] — Dirichlet-multinomial conjugacy, dataset marginals and the
//!   standard (fully observed) IDM predictive bounds.
//! * [`observation`] — emission matrices, latent likelihoods, the
//!   frequency-weight dynamic program, exact posterior predictives, bounds
//!   over the hyperparameter simplex and the learnability diagnosis.
//! * [`vacuity`] — numerical checks of the vacuity theorems with concentrating
//!   prior sequences and arbitrary bounded functions and likelihoods.
//! * [`manifest`] — the three manifest-side alternatives for a binary channel.
//!
//! Grid sweeps run on rayon when the `parallel` feature is enabled (the
//! default). Reductions are chunked deterministically, so results are
//! bit-identical with and without the feature.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod idm;
pub mod manifest;
pub mod observation;
pub mod parallel;
pub mod simplex;
pub mod special;
pub mod vacuity;

pub use error::{Error, Result};
pub use idm::{
    posterior_update, standard_idm_predictive_bounds, vacuous_prior_upper_predictive,
    BoundaryLimit, Extremizer, FrequencyVector, PredictiveBounds,
};
pub use observation::{
    frequency_weights, latent_likelihood, manifest_given_latent, posterior_predictive_at_t,
    predictive_bounds, vacuity_diagnosis, EmissionMatrix, FrequencyWeights, ManifestDataset,
    SearchSpec, VacuityDiagnosis,
};
pub use simplex::{
    dirichlet_log_density, dirichlet_mean, integrate_on_simplex, BoundaryPolicy, DirichletParams,
    SimplexGrid, SimplexPoint,
};
