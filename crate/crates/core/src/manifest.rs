//! Predicting through a binary channel from the manifest side.
//!
//! Three alternatives to modelling the latent chances directly:
//!
//! 1. a near-ignorance set of beta priors rescaled onto the attainable range
//!    [ε₁, 1−ε₂] of the manifest chance ξ₁;
//! 2. the standard IDM on ξ₁, inverted through the channel afterwards;
//! 3. the standard IDM on the manifest outcome, ignoring the latent level.
//!
//! The first stays vacuous on [ε₁, 1−ε₂], the second can leave [0, 1], the
//! third answers a different question.

use crate::error::{Error, Result};
use crate::idm::{standard_idm_predictive_bounds, FrequencyVector, PredictiveBounds};
use crate::observation::{
    bounds_for_model, frequency_weights, EmissionMatrix, LatentPredictive, ManifestDataset,
    SearchSpec,
};
use crate::simplex::DirichletParams;

/// A strictly diagonally dominant binary test: false-positive rate ε₁ and
/// false-negative rate ε₂, both in (0, 0.5).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryChannel {
    eps1: f64,
    eps2: f64,
}

impl BinaryChannel {
    pub fn new(eps1: f64, eps2: f64) -> Result<Self> {
        for (name, e) in [("eps1", eps1), ("eps2", eps2)] {
            if !(e > 0.0 && e < 0.5) {
                return Err(Error::invalid(format!("{name} = {e} must lie in (0, 0.5)")));
            }
        }
        Ok(BinaryChannel { eps1, eps2 })
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    /// 1 − ε₁ − ε₂, the slope of θ₁ ↦ ξ₁.
    pub fn gain(&self) -> f64 {
        1.0 - self.eps1 - self.eps2
    }

    /// Attainable range [ε₁, 1 − ε₂] of ξ₁.
    pub fn manifest_range(&self) -> (f64, f64) {
        (self.eps1, 1.0 - self.eps2)
    }

    pub fn emission(&self) -> EmissionMatrix {
        EmissionMatrix::binary_channel(self.eps1, self.eps2).expect("validated channel")
    }

    /// `positives` observations of outcome x₁ followed by `total − positives`
    /// of x₂.
    pub fn dataset(&self, positives: usize, total: usize) -> Result<ManifestDataset> {
        check_counts(positives, total)?;
        let rows: Vec<usize> = (0..total).map(|i| usize::from(i >= positives)).collect();
        ManifestDataset::with_shared(self.emission(), &rows)
    }
}

fn check_counts(positives: usize, total: usize) -> Result<()> {
    if positives > total {
        return Err(Error::invalid(format!(
            "positives ({positives}) exceed total ({total})"
        )));
    }
    Ok(())
}

/// ξ₁ = P(S = x₁), constrained to the channel's attainable range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifestChances {
    xi1: f64,
}

impl ManifestChances {
    pub fn new(channel: &BinaryChannel, xi1: f64) -> Result<Self> {
        let (lo, hi) = channel.manifest_range();
        if !(xi1 >= lo - 1e-12 && xi1 <= hi + 1e-12) {
            return Err(Error::invalid(format!("xi1 = {xi1} outside [{lo}, {hi}]")));
        }
        Ok(ManifestChances { xi1 })
    }

    pub fn xi1(&self) -> f64 {
        self.xi1
    }

    pub fn xi2(&self) -> f64 {
        1.0 - self.xi1
    }
}

/// ξ₁ = (1 − ε₂)·θ₁ + ε₁·(1 − θ₁).
pub fn latent_to_manifest_chance(channel: &BinaryChannel, theta1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta1) {
        return Err(Error::invalid(format!(
            "theta1 = {theta1} is not a probability"
        )));
    }
    Ok((1.0 - channel.eps2) * theta1 + channel.eps1 * (1.0 - theta1))
}

/// E(ξ₁ | s) when the prior on ξ₁ is the beta prior dir_{s,t} on θ₁ carried
/// through θ₁ = (ξ₁ − ε₁)/(1 − ε₁ − ε₂).
///
/// The likelihood ξ₁^{n₁}(1 − ξ₁)^{n−n₁} is, as a function of θ₁, exactly
/// the latent likelihood of n₁ positive and n − n₁ negative results through
/// the channel, so the θ-integral reduces to the conjugate mixture.
pub fn scaled_beta_posterior_expectation(
    channel: &BinaryChannel,
    positives: usize,
    total: usize,
    prior: &DirichletParams,
) -> Result<f64> {
    if prior.k() != 2 {
        return Err(Error::invalid("scaled-beta priors are binary"));
    }
    let data = channel.dataset(positives, total)?;
    let model = LatentPredictive::new(&frequency_weights(&data)?, prior.s())?;
    Ok(channel.eps1 + channel.gain() * model.at(prior.t(), 0))
}

/// Lower and upper E(ξ₁ | s) over the scaled-beta set with strength `s`.
pub fn scaled_beta_posterior_bounds(
    channel: &BinaryChannel,
    positives: usize,
    total: usize,
    s: f64,
    search: &SearchSpec,
) -> Result<PredictiveBounds> {
    let data = channel.dataset(positives, total)?;
    let model = LatentPredictive::new(&frequency_weights(&data)?, s)?;
    let latent = bounds_for_model(&model, 0, search)?;
    // ξ₁ is increasing in θ₁, so the extremizers carry over
    Ok(PredictiveBounds {
        lower: channel.eps1 + channel.gain() * latent.lower,
        upper: channel.eps1 + channel.gain() * latent.upper,
        argmin_t: latent.argmin_t,
        argmax_t: latent.argmax_t,
    })
}

/// A latent probability reconstructed by inverting the channel; may leave [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub value: f64,
    pub out_of_range: bool,
}

/// (P(S = x₁ | s) − ε₁)/(1 − ε₁ − ε₂), returned unclamped.
pub fn naive_reconstruction(channel: &BinaryChannel, manifest_value: f64) -> Reconstruction {
    let value = (manifest_value - channel.eps1) / channel.gain();
    Reconstruction {
        value,
        out_of_range: !(0.0..=1.0).contains(&value),
    }
}

/// Standard IDM bounds on the manifest chance, then inverted through the
/// channel: (reconstructed lower, reconstructed upper, manifest bounds).
pub fn naive_latent_bounds(
    channel: &BinaryChannel,
    positives: usize,
    total: usize,
    s: f64,
) -> Result<(Reconstruction, Reconstruction, ManifestLevelBounds)> {
    let manifest = direct_manifest_idm(positives, total, s)?;
    Ok((
        naive_reconstruction(channel, manifest.bounds.lower),
        naive_reconstruction(channel, manifest.bounds.upper),
        manifest,
    ))
}

/// Bounds on the next manifest outcome. Not a statement about the latent
/// variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestLevelBounds {
    pub bounds: PredictiveBounds,
}

impl ManifestLevelBounds {
    pub fn level(&self) -> &'static str {
        "manifest"
    }
}

/// Standard IDM on the manifest outcomes: (n₁/(n+s), (n₁+s)/(n+s)).
pub fn direct_manifest_idm(positives: usize, total: usize, s: f64) -> Result<ManifestLevelBounds> {
    check_counts(positives, total)?;
    let freq = FrequencyVector::new(vec![positives as u32, (total - positives) as u32]);
    Ok(ManifestLevelBounds {
        bounds: standard_idm_predictive_bounds(s, &freq, 0)?,
    })
}
