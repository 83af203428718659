//! Dirichlet-multinomial conjugacy and the standard IDM bounds.

use std::fmt;

use crate::error::{Error, Result};
use crate::simplex::{DirichletParams, SimplexPoint};
use crate::special::ln_rising_factorial;

/// Outcome counts a_1, ..., a_k of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrequencyVector {
    counts: Vec<u32>,
}

impl FrequencyVector {
    pub fn new(counts: Vec<u32>) -> Self {
        FrequencyVector { counts }
    }

    pub fn zeros(k: usize) -> Self {
        FrequencyVector { counts: vec![0; k] }
    }

    /// Frequencies of an ordered sequence of outcome indices.
    pub fn from_outcomes(k: usize, outcomes: &[usize]) -> Result<Self> {
        let mut counts = vec![0u32; k];
        for &o in outcomes {
            *counts.get_mut(o).ok_or_else(|| {
                Error::invalid(format!("outcome {o} out of range for k = {k}"))
            })? += 1;
        }
        Ok(FrequencyVector { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn n(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn get(&self, j: usize) -> u32 {
        self.counts[j]
    }

    pub(crate) fn increment(&mut self, j: usize) {
        self.counts[j] += 1;
    }

    pub fn add(&self, other: &FrequencyVector) -> Result<FrequencyVector> {
        if self.k() != other.k() {
            return Err(Error::invalid("frequency vectors of different length"));
        }
        Ok(FrequencyVector {
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A point of the closed simplex reached only as a limit of hyperparameters
/// in the open simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLimit {
    pub point: Vec<f64>,
    pub description: String,
}

impl BoundaryLimit {
    /// t_j → 1, every other coordinate → 0.
    pub fn toward_vertex(k: usize, j: usize) -> Self {
        let mut point = vec![0.0; k];
        point[j] = 1.0;
        BoundaryLimit {
            point,
            description: format!("t_{j} -> 1"),
        }
    }

    /// t_j → 0 with the remaining mass spread evenly.
    pub fn toward_opposite_face(k: usize, j: usize) -> Self {
        let share = 1.0 / (k - 1) as f64;
        let point = (0..k).map(|h| if h == j { 0.0 } else { share }).collect();
        BoundaryLimit {
            point,
            description: format!("t_{j} -> 0"),
        }
    }
}

/// Where a bound was reached: at a hyperparameter inside the open simplex,
/// or only in the limit toward its boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum Extremizer {
    Attained(SimplexPoint),
    Limit(BoundaryLimit),
}

impl Extremizer {
    pub fn point(&self) -> &[f64] {
        match self {
            Extremizer::Attained(p) => p.coords(),
            Extremizer::Limit(l) => &l.point,
        }
    }

    pub fn is_limit(&self) -> bool {
        matches!(self, Extremizer::Limit(_))
    }
}

/// Lower and upper probability together with the extremizing hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveBounds {
    pub lower: f64,
    pub upper: f64,
    pub argmin_t: Extremizer,
    pub argmax_t: Extremizer,
}

impl PredictiveBounds {
    pub(crate) fn checked(self) -> Result<Self> {
        let ok = (0.0..=1.0).contains(&self.lower)
            && (0.0..=1.0).contains(&self.upper)
            && self.lower <= self.upper;
        if ok {
            Ok(self)
        } else {
            Err(Error::Degenerate(format!(
                "bounds out of order: lower {} upper {}",
                self.lower, self.upper
            )))
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// log P(x) for an ordered dataset with frequencies `freq` under dir_{s,t}:
/// Σ_h log (s t_h)^(a_h) − log s^(n), with rising factorials and the empty
/// product equal to one.
pub fn log_marginal(prior: &DirichletParams, freq: &FrequencyVector) -> Result<f64> {
    if prior.k() != freq.k() {
        return Err(Error::invalid(format!(
            "dimension mismatch: prior k = {}, frequencies k = {}",
            prior.k(),
            freq.k()
        )));
    }
    let numerator: f64 = prior
        .alphas()
        .zip(freq.counts())
        .map(|(alpha, &a)| ln_rising_factorial(alpha, a))
        .sum();
    Ok(numerator - ln_rising_factorial(prior.s(), freq.n()))
}

/// Conjugate update of dir_{s,t} with a fully observed dataset.
///
/// Returns the posterior dir_{n+s, (a+st)/(n+s)} and log P(x), the
/// probability of the ordered dataset (no multinomial coefficient).
pub fn posterior_update(
    prior: &DirichletParams,
    freq: &FrequencyVector,
) -> Result<(DirichletParams, f64)> {
    let log_p = log_marginal(prior, freq)?;
    let n = freq.n() as f64;
    let s_post = n + prior.s();
    let t_post: Vec<f64> = prior
        .alphas()
        .zip(freq.counts())
        .map(|(alpha, &a)| (a as f64 + alpha) / s_post)
        .collect();
    let posterior = DirichletParams::new(s_post, SimplexPoint::normalized(t_post)?)?;
    Ok((posterior, log_p))
}

/// IDM bounds for the next outcome x_j after observing `freq` directly:
/// a_j/(n+s) as t_j → 0 and (a_j+s)/(n+s) as t_j → 1.
pub fn standard_idm_predictive_bounds(
    s: f64,
    freq: &FrequencyVector,
    j: usize,
) -> Result<PredictiveBounds> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::invalid(format!(
            "prior strength must be positive, got {s}"
        )));
    }
    let k = freq.k();
    if k < 2 || j >= k {
        return Err(Error::invalid(format!("outcome {j} invalid for k = {k}")));
    }
    let n = freq.n() as f64;
    let a = freq.get(j) as f64;
    PredictiveBounds {
        lower: a / (n + s),
        upper: (a + s) / (n + s),
        argmin_t: Extremizer::Limit(BoundaryLimit::toward_opposite_face(k, j)),
        argmax_t: Extremizer::Limit(BoundaryLimit::toward_vertex(k, j)),
    }
    .checked()
}

/// Maximum over the simplex of ∏ θ_i^{n_i'}, i.e. ∏ (n_i'/n')^{n_i'} with
/// 0⁰ = 1. This is the vacuous upper probability of a future dataset with
/// frequencies `freq_next`; the vacuous lower is 0.
pub fn vacuous_prior_upper_predictive(freq_next: &FrequencyVector) -> Result<f64> {
    let n = freq_next.n();
    if n == 0 {
        return Err(Error::invalid(
            "future dataset must contain at least one outcome",
        ));
    }
    let n = n as f64;
    Ok(freq_next
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| (c as f64 / n).powi(c as i32))
        .product())
}
