//! Numerical checks that posterior expectations stay vacuous under
//! near-ignorance when the likelihood is positive where f is extremal.
//!
//! Limits over sequences of priors are replaced by trends over a fixed
//! schedule of sequence indices, with the grid resolution growing with the
//! index so that the concentrating density stays resolved.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::idm::{vacuous_prior_upper_predictive, FrequencyVector};
use crate::observation::{latent_likelihood, ManifestDataset};
use crate::parallel;
use crate::simplex::{
    dirichlet_log_density, grid_weighted_mean, DirichletParams, SimplexGrid, SimplexPoint,
};

/// Tolerance on declared bounds when checking a function on a grid.
pub const BOUND_SLACK: f64 = 1e-9;
/// Threshold above which a likelihood infimum counts as positive.
pub const POSITIVITY_THRESHOLD: f64 = 1e-9;
/// Distance to the extremum accepted by [`verify_theorem1`].
pub const VERDICT_TOLERANCE: f64 = 0.01;

type SimplexFn = Arc<dyn Fn(&SimplexPoint) -> f64 + Send + Sync>;

/// Which extremum of f is under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Max,
    Min,
}

/// A bounded function on the simplex with its declared range.
#[derive(Clone)]
pub struct BoundedFunction {
    evaluator: SimplexFn,
    min: f64,
    max: f64,
    argmax_hint: Option<SimplexPoint>,
    argmin_hint: Option<SimplexPoint>,
    description: String,
}

impl fmt::Debug for BoundedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundedFunction")
            .field("description", &self.description)
            .field("min", &self.min)
            .field("max", &self.max)
            .finish_non_exhaustive()
    }
}

impl BoundedFunction {
    pub fn new<F>(description: impl Into<String>, min: f64, max: f64, evaluator: F) -> Result<Self>
    where
        F: Fn(&SimplexPoint) -> f64 + Send + Sync + 'static,
    {
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::invalid(format!(
                "invalid declared range [{min}, {max}]"
            )));
        }
        Ok(BoundedFunction {
            evaluator: Arc::new(evaluator),
            min,
            max,
            argmax_hint: None,
            argmin_hint: None,
            description: description.into(),
        })
    }

    pub fn with_argmax(mut self, p: SimplexPoint) -> Self {
        self.argmax_hint = Some(p);
        self
    }

    pub fn with_argmin(mut self, p: SimplexPoint) -> Self {
        self.argmin_hint = Some(p);
        self
    }

    /// f(θ) = θ_j on the k-simplex.
    pub fn coordinate(k: usize, j: usize) -> Result<Self> {
        let argmax = SimplexPoint::vertex(k, j)?;
        let argmin = SimplexPoint::vertex(k, (j + 1) % k)?;
        Ok(
            BoundedFunction::new(format!("theta_{j}"), 0.0, 1.0, move |t| t[j])?
                .with_argmax(argmax)
                .with_argmin(argmin),
        )
    }

    /// f(θ) = ∏ θ_i^{n_i}: the probability of a future dataset with
    /// frequencies n. Its maximum is ∏ (n_i/n)^{n_i}, reached at the relative
    /// frequencies.
    pub fn monomial(exponents: &FrequencyVector) -> Result<Self> {
        let k = exponents.k();
        let max = vacuous_prior_upper_predictive(exponents)?;
        let n = exponents.n() as f64;
        let argmax =
            SimplexPoint::normalized(exponents.counts().iter().map(|&c| c as f64 / n).collect())?;
        let present = exponents.counts().iter().position(|&c| c > 0).unwrap_or(0);
        let argmin = SimplexPoint::vertex(k, (present + 1) % k)?;
        let counts = exponents.counts().to_vec();
        Ok(
            BoundedFunction::new(format!("monomial{exponents}"), 0.0, max, move |t| {
                counts
                    .iter()
                    .zip(t.coords())
                    .map(|(&c, x)| x.powi(c as i32))
                    .product()
            })?
            .with_argmax(argmax)
            .with_argmin(argmin),
        )
    }

    pub fn eval(&self, theta: &SimplexPoint) -> f64 {
        (self.evaluator)(theta)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn extremum(&self, side: Side) -> f64 {
        match side {
            Side::Max => self.max,
            Side::Min => self.min,
        }
    }

    pub fn argmax_hint(&self) -> Option<&SimplexPoint> {
        self.argmax_hint.as_ref()
    }

    pub fn argmin_hint(&self) -> Option<&SimplexPoint> {
        self.argmin_hint.as_ref()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Checks that every grid value lies within the declared range.
    pub fn check_on_grid(&self, grid: &SimplexGrid) -> Result<()> {
        let e = parallel::extrema(grid.points(), |t| self.eval(t)).ok_or_else(|| {
            Error::invalid(format!("{} is NaN on the whole grid", self.description))
        })?;
        if e.min < self.min - BOUND_SLACK || e.max > self.max + BOUND_SLACK {
            return Err(Error::invalid(format!(
                "{} takes values in [{}, {}], outside its declared range [{}, {}]",
                self.description, e.min, e.max, self.min, self.max
            )));
        }
        Ok(())
    }
}

/// A nonnegative likelihood on the simplex.
#[derive(Clone)]
pub struct LikelihoodFunction {
    evaluator: SimplexFn,
    description: String,
}

impl fmt::Debug for LikelihoodFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LikelihoodFunction")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

impl LikelihoodFunction {
    pub fn new<F>(description: impl Into<String>, evaluator: F) -> Self
    where
        F: Fn(&SimplexPoint) -> f64 + Send + Sync + 'static,
    {
        LikelihoodFunction {
            evaluator: Arc::new(evaluator),
            description: description.into(),
        }
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::invalid(format!(
                "likelihood constant {c} must be nonnegative"
            )));
        }
        Ok(LikelihoodFunction::new(format!("constant {c}"), move |_| c))
    }

    /// L(θ) = P(s | θ) for manifest observations through emission matrices.
    pub fn from_manifest(data: ManifestDataset) -> Self {
        let desc = format!("manifest likelihood of {} observations", data.n());
        LikelihoodFunction::new(desc, move |t| {
            latent_likelihood(&data, t).unwrap_or(f64::NAN)
        })
    }

    /// L(θ) = ∏ θ_i^{a_i}: a fully observed dataset.
    pub fn multinomial(counts: &FrequencyVector) -> Self {
        let c = counts.counts().to_vec();
        LikelihoodFunction::new(format!("multinomial{counts}"), move |t| {
            c.iter()
                .zip(t.coords())
                .map(|(&a, x)| x.powi(a as i32))
                .product()
        })
    }

    pub fn eval(&self, theta: &SimplexPoint) -> Result<f64> {
        let v = (self.evaluator)(theta);
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!(
                "{} evaluated to {v}, expected a nonnegative finite value",
                self.description
            )));
        }
        Ok(v)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

type Generator = Arc<dyn Fn(usize) -> Result<DirichletParams> + Send + Sync>;

/// A sequence of Dirichlet priors whose mean converges to `target`.
#[derive(Clone)]
pub struct ConcentratingSequence {
    generator: Generator,
    target: SimplexPoint,
    description: String,
}

impl fmt::Debug for ConcentratingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConcentratingSequence")
            .field("description", &self.description)
            .field("target", &self.target)
            .finish_non_exhaustive()
    }
}

/// t_n = (1 - k/n)·target + 1/n in every coordinate; interior for n > k.
fn shrunk_target(target: &SimplexPoint, index: usize) -> Result<SimplexPoint> {
    let k = target.k();
    if index <= k {
        return Err(Error::invalid(format!(
            "sequence index must exceed k = {k}, got {index}"
        )));
    }
    let n = index as f64;
    let w = 1.0 - k as f64 / n;
    SimplexPoint::normalized(target.coords().iter().map(|x| w * x + 1.0 / n).collect())
}

impl ConcentratingSequence {
    pub fn new<G>(description: impl Into<String>, target: SimplexPoint, generator: G) -> Self
    where
        G: Fn(usize) -> Result<DirichletParams> + Send + Sync + 'static,
    {
        ConcentratingSequence {
            generator: Arc::new(generator),
            target,
            description: description.into(),
        }
    }

    /// dir_{n, t_n} with t_n = (1 - k/n)·target + 1/n: strength grows with
    /// the index, so the prior concentrates on any target, interior or not.
    /// For k = 2 and target (1, 0) this is dir_{n, (1-1/n, 1/n)}.
    pub fn canonical(target: SimplexPoint) -> Self {
        let t = target.clone();
        ConcentratingSequence::new("s = n, t -> target", target, move |n| {
            DirichletParams::new(n as f64, shrunk_target(&t, n)?)
        })
    }

    /// dir_{s, t_n} with fixed s: stays inside one IDM set of priors.
    /// Concentrates only when the target is a vertex.
    pub fn fixed_strength(s: f64, target: SimplexPoint) -> Self {
        let t = target.clone();
        ConcentratingSequence::new(format!("s = {s}, t -> target"), target, move |n| {
            DirichletParams::new(s, shrunk_target(&t, n)?)
        })
    }

    pub fn at(&self, index: usize) -> Result<DirichletParams> {
        (self.generator)(index)
    }

    pub fn target(&self) -> &SimplexPoint {
        &self.target
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Sup-norm distance between the prior mean and the target at each index.
    pub fn mean_distances(&self, indices: &[usize]) -> Result<Vec<(usize, f64)>> {
        indices
            .iter()
            .map(|&n| Ok((n, self.at(n)?.t().distance_inf(&self.target))))
            .collect()
    }
}

/// Θ_δ = {θ : f(θ) ≥ f_max − δ} or Θ̃_δ = {θ : f(θ) ≤ f_min + δ}.
#[derive(Debug, Clone)]
pub struct DeltaSet {
    pub f: BoundedFunction,
    pub delta: f64,
    pub side: Side,
}

impl DeltaSet {
    pub fn new(f: BoundedFunction, delta: f64, side: Side) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid(format!(
                "delta must be positive, got {delta}"
            )));
        }
        Ok(DeltaSet { f, delta, side })
    }

    pub fn contains(&self, theta: &SimplexPoint) -> bool {
        let v = self.f.eval(theta);
        match self.side {
            Side::Max => v >= self.f.max() - self.delta,
            Side::Min => v <= self.f.min() + self.delta,
        }
    }
}

/// Prior mass of Θ_δ on the grid, normalised by the grid total of the
/// density so the discretisation constant cancels.
pub fn delta_set_mass(p: &DirichletParams, dset: &DeltaSet, grid: &SimplexGrid) -> Result<f64> {
    grid_weighted_mean(
        grid,
        |t| dirichlet_log_density(p, t),
        |t| if dset.contains(t) { 1.0 } else { 0.0 },
    )
}

/// E_p(f L) / E_p(L) on the grid.
pub fn posterior_ratio(
    p: &DirichletParams,
    likelihood: &LikelihoodFunction,
    f: &BoundedFunction,
    grid: &SimplexGrid,
) -> Result<f64> {
    grid_weighted_mean(
        grid,
        |t| Ok(dirichlet_log_density(p, t)? + likelihood.eval(t)?.ln()),
        |t| f.eval(t),
    )
}

/// E_p(f) on the grid.
pub fn prior_expectation(
    p: &DirichletParams,
    f: &BoundedFunction,
    grid: &SimplexGrid,
) -> Result<f64> {
    grid_weighted_mean(grid, |t| dirichlet_log_density(p, t), |t| f.eval(t))
}

/// Grid resolution as a function of the sequence index: max(base, per_index·n).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPlan {
    pub base: usize,
    pub per_index: usize,
}

impl GridPlan {
    /// m = max(2000, 20 n) for k = 2; m = max(200, n) for k = 3.
    pub fn for_k(k: usize) -> Self {
        match k {
            2 => GridPlan {
                base: 2000,
                per_index: 20,
            },
            _ => GridPlan {
                base: 200,
                per_index: 1,
            },
        }
    }

    pub fn resolution(&self, index: usize) -> usize {
        self.base.max(self.per_index * index)
    }

    pub fn grid(&self, k: usize, index: usize) -> Result<SimplexGrid> {
        if k > 3 {
            return Err(Error::SizeCap {
                what: "verification dimension k",
                actual: k,
                limit: 3,
            });
        }
        SimplexGrid::for_density(k, self.resolution(index))
    }
}

/// One schedule entry of a concentration experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub index: usize,
    pub resolution: usize,
    pub prior_expectation: f64,
    /// (δ, prior mass of the δ-set)
    pub masses: Vec<(f64, f64)>,
    pub posterior_ratio: Option<f64>,
}

/// Evaluates the prior expectation of f, the δ-set masses and (when a
/// likelihood is given) the posterior ratio for each index of the schedule.
pub fn concentration_trend(
    f: &BoundedFunction,
    likelihood: Option<&LikelihoodFunction>,
    seq: &ConcentratingSequence,
    side: Side,
    deltas: &[f64],
    schedule: &[usize],
    plan: GridPlan,
) -> Result<Vec<TrendRow>> {
    let k = seq.target().k();
    let sets: Vec<DeltaSet> = deltas
        .iter()
        .map(|&d| DeltaSet::new(f.clone(), d, side))
        .collect::<Result<_>>()?;
    schedule
        .iter()
        .map(|&index| {
            let p = seq.at(index)?;
            let grid = plan.grid(k, index)?;
            let masses = sets
                .iter()
                .map(|set| Ok((set.delta, delta_set_mass(&p, set, &grid)?)))
                .collect::<Result<Vec<_>>>()?;
            let ratio = likelihood
                .map(|l| posterior_ratio(&p, l, f, &grid))
                .transpose()?;
            Ok(TrendRow {
                index,
                resolution: grid.resolution(),
                prior_expectation: prior_expectation(&p, f, &grid)?,
                masses,
                posterior_ratio: ratio,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    pub side: Side,
    pub extremum: f64,
    pub rows: Vec<TrendRow>,
    pub final_ratio: f64,
    pub tolerance: f64,
    /// The final posterior ratio lies within `tolerance` of the extremum:
    /// the supremum (infimum) of posterior expectations stays vacuous.
    pub vacuous: bool,
}

fn infer_side(f: &BoundedFunction, target: &SimplexPoint) -> Result<Side> {
    let near = |hint: Option<&SimplexPoint>| {
        hint.is_some_and(|h| h.k() == target.k() && h.distance_inf(target) < 1e-9)
    };
    if near(f.argmax_hint()) {
        Ok(Side::Max)
    } else if near(f.argmin_hint()) {
        Ok(Side::Min)
    } else {
        Err(Error::invalid(format!(
            "sequence target is neither the argmax nor the argmin hint of {}",
            f.description()
        )))
    }
}

/// Drives a concentrating sequence toward an extremum of f and records
/// whether the posterior ratio follows it despite the data.
pub fn verify_theorem1(
    f: &BoundedFunction,
    likelihood: &LikelihoodFunction,
    seq: &ConcentratingSequence,
    schedule: &[usize],
    plan: GridPlan,
) -> Result<Theorem1Report> {
    if schedule.is_empty() {
        return Err(Error::invalid("schedule must not be empty"));
    }
    let side = infer_side(f, seq.target())?;
    let rows = concentration_trend(f, Some(likelihood), seq, side, &[0.1, 0.01], schedule, plan)?;
    let final_ratio = rows
        .last()
        .and_then(|r| r.posterior_ratio)
        .expect("likelihood supplied");
    let extremum = f.extremum(side);
    Ok(Theorem1Report {
        side,
        extremum,
        final_ratio,
        tolerance: VERDICT_TOLERANCE,
        vacuous: (final_ratio - extremum).abs() <= VERDICT_TOLERANCE,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiminfReport {
    /// (δ, grid infimum of L over the δ-set); `None` if no grid point is in the set.
    pub infima: Vec<(f64, Option<f64>)>,
    /// Estimate of c = lim_{δ→0} inf L over the δ-set.
    pub estimate: f64,
    pub positive: bool,
}

/// Grid estimate of c = lim_{δ→0} inf_{Θ_δ} L on the max side.
pub fn liminf_positivity_check(
    likelihood: &LikelihoodFunction,
    f: &BoundedFunction,
    deltas: &[f64],
    grid: &SimplexGrid,
) -> Result<LiminfReport> {
    liminf_positivity_check_on_side(likelihood, f, deltas, grid, Side::Max)
}

/// The sequence of infima counts as stabilised above zero when its last
/// value exceeds [`POSITIVITY_THRESHOLD`] and is at least half the one
/// before it.
pub fn liminf_positivity_check_on_side(
    likelihood: &LikelihoodFunction,
    f: &BoundedFunction,
    deltas: &[f64],
    grid: &SimplexGrid,
    side: Side,
) -> Result<LiminfReport> {
    if deltas.is_empty() {
        return Err(Error::invalid("need at least one delta"));
    }
    if deltas.iter().any(|d| !(*d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid(
            "deltas must be positive and strictly decreasing",
        ));
    }
    let values: Vec<f64> = parallel::map(grid.points(), |t| likelihood.eval(t))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut infima = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let set = DeltaSet::new(f.clone(), delta, side)?;
        let inf = grid
            .points()
            .iter()
            .zip(&values)
            .filter(|(t, _)| set.contains(t))
            .map(|(_, v)| *v)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.min(v)))
            });
        infima.push((delta, inf));
    }
    let observed: Vec<f64> = infima.iter().filter_map(|(_, v)| *v).collect();
    let estimate = *observed
        .last()
        .ok_or_else(|| Error::invalid("no grid point falls in any delta-set"))?;
    let stable = match observed.len() {
        0 | 1 => true,
        len => estimate >= 0.5 * observed[len - 2],
    };
    Ok(LiminfReport {
        infima,
        estimate,
        positive: estimate > POSITIVITY_THRESHOLD && stable,
    })
}
