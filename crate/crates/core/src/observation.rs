//! Latent categorical variables observed through known emission matrices.
//!
//! Given manifest observations s = (s_1, ..., s_n) and a prior dir_{s,t} on
//! the latent chances, the posterior predictive of the next latent outcome is
//! a convex combination over latent frequency vectors a:
//!
//! ```text
//! P(X_{n+1} = x_j | s) = Σ_a  W(a) P(a) / Σ_b W(b) P(b)  ·  (a_j + s t_j) / (n + s)
//! ```
//!
//! where W(a) sums P(s | x) over all ordered latent sequences x with
//! frequencies a, and P(a) is the ordered-dataset marginal under the prior.
//! W depends only on the data, so it is computed once by a forward dynamic
//! program over frequency vectors; each hyperparameter t then costs
//! O(#terms · k).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::idm::{BoundaryLimit, Extremizer, FrequencyVector, PredictiveBounds};
use crate::parallel;
use crate::simplex::{BoundaryPolicy, DirichletParams, SimplexGrid, SimplexPoint};

/// Column sums must equal one within this tolerance.
pub const COLUMN_TOLERANCE: f64 = 1e-12;
/// Longest dataset accepted by the frequency-weight dynamic program.
pub const MAX_DP_OBSERVATIONS: usize = 20;
/// Largest latent alphabet accepted by the dynamic program.
pub const MAX_DP_OUTCOMES: usize = 4;
/// Longest dataset accepted by brute-force enumeration.
pub const MAX_ENUMERATION_OBSERVATIONS: usize = 10;
/// Hyperparameter clamp used by the default bound search.
pub const DEFAULT_T_CLAMP: f64 = 1e-6;

/// Conditional probabilities λ_{hj} = P(S = s_h | X = x_j); rows are manifest
/// outcomes, columns latent outcomes, every column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl EmissionMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::invalid(
                "emission matrix rows have different lengths",
            ));
        }
        EmissionMatrix::build(n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    /// Build from columns: column j is the distribution of S given X = x_j.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n_cols = columns.len();
        let n_rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(Error::invalid(
                "emission matrix columns have different lengths",
            ));
        }
        let mut entries = vec![0.0; n_rows * n_cols];
        for (j, col) in columns.iter().enumerate() {
            for (h, v) in col.iter().enumerate() {
                entries[h * n_cols + j] = *v;
            }
        }
        EmissionMatrix::build(n_rows, n_cols, entries)
    }

    fn build(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols < 2 {
            return Err(Error::invalid(format!(
                "emission matrix must have at least one row and two columns, got {rows}x{cols}"
            )));
        }
        if let Some(bad) = entries
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::invalid(format!(
                "emission entry {bad} is not in [0, 1]"
            )));
        }
        for j in 0..cols {
            let sum: f64 = (0..rows).map(|h| entries[h * cols + j]).sum();
            if (sum - 1.0).abs() > COLUMN_TOLERANCE {
                return Err(Error::ColumnNotStochastic { column: j, sum });
            }
        }
        Ok(EmissionMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Perfect observation: S = X.
    pub fn identity(k: usize) -> Result<Self> {
        EmissionMatrix::from_rows(
            (0..k)
                .map(|h| (0..k).map(|j| if h == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    /// Two-outcome test with false-positive rate `eps1` and false-negative
    /// rate `eps2`. Row 0 is the positive result, column 0 the condition
    /// being tested for:
    ///
    /// ```text
    /// | 1-eps2   eps1   |
    /// | eps2     1-eps1 |
    /// ```
    pub fn binary_channel(eps1: f64, eps2: f64) -> Result<Self> {
        EmissionMatrix::from_rows(vec![vec![1.0 - eps2, eps1], vec![eps2, 1.0 - eps1]])
    }

    pub fn manifest_outcomes(&self) -> usize {
        self.rows
    }

    pub fn latent_outcomes(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, h: usize, j: usize) -> f64 {
        self.entries[h * self.cols + j]
    }

    pub fn row(&self, h: usize) -> &[f64] {
        &self.entries[h * self.cols..(h + 1) * self.cols]
    }

    pub fn all_positive(&self) -> bool {
        self.entries.iter().all(|v| *v > 0.0)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|h| self.row(h).to_vec()).collect()
    }
}

/// One manifest observation: which emission matrix produced it and the
/// observed row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub matrix: usize,
    pub row: usize,
}

/// An ordered sequence of manifest observations, each with its own emission
/// matrix (matrices may be shared between observations).
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestDataset {
    matrices: Vec<EmissionMatrix>,
    observations: Vec<Observation>,
}

impl ManifestDataset {
    pub fn new(matrices: Vec<EmissionMatrix>, observations: Vec<Observation>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::invalid("dataset needs at least one emission matrix"))?;
        let k = first.latent_outcomes();
        if let Some(m) = matrices.iter().position(|m| m.latent_outcomes() != k) {
            return Err(Error::invalid(format!(
                "emission matrix {m} has {} latent outcomes, expected {k}",
                matrices[m].latent_outcomes()
            )));
        }
        for (i, obs) in observations.iter().enumerate() {
            let matrix = matrices.get(obs.matrix).ok_or_else(|| {
                Error::invalid(format!(
                    "observation {i} refers to missing matrix {}",
                    obs.matrix
                ))
            })?;
            if obs.row >= matrix.manifest_outcomes() {
                return Err(Error::invalid(format!(
                    "observation {i}: row {} out of range ({} manifest outcomes)",
                    obs.row,
                    matrix.manifest_outcomes()
                )));
            }
            if matrix.row(obs.row).iter().all(|v| *v == 0.0) {
                return Err(Error::invalid(format!(
                    "observation {i}: row {} has probability zero under every latent outcome",
                    obs.row
                )));
            }
        }
        Ok(ManifestDataset {
            matrices,
            observations,
        })
    }

    /// All observations share one emission matrix.
    pub fn with_shared(matrix: EmissionMatrix, rows: &[usize]) -> Result<Self> {
        let observations = rows
            .iter()
            .map(|&row| Observation { matrix: 0, row })
            .collect();
        ManifestDataset::new(vec![matrix], observations)
    }

    pub fn k(&self) -> usize {
        self.matrices[0].latent_outcomes()
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn matrices(&self) -> &[EmissionMatrix] {
        &self.matrices
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Emission row λ_{h_i ·} of observation i.
    pub fn emission_row(&self, i: usize) -> &[f64] {
        let obs = self.observations[i];
        self.matrices[obs.matrix].row(obs.row)
    }
}

/// P(s | x) = ∏_i λ_{h_i x_i}.
pub fn manifest_given_latent(data: &ManifestDataset, assignment: &[usize]) -> Result<f64> {
    if assignment.len() != data.n() {
        return Err(Error::invalid(format!(
            "assignment has length {}, dataset has {} observations",
            assignment.len(),
            data.n()
        )));
    }
    let k = data.k();
    let mut product = 1.0;
    for (i, &j) in assignment.iter().enumerate() {
        if j >= k {
            return Err(Error::invalid(format!(
                "latent outcome {j} out of range for k = {k}"
            )));
        }
        product *= data.emission_row(i)[j];
    }
    Ok(product)
}

/// L(θ) = P(s | θ) = ∏_i Σ_j λ_{h_i j} θ_j.
pub fn latent_likelihood(data: &ManifestDataset, theta: &SimplexPoint) -> Result<f64> {
    if theta.k() != data.k() {
        return Err(Error::invalid(format!(
            "theta has k = {}, dataset has k = {}",
            theta.k(),
            data.k()
        )));
    }
    Ok((0..data.n())
        .map(|i| {
            data.emission_row(i)
                .iter()
                .zip(theta.coords())
                .map(|(l, t)| l * t)
                .sum::<f64>()
        })
        .product())
}

/// W(a) = Σ_{x : freq(x) = a} P(s | x), listed in lexicographic order of a.
/// Frequency vectors with zero weight are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyWeights {
    k: usize,
    n: usize,
    entries: Vec<(FrequencyVector, f64)>,
}

impl FrequencyWeights {
    fn from_map(k: usize, n: usize, map: BTreeMap<FrequencyVector, f64>) -> Self {
        FrequencyWeights {
            k,
            n,
            entries: map.into_iter().filter(|(_, w)| *w > 0.0).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(FrequencyVector, f64)] {
        &self.entries
    }

    pub fn weight(&self, a: &FrequencyVector) -> f64 {
        self.entries
            .binary_search_by(|(b, _)| b.cmp(a))
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    /// Σ_a W(a) ∏ θ_h^{a_h}, which equals the latent likelihood at θ.
    pub fn likelihood_at(&self, theta: &SimplexPoint) -> f64 {
        self.entries
            .iter()
            .map(|(a, w)| {
                w * a
                    .counts()
                    .iter()
                    .zip(theta.coords())
                    .map(|(&c, t)| t.powi(c as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

/// Forward dynamic program over positions; the state is the running
/// frequency vector of the latent prefix.
pub fn frequency_weights(data: &ManifestDataset) -> Result<FrequencyWeights> {
    let (n, k) = (data.n(), data.k());
    if n > MAX_DP_OBSERVATIONS {
        return Err(Error::SizeCap {
            what: "observations",
            actual: n,
            limit: MAX_DP_OBSERVATIONS,
        });
    }
    if k > MAX_DP_OUTCOMES {
        return Err(Error::SizeCap {
            what: "latent outcomes",
            actual: k,
            limit: MAX_DP_OUTCOMES,
        });
    }
    let mut states: BTreeMap<FrequencyVector, f64> = BTreeMap::new();
    states.insert(FrequencyVector::zeros(k), 1.0);
    for i in 0..n {
        let row = data.emission_row(i);
        let mut next: BTreeMap<FrequencyVector, f64> = BTreeMap::new();
        for (a, w) in &states {
            for (j, &lambda) in row.iter().enumerate() {
                if lambda == 0.0 {
                    continue;
                }
                let mut b = a.clone();
                b.increment(j);
                *next.entry(b).or_insert(0.0) += w * lambda;
            }
        }
        states = next;
    }
    Ok(FrequencyWeights::from_map(k, n, states))
}

/// Brute-force W(a) by enumerating all k^n latent sequences. Kept as an
/// independent check of [`frequency_weights`].
pub fn frequency_weights_by_enumeration(data: &ManifestDataset) -> Result<FrequencyWeights> {
    let (n, k) = (data.n(), data.k());
    if n > MAX_ENUMERATION_OBSERVATIONS {
        return Err(Error::SizeCap {
            what: "observations (enumeration)",
            actual: n,
            limit: MAX_ENUMERATION_OBSERVATIONS,
        });
    }
    let mut map: BTreeMap<FrequencyVector, f64> = BTreeMap::new();
    let mut assignment = vec![0usize; n];
    loop {
        let p = manifest_given_latent(data, &assignment)?;
        if p > 0.0 {
            *map.entry(FrequencyVector::from_outcomes(k, &assignment)?)
                .or_insert(0.0) += p;
        }
        // odometer increment
        let mut pos = 0;
        while pos < n {
            assignment[pos] += 1;
            if assignment[pos] < k {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }
    Ok(FrequencyWeights::from_map(k, n, map))
}

/// Posterior predictive of the next latent outcome as a function of the
/// hyperparameter t, for fixed data and prior strength.
#[derive(Debug, Clone)]
pub struct LatentPredictive {
    k: usize,
    n: usize,
    s: f64,
    terms: Vec<(Vec<u32>, f64)>,
}

impl LatentPredictive {
    pub fn new(weights: &FrequencyWeights, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!(
                "prior strength must be positive, got {s}"
            )));
        }
        if weights.entries().is_empty() {
            return Err(Error::Degenerate(
                "every latent frequency vector has zero weight".into(),
            ));
        }
        Ok(LatentPredictive {
            k: weights.k(),
            n: weights.n(),
            s,
            terms: weights
                .entries()
                .iter()
                .map(|(a, w)| (a.counts().to_vec(), w.ln()))
                .collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// log W(a) + log Π_h (s t_h)^(a_h); the common denominator s^(n) is dropped.
    fn log_term_weights(&self, t: &[f64]) -> Vec<f64> {
        // cumulative[h][c] = Σ_{l=1..c} ln(s t_h + l - 1)
        let cumulative: Vec<Vec<f64>> = t
            .iter()
            .map(|&th| {
                let alpha = self.s * th;
                let mut acc = 0.0;
                let mut col = Vec::with_capacity(self.n + 1);
                col.push(0.0);
                for l in 0..self.n {
                    acc += (alpha + l as f64).ln();
                    col.push(acc);
                }
                col
            })
            .collect();
        self.terms
            .iter()
            .map(|(a, lw)| {
                lw + a
                    .iter()
                    .enumerate()
                    .map(|(h, &c)| cumulative[h][c as usize])
                    .sum::<f64>()
            })
            .collect()
    }

    fn mixture(&self, log_weights: &[f64], fraction: impl Fn(&[u32]) -> f64) -> f64 {
        let peak = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((a, _), lw) in self.terms.iter().zip(log_weights) {
            let w = (lw - peak).exp();
            num += w * fraction(a);
            den += w;
        }
        num / den
    }

    fn check_t(&self, t: &[f64]) -> Result<()> {
        if t.len() != self.k {
            return Err(Error::invalid(format!(
                "t has length {}, expected {}",
                t.len(),
                self.k
            )));
        }
        Ok(())
    }

    /// P(X_{n+1} = x_j | s) at hyperparameter t (interior of the simplex).
    pub fn at(&self, t: &SimplexPoint, j: usize) -> f64 {
        let lw = self.log_term_weights(t.coords());
        let (s, n, tj) = (self.s, self.n as f64, t[j]);
        self.mixture(&lw, |a| (a[j] as f64 + s * tj) / (n + s))
    }

    /// Predictive distribution over all k outcomes at t.
    pub fn distribution(&self, t: &SimplexPoint) -> Vec<f64> {
        let lw = self.log_term_weights(t.coords());
        (0..self.k)
            .map(|j| {
                let (s, n, tj) = (self.s, self.n as f64, t[j]);
                self.mixture(&lw, |a| (a[j] as f64 + s * tj) / (n + s))
            })
            .collect()
    }

    /// Limit of the predictive as t approaches the closed-simplex point
    /// `target` along the segment from the centroid.
    ///
    /// Near the limit each prior marginal behaves like C(a)·η^{d(a)}, where
    /// d(a) counts outcomes with a_h > 0 whose target coordinate is zero.
    /// Only the lowest-order terms survive; their fractions are evaluated at
    /// the target.
    pub fn limit(&self, target: &[f64], j: usize) -> Result<f64> {
        self.check_t(target)?;
        let approach = 1.0 / self.k as f64;
        let mut best_order = u32::MAX;
        let mut leading: Vec<(usize, f64)> = Vec::new();
        for (idx, (a, lw)) in self.terms.iter().enumerate() {
            let mut order = 0u32;
            let mut coef = *lw;
            for (h, &c) in a.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let alpha = self.s * target[h];
                if target[h] == 0.0 {
                    // first factor s·t_h vanishes linearly, the rest tend to (l-1)
                    order += 1;
                    coef += (self.s * approach).ln();
                    coef += (1..c).map(|l| (l as f64).ln()).sum::<f64>();
                } else {
                    coef += (0..c).map(|l| (alpha + l as f64).ln()).sum::<f64>();
                }
            }
            if order < best_order {
                best_order = order;
                leading.clear();
            }
            if order == best_order {
                leading.push((idx, coef));
            }
        }
        let peak = leading
            .iter()
            .map(|(_, c)| *c)
            .fold(f64::NEG_INFINITY, f64::max);
        let (s, n) = (self.s, self.n as f64);
        let mut num = 0.0;
        let mut den = 0.0;
        for (idx, coef) in leading {
            let w = (coef - peak).exp();
            let a = &self.terms[idx].0;
            num += w * (a[j] as f64 + s * target[j]) / (n + s);
            den += w;
        }
        Ok(num / den)
    }
}

/// Exact P(X_{n+1} = x_j | s) under the single prior `prior`.
pub fn posterior_predictive_at_t(
    data: &ManifestDataset,
    prior: &DirichletParams,
    j: usize,
) -> Result<f64> {
    if prior.k() != data.k() {
        return Err(Error::invalid(format!(
            "prior has k = {}, dataset has k = {}",
            prior.k(),
            data.k()
        )));
    }
    if j >= data.k() {
        return Err(Error::invalid(format!(
            "outcome {j} out of range for k = {}",
            data.k()
        )));
    }
    let model = LatentPredictive::new(&frequency_weights(data)?, prior.s())?;
    Ok(model.at(prior.t(), j))
}

/// Hyperparameter search settings for lower/upper bounds over the open simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpec {
    /// Lattice resolution m of the coarse t-grid.
    pub resolution: usize,
    /// Minimum coordinate of any searched t.
    pub clamp: f64,
    /// Number of local refinement passes around each incumbent.
    pub refinement_passes: usize,
    /// Points per side of the local refinement lattice.
    pub refinement_radius: usize,
}

impl SearchSpec {
    /// Defaults by latent dimension: m = 2000 for k = 2, 200 for k = 3,
    /// 40 for k = 4.
    pub fn for_k(k: usize) -> Self {
        let resolution = match k {
            0..=2 => 2000,
            3 => 200,
            _ => 40,
        };
        SearchSpec {
            resolution,
            clamp: DEFAULT_T_CLAMP,
            refinement_passes: 1,
            refinement_radius: 8,
        }
    }

    fn validate(&self, k: usize) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::invalid("search resolution must be at least 2"));
        }
        if !(self.clamp > 0.0) || self.clamp * k as f64 >= 1.0 {
            return Err(Error::invalid(format!(
                "search clamp {} invalid for k = {k}",
                self.clamp
            )));
        }
        Ok(())
    }
}

fn refine(
    f: &(impl Fn(&SimplexPoint) -> f64 + Sync + Send),
    start: (SimplexPoint, f64),
    maximize: bool,
    spec: &SearchSpec,
) -> (SimplexPoint, f64) {
    let (mut best, mut best_val) = start;
    let k = best.k();
    let r = spec.refinement_radius.max(1) as i64;
    let mut span = 1.0 / spec.resolution as f64;
    for _ in 0..spec.refinement_passes {
        let step = span / r as f64;
        let side = (2 * r + 1) as usize;
        let total = side.pow((k - 1) as u32);
        let center = best.coords().to_vec();
        let candidates: Vec<SimplexPoint> = (0..total)
            .filter_map(|mut code| {
                let mut coords = Vec::with_capacity(k);
                for c in center.iter().take(k - 1) {
                    let o = (code % side) as i64 - r;
                    code /= side;
                    coords.push(c + o as f64 * step);
                }
                let last = 1.0 - coords.iter().sum::<f64>();
                coords.push(last);
                if coords.iter().any(|c| *c < spec.clamp) {
                    return None;
                }
                SimplexPoint::new(coords).ok()
            })
            .collect();
        if let Some(e) = parallel::extrema(&candidates, f) {
            let (idx, val) = if maximize {
                (e.argmax, e.max)
            } else {
                (e.argmin, e.min)
            };
            let better = if maximize {
                val > best_val
            } else {
                val < best_val
            };
            if better {
                best = candidates[idx].clone();
                best_val = val;
            }
        }
        span = step;
    }
    (best, best_val)
}

/// Candidate boundary limits: every vertex and the centre of every facet.
fn boundary_candidates(k: usize) -> Vec<BoundaryLimit> {
    (0..k)
        .flat_map(|h| {
            [
                BoundaryLimit::toward_vertex(k, h),
                BoundaryLimit::toward_opposite_face(k, h),
            ]
        })
        .collect()
}

/// Lower and upper bounds of the predictive for outcome `j` over the
/// hyperparameter simplex, for an already prepared predictive model.
pub fn bounds_for_model(
    model: &LatentPredictive,
    j: usize,
    search: &SearchSpec,
) -> Result<PredictiveBounds> {
    let k = model.k();
    if j >= k {
        return Err(Error::invalid(format!(
            "outcome {j} out of range for k = {k}"
        )));
    }
    search.validate(k)?;
    let grid = SimplexGrid::new(
        k,
        search.resolution,
        BoundaryPolicy::ClampToEpsilon(search.clamp),
    )?;
    let f = |t: &SimplexPoint| model.at(t, j);
    let e = parallel::extrema(grid.points(), f)
        .ok_or_else(|| Error::Degenerate("predictive is NaN on the whole grid".into()))?;
    let pts = grid.points();
    let (min_t, min_v) = refine(&f, (pts[e.argmin].clone(), e.min), false, search);
    let (max_t, max_v) = refine(&f, (pts[e.argmax].clone(), e.max), true, search);

    let mut lower = (min_v, Extremizer::Attained(min_t));
    let mut upper = (max_v, Extremizer::Attained(max_t));
    for candidate in boundary_candidates(k) {
        let v = model.limit(&candidate.point, j)?;
        if v <= lower.0 {
            lower = (v, Extremizer::Limit(candidate.clone()));
        }
        if v >= upper.0 {
            upper = (v, Extremizer::Limit(candidate));
        }
    }
    PredictiveBounds {
        lower: lower.0.clamp(0.0, 1.0),
        upper: upper.0.clamp(0.0, 1.0),
        argmin_t: lower.1,
        argmax_t: upper.1,
    }
    .checked()
}

/// Lower and upper P(X_{n+1} = x_j | s) over all priors dir_{s,t}, t in the
/// open simplex: clamped grid, local refinement, and analytic boundary limits.
pub fn predictive_bounds(
    data: &ManifestDataset,
    s: f64,
    j: usize,
    search: &SearchSpec,
) -> Result<PredictiveBounds> {
    let model = LatentPredictive::new(&frequency_weights(data)?, s)?;
    bounds_for_model(&model, j, search)
}

/// Learnability flags for one latent outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeDiagnosis {
    /// Some observation rules x_j out (λ_{hj} = 0).
    pub upper_strictly_below_one: bool,
    /// Some observation pins x_j down (λ_{hj} > 0, λ_{hr} = 0 for r ≠ j).
    pub lower_strictly_above_zero: bool,
    pub upper_witnesses: Vec<usize>,
    pub lower_witnesses: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VacuityDiagnosis {
    pub outcomes: Vec<OutcomeDiagnosis>,
    /// Every entry of every observed emission matrix is positive, so the
    /// bounds are (0, 1) for every outcome.
    pub total_vacuity: bool,
}

/// Exact combinatorial learnability conditions for the IDM set of priors.
pub fn vacuity_diagnosis(data: &ManifestDataset) -> VacuityDiagnosis {
    let k = data.k();
    let total_vacuity = data
        .observations()
        .iter()
        .all(|o| data.matrices()[o.matrix].all_positive());
    let outcomes = (0..k)
        .map(|j| {
            let mut upper_witnesses = Vec::new();
            let mut lower_witnesses = Vec::new();
            for i in 0..data.n() {
                let row = data.emission_row(i);
                if row[j] == 0.0 {
                    upper_witnesses.push(i);
                } else if row.iter().enumerate().all(|(r, v)| r == j || *v == 0.0) {
                    lower_witnesses.push(i);
                }
            }
            OutcomeDiagnosis {
                upper_strictly_below_one: !upper_witnesses.is_empty(),
                lower_strictly_above_zero: !lower_witnesses.is_empty(),
                upper_witnesses,
                lower_witnesses,
            }
        })
        .collect();
    VacuityDiagnosis {
        outcomes,
        total_vacuity,
    }
}
