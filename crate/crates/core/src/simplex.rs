//! Geometry and measure on the probability simplex.
//!
//! Measure convention: integrals are taken with respect to Lebesgue measure
//! on the first k-1 coordinates (the projection of the simplex onto the
//! coordinate hyperplane), so the simplex has volume 1/(k-1)!. The grid
//! integrator spreads that volume uniformly over the lattice points. Every
//! expectation used elsewhere in the crate is a ratio of two such sums, so
//! the constant cancels.

use crate::error::{Error, Result};
use crate::parallel;
use crate::special::ln_gamma;

/// Absolute tolerance on the coordinate sum of a simplex point.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Clamp used by density grids: negative-exponent densities are never
/// evaluated exactly on the boundary.
pub const DENSITY_CLAMP: f64 = 1e-9;

/// Largest number of points a [`SimplexGrid`] may hold.
pub const MAX_GRID_POINTS: usize = 20_000_000;

/// A probability vector with at least two coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid(format!(
                "simplex point needs at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::invalid(format!(
                "simplex coordinate {bad} is not a probability"
            )));
        }
        let total: f64 = coords.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!(
                "simplex coordinates sum to {total}"
            )));
        }
        Ok(SimplexPoint { coords })
    }

    /// Scale nonnegative weights onto the simplex.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::invalid("weights must have a positive finite sum"));
        }
        SimplexPoint::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        SimplexPoint::new(vec![1.0 / k as f64; k])
    }

    pub fn vertex(k: usize, j: usize) -> Result<Self> {
        if j >= k {
            return Err(Error::invalid(format!(
                "vertex {j} out of range for k = {k}"
            )));
        }
        let mut coords = vec![0.0; k];
        coords[j] = 1.0;
        SimplexPoint::new(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn k(&self) -> usize {
        self.coords.len()
    }

    pub fn min_coord(&self) -> f64 {
        self.coords.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_interior(&self) -> bool {
        self.min_coord() > 0.0
    }

    /// Largest absolute coordinate difference.
    pub fn distance_inf(&self, other: &SimplexPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// A Dirichlet prior dir_{s,t}: strength `s` and mean `t` in the open simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    s: f64,
    t: SimplexPoint,
}

impl DirichletParams {
    pub fn new(s: f64, t: SimplexPoint) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!(
                "prior strength must be positive, got {s}"
            )));
        }
        if !t.is_interior() {
            return Err(Error::invalid(
                "prior mean t must lie in the open simplex (all coordinates > 0)",
            ));
        }
        Ok(DirichletParams { s, t })
    }

    pub fn from_parts(s: f64, t: Vec<f64>) -> Result<Self> {
        DirichletParams::new(s, SimplexPoint::new(t)?)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> &SimplexPoint {
        &self.t
    }

    pub fn k(&self) -> usize {
        self.t.k()
    }

    /// Concentration parameters s·t_i.
    pub fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.t.coords().iter().map(move |t| self.s * t)
    }

    /// log Γ(s) - Σ log Γ(s t_i).
    pub fn log_normalizer(&self) -> f64 {
        ln_gamma(self.s) - self.alphas().map(ln_gamma).sum::<f64>()
    }
}

/// How lattice points on the boundary of the simplex are treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPolicy {
    IncludeBoundary,
    /// Points are mapped by θ ↦ ε + (1 - kε)θ, so every coordinate is ≥ ε.
    ClampToEpsilon(f64),
}

/// All lattice points (i_1/m, ..., i_k/m) with Σ i_j = m.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    k: usize,
    resolution: usize,
    policy: BoundaryPolicy,
    points: Vec<SimplexPoint>,
}

impl SimplexGrid {
    pub fn new(k: usize, resolution: usize, policy: BoundaryPolicy) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!("grid needs k >= 2, got {k}")));
        }
        if resolution == 0 {
            return Err(Error::invalid("grid resolution must be positive"));
        }
        let count = lattice_point_count(k, resolution);
        if count > MAX_GRID_POINTS {
            return Err(Error::SizeCap {
                what: "simplex grid points",
                actual: count,
                limit: MAX_GRID_POINTS,
            });
        }
        let eps = match policy {
            BoundaryPolicy::IncludeBoundary => 0.0,
            BoundaryPolicy::ClampToEpsilon(eps) => {
                if !(eps > 0.0) || eps * k as f64 >= 1.0 {
                    return Err(Error::invalid(format!("clamp {eps} invalid for k = {k}")));
                }
                eps
            }
        };
        let count = lattice_point_count(k, resolution);
        let mut points = Vec::with_capacity(count);
        let scale = 1.0 - k as f64 * eps;
        let m = resolution as f64;
        for_each_composition(resolution, k, |parts| {
            let mut coords: Vec<f64> = parts
                .iter()
                .map(|&i| eps + scale * (i as f64 / m))
                .collect();
            // put the rounding residue on the largest coordinate
            let residue = 1.0 - coords.iter().sum::<f64>();
            let largest = argmax(&coords);
            coords[largest] += residue;
            points.push(SimplexPoint { coords });
        });
        debug_assert_eq!(points.len(), count);
        Ok(SimplexGrid {
            k,
            resolution,
            policy,
            points,
        })
    }

    /// Default grid for integrating densities: clamp at [`DENSITY_CLAMP`].
    pub fn for_density(k: usize, resolution: usize) -> Result<Self> {
        SimplexGrid::new(k, resolution, BoundaryPolicy::ClampToEpsilon(DENSITY_CLAMP))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn policy(&self) -> BoundaryPolicy {
        self.policy
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Measure carried by each lattice point.
    pub fn cell_weight(&self) -> f64 {
        simplex_volume(self.k) / self.points.len() as f64
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

/// binomial(m + k - 1, k - 1)
pub fn lattice_point_count(k: usize, m: usize) -> usize {
    let r = k - 1;
    let mut acc: u128 = 1;
    for i in 1..=r as u128 {
        acc = acc * (m as u128 + i) / i;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Visit every composition of `total` into `parts` nonnegative integers in
/// lexicographic order.
pub(crate) fn for_each_composition(total: usize, parts: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(buf: &mut Vec<usize>, remaining: usize, parts: usize, visit: &mut dyn FnMut(&[usize])) {
        if buf.len() + 1 == parts {
            buf.push(remaining);
            visit(buf);
            buf.pop();
            return;
        }
        for i in 0..=remaining {
            buf.push(i);
            rec(buf, remaining - i, parts, visit);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(parts);
    rec(&mut buf, total, parts, &mut visit);
}

/// Volume of the simplex under the projected-Lebesgue convention.
pub fn simplex_volume(k: usize) -> f64 {
    1.0 / (1..k).map(|i| i as f64).product::<f64>()
}

/// log dir_{s,t}(θ).
///
/// A zero coordinate is allowed only when its exponent s·t_i - 1 is
/// nonnegative; 0⁰ is taken as 1.
pub fn dirichlet_log_density(p: &DirichletParams, theta: &SimplexPoint) -> Result<f64> {
    if p.k() != theta.k() {
        return Err(Error::invalid(format!(
            "dimension mismatch: prior has k = {}, point has k = {}",
            p.k(),
            theta.k()
        )));
    }
    let mut acc = p.log_normalizer();
    for (i, (alpha, x)) in p.alphas().zip(theta.coords()).enumerate() {
        let exponent = alpha - 1.0;
        if *x == 0.0 {
            if exponent < 0.0 {
                return Err(Error::Domain(format!(
                    "density diverges at theta_{i} = 0 (exponent {exponent})"
                )));
            }
            if exponent > 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
        } else {
            acc += exponent * x.ln();
        }
    }
    Ok(acc)
}

pub fn dirichlet_density(p: &DirichletParams, theta: &SimplexPoint) -> Result<f64> {
    dirichlet_log_density(p, theta).map(f64::exp)
}

/// E(θ) under dir_{s,t} is t.
pub fn dirichlet_mean(p: &DirichletParams) -> SimplexPoint {
    p.t.clone()
}

/// Riemann approximation (volume / point count) · Σ f(point).
pub fn integrate_on_simplex<F>(grid: &SimplexGrid, f: F) -> f64
where
    F: Fn(&SimplexPoint) -> f64 + Sync + Send,
{
    grid.cell_weight() * parallel::sum(grid.points(), f)
}

/// As [`integrate_on_simplex`], propagating the first evaluation failure.
pub fn try_integrate_on_simplex<F, E>(grid: &SimplexGrid, f: F) -> std::result::Result<f64, E>
where
    F: Fn(&SimplexPoint) -> std::result::Result<f64, E> + Sync + Send,
    E: Send,
{
    Ok(grid.cell_weight() * parallel::try_sum(grid.points(), f)?)
}

/// Σ g·w / Σ w over the grid with w = exp(log_weight), computed relative to
/// the largest log weight so that tiny or huge weights do not under/overflow.
/// Returns `Error::Degenerate` when every weight is zero.
pub fn grid_weighted_mean<W, G>(grid: &SimplexGrid, log_weight: W, g: G) -> Result<f64>
where
    W: Fn(&SimplexPoint) -> Result<f64> + Sync + Send,
    G: Fn(&SimplexPoint) -> f64 + Sync + Send,
{
    let logs: Vec<f64> = parallel::map(grid.points(), |p| log_weight(p))
        .into_iter()
        .collect::<Result<_>>()?;
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::Degenerate(
            "all grid weights vanish (denominator underflow)".into(),
        ));
    }
    let indexed: Vec<(usize, f64)> = logs.into_iter().enumerate().collect();
    let [num, den] = parallel::try_sum_n::<2, _, Error, _>(&indexed, |&(i, lw)| {
        let w = (lw - peak).exp();
        if w == 0.0 {
            return Ok([0.0, 0.0]);
        }
        Ok([w * g(&grid.points()[i]), w])
    })?;
    Ok(num / den)
}
