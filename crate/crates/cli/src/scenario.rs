//! Scenario files: TOML documents describing one experiment.

use std::ops::Range;

use latent_idm::manifest::BinaryChannel;
use latent_idm::observation::Observation;
use latent_idm::vacuity::{
    BoundedFunction, ConcentratingSequence, GridPlan, LikelihoodFunction, Side,
};
use latent_idm::{
    DirichletParams, EmissionMatrix, FrequencyVector, ManifestDataset, SearchSpec, SimplexPoint,
};
use serde::Deserialize;
use serde_json::{json, Value};
use toml::Spanned;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Predict,
    Diagnose,
    VerifyTheorem1,
    TheoremA1a2,
    ScaledBeta,
    NaiveReconstruction,
    DirectManifest,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Predict => "predict",
            Kind::Diagnose => "diagnose",
            Kind::VerifyTheorem1 => "verify-theorem1",
            Kind::TheoremA1a2 => "theorem-a1a2",
            Kind::ScaledBeta => "scaled-beta",
            Kind::NaiveReconstruction => "naive-reconstruction",
            Kind::DirectManifest => "direct-manifest",
        }
    }

    pub fn is_verification(&self) -> bool {
        matches!(self, Kind::VerifyTheorem1 | Kind::TheoremA1a2)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Spanned<String>,
    kind: Spanned<Kind>,
    #[serde(default)]
    reproduces: String,
    observations: Option<Spanned<Vec<usize>>>,
    observation_matrix: Option<Spanned<Vec<usize>>>,
    outcome: Option<Spanned<usize>>,
    schedule: Option<Spanned<Vec<usize>>>,
    deltas: Option<Spanned<Vec<f64>>>,
    hyper: Option<Spanned<RawHyper>>,
    search: Option<Spanned<RawSearch>>,
    function: Option<Spanned<RawFunction>>,
    likelihood: Option<Spanned<RawLikelihood>>,
    sequence: Option<Spanned<RawSequence>>,
    grid: Option<Spanned<RawGrid>>,
    #[serde(default)]
    matrix: Vec<Spanned<RawMatrix>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHyper {
    s: f64,
    t: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    resolution: Option<usize>,
    clamp: Option<f64>,
    refinement_passes: Option<usize>,
    refinement_radius: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    preset: Option<Spanned<String>>,
    columns: Option<Vec<Spanned<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawFunction {
    Coordinate { k: usize, index: usize },
    Monomial { exponents: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawLikelihood {
    Observations,
    Multinomial { counts: Vec<u32> },
    Constant { value: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    kind: SequenceKind,
    s: Option<f64>,
    target: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    Canonical,
    FixedStrength,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    base: usize,
    per_index: usize,
}

/// Where an emission matrix came from, echoed into the report.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Preset(String),
    Columns(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Coordinate { k: usize, index: usize },
    Monomial { exponents: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LikelihoodSpec {
    Observations,
    Multinomial { counts: Vec<u32> },
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub s: Option<f64>,
    pub target: Vec<f64>,
}

/// Settings for the concentration experiments.
#[derive(Debug, Clone)]
pub struct Verification {
    pub function: FunctionSpec,
    pub likelihood: LikelihoodSpec,
    pub sequence: SequenceSpec,
    pub schedule: Vec<usize>,
    pub deltas: Vec<f64>,
    pub plan: GridPlan,
    pub side: Side,
}

impl Verification {
    pub fn bounded_function(&self) -> latent_idm::Result<BoundedFunction> {
        match &self.function {
            FunctionSpec::Coordinate { k, index } => BoundedFunction::coordinate(*k, *index),
            FunctionSpec::Monomial { exponents } => {
                BoundedFunction::monomial(&FrequencyVector::new(exponents.clone()))
            }
        }
    }

    pub fn sequence(&self) -> latent_idm::Result<ConcentratingSequence> {
        let target = SimplexPoint::new(self.sequence.target.clone())?;
        Ok(match (self.sequence.kind, self.sequence.s) {
            (SequenceKind::FixedStrength, Some(s)) => {
                ConcentratingSequence::fixed_strength(s, target)
            }
            _ => ConcentratingSequence::canonical(target),
        })
    }

    pub fn likelihood_function(
        &self,
        data: Option<&ManifestDataset>,
    ) -> latent_idm::Result<LikelihoodFunction> {
        match &self.likelihood {
            LikelihoodSpec::Observations => Ok(LikelihoodFunction::from_manifest(
                data.cloned()
                    .ok_or_else(|| latent_idm::Error::InvalidInput("no observations".into()))?,
            )),
            LikelihoodSpec::Multinomial { counts } => Ok(LikelihoodFunction::multinomial(
                &FrequencyVector::new(counts.clone()),
            )),
            LikelihoodSpec::Constant { value } => LikelihoodFunction::constant(*value),
        }
    }
}

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub origin: String,
    pub name: String,
    pub kind: Kind,
    pub reproduces: String,
    /// Number of latent outcomes.
    pub k: usize,
    pub matrix_sources: Vec<MatrixSource>,
    pub matrices: Vec<EmissionMatrix>,
    pub observations: Vec<usize>,
    pub observation_matrix: Vec<usize>,
    pub outcome: Option<usize>,
    pub s: Option<f64>,
    pub t: Option<Vec<f64>>,
    pub search: SearchSpec,
    pub verification: Option<Verification>,
}

struct Ctx<'a> {
    origin: &'a str,
    text: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }

    fn err(&self, span: Option<Range<usize>>, message: impl Into<String>) -> CliError {
        CliError::scenario(self.origin, span.map(|s| self.line(s)), message)
    }

    fn core(&self, span: Option<Range<usize>>, err: latent_idm::Error) -> CliError {
        CliError::from_core(self.origin, span.map(|s| self.line(s)), err)
    }
}

fn parse_preset(preset: &str) -> Result<EmissionMatrix, String> {
    let compact: String = preset.chars().filter(|c| !c.is_whitespace()).collect();
    let args = |prefix: &str| {
        compact
            .strip_prefix(prefix)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
            .map(|r| r.split(',').map(str::to_string).collect::<Vec<_>>())
    };
    if let Some(a) = args("identity") {
        let k: usize = match a.as_slice() {
            [k] => k
                .parse()
                .map_err(|_| format!("identity size `{k}` is not an integer"))?,
            _ => return Err("identity preset takes one argument: identity(k)".into()),
        };
        return EmissionMatrix::identity(k).map_err(|e| e.to_string());
    }
    if let Some(a) = args("binary-channel") {
        let eps: Vec<f64> = a
            .iter()
            .map(|x| {
                x.parse::<f64>()
                    .map_err(|_| format!("`{x}` is not a number"))
            })
            .collect::<Result<_, _>>()?;
        return match eps.as_slice() {
            [e1, e2] => BinaryChannel::new(*e1, *e2)
                .map(|c| c.emission())
                .map_err(|e| e.to_string()),
            _ => Err("binary-channel preset takes two arguments: binary-channel(e1, e2)".into()),
        };
    }
    Err(format!(
        "unknown preset `{preset}`; expected identity(k) or binary-channel(e1, e2)"
    ))
}

fn build_matrix(ctx: &Ctx, raw: &Spanned<RawMatrix>) -> CliResult<(EmissionMatrix, MatrixSource)> {
    let m = raw.get_ref();
    match (&m.preset, &m.columns) {
        (Some(p), None) => parse_preset(p.get_ref())
            .map(|e| (e, MatrixSource::Preset(p.get_ref().clone())))
            .map_err(|msg| ctx.err(Some(p.span()), msg)),
        (None, Some(cols)) => {
            let plain: Vec<Vec<f64>> = cols.iter().map(|c| c.get_ref().clone()).collect();
            match EmissionMatrix::from_columns(plain.clone()) {
                Ok(e) => Ok((e, MatrixSource::Columns(plain))),
                Err(latent_idm::Error::ColumnNotStochastic { column, sum }) => Err(ctx.err(
                    Some(cols[column].span()),
                    format!("emission matrix column {column} sums to {sum}, expected 1"),
                )),
                Err(e) => Err(ctx.core(Some(raw.span()), e)),
            }
        }
        _ => Err(ctx.err(
            Some(raw.span()),
            "a [[matrix]] needs exactly one of `preset` or `columns`",
        )),
    }
}

fn require<'a, T>(ctx: &Ctx, field: &'a Option<T>, name: &str, kind: Kind) -> CliResult<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| ctx.err(None, format!("kind `{}` requires `{name}`", kind.as_str())))
}

/// Parses a scenario document. `origin` names it in error messages.
pub fn parse_scenario(text: &str, origin: &str) -> CliResult<Scenario> {
    let ctx = Ctx { origin, text };
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| ctx.err(e.span(), e.message().trim().to_string()))?;
    let kind = *raw.kind.get_ref();

    let mut matrices = Vec::new();
    let mut matrix_sources = Vec::new();
    for m in &raw.matrix {
        let (e, src) = build_matrix(&ctx, m)?;
        if let Some(first) = matrices.first() {
            let first: &EmissionMatrix = first;
            if first.latent_outcomes() != e.latent_outcomes() {
                return Err(ctx.err(
                    Some(m.span()),
                    format!(
                        "matrix has {} latent outcomes, the first matrix has {}",
                        e.latent_outcomes(),
                        first.latent_outcomes()
                    ),
                ));
            }
        }
        matrices.push(e);
        matrix_sources.push(src);
    }

    let observations = raw
        .observations
        .as_ref()
        .map(|o| o.get_ref().clone())
        .unwrap_or_default();
    let observation_matrix = match &raw.observation_matrix {
        Some(om) => {
            if om.get_ref().len() != observations.len() {
                return Err(ctx.err(
                    Some(om.span()),
                    format!(
                        "observation_matrix has {} entries for {} observations",
                        om.get_ref().len(),
                        observations.len()
                    ),
                ));
            }
            om.get_ref().clone()
        }
        None => vec![0; observations.len()],
    };

    let needs_model = matches!(
        kind,
        Kind::Predict | Kind::Diagnose | Kind::ScaledBeta | Kind::NaiveReconstruction
    );
    if needs_model && matrices.is_empty() {
        return Err(ctx.err(
            None,
            format!("kind `{}` requires at least one [[matrix]]", kind.as_str()),
        ));
    }
    if !kind.is_verification() && kind != Kind::DirectManifest {
        require(&ctx, &raw.observations, "observations", kind)?;
    }

    // check observations against the model
    if !matrices.is_empty() && raw.observations.is_some() {
        let obs: Vec<Observation> = observations
            .iter()
            .zip(&observation_matrix)
            .map(|(&row, &matrix)| Observation { matrix, row })
            .collect();
        let span = raw.observations.as_ref().map(|o| o.span());
        ManifestDataset::new(matrices.clone(), obs).map_err(|e| ctx.core(span, e))?;
    }

    let mut k = matrices.first().map(|m| m.latent_outcomes());

    let (s, t) = match &raw.hyper {
        Some(h) => {
            let hv = h.get_ref();
            if !(hv.s > 0.0) || !hv.s.is_finite() {
                return Err(ctx.err(
                    Some(h.span()),
                    format!("hyper.s must be positive, got {}", hv.s),
                ));
            }
            if let Some(t) = &hv.t {
                let kk = *k.get_or_insert(t.len());
                if t.len() != kk {
                    return Err(ctx.err(
                        Some(h.span()),
                        format!("hyper.t has {} entries, expected {kk}", t.len()),
                    ));
                }
                DirichletParams::from_parts(hv.s, t.clone())
                    .map_err(|e| ctx.core(Some(h.span()), e))?;
            }
            (Some(hv.s), hv.t.clone())
        }
        None => (None, None),
    };
    if !kind.is_verification() && kind != Kind::Diagnose {
        require(&ctx, &s, "hyper.s", kind)?;
    }

    if matches!(kind, Kind::ScaledBeta | Kind::NaiveReconstruction) {
        let ok = matrices.len() == 1 && {
            let m = &matrices[0];
            m.latent_outcomes() == 2
                && m.manifest_outcomes() == 2
                && BinaryChannel::new(m.entry(0, 1), m.entry(1, 0)).is_ok()
        };
        if !ok {
            return Err(ctx.err(
                Some(raw.matrix[0].span()),
                format!(
                    "kind `{}` needs one binary channel with both error rates in (0, 0.5)",
                    kind.as_str()
                ),
            ));
        }
    }
    if kind == Kind::DirectManifest {
        if let Some(bad) = observations.iter().find(|&&o| o > 1) {
            let span = raw.observations.as_ref().map(|o| o.span());
            return Err(ctx.err(
                span,
                format!("manifest outcome {bad} is not binary (0 or 1)"),
            ));
        }
    }

    let verification = if kind.is_verification() {
        let v = build_verification(&ctx, &raw, kind, &mut k, matrices.is_empty())?;
        Some(v)
    } else {
        None
    };

    let k = k.unwrap_or(2);
    if let Some(o) = &raw.outcome {
        if *o.get_ref() >= k {
            return Err(ctx.err(
                Some(o.span()),
                format!("outcome {} out of range for k = {k}", o.get_ref()),
            ));
        }
    }

    let mut search = SearchSpec::for_k(k);
    if let Some(sp) = &raw.search {
        let r = sp.get_ref();
        search.resolution = r.resolution.unwrap_or(search.resolution);
        search.clamp = r.clamp.unwrap_or(search.clamp);
        search.refinement_passes = r.refinement_passes.unwrap_or(search.refinement_passes);
        search.refinement_radius = r.refinement_radius.unwrap_or(search.refinement_radius);
        if search.resolution < 2 {
            return Err(ctx.err(Some(sp.span()), "search.resolution must be at least 2"));
        }
        if !(search.clamp > 0.0) || search.clamp * k as f64 >= 1.0 {
            return Err(ctx.err(
                Some(sp.span()),
                format!("search.clamp must lie in (0, 1/{k}), got {}", search.clamp),
            ));
        }
    }

    Ok(Scenario {
        origin: origin.to_string(),
        name: raw.name.get_ref().clone(),
        kind,
        reproduces: raw.reproduces.clone(),
        k,
        matrix_sources,
        matrices,
        observations,
        observation_matrix,
        outcome: raw.outcome.as_ref().map(|o| *o.get_ref()),
        s,
        t,
        search,
        verification,
    })
}

fn build_verification(
    ctx: &Ctx,
    raw: &RawScenario,
    kind: Kind,
    k: &mut Option<usize>,
    no_matrices: bool,
) -> CliResult<Verification> {
    let f = require(ctx, &raw.function, "[function]", kind)?;
    let seq = require(ctx, &raw.sequence, "[sequence]", kind)?;
    let schedule = require(ctx, &raw.schedule, "schedule", kind)?;

    let function = match f.get_ref().clone() {
        RawFunction::Coordinate { k, index } => FunctionSpec::Coordinate { k, index },
        RawFunction::Monomial { exponents } => FunctionSpec::Monomial { exponents },
    };
    let likelihood = match raw.likelihood.as_ref().map(|l| l.get_ref().clone()) {
        None | Some(RawLikelihood::Observations) => {
            if no_matrices || raw.observations.is_none() {
                let span = raw.likelihood.as_ref().map(|l| l.span());
                return Err(ctx.err(
                    span,
                    "an observation likelihood needs [[matrix]] and observations",
                ));
            }
            LikelihoodSpec::Observations
        }
        Some(RawLikelihood::Multinomial { counts }) => LikelihoodSpec::Multinomial { counts },
        Some(RawLikelihood::Constant { value }) => LikelihoodSpec::Constant { value },
    };
    let sv = seq.get_ref();
    let sequence = SequenceSpec {
        kind: sv.kind,
        s: sv.s,
        target: sv.target.clone(),
    };
    if sv.kind == SequenceKind::FixedStrength && !sv.s.is_some_and(|s| s > 0.0 && s.is_finite()) {
        return Err(ctx.err(
            Some(seq.span()),
            "a fixed-strength sequence needs a positive `s`",
        ));
    }
    let target = SimplexPoint::new(sv.target.clone()).map_err(|e| ctx.core(Some(seq.span()), e))?;
    let kk = *k.get_or_insert(target.k());
    if target.k() != kk {
        return Err(ctx.err(
            Some(seq.span()),
            format!(
                "sequence target has {} coordinates, expected {kk}",
                target.k()
            ),
        ));
    }
    let deltas = match &raw.deltas {
        Some(d) => {
            let v = d.get_ref().clone();
            let ok =
                !v.is_empty() && v.iter().all(|x| *x > 0.0) && v.windows(2).all(|w| w[1] < w[0]);
            if !ok {
                return Err(ctx.err(
                    Some(d.span()),
                    "deltas must be positive and strictly decreasing",
                ));
            }
            v
        }
        None => vec![0.1, 0.01],
    };
    let sched = schedule.get_ref().clone();
    if sched.is_empty() || sched.iter().any(|&n| n <= kk) || sched.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(ctx.err(
            Some(schedule.span()),
            format!("schedule must be strictly increasing with every index above k = {kk}"),
        ));
    }
    let plan = match &raw.grid {
        Some(g) => {
            let gv = g.get_ref();
            if gv.base == 0 {
                return Err(ctx.err(Some(g.span()), "grid.base must be positive"));
            }
            GridPlan {
                base: gv.base,
                per_index: gv.per_index,
            }
        }
        None => GridPlan::for_k(kk),
    };

    let mut v = Verification {
        function,
        likelihood,
        sequence,
        schedule: sched,
        deltas,
        plan,
        side: Side::Max,
    };
    let bf = v
        .bounded_function()
        .map_err(|e| ctx.core(Some(f.span()), e))?;
    let fk = match &v.function {
        FunctionSpec::Coordinate { k, .. } => *k,
        FunctionSpec::Monomial { exponents } => exponents.len(),
    };
    if fk != kk {
        return Err(ctx.err(
            Some(f.span()),
            format!("function is defined for k = {fk}, expected {kk}"),
        ));
    }
    // the target picks the side: it must attain the maximum or the minimum of f
    let at_target = bf.eval(&target);
    v.side = if (at_target - bf.max()).abs() < 1e-12 {
        Side::Max
    } else if (at_target - bf.min()).abs() < 1e-12 {
        Side::Min
    } else {
        return Err(ctx.err(
            Some(seq.span()),
            format!(
                "sequence target gives f = {at_target}, neither the maximum {} nor the minimum {}",
                bf.max(),
                bf.min()
            ),
        ));
    };
    Ok(v)
}

impl Scenario {
    /// The manifest dataset of the scenario, if it declares a model.
    pub fn dataset(&self) -> latent_idm::Result<Option<ManifestDataset>> {
        if self.matrices.is_empty() {
            return Ok(None);
        }
        let obs = self
            .observations
            .iter()
            .zip(&self.observation_matrix)
            .map(|(&row, &matrix)| Observation { matrix, row })
            .collect();
        ManifestDataset::new(self.matrices.clone(), obs).map(Some)
    }

    /// The binary channel of the scaled-beta and naive kinds.
    pub fn channel(&self) -> latent_idm::Result<BinaryChannel> {
        let m = self
            .matrices
            .first()
            .ok_or_else(|| latent_idm::Error::InvalidInput("no emission matrix".into()))?;
        BinaryChannel::new(m.entry(0, 1), m.entry(1, 0))
    }

    /// Count of manifest outcome 0 among the observations.
    pub fn positives(&self) -> usize {
        self.observations.iter().filter(|&&o| o == 0).count()
    }

    /// Canonical echo of every input that affects the results.
    pub fn echo(&self) -> Value {
        let matrices: Vec<Value> = self
            .matrix_sources
            .iter()
            .map(|m| match m {
                MatrixSource::Preset(p) => json!({ "preset": p }),
                MatrixSource::Columns(c) => json!({ "columns": c }),
            })
            .collect();
        let mut echo = json!({
            "name": self.name,
            "kind": self.kind.as_str(),
            "reproduces": self.reproduces,
            "k": self.k,
            "matrix": matrices,
            "observations": self.observations,
            "observation_matrix": self.observation_matrix,
            "outcome": self.outcome,
            "hyper": { "s": self.s, "t": self.t },
        });
        if let Some(v) = &self.verification {
            let function = match &v.function {
                FunctionSpec::Coordinate { k, index } => {
                    json!({ "kind": "coordinate", "k": k, "index": index })
                }
                FunctionSpec::Monomial { exponents } => {
                    json!({ "kind": "monomial", "exponents": exponents })
                }
            };
            let likelihood = match &v.likelihood {
                LikelihoodSpec::Observations => json!({ "kind": "observations" }),
                LikelihoodSpec::Multinomial { counts } => {
                    json!({ "kind": "multinomial", "counts": counts })
                }
                LikelihoodSpec::Constant { value } => json!({ "kind": "constant", "value": value }),
            };
            let kind = match v.sequence.kind {
                SequenceKind::Canonical => "canonical",
                SequenceKind::FixedStrength => "fixed-strength",
            };
            echo["function"] = function;
            echo["likelihood"] = likelihood;
            echo["sequence"] =
                json!({ "kind": kind, "s": v.sequence.s, "target": v.sequence.target });
            echo["schedule"] = json!(v.schedule);
            echo["deltas"] = json!(v.deltas);
        }
        echo
    }
}
