//! Runs a scenario and renders its report.

use latent_idm::manifest::{
    direct_manifest_idm, naive_latent_bounds, scaled_beta_posterior_bounds,
    scaled_beta_posterior_expectation,
};
use latent_idm::observation::{bounds_for_model, LatentPredictive};
use latent_idm::simplex::DENSITY_CLAMP;
use latent_idm::vacuity::{
    concentration_trend, liminf_positivity_check_on_side, verify_theorem1, Side, TrendRow,
};
use latent_idm::{
    frequency_weights, vacuity_diagnosis, DirichletParams, Extremizer, PredictiveBounds,
    SimplexPoint,
};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::scenario::{Kind, Scenario};

pub const TOOL_NAME: &str = "latent-idm";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Structured JSON document.
    Doc,
    /// CSV: the trend table for verification kinds, `field,value` rows otherwise.
    Table,
}

/// A finished run: the report document plus the trend table when there is one.
#[derive(Debug, Clone)]
pub struct Report {
    pub doc: Value,
    pub trend: Option<(Vec<f64>, Vec<TrendRow>)>,
}

fn side_str(side: Side) -> &'static str {
    match side {
        Side::Max => "max",
        Side::Min => "min",
    }
}

fn extremizer(e: &Extremizer) -> Value {
    match e {
        Extremizer::Attained(p) => json!({ "attained": p.coords() }),
        Extremizer::Limit(l) => json!({ "limit": l.point, "description": l.description }),
    }
}

fn bounds_json(b: &PredictiveBounds) -> Value {
    json!({
        "lower": b.lower,
        "upper": b.upper,
        "width": b.width(),
        "argmin_t": extremizer(&b.argmin_t),
        "argmax_t": extremizer(&b.argmax_t),
    })
}

fn trend_json(rows: &[TrendRow]) -> Value {
    rows.iter()
        .map(|r| {
            json!({
                "index": r.index,
                "resolution": r.resolution,
                "prior_expectation": r.prior_expectation,
                "masses": r.masses.iter().map(|(d, m)| json!({ "delta": d, "mass": m })).collect::<Vec<_>>(),
                "posterior_ratio": r.posterior_ratio,
            })
        })
        .collect()
}

fn outcomes(sc: &Scenario) -> Vec<usize> {
    match sc.outcome {
        Some(j) => vec![j],
        None => (0..sc.k).collect(),
    }
}

fn provenance(sc: &Scenario) -> Value {
    let mut p = json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "search": {
            "resolution": sc.search.resolution,
            "clamp": sc.search.clamp,
            "refinement_passes": sc.search.refinement_passes,
            "refinement_radius": sc.search.refinement_radius,
            "boundary_candidates": "vertex and facet-centre limits",
        },
    });
    if let Some(v) = &sc.verification {
        p["grid_plan"] = json!({
            "base": v.plan.base,
            "per_index": v.plan.per_index,
            "density_clamp": DENSITY_CLAMP,
        });
    }
    p
}

/// Runs `sc` and assembles its report. Deterministic for a fixed scenario.
pub fn run_scenario(sc: &Scenario) -> CliResult<Report> {
    let core = |e| CliError::from_core(&sc.origin, None, e);
    let mut trend = None;
    let results = match sc.kind {
        Kind::Predict => {
            let data = sc.dataset().map_err(core)?.expect("validated model");
            let s = sc.s.expect("validated hyper.s");
            let weights = frequency_weights(&data).map_err(core)?;
            let model = LatentPredictive::new(&weights, s).map_err(core)?;
            let t =
                sc.t.as_ref()
                    .map(|t| SimplexPoint::new(t.clone()))
                    .transpose()
                    .map_err(core)?;
            let per_outcome = outcomes(sc)
                .into_iter()
                .map(|j| {
                    let b = bounds_for_model(&model, j, &sc.search).map_err(core)?;
                    let mut v = json!({ "outcome": j, "bounds": bounds_json(&b) });
                    if let Some(t) = &t {
                        v["predictive_at_t"] = json!(model.at(t, j));
                    }
                    Ok(v)
                })
                .collect::<CliResult<Vec<_>>>()?;
            json!({
                "n": data.n(),
                "frequency_vectors": weights.entries().len(),
                "outcomes": per_outcome,
            })
        }
        Kind::Diagnose => {
            let data = sc.dataset().map_err(core)?.expect("validated model");
            let d = vacuity_diagnosis(&data);
            let model =
                sc.s.map(|s| LatentPredictive::new(&frequency_weights(&data)?, s))
                    .transpose()
                    .map_err(core)?;
            let per_outcome = outcomes(sc)
                .into_iter()
                .map(|j| {
                    let o = &d.outcomes[j];
                    let mut v = json!({
                        "outcome": j,
                        "upper_strictly_below_one": o.upper_strictly_below_one,
                        "lower_strictly_above_zero": o.lower_strictly_above_zero,
                        "upper_witnesses": o.upper_witnesses,
                        "lower_witnesses": o.lower_witnesses,
                    });
                    if let Some(m) = &model {
                        let b = bounds_for_model(m, j, &sc.search).map_err(core)?;
                        v["bounds"] = bounds_json(&b);
                    }
                    Ok(v)
                })
                .collect::<CliResult<Vec<_>>>()?;
            json!({ "total_vacuity": d.total_vacuity, "outcomes": per_outcome })
        }
        Kind::VerifyTheorem1 => {
            let v = sc.verification.as_ref().expect("validated verification");
            let data = sc.dataset().map_err(core)?;
            let seq = v.sequence().map_err(core)?;
            let target = seq.target().clone();
            let f = v.bounded_function().map_err(core)?;
            let f = match v.side {
                Side::Max => f.with_argmax(target),
                Side::Min => f.with_argmin(target),
            };
            let l = v.likelihood_function(data.as_ref()).map_err(core)?;
            let r = verify_theorem1(&f, &l, &seq, &v.schedule, v.plan).map_err(core)?;
            let distances = seq.mean_distances(&v.schedule).map_err(core)?;
            let out = json!({
                "function": f.description(),
                "likelihood": l.description(),
                "sequence": seq.description(),
                "side": side_str(r.side),
                "extremum": r.extremum,
                "final_ratio": r.final_ratio,
                "tolerance": r.tolerance,
                "vacuous": r.vacuous,
                "mean_distances": distances.iter().map(|(n, d)| json!({ "index": n, "distance": d })).collect::<Vec<_>>(),
                "rows": trend_json(&r.rows),
            });
            trend = Some((vec![0.1, 0.01], r.rows));
            out
        }
        Kind::TheoremA1a2 => {
            let v = sc.verification.as_ref().expect("validated verification");
            let data = sc.dataset().map_err(core)?;
            let seq = v.sequence().map_err(core)?;
            let f = v.bounded_function().map_err(core)?;
            let l = v.likelihood_function(data.as_ref()).map_err(core)?;
            let rows =
                concentration_trend(&f, Some(&l), &seq, v.side, &v.deltas, &v.schedule, v.plan)
                    .map_err(core)?;
            let last = *v.schedule.last().expect("validated schedule");
            let grid = v.plan.grid(sc.k, last).map_err(core)?;
            let liminf =
                liminf_positivity_check_on_side(&l, &f, &v.deltas, &grid, v.side).map_err(core)?;
            let nondecreasing: Vec<bool> = (0..v.deltas.len())
                .map(|d| {
                    rows.windows(2)
                        .all(|w| w[1].masses[d].1 >= w[0].masses[d].1)
                })
                .collect();
            let extremum = f.extremum(v.side);
            let final_ratio = rows
                .last()
                .and_then(|r| r.posterior_ratio)
                .expect("likelihood supplied");
            let distances = seq.mean_distances(&v.schedule).map_err(core)?;
            let out = json!({
                "function": f.description(),
                "likelihood": l.description(),
                "sequence": seq.description(),
                "side": side_str(v.side),
                "extremum": extremum,
                "final_ratio": final_ratio,
                "final_gap": (final_ratio - extremum).abs(),
                "mass_nondecreasing": nondecreasing,
                "mean_distances": distances.iter().map(|(n, d)| json!({ "index": n, "distance": d })).collect::<Vec<_>>(),
                "rows": trend_json(&rows),
                "liminf": {
                    "grid_resolution": grid.resolution(),
                    "infima": liminf.infima.iter().map(|(d, m)| json!({ "delta": d, "infimum": m })).collect::<Vec<_>>(),
                    "estimate": liminf.estimate,
                    "positive": liminf.positive,
                },
            });
            trend = Some((v.deltas.clone(), rows));
            out
        }
        Kind::ScaledBeta => {
            let ch = sc.channel().map_err(core)?;
            let s = sc.s.expect("validated hyper.s");
            let (n1, n) = (sc.positives(), sc.observations.len());
            let b = scaled_beta_posterior_bounds(&ch, n1, n, s, &sc.search).map_err(core)?;
            let (lo, hi) = ch.manifest_range();
            let mut out = json!({
                "positives": n1,
                "total": n,
                "manifest_range": [lo, hi],
                "bounds": bounds_json(&b),
            });
            if let Some(t) = &sc.t {
                let prior = DirichletParams::from_parts(s, t.clone()).map_err(core)?;
                out["expectation_at_t"] =
                    json!(scaled_beta_posterior_expectation(&ch, n1, n, &prior).map_err(core)?);
            }
            out
        }
        Kind::NaiveReconstruction => {
            let ch = sc.channel().map_err(core)?;
            let s = sc.s.expect("validated hyper.s");
            let (n1, n) = (sc.positives(), sc.observations.len());
            let (lower, upper, manifest) = naive_latent_bounds(&ch, n1, n, s).map_err(core)?;
            json!({
                "positives": n1,
                "total": n,
                "manifest_bounds": {
                    "level": manifest.level(),
                    "lower": manifest.bounds.lower,
                    "upper": manifest.bounds.upper,
                },
                "reconstructed": {
                    "lower": { "value": lower.value, "out_of_range": lower.out_of_range },
                    "upper": { "value": upper.value, "out_of_range": upper.out_of_range },
                },
            })
        }
        Kind::DirectManifest => {
            let s = sc.s.expect("validated hyper.s");
            let (n1, n) = (sc.positives(), sc.observations.len());
            let m = direct_manifest_idm(n1, n, s).map_err(core)?;
            json!({
                "positives": n1,
                "total": n,
                "level": m.level(),
                "lower": m.bounds.lower,
                "upper": m.bounds.upper,
            })
        }
    };
    let doc = json!({
        "scenario": sc.echo(),
        "provenance": provenance(sc),
        "results": results,
    });
    Ok(Report { doc, trend })
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{prefix}/{k}"), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}/{i}"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("csv: {e}"))
}

impl Report {
    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Doc => {
                let mut s = serde_json::to_string_pretty(&self.doc)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Table => {
                let mut w = csv::Writer::from_writer(Vec::new());
                match &self.trend {
                    Some((deltas, rows)) => {
                        let mut header = vec![
                            "index".to_string(),
                            "resolution".to_string(),
                            "prior_expectation".to_string(),
                        ];
                        header.extend(deltas.iter().map(|d| format!("mass_delta_{d}")));
                        header.push("posterior_ratio".to_string());
                        w.write_record(&header).map_err(csv_err)?;
                        for r in rows {
                            let mut rec = vec![
                                r.index.to_string(),
                                r.resolution.to_string(),
                                r.prior_expectation.to_string(),
                            ];
                            rec.extend(r.masses.iter().map(|(_, m)| m.to_string()));
                            rec.push(r.posterior_ratio.map(|x| x.to_string()).unwrap_or_default());
                            w.write_record(&rec).map_err(csv_err)?;
                        }
                    }
                    None => {
                        w.write_record(["field", "value"]).map_err(csv_err)?;
                        let mut cells = Vec::new();
                        flatten("", &self.doc["results"], &mut cells);
                        for (k, v) in cells {
                            w.write_record([k, v]).map_err(csv_err)?;
                        }
                    }
                }
                String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
            }
        }
    }

    /// Adds wall-clock timing; kept out of the document unless requested so
    /// that re-runs compare byte for byte.
    pub fn with_timing(mut self, elapsed: std::time::Duration) -> Self {
        if let Value::Object(m) = &mut self.doc {
            let mut t = Map::new();
            t.insert("elapsed_ms".into(), json!(elapsed.as_secs_f64() * 1e3));
            m.insert("timing".into(), Value::Object(t));
        }
        self
    }
}
