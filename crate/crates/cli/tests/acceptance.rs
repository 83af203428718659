//! Acceptance suite: one PASS/FAIL line per criterion, each under its time limit.

use std::process::{Command, ExitCode};
use std::result::Result;
use std::time::{Duration, Instant};

use latent_idm::idm::log_marginal;
use latent_idm::manifest::{
    direct_manifest_idm, naive_latent_bounds, scaled_beta_posterior_bounds, BinaryChannel,
};
use latent_idm::observation::{frequency_weights_by_enumeration, LatentPredictive, Observation};
use latent_idm::parallel::with_sequential;
use latent_idm::simplex::{dirichlet_density, grid_weighted_mean, try_integrate_on_simplex};
use latent_idm::*;
use latent_idm_cli::catalog::BUNDLED;
use latent_idm_cli::{resolve, run_scenario, selftest, Format, Scenario};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Beta prior whose density stays bounded (s·t_i ≥ 1), so grid sums converge.
fn bounded_prior(rng: &mut StdRng) -> DirichletParams {
    let s: f64 = rng.random_range(2.5..10.0);
    let t1 = rng.random_range(1.0 / s..1.0 - 1.0 / s);
    DirichletParams::from_parts(s, vec![t1, 1.0 - t1]).unwrap()
}

fn monomial(a: &FrequencyVector, t: &SimplexPoint) -> f64 {
    a.counts()
        .iter()
        .zip(t.coords())
        .map(|(&c, x)| x.powi(c as i32))
        .product()
}

fn conjugacy() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let grid = SimplexGrid::for_density(2, 2000).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let prior = bounded_prior(&mut rng);
        let n = rng.random_range(0..=6);
        let a1 = rng.random_range(0..=n);
        let freq = FrequencyVector::new(vec![a1, n - a1]);
        let (post, log_p) = posterior_update(&prior, &freq).map_err(|e| e.to_string())?;
        let mean = grid_weighted_mean(
            &grid,
            |t| Ok(dirichlet_log_density(&prior, t)? + monomial(&freq, t).ln()),
            |t| t[0],
        )
        .map_err(|e| e.to_string())?;
        let marginal = try_integrate_on_simplex(&grid, |t| {
            Ok::<_, Error>(monomial(&freq, t) * dirichlet_density(&prior, t)?)
        })
        .map_err(|e| e.to_string())?;
        let rel_mean = ((post.t()[0] - mean) / mean).abs();
        let rel_marg = ((log_p.exp() - marginal) / marginal).abs();
        check(
            rel_mean < 1e-3 && rel_marg < 1e-3,
            format!("{prior:?} {freq}: mean {rel_mean:e}, marginal {rel_marg:e}"),
        )?;
        // the marginal also matches its own closed form
        check(
            (log_marginal(&prior, &freq).unwrap() - log_p).abs() < 1e-12,
            "marginal mismatch",
        )?;
        worst = worst.max(rel_mean).max(rel_marg);
    }
    Ok(format!("20 draws, worst relative error {worst:.2e}"))
}

fn postprobs() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let grid = SimplexGrid::for_density(2, 2000).map_err(|e| e.to_string())?;
    let (mut worst_pred, mut worst_w): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        // all-positive 2x2 emission matrices, one or two per scenario
        let matrices: Vec<EmissionMatrix> = (0..rng.random_range(1..=2))
            .map(|_| {
                let c0 = rng.random_range(0.05..0.95);
                let c1 = rng.random_range(0.05..0.95);
                EmissionMatrix::from_columns(vec![vec![c0, 1.0 - c0], vec![c1, 1.0 - c1]]).unwrap()
            })
            .collect();
        let n = rng.random_range(0..=6);
        let obs = (0..n)
            .map(|_| Observation {
                matrix: rng.random_range(0..matrices.len()),
                row: rng.random_range(0..2),
            })
            .collect();
        let data = ManifestDataset::new(matrices, obs).map_err(|e| e.to_string())?;
        let prior = bounded_prior(&mut rng);
        let exact = posterior_predictive_at_t(&data, &prior, 0).map_err(|e| e.to_string())?;
        let oracle = grid_weighted_mean(
            &grid,
            |t| Ok(dirichlet_log_density(&prior, t)? + latent_likelihood(&data, t)?.ln()),
            |t| t[0],
        )
        .map_err(|e| e.to_string())?;
        check(
            (exact - oracle).abs() < 1e-3,
            format!("predictive {exact} vs oracle {oracle}"),
        )?;
        worst_pred = worst_pred.max((exact - oracle).abs());

        let dp = frequency_weights(&data).map_err(|e| e.to_string())?;
        let brute = frequency_weights_by_enumeration(&data).map_err(|e| e.to_string())?;
        check(
            dp.entries().len() == brute.entries().len(),
            "weight supports differ",
        )?;
        for ((a, w), (b, v)) in dp.entries().iter().zip(brute.entries()) {
            check(a == b, "weight keys differ")?;
            let rel = ((w - v) / v).abs();
            check(rel < 1e-12, format!("W{a}: {w} vs {v}"))?;
            worst_w = worst_w.max(rel);
        }
    }
    Ok(format!(
        "10 scenarios, predictive error {worst_pred:.2e}, weight error {worst_w:.2e}"
    ))
}

const MEDICAL: [&str; 5] = [
    "example4-medical-test",
    "medical-test-mixed",
    "medical-test-negatives",
    "medical-test-single",
    "medical-test-six",
];

fn scenario(name: &str) -> Result<Scenario, String> {
    resolve(name, None).map_err(|e| e.to_string())
}

fn vacuity() -> Outcome {
    for name in MEDICAL {
        let sc = scenario(name)?;
        check(
            sc.observations.len() <= 6,
            format!("{name} has more than 6 observations"),
        )?;
        let doc = run_scenario(&sc).map_err(|e| e.to_string())?.doc;
        for j in 0..2 {
            let b = &doc["results"]["outcomes"][j]["bounds"];
            let (lo, hi) = (b["lower"].as_f64().unwrap(), b["upper"].as_f64().unwrap());
            check(
                (0.0..=1e-3).contains(&lo) && (1.0 - 1e-3..=1.0).contains(&hi),
                format!("{name} x{j}: ({lo}, {hi})"),
            )?;
        }
        // the same results through a nearly perfect test
        let data = ManifestDataset::with_shared(
            EmissionMatrix::binary_channel(0.001, 0.001).unwrap(),
            &sc.observations,
        )
        .map_err(|e| e.to_string())?;
        for j in 0..2 {
            let b = predictive_bounds(&data, 2.0, j, &SearchSpec::for_k(2))
                .map_err(|e| e.to_string())?;
            check(
                b.lower <= 1e-3 && b.upper >= 1.0 - 1e-3,
                format!("{name} at eps 0.001, x{j}: {b:?}"),
            )?;
        }
    }
    Ok("5 sequences vacuous at eps 0.1 and 0.001".into())
}

fn sparse_column(rng: &mut StdRng, rows: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..rows)
            .map(|_| {
                if rng.random_bool(0.4) {
                    0.0
                } else {
                    rng.random_range(0.05..1.0)
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            let mut col: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let i = col.iter().position(|v| *v > 0.0).unwrap();
            col[i] += 1.0 - col.iter().sum::<f64>();
            return col;
        }
    }
}

fn diagnosis() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let (mut built, mut upper_fired, mut lower_fired) = (0, 0, 0);
    while built < 30 {
        let k = if built < 15 { 2 } else { 3 };
        let m = EmissionMatrix::from_columns((0..k).map(|_| sparse_column(&mut rng, 3)).collect())
            .unwrap();
        let n = rng.random_range(1..=if k == 2 { 6 } else { 4 });
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let Ok(data) = ManifestDataset::with_shared(m, &rows) else {
            continue;
        };
        built += 1;
        let s = 2.0;
        let floor = 1.0 / (n as f64 + s);
        let diag = vacuity_diagnosis(&data);
        for (j, d) in diag.outcomes.iter().enumerate() {
            let b =
                predictive_bounds(&data, s, j, &SearchSpec::for_k(k)).map_err(|e| e.to_string())?;
            let ctx = format!(
                "case {built} (k={k}) x{j}: flags {d:?}, bounds ({}, {})",
                b.lower, b.upper
            );
            check(
                d.upper_strictly_below_one == (b.upper < 1.0 - 1e-6),
                ctx.clone(),
            )?;
            check(d.lower_strictly_above_zero == (b.lower > 1e-6), ctx.clone())?;
            if d.upper_strictly_below_one {
                upper_fired += 1;
                check(
                    b.upper <= 1.0 - floor + 1e-9,
                    format!("{ctx}: upper above 1 - 1/(n+s)"),
                )?;
            }
            if d.lower_strictly_above_zero {
                lower_fired += 1;
                check(
                    b.lower >= floor - 1e-9,
                    format!("{ctx}: lower below 1/(n+s)"),
                )?;
            }
        }
        let no_flags = diag
            .outcomes
            .iter()
            .all(|o| !o.upper_strictly_below_one && !o.lower_strictly_above_zero);
        check(
            !diag.total_vacuity || no_flags,
            "total vacuity with a flag set",
        )?;
    }
    check(
        upper_fired > 0 && lower_fired > 0,
        "suite never exercised both flags",
    )?;
    Ok(format!(
        "30 cases, upper flag fired {upper_fired} times, lower flag {lower_fired} times"
    ))
}

fn standard_idm() -> Outcome {
    let freq = FrequencyVector::new(vec![2, 1]);
    let limits = standard_idm_predictive_bounds(2.0, &freq, 0).map_err(|e| e.to_string())?;
    check(
        (limits.lower - 0.4).abs() < 1e-6 && (limits.upper - 0.8).abs() < 1e-6,
        format!("limits {limits:?}"),
    )?;

    let data =
        ManifestDataset::with_shared(EmissionMatrix::identity(2).unwrap(), &[0, 0, 1]).unwrap();
    let model = LatentPredictive::new(&frequency_weights(&data).unwrap(), 2.0).unwrap();
    let grid = SimplexGrid::new(2, 2000, BoundaryPolicy::ClampToEpsilon(1e-6)).unwrap();
    let values: Vec<f64> = grid.points().iter().map(|t| model.at(t, 0)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    check(
        (lo - 0.4).abs() < 2e-3 && (hi - 0.8).abs() < 2e-3,
        format!("grid ({lo}, {hi})"),
    )?;

    let doc = run_scenario(&scenario("example5-standard-idm")?)
        .map_err(|e| e.to_string())?
        .doc;
    let b = &doc["results"]["outcomes"][0]["bounds"];
    check(
        (b["lower"].as_f64().unwrap() - 0.4).abs() < 1e-6
            && (b["upper"].as_f64().unwrap() - 0.8).abs() < 1e-6,
        "scenario bounds",
    )?;

    let one =
        ManifestDataset::with_shared(EmissionMatrix::identity(2).unwrap(), &[0, 0, 0]).unwrap();
    let b = predictive_bounds(&one, 2.0, 0, &SearchSpec::for_k(2)).map_err(|e| e.to_string())?;
    check(
        b.lower > 0.0 && (b.upper - 1.0).abs() < 1e-6,
        format!("one outcome: {b:?}"),
    )?;
    Ok(format!(
        "limits ({}, {}), grid ({lo:.6}, {hi:.6}), one outcome ({:.3}, {})",
        limits.lower, limits.upper, b.lower, b.upper
    ))
}

fn num(doc: &Value, pointer: &str) -> Result<f64, String> {
    doc.pointer(pointer)
        .and_then(Value::as_f64)
        .ok_or_else(|| format!("{pointer} missing"))
}

fn vacuous_values() -> Outcome {
    let v = vacuous_prior_upper_predictive(&FrequencyVector::new(vec![1, 1]))
        .map_err(|e| e.to_string())?;
    check(v == 0.25, format!("vacuous upper {v}"))?;
    let sc = scenario("vacuous-product-posterior")?;
    check(
        sc.matrices.iter().all(EmissionMatrix::all_positive),
        "likelihood is not all-positive",
    )?;
    let doc = run_scenario(&sc).map_err(|e| e.to_string())?.doc;
    let r = num(&doc, "/results/final_ratio")?;
    check(r >= 0.24, format!("final ratio {r}"))?;
    Ok(format!(
        "prior upper 0.25, posterior ratio {r:.5} at n = 1000"
    ))
}

fn trends() -> Outcome {
    let doc = run_scenario(&scenario("theorem-a1-concentration")?)
        .map_err(|e| e.to_string())?
        .doc;
    let rows = doc["results"]["rows"].as_array().ok_or("no rows")?;
    let masses: Vec<f64> = rows
        .iter()
        .map(|r| r["masses"][0]["mass"].as_f64().unwrap())
        .collect();
    let idx: Vec<u64> = rows.iter().map(|r| r["index"].as_u64().unwrap()).collect();
    check(idx == [10, 100, 1000], format!("schedule {idx:?}"))?;
    check(
        masses.windows(2).all(|w| w[1] >= w[0]) && masses[2] >= 0.99,
        format!("masses {masses:?}"),
    )?;
    let gap = num(&doc, "/results/final_gap")?;
    check(gap <= 0.01, format!("positive-L gap {gap}"))?;

    let contrast = run_scenario(&scenario("concentration-contrast")?)
        .map_err(|e| e.to_string())?
        .doc;
    let cgap = num(&contrast, "/results/final_gap")?;
    check(cgap >= 0.05, format!("contrast gap {cgap}"))?;
    Ok(format!(
        "masses {:.4} {:.4} {:.4}, gap {gap:.2e}, contrast gap {cgap:.4}",
        masses[0], masses[1], masses[2]
    ))
}

fn approaches() -> Outcome {
    let mut count = 0;
    for (name, _) in BUNDLED {
        let sc = scenario(name)?;
        let binary = sc.matrices.len() == 1
            && sc.channel().is_ok()
            && sc.observations.iter().all(|&o| o < 2);
        if !binary {
            continue;
        }
        let ch = sc.channel().unwrap();
        let (n1, n) = (sc.positives(), sc.observations.len());
        let b = scaled_beta_posterior_bounds(&ch, n1, n, 2.0, &SearchSpec::for_k(2))
            .map_err(|e| e.to_string())?;
        check(
            (b.lower - ch.eps1()).abs() < 2e-3 && (b.upper - (1.0 - ch.eps2())).abs() < 2e-3,
            format!("{name}: ({}, {})", b.lower, b.upper),
        )?;
        count += 1;
    }
    let ch = BinaryChannel::new(0.1, 0.1).unwrap();
    let (_, upper, _) = naive_latent_bounds(&ch, 3, 3, 2.0).map_err(|e| e.to_string())?;
    check(
        (upper.value - 1.125).abs() < 1e-12 && upper.out_of_range,
        format!("naive {upper:?}"),
    )?;
    let doc = run_scenario(&scenario("section5-naive-witness")?)
        .map_err(|e| e.to_string())?
        .doc;
    check(
        doc["results"]["reconstructed"]["upper"]["out_of_range"] == true,
        "witness not flagged",
    )?;
    let d = direct_manifest_idm(3, 3, 2.0).map_err(|e| e.to_string())?;
    check(
        (d.bounds.lower - 0.6).abs() < 1e-12 && (d.bounds.upper - 1.0).abs() < 1e-12,
        format!("direct {d:?}"),
    )?;
    Ok(format!(
        "scaled-beta vacuous on {count} bundled datasets, naive 1.125 flagged, direct (0.6, 1.0)"
    ))
}

fn determinism() -> Outcome {
    let summary = selftest().map_err(|e| e.to_string())?;
    check(summary.failures() == 0, summary.render())?;
    let bin = env!("CARGO_BIN_EXE_latent-idm");
    for (name, _) in BUNDLED {
        let run = || {
            Command::new(bin)
                .args(["run", name])
                .env_remove("LATENT_IDM_SCENARIO_DIR")
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        check(
            a.status.success() && a.stdout == b.stdout,
            format!("{name}: re-run differs"),
        )?;
        let sc = scenario(name)?;
        let seq = with_sequential(|| run_scenario(&sc).and_then(|r| r.render(Format::Doc)))
            .map_err(|e| e.to_string())?;
        check(
            seq.as_bytes() == a.stdout.as_slice(),
            format!("{name}: sequential report differs"),
        )?;
    }
    Ok(format!(
        "{} checks, {} scenarios re-run identically",
        summary.lines.len(),
        BUNDLED.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 conjugacy oracle", Duration::from_secs(10), conjugacy),
        (
            "2 latent predictive oracle",
            Duration::from_secs(30),
            postprobs,
        ),
        (
            "3 vacuity through positive emissions",
            Duration::from_secs(60),
            vacuity,
        ),
        (
            "4 diagnosis agrees with bounds",
            Duration::from_secs(60),
            diagnosis,
        ),
        ("5 standard IDM", Duration::from_secs(60), standard_idm),
        ("6 vacuous values", Duration::from_secs(60), vacuous_values),
        ("7 concentration trends", Duration::from_secs(120), trends),
        ("8 manifest approaches", Duration::from_secs(60), approaches),
        ("9 CLI determinism", Duration::from_secs(120), determinism),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > limit => Err(format!("{d}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name}  [{elapsed:.2?}]  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}  [{elapsed:.2?}]  {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
