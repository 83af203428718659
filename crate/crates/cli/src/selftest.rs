//! Checks every bundled scenario against the assertion manifest.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::Value;

use crate::catalog::{bundled, ASSERTIONS};
use crate::error::{CliError, CliResult};
use crate::report::{run_scenario, Format};

/// One expectation on a JSON-pointer location of a report document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    pub pointer: String,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
    pub equals: Option<Value>,
    pub at_least: Option<f64>,
    pub at_most: Option<f64>,
}

impl Assertion {
    /// `Ok(())` when the document satisfies the assertion, else the reason.
    pub fn check(&self, doc: &Value) -> Result<(), String> {
        let v = doc
            .pointer(&self.pointer)
            .ok_or_else(|| format!("{} missing", self.pointer))?;
        let num = || {
            v.as_f64()
                .ok_or_else(|| format!("{} = {v} is not a number", self.pointer))
        };
        if let Some(e) = self.expected {
            let tol = self.tolerance.unwrap_or(0.0);
            let x = num()?;
            if !((x - e).abs() <= tol) {
                return Err(format!("{} = {x}, expected {e} ± {tol}", self.pointer));
            }
        }
        if let Some(e) = &self.equals {
            if v != e {
                return Err(format!("{} = {v}, expected {e}", self.pointer));
            }
        }
        if let Some(lo) = self.at_least {
            let x = num()?;
            if !(x >= lo) {
                return Err(format!("{} = {x}, expected at least {lo}", self.pointer));
            }
        }
        if let Some(hi) = self.at_most {
            let x = num()?;
            if !(x <= hi) {
                return Err(format!("{} = {x}, expected at most {hi}", self.pointer));
            }
        }
        Ok(())
    }
}

pub fn assertion_manifest() -> CliResult<BTreeMap<String, Vec<Assertion>>> {
    serde_json::from_str(ASSERTIONS)
        .map_err(|e| CliError::Selftest(format!("assertion manifest: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub scenario: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct SelftestSummary {
    pub lines: Vec<CheckLine>,
}

impl SelftestSummary {
    pub fn failures(&self) -> usize {
        self.lines.iter().filter(|l| !l.passed).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let status = if l.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {}  {}", l.scenario, l.check));
            if !l.detail.is_empty() {
                out.push_str(&format!("  ({})", l.detail));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "{} checks, {} failed\n",
            self.lines.len(),
            self.failures()
        ));
        out
    }
}

/// Runs each bundled scenario twice, compares the documents byte for byte,
/// and evaluates its assertions.
pub fn selftest() -> CliResult<SelftestSummary> {
    let manifest = assertion_manifest()?;
    let mut summary = SelftestSummary::default();
    let mut push = |scenario: &str, check: String, result: Result<(), String>| {
        summary.lines.push(CheckLine {
            scenario: scenario.to_string(),
            check,
            passed: result.is_ok(),
            detail: result.err().unwrap_or_default(),
        });
    };
    let entries = bundled();
    for name in manifest.keys() {
        if !entries.iter().any(|e| &e.name == name) {
            push(name, "scenario exists".into(), Err("not bundled".into()));
        }
    }
    for e in &entries {
        let sc = match &e.parsed {
            Ok(sc) => sc,
            Err(err) => {
                push(&e.name, "parses".into(), Err(err.to_string()));
                continue;
            }
        };
        let first = run_scenario(sc).and_then(|r| Ok((r.render(Format::Doc)?, r)));
        let (text, report) = match first {
            Ok(x) => x,
            Err(err) => {
                push(&e.name, "runs".into(), Err(err.to_string()));
                continue;
            }
        };
        let again = run_scenario(sc).and_then(|r| r.render(Format::Doc));
        push(
            &e.name,
            "re-run is byte-identical".into(),
            match again {
                Ok(t) if t == text => Ok(()),
                Ok(_) => Err("documents differ".into()),
                Err(err) => Err(err.to_string()),
            },
        );
        match manifest.get(&e.name) {
            Some(checks) => {
                for a in checks {
                    push(&e.name, a.pointer.clone(), a.check(&report.doc));
                }
            }
            None => push(
                &e.name,
                "has assertions".into(),
                Err("missing from manifest".into()),
            ),
        }
    }
    Ok(summary)
}
