//! Bundled scenarios, the custom scenario directory, and report output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};
use crate::scenario::{parse_scenario, Scenario};

/// Environment variable naming a directory of extra `*.toml` scenarios.
pub const SCENARIO_DIR_ENV: &str = "LATENT_IDM_SCENARIO_DIR";

macro_rules! bundle {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../scenarios/", $name, ".toml")))),*]
    };
}

/// (file stem, document) for every bundled scenario, in listing order.
pub const BUNDLED: &[(&str, &str)] = bundle![
    "example4-medical-test",
    "medical-test-mixed",
    "medical-test-negatives",
    "medical-test-single",
    "medical-test-six",
    "medical-test-tiny-error",
    "medical-test-diagnosis",
    "example5-standard-idm",
    "perfect-observation-one-outcome",
    "partial-diagnosis-k3",
    "section5-scaled-beta",
    "section5-naive-witness",
    "direct-manifest-idm",
    "theorem-a1-concentration",
    "concentration-contrast",
    "vacuous-product-posterior",
];

/// Expected values for the bundled scenarios.
pub const ASSERTIONS: &str = include_str!("../scenarios/assertions.json");

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Bundled(&'static str),
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub source: Source,
    /// The parsed scenario, or the reason it failed to parse.
    pub parsed: Result<Scenario, CliError>,
}

impl Entry {
    pub fn text(&self) -> CliResult<String> {
        match &self.source {
            Source::Bundled(text) => Ok(text.to_string()),
            Source::File(p) => read(p),
        }
    }

    pub fn origin(&self) -> String {
        match &self.source {
            Source::Bundled(_) => format!("bundled:{}", self.name),
            Source::File(p) => p.display().to_string(),
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn bundled() -> Vec<Entry> {
    BUNDLED
        .iter()
        .map(|(stem, text)| {
            let parsed = parse_scenario(text, &format!("bundled:{stem}"));
            Entry {
                name: parsed
                    .as_ref()
                    .map(|s| s.name.clone())
                    .unwrap_or_else(|_| stem.to_string()),
                source: Source::Bundled(text),
                parsed,
            }
        })
        .collect()
}

/// `*.toml` files of `dir`, sorted by file name. A missing directory is empty.
pub fn custom(dir: &Path) -> CliResult<Vec<Entry>> {
    let rd = match fs::read_dir(dir) {
        Ok(rd) => rd,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::Io(format!("{}: {e}", dir.display()))),
    };
    let mut paths: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = read(&p)?;
            let parsed = parse_scenario(&text, &p.display().to_string());
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(Entry {
                name: parsed.as_ref().map(|s| s.name.clone()).unwrap_or(stem),
                source: Source::File(p),
                parsed,
            })
        })
        .collect()
}

/// Bundled scenarios followed by those of the custom directory, if any.
pub fn catalog(custom_dir: Option<&Path>) -> CliResult<Vec<Entry>> {
    let mut all = bundled();
    if let Some(dir) = custom_dir {
        all.extend(custom(dir)?);
    }
    Ok(all)
}

pub fn custom_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(SCENARIO_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// One line per scenario: name, kind, and what it reproduces.
pub fn listing(entries: &[Entry]) -> String {
    let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for e in entries {
        let tag = match e.source {
            Source::Bundled(_) => "",
            Source::File(_) => " [custom]",
        };
        let line = match &e.parsed {
            Ok(s) => format!(
                "{:width$}  {:20}  {}{tag}\n",
                e.name,
                s.kind.as_str(),
                s.reproduces
            ),
            Err(err) => format!("{:width$}  {:20}  {err}{tag}\n", e.name, "invalid"),
        };
        out.push_str(&line);
    }
    out
}

/// Loads a scenario given either a file path or a catalogue name.
pub fn resolve(arg: &str, custom_dir: Option<&Path>) -> CliResult<Scenario> {
    let path = Path::new(arg);
    if path.is_file() {
        return parse_scenario(&read(path)?, arg);
    }
    let entries = catalog(custom_dir)?;
    match entries.into_iter().find(|e| e.name == arg) {
        Some(e) => e.parsed,
        None => Err(CliError::scenario(
            arg,
            None,
            "no such scenario file or name (see `latent-idm list`)",
        )),
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
