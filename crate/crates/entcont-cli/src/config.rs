//! Experiment configuration: `key = value` files merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    DivergenceCloud,
    DivergenceHeatmap,
    BsRemainder,
    VariationalViolation,
    VerifySuite,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::DivergenceCloud,
        Experiment::DivergenceHeatmap,
        Experiment::BsRemainder,
        Experiment::VariationalViolation,
        Experiment::VerifySuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DivergenceCloud => "fig-divergence-cloud",
            Experiment::DivergenceHeatmap => "fig-divergence-heatmap",
            Experiment::BsRemainder => "fig-bs-remainder",
            Experiment::VariationalViolation => "fig-variational-violation",
            Experiment::VerifySuite => "verify-suite",
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Experiment::DivergenceCloud => 1000,
            Experiment::DivergenceHeatmap => 0,
            Experiment::BsRemainder => 500,
            Experiment::VariationalViolation => 100_000,
            Experiment::VerifySuite => 0,
        }
    }

    fn default_dims(self) -> Vec<usize> {
        match self {
            Experiment::DivergenceCloud | Experiment::DivergenceHeatmap => vec![2],
            _ => vec![2, 2],
        }
    }

    fn default_min_eig(self) -> (f64, f64) {
        match self {
            Experiment::DivergenceCloud => (1e-8, 1e-4),
            Experiment::DivergenceHeatmap => (1e-20, 0.5),
            Experiment::BsRemainder => (1e-32, 1e-4),
            Experiment::VariationalViolation => (1e-4, 1e-2),
            Experiment::VerifySuite => (1e-3, 1e-3),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment '{s}'")))
    }
}

/// Deliberate defects injected into the verification suite to prove it can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Replace `h(p)` by `−h(p)` wherever the suite evaluates it.
    FlipEntropySign,
}

impl Mutation {
    pub fn name(self) -> &'static str {
        match self {
            Mutation::FlipEntropySign => "flip-h-sign",
        }
    }
}

impl FromStr for Mutation {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "flip-h-sign" => Ok(Mutation::FlipEntropySign),
            _ => Err(CliError::Config(format!("unknown mutation '{s}'"))),
        }
    }
}

/// Named tolerances with their defaults.
pub const TOLERANCES: [(&str, f64); 6] = [
    ("invariant", 1e-8),
    ("identity", 1e-9),
    ("reverse", 1e-8),
    ("violation", 1e-6),
    ("heatmap", 1e-6),
    ("endpoint", 1e-9),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    fn set(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        if !self.0.contains_key(name) {
            let known: Vec<&str> = TOLERANCES.iter().map(|(k, _)| *k).collect();
            return Err(CliError::Config(format!("unknown tolerance '{name}' (known: {})", known.join(", "))));
        }
        if !(value >= 0.0 && value.is_finite()) {
            return Err(CliError::Config(format!("tolerance {name} = {value} must be a finite non-negative number")));
        }
        self.0.insert(name.to_string(), value);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.0.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub samples: usize,
    pub dims: Vec<usize>,
    /// Log-range of minimal eigenvalues.
    pub min_eig_range: (f64, f64),
    pub seed: u64,
    pub out_dir: PathBuf,
    pub tolerances: Tolerances,
    /// Heatmap resolution per axis.
    pub grid: usize,
    /// `None` runs every check of the verification suite.
    pub checks: Option<Vec<String>>,
    pub mutation: Option<Mutation>,
}

impl ExperimentConfig {
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Resolved settings as sorted `key = value` pairs, without the output
    /// directory, which does not affect file contents.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), self.experiment.name().into());
        m.insert("samples".into(), self.samples.to_string());
        m.insert("dims".into(), join(&self.dims));
        m.insert("min_eig_lo".into(), format!("{:e}", self.min_eig_range.0));
        m.insert("min_eig_hi".into(), format!("{:e}", self.min_eig_range.1));
        m.insert("seed".into(), self.seed.to_string());
        m.insert("grid".into(), self.grid.to_string());
        if let Some(c) = &self.checks {
            m.insert("checks".into(), c.join(","));
        }
        if let Some(x) = self.mutation {
            m.insert("mutation".into(), x.name().into());
        }
        for (k, v) in self.tolerances.iter() {
            m.insert(format!("tol.{k}"), format!("{v:e}"));
        }
        m
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

/// Raw settings collected from a file and flags before validation.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    raw: BTreeMap<String, String>,
}

const KEYS: [&str; 10] = ["experiment", "samples", "dims", "min_eig_lo", "min_eig_hi", "seed", "out", "grid", "checks", "mutation"];

fn normalize_key(key: &str) -> Result<String, CliError> {
    let k = key.trim().replace('-', "_");
    if let Some(rest) = k.strip_prefix("tol.").or_else(|| k.strip_prefix("tol_")) {
        return Ok(format!("tol.{rest}"));
    }
    if KEYS.contains(&k.as_str()) {
        Ok(k)
    } else {
        Err(CliError::Config(format!("unknown configuration key '{key}'")))
    }
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses UTF-8 `key = value` lines; `#` starts a comment.
    pub fn parse_file_contents(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v.trim())?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        self.parse_file_contents(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let k = normalize_key(key)?;
        self.raw.insert(k, value.to_string());
        Ok(())
    }

    pub fn build(&self) -> Result<ExperimentConfig, CliError> {
        let experiment: Experiment = self
            .raw
            .get("experiment")
            .ok_or_else(|| CliError::Config("no experiment given".into()))?
            .parse()?;
        let samples = match self.raw.get("samples") {
            Some(s) => parse::<usize>("samples", s)?,
            None => experiment.default_samples(),
        };
        let dims = match self.raw.get("dims") {
            Some(s) => parse_dims(s)?,
            None => experiment.default_dims(),
        };
        let (mut lo, mut hi) = experiment.default_min_eig();
        if let Some(s) = self.raw.get("min_eig_lo") {
            lo = parse::<f64>("min_eig_lo", s)?;
        }
        if let Some(s) = self.raw.get("min_eig_hi") {
            hi = parse::<f64>("min_eig_hi", s)?;
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(CliError::Config(format!("minimal-eigenvalue range [{lo}, {hi}] must satisfy 0 < lo ≤ hi")));
        }
        let seed = match self.raw.get("seed") {
            Some(s) => parse::<u64>("seed", s)?,
            None => 0,
        };
        let out_dir = PathBuf::from(self.raw.get("out").map(String::as_str).unwrap_or("out"));
        let grid = match self.raw.get("grid") {
            Some(s) => parse::<usize>("grid", s)?,
            None => 64,
        };
        if grid == 0 {
            return Err(CliError::Config("grid must be at least 1".into()));
        }
        let checks = self.raw.get("checks").map(|s| {
            s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect::<Vec<_>>()
        });
        let mutation = self.raw.get("mutation").map(|s| s.parse()).transpose()?;
        let mut tolerances = Tolerances::default();
        for (k, v) in &self.raw {
            if let Some(name) = k.strip_prefix("tol.") {
                tolerances.set(name, parse::<f64>(k, v)?)?;
            }
        }
        let cfg = ExperimentConfig { experiment, samples, dims, min_eig_range: (lo, hi), seed, out_dir, tolerances, grid, checks, mutation };
        validate(&cfg)?;
        Ok(cfg)
    }
}

fn parse<T: FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| CliError::Config(format!("invalid value '{s}' for {key}")))
}

fn parse_dims(s: &str) -> Result<Vec<usize>, CliError> {
    let dims: Vec<usize> = s
        .split([',', 'x'])
        .map(|x| parse::<usize>("dims", x))
        .collect::<Result<_, _>>()?;
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(CliError::Config(format!("invalid dims '{s}'")));
    }
    Ok(dims)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let d = cfg.total_dim();
    match cfg.experiment {
        Experiment::DivergenceCloud => {
            if d < 2 {
                return Err(CliError::Config("the divergence cloud needs total dimension ≥ 2".into()));
            }
            if cfg.min_eig_range.1 >= 1.0 / d as f64 {
                return Err(CliError::Config(format!("min_eig_hi must be below 1/{d}")));
            }
        }
        Experiment::BsRemainder | Experiment::VariationalViolation => {
            if cfg.dims.len() != 2 || d < 2 {
                return Err(CliError::Config(format!("{} needs a bipartite dims = dA,dB", cfg.experiment)));
            }
            if cfg.min_eig_range.1 >= 1.0 / d as f64 {
                return Err(CliError::Config(format!("min_eig_hi must be below 1/{d}")));
            }
        }
        Experiment::DivergenceHeatmap | Experiment::VerifySuite => {}
    }
    if cfg.mutation.is_some() && cfg.experiment != Experiment::VerifySuite {
        return Err(CliError::Config("mutations only apply to verify-suite".into()));
    }
    Ok(())
}

/// Rewrites `--tol-NAME=V` and `--tol-NAME V` into `--tol NAME=V`.
pub fn expand_tolerance_flags<I: IntoIterator<Item = String>>(args: I) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.into_iter().peekable();
    while let Some(a) = it.next() {
        match a.strip_prefix("--tol-") {
            Some(rest) => {
                out.push("--tol".into());
                match rest.split_once('=') {
                    Some((k, v)) => out.push(format!("{k}={v}")),
                    None => {
                        let v = it.next().unwrap_or_default();
                        out.push(format!("{rest}={v}"));
                    }
                }
            }
            None => out.push(a),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut b = ConfigBuilder::new();
        b.parse_file_contents("# comment\nexperiment = fig-divergence-cloud\nsamples = 10\nmin-eig-lo = 1e-6\ntol_invariant = 1e-7\n")
            .unwrap();
        b.set("samples", "20").unwrap();
        let cfg = b.build().unwrap();
        assert_eq!(cfg.samples, 20);
        assert_eq!(cfg.min_eig_range, (1e-6, 1e-4));
        assert_eq!(cfg.tolerances.get("invariant"), 1e-7);
        assert_eq!(cfg.dims, vec![2]);
    }

    #[test]
    fn rejects_bad_input() {
        let mut b = ConfigBuilder::new();
        assert!(b.set("colour", "blue").is_err());
        b.set("experiment", "fig-unknown").unwrap();
        assert!(b.build().is_err());
        let mut b = ConfigBuilder::new();
        b.set("experiment", "fig-divergence-cloud").unwrap();
        b.set("tol.nonsense", "1").unwrap();
        assert!(b.build().is_err());
        let mut b = ConfigBuilder::new();
        b.set("experiment", "fig-bs-remainder").unwrap();
        b.set("dims", "4").unwrap();
        assert!(b.build().is_err());
        assert!(ConfigBuilder::new().parse_file_contents("no equals sign").is_err());
    }

    #[test]
    fn tolerance_flags_expand() {
        let args = ["x", "--tol-invariant=1e-7", "--tol-heatmap", "1e-5", "--seed", "3"].map(String::from);
        let out = expand_tolerance_flags(args);
        assert_eq!(out, ["x", "--tol", "invariant=1e-7", "--tol", "heatmap=1e-5", "--seed", "3"]);
    }

    #[test]
    fn echo_ignores_output_directory() {
        let mut a = ConfigBuilder::new();
        a.set("experiment", "verify-suite").unwrap();
        let mut b = a.clone();
        a.set("out", "/tmp/a").unwrap();
        b.set("out", "/tmp/b").unwrap();
        assert_eq!(a.build().unwrap().echo(), b.build().unwrap().echo());
    }
}
