//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use harmonicity::Domain;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::ExperimentError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Modulus,
    Kfunc,
    Pizzetti,
    Kernel,
    Approx,
    Rates,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Modulus,
        Experiment::Kfunc,
        Experiment::Pizzetti,
        Experiment::Kernel,
        Experiment::Approx,
        Experiment::Rates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Modulus => "modulus",
            Experiment::Kfunc => "kfunc",
            Experiment::Pizzetti => "pizzetti",
            Experiment::Kernel => "kernel",
            Experiment::Approx => "approx",
            Experiment::Rates => "rates",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain, ExperimentError> {
        Ok(match self {
            DomainSpec::Ball { center, radius } => Domain::ball(center, *radius)?,
            DomainSpec::Box { lo, hi } => Domain::cuboid(lo, hi)?,
        })
    }
}

/// Every parameter of a run. Serialised field order is fixed, which makes
/// the JSON form a stable input for the config hash.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub field: String,
    pub dim: usize,
    pub domain: DomainSpec,
    pub u_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub t_refine: usize,
    pub x_density: f64,
    pub sphere_budget: usize,
    pub inner_margin: f64,
    pub candidate_radii: Vec<f64>,
    pub inner_t: Vec<f64>,
    pub pairs: usize,
    pub radius_max: f64,
    pub k: usize,
    pub nu: usize,
    pub p: usize,
    pub p_list: Vec<usize>,
    pub r: usize,
    pub conv_grid: f64,
    pub eval_grid: f64,
    pub bvp_spacing: f64,
    pub bvp_tol: f64,
    pub modulus_density: f64,
    pub seed: u64,
    pub dump_grid: bool,
}

/// Keys accepted in config files and as `--key value` overrides.
pub const KEYS: [&str; 30] = [
    "experiment",
    "field",
    "dim",
    "domain",
    "center",
    "radius",
    "lo",
    "hi",
    "u_grid",
    "t_grid",
    "t_refine",
    "x_density",
    "sphere_budget",
    "inner_margin",
    "candidate_radii",
    "inner_t",
    "pairs",
    "radius_max",
    "k",
    "nu",
    "p",
    "p_list",
    "r",
    "conv_grid",
    "eval_grid",
    "bvp_spacing",
    "bvp_tol",
    "modulus_density",
    "seed",
    "dump_grid",
];

/// Raw key/value pairs in the order of precedence they were applied.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut raw = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ExperimentError::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1)))?;
            raw.set(k.trim(), v.trim())?;
        }
        Ok(raw)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        let key = key.trim_start_matches("--").replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(ExperimentError::Config(format!("unknown config key '{key}'")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn merge(&mut self, other: &RawConfig) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn scalar<T: FromStr>(&self, key: &str, default: T) -> Result<T, ExperimentError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ExperimentError::Config(format!("cannot parse {key} = '{v}'"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>, ExperimentError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    s.parse().map_err(|_| ExperimentError::Config(format!("cannot parse entry '{s}' of {key}")))
                })
                .collect(),
        }
    }

    /// Resolves defaults and validates. `experiment` may come from the
    /// command line instead of the file.
    pub fn resolve(&self, experiment: Option<Experiment>) -> Result<ExperimentConfig, ExperimentError> {
        let experiment = match (experiment, self.get("experiment")) {
            (Some(e), _) => e,
            (None, Some(s)) => s.parse()?,
            (None, None) => return Err(ExperimentError::Config("no experiment given".into())),
        };
        let dim: usize = self.scalar("dim", 2)?;
        let domain = match self.get("domain").unwrap_or("ball") {
            "ball" | "disk" => DomainSpec::Ball {
                center: self.list("center", vec![0.0; dim])?,
                radius: self.scalar("radius", 1.0)?,
            },
            "box" => DomainSpec::Box {
                lo: self.list("lo", vec![-1.0; dim])?,
                hi: self.list("hi", vec![1.0; dim])?,
            },
            other => return Err(ExperimentError::Config(format!("unknown domain kind '{other}' (use ball or box)"))),
        };
        let cfg = ExperimentConfig {
            experiment,
            field: self.scalar("field", "radial_sq".to_string())?,
            dim,
            domain,
            u_grid: self.list("u_grid", vec![0.05, 0.1, 0.2, 0.4])?,
            t_grid: self.list("t_grid", vec![0.05, 0.1, 0.2])?,
            t_refine: self.scalar("t_refine", harmonicity::modulus::DEFAULT_T_REFINE)?,
            x_density: self.scalar("x_density", 1.0 / 32.0)?,
            sphere_budget: self.scalar("sphere_budget", 64)?,
            inner_margin: self.scalar("inner_margin", 0.4)?,
            candidate_radii: self.list("candidate_radii", vec![0.05, 0.1, 0.2])?,
            inner_t: self.list("inner_t", vec![0.25, 0.5, 1.0])?,
            pairs: self.scalar("pairs", 50)?,
            radius_max: self.scalar("radius_max", 0.5)?,
            k: self.scalar("k", 3)?,
            nu: self.scalar("nu", 4)?,
            p: self.scalar("p", 8)?,
            p_list: self.list("p_list", vec![4, 8, 16, 32])?,
            r: self.scalar("r", 0)?,
            conv_grid: self.scalar("conv_grid", 1.0 / 100.0)?,
            eval_grid: self.scalar("eval_grid", 1.0 / 50.0)?,
            bvp_spacing: self.scalar("bvp_spacing", harmonicity::dirichlet::DEFAULT_SPACING)?,
            bvp_tol: self.scalar("bvp_tol", harmonicity::dirichlet::DEFAULT_TOL)?,
            modulus_density: self.scalar("modulus_density", 1.0 / 64.0)?,
            seed: self.scalar("seed", 0)?,
            dump_grid: self.scalar("dump_grid", false)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn ascending<T: PartialOrd + fmt::Debug>(name: &str, v: &[T]) -> Result<(), ExperimentError> {
    if v.is_empty() {
        return Err(ExperimentError::Config(format!("{name} is empty")));
    }
    if v.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ExperimentError::Config(format!("{name} must be strictly ascending, got {v:?}")));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<(), ExperimentError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ExperimentError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let field = crate::catalog::lookup(&self.field, self.dim)?;
        match &self.domain {
            DomainSpec::Ball { center, .. } if center.len() != self.dim => {
                return Err(ExperimentError::Config(format!("center has {} coordinates, dim is {}", center.len(), self.dim)))
            }
            DomainSpec::Box { lo, hi } if lo.len() != self.dim || hi.len() != self.dim => {
                return Err(ExperimentError::Config(format!("box corners must have {} coordinates", self.dim)))
            }
            _ => {}
        }
        self.domain.build()?;
        ascending("u_grid", &self.u_grid)?;
        ascending("t_grid", &self.t_grid)?;
        ascending("candidate_radii", &self.candidate_radii)?;
        ascending("inner_t", &self.inner_t)?;
        ascending("p_list", &self.p_list)?;
        for (name, v) in [
            ("x_density", self.x_density),
            ("inner_margin", self.inner_margin),
            ("radius_max", self.radius_max),
            ("conv_grid", self.conv_grid),
            ("eval_grid", self.eval_grid),
            ("bvp_spacing", self.bvp_spacing),
            ("bvp_tol", self.bvp_tol),
            ("modulus_density", self.modulus_density),
        ] {
            positive(name, v)?;
        }
        for &u in self.u_grid.iter().chain(&self.t_grid).chain(&self.candidate_radii).chain(&self.inner_t) {
            positive("grid entry", u)?;
        }
        if self.t_refine == 0 || self.pairs == 0 {
            return Err(ExperimentError::Config("t_refine and pairs must be at least 1".into()));
        }
        let needs_order = match self.experiment {
            Experiment::Pizzetti => 1,
            Experiment::Approx | Experiment::Rates => self.r,
            _ => 0,
        };
        if needs_order > field.max_order() {
            return Err(ExperimentError::Config(format!(
                "field '{}' has Laplacians up to order {}, the {} experiment needs order {needs_order}",
                self.field,
                field.max_order(),
                self.experiment
            )));
        }
        Ok(())
    }

    /// Canonical JSON text of the configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
