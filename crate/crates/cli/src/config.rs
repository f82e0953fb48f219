// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` experiment configuration.
//!
//! One entry per line, `#` starts a comment, and list-valued keys are
//! repeated. Unknown keys and repeated scalar keys are errors.

use std::fmt;
use std::fmt::Write as _;

use semiflow::gallery::{CouplingRecipe, Family, GalleryRecipe};
use semiflow::harness::DEFAULT_FIT_WINDOW;
use semiflow::Scheme;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    /// 1-based; 0 when the problem is not tied to a single line.
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Emit {
    #[default]
    Csv,
    Json,
}

impl Emit {
    pub fn name(self) -> &'static str {
        match self {
            Emit::Csv => "csv",
            Emit::Json => "json",
        }
    }
}

/// A problem described inline instead of by catalog id.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomProblem {
    pub id: String,
    pub family: Family,
    pub n1: usize,
    pub n2: usize,
    pub coupling: CouplingChoice,
    pub coupling_scale: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingChoice {
    RandomBounded,
    IdentityLike,
}

impl CouplingChoice {
    fn name(self) -> &'static str {
        match self {
            CouplingChoice::RandomBounded => "random_bounded",
            CouplingChoice::IdentityLike => "identity_like",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "random_bounded" => Some(CouplingChoice::RandomBounded),
            "identity_like" => Some(CouplingChoice::IdentityLike),
            _ => None,
        }
    }
}

impl CustomProblem {
    pub fn recipe(&self) -> GalleryRecipe {
        let coupling = match self.coupling {
            CouplingChoice::RandomBounded => CouplingRecipe::RandomBounded {
                scale: self.coupling_scale,
            },
            CouplingChoice::IdentityLike => CouplingRecipe::IdentityLike {
                scale: self.coupling_scale,
            },
        };
        GalleryRecipe {
            id: self.id.clone(),
            family: self.family,
            dims: (self.n1, self.n2),
            coupling,
            seed: self.seed,
            description: "defined in configuration".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Catalog ids; `all` expands to the whole catalog.
    pub problems: Vec<String>,
    pub custom: Option<CustomProblem>,
    pub schemes: Vec<Scheme>,
    pub t_values: Vec<f64>,
    pub n_values: Vec<u64>,
    pub output_path: String,
    pub emit: Emit,
    pub record_timing: bool,
    pub fit_window: (u64, u64),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problems: Vec::new(),
            custom: None,
            schemes: vec![Scheme::Ao],
            t_values: vec![1.0],
            n_values: (0..=11).map(|k| 1u64 << k).collect(),
            output_path: "semiflow-out".into(),
            emit: Emit::Csv,
            record_timing: false,
            fit_window: DEFAULT_FIT_WINDOW,
        }
    }
}

const KEYS: &[&str] = &[
    "problem",
    "id",
    "family",
    "n1",
    "n2",
    "coupling",
    "coupling_scale",
    "seed",
    "scheme",
    "t",
    "n",
    "output_path",
    "emit",
    "record_timing",
    "fit_min",
    "fit_max",
];

const LIST_KEYS: &[&str] = &["problem", "scheme", "t", "n"];

#[derive(Default)]
struct Raw {
    entries: Vec<(usize, String, String)>,
}

impl Raw {
    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
        self.entries
            .iter()
            .filter(move |(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
    }

    fn one<'a>(&'a self, key: &'a str) -> Option<(usize, &'a str)> {
        self.all(key).next()
    }
}

fn parse_value<T: std::str::FromStr>(
    line: usize,
    key: &str,
    value: &str,
) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::new(line, format!("invalid value `{value}` for `{key}`")))
}

fn positive_real(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse_value(line, key, value)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::new(
            line,
            format!("`{key}` must be a positive real, got `{value}`"),
        ))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Raw::default();
        for (i, line) in text.lines().enumerate() {
            let no = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                ConfigError::new(no, format!("expected `key = value`, got `{content}`"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::new(no, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(ConfigError::new(no, format!("missing value for `{key}`")));
            }
            if !LIST_KEYS.contains(&key) {
                if let Some((first, _)) = raw.one(key) {
                    return Err(ConfigError::new(
                        no,
                        format!("`{key}` already set on line {first}"),
                    ));
                }
            }
            raw.entries.push((no, key.to_string(), value.to_string()));
        }
        Self::from_raw(&raw)
    }

    fn from_raw(raw: &Raw) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig {
            problems: raw.all("problem").map(|(_, v)| v.to_string()).collect(),
            ..ExperimentConfig::default()
        };
        for (line, id) in raw.all("problem") {
            if id != "all" && semiflow::find_recipe(id).is_none() {
                return Err(ConfigError::new(line, format!("unknown problem `{id}`")));
            }
        }
        cfg.custom = Self::custom_from_raw(raw)?;

        let schemes: Vec<Scheme> = raw
            .all("scheme")
            .map(|(line, v)| {
                Scheme::parse(v)
                    .ok_or_else(|| ConfigError::new(line, format!("unknown scheme `{v}`")))
            })
            .collect::<Result<_, _>>()?;
        if !schemes.is_empty() {
            cfg.schemes = schemes;
        }
        let ts: Vec<f64> = raw
            .all("t")
            .map(|(line, v)| positive_real(line, "t", v))
            .collect::<Result<_, _>>()?;
        if !ts.is_empty() {
            cfg.t_values = ts;
        }
        let ns: Vec<(usize, u64)> = raw
            .all("n")
            .map(|(line, v)| parse_value::<u64>(line, "n", v).map(|n| (line, n)))
            .collect::<Result<_, _>>()?;
        for w in ns.windows(2) {
            if w[1].1 <= w[0].1 {
                return Err(ConfigError::new(
                    w[1].0,
                    "`n` values must be strictly ascending",
                ));
            }
        }
        if let Some((line, _)) = ns.iter().find(|(_, n)| *n == 0) {
            return Err(ConfigError::new(*line, "`n` must be positive"));
        }
        if !ns.is_empty() {
            cfg.n_values = ns.into_iter().map(|(_, n)| n).collect();
        }

        if let Some((_, v)) = raw.one("output_path") {
            cfg.output_path = v.to_string();
        }
        if let Some((line, v)) = raw.one("emit") {
            cfg.emit = match v {
                "csv" => Emit::Csv,
                "json" => Emit::Json,
                _ => {
                    return Err(ConfigError::new(
                        line,
                        format!("`emit` must be csv or json, got `{v}`"),
                    ))
                }
            };
        }
        if let Some((line, v)) = raw.one("record_timing") {
            cfg.record_timing = parse_value(line, "record_timing", v)?;
        }
        if let Some((line, v)) = raw.one("fit_min") {
            cfg.fit_window.0 = parse_value(line, "fit_min", v)?;
        }
        if let Some((line, v)) = raw.one("fit_max") {
            cfg.fit_window.1 = parse_value(line, "fit_max", v)?;
        }
        if cfg.fit_window.0 > cfg.fit_window.1 {
            let line = raw
                .one("fit_max")
                .or(raw.one("fit_min"))
                .map_or(0, |(l, _)| l);
            return Err(ConfigError::new(line, "`fit_min` exceeds `fit_max`"));
        }
        Ok(cfg)
    }

    fn custom_from_raw(raw: &Raw) -> Result<Option<CustomProblem>, ConfigError> {
        let custom_keys = ["id", "n1", "n2", "coupling", "coupling_scale", "seed"];
        let Some((family_line, family)) = raw.one("family") else {
            if let Some(key) = custom_keys.iter().find(|k| raw.one(k).is_some()) {
                let (line, _) = raw.one(key).expect("just found");
                return Err(ConfigError::new(line, format!("`{key}` requires `family`")));
            }
            return Ok(None);
        };
        let family = Family::parse(family)
            .ok_or_else(|| ConfigError::new(family_line, format!("unknown family `{family}`")))?;
        let dim = |key: &str| -> Result<usize, ConfigError> {
            match raw.one(key) {
                Some((line, v)) => {
                    let n: usize = parse_value(line, key, v)?;
                    if n == 0 {
                        Err(ConfigError::new(line, format!("`{key}` must be positive")))
                    } else {
                        Ok(n)
                    }
                }
                None if family == Family::Scalar2x2 => Ok(1),
                None => Err(ConfigError::new(
                    family_line,
                    format!("family `{}` needs `{key}`", family.name()),
                )),
            }
        };
        let n1 = dim("n1")?;
        let n2 = dim("n2")?;
        let coupling = match raw.one("coupling") {
            Some((line, v)) => CouplingChoice::parse(v).ok_or_else(|| {
                ConfigError::new(
                    line,
                    format!("`coupling` must be random_bounded or identity_like, got `{v}`"),
                )
            })?,
            None => CouplingChoice::RandomBounded,
        };
        let coupling_scale = match raw.one("coupling_scale") {
            Some((line, v)) => {
                let s: f64 = parse_value(line, "coupling_scale", v)?;
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(ConfigError::new(
                        line,
                        "`coupling_scale` must be nonnegative",
                    ));
                }
                s
            }
            None => 1.0,
        };
        let seed = match raw.one("seed") {
            Some((line, v)) => parse_value(line, "seed", v)?,
            None => 0,
        };
        let id = match raw.one("id") {
            Some((line, v)) => {
                if v.contains(|c: char| c.is_whitespace() || c == '/' || c == ',') {
                    return Err(ConfigError::new(
                        line,
                        format!("`id` may not contain whitespace, `/` or `,`: `{v}`"),
                    ));
                }
                v.to_string()
            }
            None => format!("{}-{n1}x{n2}", family.name()),
        };
        Ok(Some(CustomProblem {
            id,
            family,
            n1,
            n2,
            coupling,
            coupling_scale,
            seed,
        }))
    }

    /// Canonical text form; `parse(to_text())` gives back `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.problems {
            let _ = writeln!(out, "problem = {p}");
        }
        if let Some(c) = &self.custom {
            let _ = writeln!(out, "id = {}", c.id);
            let _ = writeln!(out, "family = {}", c.family.name());
            let _ = writeln!(out, "n1 = {}", c.n1);
            let _ = writeln!(out, "n2 = {}", c.n2);
            let _ = writeln!(out, "coupling = {}", c.coupling.name());
            let _ = writeln!(out, "coupling_scale = {:?}", c.coupling_scale);
            let _ = writeln!(out, "seed = {}", c.seed);
        }
        for s in &self.schemes {
            let _ = writeln!(out, "scheme = {}", s.name());
        }
        for t in &self.t_values {
            let _ = writeln!(out, "t = {t:?}");
        }
        for n in &self.n_values {
            let _ = writeln!(out, "n = {n}");
        }
        let _ = writeln!(out, "output_path = {}", self.output_path);
        let _ = writeln!(out, "emit = {}", self.emit.name());
        let _ = writeln!(out, "record_timing = {}", self.record_timing);
        let _ = writeln!(out, "fit_min = {}", self.fit_window.0);
        let _ = writeln!(out, "fit_max = {}", self.fit_window.1);
        out
    }

    /// Catalog recipes named by `problem`, then the inline problem. With
    /// neither present the whole catalog is used.
    pub fn recipes(&self) -> Vec<GalleryRecipe> {
        let mut out: Vec<GalleryRecipe> = Vec::new();
        let catalog = semiflow::gallery_list();
        let mut push = |r: GalleryRecipe| {
            if !out.iter().any(|o| o.id == r.id) {
                out.push(r);
            }
        };
        for p in &self.problems {
            if p == "all" {
                catalog.iter().cloned().for_each(&mut push);
            } else if let Some(r) = catalog.iter().find(|r| &r.id == p) {
                push(r.clone());
            }
        }
        if let Some(c) = &self.custom {
            push(c.recipe());
        }
        if self.problems.is_empty() && self.custom.is_none() {
            catalog.into_iter().for_each(push);
        }
        out
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
