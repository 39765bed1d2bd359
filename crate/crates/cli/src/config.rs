//! Run configuration: loading, validation and writing.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use finsler_core::metric::MetricSource;
use finsler_core::{CheckId, EvalPoint, Tolerances};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A metric given by bundled name, by path to a metric file, or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricRef {
    Named(String),
    Inline(MetricSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Samples {
    Points {
        points: Vec<EvalPoint>,
    },
    Seeded {
        count: usize,
        seed: u64,
        #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
        bounds: Option<Vec<[f64; 2]>>,
    },
}

impl Default for Samples {
    fn default() -> Self {
        Samples::Seeded { count: DEFAULT_SAMPLES, seed: 0, bounds: None }
    }
}

pub const DEFAULT_SAMPLES: usize = 8;

/// `"all"` or an explicit list of check ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Checks {
    #[default]
    All,
    List(Vec<String>),
}

impl Checks {
    pub fn parse(s: &str) -> Self {
        if s.trim() == "all" {
            Checks::All
        } else {
            Checks::List(s.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect())
        }
    }
}

impl Serialize for Checks {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Checks::All => s.serialize_str("all"),
            Checks::List(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Checks {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) if s == "all" => Ok(Checks::All),
            Value::Array(items) => items
                .into_iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s),
                    other => Err(de::Error::custom(format!("check id must be a string, got {other}"))),
                })
                .collect::<Result<_, _>>()
                .map(Checks::List),
            other => Err(de::Error::custom(format!("expected \"all\" or a list of check ids, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<PathBuf>,
    #[serde(default)]
    pub samples: Samples,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io(String),
    /// Every offending field, one message each.
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "{m}"),
            ConfigError::Invalid(list) => {
                write!(f, "invalid configuration:")?;
                for m in list {
                    write!(f, "\n  {m}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

const FIELDS: [&str; 6] = ["metric", "scene", "samples", "checks", "tolerances", "output"];

fn is_number(v: &Value) -> bool {
    v.as_f64().is_some()
}

/// Structural checks on the raw JSON, collecting every problem.
fn check_shape(v: &Value) -> Vec<String> {
    let mut errs = Vec::new();
    let Some(obj) = v.as_object() else {
        return vec!["configuration must be a JSON object".into()];
    };
    for k in obj.keys() {
        if !FIELDS.contains(&k.as_str()) {
            errs.push(format!("`{k}`: unknown field"));
        }
    }
    match obj.get("metric") {
        None | Some(Value::String(_)) => {}
        Some(m @ Value::Object(_)) => {
            if let Err(e) = serde_json::from_value::<MetricSource>(m.clone()) {
                errs.push(format!("`metric`: {e}"));
            }
        }
        Some(_) => errs.push("`metric`: expected a name, a path or a metric object".into()),
    }
    if let Some(s) = obj.get("scene") {
        if !s.is_string() {
            errs.push("`scene`: expected a path".into());
        }
    }
    if let Some(o) = obj.get("output") {
        if !o.is_string() {
            errs.push("`output`: expected a path".into());
        }
    }
    match obj.get("samples") {
        None => {}
        Some(Value::Object(s)) => {
            if s.contains_key("points") {
                for k in s.keys().filter(|k| *k != "points") {
                    errs.push(format!("`samples.{k}`: not allowed together with `samples.points`"));
                }
                match s.get("points") {
                    Some(Value::Array(pts)) if pts.is_empty() => {
                        errs.push("`samples.points`: at least one point is required".into())
                    }
                    Some(Value::Array(pts)) => {
                        for (i, p) in pts.iter().enumerate() {
                            match serde_json::from_value::<EvalPoint>(p.clone()) {
                                Ok(ep) => {
                                    if let Err(e) = EvalPoint::new(ep.x, ep.y) {
                                        errs.push(format!("`samples.points[{i}]`: {e}"));
                                    }
                                }
                                Err(e) => errs.push(format!("`samples.points[{i}]`: {e}")),
                            }
                        }
                    }
                    _ => errs.push("`samples.points`: expected a list of {x, y} points".into()),
                }
            } else {
                for k in s.keys().filter(|k| !["count", "seed", "box"].contains(&k.as_str())) {
                    errs.push(format!("`samples.{k}`: unknown field"));
                }
                match s.get("count").and_then(Value::as_u64) {
                    Some(c) if c >= 1 => {}
                    _ => errs.push("`samples.count`: expected an integer ≥ 1".into()),
                }
                if s.get("seed").and_then(Value::as_u64).is_none() {
                    errs.push("`samples.seed`: expected a non-negative integer".into());
                }
                if let Some(b) = s.get("box") {
                    let ok = b.as_array().is_some_and(|rows| {
                        rows.iter().all(|r| {
                            r.as_array().is_some_and(|lh| {
                                lh.len() == 2 && lh.iter().all(is_number) && lh[0].as_f64() < lh[1].as_f64()
                            })
                        })
                    });
                    if !ok {
                        errs.push("`samples.box`: expected a list of [low, high] pairs with low < high".into());
                    }
                }
            }
        }
        Some(_) => errs.push("`samples`: expected {points} or {count, seed, box}".into()),
    }
    match obj.get("checks") {
        None => {}
        Some(Value::String(s)) if s == "all" => {}
        Some(Value::Array(items)) => {
            for (i, c) in items.iter().enumerate() {
                match c.as_str() {
                    Some(id) if CheckId::parse(id).is_some() => {}
                    Some(id) => errs.push(format!("`checks[{i}]`: unknown check id `{id}`")),
                    None => errs.push(format!("`checks[{i}]`: expected a check id string")),
                }
            }
        }
        Some(_) => errs.push("`checks`: expected \"all\" or a list of check ids".into()),
    }
    match obj.get("tolerances") {
        None => {}
        Some(Value::Object(t)) => {
            for (k, v) in t {
                let mut probe = Tolerances::default();
                match v.as_f64() {
                    Some(x) => {
                        if let Err(e) = probe.set(k, x) {
                            errs.push(format!("`tolerances.{k}`: {e}"));
                        }
                    }
                    None => errs.push(format!("`tolerances.{k}`: expected a number")),
                }
            }
        }
        Some(_) => errs.push("`tolerances`: expected an object of name → value".into()),
    }
    errs
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Invalid(vec![format!("not valid JSON: {e}")]))?;
        let errs = check_shape(&v);
        if !errs.is_empty() {
            return Err(ConfigError::Invalid(errs));
        }
        let cfg: RunConfig = serde_json::from_value(v).map_err(|e| ConfigError::Invalid(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Semantic checks that hold for every subcommand.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        match &self.samples {
            Samples::Points { points } if points.is_empty() => {
                errs.push("`samples.points`: at least one point is required".into())
            }
            Samples::Seeded { count: 0, .. } => errs.push("`samples.count`: expected an integer ≥ 1".into()),
            _ => {}
        }
        if let Checks::List(ids) = &self.checks {
            if ids.is_empty() {
                errs.push("`checks`: the list is empty".into());
            }
            for id in ids {
                if CheckId::parse(id).is_none() {
                    errs.push(format!("`checks`: unknown check id `{id}`"));
                }
            }
        }
        for (k, v) in &self.tolerances {
            if let Err(e) = Tolerances::default().set(k, *v) {
                errs.push(format!("`tolerances.{k}`: {e}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        for (k, v) in &self.tolerances {
            t.set(k, *v).expect("validated");
        }
        t
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

pub fn write_config(cfg: &RunConfig, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, cfg.to_json() + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_loads() {
        let cfg =
            RunConfig::from_json(r#"{"metric": "euclidean3", "samples": {"points": [{"x": [0,0,0], "y": [1,0,0]}]}}"#)
                .unwrap();
        assert_eq!(cfg.metric, Some(MetricRef::Named("euclidean3".into())));
        assert_eq!(cfg.checks, Checks::All);
    }

    #[test]
    fn every_offending_field_is_listed() {
        let err = RunConfig::from_json(
            r#"{"metrc": 1, "samples": {"count": 0, "seed": -1}, "checks": ["T9.9"], "tolerances": {"residual": -1}}"#,
        )
        .unwrap_err();
        let ConfigError::Invalid(list) = err else { panic!() };
        assert_eq!(list.len(), 5, "{list:?}");
        assert!(list.iter().any(|m| m.contains("T9.9")));
    }

    #[test]
    fn checks_serialize_as_word_or_list() {
        assert_eq!(serde_json::to_string(&Checks::All).unwrap(), "\"all\"");
        assert_eq!(Checks::parse("T2.4a, cartan-axioms"), Checks::List(vec!["T2.4a".into(), "cartan-axioms".into()]));
    }
}
