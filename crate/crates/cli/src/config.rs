//! Scenario and sweep documents (JSON).
//!
//! A document with a `variable` key is a sweep, anything else a single
//! scenario. See `docs/config.md` for the schema.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use idnc_core::simulator::{ScenarioConfig, SimError};
use idnc_core::PolicyId;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

/// Parameter swept along the x axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variable {
    C,
    M,
    N,
    P,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::C => "C",
            Variable::M => "M",
            Variable::N => "N",
            Variable::P => "P",
        }
    }

    pub fn axis_label(self) -> &'static str {
        match self {
            Variable::C => "connectivity index C",
            Variable::M => "number of devices M",
            Variable::N => "number of packets N",
            Variable::P => "D2D erasure probability P",
        }
    }

    fn is_count(self) -> bool {
        matches!(self, Variable::M | Variable::N)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "C" => Ok(Variable::C),
            "M" => Ok(Variable::M),
            "N" => Ok(Variable::N),
            "P" => Ok(Variable::P),
            other => Err(format!("unknown sweep variable {other:?}, expected one of C, M, N, P")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: Variable,
    pub values: Vec<f64>,
    pub base: ScenarioConfig,
    pub policies: Vec<PolicyId>,
    /// Keep `Q = 2P` while sweeping `P`.
    #[serde(default = "default_couple_q")]
    pub couple_q: bool,
}

fn default_couple_q() -> bool {
    true
}

impl SweepSpec {
    /// Scenario for one sweep point.
    pub fn point(&self, value: f64, policy: PolicyId) -> ScenarioConfig {
        let mut config = self.base.clone();
        config.policy = policy;
        match self.variable {
            Variable::C => config.connectivity = value,
            Variable::M => config.devices = value as usize,
            Variable::N => config.packets = value as usize,
            Variable::P => {
                config.d2d_erasure = value;
                if self.couple_q {
                    config.bs_erasure = 2.0 * value;
                }
            }
        }
        config
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.values.is_empty() {
            return Err(invalid("values", "must not be empty"));
        }
        for (k, pair) in self.values.windows(2).enumerate() {
            if pair[0] >= pair[1] {
                return Err(invalid(
                    format!("values[{}]", k + 1),
                    format!("values must be strictly increasing, got {} after {}", pair[1], pair[0]),
                ));
            }
        }
        if self.variable.is_count() {
            if let Some(k) = self.values.iter().position(|v| v.fract() != 0.0 || *v < 0.0) {
                return Err(invalid(format!("values[{k}]"), format!("{} must be a whole number", self.variable)));
            }
        }
        if self.policies.is_empty() {
            return Err(invalid("policies", "must name at least one policy"));
        }
        for (k, policy) in self.policies.iter().enumerate() {
            if self.policies[..k].contains(policy) {
                return Err(invalid(format!("policies[{k}]"), format!("{policy} is listed twice")));
            }
        }
        validate_scenario(&self.base, "base")?;
        for (k, &value) in self.values.iter().enumerate() {
            self.point(value, self.policies[0])
                .validate()
                .map_err(|e| match e {
                    SimError::Config { field, message } => invalid(
                        format!("values[{k}]"),
                        format!("gives an invalid {field}: {message}"),
                    ),
                    other => invalid(format!("values[{k}]"), other.to_string()),
                })?;
        }
        Ok(())
    }
}

fn validate_scenario(config: &ScenarioConfig, prefix: &str) -> Result<(), ConfigError> {
    config.validate().map_err(|e| match e {
        SimError::Config { field, message } => invalid(join(prefix, field), message),
        other => invalid(prefix, other.to_string()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Document {
    Sweep(SweepSpec),
    Scenario(ScenarioConfig),
}

pub fn parse_config(path: &Path) -> Result<Document, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<Document, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| invalid("<document>", e.to_string()))?;
    let Value::Object(mut doc) = value else {
        return Err(invalid("<document>", "expected a JSON object"));
    };
    if doc.contains_key("variable") {
        parse_sweep(doc).map(Document::Sweep)
    } else {
        default_p(&mut doc);
        let config: ScenarioConfig = typed(Value::Object(doc), "")?;
        validate_scenario(&config, "")?;
        Ok(Document::Scenario(config))
    }
}

fn parse_sweep(mut doc: Map<String, Value>) -> Result<SweepSpec, ConfigError> {
    let variable: Variable = match doc.get("variable") {
        Some(Value::String(s)) => s.parse().map_err(|e: String| invalid("variable", e))?,
        _ => return Err(invalid("variable", "expected one of \"C\", \"M\", \"N\", \"P\"")),
    };
    if matches!(doc.get("policies"), Some(Value::Array(a)) if a.is_empty()) {
        return Err(invalid("policies", "must name at least one policy"));
    }
    // The swept field and the policy are set per point, so the base may
    // leave them out.
    let first_value = doc.get("values").and_then(|v| v.get(0)).cloned();
    let first_policy = doc.get("policies").and_then(|v| v.get(0)).cloned();
    let doc_couple_q = doc.get("couple_q").and_then(Value::as_bool);
    if let Some(Value::Object(base)) = doc.get_mut("base") {
        let couple_q = doc_couple_q.unwrap_or(true);
        if let Some(v) = first_value {
            if variable == Variable::P && couple_q {
                if let Some(p) = v.as_f64() {
                    base.entry("Q").or_insert(Value::from(2.0 * p));
                }
            }
            base.entry(variable.name()).or_insert(v);
        }
        if let Some(p) = first_policy {
            base.entry("policy").or_insert(p);
        }
        default_p(base);
    }
    let spec: SweepSpec = typed(Value::Object(doc), "")?;
    spec.validate()?;
    Ok(spec)
}

/// `P = Q / 2` when only `Q` is given.
fn default_p(doc: &mut Map<String, Value>) {
    if doc.contains_key("P") {
        return;
    }
    if let Some(q) = doc.get("Q").and_then(Value::as_f64) {
        doc.insert("P".into(), Value::from(q / 2.0));
    }
}

fn typed<T: serde::de::DeserializeOwned>(value: Value, prefix: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { prefix.to_string() } else { join(prefix, &path) };
        invalid(if path.is_empty() { "<document>".into() } else { path }, e.inner().to_string())
    })
}

pub fn to_json(document: &Document) -> String {
    serde_json::to_string_pretty(document).expect("documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(text: &str) -> ScenarioConfig {
        match parse_str(text).unwrap() {
            Document::Scenario(c) => c,
            other => panic!("expected a scenario, got {other:?}"),
        }
    }

    fn error(text: &str) -> (String, String) {
        match parse_str(text).unwrap_err() {
            ConfigError::Invalid { path, message } => (path, message),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn p_defaults_to_half_q() {
        let c = scenario(r#"{"M":60,"N":30,"C":0.1,"Q":0.2,"trials":100,"seed":1,"policy":"PC_D2D_OPTIMAL"}"#);
        assert_eq!(c.d2d_erasure, 0.1);
        assert_eq!(c.policy, PolicyId::PcD2dOptimal);
        assert_eq!(c.max_rounds, None);
    }

    #[test]
    fn explicit_p_is_kept() {
        let c = scenario(r#"{"M":6,"N":3,"C":0.5,"P":0.3,"Q":0.2,"trials":1,"seed":1,"policy":"PMP"}"#);
        assert_eq!(c.d2d_erasure, 0.3);
    }

    #[test]
    fn range_errors_name_the_field() {
        let (path, _) = error(r#"{"M":6,"N":3,"C":0,"Q":0.2,"trials":1,"seed":1,"policy":"PMP"}"#);
        assert_eq!(path, "C");
        let (path, _) = error(r#"{"M":6,"N":3,"C":0.5,"Q":1.0,"trials":1,"seed":1,"policy":"PMP"}"#);
        assert_eq!(path, "Q");
        let (path, _) = error(r#"{"M":6,"N":3,"C":0.5,"P":1.5,"Q":0.2,"trials":1,"seed":1,"policy":"PMP"}"#);
        assert_eq!(path, "P");
    }

    #[test]
    fn type_errors_name_the_field() {
        let (path, _) = error(r#"{"M":"six","N":3,"C":0.5,"Q":0.2,"trials":1,"seed":1,"policy":"PMP"}"#);
        assert_eq!(path, "M");
        let (path, message) = error(r#"{"M":6,"N":3,"C":0.5,"Q":0.2,"trials":1,"seed":1,"policy":"FAST"}"#);
        assert_eq!(path, "policy");
        assert!(message.contains("FAST"), "{message}");
        let (path, _) = error(r#"{"M":6,"N":3,"C":0.5,"Q":0.2,"trials":1,"seed":1,"policy":"PMP","colour":1}"#);
        assert_eq!(path, "colour");
    }

    #[test]
    fn sweep_document() {
        let doc = parse_str(
            r#"{"variable":"C","values":[0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9],
                "base":{"M":60,"N":30,"Q":0.2,"trials":10,"seed":3},
                "policies":["PMP","FC_D2D","PC_D2D_HEURISTIC","PC_D2D_OPTIMAL"]}"#,
        )
        .unwrap();
        let Document::Sweep(spec) = doc else { panic!("expected a sweep") };
        assert_eq!(spec.variable, Variable::C);
        assert_eq!(spec.values.len(), 9);
        assert_eq!(spec.base.d2d_erasure, 0.1);
        assert_eq!(spec.point(0.4, PolicyId::FcD2d).connectivity, 0.4);
        assert_eq!(spec.point(0.4, PolicyId::FcD2d).policy, PolicyId::FcD2d);
    }

    #[test]
    fn p_sweep_couples_q() {
        let Document::Sweep(spec) = parse_str(
            r#"{"variable":"P","values":[0.05,0.1,0.2],
                "base":{"M":10,"N":5,"C":0.1,"Q":0.2,"trials":1,"seed":0},
                "policies":["PMP"]}"#,
        )
        .unwrap() else {
            panic!("expected a sweep")
        };
        let point = spec.point(0.2, PolicyId::Pmp);
        assert_eq!((point.d2d_erasure, point.bs_erasure), (0.2, 0.4));

        let Document::Sweep(spec) = parse_str(
            r#"{"variable":"P","values":[0.05,0.1],
                "base":{"M":10,"N":5,"C":0.1,"trials":1,"seed":0},
                "policies":["PMP"]}"#,
        )
        .unwrap() else {
            panic!("expected a sweep")
        };
        assert_eq!((spec.base.d2d_erasure, spec.base.bs_erasure), (0.05, 0.1));
    }

    #[test]
    fn sweep_errors_name_the_field() {
        let base = r#""base":{"M":10,"N":5,"C":0.1,"Q":0.2,"trials":1,"seed":0}"#;
        let (path, _) = error(&format!(r#"{{"variable":"C","values":[0.2,0.1],{base},"policies":["PMP"]}}"#));
        assert_eq!(path, "values[1]");
        let (path, _) = error(&format!(r#"{{"variable":"C","values":[0.2,1.5],{base},"policies":["PMP"]}}"#));
        assert_eq!(path, "values[1]");
        let (path, _) = error(&format!(r#"{{"variable":"M","values":[4,6.5],{base},"policies":["PMP"]}}"#));
        assert_eq!(path, "values[1]");
        let (path, _) = error(&format!(r#"{{"variable":"C","values":[0.2],{base},"policies":[]}}"#));
        assert_eq!(path, "policies");
        let (path, _) = error(&format!(r#"{{"variable":"X","values":[0.2],{base},"policies":["PMP"]}}"#));
        assert_eq!(path, "variable");
        let (path, _) = error(
            r#"{"variable":"C","values":[0.2],"base":{"M":0,"N":5,"Q":0.2,"trials":1,"seed":0},"policies":["PMP"]}"#,
        );
        assert_eq!(path, "base.M");
        let (path, _) = error(
            r#"{"variable":"C","values":[0.2],"base":{"M":4,"N":5,"Q":0.2,"trials":"x","seed":0},"policies":["PMP"]}"#,
        );
        assert_eq!(path, "base.trials");
    }

    #[test]
    fn round_trip() {
        let mut config = ScenarioConfig::new(12, 6, 0.35, PolicyId::PcD2dHeuristic);
        config.max_rounds = Some(99);
        config.strict_definition1 = true;
        let doc = Document::Scenario(config);
        assert_eq!(parse_str(&to_json(&doc)).unwrap(), doc);

        let spec = SweepSpec {
            variable: Variable::N,
            values: vec![2.0, 4.0, 8.0],
            base: ScenarioConfig::new(10, 4, 0.3, PolicyId::Pmp),
            policies: vec![PolicyId::Pmp, PolicyId::FcD2d],
            couple_q: false,
        };
        let doc = Document::Sweep(spec);
        assert_eq!(parse_str(&to_json(&doc)).unwrap(), doc);
    }
}
