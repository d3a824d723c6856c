//! Flat key-value run configuration: a TOML table of scalars and arrays,
//! overlaid with `--set key=value` pairs and checked against the keys the
//! subcommand understands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use toml::Value;

use crate::failure::Failure;

/// One accepted key. `default: None` marks a required key.
pub struct KeySpec {
    pub name: &'static str,
    pub default: Option<fn() -> Value>,
    pub help: &'static str,
}

const fn key(name: &'static str, default: fn() -> Value, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        default: Some(default),
        help,
    }
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| Value::Float(*x)).collect())
}

fn ints(v: &[i64]) -> Value {
    Value::Array(v.iter().map(|x| Value::Integer(*x)).collect())
}

const FEATURE_KEYS: [KeySpec; 5] = [
    key("seed", || Value::Integer(0), "base seed for features, sampling and simulation"),
    key("feature_style", || Value::String("cos_only".into()), "cos_only | paired_cos_sin"),
    key("feature_mode", || Value::String("hadamard_rademacher".into()), "hadamard_rademacher | gaussian"),
    key("bandwidth", || Value::String("median".into()), "kernel bandwidth, or \"median\" for the median pairwise state distance"),
    key("radii", || Value::Boolean(true), "scale Hadamard rows by chi-distributed radii"),
];

fn solve_keys() -> Vec<KeySpec> {
    vec![
        KeySpec {
            name: "mdp",
            default: None,
            help: "path of the MDP JSON document (relative to the config file)",
        },
        key("K", || Value::Integer(400), "state-action features"),
        key("L", || Value::Integer(100), "state features"),
        key("slack", || Value::Float(0.0), "slack added to the cost budget"),
    ]
}

fn american_keys() -> Vec<KeySpec> {
    vec![
        key("s0", || floats(&[80.0, 90.0, 100.0, 110.0, 120.0]), "initial prices priced in table2.csv"),
        key("strike", || Value::Float(100.0), "strike"),
        key("rate", || Value::Float(0.05), "risk-free rate"),
        key("sigma", || Value::Float(0.2), "volatility"),
        key("T", || Value::Float(1.0), "maturity in years"),
        key("dt", || Value::Float(0.01), "step length in years"),
        key("I", || Value::Integer(200), "price grid size"),
        key("K", || Value::Integer(400), "state-action features"),
        key("L", || Value::Integer(50), "state features"),
        key("slack", || Value::Float(0.0), "slack added to the cost budget"),
        key("n_paths", || Value::Integer(1000), "simulated paths per price"),
        key("epsilon", || Value::Float(0.1), "tolerance of the policy agreement rate"),
        key("action_rule", || Value::String("greedy".into()), "greedy | sample"),
        key("table1_s0", || Value::Float(100.0), "initial price of the agreement-rate grid"),
        key("table1_I", || ints(&[200]), "grid sizes of the agreement-rate table"),
        key("table1_K", || ints(&[200, 300, 400]), "feature counts of the agreement-rate table"),
        key("replications", || Value::Integer(5), "seeds per agreement-rate cell (seed, seed+1, ...)"),
    ]
}

fn bermudan_keys() -> Vec<KeySpec> {
    vec![
        key("s0", || floats(&[90.0, 100.0, 110.0]), "common initial price of every asset"),
        key("strike", || Value::Float(100.0), "strike"),
        key("barrier", || Value::Float(170.0), "up-and-out barrier"),
        key("rate", || Value::Float(0.05), "risk-free rate"),
        key("sigma", || Value::Float(0.2), "volatility of every asset"),
        key("T", || Value::Float(3.0), "maturity in years"),
        key("M", || Value::Integer(54), "exercise dates"),
        key("n_assets", || Value::Integer(4), "independent assets"),
        key("I", || Value::Integer(1000), "sampled live states"),
        key("K", || Value::Integer(400), "state-action features"),
        key("L", || Value::Integer(50), "state features"),
        key("slack", || Value::Float(0.0), "slack added to the cost budget"),
        key("sample_paths", || Value::Integer(2000), "paths whose points form the state pool"),
        key("mesh_weights", || Value::Boolean(false), "divide transition densities by the pool density"),
        key("n_paths", || Value::Integer(1000), "simulated paths per price"),
        key("action_rule", || Value::String("greedy".into()), "greedy | sample"),
    ]
}

fn diagnose_keys() -> Vec<KeySpec> {
    vec![
        key("n_instances", || Value::Integer(20), "random conformant instances"),
        key("n_states", || Value::Integer(6), "states per instance"),
        key("gamma", || Value::Float(0.9), "discount factor"),
        key("K", || Value::String("auto".into()), "state-action features, or \"auto\" for n_states"),
        key("L", || Value::String("auto".into()), "state features, or \"auto\" for n_states / 2"),
    ]
}

fn oracle_keys() -> Vec<KeySpec> {
    vec![key("n_instances", || Value::Integer(50), "random instances besides the bundled ones")]
}

/// Keys accepted by `command`, feature keys included.
pub fn keys_for(command: &str) -> Vec<KeySpec> {
    let mut keys = match command {
        "solve" => solve_keys(),
        "price-american" => american_keys(),
        "price-bermudan" => bermudan_keys(),
        "diagnose" => diagnose_keys(),
        "oracle" => Vec::new(),
        _ => unreachable!("clap only yields known subcommands"),
    };
    if command == "oracle" {
        keys.push(key("seed", || Value::Integer(0), "seed of the random instances"));
        keys.extend(oracle_keys());
    } else {
        keys.extend(FEATURE_KEYS);
    }
    keys
}

/// Resolved parameters of one run.
#[derive(Debug, Clone)]
pub struct Params {
    pub values: BTreeMap<String, Value>,
    /// Directory relative paths in the config are resolved against.
    pub base_dir: PathBuf,
}

fn parse_override(text: &str) -> Result<(String, Value), Failure> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("override `{text}` is not key=value")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Failure::usage(format!("override `{text}` has an empty key")));
    }
    // Values are TOML literals; anything else is taken as a bare string.
    let value = match format!("v = {v}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("single key"),
        Err(_) => Value::String(v.trim().to_string()),
    };
    Ok((k.to_string(), value))
}

impl Params {
    /// Config file (optional) overlaid with overrides, then the command's
    /// defaults. An empty config file, an unknown key or a missing required
    /// key is a usage error.
    pub fn resolve(command: &str, config: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        let mut base_dir = PathBuf::from(".");
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::io(format!("cannot read config {}: {e}", path.display())))?;
            if text.trim().is_empty() {
                return Err(Failure::usage(format!("config file {} is empty", path.display())));
            }
            let table: toml::Table = text
                .parse()
                .map_err(|e| Failure::usage(format!("config file {} is not valid TOML: {e}", path.display())))?;
            if table.is_empty() {
                return Err(Failure::usage(format!("config file {} sets no keys", path.display())));
            }
            values.extend(table);
            if let Some(dir) = path.parent() {
                base_dir = dir.to_path_buf();
            }
        }
        for o in overrides {
            let (k, v) = parse_override(o)?;
            values.insert(k, v);
        }
        if let Some(s) = seed {
            values.insert("seed".into(), Value::Integer(s as i64));
        }
        Params::complete(command, values, base_dir)
    }

    /// Parameters recorded in a run manifest. They were fully resolved, so
    /// defaults only fill keys added since.
    pub fn from_manifest(command: &str, parameters: &serde_json::Value) -> Result<Self, Failure> {
        let values: BTreeMap<String, Value> = serde_json::from_value(parameters.clone())
            .map_err(|e| Failure::usage(format!("manifest parameters are not a flat table: {e}")))?;
        Params::complete(command, values, PathBuf::from("."))
    }

    fn complete(command: &str, mut values: BTreeMap<String, Value>, base_dir: PathBuf) -> Result<Self, Failure> {
        let specs = keys_for(command);
        let known: Vec<&str> = specs.iter().map(|s| s.name).collect();
        if let Some(bad) = values.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Failure::usage(format!(
                "unknown key `{bad}` for {command}; valid keys: {}",
                known.join(", ")
            )));
        }
        for spec in &specs {
            if values.contains_key(spec.name) {
                continue;
            }
            match spec.default {
                Some(d) => {
                    values.insert(spec.name.to_string(), d());
                }
                None => {
                    return Err(Failure::usage(format!("{command} needs key `{}` ({})", spec.name, spec.help)));
                }
            }
        }
        Ok(Params { values, base_dir })
    }

    fn get(&self, name: &str) -> &Value {
        self.values.get(name).expect("resolved params hold every key")
    }

    fn wrong(&self, name: &str, want: &str) -> Failure {
        Failure::usage(format!("key `{name}` must be {want}, got {}", self.get(name)))
    }

    pub fn f64(&self, name: &str) -> Result<f64, Failure> {
        match self.get(name) {
            Value::Float(v) => Ok(*v),
            Value::Integer(v) => Ok(*v as f64),
            _ => Err(self.wrong(name, "a number")),
        }
    }

    pub fn usize(&self, name: &str) -> Result<usize, Failure> {
        match self.get(name) {
            Value::Integer(v) if *v >= 0 => Ok(*v as usize),
            _ => Err(self.wrong(name, "a nonnegative integer")),
        }
    }

    pub fn u64(&self, name: &str) -> Result<u64, Failure> {
        self.usize(name).map(|v| v as u64)
    }

    pub fn bool(&self, name: &str) -> Result<bool, Failure> {
        match self.get(name) {
            Value::Boolean(v) => Ok(*v),
            _ => Err(self.wrong(name, "true or false")),
        }
    }

    pub fn str(&self, name: &str) -> Result<&str, Failure> {
        match self.get(name) {
            Value::String(v) => Ok(v),
            _ => Err(self.wrong(name, "a string")),
        }
    }

    /// A number or an array of numbers.
    pub fn f64_list(&self, name: &str) -> Result<Vec<f64>, Failure> {
        match self.get(name) {
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(x) => Ok(*x as f64),
                    _ => Err(self.wrong(name, "a list of numbers")),
                })
                .collect(),
            _ => self.f64(name).map(|v| vec![v]),
        }
    }

    /// An integer or an array of integers.
    pub fn usize_list(&self, name: &str) -> Result<Vec<usize>, Failure> {
        match self.get(name) {
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::Integer(x) if *x >= 0 => Ok(*x as usize),
                    _ => Err(self.wrong(name, "a list of nonnegative integers")),
                })
                .collect(),
            _ => self.usize(name).map(|v| vec![v]),
        }
    }

    /// An integer, or `None` for the string "auto".
    pub fn usize_or_auto(&self, name: &str) -> Result<Option<usize>, Failure> {
        match self.get(name) {
            Value::String(s) if s == "auto" => Ok(None),
            _ => self.usize(name).map(Some),
        }
    }

    pub fn set(&mut self, name: &str, value: Value) {
        self.values.insert(name.to_string(), value);
    }

    pub fn path(&self, name: &str) -> Result<PathBuf, Failure> {
        let p = PathBuf::from(self.str(name)?);
        Ok(if p.is_absolute() { p } else { self.base_dir.join(p) })
    }

    /// Parameters as a JSON object for the manifest.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.values).expect("TOML scalars map to JSON")
    }
}
