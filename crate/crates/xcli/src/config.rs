use std::cell::RefCell;
use std::collections::BTreeMap;
use std::str::FromStr;

use seqmeas::gates::PermutationAction;
use seqmeas::testers::FunctionTable;

use crate::ExperimentError;

/// Names accepted by [`run_experiment`](crate::run_experiment).
pub const EXPERIMENTS: [&str; 11] = [
    "antizeno",
    "mw-bounds",
    "or-test",
    "disturbance",
    "union-bound",
    "gentle",
    "giso",
    "membership",
    "uiso",
    "genuine-ent",
    "demerlinize",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub trials: u64,
    /// Instance parameters as given on the command line (`key=value`).
    pub params: BTreeMap<String, String>,
    pub fn_f: Option<FunctionTable>,
    pub fn_g: Option<FunctionTable>,
    pub group: Option<Vec<PermutationAction>>,
}

impl ExperimentConfig {
    pub fn new(experiment: impl Into<String>, seed: u64, trials: u64) -> Self {
        Self {
            experiment: experiment.into(),
            seed,
            trials,
            params: BTreeMap::new(),
            fn_f: None,
            fn_g: None,
            group: None,
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }
}

/// Reads parameters with defaults and remembers the resolved values for the record.
pub(crate) struct Params<'a> {
    raw: &'a BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl<'a> Params<'a> {
    pub fn new(raw: &'a BTreeMap<String, String>) -> Self {
        Self {
            raw,
            resolved: RefCell::new(BTreeMap::new()),
        }
    }

    fn get<T: FromStr + ToString>(&self, name: &str, default: T) -> Result<T, ExperimentError>
    where
        T::Err: std::fmt::Display,
    {
        let value = match self.raw.get(name) {
            Some(text) => text
                .trim()
                .parse::<T>()
                .map_err(|e| ExperimentError::InvalidParameter {
                    name: name.to_string(),
                    reason: format!("`{text}`: {e}"),
                })?,
            None => default,
        };
        self.resolved.borrow_mut().insert(name.to_string(), value.to_string());
        Ok(value)
    }

    pub fn f64(&self, name: &str, default: f64) -> Result<f64, ExperimentError> {
        let v = self.get(name, default)?;
        if !v.is_finite() {
            return Err(ExperimentError::InvalidParameter {
                name: name.to_string(),
                reason: "must be finite".into(),
            });
        }
        Ok(v)
    }

    /// Like [`f64`](Self::f64) but requires `lo < value ≤ hi`.
    pub fn f64_in(&self, name: &str, default: f64, lo: f64, hi: f64) -> Result<f64, ExperimentError> {
        let v = self.f64(name, default)?;
        if !(v > lo && v <= hi) {
            return Err(ExperimentError::InvalidParameter {
                name: name.to_string(),
                reason: format!("{v} is outside ({lo}, {hi}]"),
            });
        }
        Ok(v)
    }

    /// Integer in `lo..=hi`.
    pub fn usize_in(&self, name: &str, default: usize, lo: usize, hi: usize) -> Result<usize, ExperimentError> {
        let v = self.get(name, default)?;
        if !(lo..=hi).contains(&v) {
            return Err(ExperimentError::InvalidParameter {
                name: name.to_string(),
                reason: format!("{v} is outside {lo}..={hi}"),
            });
        }
        Ok(v)
    }

    /// Fails on any supplied key the experiment never read.
    pub fn finish(self) -> Result<BTreeMap<String, String>, ExperimentError> {
        let resolved = self.resolved.into_inner();
        if let Some(extra) = self.raw.keys().find(|k| !resolved.contains_key(*k)) {
            return Err(ExperimentError::InvalidParameter {
                name: extra.clone(),
                reason: "not a parameter of this experiment".into(),
            });
        }
        Ok(resolved)
    }
}
