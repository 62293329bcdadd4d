//! Seeded, reproducible experiments over the `seqmeas` library.
//!
//! Each experiment evaluates exact probabilities, checks them against the
//! bounds the library's procedures guarantee, and compares Monte Carlo runs
//! with the exact values. Output is a JSON document with a fixed field order
//! and reals rounded to 12 significant digits, so the same configuration
//! always produces the same bytes.
//!
//! Randomness: every sampled series gets its own sub-seed
//! `splitmix64(seed ⊕ splitmix64(series))`, where `series` counts the sampled
//! series of an experiment in order. Trial `i` of a series uses ChaCha stream
//! `i` of that sub-seed, so trials can run on any thread in any order.

mod config;
mod experiments;
mod record;

use rayon::prelude::*;
use seqmeas::random::{trial_rng, TrialRng};

pub use config::{ExperimentConfig, EXPERIMENTS};
pub use record::{round12, Assertion, Empirical, ExperimentRecord, Quantity, TrialRow};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("unknown experiment `{0}` (expected one of: {list})", list = EXPERIMENTS.join(", "))]
    UnknownExperiment(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("{0}")]
    Library(#[from] seqmeas::Error),
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRecord, ExperimentError> {
    let params = config::Params::new(&config.params);
    let mut cx = Context {
        config,
        params: &params,
        record: ExperimentRecord::new(&config.experiment, config.seed, config.trials),
        series: 0,
    };
    match config.experiment.as_str() {
        "antizeno" => experiments::antizeno(&mut cx)?,
        "mw-bounds" => experiments::mw_bounds(&mut cx)?,
        "or-test" => experiments::or_test(&mut cx)?,
        "disturbance" => experiments::disturbance(&mut cx)?,
        "union-bound" => experiments::union_bound(&mut cx)?,
        "gentle" => experiments::gentle(&mut cx)?,
        "giso" => experiments::giso(&mut cx)?,
        "membership" => experiments::membership(&mut cx)?,
        "uiso" => experiments::uiso(&mut cx)?,
        "genuine-ent" => experiments::genuine_ent(&mut cx)?,
        "demerlinize" => experiments::demerlinize(&mut cx)?,
        other => return Err(ExperimentError::UnknownExperiment(other.to_string())),
    }
    let mut record = cx.record;
    record.params = params.finish()?;
    Ok(record)
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub(crate) struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub params: &'a config::Params<'a>,
    pub record: ExperimentRecord,
    series: u64,
}

impl Context<'_> {
    /// Sub-seed for the next series; also used for seeded instance generation.
    pub fn next_seed(&mut self) -> u64 {
        let s = splitmix64(self.config.seed ^ splitmix64(self.series));
        self.series += 1;
        s
    }

    /// Runs `trials` independent draws of `run` in parallel, in trial order.
    pub fn map_trials<T, F>(&mut self, trials: u64, run: F) -> Result<Vec<T>, ExperimentError>
    where
        T: Send,
        F: Fn(u64, &mut TrialRng) -> Result<T, seqmeas::Error> + Sync,
    {
        let seed = self.next_seed();
        let out: Result<Vec<T>, seqmeas::Error> = (0..trials)
            .into_par_iter()
            .map(|t| run(t, &mut trial_rng(seed, t)))
            .collect();
        Ok(out?)
    }

    /// Monte Carlo series of `config.trials` runs compared with `expected`.
    /// `run` returns whether the trial accepted and how many steps it took.
    pub fn sample<F>(&mut self, name: &str, expected: f64, run: F) -> Result<(), ExperimentError>
    where
        F: Fn(&mut TrialRng) -> Result<(bool, usize), seqmeas::Error> + Sync,
    {
        self.sample_n(name, self.config.trials, expected, run)
    }

    pub fn sample_n<F>(&mut self, name: &str, trials: u64, expected: f64, run: F) -> Result<(), ExperimentError>
    where
        F: Fn(&mut TrialRng) -> Result<(bool, usize), seqmeas::Error> + Sync,
    {
        let results = self.map_trials(trials, |_, rng| run(rng))?;
        let accepted = results.iter().filter(|r| r.0).count() as u64;
        for (t, (acc, steps)) in results.into_iter().enumerate() {
            self.record.rows.push(TrialRow {
                series: name.to_string(),
                trial: t as u64,
                accepted: acc,
                steps: steps as u64,
            });
        }
        if trials > 0 {
            self.record
                .push_empirical(Empirical::new(name, trials, accepted, expected));
        }
        Ok(())
    }
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
