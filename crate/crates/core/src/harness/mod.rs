//! Configuration, trace persistence and experiment commands.
//!
//! Every command is a pure function of its configuration, input files and
//! seed. Wall-clock time is the one exception and is only recorded on request.

mod csv_out;
mod hist;
mod store;
mod sweep;

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cipher::{random_expanded_key, CipherSpec, ExpandedKey};
use crate::error::{Error, Result};
use crate::inference::LlrMode;
use crate::leakage::{
    leakage_variance, random_plaintexts, simulate_traces, simulate_traces_oversampled, NoiseSpec, PowerModel,
    TraceSet,
};
use crate::search::{run_attack_with_truth, AttackOptions, AttackResult, ComplexityReport, NoiseEstimate, SearchParams};

pub use hist::{cmd_llr_hist, histogram, llr_hist_fingerprint, sample_llrs, LlrHistogram, LlrSamples};
pub use store::{
    cmd_simulate, load_traces, save_traces, SimulateOutcome, FEATURES_FILE, HEADER_FILE, PLAINTEXTS_FILE, TRUTH_FILE,
};
pub use sweep::{cmd_sweep, CellSummary, SweepConfig, SweepGrid, SweepOutput, SweepRow};

/// One simulate-and-attack experiment. Every field must be present in the
/// JSON document; `gamma: null` simulates noiseless traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    pub cipher: CipherSpec,
    pub model: PowerModel,
    #[serde(deserialize_with = "Option::deserialize")]
    pub gamma: Option<f64>,
    pub n_traces: usize,
    pub params: SearchParams,
    pub mode: LlrMode,
    pub sigma: NoiseEstimate,
    pub seed: u64,
    /// Samples per point of interest; absent for one amplitude sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversampling: Option<usize>,
}

impl AttackConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: AttackConfig =
            serde_json::from_str(text).map_err(|e| Error::config(format!("attack config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate(self.cipher.sbox_width())?;
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::config(format!("gamma must be positive and finite, got {g}")));
            }
        }
        if self.n_traces < 2 {
            return Err(Error::config(format!("n_traces must be at least 2, got {}", self.n_traces)));
        }
        if self.oversampling == Some(0) {
            return Err(Error::config("oversampling must be at least 1"));
        }
        self.params.validate(self.cipher.block_bits())?;
        Ok(())
    }

    pub fn noise(&self) -> Result<NoiseSpec> {
        let sigma_l_sq = leakage_variance(&self.model, self.cipher.sbox_width());
        match self.gamma {
            Some(g) => NoiseSpec::calibrate(g, sigma_l_sq),
            None => Ok(NoiseSpec::noiseless(sigma_l_sq)),
        }
    }

    pub fn attack_options(&self) -> AttackOptions {
        AttackOptions {
            params: self.params,
            mode: self.mode,
            sigma: self.sigma,
        }
    }

    /// SHA-256 of the canonical JSON serialization, as lowercase hex.
    pub fn fingerprint(&self) -> String {
        fingerprint_of(self)
    }

    /// Draws the key and plaintexts from the seed and simulates the traces.
    pub fn simulate(&self) -> Result<(TraceSet, ExpandedKey)> {
        self.validate()?;
        let key = random_expanded_key(&self.cipher, self.seed);
        let plaintexts = random_plaintexts(&self.cipher, self.n_traces, self.seed);
        let noise = self.noise()?;
        let traces = match self.oversampling {
            None => simulate_traces(&key, &plaintexts, &self.model, &noise, &self.cipher, self.seed)?,
            Some(n_s) => {
                simulate_traces_oversampled(&key, &plaintexts, &self.model, &noise, &self.cipher, self.seed, n_s)?
            }
        };
        Ok((traces, key))
    }
}

pub(crate) fn fingerprint_of<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("configurations serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Outcome of one attack run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub seed: u64,
    /// Whether the best path equals the true key; absent without a truth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<bool>,
    pub final_metric: f64,
    /// 1-based rank of the true prefix per level, `None` once pruned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_of_truth: Option<Vec<Option<usize>>>,
    pub report: ComplexityReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl ExperimentRecord {
    pub fn from_result(seed: u64, result: &AttackResult, truth: Option<&ExpandedKey>, wall_time_s: Option<f64>) -> Self {
        ExperimentRecord {
            seed,
            success: truth.map(|t| *t == result.best),
            final_metric: result.best_metric,
            rank_of_truth: result.per_round_rank_of_truth.clone(),
            report: result.report.clone(),
            wall_time_s,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub records: Vec<ExperimentRecord>,
}

impl ExperimentReport {
    /// Fraction of records with a known outcome that succeeded.
    pub fn success_rate(&self) -> Option<f64> {
        let known: Vec<bool> = self.records.iter().filter_map(|r| r.success).collect();
        if known.is_empty() {
            None
        } else {
            Some(known.iter().filter(|&&s| s).count() as f64 / known.len() as f64)
        }
    }
}

/// Attack result together with its summary record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub record: ExperimentRecord,
    pub result: AttackResult,
}

/// Simulates the configured experiment in memory and attacks it.
pub fn run_experiment(config: &AttackConfig, timing: bool) -> Result<AttackOutcome> {
    let clock = Clock::start(timing);
    let (traces, key) = config.simulate()?;
    let result = run_attack_with_truth(&traces, &config.attack_options(), Some(&key))?;
    let record = ExperimentRecord::from_result(config.seed, &result, Some(&key), clock.elapsed());
    Ok(AttackOutcome { record, result })
}

/// Runs `reps` experiments with seeds `config.seed + i`.
pub fn run_repetitions(config: &AttackConfig, reps: usize, timing: bool) -> Result<ExperimentReport> {
    let records = (0..reps)
        .map(|i| {
            let mut c = config.clone();
            c.seed = config.seed.wrapping_add(i as u64);
            run_experiment(&c, timing).map(|o| o.record)
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentReport { records })
}

/// Attacks a stored trace set; success is reported when a truth file exists.
pub fn cmd_attack(dir: &Path, options: &AttackOptions, timing: bool) -> Result<AttackOutcome> {
    let (traces, truth) = load_traces(dir)?;
    let clock = Clock::start(timing);
    let result = run_attack_with_truth(&traces, options, truth.as_ref())?;
    let record = ExperimentRecord::from_result(traces.seed(), &result, truth.as_ref(), clock.elapsed());
    Ok(AttackOutcome { record, result })
}

/// Wall-clock timer that is never read unless requested, so untimed runs
/// stay reproducible and work on targets without a clock.
struct Clock(Option<std::time::Instant>);

impl Clock {
    fn start(enabled: bool) -> Self {
        Clock(enabled.then(std::time::Instant::now))
    }

    fn elapsed(&self) -> Option<f64> {
        self.0.map(|t| t.elapsed().as_secs_f64())
    }
}

fn json_tag<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value).expect("tags serialize") {
        serde_json::Value::String(s) => s,
        serde_json::Value::Object(map) => map
            .get("kind")
            .and_then(|k| k.as_str())
            .unwrap_or_default()
            .to_string(),
        other => other.to_string(),
    }
}
