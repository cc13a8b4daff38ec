use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{best_children, predicted_decrypts, predicted_visits, Child, PathCandidate, SearchParams};
use crate::bits::BitVec;
use crate::cipher::{advance_round, ExpandedKey};
use crate::error::{Error, Result};
use crate::inference::{round_llrs, LlrMode, SelectionKernel, SigmaSource};
use crate::leakage::{PowerModel, TraceSet};

/// How the attack obtains the noise level for the mean estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseEstimate {
    /// Use the trace set's recorded measurement noise.
    #[default]
    Known,
    /// Estimate per hypothesis from the partitions.
    Pooled,
}

impl std::str::FromStr for NoiseEstimate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "known" => Ok(NoiseEstimate::Known),
            "pooled" => Ok(NoiseEstimate::Pooled),
            other => Err(Error::config(format!("unknown noise estimate {other:?} (known|pooled)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOptions {
    pub params: SearchParams,
    pub mode: LlrMode,
    pub sigma: NoiseEstimate,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub m_s: u64,
    pub visits_analytic: u64,
    pub decrypts_analytic: u64,
    /// Candidates scored across all node expansions.
    pub visits_measured: u64,
    /// Single-round state derivations over the whole trace set.
    pub decrypts_measured: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub best: ExpandedKey,
    pub best_metric: f64,
    /// The final level reduced to `M_R` paths, best first.
    pub survivors: Vec<PathCandidate>,
    pub report: ComplexityReport,
    /// For each level, the 1-based rank of the true key prefix in the full
    /// sorted pool, or `None` once it has been pruned. Only present when the
    /// true key was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_round_rank_of_truth: Option<Vec<Option<usize>>>,
}

struct Node {
    path: PathCandidate,
    /// Trace data entering the round of the path's last key.
    data: Arc<Vec<BitVec>>,
}

pub fn run_attack(traces: &TraceSet, options: &AttackOptions) -> Result<AttackResult> {
    run_attack_with_truth(traces, options, None)
}

pub fn run_attack_with_truth(
    traces: &TraceSet,
    options: &AttackOptions,
    truth: Option<&ExpandedKey>,
) -> Result<AttackResult> {
    let spec = traces.cipher();
    let params = options.params;
    let m_s = params.validate(spec.block_bits())?;
    let rounds = traces.rounds();
    if *traces.model() != PowerModel::HammingWeight {
        return Err(Error::config(
            "key-bit inference assumes Hamming-weight leakage; distance models can only be simulated",
        ));
    }
    if traces.n_traces() < 2 {
        return Err(Error::config("the attack needs at least two traces"));
    }
    if let Some(t) = truth {
        t.validate(spec)?;
    }
    let report_visits = predicted_visits(m_s, params.m_r as u64, rounds as u64)?;
    let report_decrypts = predicted_decrypts(params.m_r as u64, rounds as u64)?;

    let kernel = SelectionKernel::new(spec.sbox());
    let sigma = match options.sigma {
        NoiseEstimate::Known => SigmaSource::Known(traces.noise().sigma_n()),
        NoiseEstimate::Pooled => SigmaSource::Pooled,
    };
    let expand = |data: &[BitVec], round: usize| -> Result<Vec<Child>> {
        let llrs = round_llrs(traces, data, round, &kernel, sigma, options.mode)?;
        best_children(&llrs, &params)
    };

    let mut visits = 0u64;
    let mut decrypts = 0u64;
    let mut ranks = Vec::with_capacity(rounds);

    let plaintexts = Arc::new(traces.plaintexts().to_vec());
    let mut pool: Vec<Node> = expand(&plaintexts, 1)?
        .into_iter()
        .map(|c| Node {
            path: PathCandidate::root(c),
            data: Arc::clone(&plaintexts),
        })
        .collect();
    visits += m_s;
    sort_pool(&mut pool);
    ranks.push(truth.and_then(|t| rank_of(&pool, t)));

    for round in 2..=rounds {
        pool.truncate(params.m_r);
        let grow = |node: &Node| -> Result<Vec<Node>> {
            let last = node.path.rounds.last().expect("paths are non-empty");
            let data = Arc::new(advance_round(&node.data, last, spec)?);
            Ok(expand(&data, round)?
                .into_iter()
                .map(|c| Node {
                    path: node.path.extend(c),
                    data: Arc::clone(&data),
                })
                .collect())
        };
        #[cfg(feature = "parallel")]
        let grown: Vec<Result<Vec<Node>>> = {
            use rayon::prelude::*;
            pool.par_iter().map(grow).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let grown: Vec<Result<Vec<Node>>> = pool.iter().map(grow).collect();

        decrypts += pool.len() as u64;
        visits += m_s * pool.len() as u64;
        let mut next = Vec::with_capacity(pool.len() * params.m_e);
        for children in grown {
            next.extend(children?);
        }
        pool = next;
        sort_pool(&mut pool);
        ranks.push(truth.and_then(|t| rank_of(&pool, t)));
    }

    pool.truncate(params.m_r);
    let survivors: Vec<PathCandidate> = pool.into_iter().map(|n| n.path).collect();
    let best = &survivors[0];
    Ok(AttackResult {
        best: ExpandedKey::new(best.rounds.clone()),
        best_metric: best.beta_p,
        report: ComplexityReport {
            m_s,
            visits_analytic: report_visits,
            decrypts_analytic: report_decrypts,
            visits_measured: visits,
            decrypts_measured: decrypts,
        },
        survivors,
        per_round_rank_of_truth: truth.map(|_| ranks),
    })
}

fn sort_pool(pool: &mut [Node]) {
    pool.sort_by(|a, b| a.path.cmp_rank(&b.path));
}

fn rank_of(pool: &[Node], truth: &ExpandedKey) -> Option<usize> {
    pool.iter()
        .position(|n| n.path.rounds.iter().zip(truth.rounds()).all(|(a, b)| a == b))
        .map(|i| i + 1)
}
