//! M-algorithm sequential decoding over round keys.
//!
//! The expanded key is a path in a tree whose level `r` branches over the
//! round key `k_r`. A path's metric is its Max-Log sequence log-likelihood
//! `sum_r sum_j L(k_rj | k_1..k_{r-1}) * k_rj`, accumulated round by round.
//! Each level keeps the `M_R` best paths; each kept path is expanded into its
//! `M_E` best children drawn from a structured candidate space around the
//! hard decision of its round LLRs.

mod attack;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::cipher::RoundKey;
use crate::error::{ensure_len, Error, Result};
use crate::inference::LlrVector;

pub use attack::{run_attack, run_attack_with_truth, AttackOptions, AttackResult, ComplexityReport, NoiseEstimate};

/// `sum_i L_i * b_i`.
pub fn seq_loglik(llrs: &LlrVector, bits: &BitVec) -> Result<f64> {
    ensure_len("bit sequence", bits.len(), llrs.len())?;
    Ok(dot(llrs.values(), bits.as_signs()))
}

/// Round metric of a child key given the LLRs conditioned on its parent.
pub fn round_metric(llrs: &LlrVector, rk: &RoundKey) -> Result<f64> {
    seq_loglik(llrs, rk.bits())
}

#[inline]
fn dot(llrs: &[f64], signs: &[i8]) -> f64 {
    llrs.iter().zip(signs).map(|(&l, &b)| l * f64::from(b)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Children kept per node expansion (`M_E`).
    pub m_e: usize,
    /// Survivors kept per tree level (`M_R`).
    pub m_r: usize,
    /// Width of the enumeration subspace (`n_E`).
    pub n_e: usize,
    /// Maximum number of deviations in the combinatorial subspace (`n_C`).
    pub n_c: usize,
}

impl SearchParams {
    pub fn new(m_e: usize, m_r: usize, n_e: usize, n_c: usize) -> Self {
        SearchParams { m_e, m_r, n_e, n_c }
    }

    /// Full enumeration of an `n_b`-bit round with `m` children and survivors.
    pub fn exhaustive(n_b: usize, m: usize) -> Self {
        SearchParams::new(m, m, n_b, 0)
    }

    /// Checks the parameters against a round key width and returns the
    /// size of the candidate space.
    pub fn validate(&self, n_b: usize) -> Result<u64> {
        if self.m_e == 0 || self.m_r == 0 {
            return Err(Error::config("M_E and M_R must be at least 1"));
        }
        if self.m_r > self.m_e {
            return Err(Error::config(format!(
                "M_R = {} exceeds M_E = {}; each level would keep fewer than M_R paths",
                self.m_r, self.m_e
            )));
        }
        let m_s = search_space_size(n_b, self.n_e, self.n_c)?;
        if self.m_e as u64 > m_s {
            return Err(Error::config(format!(
                "M_E = {} exceeds the candidate space size M_S = {m_s}",
                self.m_e
            )));
        }
        Ok(m_s)
    }
}

/// `M_S = 2^n_E * sum_{i=0..n_C} C(N_B - n_E, i)`.
pub fn search_space_size(n_b: usize, n_e: usize, n_c: usize) -> Result<u64> {
    if n_e > n_b {
        return Err(Error::config(format!("n_E = {n_e} exceeds N_B = {n_b}")));
    }
    if n_c > n_b - n_e {
        return Err(Error::config(format!("n_C = {n_c} exceeds N_B - n_E = {}", n_b - n_e)));
    }
    if n_e >= 64 {
        return Err(Error::Overflow("M_S"));
    }
    let m = (n_b - n_e) as u128;
    let mut binom: u128 = 1;
    let mut total: u128 = 1;
    for i in 1..=n_c as u128 {
        binom = binom.checked_mul(m - i + 1).ok_or(Error::Overflow("M_S"))? / i;
        total = total.checked_add(binom).ok_or(Error::Overflow("M_S"))?;
    }
    let total = total.checked_shl(n_e as u32).filter(|t| t >> n_e == total);
    total
        .and_then(|t| u64::try_from(t).ok())
        .ok_or(Error::Overflow("M_S"))
}

/// `N_visits = M_S + M_R * M_S * (R - 1)`.
pub fn predicted_visits(m_s: u64, m_r: u64, rounds: u64) -> Result<u64> {
    if m_s == 0 || m_r == 0 || rounds == 0 {
        return Err(Error::domain("M_S, M_R and R must be at least 1"));
    }
    m_r.checked_mul(m_s)
        .and_then(|x| x.checked_mul(rounds - 1))
        .and_then(|x| x.checked_add(m_s))
        .ok_or(Error::Overflow("N_visits"))
}

/// `N_decrypt = M_R * (R - 1)`.
pub fn predicted_decrypts(m_r: u64, rounds: u64) -> Result<u64> {
    if rounds == 0 {
        return Err(Error::domain("R must be at least 1"));
    }
    m_r.checked_mul(rounds - 1).ok_or(Error::Overflow("N_decrypt"))
}

/// A child round key with its round metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Child {
    pub key: RoundKey,
    pub metric: f64,
}

/// Orders by metric, best first; equal metrics order keys lexicographically
/// with +1 before -1.
fn rank_order(metric_a: f64, key_a: &[i8], metric_b: f64, key_b: &[i8]) -> Ordering {
    metric_b
        .total_cmp(&metric_a)
        .then_with(|| key_b.cmp(key_a))
}

/// Bit positions by increasing LLR magnitude (ties by position).
fn reliability_order(llrs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..llrs.len()).collect();
    order.sort_by(|&a, &b| llrs[a].abs().total_cmp(&llrs[b].abs()).then(a.cmp(&b)));
    order
}

/// Visits every candidate of the space: the hard decision, with any
/// sign pattern on the `n_e` least reliable positions, combined with up to
/// `n_c` flips among the remaining positions. The hard decision itself is
/// produced exactly once.
fn for_each_candidate(llrs: &[f64], n_e: usize, n_c: usize, mut visit: impl FnMut(&[i8])) {
    let order = reliability_order(llrs);
    let (enum_pos, comb_pos) = order.split_at(n_e);
    let base: Vec<i8> = llrs.iter().map(|&l| if l >= 0.0 { 1 } else { -1 }).collect();
    let mut cand = base.clone();
    let mut chosen: Vec<usize> = Vec::with_capacity(n_c);
    for size in 0..=n_c {
        // Lexicographic combinations of `size` indices into comb_pos.
        chosen.clear();
        chosen.extend(0..size);
        loop {
            for &c in &chosen {
                let p = comb_pos[c];
                cand[p] = -base[p];
            }
            for pattern in 0u64..1 << n_e {
                for (i, &p) in enum_pos.iter().enumerate() {
                    cand[p] = if (pattern >> i) & 1 == 1 { -base[p] } else { base[p] };
                }
                visit(&cand);
            }
            for &c in &chosen {
                let p = comb_pos[c];
                cand[p] = base[p];
            }
            // Advance to the next combination.
            let m = comb_pos.len();
            let mut i = size;
            while i > 0 && chosen[i - 1] == m - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            chosen[i - 1] += 1;
            for t in i..size {
                chosen[t] = chosen[t - 1] + 1;
            }
        }
    }
}

/// Every key of the candidate space, in generation order.
pub fn candidate_space(llrs: &LlrVector, n_e: usize, n_c: usize) -> Result<Vec<RoundKey>> {
    search_space_size(llrs.len(), n_e, n_c)?;
    let mut out = Vec::new();
    for_each_candidate(llrs.values(), n_e, n_c, |c| {
        out.push(RoundKey::new(BitVec::from_signs_unchecked(c.to_vec())))
    });
    Ok(out)
}

/// The `M_E` best children of a node, best first.
pub fn best_children(llrs: &LlrVector, params: &SearchParams) -> Result<Vec<Child>> {
    params.validate(llrs.len())?;
    let l = llrs.values();
    let mut scored: Vec<(f64, Vec<i8>)> = Vec::new();
    for_each_candidate(l, params.n_e, params.n_c, |c| scored.push((dot(l, c), c.to_vec())));
    let cmp = |a: &(f64, Vec<i8>), b: &(f64, Vec<i8>)| rank_order(a.0, &a.1, b.0, &b.1);
    if params.m_e < scored.len() {
        scored.select_nth_unstable_by(params.m_e - 1, cmp);
        scored.truncate(params.m_e);
    }
    scored.sort_by(cmp);
    Ok(scored
        .into_iter()
        .map(|(metric, signs)| Child {
            key: RoundKey::new(BitVec::from_signs_unchecked(signs)),
            metric,
        })
        .collect())
}

/// A partial expanded key `k_1 .. k_i` and its accumulated metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathCandidate {
    pub rounds: Vec<RoundKey>,
    pub beta_p: f64,
    pub round_metrics: Vec<f64>,
}

impl PathCandidate {
    pub fn root(child: Child) -> Self {
        PathCandidate {
            rounds: vec![child.key],
            beta_p: child.metric,
            round_metrics: vec![child.metric],
        }
    }

    /// Appends a round: the new path metric is the round log-likelihood plus
    /// the parent's metric.
    pub fn extend(&self, child: Child) -> Self {
        let mut rounds = self.rounds.clone();
        rounds.push(child.key);
        let mut round_metrics = self.round_metrics.clone();
        round_metrics.push(child.metric);
        PathCandidate {
            rounds,
            beta_p: child.metric + self.beta_p,
            round_metrics,
        }
    }

    pub fn depth(&self) -> usize {
        self.rounds.len()
    }

    pub(crate) fn cmp_rank(&self, other: &Self) -> Ordering {
        other.beta_p.total_cmp(&self.beta_p).then_with(|| {
            let a = self.rounds.iter().flat_map(|k| k.bits().iter());
            let b = other.rounds.iter().flat_map(|k| k.bits().iter());
            b.cmp(a)
        })
    }
}

/// The `m_r` paths with the largest metric, best first.
pub fn reduce_candidates(mut pool: Vec<PathCandidate>, m_r: usize) -> Vec<PathCandidate> {
    pool.sort_by(PathCandidate::cmp_rank);
    pool.truncate(m_r);
    pool
}
