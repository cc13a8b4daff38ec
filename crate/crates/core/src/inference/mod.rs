//! Soft information from traces: subkey likelihoods and key-bit LLRs.
//!
//! For every subkey hypothesis the traces are partitioned by each bit of the
//! predicted sensitive variable. If the hypothesis is right, the partition
//! with the bit set has the larger mean feature. The probability of that
//! ordering, under a Gaussian model of the two sample means, is the
//! likelihood of the hypothesis for that bit; bits are combined assuming
//! independence. Key-bit LLRs then marginalize over the hypotheses.

mod normal;
mod wht;

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::cipher::{select, SBox, Subkey};
use crate::error::{ensure_len, Error, Result};
use crate::leakage::TraceSet;

pub use normal::{log_normal_cdf, log_normal_cdf_exact, normal_cdf};
pub use wht::SelectionKernel;

/// Magnitude bound applied to every LLR.
pub const L_MAX: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LlrMode {
    /// Log-sum-exp over each hypothesis half-set.
    #[default]
    Exact,
    /// Maximum over each half-set.
    MaxLog,
}

impl std::str::FromStr for LlrMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(LlrMode::Exact),
            "maxlog" => Ok(LlrMode::MaxLog),
            other => Err(Error::config(format!("unknown LLR mode {other:?} (exact|maxlog)"))),
        }
    }
}

/// Where the noise standard deviation for the mean estimators comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaSource {
    /// A known measurement noise level.
    Known(f64),
    /// Pooled within-partition sample standard deviation, estimated per
    /// hypothesis and bit. Includes the algorithmic noise of the other bits.
    Pooled,
}

/// P(b = +1), P(b = -1) for an LLR.
pub fn llr_to_prob(l: f64) -> (f64, f64) {
    let p_plus = 1.0 / (1.0 + (-l).exp());
    let p_minus = 1.0 / (1.0 + l.exp());
    (p_plus, p_minus)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClampedLlr {
    pub value: f64,
    /// Set when the input probability was 0 or 1 (or the LLR exceeded
    /// [`L_MAX`]).
    pub clamped: bool,
}

pub fn prob_to_llr(p_plus: f64) -> Result<ClampedLlr> {
    if !(0.0..=1.0).contains(&p_plus) {
        return Err(Error::domain(format!("probability {p_plus} outside [0, 1]")));
    }
    let l = (p_plus / (1.0 - p_plus)).ln();
    Ok(if l.abs() > L_MAX {
        ClampedLlr {
            value: L_MAX.copysign(l),
            clamped: true,
        }
    } else {
        ClampedLlr {
            value: l,
            clamped: false,
        }
    })
}

/// LLR from both probabilities of a bit, as returned by [`llr_to_prob`].
/// Unlike [`prob_to_llr`] this stays exact when `p_plus` rounds to 1.
pub fn probs_to_llr(p_plus: f64, p_minus: f64) -> Result<ClampedLlr> {
    if !(p_plus >= 0.0 && p_minus >= 0.0) || p_plus + p_minus == 0.0 {
        return Err(Error::domain(format!("invalid probability pair ({p_plus}, {p_minus})")));
    }
    let l = p_plus.ln() - p_minus.ln();
    Ok(ClampedLlr {
        value: clamp_llr(l),
        clamped: l.abs() > L_MAX,
    })
}

fn clamp_llr(l: f64) -> f64 {
    l.clamp(-L_MAX, L_MAX)
}

/// Per-bit LLRs, each within `[-L_MAX, L_MAX]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("LLR {i} is not finite")));
        }
        Ok(LlrVector(values.into_iter().map(clamp_llr).collect()))
    }

    pub fn zeros(n: usize) -> Self {
        LlrVector(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Hard decision: +1 for non-negative LLRs.
    pub fn signs(&self) -> BitVec {
        BitVec::from_signs_unchecked(self.0.iter().map(|&l| if l >= 0.0 { 1 } else { -1 }).collect())
    }
}

/// Adds LLRs of independent observations of the same bits.
pub fn combine_llrs(a: &LlrVector, b: &LlrVector) -> Result<LlrVector> {
    ensure_len("LLR vector", b.len(), a.len())?;
    Ok(LlrVector(
        a.0.iter().zip(&b.0).map(|(x, y)| clamp_llr(x + y)).collect(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionStats {
    pub mu_p: f64,
    pub mu_z: f64,
    pub n_p: usize,
    pub n_z: usize,
    /// Standard deviation of a partition-mean estimator.
    pub sigma_mu: f64,
}

impl PartitionStats {
    fn from_sums(
        (n_p, sum_p, ss_p): (f64, f64, f64),
        (n_z, sum_z, ss_z): (f64, f64, f64),
        sigma: SigmaSource,
    ) -> Result<Self> {
        if n_p < 1.0 || n_z < 1.0 {
            return Err(Error::DegeneratePartition {
                positive: n_p as usize,
                negative: n_z as usize,
            });
        }
        let mu_p = sum_p / n_p;
        let mu_z = sum_z / n_z;
        let sigma_n = match sigma {
            SigmaSource::Known(s) => s,
            SigmaSource::Pooled => {
                let within = (ss_p - n_p * mu_p * mu_p).max(0.0) + (ss_z - n_z * mu_z * mu_z).max(0.0);
                (within / (n_p + n_z - 2.0).max(1.0)).sqrt()
            }
        };
        Ok(PartitionStats {
            mu_p,
            mu_z,
            n_p: n_p as usize,
            n_z: n_z as usize,
            sigma_mu: sigma_n * (0.5 / n_p + 0.5 / n_z).sqrt(),
        })
    }

    /// Argument of the normal CDF: half the mean difference over `sigma_mu`.
    /// A zero `sigma_mu` sends any non-zero difference to the saturated end
    /// of the table.
    fn z_score(&self) -> f64 {
        let half_delta = 0.5 * (self.mu_p - self.mu_z);
        if self.sigma_mu > 0.0 {
            half_delta / self.sigma_mu
        } else if half_delta == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(half_delta)
        }
    }
}

/// Count, sum and sum of squares of one partition.
type Sums = (f64, f64, f64);

fn partition_sums(features: &[f64], labels: &[i8]) -> Result<(Sums, Sums)> {
    ensure_len("labels", labels.len(), features.len())?;
    if features.len() < 2 {
        return Err(Error::domain("partitioning needs at least two traces"));
    }
    let mut p = (0.0, 0.0, 0.0);
    let mut z = (0.0, 0.0, 0.0);
    for (&f, &l) in features.iter().zip(labels) {
        let side = match l {
            1 => &mut p,
            -1 => &mut z,
            other => return Err(Error::domain(format!("label {other} is not -1 or +1"))),
        };
        side.0 += 1.0;
        side.1 += f;
        side.2 += f * f;
    }
    Ok((p, z))
}

/// Conditional means of the features split by label, with a known noise level.
pub fn partition_stats(features: &[f64], labels: &[i8], sigma_n: f64) -> Result<PartitionStats> {
    let (p, z) = partition_sums(features, labels)?;
    PartitionStats::from_sums(p, z, SigmaSource::Known(sigma_n))
}

pub fn partition_stats_with(features: &[f64], labels: &[i8], sigma: SigmaSource) -> Result<PartitionStats> {
    let (p, z) = partition_sums(features, labels)?;
    PartitionStats::from_sums(p, z, sigma)
}

/// `Phi((mu_p - mu_z) / 2 / sigma_mu)`: probability that the positive
/// partition has the larger true mean.
pub fn tail_likelihood(stats: &PartitionStats) -> f64 {
    normal_cdf(stats.z_score())
}

pub fn tail_log_likelihood(stats: &PartitionStats) -> f64 {
    log_normal_cdf(stats.z_score())
}

/// Log-likelihood of one subkey hypothesis, summed over the bits of the
/// sensitive variable. Evaluated trace by trace.
pub fn subkey_log_likelihood(
    features: &[f64],
    lane_data: &[BitVec],
    k: &Subkey,
    sbox: &SBox,
    sigma: SigmaSource,
) -> Result<f64> {
    ensure_len("lane data", lane_data.len(), features.len())?;
    let predicted = lane_data
        .iter()
        .map(|d| select(d, k, sbox))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for bit in 0..sbox.width() {
        let labels: Vec<i8> = predicted.iter().map(|v| v.get(bit)).collect();
        total += match partition_stats_with(features, &labels, sigma) {
            Ok(stats) => tail_log_likelihood(&stats),
            Err(Error::DegeneratePartition { .. }) => 0.5f64.ln(),
            Err(e) => return Err(e),
        };
    }
    Ok(total)
}

/// Log-likelihoods of all `2^s` hypotheses of one lane, indexed by subkey
/// value.
#[derive(Clone, Debug, PartialEq)]
pub struct SubkeyLikelihoodTable {
    width: usize,
    log_values: Vec<f64>,
}

impl SubkeyLikelihoodTable {
    pub fn from_log_values(width: usize, log_values: Vec<f64>) -> Result<Self> {
        if width == 0 || width > 16 {
            return Err(Error::domain(format!("subkey width {width} not in 1..=16")));
        }
        ensure_len("likelihood table", log_values.len(), 1 << width)?;
        if log_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("likelihood table entries must be finite"));
        }
        Ok(SubkeyLikelihoodTable { width, log_values })
    }

    /// From linear-domain probabilities (each in (0, 1]).
    pub fn from_probabilities(width: usize, probs: &[f64]) -> Result<Self> {
        Self::from_log_values(width, probs.iter().map(|p| p.ln()).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.log_values.iter().enumerate() {
            if v > self.log_values[best] {
                best = k;
            }
        }
        best
    }
}

/// The table by direct per-hypothesis evaluation, `O(2^s * N_T * s)`.
pub fn subkey_table_direct(
    features: &[f64],
    lane_data: &[BitVec],
    sbox: &SBox,
    sigma: SigmaSource,
) -> Result<SubkeyLikelihoodTable> {
    let w = sbox.width();
    let values = (0..1u16 << w)
        .map(|k| {
            let k = Subkey::from_value(k as u8, w)?;
            subkey_log_likelihood(features, lane_data, &k, sbox, sigma)
        })
        .collect::<Result<Vec<_>>>()?;
    SubkeyLikelihoodTable::from_log_values(w, values)
}

/// The table from binned partition sums, `O(N_T + s^2 * 2^s)`.
pub fn subkey_table(
    features: &[f64],
    lane_values: &[u8],
    kernel: &SelectionKernel,
    sigma: SigmaSource,
) -> Result<SubkeyLikelihoodTable> {
    ensure_len("lane data", lane_values.len(), features.len())?;
    if features.len() < 2 {
        return Err(Error::domain("subkey table needs at least two traces"));
    }
    let w = kernel.width();
    if let Some(&d) = lane_values.iter().find(|&&d| (d as usize) >> w != 0) {
        return Err(Error::domain(format!("lane value {d:#x} exceeds {w} bits")));
    }
    let sums = kernel.positive_sums(features, lane_values);
    let half = 0.5f64.ln();
    let values = (0..1usize << w)
        .map(|k| {
            (0..w)
                .map(|b| {
                    let p = (sums.count[b][k], sums.sum[b][k], sums.sum_sq[b][k]);
                    let z = (
                        sums.total_count - p.0,
                        sums.total_sum - p.1,
                        sums.total_sum_sq - p.2,
                    );
                    match PartitionStats::from_sums(p, z, sigma) {
                        Ok(stats) => tail_log_likelihood(&stats),
                        Err(_) => half,
                    }
                })
                .sum()
        })
        .collect();
    SubkeyLikelihoodTable::from_log_values(w, values)
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Key-bit LLRs of one subkey. Bit `i` of the result is bit `i` (MSB first)
/// of the subkey.
pub fn keybit_llrs(table: &SubkeyLikelihoodTable, mode: LlrMode) -> LlrVector {
    let w = table.width;
    let lv = &table.log_values;
    let llrs = (0..w)
        .map(|i| {
            let mask = 1usize << (w - 1 - i);
            let plus = (0..lv.len()).filter(|k| k & mask != 0).map(|k| lv[k]);
            let minus = (0..lv.len()).filter(|k| k & mask == 0).map(|k| lv[k]);
            let l = match mode {
                LlrMode::Exact => log_sum_exp(plus) - log_sum_exp(minus),
                LlrMode::MaxLog => {
                    plus.fold(f64::NEG_INFINITY, f64::max) - minus.fold(f64::NEG_INFINITY, f64::max)
                }
            };
            clamp_llr(l)
        })
        .collect();
    LlrVector(llrs)
}

/// LLRs for every bit of round key `round`, given the state entering that
/// round for every trace.
pub fn round_llrs(
    traces: &TraceSet,
    round_data: &[BitVec],
    round: usize,
    kernel: &SelectionKernel,
    sigma: SigmaSource,
    mode: LlrMode,
) -> Result<LlrVector> {
    ensure_len("round data", round_data.len(), traces.n_traces())?;
    if round == 0 || round > traces.rounds() {
        return Err(Error::domain(format!("round {round} not in 1..={}", traces.rounds())));
    }
    let w = traces.cipher().sbox_width();
    if kernel.width() != w {
        return Err(Error::config("selection kernel width does not match the cipher"));
    }
    let mut out = Vec::with_capacity(traces.cipher().block_bits());
    let mut lane_values = vec![0u8; round_data.len()];
    for j in 0..traces.lanes() {
        for (v, d) in lane_values.iter_mut().zip(round_data) {
            *v = d.lane(j, w);
        }
        let features = traces.lane_features(round, j);
        let table = subkey_table(&features, &lane_values, kernel, sigma)?;
        out.extend_from_slice(&keybit_llrs(&table, mode).0);
    }
    Ok(LlrVector(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{derive_round_data, random_expanded_key, CipherSpec};
    use crate::leakage::{random_plaintexts, simulate_traces, NoiseSpec, PowerModel};
    use proptest::prelude::*;

    #[test]
    fn llr_prob_examples() {
        assert_eq!(llr_to_prob(0.0), (0.5, 0.5));
        let (p, q) = llr_to_prob(2.0);
        // e / (e + e^-1)
        let e = std::f64::consts::E;
        assert!((p - e / (e + 1.0 / e)).abs() < 1e-15);
        assert!((p - 0.8808).abs() < 1e-4);
        assert!((p + q - 1.0).abs() < 1e-15);
        assert!((p / q - 2f64.exp()).abs() < 1e-12);

        assert_eq!(prob_to_llr(0.5).unwrap().value, 0.0);
        assert!((prob_to_llr(0.8).unwrap().value - 4f64.ln()).abs() < 1e-12);
        assert!((prob_to_llr(0.3).unwrap().value + prob_to_llr(0.7).unwrap().value).abs() < 1e-15);
    }

    #[test]
    fn boundary_probabilities_clamp() {
        let one = prob_to_llr(1.0).unwrap();
        assert_eq!(one.value, L_MAX);
        assert!(one.clamped);
        let zero = prob_to_llr(0.0).unwrap();
        assert_eq!(zero.value, -L_MAX);
        assert!(zero.clamped);
        assert!(!prob_to_llr(0.9).unwrap().clamped);
        assert!(prob_to_llr(1.5).is_err());
    }

    proptest! {
        #[test]
        fn llr_prob_inverse(l in -30.0f64..30.0) {
            let (p, q) = llr_to_prob(l);
            prop_assert!((probs_to_llr(p, q).unwrap().value - l).abs() <= 1e-12);
            // From p alone the error is about ulp(p) / (p (1 - p)), i.e.
            // a few ulps times 2 + e^l + e^-l.
            let back = prob_to_llr(p).unwrap().value;
            if l <= 0.0 {
                prop_assert!((back - l).abs() <= 1e-12);
            } else {
                prop_assert!((back - l).abs() <= 5e-16 * (2.0 + l.exp() + (-l).exp()));
            }
        }
    }

    #[test]
    fn partition_examples() {
        let f = [3.0, 3.0, 3.0, 1.0, 1.0, 1.0];
        let lab = [1, 1, 1, -1, -1, -1];
        let s = partition_stats(&f, &lab, 1.0).unwrap();
        assert_eq!((s.mu_p, s.mu_z, s.n_p, s.n_z), (3.0, 1.0, 3, 3));

        let f8: Vec<f64> = (0..8).map(f64::from).collect();
        let lab8 = [1, -1, 1, -1, 1, -1, 1, -1];
        let s = partition_stats(&f8, &lab8, 1.0).unwrap();
        assert!((s.sigma_mu - 0.5).abs() < 1e-15);
        assert!((s.sigma_mu - 1.0 / (8.0f64 / 2.0).sqrt()).abs() < 1e-15);

        let perm = [5, 2, 7, 0, 3, 6, 1, 4];
        let pf: Vec<f64> = perm.iter().map(|&i| f8[i]).collect();
        let pl: Vec<i8> = perm.iter().map(|&i| lab8[i]).collect();
        assert_eq!(partition_stats(&pf, &pl, 1.0).unwrap(), s);
    }

    #[test]
    fn partition_errors() {
        assert!(matches!(
            partition_stats(&[1.0, 2.0], &[1, 1], 1.0),
            Err(Error::DegeneratePartition { positive: 2, negative: 0 })
        ));
        assert!(partition_stats(&[1.0], &[1], 1.0).is_err());
        assert!(partition_stats(&[1.0, 2.0], &[1, 0], 1.0).is_err());
        assert!(partition_stats(&[1.0, 2.0], &[1], 1.0).is_err());
    }

    fn stats_with_z(z: f64) -> PartitionStats {
        PartitionStats {
            mu_p: 2.0 * z,
            mu_z: 0.0,
            n_p: 4,
            n_z: 4,
            sigma_mu: 1.0,
        }
    }

    /// Standard normal CDF by composite Simpson integration of the density.
    fn phi_quadrature(x: f64) -> f64 {
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let (a, n) = (-12.0, 20_000);
        let h = (x - a) / n as f64;
        let mut s = pdf(a) + pdf(x);
        for i in 1..n {
            s += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn tail_likelihood_examples() {
        assert!((tail_likelihood(&stats_with_z(0.0)) - 0.5).abs() < 1e-12);
        let oracle = phi_quadrature(1.6449);
        assert!((oracle - 0.95).abs() < 1e-4);
        assert!((tail_likelihood(&stats_with_z(1.6449)) - oracle).abs() < 1e-6);
        for z in [0.3, 1.0, 2.2, 4.0] {
            let a = tail_likelihood(&stats_with_z(z));
            let b = tail_likelihood(&stats_with_z(-z));
            assert!((a + b - 1.0).abs() < 1e-6);
            assert!((a - phi_quadrature(z)).abs() < 1e-6);
        }
    }

    #[test]
    fn tail_likelihood_is_monotone() {
        let mut prev = 0.0;
        for i in -4000..=4000 {
            let v = tail_likelihood(&stats_with_z(i as f64 / 100.0));
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn keybit_llr_examples() {
        let t1 = SubkeyLikelihoodTable::from_probabilities(1, &[0.2, 0.8]).unwrap();
        for mode in [LlrMode::Exact, LlrMode::MaxLog] {
            assert!((keybit_llrs(&t1, mode).values()[0] - 4f64.ln()).abs() < 1e-12);
        }

        let uniform = SubkeyLikelihoodTable::from_probabilities(4, &[0.3; 16]).unwrap();
        for mode in [LlrMode::Exact, LlrMode::MaxLog] {
            assert!(keybit_llrs(&uniform, mode).values().iter().all(|&l| l == 0.0));
        }

        // Values indexed by subkey value: (b1,b2) = (+,+) is 0b11.
        let mut p = [0.0; 4];
        p[0b11] = 0.4;
        p[0b10] = 0.3;
        p[0b01] = 0.2;
        p[0b00] = 0.1;
        let t2 = SubkeyLikelihoodTable::from_probabilities(2, &p).unwrap();
        let exact = keybit_llrs(&t2, LlrMode::Exact);
        let maxlog = keybit_llrs(&t2, LlrMode::MaxLog);
        assert!((exact.values()[0] - (0.7f64 / 0.3).ln()).abs() < 1e-12);
        assert!((exact.values()[0] - 0.8473).abs() < 1e-4);
        assert!((maxlog.values()[0] - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn keybit_llrs_survive_extreme_logs() {
        let mut lv = vec![-1e4; 16];
        lv[0b1010] = -9000.0;
        let t = SubkeyLikelihoodTable::from_log_values(4, lv).unwrap();
        let l = keybit_llrs(&t, LlrMode::Exact);
        assert_eq!(l.values(), &[L_MAX, -L_MAX, L_MAX, -L_MAX]);
    }

    #[test]
    fn combine_examples() {
        let a = LlrVector::new(vec![1.0, -2.5, 40.0]).unwrap();
        let z = LlrVector::zeros(3);
        assert_eq!(combine_llrs(&a, &z).unwrap(), a);
        assert_eq!(combine_llrs(&a, &a).unwrap().values(), &[2.0, -5.0, L_MAX]);
        let b = LlrVector::new(vec![0.5, 0.5, -1.0]).unwrap();
        assert_eq!(combine_llrs(&a, &b).unwrap(), combine_llrs(&b, &a).unwrap());
        assert!(combine_llrs(&a, &LlrVector::zeros(2)).is_err());
    }

    #[test]
    fn constant_features_carry_no_information() {
        let sbox = SBox::present();
        let data: Vec<BitVec> = (0..64u64).map(|i| BitVec::from_uint(i % 16, 4).unwrap()).collect();
        let features = vec![2.0; 64];
        let k = Subkey::from_value(5, 4).unwrap();
        for sigma in [SigmaSource::Known(1.0), SigmaSource::Pooled] {
            let ll = subkey_log_likelihood(&features, &data, &k, &sbox, sigma).unwrap();
            assert!((ll - 4.0 * 0.5f64.ln()).abs() < 1e-5);
        }
    }

    #[test]
    fn degenerate_partition_contributes_half() {
        let sbox = SBox::present();
        // A single data value: every bit partition is one-sided.
        let data = vec![BitVec::from_uint(3, 4).unwrap(); 10];
        let features: Vec<f64> = (0..10).map(f64::from).collect();
        let k = Subkey::from_value(0, 4).unwrap();
        let ll = subkey_log_likelihood(&features, &data, &k, &sbox, SigmaSource::Known(1.0)).unwrap();
        assert!((ll - 4.0 * 0.5f64.ln()).abs() < 1e-12);
    }

    fn lane_setup(width: usize, n: usize, gamma: Option<f64>, seed: u64) -> (Vec<f64>, Vec<BitVec>, u8, f64) {
        let spec = CipherSpec::new(width, 1, width).unwrap();
        let key = random_expanded_key(&spec, seed);
        let pts = random_plaintexts(&spec, n, seed);
        let noise = match gamma {
            Some(g) => NoiseSpec::calibrate(g, width as f64 / 4.0).unwrap(),
            None => NoiseSpec::noiseless(width as f64 / 4.0),
        };
        let ts = simulate_traces(&key, &pts, &PowerModel::HammingWeight, &noise, &spec, seed).unwrap();
        (ts.lane_features(1, 0), pts, key.round(1).bits().lane(0, width), noise.sigma_n())
    }

    #[test]
    fn fast_table_matches_direct_evaluation() {
        for (width, gamma) in [(4, Some(0.5)), (8, Some(2.0)), (8, None)] {
            let (f, data, _, sigma_n) = lane_setup(width, 500, gamma, 11);
            let sbox = SBox::for_width(width).unwrap();
            let kernel = SelectionKernel::new(&sbox);
            let values: Vec<u8> = data.iter().map(|d| d.lane(0, width)).collect();
            for sigma in [SigmaSource::Known(sigma_n.max(0.1)), SigmaSource::Pooled] {
                let fast = subkey_table(&f, &values, &kernel, sigma).unwrap();
                let slow = subkey_table_direct(&f, &data, &sbox, sigma).unwrap();
                for (a, b) in fast.log_values().iter().zip(slow.log_values()) {
                    assert!((a - b).abs() < 1e-7 * (1.0 + b.abs()), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn noiseless_argmax_is_true_subkey() {
        for (width, seed) in [(8, 1), (8, 2), (4, 3), (4, 4)] {
            let (f, data, k_true, _) = lane_setup(width, 1000, None, seed);
            let sbox = SBox::for_width(width).unwrap();
            let kernel = SelectionKernel::new(&sbox);
            let values: Vec<u8> = data.iter().map(|d| d.lane(0, width)).collect();
            let table = subkey_table(&f, &values, &kernel, SigmaSource::Pooled).unwrap();
            assert_eq!(table.argmax(), k_true as usize);
            assert_eq!(table.log_values().len(), 1 << width);
            // Every bit of the true hypothesis has the positive partition on top.
            assert!(table.log_values()[k_true as usize] > -1e-3);
        }
    }

    #[test]
    fn xor_relabeling_shifts_argmax() {
        let (f, data, k_true, _) = lane_setup(8, 1000, None, 7);
        let kernel = SelectionKernel::new(&SBox::aes());
        let c = 0x3c;
        let shifted: Vec<u8> = data.iter().map(|d| d.lane(0, 8) ^ c).collect();
        let table = subkey_table(&f, &shifted, &kernel, SigmaSource::Pooled).unwrap();
        assert_eq!(table.argmax(), (k_true ^ c) as usize);
    }

    #[test]
    fn noiseless_tables_peak_at_true_subkeys() {
        let spec = CipherSpec::desk(16, 3).unwrap();
        let key = random_expanded_key(&spec, 21);
        let pts = random_plaintexts(&spec, 1000, 21);
        let ts = simulate_traces(&key, &pts, &PowerModel::HammingWeight, &NoiseSpec::noiseless(1.0), &spec, 1)
            .unwrap();
        let kernel = SelectionKernel::new(spec.sbox());
        for r in 1..=3 {
            let data = derive_round_data(&pts, &key.rounds()[..r - 1], &spec).unwrap();
            for j in 0..4 {
                let vals: Vec<u8> = data.iter().map(|d| d.lane(j, 4)).collect();
                let table = subkey_table(&ts.lane_features(r, j), &vals, &kernel, SigmaSource::Pooled).unwrap();
                assert_eq!(table.argmax() as u8, key.round(r).bits().lane(j, 4), "round {r} lane {j}");
            }
            // Max-Log signs follow the per-lane argmax.
            let maxlog = round_llrs(&ts, &data, r, &kernel, SigmaSource::Pooled, LlrMode::MaxLog).unwrap();
            assert_eq!(&maxlog.signs(), key.round(r).bits(), "round {r}");
            // Exact marginals can be pulled by near-equivalent subkeys, but
            // confident bits must agree with the key.
            let llrs = round_llrs(&ts, &data, r, &kernel, SigmaSource::Pooled, LlrMode::Exact).unwrap();
            assert_eq!(llrs.len(), 16);
            let truth = key.round(r).bits();
            let confident: Vec<usize> = (0..16).filter(|&i| llrs.values()[i].abs() > 2.0).collect();
            assert!(!confident.is_empty());
            for i in confident {
                assert_eq!(llrs.signs().get(i), truth.get(i), "round {r} bit {i}");
            }
        }
    }

    #[test]
    fn round_llrs_validates() {
        let spec = CipherSpec::desk(8, 2).unwrap();
        let key = random_expanded_key(&spec, 2);
        let pts = random_plaintexts(&spec, 10, 2);
        let ts = simulate_traces(&key, &pts, &PowerModel::HammingWeight, &NoiseSpec::noiseless(1.0), &spec, 1)
            .unwrap();
        let kernel = SelectionKernel::new(spec.sbox());
        assert!(round_llrs(&ts, &pts[..5], 1, &kernel, SigmaSource::Pooled, LlrMode::Exact).is_err());
        assert!(round_llrs(&ts, &pts, 3, &kernel, SigmaSource::Pooled, LlrMode::Exact).is_err());
        let wrong = SelectionKernel::new(&SBox::aes());
        assert!(round_llrs(&ts, &pts, 1, &wrong, SigmaSource::Pooled, LlrMode::Exact).is_err());
    }
}
