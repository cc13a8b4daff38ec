use serde::{Deserialize, Serialize};

use super::csv_out::render;
use super::{fingerprint_of, AttackConfig};
use crate::bits::BitVec;
use crate::cipher::{derive_round_data, RoundKey};
use crate::error::{Error, Result};
use crate::inference::{round_llrs, SelectionKernel, SigmaSource};
use crate::rng::{self, Domain};
use crate::search::NoiseEstimate;

/// LLR samples from repeated simulations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LlrSamples {
    /// Round-1 LLRs of the key bits whose true value is +1.
    pub correct: Vec<f64>,
    /// Round-2 LLRs computed after a wrong round-1 key, each multiplied by
    /// the true round-2 key bit. Stored run by run, `block_bits` per run.
    pub wrong: Vec<f64>,
    pub block_bits: usize,
}

impl LlrSamples {
    /// Mean of the wrong-prefix samples of each run.
    pub fn wrong_run_means(&self) -> Vec<f64> {
        self.wrong.chunks(self.block_bits).map(mean).collect()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// A uniformly random round-1 key other than `truth`.
fn wrong_key(truth: &RoundKey, seed: u64) -> RoundKey {
    let mut rng = rng::stream(seed, Domain::WrongPrefix, 0);
    loop {
        let k = RoundKey::new(crate::cipher::random_bits(&mut rng, truth.len()));
        if k != *truth {
            return k;
        }
    }
}

/// Simulates `reps` trace sets with seeds `config.seed + i` and collects
/// both LLR series.
pub fn sample_llrs(config: &AttackConfig, reps: usize) -> Result<LlrSamples> {
    config.validate()?;
    let spec = &config.cipher;
    if spec.rounds() < 2 {
        return Err(Error::config("the wrong-prefix series needs at least two rounds"));
    }
    if reps == 0 {
        return Err(Error::config("repetitions must be at least 1"));
    }
    let kernel = SelectionKernel::new(spec.sbox());
    let mut out = LlrSamples {
        block_bits: spec.block_bits(),
        ..Default::default()
    };
    for i in 0..reps {
        let mut c = config.clone();
        c.seed = config.seed.wrapping_add(i as u64);
        let (traces, key) = c.simulate()?;
        let sigma = match c.sigma {
            NoiseEstimate::Known => SigmaSource::Known(traces.noise().sigma_n()),
            NoiseEstimate::Pooled => SigmaSource::Pooled,
        };
        let k1 = key.round(1);
        let l1 = round_llrs(&traces, traces.plaintexts(), 1, &kernel, sigma, c.mode)?;
        out.correct.extend(
            l1.values()
                .iter()
                .zip(k1.bits().iter())
                .filter(|&(_, b)| b > 0)
                .map(|(&l, _)| l),
        );

        let wrong = wrong_key(k1, c.seed);
        let data = derive_round_data(traces.plaintexts(), std::slice::from_ref(&wrong), spec)?;
        let l2 = round_llrs(&traces, &data, 2, &kernel, sigma, c.mode)?;
        let k2: &BitVec = key.round(2).bits();
        out.wrong
            .extend(l2.values().iter().zip(k2.iter()).map(|(&l, b)| l * f64::from(b)));
    }
    Ok(out)
}

/// Equal-width histogram of both series over their joint range. The last
/// bin is closed so that every sample is counted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlrHistogram {
    pub edges: Vec<f64>,
    pub correct: Vec<u64>,
    pub wrong: Vec<u64>,
}

pub fn histogram(samples: &LlrSamples, bins: usize) -> Result<LlrHistogram> {
    if bins < 2 {
        return Err(Error::config(format!("need at least 2 bins, got {bins}")));
    }
    let all = samples.correct.iter().chain(&samples.wrong);
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    } else if lo == hi {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + i as f64 * width })
        .collect();
    let count = |xs: &[f64]| {
        let mut c = vec![0u64; bins];
        for &x in xs {
            let i = (((x - lo) / width).floor() as usize).min(bins - 1);
            c[i] += 1;
        }
        c
    };
    Ok(LlrHistogram {
        correct: count(&samples.correct),
        wrong: count(&samples.wrong),
        edges,
    })
}

impl LlrHistogram {
    pub fn to_csv(&self, fingerprint: &str) -> Result<String> {
        let rows: Vec<Vec<String>> = (0..self.correct.len())
            .map(|i| {
                vec![
                    i.to_string(),
                    self.edges[i].to_string(),
                    self.edges[i + 1].to_string(),
                    self.correct[i].to_string(),
                    self.wrong[i].to_string(),
                ]
            })
            .collect();
        render(fingerprint, &["bin", "lower", "upper", "correct", "wrong_prefix"], &rows)
    }
}

/// Fingerprint of a histogram run: configuration, bins and repetitions.
pub fn llr_hist_fingerprint(config: &AttackConfig, bins: usize, reps: usize) -> String {
    fingerprint_of(&(config, bins, reps))
}

pub fn cmd_llr_hist(config: &AttackConfig, bins: usize, reps: usize) -> Result<(LlrSamples, LlrHistogram)> {
    if bins < 2 {
        return Err(Error::config(format!("need at least 2 bins, got {bins}")));
    }
    let samples = sample_llrs(config, reps)?;
    let hist = histogram(&samples, bins)?;
    Ok((samples, hist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::CipherSpec;
    use crate::inference::LlrMode;
    use crate::leakage::PowerModel;
    use crate::search::SearchParams;

    fn config(gamma: f64, n_traces: usize) -> AttackConfig {
        AttackConfig {
            cipher: CipherSpec::desk(16, 2).unwrap(),
            model: PowerModel::HammingWeight,
            gamma: Some(gamma),
            n_traces,
            params: SearchParams::new(4, 2, 2, 1),
            mode: LlrMode::Exact,
            sigma: NoiseEstimate::Pooled,
            seed: 3,
            oversampling: None,
        }
    }

    #[test]
    fn counts_are_conserved() {
        let (s, h) = cmd_llr_hist(&config(1.0, 200), 17, 3).unwrap();
        assert_eq!(h.edges.len(), 18);
        assert_eq!(h.correct.iter().sum::<u64>() as usize, s.correct.len());
        assert_eq!(h.wrong.iter().sum::<u64>() as usize, s.wrong.len());
        assert_eq!(s.wrong.len(), 3 * 16);
    }

    #[test]
    fn wrong_key_is_wrong() {
        let truth = RoundKey::new(BitVec::from_uint(0x1, 2).unwrap());
        for seed in 0..50 {
            assert_ne!(wrong_key(&truth, seed), truth);
        }
    }

    #[test]
    fn degenerate_range_still_bins() {
        let s = LlrSamples {
            correct: vec![50.0; 4],
            wrong: vec![50.0; 2],
            block_bits: 2,
        };
        let h = histogram(&s, 4).unwrap();
        assert_eq!(h.correct.iter().sum::<u64>(), 4);
        assert!(histogram(&s, 1).is_err());
    }

    #[test]
    fn correct_series_grows_with_traces() {
        let (few, _) = cmd_llr_hist(&config(1.0, 100), 10, 4).unwrap();
        let (many, _) = cmd_llr_hist(&config(1.0, 1600), 10, 4).unwrap();
        assert!(mean(&many.correct) > mean(&few.correct));
    }
}
