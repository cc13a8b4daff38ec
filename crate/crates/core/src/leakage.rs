//! Power models, noise calibration and trace simulation.
//!
//! The simulated device leaks once per (round, S-box lane): the sensitive
//! variable is the S-box output of that lane, mapped through the power model,
//! plus white Gaussian noise `y = l + n`.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::cipher::{round_encrypt, CipherSpec, ExpandedKey};
use crate::error::{ensure_len, Error, Result};
use crate::rng::{self, Domain};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PowerModel {
    HammingWeight,
    /// Distance to a constant but unknown bus state.
    HdSoftware { reference: BitVec },
    /// Distance to the value the same lane held in the previous round; the
    /// register starts out all-zero.
    HdHardware,
}

impl PowerModel {
    pub fn validate(&self, n_v: usize) -> Result<()> {
        if let PowerModel::HdSoftware { reference } = self {
            if reference.len() != n_v {
                return Err(Error::config(format!(
                    "reference state has {} bits, sensitive variable has {n_v}",
                    reference.len()
                )));
            }
        }
        Ok(())
    }

    fn leak_lane(&self, v: u8, prev: u8, reference: u8) -> f64 {
        match self {
            PowerModel::HammingWeight => f64::from(v.count_ones()),
            PowerModel::HdSoftware { .. } => f64::from((v ^ reference).count_ones()),
            PowerModel::HdHardware => f64::from((v ^ prev).count_ones()),
        }
    }
}

/// Number of +1 bits.
pub fn leak_hw(v: &BitVec) -> f64 {
    v.count_ones() as f64
}

pub fn leak_hd_software(v: &BitVec, reference: &BitVec) -> Result<f64> {
    Ok(leak_hw(&v.xor(reference)?))
}

pub fn leak_hd_hardware(v_now: &BitVec, v_prev: &BitVec) -> Result<f64> {
    Ok(leak_hw(&v_now.xor(v_prev)?))
}

/// Variance of the leakage over uniformly distributed sensitive variables.
/// All three models sum `n_v` independent fair bits, hence `n_v / 4`.
pub fn leakage_variance(model: &PowerModel, n_v: usize) -> f64 {
    match model {
        PowerModel::HammingWeight | PowerModel::HdSoftware { .. } | PowerModel::HdHardware => {
            n_v as f64 / 4.0
        }
    }
}

/// Noise level derived from a target SNR `gamma = var(l) / var(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// `None` for noiseless simulation (infinite SNR).
    gamma: Option<f64>,
    sigma_l_sq: f64,
    sigma_n: f64,
}

impl NoiseSpec {
    pub fn calibrate(gamma: f64, sigma_l_sq: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::domain(format!("SNR must be positive and finite, got {gamma}")));
        }
        if sigma_l_sq.is_nan() || sigma_l_sq < 0.0 {
            return Err(Error::domain(format!("leakage variance {sigma_l_sq} is negative or NaN")));
        }
        Ok(NoiseSpec {
            gamma: Some(gamma),
            sigma_l_sq,
            sigma_n: (sigma_l_sq / gamma).sqrt(),
        })
    }

    pub fn noiseless(sigma_l_sq: f64) -> Self {
        NoiseSpec {
            gamma: None,
            sigma_l_sq,
            sigma_n: 0.0,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(f64::INFINITY)
    }

    pub fn sigma_l_sq(&self) -> f64 {
        self.sigma_l_sq
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }
}

/// Simulated measurements: one feature per (trace, round, lane), stored
/// trace-major, plus the known plaintext of every trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSet {
    pub(crate) cipher: CipherSpec,
    pub(crate) model: PowerModel,
    pub(crate) noise: NoiseSpec,
    pub(crate) seed: u64,
    pub(crate) oversampling: Option<usize>,
    pub(crate) features: Vec<f64>,
    pub(crate) plaintexts: Vec<BitVec>,
}

impl TraceSet {
    pub fn new(
        cipher: CipherSpec,
        model: PowerModel,
        noise: NoiseSpec,
        seed: u64,
        oversampling: Option<usize>,
        features: Vec<f64>,
        plaintexts: Vec<BitVec>,
    ) -> Result<Self> {
        model.validate(cipher.sbox_width())?;
        let expected = plaintexts.len() * cipher.rounds() * cipher.lanes();
        ensure_len("feature array", features.len(), expected)?;
        for p in &plaintexts {
            ensure_len("plaintext", p.len(), cipher.block_bits())?;
        }
        Ok(TraceSet {
            cipher,
            model,
            noise,
            seed,
            oversampling,
            features,
            plaintexts,
        })
    }

    pub fn cipher(&self) -> &CipherSpec {
        &self.cipher
    }

    pub fn model(&self) -> &PowerModel {
        &self.model
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn oversampling(&self) -> Option<usize> {
        self.oversampling
    }

    pub fn n_traces(&self) -> usize {
        self.plaintexts.len()
    }

    pub fn rounds(&self) -> usize {
        self.cipher.rounds()
    }

    pub fn lanes(&self) -> usize {
        self.cipher.lanes()
    }

    pub fn plaintexts(&self) -> &[BitVec] {
        &self.plaintexts
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Feature of `trace` at 1-based `round` and lane `lane`.
    pub fn feature(&self, trace: usize, round: usize, lane: usize) -> f64 {
        self.features[self.index(trace, round, lane)]
    }

    /// All traces' features at one point of interest.
    pub fn lane_features(&self, round: usize, lane: usize) -> Vec<f64> {
        (0..self.n_traces()).map(|t| self.feature(t, round, lane)).collect()
    }

    fn index(&self, trace: usize, round: usize, lane: usize) -> usize {
        debug_assert!(round >= 1 && round <= self.rounds() && lane < self.lanes());
        (trace * self.rounds() + round - 1) * self.lanes() + lane
    }
}

/// Samples of one target clock cycle in an oversampled measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct OversampledWindow(Vec<f64>);

impl OversampledWindow {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("oversampled window needs at least one sample"));
        }
        Ok(OversampledWindow(samples))
    }

    pub fn samples(&self) -> &[f64] {
        &self.0
    }
}

/// Received energy over the window: the sum of squared samples.
pub fn extract_feature(window: &OversampledWindow) -> f64 {
    window.0.iter().map(|y| y * y).sum()
}

/// Simulates one amplitude feature per (trace, round, lane).
pub fn simulate_traces(
    key: &ExpandedKey,
    plaintexts: &[BitVec],
    model: &PowerModel,
    noise: &NoiseSpec,
    spec: &CipherSpec,
    seed: u64,
) -> Result<TraceSet> {
    simulate(key, plaintexts, model, noise, spec, seed, None)
}

/// Like [`simulate_traces`], but every point is measured as `n_s` noisy
/// samples `l + n` and reduced with [`extract_feature`].
pub fn simulate_traces_oversampled(
    key: &ExpandedKey,
    plaintexts: &[BitVec],
    model: &PowerModel,
    noise: &NoiseSpec,
    spec: &CipherSpec,
    seed: u64,
    n_s: usize,
) -> Result<TraceSet> {
    if n_s == 0 {
        return Err(Error::config("oversampling factor must be at least 1"));
    }
    simulate(key, plaintexts, model, noise, spec, seed, Some(n_s))
}

fn simulate(
    key: &ExpandedKey,
    plaintexts: &[BitVec],
    model: &PowerModel,
    noise: &NoiseSpec,
    spec: &CipherSpec,
    seed: u64,
    oversampling: Option<usize>,
) -> Result<TraceSet> {
    key.validate(spec)?;
    model.validate(spec.sbox_width())?;
    for p in plaintexts {
        ensure_len("plaintext", p.len(), spec.block_bits())?;
    }
    let reference = match model {
        PowerModel::HdSoftware { reference } => reference.to_uint() as u8,
        _ => 0,
    };
    let sigma_n = noise.sigma_n();
    let normal = Normal::new(0.0, sigma_n)
        .map_err(|e| Error::domain(format!("noise standard deviation {sigma_n}: {e}")))?;

    let one_trace = |(t, pt): (usize, &BitVec)| -> Vec<f64> {
        let mut rng = rng::stream(seed, Domain::Noise, t as u64);
        let mut out = Vec::with_capacity(spec.rounds() * spec.lanes());
        let mut prev = vec![0u8; spec.lanes()];
        let mut state = pt.clone();
        for rk in key.rounds() {
            let outputs = spec.sbox_outputs(&state, rk);
            for (j, &v) in outputs.iter().enumerate() {
                let l = model.leak_lane(v, prev[j], reference);
                let f = match oversampling {
                    None if sigma_n > 0.0 => l + normal.sample(&mut rng),
                    None => l,
                    Some(n_s) => {
                        let samples = (0..n_s)
                            .map(|_| if sigma_n > 0.0 { l + normal.sample(&mut rng) } else { l })
                            .collect();
                        extract_feature(&OversampledWindow(samples))
                    }
                };
                out.push(f);
            }
            prev = outputs;
            state = round_encrypt(&state, rk, spec).expect("lengths validated");
        }
        out
    };

    #[cfg(feature = "parallel")]
    let per_trace: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        plaintexts.par_iter().enumerate().map(one_trace).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_trace: Vec<Vec<f64>> = plaintexts.iter().enumerate().map(one_trace).collect();

    TraceSet::new(
        spec.clone(),
        model.clone(),
        *noise,
        seed,
        oversampling,
        per_trace.concat(),
        plaintexts.to_vec(),
    )
}

/// `n` uniformly random plaintexts drawn from the seed.
pub fn random_plaintexts(spec: &CipherSpec, n: usize, seed: u64) -> Vec<BitVec> {
    let mut rng = rng::stream(seed, Domain::Plaintext, 0);
    (0..n)
        .map(|_| crate::cipher::random_bits(&mut rng, spec.block_bits()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::random_expanded_key;

    fn ones(n: usize) -> BitVec {
        BitVec::from_signs(vec![1; n]).unwrap()
    }

    fn zeros(n: usize) -> BitVec {
        BitVec::from_signs(vec![-1; n]).unwrap()
    }

    #[test]
    fn hamming_weight_examples() {
        assert_eq!(leak_hw(&ones(8)), 8.0);
        assert_eq!(leak_hw(&zeros(8)), 0.0);
        let alt = BitVec::from_signs((0..8).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect()).unwrap();
        assert_eq!(leak_hw(&alt), 4.0);
    }

    #[test]
    fn hamming_distance_examples() {
        let v = BitVec::from_uint(0xb6, 8).unwrap();
        assert_eq!(leak_hd_software(&v, &v).unwrap(), 0.0);
        assert_eq!(leak_hd_software(&v, &zeros(8)).unwrap(), leak_hw(&v));
        assert_eq!(leak_hd_software(&v, &v.complement()).unwrap(), 8.0);
        assert!(leak_hd_software(&v, &zeros(4)).is_err());

        let w = BitVec::from_uint(0x1f, 8).unwrap();
        assert_eq!(leak_hd_hardware(&v, &v).unwrap(), 0.0);
        assert_eq!(leak_hd_hardware(&v, &zeros(8)).unwrap(), leak_hw(&v));
        assert_eq!(leak_hd_hardware(&v, &w).unwrap(), leak_hd_hardware(&w, &v).unwrap());
    }

    fn brute_force_variance(width: usize, f: impl Fn(&BitVec) -> f64) -> f64 {
        let vals: Vec<f64> = (0..1u64 << width)
            .map(|x| f(&BitVec::from_uint(x, width).unwrap()))
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64
    }

    #[test]
    fn variance_matches_enumeration() {
        assert_eq!(brute_force_variance(8, leak_hw), 2.0);
        assert_eq!(leakage_variance(&PowerModel::HammingWeight, 8), 2.0);
        assert_eq!(brute_force_variance(4, leak_hw), 1.0);
        assert_eq!(leakage_variance(&PowerModel::HammingWeight, 4), 1.0);
        let r = BitVec::from_uint(0x5c, 8).unwrap();
        let hd = brute_force_variance(8, |v| leak_hd_software(v, &r).unwrap());
        assert_eq!(hd, 2.0);
        assert_eq!(leakage_variance(&PowerModel::HdSoftware { reference: r }, 8), 2.0);
    }

    #[test]
    fn calibration() {
        let n = NoiseSpec::calibrate(1.0, 2.0).unwrap();
        assert!((n.sigma_n() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(NoiseSpec::calibrate(0.5, 2.0).unwrap().sigma_n(), 2.0);
        assert!(NoiseSpec::calibrate(1e12, 2.0).unwrap().sigma_n() < 1e-5);
        assert!(NoiseSpec::calibrate(0.0, 2.0).is_err());
        assert!(NoiseSpec::calibrate(-1.0, 2.0).is_err());
    }

    #[test]
    fn feature_extraction() {
        let w = |s: Vec<f64>| extract_feature(&OversampledWindow::new(s).unwrap());
        assert_eq!(w(vec![2.0; 4]), 16.0);
        assert_eq!(w(vec![0.0; 7]), 0.0);
        assert_eq!(w(vec![3.0, -4.0]), 25.0);
        assert_eq!(w(vec![-3.0, 4.0]), 25.0);
        assert!(OversampledWindow::new(vec![]).is_err());
    }

    #[test]
    fn noiseless_features_are_exact_weights() {
        let spec = CipherSpec::desk(16, 3).unwrap();
        let key = random_expanded_key(&spec, 3);
        let pts = random_plaintexts(&spec, 20, 3);
        let ts = simulate_traces(&key, &pts, &PowerModel::HammingWeight, &NoiseSpec::noiseless(1.0), &spec, 9)
            .unwrap();
        for (t, pt) in pts.iter().enumerate() {
            let mut state = pt.clone();
            for r in 1..=3 {
                let outs = spec.sbox_outputs(&state, key.round(r));
                for (j, v) in outs.iter().enumerate() {
                    assert_eq!(ts.feature(t, r, j), f64::from(v.count_ones()));
                }
                state = round_encrypt(&state, key.round(r), &spec).unwrap();
            }
        }
    }

    #[test]
    fn hd_hardware_first_round_is_weight() {
        let spec = CipherSpec::desk(8, 2).unwrap();
        let key = random_expanded_key(&spec, 5);
        let pts = random_plaintexts(&spec, 10, 5);
        let noiseless = NoiseSpec::noiseless(1.0);
        let hw = simulate_traces(&key, &pts, &PowerModel::HammingWeight, &noiseless, &spec, 1).unwrap();
        let hd = simulate_traces(&key, &pts, &PowerModel::HdHardware, &noiseless, &spec, 1).unwrap();
        for t in 0..10 {
            for j in 0..2 {
                assert_eq!(hw.feature(t, 1, j), hd.feature(t, 1, j));
            }
        }
    }

    #[test]
    fn model_mismatch_is_config_error() {
        let spec = CipherSpec::desk(8, 2).unwrap();
        let key = random_expanded_key(&spec, 5);
        let pts = random_plaintexts(&spec, 4, 5);
        let model = PowerModel::HdSoftware {
            reference: BitVec::from_uint(0, 8).unwrap(),
        };
        let err = simulate_traces(&key, &pts, &model, &NoiseSpec::noiseless(1.0), &spec, 1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn oversampled_noiseless_feature_is_scaled_square() {
        let spec = CipherSpec::desk(8, 1).unwrap();
        let key = random_expanded_key(&spec, 2);
        let pts = random_plaintexts(&spec, 8, 2);
        let noiseless = NoiseSpec::noiseless(1.0);
        let amp = simulate_traces(&key, &pts, &PowerModel::HammingWeight, &noiseless, &spec, 1).unwrap();
        let over =
            simulate_traces_oversampled(&key, &pts, &PowerModel::HammingWeight, &noiseless, &spec, 1, 4).unwrap();
        for (a, o) in amp.features().iter().zip(over.features()) {
            assert_eq!(*o, 4.0 * a * a);
        }
    }
}
