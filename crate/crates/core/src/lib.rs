//! Multi-round side-channel key recovery with soft information.
//!
//! Simulated Hamming-weight leakage of a substitution-permutation network is
//! turned into per-key-bit log-likelihood ratios, and the expanded key is
//! recovered by an M-algorithm tree search over round keys whose path metric
//! is the key-bit sequence log-likelihood.
//!
//! - [`cipher`]: the SPN, its selection function and round-data derivation.
//! - [`leakage`]: power models, noise calibration, trace simulation.
//! - [`inference`]: subkey likelihoods and key-bit LLRs.
//! - [`search`]: candidate generation, path metrics, the attack loop and its
//!   complexity model.
//! - [`harness`]: configuration, persistence and experiment commands.

pub mod bits;
pub mod cipher;
pub mod error;
pub mod harness;
pub mod inference;
pub mod leakage;
pub mod rng;
pub mod search;

pub use bits::BitVec;
pub use cipher::{CipherSpec, ExpandedKey, RoundKey, SBox, Subkey};
pub use error::{Error, Result};
pub use inference::{LlrMode, LlrVector, SigmaSource};
pub use leakage::{NoiseSpec, PowerModel, TraceSet};
pub use search::{AttackOptions, AttackResult, NoiseEstimate, PathCandidate, SearchParams};
