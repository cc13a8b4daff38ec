//! On-disk trace sets.
//!
//! A trace directory holds:
//!
//! - `header.json`: cipher geometry (including the bit permutation), power
//!   model, noise, seed, oversampling factor and the dimensions `n_traces`,
//!   `rounds`, `lanes`.
//! - `features.f64le`: `n_traces * rounds * lanes` IEEE-754 doubles, little
//!   endian, no padding. The value for trace `t`, round `r` (1-based) and lane
//!   `j` starts at byte `8 * ((t * rounds + r - 1) * lanes + j)`.
//! - `plaintexts.hex`: one plaintext per line, `\n` terminated, most
//!   significant bit first in lowercase hex (or `bin:` plus binary digits when
//!   the block size is not a multiple of 4).
//! - `truth.hex` (optional): the round keys in the same notation, round 1
//!   first, one per line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::AttackConfig;
use crate::bits::BitVec;
use crate::cipher::{CipherSpec, ExpandedKey, RoundKey};
use crate::error::{Error, Result};
use crate::leakage::{NoiseSpec, PowerModel, TraceSet};

pub const HEADER_FILE: &str = "header.json";
pub const FEATURES_FILE: &str = "features.f64le";
pub const PLAINTEXTS_FILE: &str = "plaintexts.hex";
pub const TRUTH_FILE: &str = "truth.hex";

const FORMAT: &str = "scadec-traces";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    cipher: CipherSpec,
    model: PowerModel,
    noise: NoiseSpec,
    seed: u64,
    oversampling: Option<usize>,
    n_traces: usize,
    rounds: usize,
    lanes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulateOutcome {
    pub dir: PathBuf,
    pub n_traces: usize,
    pub n_features: usize,
    pub truth: ExpandedKey,
}

/// Simulates the configured traces and writes them with their truth file.
pub fn cmd_simulate(config: &AttackConfig, dir: &Path) -> Result<SimulateOutcome> {
    let (traces, key) = config.simulate()?;
    save_traces(dir, &traces, Some(&key))?;
    Ok(SimulateOutcome {
        dir: dir.to_path_buf(),
        n_traces: traces.n_traces(),
        n_features: traces.features().len(),
        truth: key,
    })
}

pub fn save_traces(dir: &Path, traces: &TraceSet, truth: Option<&ExpandedKey>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = Header {
        format: FORMAT.to_string(),
        version: VERSION,
        cipher: traces.cipher().clone(),
        model: traces.model().clone(),
        noise: *traces.noise(),
        seed: traces.seed(),
        oversampling: traces.oversampling(),
        n_traces: traces.n_traces(),
        rounds: traces.rounds(),
        lanes: traces.lanes(),
    };
    let mut text = serde_json::to_string_pretty(&header).expect("header serializes");
    text.push('\n');
    write(&dir.join(HEADER_FILE), text.as_bytes())?;

    let bytes: Vec<u8> = traces.features().iter().flat_map(|f| f.to_le_bytes()).collect();
    write(&dir.join(FEATURES_FILE), &bytes)?;
    write(&dir.join(PLAINTEXTS_FILE), lines(traces.plaintexts().iter()).as_bytes())?;

    let truth_path = dir.join(TRUTH_FILE);
    match truth {
        Some(key) => write(&truth_path, lines(key.rounds().iter().map(RoundKey::bits)).as_bytes())?,
        None => {
            if truth_path.exists() {
                std::fs::remove_file(&truth_path).map_err(|e| Error::io(&truth_path, e))?;
            }
        }
    }
    Ok(())
}

/// Reads a trace directory and, when present, its truth file.
pub fn load_traces(dir: &Path) -> Result<(TraceSet, Option<ExpandedKey>)> {
    let header_path = dir.join(HEADER_FILE);
    let text = read_string(&header_path)?;
    let header: Header = serde_json::from_str(&text).map_err(|e| {
        Error::parse(&header_path, format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(Error::parse(
            &header_path,
            "field format",
            format!("unsupported format {:?} version {}", header.format, header.version),
        ));
    }
    let spec = &header.cipher;
    if header.rounds != spec.rounds() || header.lanes != spec.lanes() {
        return Err(Error::parse(
            &header_path,
            "field rounds/lanes",
            format!(
                "dimensions {}x{} disagree with the cipher ({}x{})",
                header.rounds,
                header.lanes,
                spec.rounds(),
                spec.lanes()
            ),
        ));
    }

    let features_path = dir.join(FEATURES_FILE);
    let features = read_features(&features_path, header.n_traces * header.rounds * header.lanes)?;

    let pt_path = dir.join(PLAINTEXTS_FILE);
    let plaintexts = read_bit_lines(&pt_path, spec.block_bits())?;
    if plaintexts.len() != header.n_traces {
        return Err(Error::parse(
            &pt_path,
            format!("line {}", plaintexts.len().min(header.n_traces) + 1),
            format!("expected {} plaintexts, found {}", header.n_traces, plaintexts.len()),
        ));
    }

    let truth_path = dir.join(TRUTH_FILE);
    let truth = if truth_path.exists() {
        let rounds = read_bit_lines(&truth_path, spec.block_bits())?;
        if rounds.len() != spec.rounds() {
            return Err(Error::parse(
                &truth_path,
                format!("line {}", rounds.len().min(spec.rounds()) + 1),
                format!("expected {} round keys, found {}", spec.rounds(), rounds.len()),
            ));
        }
        Some(ExpandedKey::new(rounds.into_iter().map(RoundKey::new).collect()))
    } else {
        None
    };

    let traces = TraceSet::new(
        header.cipher,
        header.model,
        header.noise,
        header.seed,
        header.oversampling,
        features,
        plaintexts,
    )
    .map_err(|e| Error::parse(&header_path, "contents", e.to_string()))?;
    Ok((traces, truth))
}

fn read_features(path: &Path, count: usize) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let want = count * 8;
    if bytes.len() != want {
        return Err(Error::parse(
            path,
            format!("byte offset {}", bytes.len().min(want) / 8 * 8),
            format!("expected {want} bytes ({count} doubles), found {}", bytes.len()),
        ));
    }
    bytes
        .chunks_exact(8)
        .enumerate()
        .map(|(i, c)| {
            let v = f64::from_le_bytes(c.try_into().expect("chunks of 8"));
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(path, format!("byte offset {}", i * 8), format!("non-finite value {v}")))
            }
        })
        .collect()
}

fn read_bit_lines(path: &Path, len: usize) -> Result<Vec<BitVec>> {
    let text = read_string(path)?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let v = BitVec::parse_text(line).map_err(|e| Error::parse(path, format!("line {}", i + 1), e.to_string()))?;
            if v.len() != len {
                return Err(Error::parse(
                    path,
                    format!("line {}", i + 1),
                    format!("{} bits, expected {len}", v.len()),
                ));
            }
            Ok(v)
        })
        .collect()
}

fn lines<'a>(values: impl Iterator<Item = &'a BitVec>) -> String {
    values.map(|v| v.to_text() + "\n").collect()
}

fn read_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
