use serde::{Deserialize, Serialize};

use super::csv_out::{opt, render};
use super::{fingerprint_of, json_tag, run_experiment, AttackConfig, ExperimentRecord};
use crate::error::{Error, Result};
use crate::search::{predicted_decrypts, predicted_visits, search_space_size};

/// Values swept per axis. Every list must be non-empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub gamma: Vec<f64>,
    pub n_traces: Vec<usize>,
    pub m_e: Vec<usize>,
    pub m_r: Vec<usize>,
    pub n_e: Vec<usize>,
    pub n_c: Vec<usize>,
}

/// A grid of experiments around a base configuration. The base seed is
/// ignored; row `i` uses `base_seed + i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: AttackConfig,
    pub grid: SweepGrid,
    pub repetitions: usize,
    pub base_seed: u64,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SweepConfig =
            serde_json::from_str(text).map_err(|e| Error::config(format!("sweep config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        let axes = [
            ("gamma", g.gamma.len()),
            ("n_traces", g.n_traces.len()),
            ("m_e", g.m_e.len()),
            ("m_r", g.m_r.len()),
            ("n_e", g.n_e.len()),
            ("n_c", g.n_c.len()),
        ];
        if let Some((name, _)) = axes.iter().find(|(_, n)| *n == 0) {
            return Err(Error::config(format!("sweep axis {name} is empty")));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions must be at least 1"));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_of(self)
    }

    /// Configurations in row order: axes nested gamma, n_traces, m_e, m_r,
    /// n_e, n_c (outermost first), repetitions innermost.
    pub fn rows(&self) -> Vec<(usize, usize, AttackConfig)> {
        let g = &self.grid;
        let mut out = Vec::new();
        let mut cell = 0;
        for &gamma in &g.gamma {
            for &n_traces in &g.n_traces {
                for &m_e in &g.m_e {
                    for &m_r in &g.m_r {
                        for &n_e in &g.n_e {
                            for &n_c in &g.n_c {
                                for rep in 0..self.repetitions {
                                    let mut c = self.base.clone();
                                    c.gamma = Some(gamma);
                                    c.n_traces = n_traces;
                                    c.params.m_e = m_e;
                                    c.params.m_r = m_r;
                                    c.params.n_e = n_e;
                                    c.params.n_c = n_c;
                                    c.seed = self.base_seed.wrapping_add(out.len() as u64);
                                    out.push((cell, rep, c));
                                }
                                cell += 1;
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub row: usize,
    pub cell: usize,
    pub rep: usize,
    pub config: AttackConfig,
    pub outcome: std::result::Result<ExperimentRecord, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub config: AttackConfig,
    pub runs: usize,
    pub errors: usize,
    pub successes: usize,
}

impl CellSummary {
    /// Successes over completed runs.
    pub fn success_rate(&self) -> Option<f64> {
        let done = self.runs - self.errors;
        (done > 0).then(|| self.successes as f64 / done as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub fingerprint: String,
    pub rows: Vec<SweepRow>,
}

const ROW_HEADER: [&str; 27] = [
    "row",
    "cell",
    "rep",
    "seed",
    "block_bits",
    "rounds",
    "sbox_width",
    "model",
    "gamma",
    "n_traces",
    "m_e",
    "m_r",
    "n_e",
    "n_c",
    "mode",
    "sigma",
    "status",
    "error",
    "success",
    "final_metric",
    "truth_ranks",
    "m_s",
    "visits",
    "decrypts",
    "visits_predicted",
    "decrypts_predicted",
    "runtime_s",
];

const SUMMARY_HEADER: [&str; 14] = [
    "cell",
    "gamma",
    "n_traces",
    "m_e",
    "m_r",
    "n_e",
    "n_c",
    "rounds",
    "block_bits",
    "runs",
    "errors",
    "successes",
    "success_rate",
    "mode",
];

impl SweepOutput {
    /// One line per (cell, repetition) in row order. Truth ranks are `;`
    /// separated per level with `-` for a pruned prefix.
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self.rows.iter().map(row_fields).collect();
        render(&self.fingerprint, &ROW_HEADER, &rows)
    }

    pub fn summary(&self) -> Vec<CellSummary> {
        let mut cells: Vec<CellSummary> = Vec::new();
        for r in &self.rows {
            if cells.last().map(|c| c.cell) != Some(r.cell) {
                let mut config = r.config.clone();
                config.seed = 0;
                cells.push(CellSummary {
                    cell: r.cell,
                    config,
                    runs: 0,
                    errors: 0,
                    successes: 0,
                });
            }
            let c = cells.last_mut().expect("pushed above");
            c.runs += 1;
            match &r.outcome {
                Ok(rec) => c.successes += usize::from(rec.success == Some(true)),
                Err(_) => c.errors += 1,
            }
        }
        cells
    }

    pub fn summary_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .summary()
            .iter()
            .map(|s| {
                let c = &s.config;
                vec![
                    s.cell.to_string(),
                    opt(c.gamma),
                    c.n_traces.to_string(),
                    c.params.m_e.to_string(),
                    c.params.m_r.to_string(),
                    c.params.n_e.to_string(),
                    c.params.n_c.to_string(),
                    c.cipher.rounds().to_string(),
                    c.cipher.block_bits().to_string(),
                    s.runs.to_string(),
                    s.errors.to_string(),
                    s.successes.to_string(),
                    opt(s.success_rate()),
                    json_tag(&c.mode),
                ]
            })
            .collect();
        render(&self.fingerprint, &SUMMARY_HEADER, &rows)
    }
}

fn row_fields(r: &SweepRow) -> Vec<String> {
    let c = &r.config;
    let p = &c.params;
    let rounds = c.cipher.rounds() as u64;
    let m_s = search_space_size(c.cipher.block_bits(), p.n_e, p.n_c).ok();
    let visits_pred = m_s.and_then(|m| predicted_visits(m, p.m_r as u64, rounds).ok());
    let decrypts_pred = predicted_decrypts(p.m_r as u64, rounds).ok();
    let mut f = vec![
        r.row.to_string(),
        r.cell.to_string(),
        r.rep.to_string(),
        c.seed.to_string(),
        c.cipher.block_bits().to_string(),
        c.cipher.rounds().to_string(),
        c.cipher.sbox_width().to_string(),
        json_tag(&c.model),
        opt(c.gamma),
        c.n_traces.to_string(),
        p.m_e.to_string(),
        p.m_r.to_string(),
        p.n_e.to_string(),
        p.n_c.to_string(),
        json_tag(&c.mode),
        json_tag(&c.sigma),
    ];
    match &r.outcome {
        Ok(rec) => {
            let ranks = rec
                .rank_of_truth
                .as_ref()
                .map(|v| {
                    v.iter()
                        .map(|x| x.map_or("-".to_string(), |n| n.to_string()))
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .unwrap_or_default();
            f.extend([
                "ok".to_string(),
                String::new(),
                opt(rec.success.map(u8::from)),
                rec.final_metric.to_string(),
                ranks,
                rec.report.m_s.to_string(),
                rec.report.visits_measured.to_string(),
                rec.report.decrypts_measured.to_string(),
            ]);
        }
        Err(msg) => f.extend([
            "error".to_string(),
            msg.clone(),
            String::new(),
            String::new(),
            String::new(),
            opt(m_s),
            String::new(),
            String::new(),
        ]),
    }
    f.extend([
        opt(visits_pred),
        opt(decrypts_pred),
        opt(r.outcome.as_ref().ok().and_then(|rec| rec.wall_time_s)),
    ]);
    f
}

/// Runs every row of the grid. A failing row is recorded and the sweep
/// continues; rows are returned in grid order regardless of scheduling.
pub fn cmd_sweep(config: &SweepConfig, timing: bool) -> Result<SweepOutput> {
    config.validate()?;
    let rows = config.rows();
    let run = |(i, (cell, rep, c)): (usize, (usize, usize, AttackConfig))| SweepRow {
        row: i,
        cell,
        rep,
        outcome: run_experiment(&c, timing).map(|o| o.record).map_err(|e| e.to_string()),
        config: c,
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<SweepRow> = {
        use rayon::prelude::*;
        rows.into_par_iter().enumerate().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<SweepRow> = rows.into_iter().enumerate().map(run).collect();
    Ok(SweepOutput {
        fingerprint: config.fingerprint(),
        rows,
    })
}
