// Copyright 2026 The colocate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Randomization test: exceedance counting, p-values and early elimination.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{prune_zero_prevalence, Candidate, CandidateSet, CompiledCandidate};
use crate::geom::{GridSpec, SpatialObject};
use crate::measures::{FeatureIndex, Measure};
use crate::nullmodels::{generate_null_with, NullModelSpec};
use crate::transact::{feature_table, transactionize, BufferParams, TransactionSet};
use crate::uncertainty::UncertaintyModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Patterns,
    #[default]
    Rules,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Patterns => "patterns",
            Mode::Rules => "rules",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "patterns" | "pattern" => Ok(Mode::Patterns),
            "rules" | "rule" => Ok(Mode::Rules),
            _ => Err(Error::validation(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceConfig {
    /// Number of randomized datasets.
    pub runs: usize,
    pub alpha: f64,
    pub mode: Mode,
    pub measure: Measure,
    pub master_seed: u64,
    pub filter2: bool,
    pub min_prevalence: f64,
}

impl Default for SignificanceConfig {
    fn default() -> Self {
        SignificanceConfig {
            runs: 99,
            alpha: 0.05,
            mode: Mode::Rules,
            measure: Measure::Expected,
            master_seed: 0,
            filter2: true,
            min_prevalence: 0.0,
        }
    }
}

impl SignificanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::validation("number of runs must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::validation(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.min_prevalence.is_finite() && self.min_prevalence >= 0.0) {
            return Err(Error::validation("minimum prevalence must be >= 0"));
        }
        Ok(())
    }
}

/// `(count_ge + 1) / (runs + 1)`: the observed dataset is counted on both
/// sides.
pub fn p_value(count_ge: usize, runs: usize) -> f64 {
    (count_ge + 1) as f64 / (runs + 1) as f64
}

pub fn is_significant(p: f64, alpha: f64) -> bool {
    p <= alpha
}

/// Seed of randomized run `run` (1-based), independent of execution order.
pub fn run_seed(master_seed: u64, run: usize) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = master_seed ^ (run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateState {
    pub candidate: Candidate,
    pub observed: f64,
    /// Randomized runs whose prevalence reached the observed one.
    pub exceedances: usize,
    pub alive: bool,
    /// Run after which Filter 2 dropped the candidate.
    pub eliminated_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificantItem {
    pub label: String,
    pub candidate: Candidate,
    /// Expected support (or support) of the full feature set.
    pub expsup: f64,
    /// Expected confidence (or confidence); rules only.
    pub expconf: Option<f64>,
    pub exceedances: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningReport {
    pub config: SignificanceConfig,
    pub fingerprint: String,
    pub transactions: usize,
    pub candidates: usize,
    pub after_filter1: usize,
    pub eliminated_by_filter2: usize,
    pub significant: Vec<SignificantItem>,
    /// Candidates still alive after each run.
    pub survivors_per_run: Vec<usize>,
    /// Wall-clock seconds per run. Kept out of the serialized report so that
    /// reports stay byte-identical across machines and worker counts.
    #[serde(skip)]
    pub run_seconds: Vec<f64>,
}

/// Runs the randomization loop over already-filtered candidates.
///
/// `sample(run, rng)` must return the transaction set of randomized run
/// `run` built with the same feature table as `observed`. Runs execute in
/// parallel batches on the current rayon pool and are merged in run order,
/// so the outcome does not depend on the number of workers.
pub fn evaluate<F>(
    cands: &CandidateSet,
    observed: &TransactionSet,
    cfg: &SignificanceConfig,
    sample: F,
) -> Result<(Vec<CandidateState>, Vec<usize>, Vec<f64>)>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<TransactionSet> + Sync,
{
    cfg.validate()?;
    let compiled: Vec<CompiledCandidate> = cands.items.iter().map(|c| CompiledCandidate::new(c, observed)).collect();
    let mut states: Vec<CandidateState> = cands
        .items
        .iter()
        .zip(&cands.observed)
        .map(|(c, o)| CandidateState {
            candidate: c.clone(),
            observed: o.unwrap_or(0.0),
            exceedances: 0,
            alive: true,
            eliminated_at: None,
        })
        .collect();

    let mut survivors = Vec::with_capacity(cfg.runs);
    let mut seconds = vec![0.0; cfg.runs];
    let batch = (rayon::current_num_threads() * 2).max(1);
    let mut next = 1;
    while next <= cfg.runs {
        let runs: Vec<usize> = (next..=(next + batch - 1).min(cfg.runs)).collect();
        let alive: Vec<usize> = (0..states.len()).filter(|&i| states[i].alive).collect();
        let results: Vec<(Vec<f64>, f64)> = runs
            .par_iter()
            .map(|&run| {
                let start = Instant::now();
                let mut rng = ChaCha8Rng::seed_from_u64(run_seed(cfg.master_seed, run));
                let ts = sample(run, &mut rng)?;
                if ts.features != observed.features {
                    return Err(Error::validation("randomized run uses a different feature table"));
                }
                let index = FeatureIndex::new(&ts);
                let values =
                    alive.iter().map(|&i| compiled[i].prevalence(&index, cfg.measure).unwrap_or(0.0)).collect();
                Ok((values, start.elapsed().as_secs_f64()))
            })
            .collect::<Result<_>>()?;

        for (&run, (values, secs)) in runs.iter().zip(results) {
            seconds[run - 1] = secs;
            for (&i, v) in alive.iter().zip(values) {
                let s = &mut states[i];
                if !s.alive {
                    continue;
                }
                if v >= s.observed {
                    s.exceedances += 1;
                }
                if cfg.filter2 && p_value(s.exceedances, cfg.runs) > cfg.alpha {
                    s.alive = false;
                    s.eliminated_at = Some(run);
                }
            }
            survivors.push(states.iter().filter(|s| s.alive).count());
        }
        next += runs.len();
    }
    Ok((states, survivors, seconds))
}

/// Scores and tests `cands` against randomized transaction sets from
/// `sample`, assembling the report.
pub fn mine_transactions<F>(
    observed: &TransactionSet,
    cands: CandidateSet,
    cfg: &SignificanceConfig,
    sample: F,
) -> Result<MiningReport>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<TransactionSet> + Sync,
{
    cfg.validate()?;
    let total = cands.len();
    let kept = prune_zero_prevalence(cands, observed, cfg.measure, cfg.min_prevalence);
    let (states, survivors_per_run, run_seconds) = evaluate(&kept, observed, cfg, sample)?;

    let index = FeatureIndex::new(observed);
    let eliminated = states.iter().filter(|s| s.eliminated_at.is_some()).count();
    let significant = states
        .into_iter()
        .filter_map(|s| {
            let p = p_value(s.exceedances, cfg.runs);
            if !is_significant(p, cfg.alpha) {
                return None;
            }
            let joint = CompiledCandidate::new(&Candidate::Pattern { pattern: s.candidate.joint() }, observed);
            let expsup = joint.prevalence(&index, cfg.measure).unwrap_or(0.0);
            let expconf = matches!(s.candidate, Candidate::Rule { .. }).then_some(s.observed);
            Some(SignificantItem {
                label: s.candidate.to_string(),
                candidate: s.candidate,
                expsup,
                expconf,
                exceedances: s.exceedances,
                p_value: p,
            })
        })
        .collect();

    Ok(MiningReport {
        config: cfg.clone(),
        fingerprint: observed.fingerprint.clone(),
        transactions: observed.len(),
        candidates: total,
        after_filter1: kept.len(),
        eliminated_by_filter2: eliminated,
        significant,
        survivors_per_run,
        run_seconds,
    })
}

/// Everything needed to mine one spatial dataset.
#[derive(Debug, Clone)]
pub struct MiningProblem {
    pub dataset: Vec<SpatialObject>,
    pub grid: GridSpec,
    pub model: UncertaintyModel,
    pub params: BufferParams,
    pub null: NullModelSpec,
    pub candidates: CandidateSet,
}

impl MiningProblem {
    pub fn observed_transactions(&self) -> Result<TransactionSet> {
        transactionize(&self.dataset, &self.grid, &self.model, &self.params, feature_table(&self.dataset))
    }
}

/// Transactionizes the observed dataset, applies both filters and runs the
/// randomization test with null datasets drawn from `problem.null`.
pub fn mine_significant(problem: &MiningProblem, cfg: &SignificanceConfig) -> Result<MiningReport> {
    cfg.validate()?;
    problem.null.validate()?;
    for o in &problem.dataset {
        o.validate()?;
    }
    let observed = problem.observed_transactions()?;
    let features = observed.features.clone();
    mine_transactions(&observed, problem.candidates.clone(), cfg, |_, rng| {
        let null = generate_null_with(&problem.dataset, &problem.null, rng)?;
        transactionize(&null, &problem.grid, &problem.model, &problem.params, features.clone())
    })
}
