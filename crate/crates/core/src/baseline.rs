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

//! Naive comparison miner: keep candidates whose prevalence reaches the mean
//! prevalence of all candidates, then optionally test them for significance.

use serde::{Deserialize, Serialize};

use crate::candidates::{CandidateSet, CompiledCandidate};
use crate::measures::{FeatureIndex, Measure};
use crate::significance::{mine_significant, MiningProblem, MiningReport, SignificanceConfig};
use crate::Result;

const MEAN_RTOL: f64 = 1e-12;

/// Indices of `values` at or above their arithmetic mean, and the mean.
/// Ties with the mean (up to rounding) are retained.
pub fn mean_threshold(values: &[f64]) -> (f64, Vec<usize>) {
    if values.is_empty() {
        return (0.0, Vec::new());
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let cut = mean - MEAN_RTOL * mean.abs();
    let keep = (0..values.len()).filter(|&i| values[i] >= cut).collect();
    (mean, keep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalentItem {
    pub label: String,
    pub prevalence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub threshold: f64,
    pub candidates: usize,
    pub prevalent: Vec<PrevalentItem>,
    /// Significance test over the prevalent candidates, when requested.
    pub significance: Option<MiningReport>,
}

/// Splits `cands` into those at or above the mean prevalence on the observed
/// data. Undefined confidences count as 0 towards the mean.
pub fn prune_below_mean(
    cands: &CandidateSet,
    problem: &MiningProblem,
    measure: Measure,
) -> Result<(f64, CandidateSet)> {
    let ts = problem.observed_transactions()?;
    let index = FeatureIndex::new(&ts);
    let values: Vec<f64> =
        cands.items.iter().map(|c| CompiledCandidate::new(c, &ts).prevalence(&index, measure).unwrap_or(0.0)).collect();
    let (mean, keep) = mean_threshold(&values);
    let mut kept = CandidateSet::new(keep.iter().map(|&i| cands.items[i].clone()).collect(), cands.max_size);
    kept.observed = keep.iter().map(|&i| Some(values[i])).collect();
    Ok((mean, kept))
}

pub fn run_baseline(problem: &MiningProblem, cfg: &SignificanceConfig, test: bool) -> Result<BaselineReport> {
    cfg.validate()?;
    let (threshold, kept) = prune_below_mean(&problem.candidates, problem, cfg.measure)?;
    let prevalent = kept
        .items
        .iter()
        .zip(&kept.observed)
        .map(|(c, v)| PrevalentItem { label: c.to_string(), prevalence: v.unwrap_or(0.0) })
        .collect();
    let significance = if test {
        let sub = MiningProblem { candidates: CandidateSet::new(kept.items, kept.max_size), ..problem.clone() };
        Some(mine_significant(&sub, cfg)?)
    } else {
        None
    };
    Ok(BaselineReport { threshold, candidates: problem.candidates.len(), prevalent, significance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_examples() {
        let (m, keep) = mean_threshold(&[0.2, 0.4, 0.6]);
        assert!((m - 0.4).abs() < 1e-15);
        assert_eq!(keep, [1, 2]);
        assert_eq!(mean_threshold(&[0.37]).1, [0]);
        assert!(mean_threshold(&[]).1.is_empty());
        assert_eq!(mean_threshold(&[0.1, 0.1, 0.1]).1, [0, 1, 2]);
        assert_eq!(mean_threshold(&[0.0, 0.0, 3.0]).1, [2]);
    }
}
