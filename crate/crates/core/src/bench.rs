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

//! Experiment harnesses: distance vs. support, grid granularity and
//! runtime against the number of randomized runs.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::enumerate_rules;
use crate::geom::{BoundingBox, GridSpec};
use crate::measures::{expected_support, Pattern};
use crate::nullmodels::{gen_distance_pair, gen_synthetic_assoc, NullModelSpec, Strategy, SYNTH_EXTENT, SYNTH_RADIUS};
use crate::significance::{mine_significant, run_seed, MiningProblem, SignificanceConfig};
use crate::transact::{get_transactions, grid_for_dataset, BufferParams};
use crate::uncertainty::UncertaintyModel;
use crate::Result;

/// The synthetic study square.
pub fn synthetic_region() -> BoundingBox {
    BoundingBox { min_x: 0.0, min_y: 0.0, max_x: SYNTH_EXTENT, max_y: SYNTH_EXTENT }
}

/// Rules `C1..C7 -> D` (antecedents up to 3) on the synthetic association
/// dataset, with fully random null datasets over the study square.
pub fn synthetic_problem(seed: u64, spacing: f64, model: UncertaintyModel) -> Result<MiningProblem> {
    let dataset = gen_synthetic_assoc(seed);
    let region = synthetic_region();
    let params = BufferParams::default();
    let grid = grid_for_dataset(&dataset, spacing, &params, Some(&region))?;
    let causes = (1..=7).map(|i| format!("C{i}"));
    Ok(MiningProblem {
        dataset,
        grid,
        model,
        params,
        null: NullModelSpec::new(Strategy::FullyRandom).with_study_region(region),
        candidates: enumerate_rules(causes, "D", 3)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub lo: f64,
    pub hi: f64,
    pub mean_expsup: f64,
}

/// Mean ExpSup of `f1+f2` over `datasets` distance-pair datasets for each
/// of `ranges` equal sub-intervals of `[0, 2)`.
pub fn distance_bench(
    ranges: usize,
    datasets: usize,
    seed: u64,
    spacing: f64,
    model: &UncertaintyModel,
) -> Result<Vec<DistanceRow>> {
    let pad = SYNTH_RADIUS + 2.0 * SYNTH_RADIUS;
    let grid = GridSpec::new(-pad, -pad, SYNTH_EXTENT + pad, SYNTH_EXTENT + pad, spacing)?;
    let pattern = Pattern::new(["f1", "f2"])?;
    let width = 2.0 * SYNTH_RADIUS / ranges as f64;
    (0..ranges)
        .map(|r| {
            let (lo, hi) = (r as f64 * width, (r + 1) as f64 * width);
            let total: f64 = (0..datasets)
                .into_par_iter()
                .map(|k| {
                    let d = gen_distance_pair(lo, hi, run_seed(seed, k + 1))?;
                    let ts = get_transactions(&d, &grid, model, &BufferParams::default())?;
                    Ok(expected_support(&pattern, &ts))
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .sum();
            Ok(DistanceRow { lo, hi, mean_expsup: total / datasets.max(1) as f64 })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularityRow {
    pub spacing: f64,
    pub grid_points: usize,
    pub transactions: usize,
    pub after_filter1: usize,
    pub significant: usize,
    pub seconds: f64,
}

/// Mines `problem` once per spacing, regridding the dataset each time.
pub fn granularity_bench(
    problem: &MiningProblem,
    cfg: &SignificanceConfig,
    spacings: &[f64],
    region: Option<&BoundingBox>,
) -> Result<Vec<GranularityRow>> {
    spacings
        .iter()
        .map(|&s| {
            let grid = grid_for_dataset(&problem.dataset, s, &problem.params, region)?;
            let p = MiningProblem { grid, ..problem.clone() };
            let start = Instant::now();
            let report = mine_significant(&p, cfg)?;
            Ok(GranularityRow {
                spacing: s,
                grid_points: grid.len(),
                transactions: report.transactions,
                after_filter1: report.after_filter1,
                significant: report.significant.len(),
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRow {
    pub runs: usize,
    pub seconds: f64,
}

/// Wall time of a full mining pass for each run count; the minimum over
/// `repeats` repetitions is reported.
pub fn runtime_bench(
    problem: &MiningProblem,
    cfg: &SignificanceConfig,
    runs: &[usize],
    repeats: usize,
) -> Result<Vec<RuntimeRow>> {
    runs.iter()
        .map(|&r| {
            let c = SignificanceConfig { runs: r, ..cfg.clone() };
            let mut best = f64::INFINITY;
            for _ in 0..repeats.max(1) {
                let start = Instant::now();
                mine_significant(problem, &c)?;
                best = best.min(start.elapsed().as_secs_f64());
            }
            Ok(RuntimeRow { runs: r, seconds: best })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit { slope, intercept: my - slope * mx, r_squared }
}
