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

//! End-to-end orchestration: load inputs, mine, write artifacts.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::candidates::{enumerate_patterns, enumerate_rules, CandidateSet};
use crate::geom::{BoundingBox, Equirectangular, GridSpec, Point2D, SpatialObject};
use crate::io;
use crate::measures::Measure;
use crate::nullmodels::{NullModelSpec, Strategy};
use crate::significance::{mine_significant, MiningProblem, MiningReport, Mode, SignificanceConfig};
use crate::transact::{feature_table, fingerprint, grid_for_dataset, suggested_spacing, BufferParams};
use crate::uncertainty::UncertaintyModel;
use crate::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "COLOCATE_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub input: PathBuf,
    pub stations: Option<PathBuf>,
    pub regions: Option<PathBuf>,
    /// Grid spacing; derived from buffer sizes when absent.
    pub spacing: Option<f64>,
    pub model: UncertaintyModel,
    pub mode: Mode,
    pub measure: Measure,
    pub runs: usize,
    pub alpha: f64,
    pub max_size: usize,
    pub consequent: Option<String>,
    /// Antecedent features; all non-consequent features when absent.
    pub causes: Option<Vec<String>>,
    pub master_seed: u64,
    pub min_prevalence: f64,
    pub filter2: bool,
    pub strategy: Strategy,
    pub study_region: Option<BoundingBox>,
    /// Inputs are longitude/latitude degrees and get projected to km.
    pub geographic: bool,
    pub gamma: f64,
    pub r_min: f64,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sig = SignificanceConfig::default();
        let buf = BufferParams::default();
        RunConfig {
            input: PathBuf::new(),
            stations: None,
            regions: None,
            spacing: None,
            model: UncertaintyModel::default(),
            mode: sig.mode,
            measure: sig.measure,
            runs: sig.runs,
            alpha: sig.alpha,
            max_size: 3,
            consequent: None,
            causes: None,
            master_seed: sig.master_seed,
            min_prevalence: sig.min_prevalence,
            filter2: sig.filter2,
            strategy: Strategy::default(),
            study_region: None,
            geographic: false,
            gamma: buf.gamma,
            r_min: buf.r_min,
            threads: None,
            out_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn significance(&self) -> SignificanceConfig {
        SignificanceConfig {
            runs: self.runs,
            alpha: self.alpha,
            mode: self.mode,
            measure: self.measure,
            master_seed: self.master_seed,
            filter2: self.filter2,
            min_prevalence: self.min_prevalence,
        }
    }
}

/// Inputs needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: RunConfig,
    pub dataset_fingerprint: String,
    pub grid: GridSpec,
    pub features: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Worker count after applying the environment cap.
pub fn effective_threads(requested: Option<usize>) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    let n = requested.filter(|&n| n > 0).unwrap_or(available);
    cap.map_or(n, |c| n.min(c)).max(1)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::validation(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Loads inputs and builds the mining problem described by `cfg`.
pub fn prepare(cfg: &RunConfig) -> Result<MiningProblem> {
    let mut dataset = io::read_dataset(&cfg.input)?;
    let mut stations = match &cfg.stations {
        Some(p) => io::read_stations(p)?,
        None => Vec::new(),
    };
    let mut regions = match &cfg.regions {
        Some(p) => io::read_regions(p)?,
        None => Vec::new(),
    };
    let mut study = cfg.study_region;
    if cfg.geographic {
        let all: Vec<Point2D> = dataset.iter().flat_map(|o| o.shape.vertices().to_vec()).collect();
        let proj = Equirectangular::centred_on(&all);
        for o in &mut dataset {
            o.shape = o.shape.map_points(|p| proj.project(p));
        }
        for s in &mut stations {
            s.location = proj.project(&s.location);
        }
        for r in &mut regions {
            r.ring = r.ring.iter().map(|p| proj.project(p)).collect();
        }
        study = study.map(|b| {
            let lo = proj.project(&Point2D::new(b.min_x, b.min_y));
            let hi = proj.project(&Point2D::new(b.max_x, b.max_y));
            BoundingBox { min_x: lo.x, min_y: lo.y, max_x: hi.x, max_y: hi.y }
        });
    }
    build_problem(cfg, dataset, stations, regions, study)
}

/// As [`prepare`] but with inputs already in memory and in planar units.
pub fn build_problem(
    cfg: &RunConfig,
    dataset: Vec<SpatialObject>,
    stations: Vec<crate::windfield::WindStation>,
    regions: Vec<crate::nullmodels::PlacementRegion>,
    study: Option<BoundingBox>,
) -> Result<MiningProblem> {
    cfg.significance().validate()?;
    let params = BufferParams { gamma: cfg.gamma, r_min: cfg.r_min, stations, ..BufferParams::default() };
    let features = feature_table(&dataset);
    let candidates = candidates_for(cfg, &features)?;
    let spacing = match cfg.spacing {
        Some(s) => s,
        None => suggested_spacing(&dataset, &params)?,
    };
    let grid = grid_for_dataset(&dataset, spacing, &params, study.as_ref())?;
    let mut null = NullModelSpec::new(cfg.strategy).with_regions(regions);
    if let Some(y) = &cfg.consequent {
        null = null.with_cases([y.clone()]);
    }
    if let Some(b) = study {
        null = null.with_study_region(b);
    }
    Ok(MiningProblem { dataset, grid, model: cfg.model.clone(), params, null, candidates })
}

fn candidates_for(cfg: &RunConfig, features: &[String]) -> Result<CandidateSet> {
    match cfg.mode {
        Mode::Rules => {
            let y =
                cfg.consequent.as_deref().ok_or_else(|| Error::validation("rule mining needs a consequent feature"))?;
            if !features.iter().any(|f| f == y) {
                return Err(Error::validation(format!("consequent {y} does not occur in the dataset")));
            }
            let causes: BTreeSet<String> = match &cfg.causes {
                Some(c) => c.iter().cloned().collect(),
                None => features.iter().filter(|f| *f != y).cloned().collect(),
            };
            enumerate_rules(causes, y, cfg.max_size)
        }
        Mode::Patterns => enumerate_patterns(features.iter().cloned(), cfg.max_size),
    }
}

/// Mines the configured dataset and writes `report.json`, `report.csv`,
/// `survivors.csv`, `timings.csv` and `manifest.json` into `out_dir`.
pub fn run(cfg: &RunConfig) -> Result<MiningReport> {
    let threads = effective_threads(cfg.threads);
    let problem = prepare(cfg)?;
    let report = with_threads(threads, || mine_significant(&problem, &cfg.significance()))??;
    write_outputs(cfg, &problem, &report)?;
    Ok(report)
}

pub fn write_outputs(cfg: &RunConfig, problem: &MiningProblem, report: &MiningReport) -> Result<()> {
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    io::write_json(&dir.join("report.json"), report)?;
    io::write_report_csv(&dir.join("report.csv"), report)?;
    io::write_survivors_csv(&dir.join("survivors.csv"), report)?;
    io::write_timings_csv(&dir.join("timings.csv"), report)?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: cfg.clone(),
        dataset_fingerprint: fingerprint(&problem.dataset),
        grid: problem.grid,
        features: feature_table(&problem.dataset),
    };
    io::write_json(&dir.join("manifest.json"), &manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_cap() {
        // the only test touching the variable
        std::env::set_var(THREADS_ENV, "2");
        assert_eq!(effective_threads(Some(8)), 2);
        assert_eq!(effective_threads(Some(1)), 1);
        std::env::remove_var(THREADS_ENV);
        assert_eq!(effective_threads(Some(8)), 8);
    }

    #[test]
    fn rules_need_a_consequent() {
        let cfg = RunConfig::default();
        assert!(candidates_for(&cfg, &["A".into(), "B".into()]).is_err());
        let cfg = RunConfig { consequent: Some("B".into()), ..RunConfig::default() };
        assert_eq!(candidates_for(&cfg, &["A".into(), "B".into()]).unwrap().len(), 1);
        let cfg = RunConfig { consequent: Some("Z".into()), ..RunConfig::default() };
        assert!(candidates_for(&cfg, &["A".into()]).is_err());
    }
}
