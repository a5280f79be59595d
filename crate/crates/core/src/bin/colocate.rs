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

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use colocate::baseline::run_baseline;
use colocate::bench::{self, linear_fit};
use colocate::geom::{BoundingBox, Equirectangular};
use colocate::io;
use colocate::measures::Measure;
use colocate::nullmodels::{gen_distance_pair, gen_synthetic_assoc, Strategy};
use colocate::pipeline::{self, effective_threads, with_threads, Manifest, RunConfig};
use colocate::significance::{MiningProblem, Mode};
use colocate::transact::{get_transactions, grid_for_dataset, suggested_spacing, BufferParams};
use colocate::uncertainty::UncertaintyModel;

#[derive(Parser)]
#[command(name = "colocate", version, about = "Significant spatial co-location mining on uncertain data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine significant co-location rules or patterns.
    Mine(MineArgs),
    /// Mean-prevalence baseline, optionally followed by the significance test.
    Baseline {
        #[command(flatten)]
        mine: MineArgs,
        /// Skip the significance stage.
        #[arg(long)]
        no_test: bool,
    },
    /// Generate synthetic datasets.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Experiment harnesses.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Dump the transactions of a dataset as `gx,gy,feature,probability`.
    Transactions {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Association benchmark (C1..C7, D).
    Assoc {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pairs of f1/f2 instances at a distance in [lo, hi).
    Pair {
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 0.2)]
        hi: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Mean expected support of f1+f2 per distance range.
    Distance {
        #[arg(long, default_value_t = 10)]
        ranges: usize,
        #[arg(long, default_value_t = 100)]
        datasets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        grid: f64,
        #[arg(long, default_value = "curve")]
        model: UncertaintyModel,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mining results and cost per grid spacing.
    Granularity {
        #[command(flatten)]
        bench: BenchArgs,
        /// Comma-separated spacings.
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25")]
        spacings: Vec<f64>,
    },
    /// Wall time against the number of randomized runs, with a linear fit.
    Runtime {
        #[command(flatten)]
        bench: BenchArgs,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
        runs: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset to use instead of the synthetic association benchmark.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    consequent: Option<String>,
    #[arg(long, default_value_t = 0.25)]
    grid: f64,
    #[arg(long = "R", default_value_t = 99)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Grid spacing; derived from buffer sizes when omitted.
    #[arg(long)]
    grid: Option<f64>,
    /// Uncertainty model: curve, linear, certain, categorical[:ub=p,...].
    #[arg(long, default_value = "curve")]
    model: UncertaintyModel,
    /// Wind station CSV.
    #[arg(long)]
    wind: Option<PathBuf>,
    /// Wind stretching coefficient.
    #[arg(long, default_value_t = 0.3)]
    gamma: f64,
    /// Minimum amount-based buffer radius.
    #[arg(long, default_value_t = 0.1)]
    r_min: f64,
    /// Treat coordinates as longitude/latitude degrees.
    #[arg(long)]
    geographic: bool,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long, required_unless_present = "manifest")]
    input: Option<PathBuf>,
    /// Re-run the configuration recorded in a manifest.
    #[arg(long, conflicts_with = "input")]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "rules")]
    mode: Mode,
    #[arg(long, default_value = "expected")]
    measure: Measure,
    /// Number of randomized datasets.
    #[arg(long = "R", default_value_t = 99)]
    runs: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Largest antecedent (rules) or pattern size.
    #[arg(long, alias = "max-size", default_value_t = 3)]
    max_antecedent: usize,
    #[arg(long)]
    consequent: Option<String>,
    /// Comma-separated antecedent features; defaults to all others.
    #[arg(long, value_delimiter = ',')]
    causes: Option<Vec<String>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    min_prevalence: f64,
    /// Disable early elimination during the randomization runs.
    #[arg(long)]
    no_filter2: bool,
    #[arg(long, default_value = "randomize_both")]
    strategy: Strategy,
    /// Placement region CSV for case randomization.
    #[arg(long)]
    regions: Option<PathBuf>,
    /// Study region `min_x,min_y,max_x,max_y`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    region: Option<Vec<f64>>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl MineArgs {
    fn config(&self) -> Result<RunConfig> {
        if let Some(m) = &self.manifest {
            let manifest = Manifest::read(m)?;
            return Ok(RunConfig { threads: self.threads, out_dir: self.out.clone(), ..manifest.config });
        }
        if self.max_antecedent > 3 {
            eprintln!("warning: size {} > 3; prevalences of large sets are usually tiny", self.max_antecedent);
        }
        Ok(RunConfig {
            input: self.input.clone().context("--input is required")?,
            stations: self.grid.wind.clone(),
            regions: self.regions.clone(),
            spacing: self.grid.grid,
            model: self.grid.model.clone(),
            mode: self.mode,
            measure: self.measure,
            runs: self.runs,
            alpha: self.alpha,
            max_size: self.max_antecedent,
            consequent: self.consequent.clone(),
            causes: self.causes.clone(),
            master_seed: self.seed,
            min_prevalence: self.min_prevalence,
            filter2: !self.no_filter2,
            strategy: self.strategy,
            study_region: self.region.as_deref().map(bbox).transpose()?,
            geographic: self.grid.geographic,
            gamma: self.grid.gamma,
            r_min: self.grid.r_min,
            threads: self.threads,
            out_dir: self.out.clone(),
        })
    }
}

fn bbox(v: &[f64]) -> Result<BoundingBox> {
    match *v {
        [min_x, min_y, max_x, max_y] if min_x <= max_x && min_y <= max_y => {
            Ok(BoundingBox { min_x, min_y, max_x, max_y })
        }
        _ => bail!("--region needs min_x,min_y,max_x,max_y with min <= max"),
    }
}

/// Opens `path`, or stdout when absent.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_rows(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    match path {
        Some(p) => io::write_table(p, header, rows)?,
        None => {
            let mut w = sink(None)?;
            writeln!(w, "{}", header.join(","))?;
            for r in rows {
                writeln!(w, "{}", r.join(","))?;
            }
        }
    }
    Ok(())
}

fn bench_problem(b: &BenchArgs) -> Result<(MiningProblem, RunConfig)> {
    let base = RunConfig { runs: b.runs, master_seed: b.seed, ..RunConfig::default() };
    match &b.input {
        None => {
            let p = bench::synthetic_problem(b.seed, b.grid, UncertaintyModel::Curve)?;
            Ok((p, RunConfig { consequent: Some("D".into()), ..base }))
        }
        Some(input) => {
            let cfg =
                RunConfig { input: input.clone(), spacing: Some(b.grid), consequent: b.consequent.clone(), ..base };
            Ok((pipeline::prepare(&cfg)?, cfg))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mine(args) => {
            let cfg = args.config()?;
            let report = pipeline::run(&cfg)?;
            eprintln!(
                "{} candidates, {} after filter 1, {} significant; outputs in {}",
                report.candidates,
                report.after_filter1,
                report.significant.len(),
                cfg.out_dir.display()
            );
        }
        Command::Baseline { mine, no_test } => {
            let cfg = mine.config()?;
            let problem = pipeline::prepare(&cfg)?;
            let sig = cfg.significance();
            let report = with_threads(effective_threads(cfg.threads), || run_baseline(&problem, &sig, !no_test))??;
            std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
            io::write_json(&cfg.out_dir.join("baseline.json"), &report)?;
            if let Some(r) = &report.significance {
                pipeline::write_outputs(&cfg, &problem, r)?;
            }
            let tested = report
                .significance
                .as_ref()
                .map_or(String::new(), |r| format!(", {} significant", r.significant.len()));
            eprintln!(
                "threshold {:.6}: {} of {} candidates prevalent{tested}",
                report.threshold,
                report.prevalent.len(),
                report.candidates
            );
        }
        Command::Synth(SynthCommand::Assoc { seed, out }) => {
            io::serialize_dataset(sink(out.as_deref())?, &gen_synthetic_assoc(seed))?;
        }
        Command::Synth(SynthCommand::Pair { lo, hi, seed, out }) => {
            io::serialize_dataset(sink(out.as_deref())?, &gen_distance_pair(lo, hi, seed)?)?;
        }
        Command::Bench(BenchCommand::Distance { ranges, datasets, seed, grid, model, out }) => {
            let rows = bench::distance_bench(ranges, datasets, seed, grid, &model)?;
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![format!("{:.1}", r.lo), format!("{:.1}", r.hi), format!("{:.6}", r.mean_expsup)])
                .collect();
            write_rows(out.as_deref(), &["lo", "hi", "mean_expsup"], &rows)?;
        }
        Command::Bench(BenchCommand::Granularity { bench: b, spacings }) => {
            let (problem, cfg) = bench_problem(&b)?;
            let region = b.input.is_none().then(bench::synthetic_region);
            let rows = with_threads(effective_threads(b.threads), || {
                bench::granularity_bench(&problem, &cfg.significance(), &spacings, region.as_ref())
            })??;
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.spacing.to_string(),
                        r.grid_points.to_string(),
                        r.transactions.to_string(),
                        r.after_filter1.to_string(),
                        r.significant.to_string(),
                        format!("{:.6}", r.seconds),
                    ]
                })
                .collect();
            let header = ["spacing", "grid_points", "transactions", "after_filter1", "significant", "seconds"];
            write_rows(b.out.as_deref(), &header, &rows)?;
        }
        Command::Bench(BenchCommand::Runtime { bench: b, runs, repeats }) => {
            let (problem, cfg) = bench_problem(&b)?;
            let rows = with_threads(effective_threads(b.threads), || {
                bench::runtime_bench(&problem, &cfg.significance(), &runs, repeats)
            })??;
            let xs: Vec<f64> = rows.iter().map(|r| r.runs as f64).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.seconds).collect();
            let fit = linear_fit(&xs, &ys);
            let table: Vec<Vec<String>> =
                rows.iter().map(|r| vec![r.runs.to_string(), format!("{:.6}", r.seconds)]).collect();
            write_rows(b.out.as_deref(), &["runs", "seconds"], &table)?;
            eprintln!("slope {:.6} s/run, intercept {:.6} s, r^2 {:.4}", fit.slope, fit.intercept, fit.r_squared);
        }
        Command::Transactions { input, grid, out } => {
            let mut dataset = io::read_dataset(&input)?;
            if dataset.is_empty() {
                write_rows(out.as_deref(), &["gx", "gy", "feature", "probability"], &[])?;
                eprintln!("0 transactions: empty dataset");
                return Ok(());
            }
            let mut stations = grid.wind.as_deref().map(io::read_stations).transpose()?.unwrap_or_default();
            if grid.geographic {
                let all: Vec<_> = dataset.iter().flat_map(|o| o.shape.vertices().to_vec()).collect();
                let proj = Equirectangular::centred_on(&all);
                for o in &mut dataset {
                    o.shape = o.shape.map_points(|p| proj.project(p));
                }
                for s in &mut stations {
                    s.location = proj.project(&s.location);
                }
            }
            let params = BufferParams { gamma: grid.gamma, r_min: grid.r_min, stations, ..BufferParams::default() };
            let spacing = match grid.grid {
                Some(s) => s,
                None => suggested_spacing(&dataset, &params)?,
            };
            let spec = grid_for_dataset(&dataset, spacing, &params, None)?;
            let ts = get_transactions(&dataset, &spec, &grid.model, &params)?;
            io::serialize_transactions(sink(out.as_deref())?, &ts)?;
            eprintln!("{} transactions on a {}x{} grid", ts.len(), spec.columns(), spec.rows());
        }
    }
    Ok(())
}

fn is_broken_pipe(e: &(dyn std::error::Error + 'static)) -> bool {
    let from_csv = |c: &csv::Error| match c.kind() {
        csv::ErrorKind::Io(io) => Some(io.kind()),
        _ => None,
    };
    let kind = match e.downcast_ref::<colocate::Error>() {
        Some(colocate::Error::Csv(c)) => from_csv(c),
        Some(colocate::Error::Io { source, .. }) => Some(source.kind()),
        Some(_) => None,
        None => e.downcast_ref::<std::io::Error>().map(|io| io.kind()),
    };
    kind == Some(std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream reader closed early, e.g. `| head`
        Err(e) if e.chain().any(is_broken_pipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
