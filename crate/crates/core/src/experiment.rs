//! Batch experiments: generate a family of instances, run every planner and
//! `k` on each, and aggregate the outcomes against a baseline planner.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ExperimentError;
use crate::gen::{self, BridgeSpec, GridSpec, RoadSpec};
use crate::model::{ProblemInstance, Realization};
use crate::paa::PriorityWeights;
use crate::rpp::{Pruning, RppOptions};
use crate::sim::{self, OutcomeRow, Planner, SimulationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Grid,
    Bridge,
    /// Bridge-style instances at each of `scaling_sizes`.
    Scaling,
    RoadNetwork,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub family: Family,
    pub n_instances: usize,
    pub k_values: Vec<usize>,
    pub planners: Vec<Planner>,
    /// Planner the others are compared against in the summary.
    pub baseline: Planner,
    pub seed: u64,
    /// Road networks only.
    pub impeded_fraction: f64,
    /// Inspection-routing budget per solve; `None` runs to completion.
    pub budget_ms: Option<u64>,
    pub pruning: Pruning,
    pub weights: Option<[f64; 4]>,
    pub grid: GridSpec,
    pub bridge: BridgeSpec,
    /// (nodes per chain, chains).
    pub scaling_sizes: Vec<(usize, usize)>,
    /// Road graph in the instance format; a synthetic road-like network
    /// per instance when absent.
    pub road_file: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            family: Family::Bridge,
            n_instances: 100,
            k_values: vec![1, 2, 3, 4, 5],
            planners: vec![Planner::KsppRpp, Planner::Naive],
            baseline: Planner::Naive,
            seed: 0,
            impeded_fraction: 0.1,
            budget_ms: Some(1000),
            pruning: Pruning::Exact,
            weights: None,
            grid: GridSpec::default(),
            bridge: BridgeSpec::default(),
            scaling_sizes: gen::SCALING_SIZES.to_vec(),
            road_file: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| ExperimentError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Spec(m.to_string()));
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return bad("k_values must be non-empty and positive");
        }
        if self.planners.is_empty() {
            return bad("planners must be non-empty");
        }
        if !(0.0..=1.0).contains(&self.impeded_fraction) {
            return bad("impeded_fraction must be in [0, 1]");
        }
        if self.weights.is_some_and(|w| PriorityWeights::new(w).is_none()) {
            return bad("weights must be finite and non-negative");
        }
        if self.family == Family::Scaling && self.scaling_sizes.is_empty() {
            return bad("scaling_sizes must be non-empty");
        }
        Ok(())
    }

    fn config(&self, planner: Planner, k: usize) -> SimulationConfig {
        SimulationConfig {
            planner,
            k,
            weights: self.weights.and_then(PriorityWeights::new).unwrap_or_default(),
            rpp: RppOptions {
                budget: self.budget_ms.map(Duration::from_millis),
                pruning: self.pruning,
                ..RppOptions::default()
            },
            ..SimulationConfig::default()
        }
    }

    /// The distinct (planner, k) pairs to run. Planners whose behaviour does
    /// not depend on `k` run once, at `k = 1`.
    fn runs(&self) -> Vec<(Planner, usize)> {
        let mut runs = Vec::new();
        for &planner in self.planners.iter().chain([&self.baseline]) {
            for &k in &self.k_values {
                let pair = (planner, if planner.ugv_paths(2) == 1 { 1 } else { k });
                if !runs.contains(&pair) {
                    runs.push(pair);
                }
            }
        }
        runs.sort();
        runs
    }
}

/// One generated instance with its identifier.
pub struct GeneratedInstance {
    pub id: String,
    pub seed: u64,
    pub instance: ProblemInstance,
    pub realization: Realization,
}

/// All instances of the experiment, in a fixed order.
pub fn generate_instances(spec: &ExperimentSpec) -> Result<Vec<GeneratedInstance>, ExperimentError> {
    let road_base = match (&spec.family, &spec.road_file) {
        (Family::RoadNetwork, Some(path)) => Some(crate::io::load_instance(path)?),
        _ => None,
    };
    let road = RoadSpec {
        impeded_fraction: spec.impeded_fraction,
        ..RoadSpec::default()
    };
    let mut jobs = Vec::new();
    match spec.family {
        Family::Scaling => {
            for &(len, m) in &spec.scaling_sizes {
                for i in 0..spec.n_instances {
                    jobs.push((format!("scaling-{len}x{m}-{i:04}"), Some((len, m)), i));
                }
            }
        }
        family => {
            let name = match family {
                Family::Grid => "grid",
                Family::Bridge => "bridge",
                _ => "road",
            };
            jobs.extend((0..spec.n_instances).map(|i| (format!("{name}-{i:04}"), None, i)));
        }
    }
    jobs.into_par_iter()
        .map(|(id, size, i)| {
            let seed = spec.seed.wrapping_add(i as u64);
            let (instance, realization) = match (spec.family, size) {
                (Family::Grid, _) => gen::generate_grid(&spec.grid, seed)?,
                (Family::Bridge, _) => gen::generate_bridge(&spec.bridge, seed)?,
                (Family::Scaling, Some((len, m))) => gen::generate_scaling(len, m, seed)?,
                _ => match &road_base {
                    Some(base) => gen::prepare_road_network(base, &road, seed)?,
                    None => gen::prepare_road_network(&gen::road_like_network(6, 5, seed)?, &road, seed)?,
                },
            };
            Ok(GeneratedInstance {
                id,
                seed,
                instance,
                realization,
            })
        })
        .collect()
}

/// A completed run together with facts about its instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub row: OutcomeRow,
    pub n_vertices: usize,
    pub max_uav_solve_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Sorted by instance, planner and `k`.
    pub runs: Vec<RunRecord>,
    /// `(instance id, planner, k, error)` for runs that did not complete.
    pub failures: Vec<(String, Planner, usize, String)>,
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let instances = generate_instances(spec)?;
    let pairs = spec.runs();
    let jobs: Vec<(&GeneratedInstance, Planner, usize)> = instances
        .iter()
        .flat_map(|g| pairs.iter().map(move |&(p, k)| (g, p, k)))
        .collect();
    let outcomes: Vec<_> = jobs
        .into_par_iter()
        .map(|(g, planner, k)| {
            let cfg = spec.config(planner, k);
            match sim::run(&g.instance, &g.realization, &cfg) {
                Ok(out) => Ok(RunRecord {
                    row: OutcomeRow::new(g.id.clone(), g.seed, &cfg, &out),
                    n_vertices: g.instance.num_vertices(),
                    max_uav_solve_ms: out.max_uav_solve().as_secs_f64() * 1e3,
                }),
                Err(e) => {
                    log::warn!("{} {planner} k={k}: {e}", g.id);
                    Err((g.id.clone(), planner, k, e.to_string()))
                }
            }
        })
        .collect();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => runs.push(r),
            Err(f) => failures.push(f),
        }
    }
    runs.sort_by(|a, b| {
        (&a.row.instance_id, a.row.planner, a.row.k).cmp(&(&b.row.instance_id, b.row.planner, b.row.k))
    });
    if !failures.is_empty() {
        log::warn!("{} runs failed and are excluded", failures.len());
    }
    Ok(ExperimentResult { runs, failures })
}

/// Aggregate of one planner at one `k` against the baseline, over the
/// instances where both runs completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub planner: Planner,
    pub k: usize,
    pub n_runs: usize,
    #[serde(rename = "LB_mean")]
    pub lb_mean: f64,
    pub baseline_mean: f64,
    pub cost_mean: f64,
    pub delta: f64,
    pub baseline_std: f64,
    pub cost_std: f64,
    pub max_ugv_replan_ms: f64,
    pub max_uav_replan_ms: f64,
}

/// Share of the baseline's gap to the lower bound closed by the planner,
/// in percent. Zero when the baseline already meets the bound.
pub fn improvement_percent(lb_mean: f64, baseline_mean: f64, cost_mean: f64) -> f64 {
    let gap = baseline_mean - lb_mean;
    if gap == 0.0 {
        0.0
    } else {
        (baseline_mean - cost_mean) / gap * 100.0
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One row per (planner, k) other than the baseline, in that order.
pub fn summarize(rows: &[OutcomeRow], baseline: Planner) -> Vec<SummaryRow> {
    let base: BTreeMap<&str, &OutcomeRow> = rows
        .iter()
        .filter(|r| r.planner == baseline)
        .map(|r| (r.instance_id.as_str(), r))
        .collect();
    let mut groups: BTreeMap<(Planner, usize), Vec<&OutcomeRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.planner != baseline) {
        groups.entry((r.planner, r.k)).or_default().push(r);
    }
    groups
        .into_iter()
        .filter_map(|((planner, k), runs)| {
            let paired: Vec<(&OutcomeRow, &OutcomeRow)> = runs
                .into_iter()
                .filter_map(|r| base.get(r.instance_id.as_str()).map(|b| (r, *b)))
                .collect();
            if paired.is_empty() {
                return None;
            }
            let col = |f: &dyn Fn(&(&OutcomeRow, &OutcomeRow)) -> f64| paired.iter().map(f).collect::<Vec<_>>();
            let (lb_mean, _) = mean_std(&col(&|(r, _)| r.lb));
            let (baseline_mean, baseline_std) = mean_std(&col(&|(_, b)| b.cost));
            let (cost_mean, cost_std) = mean_std(&col(&|(r, _)| r.cost));
            let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
            Some(SummaryRow {
                planner,
                k,
                n_runs: paired.len(),
                lb_mean,
                baseline_mean,
                cost_mean,
                delta: improvement_percent(lb_mean, baseline_mean, cost_mean),
                baseline_std,
                cost_std,
                max_ugv_replan_ms: max(col(&|(r, _)| r.max_ugv_replan_ms)),
                max_uav_replan_ms: max(col(&|(r, _)| r.max_uav_replan_ms)),
            })
        })
        .collect()
}

pub const RUNS_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TIMES_FILE: &str = "replan_times.tsv";
pub const SCATTER_FILE: &str = "cost_scatter.tsv";

fn io_err(path: &FsPath) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_rows<T: Serialize>(path: &FsPath, rows: &[T]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_runs(path: &FsPath) -> Result<Vec<OutcomeRow>, ExperimentError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Writes the per-run CSV, the summary and the plot-data files into `dir`.
pub fn write_outputs(
    dir: &FsPath,
    spec: &ExperimentSpec,
    result: &ExperimentResult,
) -> Result<Vec<SummaryRow>, ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let rows: Vec<OutcomeRow> = result.runs.iter().map(|r| r.row.clone()).collect();
    write_rows(&dir.join(RUNS_FILE), &rows)?;
    let summary = summarize(&rows, spec.baseline);
    write_rows(&dir.join(SUMMARY_FILE), &summary)?;

    let mut times = String::from("n_vertices\tplanner\tk\tmax_ugv_replan_ms\tmax_uav_replan_ms\tmax_uav_solve_ms\n");
    for r in &result.runs {
        times += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.n_vertices, r.row.planner, r.row.k, r.row.max_ugv_replan_ms, r.row.max_uav_replan_ms, r.max_uav_solve_ms
        );
    }
    let path = dir.join(TIMES_FILE);
    fs::write(&path, times).map_err(io_err(&path))?;

    let base: BTreeMap<&str, f64> = rows
        .iter()
        .filter(|r| r.planner == spec.baseline)
        .map(|r| (r.instance_id.as_str(), r.cost))
        .collect();
    let mut scatter = String::from("instance_id\tplanner\tk\tLB\tbaseline_cost\tcost\n");
    for r in rows.iter().filter(|r| r.planner != spec.baseline) {
        if let Some(b) = base.get(r.instance_id.as_str()) {
            scatter += &format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                r.instance_id, r.planner, r.k, r.lb, b, r.cost
            );
        }
    }
    let path = dir.join(SCATTER_FILE);
    fs::write(&path, scatter).map_err(io_err(&path))?;
    Ok(summary)
}

/// Rebuilds the summary from a directory written by [`write_outputs`].
pub fn report(dir: &FsPath, baseline: Planner) -> Result<Vec<SummaryRow>, ExperimentError> {
    Ok(summarize(&read_runs(&dir.join(RUNS_FILE))?, baseline))
}

/// The rows with wall-clock columns cleared, for comparing two runs.
pub fn without_timings(rows: &[OutcomeRow]) -> Vec<OutcomeRow> {
    rows.iter()
        .map(|r| OutcomeRow {
            max_ugv_replan_ms: 0.0,
            max_uav_replan_ms: 0.0,
            ..r.clone()
        })
        .collect()
}
