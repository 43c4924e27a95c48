use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use sapp_core::experiment::{self, ExperimentSpec, SummaryRow};
use sapp_core::gen::{self, BridgeSpec, GridSpec, RoadSpec, ScalingSpec};
use sapp_core::io::{load_instance, load_realization, save_instance, save_realization};
use sapp_core::sim::{self, format_log, Planner, SimulationConfig};
use sapp_core::{PriorityWeights, ProblemInstance, Realization, RppOptions};

/// UGV routing through impeded roads with UAV inspection support.
#[derive(Parser)]
#[command(name = "sapp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Grid,
    Bridge,
    Scaling,
    Road,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one instance and its realization.
    Generate {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// TOML generator settings; defaults when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Road graph to prepare (road family); a synthetic one otherwise.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate one planner on an instance.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        realization: PathBuf,
        #[arg(long, default_value = "rpp")]
        planner: Planner,
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Priority weights as w1,w2,w3,w4.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Inspection-routing budget per solve in milliseconds.
        #[arg(long, default_value_t = 1000)]
        budget_ms: u64,
        /// Event log destination.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a batch experiment described by a TOML spec.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Rebuild the summary of an experiment directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "naive")]
        baseline: Planner,
    },
}

/// Bad input data (exit 2) or a failure while running (exit 3).
enum Failure {
    Data(anyhow::Error),
    Runtime(anyhow::Error),
}

fn data<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Data(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn read_spec<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(data)?;
    toml::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(data)
}

fn generate(
    family: FamilyArg,
    spec: Option<&Path>,
    seed: u64,
    input: Option<&Path>,
    out: &Path,
) -> Result<(), Failure> {
    let (inst, real): (ProblemInstance, Realization) = match family {
        FamilyArg::Grid => gen::generate_grid(&read_spec::<GridSpec>(spec)?, seed).map_err(data)?,
        FamilyArg::Bridge => gen::generate_bridge(&read_spec::<BridgeSpec>(spec)?, seed).map_err(data)?,
        FamilyArg::Scaling => {
            let s: ScalingSpec = read_spec(spec)?;
            gen::generate_scaling(s.nodes_per_path, s.n_paths, seed).map_err(data)?
        }
        FamilyArg::Road => {
            let s: RoadSpec = read_spec(spec)?;
            let base = match input {
                Some(p) => load_instance(p).map_err(data)?,
                None => gen::road_like_network(6, 5, seed).map_err(data)?,
            };
            gen::prepare_road_network(&base, &s, seed).map_err(data)?
        }
    };
    fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(runtime)?;
    save_instance(&inst, out.join("instance.txt")).map_err(runtime)?;
    save_realization(&real, out.join("realization.txt")).map_err(runtime)?;
    println!(
        "{} vertices, {} edges, {} impeded -> {}",
        inst.num_vertices(),
        inst.num_edges(),
        inst.impeded().len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    instance: &Path,
    realization: &Path,
    planner: Planner,
    k: usize,
    weights: Option<Vec<f64>>,
    budget_ms: u64,
    log: Option<&Path>,
) -> Result<(), Failure> {
    if k == 0 {
        return Err(data(anyhow::anyhow!("k must be positive")));
    }
    let weights = match weights {
        Some(w) => <[f64; 4]>::try_from(w)
            .ok()
            .and_then(PriorityWeights::new)
            .ok_or_else(|| data(anyhow::anyhow!("weights must be four finite non-negative numbers")))?,
        None => PriorityWeights::default(),
    };
    let inst = load_instance(instance).map_err(data)?;
    let real = load_realization(&inst, realization).map_err(data)?;
    let cfg = SimulationConfig {
        planner,
        k,
        weights,
        rpp: RppOptions {
            budget: Some(Duration::from_millis(budget_ms)),
            ..RppOptions::default()
        },
        ..SimulationConfig::default()
    };
    let out = sim::run(&inst, &real, &cfg).map_err(runtime)?;
    let text = format_log(&out.event_log);
    match log {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(runtime)?,
        None => print!("{text}"),
    }
    println!(
        "planner={planner} k={k} arrival={} LB={} replans={} max_ugv_replan_ms={:.3} max_uav_replan_ms={:.3}",
        out.arrival_time,
        out.lower_bound,
        out.n_replans,
        out.max_ugv_replan().as_secs_f64() * 1e3,
        out.max_uav_replan().as_secs_f64() * 1e3,
    );
    Ok(())
}

fn print_summary(rows: &[SummaryRow]) {
    println!("planner\tk\tn\tLB\tbaseline\tcost\tdelta%\tbaseline_sd\tcost_sd");
    for r in rows {
        println!(
            "{}\t{}\t{}\t{:.1}\t{:.1}\t{:.1}\t{:.1}\t{:.1}\t{:.1}",
            r.planner, r.k, r.n_runs, r.lb_mean, r.baseline_mean, r.cost_mean, r.delta, r.baseline_std, r.cost_std
        );
    }
}

fn run_experiment(spec: &Path, out: &Path, jobs: Option<usize>) -> Result<(), Failure> {
    let spec = ExperimentSpec::load(spec).map_err(data)?;
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(runtime)?;
    }
    let result = experiment::run_experiment(&spec).map_err(runtime)?;
    let summary = experiment::write_outputs(out, &spec, &result).map_err(runtime)?;
    print_summary(&summary);
    if !result.failures.is_empty() {
        eprintln!("{} runs failed and were excluded", result.failures.len());
    }
    Ok(())
}

fn report(input: &Path, out: &Path, baseline: Planner) -> Result<(), Failure> {
    let rows = experiment::report(input, baseline).map_err(data)?;
    experiment::write_rows(out, &rows).map_err(runtime)?;
    print_summary(&rows);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate {
            family,
            spec,
            seed,
            input,
            out,
        } => generate(family, spec.as_deref(), seed, input.as_deref(), &out),
        Command::Simulate {
            instance,
            realization,
            planner,
            k,
            weights,
            budget_ms,
            log,
        } => simulate(&instance, &realization, planner, k, weights, budget_ms, log.as_deref()),
        Command::Experiment { spec, out, jobs } => run_experiment(&spec, &out, jobs),
        Command::Report { input, out, baseline } => report(&input, &out, baseline),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
