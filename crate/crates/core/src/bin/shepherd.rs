use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use shepherd::evaluation::{evaluate_trials, run_scenarios, FitnessSpec, Scenario, TrialReport};
use shepherd::expr::parse_tree;
use shepherd::gp::{evolve, SeedMode};
use shepherd::settings::{RunManifest, Settings, SettingsError};
use shepherd::sim::run_episode;
use shepherd::{fitness, ConfigError, Controller, TerminalSet};

#[derive(Parser)]
#[command(
    name = "shepherd",
    version,
    about = "Evolve and evaluate shepherding dog controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run genetic programming and write generations.csv, best.sexp and manifest.json.
    Evolve(EvolveArgs),
    /// Measure a controller over many seeded episodes.
    Eval(EvalArgs),
    /// Record one episode as a JSON-lines trajectory.
    Trace(TraceArgs),
}

#[derive(Args)]
struct Common {
    /// key=value settings file (SimConfig / GpConfig field names).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for episode evaluation (0 = one per CPU).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    dogs: Option<usize>,
    #[arg(long)]
    sheep: Option<usize>,
    /// Terminal set for evolved programs: single4 or multi12.
    #[arg(long)]
    terminals: Option<TerminalSet>,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    common: Common,
    /// Reproduce the configuration recorded in a previous run's manifest.json.
    #[arg(long, conflicts_with = "config")]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    gens: Option<usize>,
    /// Mutation probability per offspring slot.
    #[arg(long)]
    pm: Option<f64>,
    /// Episodes per fitness evaluation.
    #[arg(long)]
    sims: Option<usize>,
    /// fresh (new seeds every generation) or fixed (one suite per run).
    #[arg(long)]
    seed_mode: Option<SeedMode>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// evolved:<path.sexp>, simple or random.
    #[arg(long)]
    controller: String,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// `all` or a comma-separated list of presets.
    #[arg(long)]
    scenarios: Option<String>,
    /// CSV destination (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write reports with histograms as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    common: Common,
    /// evolved:<path.sexp>, simple or random.
    #[arg(long)]
    controller: String,
    /// JSONL destination (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    /// Bad arguments, configuration or inputs: exit 2.
    Usage(String),
    /// Failure while producing outputs: exit 1.
    Internal(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SettingsError> for CliError {
    fn from(e: SettingsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn internal(context: &str) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Internal(format!("{context}: {e}"))
}

fn settings(common: &Common, manifest: Option<&Path>) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = manifest {
        s.apply_manifest(path)?;
    }
    if let Some(path) = &common.config {
        s.apply_file(path)?;
    }
    if let Some(d) = common.dogs {
        s.sim.n_dogs = d;
    }
    if let Some(n) = common.sheep {
        s.sim.n_sheep = n;
    }
    Ok(s)
}

fn terminal_set(common: &Common, n_dogs: usize) -> Result<TerminalSet, CliError> {
    let set = match common.terminals {
        Some(t) => t,
        None => TerminalSet::for_dogs(n_dogs)?,
    };
    set.check_dogs(n_dogs)?;
    Ok(set)
}

fn load_controller(spec: &str, common: &Common, s: &Settings) -> Result<Controller, CliError> {
    match spec {
        "simple" => Ok(Controller::SimpleDog),
        "random" => Ok(Controller::RandDog),
        _ => {
            let path = spec.strip_prefix("evolved:").ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown controller {spec:?} (expected evolved:<path>, simple or random)"
                ))
            })?;
            let terminals = terminal_set(common, s.sim.n_dogs)?;
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
            let tree = parse_tree(&text, terminals.labels(), s.gp.d_max)
                .map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
            Ok(Controller::Evolved { tree, terminals })
        }
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), CliError> {
    let mut s = settings(&args.common, args.manifest.as_deref())?;
    if let Some(seed) = args.common.seed {
        s.gp.master_seed = seed;
    }
    if let Some(p) = args.pop {
        s.gp.population_size = p;
    }
    if let Some(g) = args.gens {
        s.gp.generations = g;
        s.generations_explicit = true;
    }
    if let Some(pm) = args.pm {
        s.gp.p_m = pm;
    }
    if let Some(k) = args.sims {
        s.gp.fitness_sims = k;
    }
    if let Some(mode) = args.seed_mode {
        s.gp.seed_mode = mode;
    }
    let s = s.finish()?;
    let terminals = terminal_set(&args.common, s.sim.n_dogs)?;

    let sim = &s.sim;
    let quiet = args.quiet;
    let fitness_fn = |tree: &shepherd::ExprTree, spec: &FitnessSpec| {
        let c = Controller::Evolved {
            tree: tree.clone(),
            terminals,
        };
        fitness(&c, spec, sim)
    };
    let (best, log) = with_workers(args.common.workers, || {
        evolve(&s.gp, terminals.arity(), fitness_fn, |rec, _| {
            if !quiet {
                eprintln!(
                    "gen {:>4}  max {:.4}  mean {:.4}",
                    rec.generation, rec.max_fitness, rec.mean_fitness
                );
            }
        })
    })??;

    fs::create_dir_all(&args.out).map_err(internal("creating output directory"))?;
    let outputs = ["generations.csv", "best.sexp", "manifest.json"];
    fs::write(args.out.join(outputs[0]), log.to_csv()).map_err(internal(outputs[0]))?;
    fs::write(
        args.out.join(outputs[1]),
        best.tree.to_sexp_with(terminals.labels()) + "\n",
    )
    .map_err(internal(outputs[1]))?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        terminals: terminals.name().to_string(),
        sim: s.sim.clone(),
        gp: s.gp.clone(),
        outputs: outputs.iter().map(|o| o.to_string()).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(args.out.join(outputs[2]), json + "\n").map_err(internal(outputs[2]))?;

    println!("best fitness {}", best.fitness.unwrap_or(0.0));
    Ok(())
}

#[derive(Serialize)]
struct ReportRow<'a> {
    controller: &'a str,
    scenario: &'a str,
    #[serde(flatten)]
    report: &'a TrialReport,
}

fn parse_scenarios(list: &str) -> Result<Vec<Scenario>, CliError> {
    if list == "all" {
        return Ok(Scenario::ALL.to_vec());
    }
    list.split(',')
        .map(|name| name.trim().parse::<Scenario>().map_err(CliError::Usage))
        .collect()
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let s = settings(&args.common, None)?.finish()?;
    let controller = load_controller(&args.controller, &args.common, &s)?;
    if args.trials == 0 {
        return Err(CliError::Usage("n_trials must be ≥ 1".into()));
    }
    let seed = args.common.seed.unwrap_or(0);
    let reports: Vec<(String, TrialReport)> = match &args.scenarios {
        Some(list) => {
            let presets = parse_scenarios(list)?;
            if let Some(sc) = presets.iter().find(|sc| sc.apply(&s.sim).validate().is_err()) {
                return Err(CliError::Usage(format!("scenario {sc} gives an invalid configuration")));
            }
            with_workers(args.common.workers, || {
                run_scenarios(&controller, &s.sim, &presets, args.trials, seed)
            })?
            .into_iter()
            .map(|(sc, r)| (sc.name().to_string(), r))
            .collect()
        }
        None => {
            let r = with_workers(args.common.workers, || {
                evaluate_trials(&controller, &s.sim, args.trials, seed)
            })?;
            vec![("base".to_string(), r)]
        }
    };

    let mut out = open_out(args.out.as_deref())?;
    let mut csv = String::from("controller,scenario,n_trials,mean,std_error\n");
    for (scenario, r) in &reports {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            args.controller, scenario, r.n_trials, r.mean, r.std_error
        ));
    }
    out.write_all(csv.as_bytes())
        .and_then(|_| out.flush())
        .map_err(internal("writing report"))?;

    if let Some(path) = &args.json {
        let rows: Vec<ReportRow> = reports
            .iter()
            .map(|(scenario, report)| ReportRow {
                controller: &args.controller,
                scenario,
                report,
            })
            .collect();
        let json = serde_json::to_string_pretty(&rows).expect("reports serialize");
        fs::write(path, json + "\n").map_err(internal("writing json report"))?;
    }
    Ok(())
}

fn cmd_trace(args: TraceArgs) -> Result<(), CliError> {
    let s = settings(&args.common, None)?.finish()?;
    let controller = load_controller(&args.controller, &args.common, &s)?;
    let seed = args.common.seed.unwrap_or(0);
    let result = run_episode(&controller, &s.sim, &s.sim.geometry(), seed, true);
    let frames = result.trace.expect("trace requested");
    let out = open_out(args.out.as_deref())?;
    shepherd::trace::write_jsonl(&frames, out).map_err(internal("writing trace"))?;
    eprintln!(
        "captured {}/{} in {} steps",
        result.captured, result.n_sheep, result.steps_run
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evolve(a) => cmd_evolve(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Trace(a) => cmd_trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
