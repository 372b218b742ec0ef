//! Command line front end: scenario ingestion, one subcommand per library
//! operation, CSV/JSON artifact emission.
//!
//! Exit codes: 0 when every task's internal assertions pass, 1 on task
//! failure, 2 on scenario parse errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use algext::scenario::{
    build_runtime, load_scenario, run_tasks, Scenario, StageSpec, Task,
};

#[derive(Parser)]
#[command(name = "algext", version, about = "Finite models of algebraic extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file defining the space, elements and polynomials.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a scenario file.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Build a single extension and report its parameters.
    Extend {
        #[command(subcommand)]
        kind: ExtendKind,
    },
    /// Dump the root fibration of a monic polynomial.
    Fibration {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long)]
        alpha: String,
    },
    /// Compare the averaging operator's two forms on one element.
    #[command(name = "t-operator")]
    TOperator {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long)]
        alpha: String,
        /// Element names for the coefficients b_0..b_{n-1}; random if absent.
        #[arg(long, value_delimiter = ',')]
        coeffs: Option<Vec<String>>,
    },
    /// Perturb the constant coefficient until the element is invertible.
    #[command(name = "approx-invert")]
    ApproxInvert {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long)]
        alpha: String,
        #[arg(long, value_delimiter = ',')]
        coeffs: Vec<String>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value = "direct")]
        strategy: String,
        #[arg(long, default_value_t = 32)]
        retries: usize,
    },
    /// Descend a logarithm witness from the extension to the base.
    #[command(name = "log-descent")]
    LogDescent {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long)]
        alpha: String,
        /// Element whose exponential is descended.
        #[arg(long)]
        log_of: String,
    },
    /// Winding numbers of an element around the declared loops.
    Winding {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long)]
        element: String,
    },
    /// Build a tower of extensions and verify its composition laws.
    Tower {
        #[command(flatten)]
        common: ScenarioArgs,
        /// Stage list, e.g. `ah:alpha,cole:p+q,log:f`.
        #[arg(long)]
        stages: String,
    },
    /// The analytic non-openness region of the circle model.
    #[command(name = "region-5323")]
    Region5323 {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = -std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
        arc_lo: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
        arc_hi: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        center_re: f64,
        #[arg(long, allow_hyphen_values = true)]
        center_im: f64,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Log-tower coverage report for a test set of invertible elements.
    Report {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long, value_delimiter = ',')]
        test: Vec<String>,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long, default_value_t = 4)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum ExtendKind {
    /// Arens-Hoffman extension by one monic polynomial.
    Ah {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        t: Option<f64>,
        /// Element names b_0..b_{n-1}; reports the element's norm,
        /// resultant, and inverse as CSV rows keyed by character.
        #[arg(long, value_delimiter = ',')]
        coeffs: Option<Vec<String>>,
    },
    /// Cole extension by a finite polynomial set.
    Cole {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long, value_delimiter = ',')]
        polys: Vec<String>,
    },
    /// Logarithmic extension of an invertible element.
    Log {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long)]
        element: String,
        #[arg(long)]
        t: Option<f64>,
    },
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<Scenario, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("parse: read {}: {e}", path.display()))?;
    let mut scenario = load_scenario(&text).map_err(|e| format!("parse: {e}"))?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    Ok(scenario)
}

fn parse_stages(spec: &str) -> Result<Vec<StageSpec>, String> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let (kind, arg) = part
            .split_once(':')
            .ok_or_else(|| format!("parse: bad stage `{part}`, expected kind:name"))?;
        out.push(match kind {
            "ah" => StageSpec::Ah { alpha: arg.to_string() },
            "cole" => StageSpec::Cole {
                polys: arg.split('+').map(|s| s.to_string()).collect(),
            },
            "log" => StageSpec::Log { element: arg.to_string() },
            other => return Err(format!("parse: unknown stage kind `{other}`")),
        });
    }
    Ok(out)
}

/// Runs tasks against a loaded scenario and writes artifacts plus manifest.
fn execute(scenario: &Scenario, tasks: Vec<Task>, out: &PathBuf) -> Result<(), String> {
    let rt = build_runtime(scenario).map_err(|e| format!("parse: {e}"))?;
    let artifacts = run_tasks(&rt, &tasks).map_err(|e| format!("task: {e}"))?;
    std::fs::create_dir_all(out)
        .map_err(|e| format!("task: create {}: {e}", out.display()))?;
    let mut names = Vec::new();
    for a in &artifacts {
        std::fs::write(out.join(&a.name), &a.bytes)
            .map_err(|e| format!("task: write {}: {e}", a.name))?;
        println!("wrote {}", out.join(&a.name).display());
        names.push(a.name.clone());
    }
    let manifest = serde_json::json!({
        "version": 1,
        "seed": rt.seed,
        "tasks": tasks.iter().map(|t| t.name()).collect::<Vec<_>>(),
        "artifacts": names,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("serializable");
    text.push('\n');
    std::fs::write(out.join("manifest.json"), text)
        .map_err(|e| format!("task: write manifest: {e}"))?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run { scenario, out, seed } => {
            let sc = load(&scenario, seed)?;
            let tasks = sc.tasks.clone();
            execute(&sc, tasks, &out)
        }
        Command::Extend { kind } => match kind {
            ExtendKind::Ah { common, alpha, t, coeffs } => {
                let sc = load(&common.scenario, common.seed)?;
                execute(&sc, vec![Task::ExtendAh { alpha, t, coeffs }], &common.out)
            }
            ExtendKind::Cole { common, polys } => {
                let sc = load(&common.scenario, common.seed)?;
                execute(&sc, vec![Task::ExtendCole { polys }], &common.out)
            }
            ExtendKind::Log { common, element, t } => {
                let sc = load(&common.scenario, common.seed)?;
                execute(&sc, vec![Task::ExtendLog { element, t }], &common.out)
            }
        },
        Command::Fibration { common, alpha } => {
            let sc = load(&common.scenario, common.seed)?;
            execute(&sc, vec![Task::Fibration { alpha }], &common.out)
        }
        Command::TOperator { common, alpha, coeffs } => {
            let sc = load(&common.scenario, common.seed)?;
            execute(&sc, vec![Task::TOperator { alpha, coeffs }], &common.out)
        }
        Command::ApproxInvert { common, alpha, coeffs, epsilon, strategy, retries } => {
            let sc = load(&common.scenario, common.seed)?;
            execute(
                &sc,
                vec![Task::ApproxInvert {
                    alpha,
                    coeffs,
                    epsilon,
                    strategy: Some(strategy),
                    retries: Some(retries),
                }],
                &common.out,
            )
        }
        Command::LogDescent { common, alpha, log_of } => {
            let sc = load(&common.scenario, common.seed)?;
            execute(&sc, vec![Task::LogDescent { alpha, log_of }], &common.out)
        }
        Command::Winding { common, element } => {
            let sc = load(&common.scenario, common.seed)?;
            // also print the integers to stdout
            let rt = build_runtime(&sc).map_err(|e| format!("parse: {e}"))?;
            let e = rt.element(&element).map_err(|e| format!("parse: {e}"))?;
            for (i, lp) in rt.space.loops().iter().enumerate() {
                let w = algext::logext::winding_number(e, lp)
                    .map_err(|e| format!("task: {e}"))?;
                println!("loop{i} {w}");
            }
            execute(&sc, vec![Task::Winding { element }], &common.out)
        }
        Command::Tower { common, stages } => {
            let sc = load(&common.scenario, common.seed)?;
            let stages = parse_stages(&stages)?;
            execute(&sc, vec![Task::Tower { stages }], &common.out)
        }
        Command::Region5323 {
            t,
            arc_lo,
            arc_hi,
            center_re,
            center_im,
            radius,
            out,
        } => {
            // independent of any scenario; a tiny synthetic one carries the task
            let sc = load_scenario(
                r#"{"space": {"kind": "interval", "resolution": 2}}"#,
            )
            .map_err(|e| format!("parse: {e}"))?;
            execute(
                &sc,
                vec![Task::Region5323 {
                    t,
                    arc: [arc_lo, arc_hi],
                    center: [center_re, center_im],
                    radius,
                }],
                &out,
            )
        }
        Command::Report { common, test, rounds, samples } => {
            let sc = load(&common.scenario, common.seed)?;
            execute(&sc, vec![Task::Report { test, rounds, samples }], &common.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            if message.starts_with("parse:") {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
