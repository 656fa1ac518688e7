use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use colav_core::batch::{self, RunSpec};
use colav_core::curves::write_membership_curves;
use colav_core::dynamics::VesselState;
use colav_core::env::EpisodeConfig;
use colav_core::policy::PolicySpec;
use colav_core::risk::{assess, RiskParams, TargetShip};
use colav_core::scenario::ScenarioSpec;
use colav_core::{trajectory, Execution};

#[derive(Parser)]
#[command(name = "colav", version, about = "Risk-aware vessel collision-avoidance simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes and write a report.
    Run(RunArgs),
    /// Collision-risk tools.
    Risk {
        #[command(subcommand)]
        command: RiskCommand,
    },
    /// Sample the membership functions to CSV.
    Curves {
        /// Risk parameter JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute statistics and compliance from a trajectory CSV.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct RunArgs {
    /// empty, training, head_on, crossing_starboard or crossing_port.
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Episode config JSON used for every episode.
    #[arg(long)]
    config: Option<PathBuf>,
    /// idle, full_ahead, los_pd, give_way_scripted or external.
    #[arg(long, default_value = "los_pd")]
    policy: String,
    /// Action file for the external policy; `-` reads stdin.
    #[arg(long)]
    actions: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-step trajectory CSV. With several episodes the seed is appended
    /// to the file stem.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Report JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run episodes one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum RiskCommand {
    /// Evaluate CPA, memberships and CRI for one own ship and its targets.
    Eval {
        /// Own ship `x,y,psi,u,v,r` (m, rad, m/s, rad/s).
        #[arg(long, value_parser = parse_list::<6>, allow_hyphen_values = true)]
        os: [f64; 6],
        /// Target `x,y,course,speed` (m, rad, m/s); repeatable.
        #[arg(long = "ts", value_parser = parse_list::<4>, allow_hyphen_values = true, required = true)]
        targets: Vec<[f64; 4]>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ReplayArgs {
    trajectory: PathBuf,
    /// Episode config; defaults to the `.config.json` written next to the
    /// trajectory by `run --record`.
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Regenerate the config from a scenario name and seed instead.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_list<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    vals.try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.write_all(b"\n")?;
            Ok(())
        }
    }
}

fn record_path(base: &Path, seed: u64, many: bool) -> PathBuf {
    if !many {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_{seed}.{ext}"))
}

/// `foo.csv` → `foo.config.json`
fn config_sidecar(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    csv.with_file_name(format!("{stem}.config.json"))
}

fn run(args: RunArgs) -> Result<()> {
    let scenario = match (&args.scenario, &args.config) {
        (_, Some(cfg)) => ScenarioSpec::Config {
            file: Some(cfg.clone()),
            config: None,
        },
        (Some(name), None) => ScenarioSpec::from_name(name)?,
        (None, None) => bail!("one of --scenario or --config is required"),
    };
    let policy = PolicySpec::from_name(&args.policy, args.actions.clone())?;
    if args.episodes == 0 {
        bail!("--episodes must be at least 1");
    }
    let spec = RunSpec {
        scenario,
        policy,
        episodes: args.episodes,
        seed: args.seed,
    };
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let (report, outcomes) = batch::run(&spec, exec, args.record.is_some())?;
    if let Some(base) = &args.record {
        for o in &outcomes {
            let path = record_path(base, o.report.seed, args.episodes > 1);
            trajectory::save(&o.rows, &path)?;
            fs::write(config_sidecar(&path), o.config.to_json())
                .with_context(|| format!("writing config next to {}", path.display()))?;
        }
    }
    write_output(args.out.as_deref(), &report.to_json())?;
    let s = &report.summary;
    log::info!(
        "{} episodes: {} successes, {} collisions, mean progress {:.3}",
        s.episodes,
        s.successes,
        s.collisions,
        s.mean_progress
    );
    Ok(())
}

fn risk_eval(os: [f64; 6], targets: &[[f64; 4]], config: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let params: RiskParams = match config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => RiskParams::default(),
    };
    params.validate()?;
    let state = VesselState {
        x: os[0],
        y: os[1],
        psi: os[2],
        u: os[3],
        v: os[4],
        r: os[5],
    };
    let reports: Vec<_> = targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let ts = TargetShip {
                position: [t[0], t[1]],
                course: t[2],
                speed: t[3],
            };
            assess(i as u32, &state, &ts, &params)
        })
        .collect();
    write_output(out, &serde_json::to_string_pretty(&reports)?)
}

fn curves(config: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let params: RiskParams = match config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => RiskParams::default(),
    };
    params.validate()?;
    match out {
        Some(p) => {
            let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_membership_curves(&params, std::io::BufWriter::new(f))?;
        }
        None => write_membership_curves(&params, std::io::stdout().lock())?,
    }
    Ok(())
}

fn replay(args: ReplayArgs) -> Result<()> {
    let cfg = match (&args.config, &args.scenario) {
        (Some(p), _) => EpisodeConfig::load(p)?,
        (None, Some(name)) => ScenarioSpec::from_name(name)?.build(args.seed)?,
        (None, None) => {
            let side = config_sidecar(&args.trajectory);
            if !side.exists() {
                return Err(anyhow!(
                    "no --config or --scenario given and {} does not exist",
                    side.display()
                ));
            }
            EpisodeConfig::load(&side)?
        }
    };
    let rows = trajectory::load(&args.trajectory)?;
    let report = batch::replay(&rows, &cfg)?;
    write_output(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            || c.to_string().contains("Broken pipe")
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Risk {
            command:
                RiskCommand::Eval {
                    os,
                    targets,
                    config,
                    out,
                },
        } => risk_eval(os, &targets, config.as_deref(), out.as_deref()),
        Command::Curves { config, out } => curves(config.as_deref(), out.as_deref()),
        Command::Replay(a) => replay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
