//! The `navbench` command line. Flags override values from `--config`.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use navbench_core::agents::AgentKind;
use navbench_core::config::NavbenchConfig;
use navbench_core::harness::{
    generate_scenarios, load_rows, load_suite, run_suite, save_scenarios, side_by_side, summaries, write_curves, write_report,
    ResultRow,
};
use navbench_core::localization::LocalizerKind;
use navbench_core::world::{generate_map, load_map, save_map, GeneratorConfig, WorldMap};
use navbench_teleop::{SessionManager, TeleopConfig};

#[derive(Debug, Parser)]
#[command(name = "navbench", version, about = "Desk-scale PointGoal navigation benchmark")]
pub struct Cli {
    /// TOML file with world, agent, suite and generator settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one agent over a scenario suite.
    Run(RunArgs),
    /// Generate random floor plans.
    GenMaps(GenMapsArgs),
    /// Sample start-goal pairs on existing maps.
    GenScenarios(GenScenariosArgs),
    /// Summarize and compare result files.
    Report(ReportArgs),
    /// Host human teleoperation sessions.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// blind, classic or belief.
    #[arg(long)]
    pub agent: Option<AgentKind>,
    /// perfect, odom or scanmatch.
    #[arg(long)]
    pub localizer: Option<LocalizerKind>,
    /// Odometry noise per step, meters.
    #[arg(long)]
    pub sigma_lin: Option<f64>,
    /// Odometry heading noise per step, radians.
    #[arg(long)]
    pub sigma_ang: Option<f64>,
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write trajectories.csv.
    #[arg(long)]
    pub trajectories: bool,
}

#[derive(Debug, Args)]
pub struct GenMapsArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 34)]
    pub count: usize,
    /// Map `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Single empty room instead of furnished rooms. Without a config
    /// file the furnished preset is used.
    #[arg(long)]
    pub empty: bool,
}

#[derive(Debug, Args)]
pub struct GenScenariosArgs {
    /// Map files, or directories whose `*.txt` files are all used.
    #[arg(long, required = true, num_args = 1..)]
    pub maps: Vec<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub per_map: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `results.csv` files or run directories containing one.
    #[arg(long, required = true, num_args = 1..)]
    pub results: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Write cumulative curves (curves.csv, curves.svg).
    #[arg(long)]
    pub curves: bool,
    /// Shortest-path threshold spacing for the curves, meters.
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Suite for sessions created without one.
    #[arg(long)]
    pub suite: Option<String>,
    /// Send true poses and serve ground-truth maps.
    #[arg(long)]
    pub debug_overlay: bool,
    /// CSV rewritten with every finished human episode.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Minimum milliseconds between accepted actions.
    #[arg(long, default_value_t = 100)]
    pub min_interval_ms: u64,
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => NavbenchConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => NavbenchConfig::default(),
    };
    let explicit = cli.config.is_some();
    match cli.command {
        Command::Run(a) => cmd_run(cfg, a),
        Command::GenMaps(a) => cmd_gen_maps(cfg, explicit, a),
        Command::GenScenarios(a) => cmd_gen_scenarios(cfg, a),
        Command::Report(a) => cmd_report(a),
        Command::Serve(a) => cmd_serve(cfg, a),
    }
}

fn cmd_run(mut cfg: NavbenchConfig, a: RunArgs) -> Result<()> {
    if let Some(k) = a.agent {
        cfg.agent.kind = k;
    }
    if let Some(k) = a.localizer {
        cfg.agent.localizer.kind = k;
    }
    if let Some(s) = a.sigma_lin {
        cfg.agent.localizer.sigma_lin = s;
    }
    if let Some(s) = a.sigma_ang {
        cfg.agent.localizer.sigma_ang = s;
    }
    let parallel = a.parallel.unwrap_or(cfg.suite.parallel);
    let seed = a.seed.unwrap_or(cfg.suite.seed);
    let tasks = load_suite(&a.suite, &cfg.world.body).with_context(|| format!("loading {}", a.suite.display()))?;
    log::info!("{} on {} scenarios, {parallel} threads", cfg.agent.label(), tasks.len());
    let report = run_suite(&cfg.agent, &tasks, &cfg.world, parallel, seed)?;
    write_report(&report, &a.out, a.trajectories || cfg.suite.trajectories)?;
    let s = report.summary;
    println!("{}: {} episodes, SR {:.3}, SPL {:.3}, pace {:.3}", report.agent, s.episodes, s.sr, s.spl, s.pace);
    Ok(())
}

fn cmd_gen_maps(cfg: NavbenchConfig, explicit: bool, a: GenMapsArgs) -> Result<()> {
    let base = if explicit { cfg.generator } else { GeneratorConfig::furnished() };
    let gen = if a.empty {
        GeneratorConfig::empty_room(base.width, base.height)
    } else {
        base
    };
    std::fs::create_dir_all(&a.out)?;
    let mut written = 0;
    for i in 0..a.count as u64 {
        let seed = a.seed + i;
        match generate_map(seed, &gen) {
            Ok(m) => {
                save_map(&m, a.out.join(format!("map-{seed:04}.txt")))?;
                written += 1;
            }
            Err(e) => log::warn!("seed {seed}: {e}"),
        }
    }
    println!("wrote {written} maps to {}", a.out.display());
    Ok(())
}

fn map_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "txt"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        bail!("no map files found");
    }
    Ok(out)
}

/// How a scenario file at `scenarios` should name `map`: relative when the
/// map sits under the scenario file's directory, absolute otherwise.
fn map_reference(map: &Path, scenarios: &Path) -> Result<String> {
    let map = std::path::absolute(map)?;
    let dir = std::path::absolute(scenarios)?.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(match map.strip_prefix(&dir) {
        Ok(rel) => rel.to_string_lossy().into_owned(),
        Err(_) => map.to_string_lossy().into_owned(),
    })
}

fn cmd_gen_scenarios(cfg: NavbenchConfig, a: GenScenariosArgs) -> Result<()> {
    let files = map_files(&a.maps)?;
    let mut maps: Vec<(String, Arc<WorldMap>)> = Vec::new();
    for f in &files {
        let m = load_map(f).with_context(|| format!("loading {}", f.display()))?;
        maps.push((map_reference(f, &a.out)?, Arc::new(m)));
    }
    let refs: Vec<(String, &WorldMap)> = maps.iter().map(|(n, m)| (n.clone(), m.as_ref())).collect();
    let gen = generate_scenarios(&refs, a.per_map, a.seed, &cfg.scenarios);
    for name in &gen.skipped {
        log::warn!("{name}: fewer than {} valid start-goal pairs", a.per_map);
    }
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    save_scenarios(&gen.scenarios, &a.out)?;
    println!("wrote {} scenarios on {} maps to {}", gen.scenarios.len(), maps.len(), a.out.display());
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let mut rows: Vec<ResultRow> = Vec::new();
    for p in &a.results {
        let file = if p.is_dir() { p.join("results.csv") } else { p.clone() };
        rows.extend(load_rows(&file).with_context(|| format!("loading {}", file.display()))?);
    }
    std::fs::create_dir_all(&a.out)?;
    let mut table = String::from("| agent | episodes | SR | SPL | pace |\n|---|---|---|---|---|\n");
    for (agent, s) in summaries(&rows)? {
        table.push_str(&format!("| {agent} | {} | {:.3} | {:.3} | {:.3} |\n", s.episodes, s.sr, s.spl, s.pace));
    }
    print!("{table}");
    std::fs::write(a.out.join("summary.md"), &table)?;
    std::fs::write(a.out.join("side_by_side.md"), side_by_side(&rows))?;
    if a.curves {
        write_curves(&rows, &a.out, a.step)?;
    }
    Ok(())
}

fn cmd_serve(cfg: NavbenchConfig, a: ServeArgs) -> Result<()> {
    let teleop = TeleopConfig {
        world: cfg.world,
        min_interval: Duration::from_millis(a.min_interval_ms),
        debug_overlay: a.debug_overlay,
        results_path: a.results,
        default_suite: a.suite,
    };
    if let Some(s) = &teleop.default_suite {
        load_suite(s, &teleop.world.body).with_context(|| format!("loading {s}"))?;
    }
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((a.host.as_str(), a.port)).await?;
        println!("serving on http://{}", listener.local_addr()?);
        navbench_teleop::serve(listener, SessionManager::new(teleop)).await?;
        Ok(())
    })
}
