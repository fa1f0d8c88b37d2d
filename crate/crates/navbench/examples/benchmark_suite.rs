//! A small benchmark end to end: generate maps and scenarios, run every
//! agent, and write the reports and cumulative curves.
//!
//! `cargo run --release --example benchmark_suite -- [out_dir]`

use std::sync::Arc;

use navbench::agents::AgentConfig;
use navbench::harness::{
    generate_scenarios, paired_bootstrap, run_suite, side_by_side, write_curves, write_report, LoadedScenario, ScenarioGenConfig,
    WorldConfig,
};
use navbench::localization::LocalizerConfig;
use navbench::world::{generate_map, GeneratorConfig, WorldMap};

fn main() {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("navbench-suite"), Into::into);
    let maps: Vec<(String, Arc<WorldMap>)> = (0..4)
        .map(|i| (format!("m{i}.txt"), Arc::new(generate_map(100 + i, &GeneratorConfig::furnished()).unwrap())))
        .collect();
    let refs: Vec<_> = maps.iter().map(|(n, m)| (n.clone(), m.as_ref())).collect();
    let gen = generate_scenarios(&refs, 5, 2, &ScenarioGenConfig::default());
    let cfg = WorldConfig::default();
    let tasks: Vec<LoadedScenario> = gen
        .scenarios
        .into_iter()
        .map(|s| {
            let m = maps.iter().find(|(n, _)| *n == s.map).unwrap().1.clone();
            LoadedScenario::new(s, m, &cfg.body).unwrap()
        })
        .collect();

    let agents = [
        AgentConfig::blind(),
        AgentConfig::classic(LocalizerConfig::perfect()),
        AgentConfig::classic(LocalizerConfig::odometry(0.02, 0.0)),
        AgentConfig::classic(LocalizerConfig::scan_matcher()),
        AgentConfig::belief(),
    ];
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    println!("{:>18} {:>5} {:>5} {:>5}", "agent", "SR", "SPL", "pace");
    for a in &agents {
        let report = run_suite(a, &tasks, &cfg, threads, 0).unwrap();
        let s = report.summary;
        println!("{:>18} {:.3} {:.3} {:.3}", report.agent, s.sr, s.spl, s.pace);
        write_report(&report, out.join(&report.agent), false).unwrap();
        rows.extend(report.rows());
        reports.push(report);
    }

    // Paired comparison on identical scenarios.
    let (lo, hi) = paired_bootstrap(&reports[1].spl_terms(), &reports[0].spl_terms(), 5000, 0.95, 1);
    println!("SPL(classic-perfect) - SPL(blind): 95% interval [{lo:.3}, {hi:.3}]");

    write_curves(&rows, &out, 1.0).unwrap();
    std::fs::write(out.join("side_by_side.md"), side_by_side(&rows)).unwrap();
    println!("reports in {}", out.display());
}
