//! Result persistence: per-episode rows, a JSON summary, cumulative
//! curves as CSV and a small SVG plot.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::metrics::{cumulative_curve, default_thresholds, CurvePoint};
use super::suite::{ResultRow, Summary, SuiteReport};
use super::HarnessError;
use crate::agents::AgentStats;

/// Placeholder written where a cumulative value is undefined.
pub const UNDEFINED: &str = "NA";

pub fn write_rows<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn load_rows(path: impl AsRef<Path>) -> Result<Vec<ResultRow>, HarnessError> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| HarnessError::NotFound(format!("{}: {e}", path.display())))?;
    read_rows(f)
}

#[derive(Debug, Serialize)]
struct SummaryDoc<'a> {
    agent: &'a str,
    #[serde(flatten)]
    summary: Summary,
    totals: AgentStats,
    curve: &'a [CurvePoint],
}

/// Write `results.csv`, `summary.json`, `curves.csv`, `curves.svg` and,
/// if asked, `trajectories.csv` into `dir`.
pub fn write_report(report: &SuiteReport, dir: impl AsRef<Path>, trajectories: bool) -> Result<(), HarnessError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let rows = report.rows();
    write_rows(&rows, std::fs::File::create(dir.join("results.csv"))?)?;
    let doc = SummaryDoc {
        agent: &report.agent,
        summary: report.summary,
        totals: report.total_stats(),
        curve: &report.curve,
    };
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&doc)?)?;
    write_curves(&rows, dir, 1.0)?;
    if trajectories {
        let mut w = csv::Writer::from_path(dir.join("trajectories.csv"))?;
        w.write_record(["scenario_id", "step", "x", "y", "theta", "action"])?;
        for r in &report.results {
            for t in &r.trajectory {
                w.write_record([
                    r.scenario_id.clone(),
                    t.step.to_string(),
                    t.x.to_string(),
                    t.y.to_string(),
                    t.theta.to_string(),
                    t.action.map(|a| a.as_str().to_string()).unwrap_or_default(),
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

/// Group rows by agent, preserving first-seen order of agents.
pub fn by_agent(rows: &[ResultRow]) -> Vec<(String, Vec<ResultRow>)> {
    let mut out: Vec<(String, Vec<ResultRow>)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(a, _)| *a == r.agent) {
            Some((_, v)) => v.push(r.clone()),
            None => out.push((r.agent.clone(), vec![r.clone()])),
        }
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |x| format!("{x:.6}"))
}

/// Cumulative curves for every agent in `rows`, as CSV text.
pub fn curves_csv(rows: &[ResultRow], step: f64) -> String {
    let thresholds = default_thresholds(rows, step);
    let mut s = String::from("agent,threshold,episodes,sr,spl,pace\n");
    for (agent, rs) in by_agent(rows) {
        for p in cumulative_curve(&rs, &thresholds) {
            let _ = writeln!(
                s,
                "{agent},{},{},{},{},{}",
                p.threshold,
                p.episodes,
                fmt_opt(p.sr),
                fmt_opt(p.spl),
                fmt_opt(p.pace)
            );
        }
    }
    s
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Three side-by-side panels (SR, SPL, pace against threshold), one
/// polyline per agent. Undefined points break the line.
pub fn curves_svg(rows: &[ResultRow], step: f64) -> String {
    let thresholds = default_thresholds(rows, step);
    let max_l = thresholds.last().copied().unwrap_or(1.0);
    let (pw, ph, pad) = (260.0, 200.0, 40.0);
    let width = 3.0 * (pw + pad) + pad;
    let height = ph + 2.0 * pad + 20.0 * by_agent(rows).len() as f64;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#);
    let groups = by_agent(rows);
    let curves: Vec<Vec<CurvePoint>> = groups.iter().map(|(_, rs)| cumulative_curve(rs, &thresholds)).collect();
    for (k, name) in ["SR", "SPL", "Pace"].iter().enumerate() {
        let x0 = pad + k as f64 * (pw + pad);
        let _ = writeln!(s, r#"<rect x="{x0}" y="{pad}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{name}</text>"#, x0 + pw / 2.0, pad - 8.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">L (m)</text>"#, x0 + pw / 2.0, pad + ph + 16.0);
        for (c, curve) in curves.iter().enumerate() {
            let mut seg = Vec::new();
            let flush = |seg: &mut Vec<String>, s: &mut String| {
                if !seg.is_empty() {
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                        COLORS[c % COLORS.len()],
                        seg.join(" ")
                    );
                    seg.clear();
                }
            };
            for p in curve {
                let v = [p.sr, p.spl, p.pace][k];
                match v {
                    Some(v) => seg.push(format!("{:.2},{:.2}", x0 + pw * p.threshold / max_l, pad + ph * (1.0 - v))),
                    None => flush(&mut seg, &mut s),
                }
            }
            flush(&mut seg, &mut s);
        }
    }
    for (c, (agent, _)) in groups.iter().enumerate() {
        let y = pad + ph + 34.0 + 20.0 * c as f64;
        let _ = writeln!(s, r#"<text x="{pad}" y="{y}" fill="{}">{agent}</text>"#, COLORS[c % COLORS.len()]);
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_curves(rows: &[ResultRow], dir: impl AsRef<Path>, step: f64) -> Result<(), HarnessError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("curves.csv"), curves_csv(rows, step))?;
    std::fs::write(dir.join("curves.svg"), curves_svg(rows, step))?;
    Ok(())
}

/// Per-scenario SPL terms, one column per agent, as Markdown.
pub fn side_by_side(rows: &[ResultRow]) -> String {
    let groups = by_agent(rows);
    let mut table: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
    for (k, (_, rs)) in groups.iter().enumerate() {
        for r in rs {
            table.entry(&r.scenario_id).or_insert_with(|| vec![None; groups.len()])[k] =
                Some(super::metrics::spl_term(r));
        }
    }
    let mut s = String::from("| scenario |");
    for (a, _) in &groups {
        let _ = write!(s, " {a} |");
    }
    s.push_str("\n|---|");
    s.push_str(&"---|".repeat(groups.len()));
    s.push('\n');
    for (id, vals) in table {
        let _ = write!(s, "| {id} |");
        for v in vals {
            let _ = write!(s, " {} |", v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}")));
        }
        s.push('\n');
    }
    s
}

/// Summary lines for every agent in `rows`.
pub fn summaries(rows: &[ResultRow]) -> Result<Vec<(String, Summary)>, HarnessError> {
    by_agent(rows).into_iter().map(|(a, rs)| Ok((a, Summary::of(&rs)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::episode::EndReason;

    fn row(id: &str, agent: &str, s: u8, l: f64, p: f64) -> ResultRow {
        ResultRow {
            scenario_id: id.into(),
            agent: agent.into(),
            success: s,
            shortest: l,
            path_length: p,
            time_fraction: if s == 1 { 0.2 } else { 1.0 },
            steps: 100,
            budget: 500,
            reason: if s == 1 { EndReason::Reached } else { EndReason::TimedOut },
        }
    }

    #[test]
    fn rows_round_trip() {
        let rows = vec![row("a", "blind", 1, 10.0, 20.0), row("b", "blind", 0, 2.0, 5.0)];
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("scenario_id,agent,success,shortest,path_length,time_fraction,steps,budget,reason\n"));
        assert!(text.contains("a,blind,1,10.0,20.0,0.2,100,500,Reached"));
        assert_eq!(read_rows(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn curves_mark_undefined() {
        let rows = vec![row("a", "blind", 1, 2.5, 3.0), row("a", "human", 1, 2.5, 2.5)];
        let csv = curves_csv(&rows, 1.0);
        assert!(csv.contains("blind,1,0,NA,NA,NA"));
        assert!(csv.contains("human,3,1,1.000000,1.000000,0.800000"));
        let svg = curves_svg(&rows, 1.0);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 6);
    }

    #[test]
    fn side_by_side_keys_rows() {
        let rows = vec![row("a", "blind", 1, 10.0, 20.0), row("a", "human", 1, 10.0, 10.0), row("b", "human", 0, 1.0, 1.0)];
        let t = side_by_side(&rows);
        assert!(t.contains("| a | 0.500 | 1.000 |"));
        assert!(t.contains("| b | - | 0.000 |"));
        let s = summaries(&rows).unwrap();
        assert_eq!(s[0].1.spl, 0.5);
    }
}
