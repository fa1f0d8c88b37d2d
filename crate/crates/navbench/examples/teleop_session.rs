//! A remote operator over the teleop protocol. The server runs in-process;
//! the "operator" is a script that reads each observation line and answers
//! with the blind policy, exactly as a browser client would with keys.

use std::time::Duration;

use futures::{SinkExt, StreamExt};
use navbench::agents::{blind_policy, Observation};
use navbench::harness::{generate_scenarios, save_scenarios, ScenarioGenConfig};
use navbench::locomotion::ControllerConfig;
use navbench::localization::BodyDelta;
use navbench::teleop::{serve, ActionMessage, ServerMessage, SessionManager, TeleopConfig};
use navbench::world::{generate_map, save_map, GeneratorConfig};
use tokio_tungstenite::tungstenite::Message;

#[tokio::main]
async fn main() {
    let dir = tempfile::tempdir().unwrap();
    let map = generate_map(9, &GeneratorConfig::furnished()).unwrap();
    save_map(&map, dir.path().join("flat.txt")).unwrap();
    let gen = generate_scenarios(&[("flat.txt".into(), &map)], 2, 3, &ScenarioGenConfig::default());
    let suite = dir.path().join("suite.csv");
    save_scenarios(&gen.scenarios, &suite).unwrap();

    // Faster than the 10 Hz human cap so the demo finishes quickly.
    let cfg = TeleopConfig { min_interval: Duration::from_millis(2), ..TeleopConfig::default() };
    let manager = SessionManager::new(cfg);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve(listener, manager.clone()));

    let id = manager.create(suite.to_str().unwrap(), "scripted-operator").unwrap();
    println!("session {id}: {:?}", manager.info(&id).unwrap().status);
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/{id}/stream")).await.unwrap();
    let controller = ControllerConfig { p_random: 0.0, ..ControllerConfig::default() };

    while let Some(Ok(frame)) = ws.next().await {
        let Message::Text(text) = frame else { continue };
        for line in text.lines() {
            match serde_json::from_str::<ServerMessage>(line).unwrap() {
                ServerMessage::Obs(o) => {
                    if o.step == 0 {
                        println!("{}: goal {:.2} m away, {} depth rays", o.scenario_id, o.goal.distance, o.depth.len());
                    }
                    let obs = Observation::new(None, o.goal, BodyDelta::default(), None, o.step, o.budget_left);
                    let reply = ActionMessage { action: blind_policy(&obs, &controller), step: o.step };
                    ws.send(Message::Text(serde_json::to_string(&reply).unwrap().into())).await.unwrap();
                }
                ServerMessage::Summary(s) => {
                    println!("  {} after {} steps: success {}, SPL {:.3}, pace {:.3}", s.scenario_id, s.result.steps, s.success, s.spl, s.pace)
                }
                ServerMessage::Finished { episodes } => {
                    println!("finished {episodes} episodes");
                    let rows = manager.results();
                    println!("results store holds {} rows for {}", rows.len(), rows[0].agent);
                    return;
                }
                other => println!("{other:?}"),
            }
        }
    }
}
