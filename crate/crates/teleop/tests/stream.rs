//! End-to-end over a real socket: a scripted client replays an agent's
//! recorded actions and must get the same episode back.

use futures::{SinkExt, StreamExt};
use navbench_core::agents::AgentConfig;
use navbench_core::harness::{generate_scenarios, load_suite, replay_actions, run_agent, save_scenarios, ScenarioGenConfig};
use navbench_core::world::{generate_map, save_map, Action, GeneratorConfig};
use navbench_teleop::{serve, ActionMessage, ServerMessage, SessionManager, TeleopConfig};
use std::time::{Duration, Instant};
use tokio_tungstenite::tungstenite::Message;

type Socket = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn start(cfg: TeleopConfig) -> (String, SessionManager) {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let m = SessionManager::new(cfg);
    tokio::spawn(serve(listener, m.clone()));
    (format!("{addr}"), m)
}

async fn recv(ws: &mut Socket) -> Vec<ServerMessage> {
    loop {
        match ws.next().await.expect("stream open").unwrap() {
            Message::Text(t) => return t.lines().map(|l| serde_json::from_str(l).unwrap()).collect(),
            _ => continue,
        }
    }
}

async fn send(ws: &mut Socket, action: Action, step: usize) {
    let line = serde_json::to_string(&ActionMessage { action, step }).unwrap();
    ws.send(Message::Text(line.into())).await.unwrap();
}

/// Replies arrive one frame per message; collect until an observation or
/// `Finished` closes the turn.
async fn turn(ws: &mut Socket) -> Vec<ServerMessage> {
    let mut out = Vec::new();
    loop {
        let batch = recv(ws).await;
        let done = batch.iter().any(|m| {
            matches!(m, ServerMessage::Obs(_) | ServerMessage::Finished { .. } | ServerMessage::Rejected { .. } | ServerMessage::Error { .. })
        });
        out.extend(batch);
        if done {
            return out;
        }
    }
}

fn furnished_suite(dir: &std::path::Path, n: usize) -> String {
    let map = generate_map(42, &GeneratorConfig::furnished()).unwrap();
    save_map(&map, dir.join("flat.txt")).unwrap();
    let gen = generate_scenarios(&[("flat.txt".into(), &map)], n, 5, &ScenarioGenConfig::default());
    let path = dir.join("suite.csv");
    save_scenarios(&gen.scenarios, &path).unwrap();
    path.to_string_lossy().into_owned()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn replayed_blind_actions_match_the_in_process_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = furnished_suite(dir.path(), 3);
    let cfg = TeleopConfig { min_interval: Duration::ZERO, ..TeleopConfig::default() };
    let tasks = load_suite(&path, &cfg.world.body).unwrap();
    let (addr, m) = start(cfg.clone()).await;
    let id = m.create(&path, "scripted").unwrap();
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/{id}/stream")).await.unwrap();
    let mut pending = recv(&mut ws).await;

    for task in &tasks {
        let (reference, _) = run_agent(&AgentConfig::blind(), task, &cfg.world, 0);
        let actions: Vec<Action> = reference.trajectory.iter().filter_map(|s| s.action).collect();
        let mut summary = None;
        for (step, &a) in actions.iter().enumerate() {
            match pending.last() {
                Some(ServerMessage::Obs(o)) => {
                    assert_eq!(o.step, step);
                    assert_eq!(o.scenario_id, task.scenario.id);
                    assert!(o.pose.is_none());
                }
                other => panic!("expected an observation, got {other:?}"),
            }
            send(&mut ws, a, step).await;
            pending = turn(&mut ws).await;
            if let Some(ServerMessage::Summary(s)) = pending.first() {
                summary = Some(s.clone());
            }
        }
        // The agent's final Done is part of its trajectory unless the
        // budget ran out first.
        let summary = match summary {
            Some(s) => s,
            None => {
                send(&mut ws, Action::Done, actions.len()).await;
                pending = turn(&mut ws).await;
                match pending.first() {
                    Some(ServerMessage::Summary(s)) => s.clone(),
                    other => panic!("expected a summary, got {other:?}"),
                }
            }
        };
        assert_eq!(summary.result, replay_actions(task, &cfg.world, "scripted", &actions));
        let mut relabelled = reference.clone();
        relabelled.agent = "scripted".into();
        assert_eq!(summary.result, relabelled);
    }
    assert_eq!(pending.last(), Some(&ServerMessage::Finished { episodes: tasks.len() }));
    let rows = m.results();
    assert_eq!(rows.len(), tasks.len());
    assert!(rows.iter().all(|r| r.agent == "scripted"));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn stale_steps_are_rejected_and_the_client_can_resync() {
    let dir = tempfile::tempdir().unwrap();
    let path = furnished_suite(dir.path(), 1);
    let (addr, m) = start(TeleopConfig { min_interval: Duration::ZERO, ..TeleopConfig::default() }).await;
    let id = m.create(&path, "h").unwrap();
    let url = format!("ws://{addr}/sessions/{id}/stream");
    let (mut ws, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    recv(&mut ws).await;
    send(&mut ws, Action::TurnLeft, 0).await;
    turn(&mut ws).await;
    send(&mut ws, Action::TurnLeft, 0).await;
    assert!(matches!(turn(&mut ws).await[..], [ServerMessage::Rejected { expected_step: 1, .. }]));
    ws.send(Message::Text(r#"{"action":"jump","step":1}"#.into())).await.unwrap();
    assert!(matches!(turn(&mut ws).await[..], [ServerMessage::Error { .. }]));
    assert_eq!(m.info(&id).unwrap().step, Some(1));

    // A reconnecting client gets the current observation, not a new episode.
    drop(ws);
    let (mut ws, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    match &recv(&mut ws).await[..] {
        [ServerMessage::Obs(o)] => assert_eq!(o.step, 1),
        other => panic!("{other:?}"),
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn action_rate_is_capped_and_the_world_waits() {
    let dir = tempfile::tempdir().unwrap();
    let path = furnished_suite(dir.path(), 1);
    let (addr, m) = start(TeleopConfig { min_interval: Duration::from_millis(100), ..TeleopConfig::default() }).await;
    let id = m.create(&path, "h").unwrap();
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/{id}/stream")).await.unwrap();
    recv(&mut ws).await;

    // Nothing moves without an action.
    tokio::time::sleep(Duration::from_millis(250)).await;
    assert_eq!(m.info(&id).unwrap().step, Some(0));

    // Five actions in one frame still take at least four intervals.
    let t0 = Instant::now();
    let lines: Vec<String> = (0..5)
        .map(|k| serde_json::to_string(&ActionMessage { action: Action::TurnRight, step: k }).unwrap())
        .collect();
    ws.send(Message::Text(lines.join("\n").into())).await.unwrap();
    for _ in 0..5 {
        turn(&mut ws).await;
    }
    assert!(t0.elapsed() >= Duration::from_millis(400), "{:?}", t0.elapsed());
    assert_eq!(m.info(&id).unwrap().step, Some(5));
}

#[tokio::test]
async fn unknown_session_stream_is_refused() {
    let (addr, _) = start(TeleopConfig::default()).await;
    assert!(tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/nope/stream")).await.is_err());
}
