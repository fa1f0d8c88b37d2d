//! Wire messages. Each message is one line of JSON; see `PROTOCOL.md`.

use navbench_core::agents::Observation;
use navbench_core::harness::{EndReason, EpisodeResult};
use navbench_core::world::{Action, GoalVector, Pose};
use serde::{Deserialize, Serialize};

/// What the operator sees before choosing an action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsMessage {
    pub scenario_id: String,
    /// Echo this in the next action.
    pub step: usize,
    /// Ray ranges, left to right. Invalid rays hold `max_range`.
    pub depth: Vec<f64>,
    pub valid: Vec<bool>,
    pub fov: f64,
    pub max_range: f64,
    pub goal: GoalVector,
    pub budget_left: usize,
    /// True pose, sent only when the server runs with the debug overlay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<Pose>,
}

impl ObsMessage {
    pub fn new(scenario_id: &str, obs: &Observation, pose: Option<Pose>) -> Self {
        let (depth, valid, fov, max_range) = match &obs.depth {
            Some(d) => (d.ranges.clone(), d.valid.clone(), d.fov, d.max_range),
            None => (Vec::new(), Vec::new(), 0.0, 0.0),
        };
        Self {
            scenario_id: scenario_id.to_string(),
            step: obs.step_index,
            depth,
            valid,
            fov,
            max_range,
            goal: obs.goal,
            budget_left: obs.budget_remaining,
            pose,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionMessage {
    pub action: Action,
    /// The `step` of the observation this action answers.
    pub step: usize,
}

/// End-of-episode report, with the per-episode metric terms computed by
/// the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub scenario_id: String,
    pub success: bool,
    pub shortest: f64,
    pub path_length: f64,
    pub spl: f64,
    pub pace: f64,
    pub reason: EndReason,
    pub result: EpisodeResult,
}

impl From<&EpisodeResult> for EpisodeSummary {
    fn from(r: &EpisodeResult) -> Self {
        Self {
            scenario_id: r.scenario_id.clone(),
            success: r.success,
            shortest: r.shortest,
            path_length: r.path_length,
            spl: r.spl_term(),
            pace: r.pace_term(),
            reason: r.reason,
            result: r.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Obs(ObsMessage),
    Summary(Box<EpisodeSummary>),
    /// The echoed step was stale; resend against `expected_step`.
    Rejected { expected_step: usize, reason: String },
    /// Malformed message, unknown action, or the session is not running.
    Error { message: String },
    /// Every scenario in the session has been played.
    Finished { episodes: usize },
}

impl ServerMessage {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_lines() {
        let m: ActionMessage = serde_json::from_str(r#"{"action":"left","step":7}"#).unwrap();
        assert_eq!(m, ActionMessage { action: Action::TurnLeft, step: 7 });
        assert!(serde_json::from_str::<ActionMessage>(r#"{"action":"jump","step":7}"#).is_err());
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"action":"left","step":7}"#);
    }

    #[test]
    fn server_messages_are_tagged_single_lines() {
        let m = ServerMessage::Rejected { expected_step: 3, reason: "stale".into() };
        let line = m.to_line();
        assert_eq!(line, r#"{"type":"rejected","expected_step":3,"reason":"stale"}"#);
        assert_eq!(serde_json::from_str::<ServerMessage>(&line).unwrap(), m);
        let obs = ServerMessage::Obs(ObsMessage {
            scenario_id: "a".into(),
            step: 0,
            depth: vec![1.0, 4.0],
            valid: vec![true, false],
            fov: 1.5,
            max_range: 4.0,
            goal: GoalVector { distance: 2.0, bearing: -0.5 },
            budget_left: 500,
            pose: None,
        });
        let line = obs.to_line();
        assert!(!line.contains('\n') && !line.contains("pose"));
        assert!(line.starts_with(r#"{"type":"obs","scenario_id":"a","step":0"#));
        assert_eq!(serde_json::from_str::<ServerMessage>(&line).unwrap(), obs);
    }
}
