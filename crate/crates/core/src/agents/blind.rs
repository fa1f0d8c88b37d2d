use super::{Observation, Policy, Privileged};
use crate::locomotion::{steer, ControllerConfig};
use crate::world::Action;

/// Turn toward the goal and drive straight at it. Uses nothing but the
/// goal vector.
pub fn blind_policy(obs: &Observation, cfg: &ControllerConfig) -> Action {
    if obs.goal.distance < cfg.done_threshold {
        Action::Done
    } else {
        steer(obs.goal.bearing, cfg.phi)
    }
}

#[derive(Debug, Clone)]
pub struct BlindAgent {
    cfg: ControllerConfig,
}

impl BlindAgent {
    pub fn new(cfg: ControllerConfig) -> Self {
        Self { cfg }
    }
}

impl Policy for BlindAgent {
    fn name(&self) -> &str {
        "blind"
    }

    fn act(&mut self, obs: &Observation, _: &Privileged) -> Action {
        blind_policy(obs, &self.cfg)
    }
}
