//! Human teleoperation: sessions that step the same world and harness code
//! as the agents, exposed over HTTP and a per-session websocket stream of
//! line-delimited JSON messages.

mod protocol;
mod server;
mod session;

pub use protocol::{ActionMessage, EpisodeSummary, ObsMessage, ServerMessage};
pub use server::{router, serve, AgentSummary, CreateSession, ResultsDoc};
pub use session::{SessionInfo, SessionManager, SessionStatus, TeleopConfig, TeleopError};
