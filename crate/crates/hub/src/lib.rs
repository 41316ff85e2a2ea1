//! Hub: the authoritative server that serializes operator gestures and
//! display registrations into one ordered stream of world deltas.

pub mod client;
pub mod clock;
pub mod config;
pub mod engine;
pub mod protocol;
pub mod server;

pub use clock::{Clock, VirtualClock, WallClock};
pub use config::HubConfig;
pub use engine::{Engine, EngineConfig, EventOutcome, HubError, Outbound, Role, Session};
pub use protocol::{decode, encode, Envelope, ErrorCode, FrameDecoder, Message, ProtocolError};
pub use server::{serve, ClockMode, ServerHandle, ServerOptions};
