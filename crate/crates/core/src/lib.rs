//! Indoor wayfinding over passive floor tags laid out on a triangular
//! lattice.
//!
//! A [`RoomMap`] describes the tags and which of them can be walked between.
//! [`routing`] plans shortest routes and turns the next hop into a
//! clock-face cue relative to the walker's heading. [`NavSession`] is the
//! device's event loop: keypad entry, heading acquisition from two
//! consecutive scans, and a freshly planned cue at every scan. [`sim`]
//! walks a seeded virtual pedestrian through a session, and [`service`]
//! exposes live sessions over HTTP for interactive walkthroughs.
//!
//! ```
//! use std::sync::Arc;
//! use hexnav::{map, NavSession, SessionEvent};
//!
//! let clinic = Arc::new(map::clinic());
//! let mut session = NavSession::new(clinic.clone());
//! for ev in SessionEvent::enter_destination(17) {
//!     session.handle_event(ev).unwrap();
//! }
//! session.handle_event(SessionEvent::Scan(1)).unwrap();
//! let cues = session.handle_event(SessionEvent::Scan(2)).unwrap();
//! // B is north of A; the next hop toward Q lies north-east
//! assert_eq!(cues[0].text, "Turn to your 2 o'clock and keep walking slowly.");
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod hex;
pub mod map;
pub mod routing;
pub mod service;
pub mod session;
pub mod sim;

pub use error::{Error, Result};
pub use hex::HexDirection;
pub use map::{load_map, tag_density, validate_map, RoomMap, TagId};
pub use routing::{
    infer_heading, instruction_for, plan_instruction, relative_turn, shortest_path, Instruction,
    PathResult,
};
pub use session::{Cue, CueKind, KeySymbol, NavSession, SessionEvent, SessionState};
pub use sim::{
    battery_runtime, energy_consumption, run_batch, run_trial, PowerProfile, ReaderModel,
    Scenario, TrialResult, WalkerModel,
};
