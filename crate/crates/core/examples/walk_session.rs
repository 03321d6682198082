//! Drive a navigation session by hand: key in a destination, scan a few
//! tags (including a wrong turn) and print every cue.
//!
//!     cargo run --example walk_session

use std::sync::Arc;

use hexnav::map::clinic;
use hexnav::{NavSession, SessionEvent};

fn main() {
    let map = Arc::new(clinic());
    let mut session = NavSession::new(map.clone());
    let mut events = SessionEvent::enter_destination(17);
    // A, B, then a wrong turn to C, back to B and on along the route
    events.extend([1, 2, 3, 2, 5, 9, 12, 15, 14, 17].map(SessionEvent::Scan));
    events.insert(4, SessionEvent::key('A').unwrap());

    for event in events {
        let cues = session.handle_event(event).unwrap();
        let texts: Vec<&str> = cues.iter().map(|c| c.text.as_str()).collect();
        println!("{:<8} {:<22} {}", event.to_string(), session.state().label(), texts.join(" | "));
    }
}
