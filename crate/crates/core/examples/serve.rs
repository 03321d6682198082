//! Start the HTTP service in-process and walk from K to Q through it.
//!
//!     cargo run --example serve

use std::sync::Arc;

use hexnav::map::clinic;
use hexnav::service::{MoveRequest, Service};
use hexnav::HexDirection;

fn main() {
    let service = Arc::new(Service::new([clinic()]));
    let walk = service.create_walk("clinic", None).unwrap();
    for key in ["1", "7", "#"] {
        service.post_key(walk, key).unwrap();
    }
    // follow the cues: each move is one hop in the instructed direction
    let mut heading = HexDirection::SE;
    for _ in 0..10 {
        let view = service.post_move(walk, MoveRequest::Hop { direction: heading }).unwrap();
        for c in &view.cues {
            println!("[{}] {}", c.seq, c.text);
        }
        if view.state.label() == "arrived" {
            break;
        }
        if let (Some(h), Some(cue)) = (view.state.heading(), view.cues.last()) {
            let instr = hexnav::routing::Instruction::from_cue_text(&cue.text).unwrap();
            heading = instr.apply(h).unwrap_or(h);
        }
    }

    // the same service over HTTP; stop with Ctrl-C
    if std::env::args().any(|a| a == "--listen") {
        let addr = "127.0.0.1:8080".parse().unwrap();
        println!("listening on http://{addr}");
        tokio::runtime::Runtime::new()
            .unwrap()
            .block_on(hexnav::service::serve(service, addr))
            .unwrap();
    }
}
