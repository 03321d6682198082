//! Record a session transcript as JSON lines, replay it, then show how a
//! tampered copy is caught.
//!
//!     cargo run --example replay_transcript

use std::sync::Arc;

use hexnav::map::clinic;
use hexnav::session::{read_transcript, verify_transcript, write_transcript};
use hexnav::sim::{run_trial, ReaderModel, WalkerModel};

fn main() {
    let map = Arc::new(clinic());
    let walker = WalkerModel { compliance: 0.7, seed: 3, ..Default::default() };
    let trial = run_trial(map.clone(), 1, 17, &walker, &ReaderModel::default(), 70).unwrap();

    let mut jsonl = Vec::new();
    write_transcript(&mut jsonl, &trial.transcript).unwrap();
    let text = String::from_utf8(jsonl).unwrap();
    println!("{} entries, first: {}", trial.transcript.len(), text.lines().next().unwrap());

    let entries = read_transcript(text.as_bytes()).unwrap();
    println!("replay: {:?}", verify_transcript(map.clone(), &entries).unwrap());

    let tampered = text.replacen("slowly.", "quickly.", 1);
    let entries = read_transcript(tampered.as_bytes()).unwrap();
    match verify_transcript(map, &entries).unwrap() {
        Ok(()) => println!("tampered copy replayed cleanly?"),
        Err(d) => println!("tampered copy: {d}"),
    }
}
