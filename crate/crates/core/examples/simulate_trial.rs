//! One seeded walker trial from A to Q, with the scan-by-scan transcript.
//!
//!     cargo run --example simulate_trial -- 0.7 42

use std::sync::Arc;

use hexnav::map::clinic;
use hexnav::sim::{run_trial, ReaderModel, WalkerModel};

fn main() {
    let mut args = std::env::args().skip(1);
    let compliance = args.next().map_or(1.0, |s| s.parse().expect("compliance"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));
    let map = Arc::new(clinic());
    let walker = WalkerModel { compliance, seed, ..Default::default() };
    let t = run_trial(map.clone(), 1, 17, &walker, &ReaderModel::default(), 70).unwrap();

    for entry in &t.transcript {
        for cue in &entry.cues {
            println!("{:>7.2}s  {:<8} {}", cue.timestamp, entry.event, cue.text);
        }
    }
    let names: Vec<&str> = t.path.iter().map(|&id| map.tag_name(id).unwrap()).collect();
    println!("path: {}", names.join(" "));
    println!(
        "arrived={} hops={} scans={} elapsed={:.2}s velocity={:.2}cm/s",
        t.arrived,
        t.hops,
        t.scans,
        t.elapsed_s,
        t.effective_velocity_mps() * 100.0
    );
}
