//! Shortest route between two tags and the cue heard at each one.
//!
//!     cargo run --example route -- A Q

use hexnav::map::clinic;
use hexnav::routing::{plan_instruction, shortest_path};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (from, to) = match args.as_slice() {
        [a, b] => (a.as_str(), b.as_str()),
        _ => ("A", "Q"),
    };
    let map = clinic();
    let src = map.resolve(from).expect("unknown source tag");
    let dst = map.resolve(to).expect("unknown destination tag");
    let path = shortest_path(&map, src, dst).unwrap();
    let names: Vec<&str> = path.nodes.iter().map(|&t| map.tag_name(t).unwrap()).collect();
    println!("{} -> {}: {} (cost {})", from, to, names.join(" "), path.cost);

    for w in path.nodes.windows(2) {
        let heading = map.direction_between(w[0], w[1]).unwrap();
        let cue = plan_instruction(&map, w[1], heading, dst).unwrap();
        println!("  arriving at {} heading {heading}: {}", map.tag_name(w[1]).unwrap(), cue.cue_text());
    }
}
