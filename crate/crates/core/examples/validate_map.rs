//! Load the bundled clinic map, then break it and show what validation
//! reports.
//!
//!     cargo run --example validate_map

use hexnav::map::{clinic, tag_density, RoomMap};
use hexnav::validate_map;

fn main() {
    let map = clinic();
    println!("{}: {} tags, {} edges, spacing {} m", map.name(), map.len(), map.edges().len(), map.spacing_m());
    println!("density at this spacing: {:.2} tags per 10 m2", tag_density(map.spacing_m()).unwrap());
    for n in map.nodes().iter().filter(|n| n.landmark.is_some()) {
        println!("  {} ({}): {}", n.name, n.id, n.landmark.as_deref().unwrap());
    }

    // nudge one tag off the lattice and give an edge an illegal weight
    let mut file = map.to_file().clone();
    file.nodes[3].x_m += 0.15;
    file.edges[0].weight = 3;
    let broken = RoomMap::from_file(file);
    println!("after editing:");
    for v in validate_map(&broken) {
        println!("  {v}");
    }
}
