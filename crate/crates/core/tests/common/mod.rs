//! Test-only oracles and fixtures. Nothing here calls into the routing code
//! it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use hexnav::map::{Bounds, Edge, MapFile, RoomMap, TagNode};
use hexnav::{HexDirection, TagId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SPACING: f64 = 0.64;

/// Axial steps in clockwise order N, NE, SE, S, SW, NW, with basis
/// vectors q = NE and r = N.
const AXIAL: [(i32, i32); 6] = [(0, 1), (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1)];

fn axial_to_xy(q: i32, r: i32) -> (f64, f64) {
    let h = 3f64.sqrt() / 2.0;
    (q as f64 * h * SPACING, (q as f64 * 0.5 + r as f64) * SPACING)
}

/// A random connected lattice map with `2..=max_nodes` tags. Tag ids are a
/// shuffled range so that id order does not follow geometry.
pub fn random_lattice_map(seed: u64, max_nodes: usize, weight2_prob: f64, extra_edge_prob: f64) -> RoomMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_nodes);
    let mut cells: Vec<(i32, i32)> = vec![(0, 0)];
    let mut tree: Vec<(usize, usize)> = Vec::new();
    while cells.len() < n {
        let from = rng.gen_range(0..cells.len());
        let (dq, dr) = AXIAL[rng.gen_range(0..6)];
        let cell = (cells[from].0 + dq, cells[from].1 + dr);
        if !cells.contains(&cell) {
            cells.push(cell);
            tree.push((from, cells.len() - 1));
        }
    }
    let mut ids: Vec<TagId> = (1..=n as TagId).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }

    let mut pairs: BTreeSet<(usize, usize)> = tree.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    for i in 0..n {
        for j in i + 1..n {
            let d = (cells[j].0 - cells[i].0, cells[j].1 - cells[i].1);
            if AXIAL.contains(&d) && rng.gen_bool(extra_edge_prob) {
                pairs.insert((i, j));
            }
        }
    }

    let xy: Vec<(f64, f64)> = cells.iter().map(|&(q, r)| axial_to_xy(q, r)).collect();
    let min_x = xy.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let min_y = xy.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max_x = xy.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let max_y = xy.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let nodes = (0..n)
        .map(|i| TagNode {
            id: ids[i],
            name: format!("T{}", ids[i]),
            x_m: xy[i].0 - min_x + 0.2,
            y_m: xy[i].1 - min_y + 0.2,
            landmark: None,
        })
        .collect();
    let mut edges: Vec<Edge> = pairs
        .into_iter()
        .map(|(i, j)| Edge {
            a: ids[i].min(ids[j]),
            b: ids[i].max(ids[j]),
            weight: if rng.gen_bool(weight2_prob) { 2 } else { 1 },
        })
        .collect();
    edges.sort_by_key(|e| (e.a, e.b));
    RoomMap::from_file(MapFile {
        name: format!("random-{seed}"),
        spacing_m: SPACING,
        bounds: Bounds { width_m: max_x - min_x + 0.4, height_m: max_y - min_y + 0.4 },
        nodes,
        edges,
    })
}

/// Undirected weighted adjacency built straight from the edge list.
pub fn edge_table(map: &RoomMap) -> BTreeMap<TagId, Vec<(TagId, u32)>> {
    let mut adj: BTreeMap<TagId, Vec<(TagId, u32)>> = BTreeMap::new();
    for n in map.nodes() {
        adj.entry(n.id).or_default();
    }
    for e in map.edges() {
        adj.entry(e.a).or_default().push((e.b, e.weight));
        adj.entry(e.b).or_default().push((e.a, e.weight));
    }
    adj
}

/// Exhaustive enumeration of simple paths. Returns the minimal cost and,
/// among minimal-cost paths, the lexicographically smallest id sequence.
pub fn brute_force_path(map: &RoomMap, src: TagId, dst: TagId) -> Option<(u32, Vec<TagId>)> {
    let adj = edge_table(map);
    let mut best: Option<(u32, Vec<TagId>)> = None;
    let mut stack = vec![src];
    fn dfs(
        adj: &BTreeMap<TagId, Vec<(TagId, u32)>>,
        dst: TagId,
        stack: &mut Vec<TagId>,
        cost: u32,
        best: &mut Option<(u32, Vec<TagId>)>,
    ) {
        let here = *stack.last().unwrap();
        if here == dst {
            let better = match best {
                None => true,
                Some((c, p)) => cost < *c || (cost == *c && stack.as_slice() < p.as_slice()),
            };
            if better {
                *best = Some((cost, stack.clone()));
            }
            return;
        }
        for &(next, w) in &adj[&here] {
            if !stack.contains(&next) {
                stack.push(next);
                dfs(adj, dst, stack, cost + w, best);
                stack.pop();
            }
        }
    }
    dfs(&adj, dst, &mut stack, 0, &mut best);
    best
}

/// Clock-face sentence from plain angle arithmetic on the two bearings'
/// unit vectors.
pub fn clock_face_oracle(heading: HexDirection, next: HexDirection) -> String {
    let (hx, hy) = heading.unit_vector();
    let (nx, ny) = next.unit_vector();
    // positive = clockwise
    let cw_deg = -(hx * ny - hy * nx).atan2(hx * nx + hy * ny).to_degrees();
    let hour = ((cw_deg / 30.0).round() as i32).rem_euclid(12);
    match hour {
        0 => "Walk straight ahead.".to_string(),
        6 => "Make U-turn".to_string(),
        h => format!("Turn to your {h} o'clock and keep walking slowly."),
    }
}

pub const TABLE_I: [(&str, &str); 10] = [
    ("A", "Office number 1 is located here."),
    ("C", "This is the women's bathroom."),
    ("I", "This is the doctor's office."),
    ("J", "This is office number 2."),
    ("M", "There is a coffee table around."),
    ("N", "This is the waiting area."),
    ("Q", "This is the reception table."),
    ("R", "There is a round table here."),
    ("V", "This is the vending machine."),
    ("X", "The receptionist is here."),
];

pub const INSTRUCTION_SENTENCES: [&str; 7] = [
    "Walk straight ahead.",
    "Turn to your 2 o'clock and keep walking slowly.",
    "Turn to your 4 o'clock and keep walking slowly.",
    "Make U-turn",
    "Turn to your 8 o'clock and keep walking slowly.",
    "Turn to your 10 o'clock and keep walking slowly.",
    "You have arrived at your destination.",
];

use hexnav::{NavSession, SessionEvent, SessionState};

/// Picks the next fuzz event for `session`, biased toward reaching every
/// state: destination macros, adjacent scans and the odd stray key.
pub fn fuzz_events(rng: &mut impl Rng, session: &NavSession) -> Vec<SessionEvent> {
    let map = session.map();
    let ids: Vec<TagId> = map.nodes().iter().map(|n| n.id).collect();
    let key = |c: char| SessionEvent::key(c).unwrap();
    let r: f64 = rng.gen();
    if r < 0.05 {
        vec![key('*')]
    } else if r < 0.10 {
        vec![key('A')]
    } else if r < 0.17 {
        vec![key(char::from(b'0' + rng.gen_range(0..10)))]
    } else if r < 0.21 {
        vec![key('#')]
    } else if r < 0.33 {
        // mostly valid destinations, sometimes ids past the end of the map
        let dst = rng.gen_range(1..=ids.len() as TagId + 4);
        SessionEvent::enter_destination(dst)
    } else if r < 0.80 {
        let tag = match session.state().position() {
            Some(p) if rng.gen_bool(0.85) => {
                let nb = map.neighbors(p).unwrap();
                if nb.is_empty() { p } else { nb[rng.gen_range(0..nb.len())].tag }
            }
            _ => ids[rng.gen_range(0..ids.len())],
        };
        vec![SessionEvent::Scan(tag)]
    } else {
        vec![SessionEvent::Scan(ids[rng.gen_range(0..ids.len())])]
    }
}

/// A random event sequence of roughly `len` events.
pub fn fuzz_sequence(seed: u64, map: std::sync::Arc<RoomMap>, len: usize) -> Vec<SessionEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut session = NavSession::new(map);
    let mut out = Vec::new();
    while out.len() < len {
        for ev in fuzz_events(&mut rng, &session) {
            session.handle_event(ev).unwrap();
            out.push(ev);
        }
    }
    out
}

pub fn is_tracking(state: &SessionState) -> bool {
    matches!(
        state,
        SessionState::AwaitingFirstScan { .. }
            | SessionState::AwaitingSecondScan { .. }
            | SessionState::Navigating { .. }
    )
}
