//! Tag-graph model: floor tags on a triangular lattice joined by weighted,
//! undirected edges, plus the JSON map file format and its validator.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hex::HexDirection;

/// Numeric tag id, the number a user types on the keypad.
pub type TagId = u32;

/// Relative tolerance on edge length versus the lattice spacing.
pub const DISTANCE_TOLERANCE: f64 = 0.01;
/// Tolerance on edge bearing versus the nearest lattice direction.
pub const ANGLE_TOLERANCE_DEG: f64 = 1.0;

/// The bundled clinic map: 24 tags (A..X) in a 4.1 x 2 m room.
pub const CLINIC_MAP_JSON: &str = include_str!("../data/clinic.map.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagNode {
    pub id: TagId,
    pub name: String,
    pub x_m: f64,
    pub y_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmark: Option<String>,
}

impl TagNode {
    pub fn pos(&self) -> (f64, f64) {
        (self.x_m, self.y_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: TagId,
    pub b: TagId,
    pub weight: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub width_m: f64,
    pub height_m: f64,
}

impl Bounds {
    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        (0.0..=self.width_m).contains(&x) && (0.0..=self.height_m).contains(&y)
    }

    pub fn clamp(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (x.clamp(0.0, self.width_m), y.clamp(0.0, self.height_m))
    }
}

/// On-disk layout of a map file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub name: String,
    pub spacing_m: f64,
    pub bounds: Bounds,
    pub nodes: Vec<TagNode>,
    pub edges: Vec<Edge>,
}

/// One entry of a tag's neighbor list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Neighbor {
    pub direction: HexDirection,
    pub tag: TagId,
    pub weight: u32,
}

/// Immutable tag graph.
///
/// Maps obtained from [`load_map`] satisfy every invariant checked by
/// [`validate_map`]. [`RoomMap::from_file`] builds a map without checking
/// so that invalid layouts can still be inspected.
#[derive(Debug, Clone)]
pub struct RoomMap {
    file: MapFile,
    index: HashMap<TagId, usize>,
    adjacency: Vec<Vec<Neighbor>>,
}

impl PartialEq for RoomMap {
    fn eq(&self, other: &Self) -> bool {
        self.file == other.file
    }
}

impl RoomMap {
    pub fn from_file(file: MapFile) -> Self {
        let mut index = HashMap::with_capacity(file.nodes.len());
        for (i, n) in file.nodes.iter().enumerate() {
            index.entry(n.id).or_insert(i);
        }
        let mut adjacency: Vec<Vec<Neighbor>> = vec![Vec::new(); file.nodes.len()];
        for e in &file.edges {
            let (Some(&ia), Some(&ib)) = (index.get(&e.a), index.get(&e.b)) else {
                continue;
            };
            if ia == ib {
                continue;
            }
            let (ax, ay) = file.nodes[ia].pos();
            let (bx, by) = file.nodes[ib].pos();
            let Some(dir) = HexDirection::from_displacement(bx - ax, by - ay, ANGLE_TOLERANCE_DEG)
            else {
                continue;
            };
            for (from, to, d) in [(ia, e.b, dir), (ib, e.a, dir.opposite())] {
                if adjacency[from].iter().all(|n| n.direction != d) {
                    adjacency[from].push(Neighbor { direction: d, tag: to, weight: e.weight });
                }
            }
        }
        for list in &mut adjacency {
            list.sort_by_key(|n| n.direction);
        }
        RoomMap { file, index, adjacency }
    }

    pub fn to_file(&self) -> &MapFile {
        &self.file
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("map file serializes")
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn spacing_m(&self) -> f64 {
        self.file.spacing_m
    }

    pub fn bounds(&self) -> Bounds {
        self.file.bounds
    }

    pub fn nodes(&self) -> &[TagNode] {
        &self.file.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.file.edges
    }

    pub fn len(&self) -> usize {
        self.file.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.file.nodes.is_empty()
    }

    pub fn contains(&self, id: TagId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn node(&self, id: TagId) -> Option<&TagNode> {
        self.index.get(&id).map(|&i| &self.file.nodes[i])
    }

    pub fn node_by_name(&self, name: &str) -> Option<&TagNode> {
        self.file.nodes.iter().find(|n| n.name == name)
    }

    /// Resolves a node name, or failing that a numeric id, to a tag id.
    pub fn resolve(&self, name_or_id: &str) -> Option<TagId> {
        let key = name_or_id.trim();
        if let Some(n) = self.node_by_name(key) {
            return Some(n.id);
        }
        key.parse().ok().filter(|id| self.contains(*id))
    }

    pub fn tag_name(&self, id: TagId) -> Option<&str> {
        self.node(id).map(|n| n.name.as_str())
    }

    pub fn position(&self, id: TagId) -> Result<(f64, f64)> {
        self.node(id).map(TagNode::pos).ok_or(Error::UnknownTag(id))
    }

    /// Mean position of all tags.
    pub fn centroid(&self) -> (f64, f64) {
        let n = self.file.nodes.len().max(1) as f64;
        let (sx, sy) = self
            .file
            .nodes
            .iter()
            .fold((0.0, 0.0), |(sx, sy), t| (sx + t.x_m, sy + t.y_m));
        (sx / n, sy / n)
    }

    /// Neighbors of `id`, sorted by direction index. At most six entries.
    pub fn neighbors(&self, id: TagId) -> Result<&[Neighbor]> {
        self.index
            .get(&id)
            .map(|&i| self.adjacency[i].as_slice())
            .ok_or(Error::UnknownTag(id))
    }

    pub fn neighbor_in(&self, id: TagId, direction: HexDirection) -> Result<Option<Neighbor>> {
        Ok(self.neighbors(id)?.iter().copied().find(|n| n.direction == direction))
    }

    pub fn edge_weight(&self, a: TagId, b: TagId) -> Option<u32> {
        let list = self.neighbors(a).ok()?;
        list.iter().find(|n| n.tag == b).map(|n| n.weight)
    }

    pub fn are_adjacent(&self, a: TagId, b: TagId) -> bool {
        self.edge_weight(a, b).is_some()
    }

    /// Bearing of the edge from `a` to `b`.
    pub fn direction_between(&self, a: TagId, b: TagId) -> Result<HexDirection> {
        self.neighbors(a)?
            .iter()
            .find(|n| n.tag == b)
            .map(|n| n.direction)
            .ok_or(Error::NotAdjacent(a, b))
    }

    /// Straight-line distance between two tags in meters.
    pub fn distance_m(&self, a: TagId, b: TagId) -> Result<f64> {
        let (ax, ay) = self.position(a)?;
        let (bx, by) = self.position(b)?;
        Ok((bx - ax).hypot(by - ay))
    }
}

/// Orders `(distance, id)` pairs by distance, treating distances within a
/// nanometer as equal so that the smaller id wins near-ties.
pub fn nearest_order(a: (f64, TagId), b: (f64, TagId)) -> std::cmp::Ordering {
    if (a.0 - b.0).abs() < 1e-9 {
        a.1.cmp(&b.1)
    } else {
        a.0.total_cmp(&b.0)
    }
}

/// Parses and validates map file text.
pub fn load_map(source: &str) -> Result<RoomMap> {
    let file: MapFile = serde_json::from_str(source)?;
    let map = RoomMap::from_file(file);
    let violations = validate_map(&map);
    if violations.is_empty() {
        Ok(map)
    } else {
        Err(Error::Validation(violations))
    }
}

pub fn load_map_file(path: impl AsRef<Path>) -> Result<RoomMap> {
    load_map(&std::fs::read_to_string(path)?)
}

/// The bundled clinic map.
pub fn clinic() -> RoomMap {
    load_map(CLINIC_MAP_JSON).expect("bundled clinic map is valid")
}

/// Triangular-lattice tag density, in tags per 10 m², for a given spacing.
pub fn tag_density(spacing_m: f64) -> Result<f64> {
    if !(spacing_m > 0.0) || !spacing_m.is_finite() {
        return Err(Error::Domain(format!("spacing must be positive, got {spacing_m}")));
    }
    let cell_area = spacing_m * spacing_m * 3f64.sqrt() / 2.0;
    Ok(10.0 / cell_area)
}

/// A broken map invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoNodes,
    BadSpacing { spacing_m: f64 },
    BadBounds { width_m: f64, height_m: f64 },
    ZeroTagId { name: String },
    DuplicateTagId { id: TagId },
    DuplicateName { name: String },
    OutOfBounds { id: TagId, x_m: f64, y_m: f64 },
    SelfLoop { id: TagId },
    EdgeOrder { a: TagId, b: TagId },
    DuplicateEdge { a: TagId, b: TagId },
    UnknownEndpoint { a: TagId, b: TagId, tag: TagId },
    BadWeight { a: TagId, b: TagId, weight: u32 },
    EdgeLength { a: TagId, b: TagId, length_m: f64, spacing_m: f64 },
    EdgeBearing { a: TagId, b: TagId },
    DirectionConflict { id: TagId, direction: HexDirection },
    DegreeExceeded { id: TagId, degree: usize },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoNodes => write!(f, "map has no nodes"),
            BadSpacing { spacing_m } => write!(f, "spacing_m must be positive, got {spacing_m}"),
            BadBounds { width_m, height_m } => {
                write!(f, "bounds must be positive, got {width_m} x {height_m}")
            }
            ZeroTagId { name } => write!(f, "node {name:?} has id 0; ids must be positive"),
            DuplicateTagId { id } => write!(f, "duplicate tag id {id}"),
            DuplicateName { name } => write!(f, "duplicate node name {name:?}"),
            OutOfBounds { id, x_m, y_m } => {
                write!(f, "tag {id} at ({x_m}, {y_m}) lies outside the room bounds")
            }
            SelfLoop { id } => write!(f, "edge joins tag {id} to itself"),
            EdgeOrder { a, b } => write!(f, "edge {a}-{b} must be listed with a < b"),
            DuplicateEdge { a, b } => write!(f, "edge {a}-{b} listed more than once"),
            UnknownEndpoint { a, b, tag } => write!(f, "edge {a}-{b} references unknown tag {tag}"),
            BadWeight { a, b, weight } => {
                write!(f, "edge {a}-{b} has weight {weight}; weights must be 1 or 2")
            }
            EdgeLength { a, b, length_m, spacing_m } => write!(
                f,
                "edge {a}-{b} is {length_m:.4} m long, not lattice-adjacent at spacing {spacing_m} m"
            ),
            EdgeBearing { a, b } => {
                write!(f, "edge {a}-{b} does not follow one of the six lattice directions")
            }
            DirectionConflict { id, direction } => {
                write!(f, "tag {id} has more than one edge toward {direction}")
            }
            DegreeExceeded { id, degree } => write!(f, "tag {id} has {degree} neighbors (max 6)"),
            Disconnected { components } => {
                write!(f, "graph is disconnected ({components} components)")
            }
        }
    }
}

/// Lists every broken invariant. Empty iff the map is valid.
pub fn validate_map(map: &RoomMap) -> Vec<Violation> {
    let file = map.to_file();
    let mut out = Vec::new();

    if file.nodes.is_empty() {
        out.push(Violation::NoNodes);
    }
    if !(file.spacing_m > 0.0) || !file.spacing_m.is_finite() {
        out.push(Violation::BadSpacing { spacing_m: file.spacing_m });
    }
    let Bounds { width_m, height_m } = file.bounds;
    if !(width_m > 0.0 && height_m > 0.0) {
        out.push(Violation::BadBounds { width_m, height_m });
    }

    let mut ids = HashSet::new();
    let mut names = HashSet::new();
    for n in &file.nodes {
        if n.id == 0 {
            out.push(Violation::ZeroTagId { name: n.name.clone() });
        }
        if !ids.insert(n.id) {
            out.push(Violation::DuplicateTagId { id: n.id });
        }
        if !names.insert(n.name.as_str()) {
            out.push(Violation::DuplicateName { name: n.name.clone() });
        }
        if !file.bounds.contains(n.pos()) {
            out.push(Violation::OutOfBounds { id: n.id, x_m: n.x_m, y_m: n.y_m });
        }
    }

    let mut seen_edges = HashSet::new();
    let mut claimed: HashSet<(TagId, HexDirection)> = HashSet::new();
    let mut degree: HashMap<TagId, usize> = HashMap::new();
    for e in &file.edges {
        let (a, b) = (e.a, e.b);
        if a == b {
            out.push(Violation::SelfLoop { id: a });
            continue;
        }
        if a > b {
            out.push(Violation::EdgeOrder { a, b });
        }
        if !seen_edges.insert((a.min(b), a.max(b))) {
            out.push(Violation::DuplicateEdge { a, b });
            continue;
        }
        if !(1..=2).contains(&e.weight) {
            out.push(Violation::BadWeight { a, b, weight: e.weight });
        }
        let (Some(na), Some(nb)) = (map.node(a), map.node(b)) else {
            for tag in [a, b].into_iter().filter(|t| !map.contains(*t)) {
                out.push(Violation::UnknownEndpoint { a, b, tag });
            }
            continue;
        };
        *degree.entry(a).or_default() += 1;
        *degree.entry(b).or_default() += 1;

        let (dx, dy) = (nb.x_m - na.x_m, nb.y_m - na.y_m);
        let length_m = dx.hypot(dy);
        if (length_m - file.spacing_m).abs() > DISTANCE_TOLERANCE * file.spacing_m {
            out.push(Violation::EdgeLength { a, b, length_m, spacing_m: file.spacing_m });
        }
        match HexDirection::from_displacement(dx, dy, ANGLE_TOLERANCE_DEG) {
            None => out.push(Violation::EdgeBearing { a, b }),
            Some(dir) => {
                for (id, d) in [(a, dir), (b, dir.opposite())] {
                    if !claimed.insert((id, d)) {
                        out.push(Violation::DirectionConflict { id, direction: d });
                    }
                }
            }
        }
    }
    let mut over: Vec<_> = degree.into_iter().filter(|&(_, d)| d > 6).collect();
    over.sort();
    out.extend(over.into_iter().map(|(id, degree)| Violation::DegreeExceeded { id, degree }));

    let components = count_components(file);
    if components > 1 {
        out.push(Violation::Disconnected { components });
    }
    out
}

fn count_components(file: &MapFile) -> usize {
    let ids: BTreeSet<TagId> = file.nodes.iter().map(|n| n.id).collect();
    let mut adj: HashMap<TagId, Vec<TagId>> = HashMap::new();
    for e in &file.edges {
        if ids.contains(&e.a) && ids.contains(&e.b) {
            adj.entry(e.a).or_default().push(e.b);
            adj.entry(e.b).or_default().push(e.a);
        }
    }
    let mut seen = HashSet::new();
    let mut components = 0;
    for &start in &ids {
        if !seen.insert(start) {
            continue;
        }
        components += 1;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in adj.get(&u).into_iter().flatten() {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
    }
    components
}
