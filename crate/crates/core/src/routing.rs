//! Shortest-path planning and clock-face guidance.
//!
//! Guidance is egocentric: the user's heading is treated as twelve o'clock
//! and the bearing of the next hop is expressed relative to it.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hex::HexDirection;
use crate::map::{RoomMap, TagId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathResult {
    pub nodes: Vec<TagId>,
    pub cost: u32,
}

impl PathResult {
    pub fn hops(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// The tag after the source, if the path has at least one hop.
    pub fn next_hop(&self) -> Option<TagId> {
        self.nodes.get(1).copied()
    }
}

/// A spoken guidance cue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Instruction {
    Straight,
    TwoOClock,
    FourOClock,
    UTurn,
    EightOClock,
    TenOClock,
    Arrived,
}

pub const ARRIVED_TEXT: &str = "You have arrived at your destination.";

impl Instruction {
    /// The six movement cues, ordered by clockwise turn.
    pub const MOVES: [Instruction; 6] = [
        Instruction::Straight,
        Instruction::TwoOClock,
        Instruction::FourOClock,
        Instruction::UTurn,
        Instruction::EightOClock,
        Instruction::TenOClock,
    ];

    pub fn from_delta(delta: u8) -> Self {
        Self::MOVES[(delta % 6) as usize]
    }

    /// Clockwise turn in sixths; `None` for [`Instruction::Arrived`].
    pub fn delta(self) -> Option<u8> {
        Self::MOVES.iter().position(|&m| m == self).map(|p| p as u8)
    }

    pub fn cue_text(self) -> &'static str {
        match self {
            Instruction::Straight => "Walk straight ahead.",
            Instruction::TwoOClock => "Turn to your 2 o'clock and keep walking slowly.",
            Instruction::FourOClock => "Turn to your 4 o'clock and keep walking slowly.",
            Instruction::UTurn => "Make U-turn",
            Instruction::EightOClock => "Turn to your 8 o'clock and keep walking slowly.",
            Instruction::TenOClock => "Turn to your 10 o'clock and keep walking slowly.",
            Instruction::Arrived => ARRIVED_TEXT,
        }
    }

    /// Absolute bearing a user facing `heading` ends up walking after
    /// following this instruction.
    pub fn apply(self, heading: HexDirection) -> Option<HexDirection> {
        self.delta().map(|d| heading.rotate(d))
    }

    pub fn from_cue_text(text: &str) -> Option<Self> {
        Self::MOVES
            .into_iter()
            .chain([Instruction::Arrived])
            .find(|i| i.cue_text() == text)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cue_text())
    }
}

/// Minimal-cost path from `src` to `dst`. Among equal-cost paths the one
/// with the lexicographically smallest tag-id sequence wins.
pub fn shortest_path(map: &RoomMap, src: TagId, dst: TagId) -> Result<PathResult> {
    for t in [src, dst] {
        if !map.contains(t) {
            return Err(Error::UnknownTag(t));
        }
    }
    let dist = distances_to(map, dst)?;
    let Some(&cost) = dist.get(&src) else {
        return Err(Error::Unreachable(src, dst));
    };

    // Walking forward along tight edges, always taking the smallest id,
    // yields the lexicographically smallest optimal sequence.
    let mut nodes = vec![src];
    let mut cur = src;
    while cur != dst {
        let here = dist[&cur];
        let next = map
            .neighbors(cur)?
            .iter()
            .filter(|n| dist.get(&n.tag).is_some_and(|&d| d + n.weight == here))
            .map(|n| n.tag)
            .min()
            .expect("a tight edge leaves every settled non-target tag");
        nodes.push(next);
        cur = next;
    }
    Ok(PathResult { nodes, cost })
}

/// Dijkstra from `target` over the undirected graph.
fn distances_to(map: &RoomMap, target: TagId) -> Result<HashMap<TagId, u32>> {
    let mut dist: HashMap<TagId, u32> = HashMap::with_capacity(map.len());
    let mut heap = BinaryHeap::new();
    dist.insert(target, 0);
    heap.push(Reverse((0u32, target)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist.get(&u).is_some_and(|&best| d > best) {
            continue;
        }
        for n in map.neighbors(u)? {
            let nd = d + n.weight;
            if dist.get(&n.tag).is_none_or(|&old| nd < old) {
                dist.insert(n.tag, nd);
                heap.push(Reverse((nd, n.tag)));
            }
        }
    }
    Ok(dist)
}

/// Heading of a user who stepped from `prev` onto `cur`.
pub fn infer_heading(map: &RoomMap, prev: TagId, cur: TagId) -> Result<HexDirection> {
    map.direction_between(prev, cur)
}

/// Clockwise sixths from `heading` to `next_dir`, in `0..6`.
pub fn relative_turn(heading: HexDirection, next_dir: HexDirection) -> u8 {
    (next_dir.index() + 6 - heading.index()) % 6
}

pub fn instruction_for(delta: u8, at_destination: bool) -> Instruction {
    if at_destination {
        Instruction::Arrived
    } else {
        Instruction::from_delta(delta)
    }
}

/// Guidance for a user standing on `cur` facing `heading`. Pure: it depends
/// on nothing but its arguments, so re-planning at every scan needs no
/// memory of earlier steps.
pub fn plan_instruction(
    map: &RoomMap,
    cur: TagId,
    heading: HexDirection,
    dst: TagId,
) -> Result<Instruction> {
    if !map.contains(cur) {
        return Err(Error::UnknownTag(cur));
    }
    if cur == dst {
        return Ok(Instruction::Arrived);
    }
    let path = shortest_path(map, cur, dst)?;
    let next = path.next_hop().expect("path between distinct tags has a hop");
    let dir = map.direction_between(cur, next)?;
    Ok(instruction_for(relative_turn(heading, dir), false))
}
