//! Seeded walker simulation.
//!
//! A simulated pedestrian wears the reader under the shoe, keys in a
//! destination, and walks tag to tag. Each scan costs a fixed pause while
//! the cue plays; between scans the walker moves in a straight line at a
//! constant speed. A compliance probability decides whether the walker
//! follows each instruction or wanders to some other neighbor.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hex::HexDirection;
use crate::map::{nearest_order, RoomMap, TagId};
use crate::routing::{shortest_path, Instruction};
use crate::session::{CueKind, NavSession, SessionEvent, SessionState, TranscriptEntry};

/// Tag reader geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReaderModel {
    pub range_m: f64,
    pub half_angle_deg: f64,
    /// Height of the antenna above the floor; 0 means flush with the sole.
    pub height_m: f64,
    /// Recorded for reference only.
    pub gain_dbi: f64,
}

impl Default for ReaderModel {
    fn default() -> Self {
        ReaderModel { range_m: 0.05, half_angle_deg: 60.0, height_m: 0.0, gain_dbi: 5.5 }
    }
}

impl ReaderModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_m > 0.0) {
            return Err(Error::Domain(format!("reader range must be positive, got {}", self.range_m)));
        }
        if !(self.half_angle_deg > 0.0 && self.half_angle_deg <= 90.0) {
            return Err(Error::Domain(format!(
                "reader half-angle must be in (0, 90], got {}",
                self.half_angle_deg
            )));
        }
        if !(self.height_m >= 0.0) {
            return Err(Error::Domain(format!("reader height must be >= 0, got {}", self.height_m)));
        }
        Ok(())
    }

    /// Radius of the floor disc the reader can see.
    pub fn effective_radius(&self) -> f64 {
        if self.height_m > 0.0 {
            self.range_m.min(self.height_m * self.half_angle_deg.to_radians().tan())
        } else {
            self.range_m
        }
    }

    /// Nearest tag within the effective radius of `pos`; ties go to the
    /// smaller id.
    pub fn nearest_in_range(&self, pos: (f64, f64), map: &RoomMap) -> Option<TagId> {
        let radius = self.effective_radius();
        map.nodes()
            .iter()
            .map(|n| ((n.x_m - pos.0).hypot(n.y_m - pos.1), n.id))
            .filter(|&(d, _)| d <= radius)
            .min_by(|&a, &b| nearest_order(a, b))
            .map(|(_, id)| id)
    }
}

/// Edge-triggered reader: a tag is reported once when it comes into range
/// and not again until the reader has left it.
#[derive(Debug, Clone, Default)]
pub struct TagReader {
    pub model: ReaderModel,
    in_range: Option<TagId>,
}

impl TagReader {
    pub fn new(model: ReaderModel) -> Self {
        TagReader { model, in_range: None }
    }

    pub fn detect(&mut self, pos: (f64, f64), map: &RoomMap) -> Option<TagId> {
        let seen = self.model.nearest_in_range(pos, map);
        let fresh = seen.filter(|&t| self.in_range != Some(t));
        self.in_range = seen;
        fresh
    }
}

/// The simulated pedestrian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkerModel {
    pub walk_speed_mps: f64,
    pub compliance: f64,
    pub seed: u64,
    /// Stop after each scan while the cue plays.
    pub pause_s: f64,
}

impl Default for WalkerModel {
    fn default() -> Self {
        WalkerModel { walk_speed_mps: 0.0627, compliance: 1.0, seed: 0, pause_s: 1.5 }
    }
}

impl WalkerModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.compliance) {
            return Err(Error::Domain(format!("compliance must be in [0, 1], got {}", self.compliance)));
        }
        if !(self.walk_speed_mps > 0.0) || !self.walk_speed_mps.is_finite() {
            return Err(Error::Domain(format!(
                "walk speed must be positive, got {}",
                self.walk_speed_mps
            )));
        }
        if !(self.pause_s >= 0.0) {
            return Err(Error::Domain(format!("pause must be >= 0, got {}", self.pause_s)));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Picks the direction of the next hop: the instructed one with probability
/// `compliance`, otherwise a uniformly random other neighbor.
pub fn step_compliant_move(
    walker: &WalkerModel,
    rng: &mut impl Rng,
    instruction: Instruction,
    map: &RoomMap,
    current: TagId,
    heading: HexDirection,
) -> Result<HexDirection> {
    let neighbors = map.neighbors(current)?;
    if neighbors.is_empty() {
        return Err(Error::NoNeighbors(current));
    }
    let instructed = instruction
        .apply(heading)
        .filter(|d| neighbors.iter().any(|n| n.direction == *d));
    let complies = rng.gen::<f64>() < walker.compliance;
    let others: Vec<HexDirection> = neighbors
        .iter()
        .map(|n| n.direction)
        .filter(|d| Some(*d) != instructed)
        .collect();
    Ok(match instructed {
        Some(d) if complies || others.is_empty() => d,
        _ => *others.choose(rng).expect("at least one alternative neighbor"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub arrived: bool,
    pub elapsed_s: f64,
    pub scans: u32,
    pub hops: u32,
    pub path: Vec<TagId>,
    pub distance_m: f64,
    #[serde(skip)]
    pub transcript: Vec<TranscriptEntry>,
}

impl TrialResult {
    /// Traversed distance over total time, pauses included.
    pub fn effective_velocity_mps(&self) -> f64 {
        if self.elapsed_s > 0.0 {
            self.distance_m / self.elapsed_s
        } else {
            0.0
        }
    }
}

/// Walks from `src` to `dst` under the guidance of a [`NavSession`].
///
/// Keypad time is not counted. The first scan happens on `src`; the walker
/// then takes one acquisition hop (toward the planner's first hop when it
/// complies) so the heading can be inferred, and from there follows or
/// ignores each cue until the session reports arrival or `step_cap` hops
/// have been walked.
pub fn run_trial(
    map: Arc<RoomMap>,
    src: TagId,
    dst: TagId,
    walker: &WalkerModel,
    reader: &ReaderModel,
    step_cap: u32,
) -> Result<TrialResult> {
    walker.validate()?;
    reader.validate()?;
    if step_cap == 0 {
        return Err(Error::Domain("step cap must be positive".into()));
    }
    let mut pos = map.position(src)?;
    map.position(dst)?;

    let mut rng = walker.rng();
    let mut reader = TagReader::new(*reader);
    let mut session = NavSession::new(map.clone());
    for ev in SessionEvent::enter_destination(dst) {
        session.handle_event_at(ev, 0.0)?;
    }

    let mut clock = 0.0;
    let mut scans = 0;
    let mut hops = 0;
    let mut distance_m = 0.0;
    let mut path = Vec::new();

    let mut scan = |session: &mut NavSession, tag: TagId, clock: &mut f64| -> Result<Option<Instruction>> {
        let cues = session.handle_event_at(SessionEvent::Scan(tag), *clock)?;
        *clock += walker.pause_s;
        scans += 1;
        Ok(cues
            .iter()
            .filter(|c| c.kind == CueKind::Instruction)
            .find_map(|c| Instruction::from_cue_text(&c.text)))
    };

    let mut instruction = Instruction::Straight;
    if let Some(tag) = reader.detect(pos, &map) {
        instruction = scan(&mut session, tag, &mut clock)?.unwrap_or(instruction);
        path.push(tag);
    }

    let mut current = src;
    while !matches!(session.state(), SessionState::Arrived { .. }) && hops < step_cap {
        let dir = match *session.state() {
            SessionState::Navigating { heading, .. } => {
                step_compliant_move(walker, &mut rng, instruction, &map, current, heading)?
            }
            _ => acquisition_direction(walker, &mut rng, &map, current, dst)?,
        };
        let next = map
            .neighbor_in(current, dir)?
            .expect("chosen direction has a neighbor")
            .tag;
        let target = map.position(next)?;
        let hop_m = (target.0 - pos.0).hypot(target.1 - pos.1);

        // midway the reader is off every tag, which re-arms it
        reader.detect(((pos.0 + target.0) / 2.0, (pos.1 + target.1) / 2.0), &map);
        clock += hop_m / walker.walk_speed_mps;
        distance_m += hop_m;
        hops += 1;
        pos = target;
        current = next;

        if let Some(tag) = reader.detect(pos, &map) {
            instruction = scan(&mut session, tag, &mut clock)?.unwrap_or(instruction);
            path.push(tag);
        }
    }

    Ok(TrialResult {
        arrived: matches!(session.state(), SessionState::Arrived { .. }),
        elapsed_s: clock,
        scans,
        hops,
        path,
        distance_m,
        transcript: session.transcript().to_vec(),
    })
}

/// Direction of a hop taken without a heading: toward the planner's first
/// hop when the walker complies, otherwise toward some other neighbor.
fn acquisition_direction(
    walker: &WalkerModel,
    rng: &mut impl Rng,
    map: &RoomMap,
    current: TagId,
    dst: TagId,
) -> Result<HexDirection> {
    let next = shortest_path(map, current, dst)?.next_hop();
    let planned = match next {
        Some(n) => map.direction_between(current, n)?,
        None => return Err(Error::NoNeighbors(current)),
    };
    // Heading N makes Straight mean the planned bearing after rotation.
    let instr = Instruction::from_delta(planned.index());
    step_compliant_move(walker, rng, instr, map, current, HexDirection::N)
}

/// Parameters shared by every trial of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub src: TagId,
    pub dst: TagId,
    pub walker: WalkerModel,
    pub reader: ReaderModel,
    pub step_cap: u32,
}

/// One CSV row of batch output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u32,
    pub seed: u64,
    pub arrived: bool,
    pub elapsed_s: f64,
    pub hops: u32,
    pub distance_m: f64,
    pub scans: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub trials: u32,
    pub arrival_rate: f64,
    pub mean_elapsed_s: f64,
    pub stddev_elapsed_s: f64,
    pub mean_hops: f64,
    pub stddev_hops: f64,
    /// Walked hops over optimal hops, averaged over trials.
    pub mean_detour_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub rows: Vec<TrialRow>,
    pub aggregate: BatchStats,
    #[serde(skip)]
    pub results: Vec<TrialResult>,
}

/// Runs `trials` independent trials; trial `i` is seeded with
/// `base_seed + i`.
pub fn run_batch(map: Arc<RoomMap>, scenario: &Scenario, trials: u32, base_seed: u64) -> Result<BatchReport> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let optimal = shortest_path(&map, scenario.src, scenario.dst)?.hops();
    let results: Vec<TrialResult> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let walker = WalkerModel { seed: base_seed.wrapping_add(i as u64), ..scenario.walker };
            run_trial(map.clone(), scenario.src, scenario.dst, &walker, &scenario.reader, scenario.step_cap)
        })
        .collect::<Result<_>>()?;

    let rows: Vec<TrialRow> = results
        .iter()
        .enumerate()
        .map(|(i, r)| TrialRow {
            trial: i as u32,
            seed: base_seed.wrapping_add(i as u64),
            arrived: r.arrived,
            elapsed_s: r.elapsed_s,
            hops: r.hops,
            distance_m: r.distance_m,
            scans: r.scans,
        })
        .collect();

    let n = trials as f64;
    let elapsed: Vec<f64> = rows.iter().map(|r| r.elapsed_s).collect();
    let hops: Vec<f64> = rows.iter().map(|r| r.hops as f64).collect();
    let detour = |h: f64| if optimal == 0 { 1.0 } else { h / optimal as f64 };
    let aggregate = BatchStats {
        trials,
        arrival_rate: rows.iter().filter(|r| r.arrived).count() as f64 / n,
        mean_elapsed_s: mean(&elapsed),
        stddev_elapsed_s: stddev(&elapsed),
        mean_hops: mean(&hops),
        stddev_hops: stddev(&hops),
        mean_detour_factor: hops.iter().map(|&h| detour(h)).sum::<f64>() / n,
    };
    Ok(BatchReport { rows, aggregate, results })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
fn stddev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Writes batch rows as CSV with the standard header.
pub fn write_batch_csv(out: impl std::io::Write, rows: &[TrialRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

/// Two-level duty-cycle power model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub idle_w: f64,
    pub active_w: f64,
    pub idle_fraction: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        PowerProfile { idle_w: 2.85, active_w: 3.25, idle_fraction: 0.6 }
    }
}

impl PowerProfile {
    pub fn new(idle_w: f64, active_w: f64, idle_fraction: f64) -> Result<Self> {
        let p = PowerProfile { idle_w, active_w, idle_fraction };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.idle_w > 0.0 && self.idle_w <= self.active_w) {
            return Err(Error::Domain(format!(
                "need 0 < idle_w <= active_w, got {} and {}",
                self.idle_w, self.active_w
            )));
        }
        if !(0.0..=1.0).contains(&self.idle_fraction) {
            return Err(Error::Domain(format!(
                "idle fraction must be in [0, 1], got {}",
                self.idle_fraction
            )));
        }
        Ok(())
    }

    /// Duty-cycle weighted mean draw in watts.
    pub fn average_w(&self) -> f64 {
        self.idle_fraction * self.idle_w + (1.0 - self.idle_fraction) * self.active_w
    }
}

/// Energy in watt-hours drawn over `duration_h` hours.
pub fn energy_consumption(profile: &PowerProfile, duration_h: f64) -> Result<f64> {
    profile.validate()?;
    if !(duration_h >= 0.0) {
        return Err(Error::Domain(format!("duration must be >= 0, got {duration_h}")));
    }
    Ok(duration_h * profile.average_w())
}

/// Hours a battery of the given capacity sustains the profile's mean draw.
pub fn battery_runtime(
    profile: &PowerProfile,
    capacity_mah: f64,
    cell_voltage_v: f64,
    conversion_efficiency: f64,
) -> Result<f64> {
    profile.validate()?;
    if !(capacity_mah > 0.0 && cell_voltage_v > 0.0) {
        return Err(Error::Domain("capacity and voltage must be positive".into()));
    }
    if !(conversion_efficiency > 0.0 && conversion_efficiency <= 1.0) {
        return Err(Error::Domain(format!(
            "conversion efficiency must be in (0, 1], got {conversion_efficiency}"
        )));
    }
    let usable_wh = capacity_mah / 1000.0 * cell_voltage_v * conversion_efficiency;
    Ok(usable_wh / profile.average_w())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::clinic;

    #[test]
    fn detect_examples() {
        let map = clinic();
        let r = ReaderModel::default();
        let a = map.position(1).unwrap();
        assert_eq!(r.nearest_in_range(a, &map), Some(1));
        assert_eq!(r.nearest_in_range((a.0 + 0.06, a.1), &map), None);
        assert_eq!(r.nearest_in_range((a.0, a.1 + 0.02), &map), Some(1));
    }

    #[test]
    fn reader_is_edge_triggered() {
        let map = clinic();
        let mut r = TagReader::new(ReaderModel::default());
        let a = map.position(1).unwrap();
        assert_eq!(r.detect(a, &map), Some(1));
        assert_eq!(r.detect((a.0 + 0.01, a.1), &map), None);
        assert_eq!(r.detect((a.0 + 0.2, a.1), &map), None);
        assert_eq!(r.detect(a, &map), Some(1));
    }

    #[test]
    fn effective_radius_with_height() {
        let flat = ReaderModel::default();
        assert_eq!(flat.effective_radius(), 0.05);
        let raised = ReaderModel { height_m: 0.01, ..flat };
        assert!((raised.effective_radius() - 0.01 * 3f64.sqrt()).abs() < 1e-12);
        let high = ReaderModel { height_m: 1.0, ..flat };
        assert_eq!(high.effective_radius(), 0.05);
        assert!(ReaderModel { range_m: 0.0, ..flat }.validate().is_err());
        assert!(ReaderModel { half_angle_deg: 95.0, ..flat }.validate().is_err());
    }

    #[test]
    fn compliant_walker_follows_instruction() {
        let map = clinic();
        let w = WalkerModel::default();
        let mut rng = w.rng();
        // E is interior: every direction exists
        let d = step_compliant_move(&w, &mut rng, Instruction::TwoOClock, &map, 5, HexDirection::N)
            .unwrap();
        assert_eq!(d, HexDirection::NE);
    }

    #[test]
    fn defiant_walker_with_one_option() {
        let map = crate::map::load_map(
            r#"{"name":"pair","spacing_m":1.0,"bounds":{"width_m":3,"height_m":3},
            "nodes":[{"id":1,"name":"a","x_m":1,"y_m":1},{"id":2,"name":"b","x_m":1,"y_m":2}],
            "edges":[{"a":1,"b":2,"weight":1}]}"#,
        )
        .unwrap();
        let w = WalkerModel { compliance: 0.0, ..Default::default() };
        let mut rng = w.rng();
        for _ in 0..20 {
            let d = step_compliant_move(&w, &mut rng, Instruction::Straight, &map, 1, HexDirection::N)
                .unwrap();
            assert_eq!(d, HexDirection::N);
        }
        let lone = crate::map::load_map(
            r#"{"name":"lone","spacing_m":1.0,"bounds":{"width_m":3,"height_m":3},
            "nodes":[{"id":1,"name":"a","x_m":1,"y_m":1}],"edges":[]}"#,
        )
        .unwrap();
        assert!(matches!(
            step_compliant_move(&w, &mut rng, Instruction::Straight, &lone, 1, HexDirection::N),
            Err(Error::NoNeighbors(1))
        ));
    }

    #[test]
    fn same_source_and_destination() {
        let map = Arc::new(clinic());
        let w = WalkerModel::default();
        let r = run_trial(map, 1, 1, &w, &ReaderModel::default(), 10).unwrap();
        assert!(r.arrived);
        assert_eq!(r.scans, 1);
        assert_eq!(r.hops, 0);
        assert!((r.elapsed_s - w.pause_s).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameters() {
        let map = Arc::new(clinic());
        let r = ReaderModel::default();
        let bad = WalkerModel { compliance: 1.5, ..Default::default() };
        assert!(matches!(run_trial(map.clone(), 1, 17, &bad, &r, 10), Err(Error::Domain(_))));
        let w = WalkerModel::default();
        assert!(matches!(run_trial(map.clone(), 1, 17, &w, &r, 0), Err(Error::Domain(_))));
        assert!(matches!(run_trial(map, 1, 99, &w, &r, 10), Err(Error::UnknownTag(99))));
    }

    #[test]
    fn energy_examples() {
        let p = PowerProfile::default();
        assert!((energy_consumption(&p, 24.0).unwrap() - 72.24).abs() < 1e-9);
        let idle = PowerProfile { idle_fraction: 1.0, ..p };
        assert!((energy_consumption(&idle, 1.0).unwrap() - 2.85).abs() < 1e-12);
        assert_eq!(energy_consumption(&p, 0.0).unwrap(), 0.0);
        assert!(energy_consumption(&p, -1.0).is_err());
        assert!(PowerProfile::new(3.5, 3.25, 0.6).is_err());
    }

    #[test]
    fn battery_examples() {
        let p = PowerProfile::default();
        // 10 Ah * 3.7 V * 0.65 = 24.05 Wh over a 3.01 W mean draw
        let h = battery_runtime(&p, 10_000.0, 3.7, 0.65).unwrap();
        assert!((h - 24.05 / 3.01).abs() < 1e-9);
        assert!((h - 7.99).abs() < 0.01);
        // a battery holding exactly one hour of mean draw
        let one = battery_runtime(&p, 1000.0, 3.01, 1.0).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        assert!(battery_runtime(&p, 0.0, 3.7, 0.65).is_err());
        assert!(battery_runtime(&p, 10_000.0, 3.7, 1.2).is_err());
        assert!(battery_runtime(&p, 10_000.0, 3.7, 0.0).is_err());
    }

    #[test]
    fn one_trial_batch_matches_trial() {
        let map = Arc::new(clinic());
        let s = Scenario {
            src: 1,
            dst: 17,
            walker: WalkerModel { compliance: 0.7, ..Default::default() },
            reader: ReaderModel::default(),
            step_cap: 70,
        };
        let b = run_batch(map.clone(), &s, 1, 9).unwrap();
        let t = run_trial(map, 1, 17, &WalkerModel { seed: 9, ..s.walker }, &s.reader, 70).unwrap();
        assert_eq!(b.aggregate.mean_elapsed_s, t.elapsed_s);
        assert_eq!(b.aggregate.mean_hops, t.hops as f64);
        assert_eq!(b.aggregate.stddev_hops, 0.0);
        assert_eq!(b.aggregate.arrival_rate, if t.arrived { 1.0 } else { 0.0 });
        assert_eq!(b.results[0], t);
    }
}
