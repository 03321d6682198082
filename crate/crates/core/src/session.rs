//! Navigation session: the device's event loop.
//!
//! A session consumes keypad presses and tag scans and answers with cues.
//! The user keys a destination number and `#`, walks across two adjacent
//! tags so the heading can be inferred, then hears a fresh instruction at
//! every scan until the destination tag is reached. `*` restarts from any
//! state; `A` announces the landmark at the current tag.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hex::HexDirection;
use crate::map::{RoomMap, TagId};
use crate::routing::{infer_heading, plan_instruction, Instruction};

/// Maximum number of digits in a destination number.
pub const MAX_DIGITS: usize = 4;

pub mod text {
    pub const RESTARTED: &str = "Program restarted.";
    pub const UNKNOWN_DESTINATION: &str = "Unknown destination. Enter the tag number again.";
    pub const TOO_MANY_DIGITS: &str = "Destination number too long. Enter the tag number again.";
    pub const ENTER_DESTINATION_FIRST: &str = "Enter destination first.";
    pub const WALK_TO_ADJACENT: &str = "Walk to any adjacent tag.";
    pub const ORIENTATION_LOST: &str = "Orientation lost. Walk to any adjacent tag.";
    pub const NO_INFORMATION: &str = "No information available here.";
    pub const POSITION_UNKNOWN: &str = "Position unknown.";

    pub fn destination_set(name: &str) -> String {
        format!("Destination set to {name}.")
    }
}

/// A keypad key: a digit, `#`, `*` or `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct KeySymbol(char);

impl KeySymbol {
    pub const HASH: KeySymbol = KeySymbol('#');
    pub const STAR: KeySymbol = KeySymbol('*');
    pub const INFO: KeySymbol = KeySymbol('A');

    pub fn new(c: char) -> Result<Self> {
        match c {
            '0'..='9' | '#' | '*' | 'A' => Ok(KeySymbol(c)),
            other => Err(Error::BadSymbol(other.to_string())),
        }
    }

    pub fn digit(d: u8) -> Self {
        assert!(d < 10, "digit out of range");
        KeySymbol((b'0' + d) as char)
    }

    pub fn as_char(self) -> char {
        self.0
    }

    pub fn is_digit(self) -> bool {
        self.0.is_ascii_digit()
    }

    /// Every key on the pad.
    pub fn all() -> impl Iterator<Item = KeySymbol> {
        "0123456789#*A".chars().map(KeySymbol)
    }
}

impl TryFrom<String> for KeySymbol {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl std::str::FromStr for KeySymbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => KeySymbol::new(c),
            _ => Err(Error::BadSymbol(s.to_string())),
        }
    }
}

impl From<KeySymbol> for String {
    fn from(k: KeySymbol) -> String {
        k.0.to_string()
    }
}

impl fmt::Display for KeySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionEvent {
    Key(KeySymbol),
    Scan(TagId),
}

impl SessionEvent {
    pub fn key(c: char) -> Result<Self> {
        KeySymbol::new(c).map(SessionEvent::Key)
    }

    /// Key events for typing `dst` followed by `#`.
    pub fn enter_destination(dst: TagId) -> Vec<SessionEvent> {
        dst.to_string()
            .chars()
            .map(|c| SessionEvent::Key(KeySymbol(c)))
            .chain([SessionEvent::Key(KeySymbol::HASH)])
            .collect()
    }
}

impl fmt::Display for SessionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionEvent::Key(k) => write!(f, "key {k}"),
            SessionEvent::Scan(t) => write!(f, "scan {t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum SessionState {
    Idle,
    EnteringDestination { buffer: String },
    AwaitingFirstScan { dst: TagId },
    AwaitingSecondScan { dst: TagId, first: TagId },
    Navigating { dst: TagId, current: TagId, heading: HexDirection },
    Arrived { dst: TagId },
}

impl SessionState {
    pub fn destination(&self) -> Option<TagId> {
        match *self {
            SessionState::AwaitingFirstScan { dst }
            | SessionState::AwaitingSecondScan { dst, .. }
            | SessionState::Navigating { dst, .. }
            | SessionState::Arrived { dst } => Some(dst),
            _ => None,
        }
    }

    /// The tag the user is known to stand on.
    pub fn position(&self) -> Option<TagId> {
        match *self {
            SessionState::AwaitingSecondScan { first, .. } => Some(first),
            SessionState::Navigating { current, .. } => Some(current),
            SessionState::Arrived { dst } => Some(dst),
            _ => None,
        }
    }

    pub fn heading(&self) -> Option<HexDirection> {
        match *self {
            SessionState::Navigating { heading, .. } => Some(heading),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SessionState::Idle => "idle",
            SessionState::EnteringDestination { .. } => "entering_destination",
            SessionState::AwaitingFirstScan { .. } => "awaiting_first_scan",
            SessionState::AwaitingSecondScan { .. } => "awaiting_second_scan",
            SessionState::Navigating { .. } => "navigating",
            SessionState::Arrived { .. } => "arrived",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueKind {
    Instruction,
    Landmark,
    System,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cue {
    pub kind: CueKind,
    pub text: String,
    /// Seconds since session start.
    pub timestamp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_tag: Option<TagId>,
}

/// One applied event with the state it produced and the cues it emitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub seq: u64,
    pub event: SessionEvent,
    pub state: SessionState,
    pub cues: Vec<Cue>,
}

#[derive(Debug, Clone)]
pub struct NavSession {
    map: Arc<RoomMap>,
    state: SessionState,
    last_instruction: Option<Cue>,
    clock: f64,
    transcript: Vec<TranscriptEntry>,
}

impl NavSession {
    pub fn new(map: Arc<RoomMap>) -> Self {
        NavSession {
            map,
            state: SessionState::Idle,
            last_instruction: None,
            clock: 0.0,
            transcript: Vec::new(),
        }
    }

    pub fn map(&self) -> &Arc<RoomMap> {
        &self.map
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Every cue emitted so far, in order.
    pub fn cues(&self) -> impl Iterator<Item = &Cue> {
        self.transcript.iter().flat_map(|e| e.cues.iter())
    }

    pub fn last_seq(&self) -> u64 {
        self.transcript.last().map_or(0, |e| e.seq)
    }

    /// Applies an event at the session's current clock.
    pub fn handle_event(&mut self, event: SessionEvent) -> Result<Vec<Cue>> {
        self.handle_event_at(event, self.clock)
    }

    /// Applies an event stamped `time_s` seconds after session start. The
    /// clock never runs backwards.
    pub fn handle_event_at(&mut self, event: SessionEvent, time_s: f64) -> Result<Vec<Cue>> {
        if let SessionEvent::Scan(t) = event {
            if !self.map.contains(t) {
                return Err(Error::UnknownTag(t));
            }
        }
        self.clock = self.clock.max(time_s);
        let cues = match event {
            SessionEvent::Key(k) => self.on_key(k),
            SessionEvent::Scan(t) => self.on_scan(t)?,
        };
        if let Some(c) = cues.iter().rev().find(|c| c.kind == CueKind::Instruction) {
            self.last_instruction = Some(c.clone());
        }
        self.transcript.push(TranscriptEntry {
            seq: self.last_seq() + 1,
            event,
            state: self.state.clone(),
            cues: cues.clone(),
        });
        Ok(cues)
    }

    fn cue(&self, kind: CueKind, text: impl Into<String>, at_tag: Option<TagId>) -> Cue {
        Cue { kind, text: text.into(), timestamp: self.clock, at_tag }
    }

    fn system(&self, text: impl Into<String>) -> Cue {
        self.cue(CueKind::System, text, self.state.position())
    }

    fn on_key(&mut self, key: KeySymbol) -> Vec<Cue> {
        match key.as_char() {
            '*' => {
                self.state = SessionState::Idle;
                self.last_instruction = None;
                vec![self.system(text::RESTARTED)]
            }
            'A' => vec![self.announce_landmark()],
            '#' => {
                let SessionState::EnteringDestination { buffer } = &self.state else {
                    return vec![self.system(text::ENTER_DESTINATION_FIRST)];
                };
                match buffer.parse::<TagId>().ok().filter(|t| self.map.contains(*t)) {
                    Some(dst) => {
                        self.state = SessionState::AwaitingFirstScan { dst };
                        self.last_instruction = None;
                        let name = self.map.tag_name(dst).unwrap_or_default().to_string();
                        vec![self.system(text::destination_set(&name))]
                    }
                    None => {
                        self.state = SessionState::Idle;
                        vec![self.system(text::UNKNOWN_DESTINATION)]
                    }
                }
            }
            digit => {
                let mut buffer = match &self.state {
                    SessionState::EnteringDestination { buffer } => buffer.clone(),
                    _ => String::new(),
                };
                if buffer.len() >= MAX_DIGITS {
                    self.state = SessionState::Idle;
                    return vec![self.system(text::TOO_MANY_DIGITS)];
                }
                buffer.push(digit);
                self.state = SessionState::EnteringDestination { buffer };
                Vec::new()
            }
        }
    }

    fn announce_landmark(&self) -> Cue {
        match self.state.position() {
            None => self.system(text::POSITION_UNKNOWN),
            Some(t) => match self.map.node(t).and_then(|n| n.landmark.as_deref()) {
                Some(landmark) => self.cue(CueKind::Landmark, landmark, Some(t)),
                None => self.system(text::NO_INFORMATION),
            },
        }
    }

    fn arrive(&mut self, dst: TagId) -> Vec<Cue> {
        self.state = SessionState::Arrived { dst };
        vec![self.cue(CueKind::Instruction, Instruction::Arrived.cue_text(), Some(dst))]
    }

    fn guide(&mut self, dst: TagId, current: TagId, heading: HexDirection) -> Result<Vec<Cue>> {
        self.state = SessionState::Navigating { dst, current, heading };
        let instr = plan_instruction(&self.map, current, heading, dst)?;
        Ok(vec![self.cue(CueKind::Instruction, instr.cue_text(), Some(current))])
    }

    fn on_scan(&mut self, t: TagId) -> Result<Vec<Cue>> {
        match self.state.clone() {
            SessionState::AwaitingFirstScan { dst } if t == dst => Ok(self.arrive(dst)),
            SessionState::AwaitingFirstScan { dst } => {
                self.state = SessionState::AwaitingSecondScan { dst, first: t };
                Ok(vec![self.system(text::WALK_TO_ADJACENT)])
            }
            SessionState::AwaitingSecondScan { first, .. } if t == first => Ok(Vec::new()),
            SessionState::AwaitingSecondScan { dst, first } => {
                if self.map.are_adjacent(first, t) {
                    if t == dst {
                        return Ok(self.arrive(dst));
                    }
                    let heading = infer_heading(&self.map, first, t)?;
                    self.guide(dst, t, heading)
                } else if t == dst {
                    Ok(self.arrive(dst))
                } else {
                    self.state = SessionState::AwaitingSecondScan { dst, first: t };
                    Ok(vec![self.system(text::WALK_TO_ADJACENT)])
                }
            }
            SessionState::Navigating { current, .. } if t == current => {
                let mut replay = match &self.last_instruction {
                    Some(c) => c.clone(),
                    None => return Ok(Vec::new()),
                };
                replay.timestamp = self.clock;
                Ok(vec![replay])
            }
            SessionState::Navigating { dst, .. } if t == dst => Ok(self.arrive(dst)),
            SessionState::Navigating { dst, current, .. } => {
                if self.map.are_adjacent(current, t) {
                    let heading = infer_heading(&self.map, current, t)?;
                    self.guide(dst, t, heading)
                } else {
                    self.state = SessionState::AwaitingSecondScan { dst, first: t };
                    Ok(vec![self.system(text::ORIENTATION_LOST)])
                }
            }
            SessionState::Idle
            | SessionState::EnteringDestination { .. }
            | SessionState::Arrived { .. } => Ok(vec![self.system(text::ENTER_DESTINATION_FIRST)]),
        }
    }
}

/// Re-applies a recorded transcript to a fresh session. Each event is
/// stamped with its recorded cue time so cue records reproduce exactly.
pub fn replay(map: Arc<RoomMap>, entries: &[TranscriptEntry]) -> Result<NavSession> {
    let mut session = NavSession::new(map);
    for e in entries {
        let t = e.cues.first().map_or(session.clock, |c| c.timestamp);
        session.handle_event_at(e.event, t)?;
    }
    Ok(session)
}

/// First point where a replayed transcript disagrees with the recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub seq: u64,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "transcript diverges at seq {}", self.seq)?;
        if let Some(e) = &self.expected {
            write!(f, "\n  recorded: {e}")?;
        }
        if let Some(a) = &self.actual {
            write!(f, "\n  replayed: {a}")?;
        }
        Ok(())
    }
}

/// Replays `entries` and compares every record byte-for-byte in its
/// serialized form.
pub fn verify_transcript(
    map: Arc<RoomMap>,
    entries: &[TranscriptEntry],
) -> Result<std::result::Result<(), Divergence>> {
    let mut session = NavSession::new(map);
    for (i, recorded) in entries.iter().enumerate() {
        let expected_line = serde_json::to_string(recorded)?;
        let t = recorded.cues.first().map_or(session.clock, |c| c.timestamp);
        let seq = i as u64 + 1;
        if recorded.seq != seq {
            return Ok(Err(Divergence { seq, expected: Some(expected_line), actual: None }));
        }
        if let Err(e) = session.handle_event_at(recorded.event, t) {
            return Ok(Err(Divergence {
                seq,
                expected: Some(expected_line),
                actual: Some(format!("error: {e}")),
            }));
        }
        let actual_line = serde_json::to_string(session.transcript().last().unwrap())?;
        if actual_line != expected_line {
            return Ok(Err(Divergence {
                seq,
                expected: Some(expected_line),
                actual: Some(actual_line),
            }));
        }
    }
    Ok(Ok(()))
}

/// Writes a transcript as line-delimited JSON.
pub fn write_transcript(mut out: impl Write, entries: &[TranscriptEntry]) -> Result<()> {
    for e in entries {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_transcript(input: impl BufRead) -> Result<Vec<TranscriptEntry>> {
    let mut entries = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line)
            .map_err(|source| Error::Transcript { line: i + 1, source })?;
        entries.push(entry);
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::clinic;

    fn keys(s: &mut NavSession, text: &str) -> Vec<Cue> {
        text.chars().flat_map(|c| s.handle_event(SessionEvent::key(c).unwrap()).unwrap()).collect()
    }

    fn scan(s: &mut NavSession, name: &str) -> Vec<Cue> {
        let id = s.map().resolve(name).unwrap();
        s.handle_event(SessionEvent::Scan(id)).unwrap()
    }

    #[test]
    fn fresh_session_is_idle() {
        let s = NavSession::new(Arc::new(clinic()));
        assert_eq!(s.state(), &SessionState::Idle);
        assert!(s.transcript().is_empty());
        assert_eq!(s.cues().count(), 0);
    }

    #[test]
    fn seventeen_hash_selects_q() {
        let mut s = NavSession::new(Arc::new(clinic()));
        let cues = keys(&mut s, "17#");
        assert_eq!(s.state(), &SessionState::AwaitingFirstScan { dst: 17 });
        assert_eq!(cues.len(), 1);
        assert_eq!(cues[0].kind, CueKind::System);
        assert_eq!(cues[0].text, "Destination set to Q.");
        assert_eq!(s.transcript().len(), 3);
    }

    #[test]
    fn unknown_destination_returns_to_idle() {
        let mut s = NavSession::new(Arc::new(clinic()));
        let cues = keys(&mut s, "99#");
        assert_eq!(s.state(), &SessionState::Idle);
        assert_eq!(cues[0].text, text::UNKNOWN_DESTINATION);
        let cues = keys(&mut s, "#");
        assert_eq!(cues[0].text, text::ENTER_DESTINATION_FIRST);
    }

    #[test]
    fn digit_overflow_clears_buffer() {
        let mut s = NavSession::new(Arc::new(clinic()));
        assert!(keys(&mut s, "1234").is_empty());
        let cues = keys(&mut s, "5");
        assert_eq!(cues[0].text, text::TOO_MANY_DIGITS);
        assert_eq!(s.state(), &SessionState::Idle);
    }

    #[test]
    fn acquisition_then_guidance() {
        let map = Arc::new(clinic());
        let mut s = NavSession::new(map.clone());
        keys(&mut s, "17#");
        assert_eq!(scan(&mut s, "A")[0].text, text::WALK_TO_ADJACENT);
        // B lies due north of A
        let cues = scan(&mut s, "B");
        assert_eq!(
            s.state(),
            &SessionState::Navigating { dst: 17, current: 2, heading: HexDirection::N }
        );
        assert_eq!(cues[0].kind, CueKind::Instruction);
        let expected = plan_instruction(&map, 2, HexDirection::N, 17).unwrap();
        assert_eq!(cues[0].text, expected.cue_text());
        assert_eq!(cues[0].at_tag, Some(2));
    }

    #[test]
    fn repeated_and_stray_scans() {
        let mut s = NavSession::new(Arc::new(clinic()));
        keys(&mut s, "17#");
        scan(&mut s, "A");
        assert!(scan(&mut s, "A").is_empty());
        assert_eq!(s.state(), &SessionState::AwaitingSecondScan { dst: 17, first: 1 });
        // X is far away: re-seed
        scan(&mut s, "X");
        assert_eq!(s.state(), &SessionState::AwaitingSecondScan { dst: 17, first: 24 });
        scan(&mut s, "W");
        let first = s.cues().last().unwrap().clone();
        let again = scan(&mut s, "W");
        assert_eq!(again[0].text, first.text);
        let lost = scan(&mut s, "A");
        assert_eq!(lost[0].text, text::ORIENTATION_LOST);
        assert_eq!(s.state(), &SessionState::AwaitingSecondScan { dst: 17, first: 1 });
    }

    #[test]
    fn landmarks_and_unknown_position() {
        let mut s = NavSession::new(Arc::new(clinic()));
        assert_eq!(keys(&mut s, "A")[0].text, text::POSITION_UNKNOWN);
        keys(&mut s, "17#");
        scan(&mut s, "B");
        assert_eq!(keys(&mut s, "A")[0].text, text::NO_INFORMATION);
        scan(&mut s, "A");
        let cue = &keys(&mut s, "A")[0];
        assert_eq!(cue.kind, CueKind::Landmark);
        assert_eq!(cue.text, "Office number 1 is located here.");
    }

    #[test]
    fn arrival_at_q_and_reception_landmark() {
        let mut s = NavSession::new(Arc::new(clinic()));
        keys(&mut s, "17#");
        scan(&mut s, "N");
        let cues = scan(&mut s, "Q");
        assert_eq!(cues[0].text, Instruction::Arrived.cue_text());
        assert_eq!(s.state(), &SessionState::Arrived { dst: 17 });
        assert_eq!(keys(&mut s, "A")[0].text, "This is the reception table.");
        assert_eq!(scan(&mut s, "N")[0].text, text::ENTER_DESTINATION_FIRST);
    }

    #[test]
    fn first_scan_on_destination_arrives() {
        let mut s = NavSession::new(Arc::new(clinic()));
        keys(&mut s, "1#");
        let cues = scan(&mut s, "A");
        assert_eq!(cues[0].text, Instruction::Arrived.cue_text());
    }

    #[test]
    fn star_restarts_and_scan_in_idle_is_rejected() {
        let mut s = NavSession::new(Arc::new(clinic()));
        assert_eq!(scan(&mut s, "A")[0].text, text::ENTER_DESTINATION_FIRST);
        assert_eq!(s.state(), &SessionState::Idle);
        keys(&mut s, "17#");
        scan(&mut s, "A");
        scan(&mut s, "B");
        assert_eq!(keys(&mut s, "*")[0].text, text::RESTARTED);
        assert_eq!(s.state(), &SessionState::Idle);
    }

    #[test]
    fn unknown_tag_scan_is_an_error() {
        let mut s = NavSession::new(Arc::new(clinic()));
        assert!(matches!(s.handle_event(SessionEvent::Scan(400)), Err(Error::UnknownTag(400))));
        assert!(s.transcript().is_empty());
    }

    #[test]
    fn key_symbols() {
        assert!(KeySymbol::new('@').is_err());
        assert!("##".parse::<KeySymbol>().is_err());
        assert_eq!(KeySymbol::all().count(), 13);
        let json = serde_json::to_string(&SessionEvent::Key(KeySymbol::HASH)).unwrap();
        assert_eq!(json, r##"{"key":"#"}"##);
        assert!(serde_json::from_str::<SessionEvent>(r#"{"key":"B"}"#).is_err());
        assert_eq!(serde_json::to_string(&SessionEvent::Scan(3)).unwrap(), r#"{"scan":3}"#);
    }

    #[test]
    fn transcript_round_trips_and_replays() {
        let map = Arc::new(clinic());
        let mut s = NavSession::new(map.clone());
        keys(&mut s, "17#");
        s.handle_event_at(SessionEvent::Scan(1), 1.0).unwrap();
        s.handle_event_at(SessionEvent::Scan(2), 12.5).unwrap();
        let mut buf = Vec::new();
        write_transcript(&mut buf, s.transcript()).unwrap();
        let back = read_transcript(buf.as_slice()).unwrap();
        assert_eq!(back, s.transcript());
        let replayed = replay(map.clone(), &back).unwrap();
        assert_eq!(replayed.state(), s.state());
        assert_eq!(verify_transcript(map.clone(), &back).unwrap(), Ok(()));

        let mut tampered = back.clone();
        tampered[4].cues[0].text.push('!');
        let d = verify_transcript(map, &tampered).unwrap().unwrap_err();
        assert_eq!(d.seq, 5);
    }
}
