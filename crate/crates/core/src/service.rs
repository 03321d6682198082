//! HTTP surface for interactive walkthroughs.
//!
//! A *walk* pairs a [`NavSession`] with a virtual pedestrian standing
//! somewhere on the map. Clients drive it exactly like the physical device:
//! keypad presses, plus one-hop moves that fire scans whenever the reader
//! lands on a tag. Every cue carries the sequence number of the session
//! event that produced it, so `GET /walks/{id}?since=n` can hand back only
//! what the client has not seen yet.
//!
//! | method | path                | body                          |
//! |--------|---------------------|-------------------------------|
//! | GET    | `/maps`             |                               |
//! | GET    | `/maps/{id}`        |                               |
//! | POST   | `/walks`            | `{"map_id", "reader"?}`       |
//! | POST   | `/walks/{id}/keys`  | `{"symbol"}`                  |
//! | POST   | `/walks/{id}/moves` | `{"direction"}` or `{"dx_m", "dy_m"}` |
//! | GET    | `/walks/{id}`       | query `since`, `timeout_ms`   |

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::watch;

use crate::error::{Error, Result};
use crate::hex::HexDirection;
use crate::map::{nearest_order, MapFile, RoomMap, TagId};
use crate::session::{CueKind, KeySymbol, NavSession, SessionEvent, SessionState};
use crate::sim::{ReaderModel, TagReader};

/// Upper bound on a long-poll wait.
pub const MAX_POLL: Duration = Duration::from_secs(30);

/// A cue as sent over the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireCue {
    pub seq: u64,
    pub kind: CueKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_tag: Option<TagId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x_m: f64,
    pub y_m: f64,
}

/// Snapshot of a walk returned by every walk endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkView {
    pub walk_id: u64,
    pub map_id: String,
    /// Sequence number of the latest session event.
    pub seq: u64,
    pub state: SessionState,
    pub position: Position,
    /// Tag scanned by this request, for moves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scanned: Option<TagId>,
    pub cues: Vec<WireCue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapSummary {
    pub id: String,
    pub name: String,
    pub nodes: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateWalk {
    pub map_id: String,
    #[serde(default)]
    pub reader: Option<ReaderModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreatedWalk {
    pub walk_id: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct KeyRequest {
    pub symbol: String,
}

/// A one-hop lattice move or an arbitrary planar step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MoveRequest {
    Hop { direction: HexDirection },
    Step { dx_m: f64, dy_m: f64 },
}

#[derive(Debug)]
pub struct LiveWalk {
    pub map_id: String,
    session: NavSession,
    pos: (f64, f64),
    reader: TagReader,
}

impl LiveWalk {
    fn new(map_id: String, map: Arc<RoomMap>, reader: ReaderModel) -> Self {
        let pos = start_position(&map);
        let mut reader = TagReader::new(reader);
        // standing still on the start tag does not count as a scan
        reader.detect(pos, &map);
        LiveWalk { map_id, session: NavSession::new(map), pos, reader }
    }

    pub fn session(&self) -> &NavSession {
        &self.session
    }

    pub fn position(&self) -> (f64, f64) {
        self.pos
    }

    fn cues_after(&self, since: u64) -> Vec<WireCue> {
        self.session
            .transcript()
            .iter()
            .filter(|e| e.seq > since)
            .flat_map(|e| {
                e.cues.iter().map(move |c| WireCue {
                    seq: e.seq,
                    kind: c.kind,
                    text: c.text.clone(),
                    at_tag: c.at_tag,
                })
            })
            .collect()
    }

    fn view(&self, walk_id: u64, since: u64, scanned: Option<TagId>) -> WalkView {
        WalkView {
            walk_id,
            map_id: self.map_id.clone(),
            seq: self.session.last_seq(),
            state: self.session.state().clone(),
            position: Position { x_m: self.pos.0, y_m: self.pos.1 },
            scanned,
            cues: self.cues_after(since),
        }
    }
}

/// Tag nearest the centroid of all tags; ties go to the smaller id.
fn start_position(map: &RoomMap) -> (f64, f64) {
    let (cx, cy) = map.centroid();
    map.nodes()
        .iter()
        .map(|n| ((n.x_m - cx).hypot(n.y_m - cy), n.id))
        .min_by(|&a, &b| nearest_order(a, b))
        .and_then(|(_, id)| map.position(id).ok())
        .unwrap_or((cx, cy))
}

struct WalkSlot {
    walk: Mutex<LiveWalk>,
    seq: watch::Sender<u64>,
}

/// Registry of maps and live walks.
pub struct Service {
    maps: BTreeMap<String, Arc<RoomMap>>,
    walks: Mutex<HashMap<u64, Arc<WalkSlot>>>,
    next_id: AtomicU64,
}

impl Service {
    /// Maps are served under their `name`.
    pub fn new(maps: impl IntoIterator<Item = RoomMap>) -> Self {
        Service {
            maps: maps.into_iter().map(|m| (m.name().to_string(), Arc::new(m))).collect(),
            walks: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn maps(&self) -> Vec<MapSummary> {
        self.maps
            .iter()
            .map(|(id, m)| MapSummary { id: id.clone(), name: m.name().to_string(), nodes: m.len() })
            .collect()
    }

    pub fn map(&self, id: &str) -> Result<&Arc<RoomMap>> {
        self.maps.get(id).ok_or_else(|| Error::UnknownMap(id.to_string()))
    }

    pub fn create_walk(&self, map_id: &str, reader: Option<ReaderModel>) -> Result<u64> {
        let map = self.map(map_id)?.clone();
        let reader = reader.unwrap_or_default();
        reader.validate()?;
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let slot = WalkSlot {
            walk: Mutex::new(LiveWalk::new(map_id.to_string(), map, reader)),
            seq: watch::channel(0).0,
        };
        self.walks.lock().unwrap().insert(id, Arc::new(slot));
        Ok(id)
    }

    fn slot(&self, id: u64) -> Result<Arc<WalkSlot>> {
        self.walks.lock().unwrap().get(&id).cloned().ok_or(Error::UnknownWalk(id))
    }

    /// Runs `f` with exclusive access to the walk.
    pub fn with_walk<T>(&self, id: u64, f: impl FnOnce(&LiveWalk) -> T) -> Result<T> {
        let slot = self.slot(id)?;
        let walk = slot.walk.lock().unwrap();
        Ok(f(&walk))
    }

    pub fn post_key(&self, id: u64, symbol: &str) -> Result<WalkView> {
        let key: KeySymbol = symbol.parse()?;
        let slot = self.slot(id)?;
        let mut walk = slot.walk.lock().unwrap();
        let before = walk.session.last_seq();
        walk.session.handle_event(SessionEvent::Key(key))?;
        slot.seq.send_replace(walk.session.last_seq());
        Ok(walk.view(id, before, None))
    }

    pub fn post_move(&self, id: u64, request: MoveRequest) -> Result<WalkView> {
        let slot = self.slot(id)?;
        let mut walk = slot.walk.lock().unwrap();
        let map = walk.session.map().clone();
        let (dx, dy) = match request {
            MoveRequest::Hop { direction } => {
                let (ux, uy) = direction.unit_vector();
                (ux * map.spacing_m(), uy * map.spacing_m())
            }
            MoveRequest::Step { dx_m, dy_m } => {
                if !(dx_m.is_finite() && dy_m.is_finite()) {
                    return Err(Error::Domain("step must be finite".into()));
                }
                (dx_m, dy_m)
            }
        };
        let before = walk.session.last_seq();
        let target = map.bounds().clamp((walk.pos.0 + dx, walk.pos.1 + dy));
        // sample the segment midpoint so passing over a tag re-arms the reader
        let mid = ((walk.pos.0 + target.0) / 2.0, (walk.pos.1 + target.1) / 2.0);
        walk.reader.detect(mid, &map);
        walk.pos = target;
        let scanned = walk.reader.detect(target, &map);
        if let Some(tag) = scanned {
            walk.session.handle_event(SessionEvent::Scan(tag))?;
            slot.seq.send_replace(walk.session.last_seq());
        }
        Ok(walk.view(id, before, scanned))
    }

    /// Snapshot with the cues after `since` (all cues when absent).
    pub fn get_state(&self, id: u64, since: Option<u64>) -> Result<WalkView> {
        self.with_walk(id, |w| w.view(id, since.unwrap_or(0), None))
    }

    /// Like [`Service::get_state`] but waits up to `timeout` for an event
    /// newer than `since` when there is none yet.
    pub async fn wait_state(&self, id: u64, since: Option<u64>, timeout: Duration) -> Result<WalkView> {
        let slot = self.slot(id)?;
        if let Some(since) = since {
            let mut rx = slot.seq.subscribe();
            let wait = rx.wait_for(|&latest| latest > since);
            let _ = tokio::time::timeout(timeout.min(MAX_POLL), wait).await;
        }
        self.get_state(id, since)
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for Error {
    fn into_response(self) -> Response {
        let status = match &self {
            Error::UnknownWalk(_) | Error::UnknownMap(_) => StatusCode::NOT_FOUND,
            Error::BadSymbol(_) | Error::Domain(_) | Error::UnknownTag(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ErrorBody { error: self.to_string() })).into_response()
    }
}

#[derive(Debug, Deserialize)]
struct PollQuery {
    since: Option<u64>,
    #[serde(default)]
    timeout_ms: u64,
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/maps", get(list_maps))
        .route("/maps/{id}", get(get_map))
        .route("/walks", post(create_walk))
        .route("/walks/{id}", get(get_walk))
        .route("/walks/{id}/keys", post(post_key))
        .route("/walks/{id}/moves", post(post_move))
        .with_state(service)
}

async fn list_maps(State(svc): State<Arc<Service>>) -> Json<Vec<MapSummary>> {
    Json(svc.maps())
}

async fn get_map(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> Result<Json<MapFile>> {
    Ok(Json(svc.map(&id)?.to_file().clone()))
}

async fn create_walk(
    State(svc): State<Arc<Service>>,
    Json(req): Json<CreateWalk>,
) -> Result<Json<CreatedWalk>> {
    let walk_id = svc.create_walk(&req.map_id, req.reader)?;
    Ok(Json(CreatedWalk { walk_id }))
}

async fn get_walk(
    State(svc): State<Arc<Service>>,
    Path(id): Path<u64>,
    Query(q): Query<PollQuery>,
) -> Result<Json<WalkView>> {
    Ok(Json(svc.wait_state(id, q.since, Duration::from_millis(q.timeout_ms)).await?))
}

async fn post_key(
    State(svc): State<Arc<Service>>,
    Path(id): Path<u64>,
    Json(req): Json<KeyRequest>,
) -> Result<Json<WalkView>> {
    // existence is checked first so a bad symbol on a missing walk is a 404
    svc.slot(id)?;
    Ok(Json(svc.post_key(id, &req.symbol)?))
}

async fn post_move(
    State(svc): State<Arc<Service>>,
    Path(id): Path<u64>,
    Json(req): Json<MoveRequest>,
) -> Result<Json<WalkView>> {
    Ok(Json(svc.post_move(id, req)?))
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(service: Arc<Service>, addr: SocketAddr) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(service)).await?;
    Ok(())
}
