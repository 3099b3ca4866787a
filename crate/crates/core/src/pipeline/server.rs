//! WebSocket control service.
//!
//! Clients connect to `/ws` and send touch messages; every batch that
//! leaves the rate limiter is broadcast to all clients as a full state
//! message. A new client first receives the current state, then the slider
//! layout.
//!
//! ```text
//! -> {"type":"touch","x":0,"y":6143,"z":128,"finger":true}
//! <- {"type":"state","levels":[22,0,0,0,0],"rgb":[255,0,0]}
//! <- {"type":"error","message":"..."}
//! ```
//!
//! Sessions never touch controller state themselves. They forward raw text
//! into a queue drained by a single event loop task, which owns the
//! [`Controller`] and each session's outbox.

use std::collections::BTreeMap;
use std::future::Future;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::net::{TcpListener, ToSocketAddrs};
use tokio::sync::mpsc;
use tokio::time::Instant;

use super::{Batch, Controller, RateLimiter};
use crate::frame_codec::TouchSample;
use crate::light_model::{LightState, CHANNEL_COUNT};
use crate::slider_engine::{EngineConfig, SliderLayout};

pub const WS_PATH: &str = "/ws";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Inbound {
    Touch { x: u16, y: u16, z: u8, finger: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Outbound {
    State {
        levels: [u8; CHANNEL_COUNT],
        rgb: [u8; 3],
    },
    Layout {
        slider_count: usize,
        band_width: u16,
        gap_width: u16,
        x_max: u16,
        y_max: u16,
        level_count: u8,
        y_inverted: bool,
    },
    Error {
        message: String,
    },
}

impl Outbound {
    pub fn state(light: &LightState) -> Self {
        Outbound::State {
            levels: light.levels,
            rgb: light.blend(),
        }
    }

    pub fn layout(layout: &SliderLayout) -> Self {
        Outbound::Layout {
            slider_count: SliderLayout::SLIDER_COUNT,
            band_width: layout.band_width,
            gap_width: layout.gap_width,
            x_max: SliderLayout::X_MAX,
            y_max: SliderLayout::Y_MAX,
            level_count: layout.level_count,
            y_inverted: layout.y_inverted,
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Outbound::Error {
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outbound messages serialize")
    }
}

type ClientId = u64;

#[derive(Debug)]
enum Event {
    Connect {
        id: ClientId,
        outbox: mpsc::UnboundedSender<String>,
    },
    Text {
        id: ClientId,
        text: String,
    },
    Invalid {
        id: ClientId,
        message: &'static str,
    },
    Disconnect {
        id: ClientId,
    },
}

struct Shared {
    events: mpsc::UnboundedSender<Event>,
    next_id: AtomicU64,
}

pub struct Server {
    listener: TcpListener,
    config: EngineConfig,
    tick_ms: u64,
}

/// Binds the listening socket. Fails if the address is unavailable.
pub async fn bind(config: EngineConfig, addr: impl ToSocketAddrs) -> std::io::Result<Server> {
    let listener = TcpListener::bind(addr).await?;
    Ok(Server {
        listener,
        config,
        tick_ms: super::DEFAULT_TICK_MS,
    })
}

impl Server {
    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub async fn run(self) -> std::io::Result<()> {
        self.run_until(std::future::pending()).await
    }

    pub async fn run_until(
        self,
        shutdown: impl Future<Output = ()> + Send + 'static,
    ) -> std::io::Result<()> {
        let (tx, rx) = mpsc::unbounded_channel();
        let controller =
            Controller::with_limiter(self.config, Some(RateLimiter::new(self.tick_ms)));
        let event_loop = tokio::spawn(run_event_loop(controller, rx));

        let shared = Arc::new(Shared {
            events: tx,
            next_id: AtomicU64::new(0),
        });
        let app = Router::new()
            .route(WS_PATH, get(upgrade))
            .with_state(shared);
        let served = axum::serve(self.listener, app)
            .with_graceful_shutdown(shutdown)
            .await;
        event_loop.abort();
        served
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> Response {
    ws.on_upgrade(move |socket| session(socket, shared))
}

async fn session(socket: WebSocket, shared: Arc<Shared>) {
    let id = shared.next_id.fetch_add(1, Ordering::Relaxed);
    let (outbox, mut outgoing) = mpsc::unbounded_channel::<String>();
    if shared.events.send(Event::Connect { id, outbox }).is_err() {
        return;
    }
    let (mut sink, mut stream) = socket.split();

    let writer = tokio::spawn(async move {
        while let Some(text) = outgoing.recv().await {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });

    while let Some(Ok(msg)) = stream.next().await {
        let event = match msg {
            Message::Text(text) => Event::Text {
                id,
                text: text.to_string(),
            },
            Message::Binary(_) => Event::Invalid {
                id,
                message: "binary messages are not supported",
            },
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        if shared.events.send(event).is_err() {
            break;
        }
    }

    let _ = shared.events.send(Event::Disconnect { id });
    writer.abort();
    tracing::debug!(client = id, "session closed");
}

async fn run_event_loop(mut ctl: Controller, mut events: mpsc::UnboundedReceiver<Event>) {
    let start = Instant::now();
    let now_ms = || start.elapsed().as_millis() as u64;
    let mut clients: BTreeMap<ClientId, mpsc::UnboundedSender<String>> = BTreeMap::new();

    loop {
        let deadline = ctl.deadline();
        let wake = start + Duration::from_millis(deadline.unwrap_or(0));
        tokio::select! {
            event = events.recv() => {
                let Some(event) = event else { break };
                match event {
                    Event::Connect { id, outbox } => {
                        let _ = outbox.send(Outbound::state(ctl.light()).to_json());
                        let _ = outbox.send(Outbound::layout(&ctl.config().layout).to_json());
                        clients.insert(id, outbox);
                        tracing::debug!(client = id, "session opened");
                    }
                    Event::Disconnect { id } => {
                        clients.remove(&id);
                    }
                    Event::Invalid { id, message } => reply_error(&clients, id, message),
                    Event::Text { id, text } => match serde_json::from_str::<Inbound>(&text) {
                        Ok(Inbound::Touch { x, y, z, finger }) => {
                            let sample = TouchSample::new(x, y, z, finger).at(now_ms());
                            let before = *ctl.light();
                            match ctl.handle_sample(&sample) {
                                Ok(batches) => broadcast(&mut clients, before, &batches),
                                Err(e) => reply_error(&clients, id, &e.to_string()),
                            }
                        }
                        Err(e) => reply_error(&clients, id, &format!("malformed message: {e}")),
                    },
                }
            }
            _ = tokio::time::sleep_until(wake), if deadline.is_some() => {
                let before = *ctl.light();
                let flushed: Vec<Batch> = ctl.poll(now_ms()).into_iter().collect();
                broadcast(&mut clients, before, &flushed);
            }
        }
    }
}

fn reply_error(
    clients: &BTreeMap<ClientId, mpsc::UnboundedSender<String>>,
    id: ClientId,
    message: &str,
) {
    if let Some(outbox) = clients.get(&id) {
        let _ = outbox.send(Outbound::error(message).to_json());
    }
}

/// One state message per flushed batch, to every client. `state` is the
/// light state before the first batch.
fn broadcast(
    clients: &mut BTreeMap<ClientId, mpsc::UnboundedSender<String>>,
    mut state: LightState,
    batches: &[Batch],
) {
    for batch in batches {
        for cmd in &batch.commands {
            state.apply(cmd);
        }
        let text = Outbound::state(&state).to_json();
        clients.retain(|_, outbox| outbox.send(text.clone()).is_ok());
    }
}
