//! Network front end.
//!
//! Connections are handled concurrently, but every inbound envelope, tick and
//! disconnect is funnelled through one channel into a single task that owns
//! the [`Engine`]. That task is the only writer of world state.
//!
//! A connection whose first bytes are `GET ` is treated as a browser
//! WebSocket upgrade; each binary WebSocket message then carries one complete
//! frame (text messages may carry the bare JSON body). Anything else speaks
//! raw frames over TCP.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::time::Duration;

use crossdrop_core::DWorldState;
use futures_util::{SinkExt, StreamExt};
use tokio::io::AsyncWriteExt;
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, oneshot, watch};
use tokio::task::JoinHandle;
use tokio_tungstenite::tungstenite::Message as WsMessage;
use tracing::{debug, info, warn};

use crate::clock::{Clock, VirtualClock, WallClock};
use crate::engine::{Engine, Outbound};
use crate::protocol::{decode, decode_body, encode, read_frame, write_frame, Envelope, FrameIoError, ProtocolError, HEADER_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockMode {
    /// Ticks at `tick_hz` real time, reading the wall clock.
    Wall,
    /// Ticks at `tick_hz` real time, but time advances exactly 1/tick_hz per tick.
    Virtual,
    /// Virtual time that only advances through [`ServerHandle::tick`].
    Manual,
}

#[derive(Debug, Clone, Copy)]
pub struct ServerOptions {
    pub tick_hz: u32,
    pub clock: ClockMode,
}

enum Cmd {
    Connect {
        reply: oneshot::Sender<(String, mpsc::UnboundedReceiver<Envelope>)>,
    },
    Inbound {
        session: String,
        env: Envelope,
    },
    Reject {
        session: String,
        err: ProtocolError,
    },
    Disconnect {
        session: String,
    },
    Tick {
        done: Option<oneshot::Sender<f64>>,
    },
    Snapshot {
        reply: oneshot::Sender<DWorldState>,
    },
    Stop,
}

pub struct ServerHandle {
    addr: SocketAddr,
    cmds: mpsc::UnboundedSender<Cmd>,
    stop: watch::Sender<bool>,
    tasks: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Advances the clock by one tick and waits until it has been applied.
    /// Returns the new clock reading.
    pub async fn tick(&self) -> f64 {
        let (done, rx) = oneshot::channel();
        let _ = self.cmds.send(Cmd::Tick { done: Some(done) });
        rx.await.unwrap_or(f64::NAN)
    }

    /// Copy of the world as of every command queued before this call.
    pub async fn snapshot(&self) -> Option<DWorldState> {
        let (reply, rx) = oneshot::channel();
        self.cmds.send(Cmd::Snapshot { reply }).ok()?;
        rx.await.ok()
    }

    pub async fn shutdown(self) {
        let _ = self.stop.send(true);
        let _ = self.cmds.send(Cmd::Stop);
        for t in self.tasks {
            let _ = t.await;
        }
    }
}

/// Starts serving on an already bound listener.
pub fn serve(engine: Engine, listener: TcpListener, opts: ServerOptions) -> std::io::Result<ServerHandle> {
    assert!(opts.tick_hz > 0, "tick rate must be positive");
    let addr = listener.local_addr()?;
    let (cmds, rx) = mpsc::unbounded_channel();
    let (stop, stop_rx) = watch::channel(false);
    let clock: Box<dyn Clock> = match opts.clock {
        ClockMode::Wall => Box::new(WallClock::new()),
        ClockMode::Virtual | ClockMode::Manual => Box::new(VirtualClock::new(opts.tick_hz)),
    };
    let mut tasks = vec![tokio::spawn(run_engine(engine, clock, rx))];
    if opts.clock != ClockMode::Manual {
        tasks.push(tokio::spawn(run_ticker(opts.tick_hz, cmds.clone(), stop_rx.clone())));
    }
    tasks.push(tokio::spawn(run_acceptor(listener, cmds.clone(), stop_rx)));
    info!(%addr, tick_hz = opts.tick_hz, clock = ?opts.clock, "hub listening");
    Ok(ServerHandle {
        addr,
        cmds,
        stop,
        tasks,
    })
}

async fn run_engine(mut engine: Engine, mut clock: Box<dyn Clock>, mut rx: mpsc::UnboundedReceiver<Cmd>) {
    let mut outlets: BTreeMap<String, mpsc::UnboundedSender<Envelope>> = BTreeMap::new();
    while let Some(cmd) = rx.recv().await {
        let out = match cmd {
            Cmd::Connect { reply } => {
                let id = engine.open_session(clock.now());
                let (tx, rx) = mpsc::unbounded_channel();
                outlets.insert(id.clone(), tx);
                debug!(session = %id, "session opened");
                if reply.send((id.clone(), rx)).is_err() {
                    outlets.remove(&id);
                    engine.close_session(&id)
                } else {
                    Vec::new()
                }
            }
            Cmd::Inbound { session, env } => engine.handle(&session, env, clock.now()),
            Cmd::Reject { session, err } => engine.reject(&session, &err),
            Cmd::Disconnect { session } => {
                debug!(session = %session, "session closed");
                outlets.remove(&session);
                engine.close_session(&session)
            }
            Cmd::Tick { done } => {
                let now = clock.advance();
                let out = engine.tick(now).unwrap_or_else(|e| {
                    warn!("tick rejected: {e}");
                    Vec::new()
                });
                if let Some(done) = done {
                    let _ = done.send(now);
                }
                out
            }
            Cmd::Snapshot { reply } => {
                let _ = reply.send(engine.snapshot());
                Vec::new()
            }
            Cmd::Stop => break,
        };
        dispatch(&outlets, out);
        // Sessions dropped by the engine (e.g. expired) lose their outlet,
        // which closes the connection.
        outlets.retain(|id, _| engine.session(id).is_some());
    }
}

fn dispatch(outlets: &BTreeMap<String, mpsc::UnboundedSender<Envelope>>, out: Vec<Outbound>) {
    for o in out {
        if let Some(tx) = outlets.get(&o.session_id) {
            let _ = tx.send(o.envelope);
        }
    }
}

async fn run_ticker(tick_hz: u32, cmds: mpsc::UnboundedSender<Cmd>, mut stop: watch::Receiver<bool>) {
    let mut interval = tokio::time::interval(Duration::from_secs_f64(1.0 / tick_hz as f64));
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        tokio::select! {
            _ = interval.tick() => {
                if cmds.send(Cmd::Tick { done: None }).is_err() {
                    return;
                }
            }
            _ = stop.changed() => return,
        }
    }
}

async fn run_acceptor(listener: TcpListener, cmds: mpsc::UnboundedSender<Cmd>, mut stop: watch::Receiver<bool>) {
    loop {
        tokio::select! {
            accepted = listener.accept() => match accepted {
                Ok((stream, peer)) => {
                    let _ = stream.set_nodelay(true);
                    let cmds = cmds.clone();
                    tokio::spawn(async move {
                        if let Err(e) = handle_connection(stream, cmds).await {
                            debug!(%peer, "connection ended: {e}");
                        }
                    });
                }
                Err(e) => warn!("accept failed: {e}"),
            },
            _ = stop.changed() => return,
        }
    }
}

async fn open_session(cmds: &mpsc::UnboundedSender<Cmd>) -> Option<(String, mpsc::UnboundedReceiver<Envelope>)> {
    let (reply, rx) = oneshot::channel();
    cmds.send(Cmd::Connect { reply }).ok()?;
    rx.await.ok()
}

async fn handle_connection(stream: TcpStream, cmds: mpsc::UnboundedSender<Cmd>) -> std::io::Result<()> {
    if is_http_upgrade(&stream).await? {
        let ws = tokio_tungstenite::accept_async(stream)
            .await
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        serve_websocket(ws, cmds).await;
    } else {
        let (rd, wr) = stream.into_split();
        serve_framed(rd, wr, cmds).await;
    }
    Ok(())
}

/// Waits for the first four bytes and checks for an HTTP GET.
async fn is_http_upgrade(stream: &TcpStream) -> std::io::Result<bool> {
    let mut buf = [0u8; 4];
    loop {
        let n = stream.peek(&mut buf).await?;
        if n == 0 {
            return Ok(false);
        }
        if n >= buf.len() {
            return Ok(&buf == b"GET ");
        }
        if !b"GET ".starts_with(&buf[..n]) {
            return Ok(false);
        }
        tokio::time::sleep(Duration::from_millis(1)).await;
    }
}

async fn serve_framed(mut rd: OwnedReadHalf, mut wr: OwnedWriteHalf, cmds: mpsc::UnboundedSender<Cmd>) {
    let Some((session, mut outbox)) = open_session(&cmds).await else {
        return;
    };
    let mut writer = tokio::spawn(async move {
        while let Some(env) = outbox.recv().await {
            if write_frame(&mut wr, &env).await.is_err() {
                break;
            }
        }
        let _ = wr.shutdown().await;
    });
    let mut writer_done = false;
    loop {
        tokio::select! {
            frame = read_frame(&mut rd) => match frame {
                Ok(env) => {
                    let _ = cmds.send(Cmd::Inbound { session: session.clone(), env });
                }
                Err(FrameIoError::Protocol(err)) => {
                    // Body errors leave the stream aligned on the next frame;
                    // a bad header does not, so the connection is dropped.
                    let fatal = err.offset < HEADER_LEN;
                    let _ = cmds.send(Cmd::Reject { session: session.clone(), err });
                    if fatal {
                        break;
                    }
                }
                Err(_) => break,
            },
            _ = &mut writer => {
                writer_done = true;
                break;
            }
        }
    }
    let _ = cmds.send(Cmd::Disconnect { session });
    // Let queued replies (such as a final error) drain before the socket closes.
    if !writer_done {
        let _ = tokio::time::timeout(Duration::from_secs(1), writer).await;
    }
}

async fn serve_websocket(ws: tokio_tungstenite::WebSocketStream<TcpStream>, cmds: mpsc::UnboundedSender<Cmd>) {
    let Some((session, mut outbox)) = open_session(&cmds).await else {
        return;
    };
    let (mut sink, mut stream) = ws.split();
    let mut writer = tokio::spawn(async move {
        while let Some(env) = outbox.recv().await {
            if sink.send(WsMessage::Binary(encode(&env))).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });
    let mut writer_done = false;
    loop {
        tokio::select! {
            msg = stream.next() => {
                let decoded = match msg {
                    Some(Ok(WsMessage::Binary(bytes))) => decode(&bytes),
                    Some(Ok(WsMessage::Text(text))) => decode_body(text.as_bytes(), 0),
                    Some(Ok(WsMessage::Close(_))) | Some(Err(_)) | None => break,
                    Some(Ok(_)) => continue,
                };
                let cmd = match decoded {
                    Ok(env) => Cmd::Inbound { session: session.clone(), env },
                    Err(err) => Cmd::Reject { session: session.clone(), err },
                };
                let _ = cmds.send(cmd);
            }
            _ = &mut writer => {
                writer_done = true;
                break;
            }
        }
    }
    let _ = cmds.send(Cmd::Disconnect { session });
    if !writer_done {
        let _ = tokio::time::timeout(Duration::from_secs(1), writer).await;
    }
}
