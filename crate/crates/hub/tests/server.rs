mod common;

use std::time::Duration;

use common::*;
use crossdrop_core::*;
use crossdrop_hub::client::Client;
use crossdrop_hub::{encode, serve, ClockMode, Engine, Envelope, ErrorCode, Message, ServerHandle, ServerOptions};
use futures_util::{SinkExt, StreamExt};
use tokio::io::AsyncWriteExt;
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message as WsMessage;

const WAIT: Duration = Duration::from_secs(5);

async fn start() -> ServerHandle {
    let engine = Engine::with_contents([cube("a"), gearbox("g")], quick_config());
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    serve(
        engine,
        listener,
        ServerOptions {
            tick_hz: 60,
            clock: ClockMode::Manual,
        },
    )
    .unwrap()
}

async fn next_message(c: &mut Client) -> Message {
    c.recv_timeout(WAIT).await.expect("reply in time").expect("frame").message
}

async fn next_delta(c: &mut Client) -> DDelta {
    loop {
        if let Message::Delta(d) = next_message(c).await {
            return d;
        }
    }
}

#[tokio::test]
async fn tcp_clients_place_content_end_to_end() {
    let hub = start().await;
    let mut op = Client::connect(hub.local_addr()).await.unwrap();
    let mut disp = Client::connect(hub.local_addr()).await.unwrap();
    op.register_operator().await.unwrap();
    let world = disp.register_display(wall("wall", 0.0)).await.unwrap();
    assert!(world.displays.contains_key("wall"));
    assert!(!op.session_id().is_empty());
    assert_ne!(op.session_id(), disp.session_id());

    op.send(Message::PlaceCommand {
        content_id: "g".into(),
        display_id: "wall".into(),
    })
    .await
    .unwrap();
    let mut replica = world;
    replica.apply_delta(&next_delta(&mut disp).await).unwrap();
    // 0.5 s transit at 60 Hz.
    for _ in 0..30 {
        hub.tick().await;
    }
    replica.apply_delta(&next_delta(&mut disp).await).unwrap();
    assert!(replica.placements["g"].is_displayed());
    assert_eq!(Some(replica), hub.snapshot().await);
    hub.shutdown().await;
}

#[tokio::test]
async fn malformed_body_gets_protocol_error_and_connection_survives() {
    let hub = start().await;
    let mut raw = TcpStream::connect(hub.local_addr()).await.unwrap();
    let body = br#"{"session_id":"","seq":1,"message":{"Ack":{"seq":-1}}}"#;
    raw.write_all(&(body.len() as u32).to_be_bytes()).await.unwrap();
    raw.write_all(body).await.unwrap();
    let env = Envelope::new("", 2, Message::RegisterOperator {});
    raw.write_all(&encode(&env)).await.unwrap();

    let (mut rd, _wr) = raw.into_split();
    let first = crossdrop_hub::protocol::read_frame(&mut rd).await.unwrap();
    match first.message {
        Message::Error { code, detail } => {
            assert_eq!(code, ErrorCode::ProtocolError);
            assert!(detail.contains("byte"), "{detail}");
        }
        other => panic!("{other:?}"),
    }
    let second = crossdrop_hub::protocol::read_frame(&mut rd).await.unwrap();
    assert_eq!(second.message, Message::Ack { seq: 2 });
    assert_eq!((first.seq, second.seq), (1, 2));
    hub.shutdown().await;
}

#[tokio::test]
async fn websocket_clients_use_the_same_frames() {
    let hub = start().await;
    let url = format!("ws://{}/", hub.local_addr());
    let (mut ws, _) = tokio_tungstenite::connect_async(url).await.unwrap();
    let reg = Envelope::new("", 1, Message::RegisterDisplay { profile: wall("wall", 0.0) });
    ws.send(WsMessage::Binary(encode(&reg))).await.unwrap();

    let mut names = Vec::new();
    while names.len() < 2 {
        let msg = tokio::time::timeout(WAIT, ws.next()).await.unwrap().unwrap().unwrap();
        let WsMessage::Binary(bytes) = msg else { continue };
        names.push(crossdrop_hub::decode(&bytes).unwrap().message.name());
    }
    assert_eq!(names, ["Ack", "Snapshot"]);

    // Text messages carry a bare JSON body.
    ws.send(WsMessage::Text(r#"{"session_id":"","seq":2,"message":{"RequestSnapshot":{}}}"#.into()))
        .await
        .unwrap();
    let msg = tokio::time::timeout(WAIT, ws.next()).await.unwrap().unwrap().unwrap();
    let WsMessage::Binary(bytes) = msg else { panic!("{msg:?}") };
    assert_eq!(crossdrop_hub::decode(&bytes).unwrap().message.name(), "Snapshot");
    hub.shutdown().await;
}

#[tokio::test]
async fn dropping_a_display_connection_returns_its_content() {
    let hub = start().await;
    let mut op = Client::connect(hub.local_addr()).await.unwrap();
    op.register_operator().await.unwrap();
    let mut disp = Client::connect(hub.local_addr()).await.unwrap();
    disp.register_display(wall("wall", 0.0)).await.unwrap();
    next_delta(&mut op).await;

    op.send(Message::PlaceCommand {
        content_id: "a".into(),
        display_id: "wall".into(),
    })
    .await
    .unwrap();
    next_delta(&mut op).await;
    for _ in 0..30 {
        hub.tick().await;
    }
    next_delta(&mut op).await;
    drop(disp);

    let d = next_delta(&mut op).await;
    assert!(d.changes.iter().any(|c| matches!(c, Change::RemoveDisplay { .. })));
    let w = hub.snapshot().await.unwrap();
    assert!(w.placements["a"].is_in_control());
    assert!(w.displays.is_empty());
    hub.shutdown().await;
}
