//! Wire protocol: length-prefixed JSON envelopes.
//!
//! Frame layout:
//!
//! ```text
//! +----------------------+---------------------------+
//! | length: u32 (BE)     | body: UTF-8 JSON envelope |
//! +----------------------+---------------------------+
//! ```
//!
//! The body is one [`Envelope`]. Messages use serde's external tagging, e.g.
//! `{"session_id":"s1","seq":3,"message":{"Ack":{"seq":2}}}`.

use std::fmt;

use crossdrop_core::{DDelta, DDisplayProfile, DGestureEvent, DWorldState};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::io::{AsyncRead, AsyncReadExt, AsyncWrite, AsyncWriteExt};

pub const HEADER_LEN: usize = 4;

/// Largest accepted body, 16 MiB.
pub const MAX_FRAME_LEN: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    NotFound,
    TransitionRejected,
    Forbidden,
    NoTarget,
    InvalidArgument,
    InvalidState,
    Conflict,
    ProtocolError,
    Desync,
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("error codes serialize");
        f.write_str(s.as_str().unwrap_or("unknown"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Message {
    RegisterDisplay { profile: DDisplayProfile },
    RegisterOperator {},
    Gesture { event: DGestureEvent },
    PlaceCommand { content_id: String, display_id: String },
    RetrieveCommand { content_id: String },
    /// Client asks for a fresh snapshot, e.g. after detecting a delta gap.
    RequestSnapshot {},
    Snapshot { world: DWorldState },
    Delta(DDelta),
    Ack { seq: u64 },
    Error { code: ErrorCode, detail: String },
}

impl Message {
    pub fn name(&self) -> &'static str {
        match self {
            Message::RegisterDisplay { .. } => "RegisterDisplay",
            Message::RegisterOperator {} => "RegisterOperator",
            Message::Gesture { .. } => "Gesture",
            Message::PlaceCommand { .. } => "PlaceCommand",
            Message::RetrieveCommand { .. } => "RetrieveCommand",
            Message::RequestSnapshot {} => "RequestSnapshot",
            Message::Snapshot { .. } => "Snapshot",
            Message::Delta(_) => "Delta",
            Message::Ack { .. } => "Ack",
            Message::Error { .. } => "Error",
        }
    }

    pub fn error(code: ErrorCode, detail: impl Into<String>) -> Self {
        Message::Error {
            code,
            detail: detail.into(),
        }
    }
}

/// Every frame carries the session it belongs to and a per-session sequence
/// number that strictly increases in each direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub session_id: String,
    pub seq: u64,
    pub message: Message,
}

impl Envelope {
    pub fn new(session_id: impl Into<String>, seq: u64, message: Message) -> Self {
        Self {
            session_id: session_id.into(),
            seq,
            message,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("protocol error at byte {offset}: {reason}")]
pub struct ProtocolError {
    pub offset: usize,
    pub reason: String,
}

impl ProtocolError {
    fn new(offset: usize, reason: impl Into<String>) -> Self {
        Self {
            offset,
            reason: reason.into(),
        }
    }
}

pub fn encode_body(env: &Envelope) -> Vec<u8> {
    serde_json::to_vec(env).expect("envelopes serialize")
}

/// Encodes one envelope as a complete frame.
pub fn encode(env: &Envelope) -> Vec<u8> {
    let body = encode_body(env);
    let mut out = Vec::with_capacity(HEADER_LEN + body.len());
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    out
}

/// Decodes exactly one frame; trailing or missing bytes are errors.
pub fn decode(bytes: &[u8]) -> Result<Envelope, ProtocolError> {
    let len = frame_len(bytes)?.ok_or_else(|| {
        ProtocolError::new(bytes.len(), "truncated frame header")
    })?;
    let end = HEADER_LEN + len;
    if bytes.len() < end {
        return Err(ProtocolError::new(
            bytes.len(),
            format!("truncated frame: header declares {len} body bytes, {} present", bytes.len() - HEADER_LEN),
        ));
    }
    if bytes.len() > end {
        return Err(ProtocolError::new(end, "trailing bytes after frame"));
    }
    decode_body(&bytes[HEADER_LEN..end], HEADER_LEN)
}

/// Parses a JSON body; error offsets are shifted by `base`.
pub fn decode_body(body: &[u8], base: usize) -> Result<Envelope, ProtocolError> {
    serde_json::from_slice(body).map_err(|e| {
        let offset = base + byte_offset(body, e.line(), e.column());
        ProtocolError::new(offset, format!("invalid envelope: {e}"))
    })
}

/// Body length declared by the header, `None` if fewer than 4 bytes are present.
fn frame_len(bytes: &[u8]) -> Result<Option<usize>, ProtocolError> {
    let Some(header) = bytes.get(..HEADER_LEN) else {
        return Ok(None);
    };
    let len = u32::from_be_bytes(header.try_into().expect("4 bytes")) as usize;
    if len > MAX_FRAME_LEN {
        return Err(ProtocolError::new(0, format!("frame of {len} bytes exceeds limit")));
    }
    Ok(Some(len))
}

fn byte_offset(body: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = body
        .split(|&b| b == b'\n')
        .take(line - 1)
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(body.len())
}

/// Incremental decoder for a byte stream carrying back-to-back frames.
#[derive(Debug, Default)]
pub struct FrameDecoder {
    buf: Vec<u8>,
    consumed: usize,
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Next complete envelope, `Ok(None)` if more bytes are needed.
    /// Error offsets are relative to the start of the stream.
    pub fn next_envelope(&mut self) -> Result<Option<Envelope>, ProtocolError> {
        let len = match frame_len(&self.buf) {
            Ok(Some(len)) => len,
            Ok(None) => return Ok(None),
            Err(e) => return Err(ProtocolError::new(self.consumed + e.offset, e.reason)),
        };
        if self.buf.len() < HEADER_LEN + len {
            return Ok(None);
        }
        let frame: Vec<u8> = self.buf.drain(..HEADER_LEN + len).collect();
        let base = self.consumed + HEADER_LEN;
        self.consumed += frame.len();
        decode_body(&frame[HEADER_LEN..], base).map(Some)
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }
}

#[derive(Debug, Error)]
pub enum FrameIoError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("connection closed")]
    Closed,
}

/// Reads one frame. A clean EOF before the header maps to [`FrameIoError::Closed`].
pub async fn read_frame<R: AsyncRead + Unpin>(reader: &mut R) -> Result<Envelope, FrameIoError> {
    let mut header = [0u8; HEADER_LEN];
    match reader.read_exact(&mut header).await {
        Ok(_) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Err(FrameIoError::Closed),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(header) as usize;
    if len > MAX_FRAME_LEN {
        return Err(ProtocolError::new(0, format!("frame of {len} bytes exceeds limit")).into());
    }
    let mut body = vec![0u8; len];
    reader.read_exact(&mut body).await?;
    Ok(decode_body(&body, HEADER_LEN)?)
}

pub async fn write_frame<W: AsyncWrite + Unpin>(writer: &mut W, env: &Envelope) -> std::io::Result<()> {
    writer.write_all(&encode(env)).await
}
