//! Minimal framed-TCP client, used by tests and scripted display stand-ins.

use std::net::SocketAddr;
use std::time::Duration;

use crossdrop_core::{DDisplayProfile, DWorldState};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;

use crate::protocol::{read_frame, write_frame, Envelope, FrameIoError, Message};

pub struct Client {
    rd: OwnedReadHalf,
    wr: OwnedWriteHalf,
    session_id: String,
    seq: u64,
}

impl Client {
    pub async fn connect(addr: SocketAddr) -> std::io::Result<Self> {
        let stream = TcpStream::connect(addr).await?;
        stream.set_nodelay(true)?;
        let (rd, wr) = stream.into_split();
        Ok(Self {
            rd,
            wr,
            session_id: String::new(),
            seq: 0,
        })
    }

    /// Session id assigned by the hub; empty until the first reply arrives.
    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    /// Sends `message` with the next sequence number and returns that number.
    pub async fn send(&mut self, message: Message) -> std::io::Result<u64> {
        self.seq += 1;
        let env = Envelope::new(self.session_id.clone(), self.seq, message);
        write_frame(&mut self.wr, &env).await?;
        Ok(self.seq)
    }

    pub async fn recv(&mut self) -> Result<Envelope, FrameIoError> {
        let env = read_frame(&mut self.rd).await?;
        if self.session_id.is_empty() {
            self.session_id = env.session_id.clone();
        }
        Ok(env)
    }

    /// Like [`Client::recv`] but gives up after `wait`.
    pub async fn recv_timeout(&mut self, wait: Duration) -> Option<Result<Envelope, FrameIoError>> {
        tokio::time::timeout(wait, self.recv()).await.ok()
    }

    /// Registers and returns the snapshot the hub replies with.
    pub async fn register_display(&mut self, profile: DDisplayProfile) -> Result<DWorldState, FrameIoError> {
        self.send(Message::RegisterDisplay { profile }).await?;
        self.await_registration().await
    }

    pub async fn register_operator(&mut self) -> Result<DWorldState, FrameIoError> {
        self.send(Message::RegisterOperator {}).await?;
        self.await_registration().await
    }

    async fn await_registration(&mut self) -> Result<DWorldState, FrameIoError> {
        loop {
            match self.recv().await?.message {
                Message::Snapshot { world } => return Ok(world),
                Message::Error { code, detail } => {
                    return Err(std::io::Error::new(std::io::ErrorKind::PermissionDenied, format!("{code}: {detail}")).into())
                }
                _ => {}
            }
        }
    }
}
