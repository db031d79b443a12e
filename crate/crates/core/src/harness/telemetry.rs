//! Live mode: the simulation runs against the wall clock while clients
//! receive snapshots and push force commands over TCP.
//!
//! Every frame is a 4-byte big-endian length followed by that many bytes of
//! UTF-8 JSON. Messages carry a `type` tag:
//!
//! ```json
//! {"type":"snapshot","t":1.23,"position":[0,0,1], ...}
//! {"type":"force_command","F":[1.0,0.0,0.0],"timestamp":1760000000000.0}
//! {"type":"error","message":"..."}
//! ```
//!
//! `timestamp` is milliseconds since the Unix epoch. A command older than the
//! staleness window (200 ms) is dropped, and the last accepted command stops
//! acting once it ages past the window, so a silent client lets the vehicle
//! hold. The simulation thread talks to the socket threads only through
//! channels.

use std::io::{ErrorKind, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, Sender, TryRecvError};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::log::{LogRow, RunLog};
use super::runner::Simulation;
use super::scenario::Scenario;
use crate::error::{Error, Result};

pub const MAX_FRAME_BYTES: usize = 1 << 20;
pub const DEFAULT_SNAPSHOT_HZ: f64 = 30.0;
pub const DEFAULT_STALENESS_MS: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub attitude: [f64; 3],
    pub reference_position: [f64; 3],
    pub reference_velocity: [f64; 3],
    pub e_p: [f64; 3],
    pub e_phi: [f64; 3],
    pub s_phi: [f64; 3],
    pub thrust: f64,
    pub moments: [f64; 3],
    /// Gated measured force, N.
    pub f_h: [f64; 3],
    pub gate_open: bool,
}

impl Snapshot {
    pub fn from_row(r: &LogRow) -> Self {
        Self {
            t: r.t(),
            position: r.state.position().into(),
            velocity: r.state.velocity().into(),
            attitude: r.state.attitude().into(),
            reference_position: r.reference.position.into(),
            reference_velocity: r.reference.velocity.into(),
            e_p: r.ep.into(),
            e_phi: r.e_phi.into(),
            s_phi: r.s_phi.into(),
            thrust: r.wrench.thrust,
            moments: r.wrench.moments.into(),
            f_h: r.f_h.into(),
            gate_open: r.gate_open,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    Snapshot(Snapshot),
    ForceCommand {
        #[serde(rename = "F")]
        force: [f64; 3],
        timestamp: f64,
    },
    Error {
        message: String,
    },
}

impl Message {
    pub fn force_command_now(force: [f64; 3]) -> Self {
        Message::ForceCommand { force, timestamp: unix_millis() }
    }
}

pub fn unix_millis() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64() * 1e3)
}

pub fn encode_frame(msg: &Message) -> Result<Vec<u8>> {
    let body = serde_json::to_vec(msg).map_err(|e| Error::Protocol(e.to_string()))?;
    let mut out = Vec::with_capacity(body.len() + 4);
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn write_frame<W: Write>(w: &mut W, msg: &Message) -> Result<()> {
    w.write_all(&encode_frame(msg)?)?;
    w.flush()?;
    Ok(())
}

/// Reads one raw frame body. `Ok(None)` on a clean end of stream.
pub fn read_frame_bytes<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let n = u32::from_be_bytes(len) as usize;
    if n > MAX_FRAME_BYTES {
        return Err(Error::Protocol(format!("frame of {n} bytes exceeds limit")));
    }
    let mut body = vec![0u8; n];
    r.read_exact(&mut body)?;
    Ok(Some(body))
}

pub fn decode_message(body: &[u8]) -> Result<Message> {
    serde_json::from_slice(body).map_err(|e| Error::Protocol(e.to_string()))
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Message>> {
    match read_frame_bytes(r)? {
        Some(body) => decode_message(&body).map(Some),
        None => Ok(None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiveOptions {
    /// Pace the simulation to the wall clock.
    pub realtime: bool,
    pub snapshot_hz: f64,
    pub staleness_ms: f64,
}

impl Default for LiveOptions {
    fn default() -> Self {
        Self { realtime: true, snapshot_hz: DEFAULT_SNAPSHOT_HZ, staleness_ms: DEFAULT_STALENESS_MS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ForceCommand {
    force: Vector3<f64>,
    timestamp_ms: f64,
}

enum Outbound {
    Client(u64, TcpStream),
    Broadcast(Vec<u8>),
    To(u64, Vec<u8>),
    Gone(u64),
    Shutdown,
}

fn broadcaster(rx: Receiver<Outbound>) {
    let mut clients: Vec<(u64, TcpStream)> = Vec::new();
    for msg in rx {
        match msg {
            Outbound::Client(id, s) => clients.push((id, s)),
            Outbound::Broadcast(bytes) => clients.retain_mut(|(_, s)| s.write_all(&bytes).is_ok()),
            Outbound::To(id, bytes) => {
                if let Some((_, s)) = clients.iter_mut().find(|(i, _)| *i == id) {
                    let _ = s.write_all(&bytes);
                }
            }
            Outbound::Gone(id) => clients.retain(|(i, _)| *i != id),
            Outbound::Shutdown => break,
        }
    }
    // readers hold clones of these sockets; shutting down wakes them and the clients
    for (_, s) in clients {
        let _ = s.shutdown(Shutdown::Both);
    }
}

fn reader(id: u64, mut stream: TcpStream, commands: Sender<ForceCommand>, out: Sender<Outbound>) {
    loop {
        let body = match read_frame_bytes(&mut stream) {
            Ok(Some(b)) => b,
            Ok(None) => break,
            Err(Error::Protocol(m)) => {
                if let Ok(f) = encode_frame(&Message::Error { message: m }) {
                    let _ = out.send(Outbound::To(id, f));
                }
                break;
            }
            Err(_) => break,
        };
        let reply = match decode_message(&body) {
            Ok(Message::ForceCommand { force, timestamp }) => {
                if force.iter().all(|f| f.is_finite()) && timestamp.is_finite() {
                    let cmd = ForceCommand { force: Vector3::from(force), timestamp_ms: timestamp };
                    if commands.send(cmd).is_err() {
                        break;
                    }
                    None
                } else {
                    Some("force_command must be finite".to_string())
                }
            }
            Ok(_) => Some("only force_command messages are accepted".to_string()),
            Err(e) => Some(e.to_string()),
        };
        if let Some(message) = reply {
            if let Ok(f) = encode_frame(&Message::Error { message }) {
                let _ = out.send(Outbound::To(id, f));
            }
        }
    }
    let _ = out.send(Outbound::Gone(id));
}

fn acceptor(listener: TcpListener, stop: Receiver<()>, commands: Sender<ForceCommand>, out: Sender<Outbound>) {
    let mut next_id = 0u64;
    loop {
        match stop.try_recv() {
            Ok(()) | Err(TryRecvError::Disconnected) => break,
            Err(TryRecvError::Empty) => {}
        }
        match listener.accept() {
            Ok((stream, _)) => {
                let _ = stream.set_nonblocking(false);
                let _ = stream.set_nodelay(true);
                let Ok(read_half) = stream.try_clone() else { continue };
                let id = next_id;
                next_id += 1;
                if out.send(Outbound::Client(id, stream)).is_err() {
                    break;
                }
                let (c, o) = (commands.clone(), out.clone());
                thread::spawn(move || reader(id, read_half, c, o));
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(5)),
            Err(_) => thread::sleep(Duration::from_millis(5)),
        }
    }
}

/// Picks the operator force from the latest command, dropping stale ones.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct CommandState {
    latest: Option<ForceCommand>,
}

impl CommandState {
    /// Returns the age in ms of a command that was rejected as stale.
    fn offer(&mut self, cmd: ForceCommand, now_ms: f64, staleness_ms: f64) -> Option<f64> {
        let age = now_ms - cmd.timestamp_ms;
        if age > staleness_ms {
            return Some(age);
        }
        if self.latest.map_or(true, |l| cmd.timestamp_ms >= l.timestamp_ms) {
            self.latest = Some(cmd);
        }
        None
    }

    fn active(&self, now_ms: f64, staleness_ms: f64) -> Vector3<f64> {
        match self.latest {
            Some(c) if now_ms - c.timestamp_ms <= staleness_ms => c.force,
            _ => Vector3::zeros(),
        }
    }
}

/// A running live simulation.
pub struct LiveSession {
    addr: SocketAddr,
    stop: Sender<()>,
    handle: JoinHandle<Result<RunLog>>,
}

impl LiveSession {
    /// Binds `bind` and starts stepping `scenario` on a background thread. The
    /// session ends after `scenario.duration_s`, on divergence or on [`stop`](Self::stop).
    pub fn start(scenario: Scenario, bind: impl ToSocketAddrs, opts: LiveOptions) -> Result<Self> {
        let listener = TcpListener::bind(bind)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let mut sim = Simulation::new(scenario)?;

        let (stop_tx, stop_rx) = mpsc::channel::<()>();
        let (accept_stop_tx, accept_stop_rx) = mpsc::channel::<()>();
        let (cmd_tx, cmd_rx) = mpsc::channel::<ForceCommand>();
        let (out_tx, out_rx) = mpsc::channel::<Outbound>();

        let bcast = thread::spawn(move || broadcaster(out_rx));
        let acc_out = out_tx.clone();
        let acc = thread::spawn(move || acceptor(listener, accept_stop_rx, cmd_tx, acc_out));

        let handle = thread::spawn(move || {
            let dt = sim.scenario().dt_s;
            let snapshot_every = (1.0 / (opts.snapshot_hz * dt)).round().max(1.0) as u64;
            let started = Instant::now();
            let mut commands = CommandState::default();
            let mut rows = Vec::new();
            let mut result = Ok(());
            while !sim.is_finished() {
                match stop_rx.try_recv() {
                    Ok(()) | Err(TryRecvError::Disconnected) => break,
                    Err(TryRecvError::Empty) => {}
                }
                let now = unix_millis();
                while let Ok(cmd) = cmd_rx.try_recv() {
                    if let Some(age) = commands.offer(cmd, now, opts.staleness_ms) {
                        sim.note_stale_command(age);
                    }
                }
                let force = commands.active(now, opts.staleness_ms);
                let k = sim.steps_taken();
                match sim.step(force) {
                    Ok(out) => {
                        if let Some(r) = out.row {
                            rows.push(r);
                        }
                    }
                    Err(e) => {
                        result = Err(e);
                        break;
                    }
                }
                if k % snapshot_every == 0 {
                    if let Some(row) = sim.last_row() {
                        if let Ok(f) = encode_frame(&Message::Snapshot(Snapshot::from_row(row))) {
                            let _ = out_tx.send(Outbound::Broadcast(f));
                        }
                    }
                }
                if opts.realtime {
                    let target = Duration::from_secs_f64(sim.time());
                    let elapsed = started.elapsed();
                    if target > elapsed {
                        thread::sleep(target - elapsed);
                    }
                }
            }
            let _ = accept_stop_tx.send(());
            let _ = acc.join();
            let _ = out_tx.send(Outbound::Shutdown);
            let _ = bcast.join();
            result.map(|()| sim.finish(rows))
        });

        Ok(Self { addr, stop: stop_tx, handle })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Ends the session early and returns its log.
    pub fn stop(self) -> Result<RunLog> {
        let _ = self.stop.send(());
        self.join()
    }

    /// Waits for the session to run its full duration.
    pub fn join(self) -> Result<RunLog> {
        self.handle.join().map_err(|_| Error::Io("simulation thread panicked".into()))?
    }
}

/// Blocking live session on `port` (0 picks a free port) for the whole scenario.
pub fn serve_telemetry(scenario: Scenario, port: u16) -> Result<RunLog> {
    let session = LiveSession::start(scenario, ("127.0.0.1", port), LiveOptions::default())?;
    eprintln!("telemetry listening on {}", session.local_addr());
    session.join()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_round_trip() {
        let msg = Message::ForceCommand { force: [1.0, 0.0, -0.5], timestamp: 12.5 };
        let bytes = encode_frame(&msg).unwrap();
        assert_eq!(u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize, bytes.len() - 4);
        let back = read_frame(&mut bytes.as_slice()).unwrap().unwrap();
        assert_eq!(back, msg);
        assert_eq!(read_frame(&mut [].as_slice()).unwrap(), None);
    }

    #[test]
    fn wire_names() {
        let text = String::from_utf8(encode_frame(&Message::force_command_now([1.0, 0.0, 0.0])).unwrap()[4..].to_vec())
            .unwrap();
        assert!(text.contains("\"type\":\"force_command\""));
        assert!(text.contains("\"F\":[1.0,0.0,0.0]"));
        assert!(text.contains("\"timestamp\":"));
    }

    #[test]
    fn oversized_frame_rejected() {
        let mut bytes = ((MAX_FRAME_BYTES + 1) as u32).to_be_bytes().to_vec();
        bytes.extend_from_slice(b"{}");
        assert!(matches!(read_frame(&mut bytes.as_slice()), Err(Error::Protocol(_))));
    }

    #[test]
    fn staleness_window() {
        let mut c = CommandState::default();
        let cmd = |ts: f64| ForceCommand { force: Vector3::new(1.0, 0.0, 0.0), timestamp_ms: ts };
        assert_eq!(c.offer(cmd(0.0), 1000.0, 200.0), Some(1000.0));
        assert_eq!(c.active(1000.0, 200.0), Vector3::zeros());
        assert_eq!(c.offer(cmd(950.0), 1000.0, 200.0), None);
        assert_eq!(c.active(1000.0, 200.0), Vector3::new(1.0, 0.0, 0.0));
        // the command expires once it ages past the window
        assert_eq!(c.active(1151.0, 200.0), Vector3::zeros());
    }
}
