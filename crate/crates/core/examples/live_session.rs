//! Live mode with an in-process client: connect, push for half a second,
//! let go, and watch the telemetry.
//!
//! ```bash
//! cargo run --example live_session
//! ```

use std::net::TcpStream;
use std::time::{Duration, Instant};

use cooplift::harness::telemetry::{read_frame, write_frame, LiveOptions, LiveSession, Message};
use cooplift::harness::Scenario;

fn main() -> cooplift::Result<()> {
    let mut s = Scenario { name: "live".into(), duration_s: 2.0, ..Scenario::default() };
    s.initial.position_m = [0.0, 0.0, 1.0];
    let session = LiveSession::start(s, "127.0.0.1:0", LiveOptions::default())?;
    println!("listening on {}", session.local_addr());

    let mut stream = TcpStream::connect(session.local_addr())?;
    let mut writer = stream.try_clone()?;
    let pushing_until = Instant::now() + Duration::from_millis(500);
    let mut frames = 0;
    while let Some(msg) = read_frame(&mut stream)? {
        if Instant::now() < pushing_until {
            write_frame(&mut writer, &Message::force_command_now([2.0, 0.0, 0.0]))?;
        }
        if let Message::Snapshot(snap) = msg {
            frames += 1;
            if frames % 6 == 0 {
                println!(
                    "t = {:.2} s  F_h = {:.2?}  x = {:.3} m  x_ref = {:.3} m",
                    snap.t, snap.f_h, snap.position[0], snap.reference_position[0]
                );
            }
        }
    }
    let log = session.join()?;
    println!("{frames} snapshots, {} logged rows, {} events", log.rows.len(), log.events.len());
    Ok(())
}
