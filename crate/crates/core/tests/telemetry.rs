//! Live mode over a real socket.

use std::io::Write;
use std::net::TcpStream;
use std::time::{Duration, Instant};

use cooplift::harness::telemetry::{read_frame, unix_millis, write_frame, LiveOptions, LiveSession, Message, Snapshot};
use cooplift::harness::{EventKind, Scenario};

fn session(duration_s: f64) -> LiveSession {
    let mut s = Scenario { name: "live".into(), duration_s, ..Scenario::default() };
    s.initial.position_m = [0.0, 0.0, 1.0];
    LiveSession::start(s, "127.0.0.1:0", LiveOptions::default()).unwrap()
}

fn connect(s: &LiveSession) -> (TcpStream, TcpStream) {
    let r = TcpStream::connect(s.local_addr()).unwrap();
    r.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
    let w = r.try_clone().unwrap();
    (r, w)
}

fn next_snapshot(r: &mut TcpStream) -> Snapshot {
    loop {
        match read_frame(r).unwrap().expect("stream open") {
            Message::Snapshot(s) => return s,
            _ => continue,
        }
    }
}

#[test]
fn snapshots_arrive_at_about_thirty_hertz() {
    let s = session(1.2);
    let (mut r, _w) = connect(&s);
    let first = next_snapshot(&mut r);
    let mut last = first.clone();
    for _ in 0..15 {
        last = next_snapshot(&mut r);
    }
    let rate = 15.0 / (last.t - first.t);
    assert!((rate - 30.0).abs() < 3.0, "snapshot rate {rate}");
    assert_eq!(last.position, [0.0, 0.0, 1.0]);
    s.stop().unwrap();
}

#[test]
fn force_command_shows_up_within_three_frames() {
    let s = session(3.0);
    let (mut r, mut w) = connect(&s);
    next_snapshot(&mut r);
    write_frame(&mut w, &Message::force_command_now([1.0, 0.0, 0.0])).unwrap();
    let seen = (0..3).any(|_| next_snapshot(&mut r).f_h == [1.0, 0.0, 0.0]);
    assert!(seen, "force not reflected within three frames");
    s.stop().unwrap();
}

#[test]
fn silent_client_releases_after_staleness_window() {
    let s = session(3.0);
    let (mut r, mut w) = connect(&s);
    next_snapshot(&mut r);
    let until = Instant::now() + Duration::from_millis(300);
    while Instant::now() < until {
        write_frame(&mut w, &Message::force_command_now([0.0, 2.0, 0.0])).unwrap();
        std::thread::sleep(Duration::from_millis(20));
    }
    // snapshots queued during the push loop; the later ones carry the force
    let pushed = (0..15).map(|_| next_snapshot(&mut r)).find(|s| s.f_h == [0.0, 2.0, 0.0]);
    assert!(pushed.is_some_and(|s| s.gate_open));
    drop(w);
    std::thread::sleep(Duration::from_millis(300));
    let released = (0..20).map(|_| next_snapshot(&mut r)).find(|s| s.f_h == [0.0; 3]).expect("force released");
    assert_eq!(released.reference_velocity[1], 0.0);
    s.stop().unwrap();
}

#[test]
fn stale_command_is_dropped_and_logged() {
    let s = session(3.0);
    let (mut r, mut w) = connect(&s);
    next_snapshot(&mut r);
    let old = Message::ForceCommand { force: [5.0, 0.0, 0.0], timestamp: unix_millis() - 1000.0 };
    write_frame(&mut w, &old).unwrap();
    for _ in 0..5 {
        assert_eq!(next_snapshot(&mut r).f_h, [0.0; 3]);
    }
    let log = s.stop().unwrap();
    assert_eq!(log.count(EventKind::StaleCommand), 1);
}

#[test]
fn malformed_frames_get_error_replies() {
    let s = session(3.0);
    let (mut r, mut w) = connect(&s);
    let body = br#"{"type":"force_command","F":[1,2]}"#;
    w.write_all(&(body.len() as u32).to_be_bytes()).unwrap();
    w.write_all(body).unwrap();
    write_frame(&mut w, &Message::Error { message: "hello".into() }).unwrap();
    let mut errors = 0;
    for _ in 0..20 {
        if let Message::Error { .. } = read_frame(&mut r).unwrap().unwrap() {
            errors += 1;
            if errors == 2 {
                break;
            }
        }
    }
    assert_eq!(errors, 2);
    // the connection survives bad input
    write_frame(&mut w, &Message::force_command_now([1.0, 0.0, 0.0])).unwrap();
    assert!((0..3).any(|_| next_snapshot(&mut r).f_h == [1.0, 0.0, 0.0]));
    s.stop().unwrap();
}

#[test]
fn session_runs_to_its_duration_and_closes_clients() {
    let s = session(0.5);
    let (mut r, _w) = connect(&s);
    let started = Instant::now();
    let log = s.join().unwrap();
    assert!(started.elapsed() >= Duration::from_millis(400));
    assert_eq!(log.rows.len(), 50);
    // drain until the server hangs up
    while let Ok(Some(_)) = read_frame(&mut r) {}
}
