use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cooplift::allocation::{mix_command, Allocator};
use cooplift::dynamics::WrenchCommand;
use cooplift::harness::{metrics, run, telemetry, Scenario};
use cooplift::{verify, Result};
use nalgebra::Vector3;

#[derive(Parser)]
#[command(name = "cooplift", version, about = "Two-quadrotor payload carrier: simulate, verify, serve, allocate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write log.csv, summary.json and events.json.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the acceptance checks.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Live mode: stream telemetry and take force commands over TCP.
    Serve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 7878)]
        port: u16,
        /// Also save the session log here when it ends.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split one wrench over the two quadrotors.
    Allocate {
        /// Total thrust, N.
        #[arg(long)]
        thrust: f64,
        /// Body moments x y z, N·m.
        #[arg(long, num_args = 3, value_names = ["MX", "MY", "MZ"], allow_hyphen_values = true, default_values_t = [0.0, 0.0, 0.0])]
        moment: Vec<f64>,
        /// Vehicle, weights and rotor constants come from here; defaults otherwise.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

fn load(path: &PathBuf, dt: Option<f64>, seed: Option<u64>) -> Result<Scenario> {
    let mut s = Scenario::load(path)?;
    if let Some(dt) = dt {
        s.dt_s = dt;
    }
    if let Some(seed) = seed {
        s.seed = seed;
    }
    s.validate()?;
    Ok(s)
}

fn write_json(path: PathBuf, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| cooplift::Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn save(log: &cooplift::harness::RunLog, s: &Scenario, out: &PathBuf) -> Result<()> {
    std::fs::create_dir_all(out)?;
    log.save_csv(out.join("log.csv"))?;
    write_json(out.join("summary.json"), &metrics(log, &s.attitude_gains()))?;
    write_json(out.join("events.json"), &log.events)
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run { scenario, out, dt, seed } => {
            let s = load(&scenario, dt, seed)?;
            let log = run(&s)?;
            save(&log, &s, &out)?;
            println!("{}: {} rows, {:?}, {} events -> {}", s.name, log.rows.len(), log.status, log.events.len(), out.display());
            Ok(!log.diverged())
        }
        Command::Verify { seed } => {
            let checks = verify::all(seed);
            for c in &checks {
                println!("{c}");
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Serve { scenario, port, out } => {
            let s = load(&scenario, None, None)?;
            let log = telemetry::serve_telemetry(s.clone(), port)?;
            if let Some(out) = out {
                save(&log, &s, &out)?;
            }
            Ok(!log.diverged())
        }
        Command::Allocate { thrust, moment, scenario } => {
            let s = match scenario {
                Some(p) => load(&p, None, None)?,
                None => Scenario::default(),
            };
            let alloc = Allocator::for_vehicle(&s.system_params(), s.allocation_weights())?;
            let w = WrenchCommand::new(thrust, Vector3::new(moment[0], moment[1], moment[2]));
            let cmd = alloc.allocate(&w);
            let rotors = mix_command(&cmd, &s.rotor_model());
            let residual = (alloc.lambda() * cmd.u_d - w.as_vector()).norm();
            let quads: Vec<_> = (0..2)
                .map(|i| {
                    let (f, tau) = cmd.quad(i);
                    serde_json::json!({ "thrust_n": f, "moments_nm": [tau.x, tau.y, tau.z] })
                })
                .collect();
            let report = serde_json::json!({
                "wrench": { "thrust_n": thrust, "moments_nm": moment },
                "quadrotors": quads,
                "residual": residual,
                "rotor_speeds_radps": rotors.as_ref().ok(),
                "rotor_error": rotors.as_ref().err().map(|e| e.to_string()),
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
            Ok(rotors.is_ok())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
