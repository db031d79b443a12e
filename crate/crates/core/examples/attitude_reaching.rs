//! Sliding-mode attitude loop from a tilted, spinning start: time to reach
//! the sliding surface against the finite-time bound.
//!
//! ```bash
//! cargo run --example attitude_reaching
//! ```

use cooplift::harness::run;
use cooplift::verify::{reaching_scenario, ReachingTrial};

fn main() -> cooplift::Result<()> {
    let s = reaching_scenario([0.4, -0.3, 0.2], [0.5, 1.0, -0.8]);
    let log = run(&s)?;
    let trial = ReachingTrial::from_log(&log, &s.attitude_gains()).expect("non-empty log");

    for (i, axis) in ["roll", "pitch", "yaw"].iter().enumerate() {
        let measured = trial.measured_s[i].map_or("never".to_string(), |t| format!("{:.2} ms", t * 1e3));
        println!(
            "{axis:5}: S0 = {:8.3}, reached at {measured:>9}, bound {:.2} ms",
            trial.initial_surface[i],
            trial.bound_s[i] * 1e3
        );
    }
    println!("largest V̇ while off the surface: {:.3e}", trial.worst_vdot);

    let end = log.last().expect("non-empty log");
    println!("attitude error at {:.1} s: [{:.2e}, {:.2e}, {:.2e}]", end.t(), end.e_phi.x, end.e_phi.y, end.e_phi.z);
    Ok(())
}
