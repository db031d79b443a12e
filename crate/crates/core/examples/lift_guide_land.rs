//! The scripted lift, guide and land run, summarised by phase. Pass a path
//! to also write the CSV log.
//!
//! ```bash
//! cargo run --example lift_guide_land -- /tmp/lgl.csv
//! ```

use cooplift::harness::run;
use cooplift::verify::{hold_windows, lift_guide_land_scenario, LiftGuideLand};

fn main() -> cooplift::Result<()> {
    let s = lift_guide_land_scenario()?;
    let log = run(&s)?;

    println!("pushes:");
    for seg in &s.force_segments {
        println!("  {:5.1}–{:5.1} s  F = {:?} N", seg.t_start_s, seg.t_end_s, seg.force_n);
    }
    println!("hold windows: {:?}", hold_windows(&s));

    let f = LiftGuideLand::from_log(&s, &log);
    println!("max attitude error   {:.4} rad", f.max_attitude_error_rad);
    let holds: Vec<String> = f.hold_errors_m.iter().map(|e| format!("{e:.1e}")).collect();
    println!("‖E_p‖ at end of holds [{}] m", holds.join(", "));
    println!("thrust: lift peak {:.2} N, hold within {:.3}% of {:.2} N, descent min {:.2} N",
        f.lift_peak_thrust_n, f.hold_thrust_dev * 100.0, f.weight_n, f.descent_min_thrust_n);
    let end = log.last().expect("non-empty log");
    println!("final position {:.3?} m, status {:?}", end.state.position().as_slice(), log.status);

    if let Some(path) = std::env::args().nth(1) {
        log.save_csv(&path)?;
        println!("log written to {path}");
    }
    Ok(())
}
