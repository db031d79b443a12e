//! 1 m reference steps on each axis through the adaptive position loop.
//! Writes `step_<axis>.csv` to the directory given as the first argument.
//!
//! ```bash
//! cargo run --example step_response -- /tmp/steps
//! ```

use cooplift::harness::run;
use cooplift::verify::{step_scenario, StepResponse};

fn main() -> cooplift::Result<()> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from);
    for axis in 0..3 {
        let s = step_scenario(axis, 10.0);
        let log = run(&s)?;
        let r = StepResponse::from_log(&log);
        let last = log.last().expect("non-empty log");
        println!(
            "{}: ‖E_p‖ < 1 mm from {:>6}, final ‖E_p‖ {:.1e} m, K̂_v = {:.3?}, max tilt {:.3} rad",
            s.name,
            r.settled_s.map_or("never".into(), |t| format!("{t:.2} s")),
            r.final_error_m,
            last.kv_hat.as_slice(),
            log.rows.iter().map(|r| r.state.roll().abs().max(r.state.pitch().abs())).fold(0.0, f64::max),
        );
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            log.save_csv(dir.join(format!("{}.csv", s.name)))?;
        }
    }
    Ok(())
}
