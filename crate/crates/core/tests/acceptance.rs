//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines are always printed, and exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use cooplift::harness::run;
use cooplift::verify::{self, Check};

const SEED: u64 = 1;

fn lift_guide_land_with_golden() -> Check {
    let mut check = verify::lift_guide_land();
    let t0 = Instant::now();
    let golden = verify::lift_guide_land_scenario()
        .and_then(|s| run(&s))
        .map_err(|e| e.to_string())
        .and_then(|log| common::check_golden(&log));
    match golden {
        Ok(diff) => {
            check.passed &= diff <= common::GOLDEN_TOL;
            check.detail += &format!(", golden max |Δ| {diff:.1e}");
        }
        Err(e) => {
            check.passed = false;
            check.detail += &format!(", golden: {e}");
        }
    }
    check.elapsed += t0.elapsed();
    check
}

fn main() -> ExitCode {
    let checks = [
        verify::hover(),
        verify::allocation(SEED),
        verify::fntsmc_reaching(SEED),
        verify::backstepping(),
        verify::admittance(),
        lift_guide_land_with_golden(),
        verify::rk4_order(),
    ];
    println!("\nacceptance");
    for c in &checks {
        println!("  {c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} passed, {failed} failed\n", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
