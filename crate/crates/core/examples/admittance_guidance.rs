//! The admittance layer on its own, then in the loop: a 1.54 N push settles
//! the reference at 1 m/s, a 0.4 N push is ignored, and noisy sensors
//! are gated.
//!
//! ```bash
//! cargo run --example admittance_guidance
//! ```

use cooplift::admittance::{Admittance, AdmittanceParams, ReferenceTrajectory};
use cooplift::harness::run;
use cooplift::verify::push_scenario;
use nalgebra::Vector3;

fn main() -> cooplift::Result<()> {
    let p = AdmittanceParams::nominal();
    let mut a = Admittance::new(p, ReferenceTrajectory::hold(Vector3::zeros()));
    let push = Vector3::new(1.54, 0.0, 0.0);
    for k in 0..400 {
        a.step(&push, 0.01);
        if k % 50 == 49 {
            let r = a.reference();
            println!("t = {:.1} s  x_ref = {:6.3} m  v_ref = {:.4} m/s", (k + 1) as f64 * 0.01, r.position.x, r.velocity.x);
        }
    }
    a.step(&Vector3::zeros(), 0.01);
    println!("released: v_ref = {}, held at x = {:.3} m", a.reference().velocity.x, a.hold_position().x);

    let quiet = run(&push_scenario(1, 0.4, 2.0))?;
    let moved = quiet.rows.iter().any(|r| r.reference.position != quiet.rows[0].reference.position);
    println!("0.4 N push in the loop moves the reference: {moved}");

    let mut noisy = push_scenario(0, 0.0, 5.0);
    noisy.admittance.sensor_noise_std_n = 0.1;
    let log = run(&noisy)?;
    let opened = log.rows.iter().filter(|r| r.gate_open).count();
    println!("0.1 N sensor noise, no push: gate open on {opened} of {} rows", log.rows.len());
    Ok(())
}
