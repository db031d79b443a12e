//! Splitting a total wrench over the two quadrotors, with and without
//! weighting, then down to rotor speeds.
//!
//! ```bash
//! cargo run --example allocate_wrench
//! ```

use cooplift::allocation::{mix_command, wrench, AllocationWeights, Allocator};
use cooplift::dynamics::SystemParams;
use cooplift::harness::Scenario;

fn show(label: &str, alloc: &Allocator, w: &cooplift::dynamics::WrenchCommand) {
    let cmd = alloc.allocate(w);
    let back = alloc.wrench_of(&cmd);
    println!("{label}");
    for i in 0..2 {
        let (f, tau) = cmd.quad(i);
        println!("  quad {}: F = {f:8.4} N, τ = [{:7.4}, {:7.4}, {:7.4}] N·m", i + 1, tau.x, tau.y, tau.z);
    }
    println!("  ‖Λu − w‖ = {:.1e}", (back.as_vector() - w.as_vector()).norm());
}

fn main() -> cooplift::Result<()> {
    let p = SystemParams::nominal();
    let hover = wrench(p.hover_thrust(), 0.0, 0.0, 0.0);
    let roll = wrench(p.hover_thrust(), 2.0, 0.0, 0.0);

    let uniform = Allocator::for_vehicle(&p, AllocationWeights::uniform())?;
    show("hover, uniform weights", &uniform, &hover);
    show("roll moment 2 N·m, uniform weights", &uniform, &roll);

    // making quad 1's thrust expensive shifts load to quad 2
    let mut w = [1.0; 8];
    w[0] = 4.0;
    let weighted = Allocator::for_vehicle(&p, AllocationWeights(w))?;
    show("roll moment 2 N·m, quad 1 thrust weighted ×4", &weighted, &roll);

    let rotor = Scenario::default().rotor_model();
    match mix_command(&uniform.allocate(&hover), &rotor) {
        Ok(speeds) => println!("hover rotor speeds (rad/s): {speeds:.1?}"),
        Err(e) => println!("hover rotor mixing failed: {e}"),
    }
    let yaw = wrench(p.hover_thrust(), 0.0, 0.0, 1.0);
    if let Err(e) = mix_command(&uniform.allocate(&yaw), &rotor) {
        println!("1 N·m yaw: {e}");
    }
    Ok(())
}
