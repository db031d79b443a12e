//! Closed-loop hover at 1 m for 60 s: the outer loop asks for exactly the
//! weight and the vehicle does not move.
//!
//! ```bash
//! cargo run --example hover
//! ```

use cooplift::harness::{run, Scenario};

fn main() -> cooplift::Result<()> {
    let mut s = Scenario { name: "hover".into(), duration_s: 60.0, ..Scenario::default() };
    s.initial.position_m = [0.0, 0.0, 1.0];

    let log = run(&s)?;
    let last = log.last().expect("non-empty log");
    println!("weight        {:.6} N", s.system_params().hover_thrust());
    println!("thrust at end {:.6} N", last.wrench.thrust);
    println!("moments       {:?}", last.wrench.moments.as_slice());
    println!("position      {:?}", last.state.position().as_slice());
    Ok(())
}
