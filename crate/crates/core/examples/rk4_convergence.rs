//! Integrator order from unpowered free fall with drag against its closed form.
//!
//! ```bash
//! cargo run --example rk4_convergence
//! ```

use cooplift::verify::{observed_order, rk4_errors, RK4_DTS, RK4_HORIZON_S};

fn main() -> cooplift::Result<()> {
    let errors = rk4_errors(&RK4_DTS, RK4_HORIZON_S)?;
    for (dt, e) in RK4_DTS.iter().zip(&errors) {
        println!("dt = {:.1} ms  error = {e:.3e}", dt * 1e3);
    }
    for w in errors.windows(2) {
        println!("halving ratio {:.2} → order {:.3}", w[0] / w[1], (w[0] / w[1]).log2());
    }
    println!("least-squares order {:.3}", observed_order(&RK4_DTS, &errors));
    Ok(())
}
