//! Every acceptance check with its verdict, as `cooplift verify` prints it.
//!
//! ```bash
//! cargo run --release --example acceptance_report
//! ```

fn main() {
    let checks = cooplift::verify::all(1);
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} of {} passed", checks.len() - failed, checks.len());
}
