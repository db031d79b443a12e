use cooplift::harness::{RunLog, COLUMNS};

/// Columns kept in the golden log.
pub const GOLDEN_COLUMNS: &[&str] = &[
    "t_s", "x_m", "vx_mps", "y_m", "vy_mps", "z_m", "vz_mps", "roll_rad", "pitch_rad", "yaw_rad",
    "ref_x_m", "ref_y_m", "ref_z_m", "thrust_n", "moment_x_nm", "moment_y_nm", "moment_z_nm",
    "kv_hat_x", "kv_hat_y", "kv_hat_z", "f_h_x_n", "f_h_y_n", "f_h_z_n",
];
pub const GOLDEN_EVERY: usize = 50;
pub const GOLDEN_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/lift_guide_land.csv");
/// Absolute tolerance per cell; loose enough for libm differences across platforms.
pub const GOLDEN_TOL: f64 = 1e-6;

pub fn golden_table(log: &RunLog) -> Vec<Vec<f64>> {
    let idx: Vec<usize> = GOLDEN_COLUMNS
        .iter()
        .map(|c| COLUMNS.iter().position(|k| k == c).expect("known column"))
        .collect();
    log.rows
        .iter()
        .step_by(GOLDEN_EVERY)
        .map(|r| {
            let v = r.values();
            idx.iter().map(|&i| v[i].unwrap_or(f64::NAN)).collect()
        })
        .collect()
}

pub fn golden_csv(table: &[Vec<f64>]) -> String {
    let mut out = GOLDEN_COLUMNS.join(",") + "\n";
    for row in table {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        out += &(cells.join(",") + "\n");
    }
    out
}

pub fn parse_golden(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|c| c.parse().expect("number")).collect())
        .collect()
}

/// Largest absolute difference, or `None` if the shapes differ.
pub fn golden_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Option<f64> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.len() != y.len()) {
        return None;
    }
    Some(a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Compares a run with the stored golden log; `COOPLIFT_BLESS=1` rewrites it.
pub fn check_golden(log: &RunLog) -> Result<f64, String> {
    let table = golden_table(log);
    if std::env::var_os("COOPLIFT_BLESS").is_some() {
        std::fs::write(GOLDEN_PATH, golden_csv(&table)).map_err(|e| e.to_string())?;
    }
    let text = std::fs::read_to_string(GOLDEN_PATH).map_err(|e| format!("{GOLDEN_PATH}: {e}"))?;
    let stored = parse_golden(&text);
    golden_diff(&table, &stored).ok_or_else(|| "golden log shape differs".to_string())
}
