//! Number formatting shared by the CSV writers and the CLI.

/// 17 significant digits: enough to round-trip any `f64`.
pub fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

/// 9 significant digits for human-facing output.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..9).contains(&magnitude) {
        let decimals = (8 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}
