//! Plain-text PGM heatmaps of power maps, DC in the center.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::spectral::PsdMap;

pub const PGM_MAXVAL: u32 = 65535;

/// Source index shown at display position `i` once DC moves to `n / 2`.
fn unshift(i: usize, n: usize) -> usize {
    (i + n - n / 2) % n
}

/// Renders `log10(|p| + 1e-12)` rescaled onto `0..=65535`. A map whose log
/// values are all equal renders as all zeros.
pub fn render_pgm(map: &PsdMap) -> String {
    let (h, w) = (map.height, map.width);
    let logs: Vec<f64> = map.power.iter().map(|p| (p.abs() + 1e-12).log10()).collect();
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let mut out = format!("P2\n{w} {h}\n{PGM_MAXVAL}\n");
    for r in 0..h {
        let row: Vec<String> = (0..w)
            .map(|c| {
                let v = logs[unshift(r, h) * w + unshift(c, w)];
                let level = if range > 0.0 {
                    (PGM_MAXVAL as f64 * (v - lo) / range).round() as u32
                } else {
                    0
                };
                level.to_string()
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn emit_pgm(map: &PsdMap, out: impl AsRef<Path>) -> Result<()> {
    super::write_file(out.as_ref(), render_pgm(map))
}
