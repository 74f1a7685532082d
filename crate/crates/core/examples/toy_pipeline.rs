//! End-to-end run on synthetic blobs: train a small zoo of MLPs, generate
//! amplitude paths, score traces and regress OOD accuracy.
//!
//! `cargo run --release --example toy_pipeline [OUT_DIR]`

use fourier_robustness::pipeline::{run_toy_pipeline, ToyConfig};

fn main() -> fourier_robustness::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("toy_pipeline"));
    let report = run_toy_pipeline(&out, &ToyConfig::default())?;
    println!("{:<12} {:>7} {:>7} {:>7} {:>7}", "model", "ID", "OOD", "HFF", "CD");
    for m in &report.models {
        println!(
            "{:<12} {:>7.3} {:>7.3} {:>7.4} {:>7.1}",
            m.model_id, m.id_accuracy, m.ood_accuracy, m.mean_hff, m.mean_cd
        );
    }
    for r in &report.regressions {
        println!("{r}");
    }
    println!("{} files under {}", report.outputs.len(), out.display());
    Ok(())
}
