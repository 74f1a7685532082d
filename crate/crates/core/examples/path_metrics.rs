//! High frequency fraction and consistent distance on hand-built traces.

use std::f64::consts::PI;

use fourier_robustness::path_metrics::{
    consistent_distance, hff, mean_amplitude_spectrum, summarize_gaussian, PredictionTrace,
    DEFAULT_HFF_THRESHOLD,
};

fn main() -> fourier_robustness::Result<()> {
    // p_1(t) = 0.5 + 0.25 cos(2 pi 20 t / 100): amplitude 50 at DC, 12.5 at bin 20.
    let cosine: Vec<Vec<f64>> = (0..100)
        .map(|t| {
            let p = 0.5 + 0.25 * (2.0 * PI * 20.0 * t as f64 / 100.0).cos();
            vec![p, 1.0 - p]
        })
        .collect();
    let trace = PredictionTrace::from_rows("cosine", &cosine)?;
    let spectrum = mean_amplitude_spectrum(&trace);
    println!("cosine: DC {:.1}, bin 20 {:.1}", spectrum[0], spectrum[20]);
    println!("cosine: hff = {:.4}, cd = {}", hff(&trace, DEFAULT_HFF_THRESHOLD)?, consistent_distance(&trace));

    // A smooth sigmoid handoff from class 0 to class 1 around step 60.
    let smooth: Vec<Vec<f64>> = (0..100)
        .map(|t| {
            let p = 1.0 / (1.0 + (-(t as f64 - 60.0) / 6.0).exp());
            vec![1.0 - p, p]
        })
        .collect();
    let smooth = PredictionTrace::from_rows("sigmoid", &smooth)?;
    println!("sigmoid: hff = {:.4}, cd = {}", hff(&smooth, DEFAULT_HFF_THRESHOLD)?, consistent_distance(&smooth));

    // The same handoff with the label flickering every other step.
    let flicker: Vec<Vec<f64>> = (0..100)
        .map(|t| if t >= 30 && t % 2 == 1 { vec![0.3, 0.7] } else { vec![0.7, 0.3] })
        .collect();
    let flicker = PredictionTrace::from_rows("flicker", &flicker)?;
    println!("flicker: hff = {:.4}, cd = {}", hff(&flicker, DEFAULT_HFF_THRESHOLD)?, consistent_distance(&flicker));

    let values = [
        hff(&trace, DEFAULT_HFF_THRESHOLD)?,
        hff(&smooth, DEFAULT_HFF_THRESHOLD)?,
        hff(&flicker, DEFAULT_HFF_THRESHOLD)?,
    ];
    let s = summarize_gaussian(&values)?;
    println!("mean hff {:.4}, 95% CI [{:.4}, {:.4}]", s.mean, s.ci95_low, s.ci95_high);
    Ok(())
}
