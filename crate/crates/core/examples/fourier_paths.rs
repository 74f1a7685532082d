//! Amplitude, phase and pixel interpolation between two synthetic images.
//!
//! Run with `cargo run --example fourier_paths`.

use fourier_robustness::paths::{
    amplitude_path, phase_path, pixel_path, sample_path_specs, ClassRelation, PathMode,
    DEFAULT_STEPS, SMALL_IMAGE_CUTOFF,
};
use fourier_robustness::spectral::{decompose, dft2, radial_mask};
use fourier_robustness::synthetic::natural_image;

fn main() -> fourier_robustness::Result<()> {
    let x0 = natural_image(3, 32, 32, 1.0, 1, 0)?;
    let x1 = natural_image(3, 32, 32, 1.0, 1, 1)?;

    let mask = radial_mask(32, 32, SMALL_IMAGE_CUTOFF)?;
    println!("rho = {SMALL_IMAGE_CUTOFF}: {} of 1024 bins are swapped", mask.count());

    let a0 = decompose(&dft2(&x0)?).amplitude;
    for (name, path) in [
        ("amplitude", amplitude_path(&x0, &x1, SMALL_IMAGE_CUTOFF, DEFAULT_STEPS)?),
        ("phase", phase_path(&x0, &x1, SMALL_IMAGE_CUTOFF, DEFAULT_STEPS)?),
        ("pixel", pixel_path(&x0, &x1, DEFAULT_STEPS)?),
    ] {
        let last = path.images.last().expect("nonempty path");
        let amp = decompose(&dft2(last)?).amplitude;
        let moved = amp.iter().zip(&a0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!(
            "{name:>9}: {} images, lambda {:.2}..{:.2}, |x_end - x0|max = {:.3}, max amplitude change {:.3}",
            path.images.len(),
            path.lambdas[0],
            path.lambdas[path.lambdas.len() - 1],
            last.max_abs_diff(&x0),
            moved
        );
    }

    // Pairs for a labeled dataset, restricted to different classes.
    let labels = [0, 1, 0, 1, 2, 2];
    for spec in sample_path_specs(&labels, 4, PathMode::Phase, ClassRelation::Between, 0.4, 100, 9)? {
        println!(
            "path {}: {} -> {} (classes {} -> {})",
            spec.path_index, spec.source_index, spec.target_index, labels[spec.source_index], labels[spec.target_index]
        );
    }
    Ok(())
}
