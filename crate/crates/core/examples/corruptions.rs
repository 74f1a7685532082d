//! The six synthetic corruptions applied to one image.

use fourier_robustness::corruptions::{apply_corruption, CorruptionKind, CorruptionSpec};
use fourier_robustness::synthetic::natural_image;

fn main() -> fourier_robustness::Result<()> {
    let image = natural_image(1, 32, 32, 1.0, 3, 0)?;
    let cases = [
        (CorruptionKind::Brightness, 0.5),
        (CorruptionKind::Contrast, 0.4),
        (CorruptionKind::GaussianNoise, 0.3),
        (CorruptionKind::ImpulseNoise, 0.05),
        (CorruptionKind::GaussianBlur, 1.0),
        (CorruptionKind::Pixelate, 4.0),
    ];
    println!("{:<15} {:>6} {:>9} {:>9}", "kind", "param", "mean", "max |d|");
    for (kind, param) in cases {
        let out = apply_corruption(&image, &CorruptionSpec::new(kind, param, 11))?;
        println!(
            "{:<15} {:>6} {:>9.4} {:>9.4}",
            kind.to_string(),
            param,
            out.mean(),
            out.max_abs_diff(&image)
        );
    }
    Ok(())
}
