//! Where each corruption puts its power: paired shift spectra, band
//! fractions and a radial profile, plus a PGM heat map in the temp dir.

use fourier_robustness::corruptions::{corrupt_batch, CorruptionKind, CorruptionSpec};
use fourier_robustness::io::emit_pgm;
use fourier_robustness::shift_psd::{band_fractions, paired_shift_psd, radial_profile, BandEdges};
use fourier_robustness::synthetic::natural_image;

fn main() -> fourier_robustness::Result<()> {
    let images = (0..500)
        .map(|i| natural_image(1, 32, 32, 1.0, 4, i))
        .collect::<fourier_robustness::Result<Vec<_>>>()?;
    let edges = BandEdges::default();
    println!("band edges at radius {:.3} and {:.3}", edges.low_mid, edges.mid_high);
    println!("{:<15} {:>6} {:>6} {:>6}  dominant", "shift", "low", "mid", "high");
    for (kind, param) in [
        (CorruptionKind::Brightness, 0.5),
        (CorruptionKind::Contrast, 0.5),
        (CorruptionKind::GaussianBlur, 1.5),
        (CorruptionKind::Pixelate, 4.0),
        (CorruptionKind::GaussianNoise, 0.3),
        (CorruptionKind::ImpulseNoise, 0.05),
    ] {
        let shifted = corrupt_batch(&images, &CorruptionSpec::new(kind, param, 1))?;
        let map = paired_shift_psd(&images, &shifted)?;
        let f = band_fractions(&map, edges)?;
        println!(
            "{:<15} {:>6.3} {:>6.3} {:>6.3}  {}",
            kind.to_string(),
            f.low,
            f.mid,
            f.high,
            f.dominant()
        );
        if kind == CorruptionKind::GaussianBlur {
            let profile = radial_profile(&map);
            let peak = profile
                .iter()
                .max_by(|a, b| a.mean_power.total_cmp(&b.mean_power))
                .expect("nonempty profile");
            println!("{:>15} blur shift peaks near radius {:.3}", "", peak.center);
            let out = std::env::temp_dir().join("blur_shift.pgm");
            emit_pgm(&map, &out)?;
            println!("{:>15} heat map written to {}", "", out.display());
        }
    }
    Ok(())
}
