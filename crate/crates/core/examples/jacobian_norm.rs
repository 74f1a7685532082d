//! Random-projection Jacobian norm: analytic VJP, finite differences, and
//! the closed form for a linear model.

use fourier_robustness::jacobian::{
    estimate_jacobian_norm, train_mlp, BlackBox, JacobianConfig, LinearPredictor, MlpPredictor,
    OutputTarget,
};
use fourier_robustness::synthetic::blob_dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> fourier_robustness::Result<()> {
    let (images, labels) = blob_dataset(400, 2, (1, 8, 8), 1.0, 5)?;
    let d = 64;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let linear = LinearPredictor::new(
        (0..10 * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
        vec![0.0; 10],
        OutputTarget::Logits,
    )?;
    let config = JacobianConfig::default();
    let est = estimate_jacobian_norm(&linear, &images, &config)?;
    println!(
        "linear logits: closed form {:.4}, estimate {:.4} [{:.4}, {:.4}] from {} projections",
        linear.frobenius_norm(),
        est.frobenius_norm,
        est.ci95_low,
        est.ci95_high,
        est.n_estimates
    );

    let mut mlp = MlpPredictor::init(d, 16, 2, OutputTarget::Probs, 3);
    for epochs in [0, 20, 100] {
        if epochs > 0 {
            train_mlp(&mut mlp, &images, &labels, epochs, 0.1)?;
        }
        let small = JacobianConfig {
            batch_size: 100,
            ..config
        };
        let vjp = estimate_jacobian_norm(&mlp, &images[..100], &small)?;
        let fd = estimate_jacobian_norm(&BlackBox(&mlp), &images[..100], &small)?;
        println!(
            "mlp after +{epochs:>3} epochs: vjp {:.4} [{:.4}, {:.4}], finite differences {:.4} [{:.4}, {:.4}]",
            vjp.frobenius_norm, vjp.ci95_low, vjp.ci95_high, fd.frobenius_norm, fd.ci95_low, fd.ci95_high
        );
    }
    Ok(())
}
