//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use fourier_robustness::corruptions::{corrupt_batch, CorruptionKind, CorruptionSpec};
use fourier_robustness::io::{self, AxisLabels, GroupLine, ScatterPoint};
use fourier_robustness::jacobian::{estimate_jacobian_norm, JacobianConfig, LinearPredictor, OutputTarget};
use fourier_robustness::path_metrics::{argmax, consistent_distance, hff, PredictionTrace};
use fourier_robustness::paths::{amplitude_path, phase_path};
use fourier_robustness::pipeline::{run_toy_pipeline, ToyConfig};
use fourier_robustness::robustness_stats::{
    clopper_pearson, fit_line, grouped_regression, probit, AccuracyRecord, GroupBy, MetricRecord,
    RegressionQuery, ValueKind, XSpec, DEFAULT_PROBIT_EPS,
};
use fourier_robustness::shift_psd::{band_fractions, paired_shift_psd, BandEdges};
use fourier_robustness::spectral::{decompose, dft2, idft2_real, psd, radial_mask};
use fourier_robustness::synthetic::natural_image;
use fourier_robustness::{Error, ImageTensor};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lib<T>(r: fourier_robustness::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_image(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> ImageTensor {
    ImageTensor::from_fn(c, h, w, |_, _, _| rng.random_range(-2.0..2.0)).unwrap()
}

fn naive_dft2(img: &ImageTensor) -> Vec<Complex64> {
    let (c, h, w) = img.shape();
    let mut out = Vec::with_capacity(c * h * w);
    for ch in 0..c {
        for u in 0..h {
            for v in 0..w {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..h {
                    for s in 0..w {
                        let angle = -2.0 * PI * ((u * r) as f64 / h as f64 + (v * s) as f64 / w as f64);
                        acc += img.get(ch, r, s) * Complex64::from_polar(1.0, angle);
                    }
                }
                out.push(acc);
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut dft_err, mut parseval_err, mut round_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let img = random_image(&mut rng, 3, 8, 8);
        let spec = lib(dft2(&img))?;
        for (a, b) in spec.as_slice().iter().zip(naive_dft2(&img)) {
            dft_err = dft_err.max((a - b).norm());
        }
        for c in 0..3 {
            let space: f64 = img.channel(c).iter().map(|x| x * x).sum();
            let freq: f64 = spec.channel(c).iter().map(|z| z.norm_sqr()).sum();
            parseval_err = parseval_err.max((freq - 64.0 * space).abs() / (64.0 * space));
        }
        round_err = round_err.max(lib(idft2_real(&spec))?.max_abs_diff(&img));
    }
    check(dft_err <= 1e-6, format!("dft vs naive {dft_err:e}"))?;
    check(parseval_err <= 1e-5, format!("parseval {parseval_err:e}"))?;
    check(round_err <= 1e-5, format!("round trip {round_err:e}"))?;
    Ok(format!("dft {dft_err:.1e}, parseval {parseval_err:.1e}, round trip {round_err:.1e}"))
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut phase_keep, mut off_mask_amp, mut amp_keep, mut origin) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for pair in 0..200 {
        let x0 = random_image(&mut rng, 3, 32, 32);
        let x1 = random_image(&mut rng, 3, 32, 32);
        let d0 = decompose(&lib(dft2(&x0))?);
        let rho = [0.2, 0.4, 1.0][pair % 3];
        let mask = lib(radial_mask(32, 32, rho))?;

        let amp = lib(amplitude_path(&x0, &x1, rho, 100))?;
        origin = origin.max(amp.images[0].max_abs_diff(&x0));
        for img in &amp.images {
            let d = decompose(&lib(dft2(img))?);
            for (i, ((a, p), (a0, p0))) in
                d.amplitude.iter().zip(&d.phase).zip(d0.amplitude.iter().zip(&d0.phase)).enumerate()
            {
                let bin = i % 1024;
                if *a > 1e-6 {
                    phase_keep = phase_keep.max(angle_diff(*p, *p0));
                }
                if !mask.contains(bin / 32, bin % 32) {
                    off_mask_amp = off_mask_amp.max((a - a0).abs());
                }
            }
        }

        let ph = lib(phase_path(&x0, &x1, rho, 100))?;
        origin = origin.max(ph.images[0].max_abs_diff(&x0));
        for img in &ph.images {
            let d = decompose(&lib(dft2(img))?);
            for (a, a0) in d.amplitude.iter().zip(&d0.amplitude) {
                amp_keep = amp_keep.max((a - a0).abs());
            }
        }
    }
    check(phase_keep <= 1e-3, format!("amplitude path moved phase by {phase_keep:e}"))?;
    check(off_mask_amp <= 1e-3, format!("amplitude path moved off-mask amplitude by {off_mask_amp:e}"))?;
    check(amp_keep <= 1e-3, format!("phase path moved amplitude by {amp_keep:e}"))?;
    check(origin <= 1e-4, format!("lambda=0 deviates by {origin:e}"))?;
    Ok(format!(
        "phase {phase_keep:.1e}, off-mask amp {off_mask_amp:.1e}, phase-path amp {amp_keep:.1e}, origin {origin:.1e}"
    ))
}

fn random_trace(rng: &mut ChaCha8Rng, id: &str, steps: usize, classes: usize) -> PredictionTrace {
    let rows: Vec<Vec<f64>> = (0..steps)
        .map(|_| {
            let raw: Vec<f64> = (0..classes).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
        .collect();
    PredictionTrace::from_rows(id, &rows).unwrap()
}

/// Direct-definition HFF with an O(T^2) DFT.
fn naive_hff(trace: &PredictionTrace, threshold: usize) -> f64 {
    let t = trace.steps();
    let k = trace.classes();
    let mut amp = vec![0.0; t / 2 + 1];
    for class in 0..k {
        for (f, a) in amp.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..t {
                acc += trace.row(s)[class] * Complex64::from_polar(1.0, -2.0 * PI * (f * s) as f64 / t as f64);
            }
            *a += acc.norm() / k as f64;
        }
    }
    amp[threshold + 1..].iter().sum::<f64>() / amp.iter().sum::<f64>()
}

fn criterion_3() -> Outcome {
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|t| {
            let p = 0.5 + 0.25 * (2.0 * PI * 20.0 * t as f64 / 100.0).cos();
            vec![p, 1.0 - p]
        })
        .collect();
    let cosine = lib(hff(&PredictionTrace::from_rows("cos", &rows).unwrap(), 10))?;
    check((cosine - 0.2).abs() <= 1e-9, format!("cosine hff {cosine}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..50 {
        let row = random_trace(&mut rng, "c", 2, 2 + i % 9).row(0).to_vec();
        let constant = PredictionTrace::from_rows("c", &vec![row; 100]).unwrap();
        let v = lib(hff(&constant, 10))?;
        check(v == 0.0, format!("constant trace hff {v:e}"))?;
    }

    let mut worst = 0.0f64;
    for i in 0..1000 {
        let steps = [100, 64, 37, 2 * (11 + i % 40)][i % 4];
        let tr = random_trace(&mut rng, "r", steps, 2 + i % 9);
        let threshold = 1 + i % (steps / 2);
        worst = worst.max((lib(hff(&tr, threshold))? - naive_hff(&tr, threshold)).abs());
    }
    check(worst <= 1e-9, format!("naive oracle gap {worst:e}"))?;
    Ok(format!("cosine {cosine:.12}, 50 constant traces exactly 0, oracle gap {worst:.1e}"))
}

fn brute_cd(trace: &PredictionTrace) -> usize {
    let top = |row: &[f64]| {
        let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.iter().position(|&p| p == best).unwrap()
    };
    let first = top(trace.row(0));
    for t in 1..trace.steps() {
        if top(trace.row(t)) != first {
            return t + 1;
        }
    }
    trace.steps()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut histogram = BTreeMap::new();
    for i in 0..1000 {
        let k = 2 + i % 5;
        let steps = 100;
        // Top class persists for a random stretch, then hops; ties are frequent.
        let mut top = rng.random_range(0..k);
        let rows: Vec<Vec<f64>> = (0..steps)
            .map(|_| {
                if rng.random::<f64>() < 0.03 {
                    top = rng.random_range(0..k);
                }
                let mut row = vec![1.0; k];
                row[top] = if rng.random::<f64>() < 0.2 { 1.0 } else { 3.0 };
                let total: f64 = row.iter().sum();
                row.into_iter().map(|v| v / total).collect()
            })
            .collect();
        let tr = PredictionTrace::from_rows(format!("t{i}"), &rows).unwrap();
        let (got, want) = (consistent_distance(&tr), brute_cd(&tr));
        check(got == want, format!("trace {i}: cd {got} vs brute force {want}"))?;
        *histogram.entry(got == steps).or_insert(0) += 1;
    }

    let steady = PredictionTrace::from_rows("s", &vec![vec![0.2, 0.8]; 100]).unwrap();
    check(consistent_distance(&steady) == 100, "sentinel")?;
    let mut rows = vec![vec![0.9, 0.1]; 100];
    rows[36] = vec![0.1, 0.9];
    let at37 = PredictionTrace::from_rows("c", &rows).unwrap();
    check(consistent_distance(&at37) == 37, "first change at step 37")?;
    check(argmax(&[0.4, 0.1, 0.1, 0.4]) == 0, "tie goes to lowest index")?;
    let mut rows = vec![vec![0.4, 0.1, 0.1, 0.4]; 10];
    rows[4] = vec![0.1, 0.1, 0.1, 0.7];
    let tied = PredictionTrace::from_rows("tie", &rows).unwrap();
    check(consistent_distance(&tied) == 5, "tied start resolves to class 0")?;
    Ok(format!(
        "1000 traces match brute force ({} reach the sentinel); sentinel, step-37 and tie cases hold",
        histogram.get(&true).unwrap_or(&0)
    ))
}

fn criterion_5() -> Outcome {
    let sigma = 0.5;
    let images = (0..2000)
        .map(|i| natural_image(1, 32, 32, 1.0, 5, i))
        .collect::<fourier_robustness::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let shift = |kind, param| -> Result<_, String> {
        let corrupted = lib(corrupt_batch(&images, &CorruptionSpec::new(kind, param, 55)))?;
        lib(paired_shift_psd(&images, &corrupted))
    };
    let edges = BandEdges::default();
    let bright = lib(band_fractions(&shift(CorruptionKind::Brightness, 0.5)?, edges))?;
    check(bright.low > 0.9, format!("brightness low fraction {}", bright.low))?;
    let noise_map = shift(CorruptionKind::GaussianNoise, sigma)?;
    let noise = lib(band_fractions(&noise_map, edges))?;
    check(
        noise.high > noise.mid && noise.high > noise.low,
        format!("noise bands {:.3}/{:.3}/{:.3}", noise.low, noise.mid, noise.high),
    )?;
    let var = sigma * sigma;
    let flat = noise_map.power.iter().map(|p| (p - var).abs() / var).fold(0.0, f64::max);
    check(flat <= 0.10, format!("white-noise map deviates {:.1}% from sigma^2", 100.0 * flat))?;
    let blur = lib(band_fractions(&shift(CorruptionKind::GaussianBlur, 1.5)?, edges))?;
    Ok(format!(
        "brightness low {:.4}; noise low/mid/high {:.3}/{:.3}/{:.3}; flat within {:.1}%; blur(1.5) low/mid/high {:.3}/{:.3}/{:.3} (informational)",
        bright.low,
        noise.low,
        noise.mid,
        noise.high,
        100.0 * flat,
        blur.low,
        blur.mid,
        blur.high
    ))
}

fn criterion_6() -> Outcome {
    let (k, d) = (10, 50);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let model = lib(LinearPredictor::new(
        (0..k * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
        vec![0.0; k],
        OutputTarget::Logits,
    ))?;
    let truth = model.frobenius_norm();
    let images: Vec<ImageTensor> = (0..800).map(|_| random_image(&mut rng, 1, 5, 10)).collect();
    let run = |n_proj: usize, batch: usize, seed: u64| -> Result<_, String> {
        let config = JacobianConfig {
            n_proj,
            batch_size: batch,
            seed,
            ..JacobianConfig::default()
        };
        lib(estimate_jacobian_norm(&model, &images[..batch], &config))
    };

    let main = run(10, 400, 0)?;
    let rel = (main.frobenius_norm - truth).abs() / truth;
    check(rel <= 0.05, format!("n=4000 relative error {rel}"))?;

    let mut covered = 0;
    for seed in 0..100 {
        let e = run(10, 400, 1000 + seed)?;
        if e.ci95_low <= truth && truth <= e.ci95_high {
            covered += 1;
        }
    }
    check(covered >= 88, format!("coverage {covered}/100"))?;

    let rms = |n_proj: usize, batch: usize| -> Result<f64, String> {
        let mut sq = 0.0;
        for seed in 0..100 {
            sq += (run(n_proj, batch, 5000 + seed)?.frobenius_norm - truth).powi(2);
        }
        Ok((sq / 100.0).sqrt())
    };
    let (small, large) = (rms(10, 50)?, rms(10, 800)?);
    let ratio = small / large;
    check(
        (4.0 / 3.0..=12.0).contains(&ratio),
        format!("rms error ratio n=500 vs n=8000 is {ratio:.2}, expected 4 within a factor 3"),
    )?;
    Ok(format!(
        "||W||_F {truth:.4}, estimate {:.4} ({:.2}%), coverage {covered}/100, error ratio {ratio:.2} (ideal 4)",
        main.frobenius_norm,
        100.0 * rel
    ))
}

/// Standard normal CDF from an erf Taylor series and an erfc continued
/// fraction; independent of the library's special functions.
fn phi(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    if z.abs() < 3.0 {
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -z * z / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        0.5 * (1.0 + 2.0 / PI.sqrt() * sum)
    } else {
        // Lentz evaluation of erfc(|z|) = exp(-z^2)/sqrt(pi) / (|z| + 1/2/(|z| + 1/(|z| + ...)))
        let a = z.abs();
        let mut f = a;
        for n in (1..200).rev() {
            f = a + (n as f64 / 2.0) / f;
        }
        let tail = (-a * a).exp() / PI.sqrt() / f;
        if z > 0.0 {
            1.0 - 0.5 * tail
        } else {
            0.5 * tail
        }
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    // f increasing, sign change in [lo, hi]
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn binom_tail_ge(k: u64, n: u64, p: f64) -> f64 {
    (k..=n)
        .map(|i| {
            let ln_choose: f64 = (1..=i).map(|j| ((n - i + j) as f64 / j as f64).ln()).sum();
            (ln_choose + i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln()).exp()
        })
        .sum()
}

fn criterion_7() -> Outcome {
    let alpha = 0.05;
    let mut worst = 0.0f64;
    for n in 1..=20u64 {
        for k in 0..=n {
            let (lo, hi) = lib(clopper_pearson(k, n, alpha))?;
            let want_lo = if k == 0 {
                0.0
            } else {
                bisect(0.0, 1.0, |p| binom_tail_ge(k, n, p) - alpha / 2.0)
            };
            // P(X <= k) falls as p grows, so bisect on its complement.
            let want_hi = if k == n {
                1.0
            } else {
                bisect(0.0, 1.0, |p| alpha / 2.0 - (1.0 - binom_tail_ge(k + 1, n, p)))
            };
            worst = worst.max((lo - want_lo).abs()).max((hi - want_hi).abs());
            if k == 0 {
                let closed = 1.0 - (alpha / 2.0).powf(1.0 / n as f64);
                check(lo == 0.0 && (hi - closed).abs() <= 1e-9, format!("k=0, n={n}: ({lo}, {hi})"))?;
            }
            if k == n {
                let closed = (alpha / 2.0).powf(1.0 / n as f64);
                check(hi == 1.0 && (lo - closed).abs() <= 1e-9, format!("k=n={n}: ({lo}, {hi})"))?;
            }
        }
    }
    check(worst <= 1e-9, format!("clopper-pearson vs tail bisection {worst:e}"))?;

    check(probit(0.5, DEFAULT_PROBIT_EPS) == 0.0, "probit(0.5) != 0")?;
    let mut probit_worst = 0.0f64;
    for i in 1..1000 {
        let p = i as f64 / 1000.0;
        let want = bisect(-10.0, 10.0, |z| phi(z) - p);
        probit_worst = probit_worst.max((probit(p, DEFAULT_PROBIT_EPS) - want).abs());
    }
    for p in [1e-4, 1e-3, 0.9999] {
        let want = bisect(-10.0, 10.0, |z| phi(z) - p);
        probit_worst = probit_worst.max((probit(p, DEFAULT_PROBIT_EPS) - want).abs());
    }
    check(probit_worst <= 1e-8, format!("probit vs oracle {probit_worst:e}"))?;
    Ok(format!("CP gap {worst:.1e} over n<=20; probit gap {probit_worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let total = 10_000u64;
    let lines = [("a", 0.8, 0.1), ("b", 1.0, -0.3), ("c", 1.3, -0.6)];
    let tau = 0.15;
    let (x_lo, x_hi) = (-0.3, 1.5);
    let var_x = (x_hi - x_lo) * (x_hi - x_lo) / 12.0;
    let models_per_group = 40;
    let mut records = Vec::new();
    let mut truth_r2 = 0.0;
    for (g, m, b) in lines {
        // Binomial sampling noise in the probit domain, averaged over the x range.
        let binom_var = |z: f64| {
            let p = phi(z);
            let dens = (-z * z / 2.0).exp() / (2.0 * PI).sqrt();
            p * (1.0 - p) / (total as f64 * dens * dens)
        };
        let grid: Vec<f64> = (0..=100).map(|i| x_lo + (x_hi - x_lo) * i as f64 / 100.0).collect();
        let noise_x = grid.iter().map(|&x| binom_var(x)).sum::<f64>() / grid.len() as f64;
        let noise_y = grid.iter().map(|&x| binom_var(m * x + b)).sum::<f64>() / grid.len() as f64;
        // Observed x carries sampling noise too; this attenuates the fit.
        let cov = m * var_x;
        let vx = var_x + noise_x;
        let vy = m * m * var_x + tau * tau + noise_y;
        truth_r2 += cov * cov / (vx * vy) / lines.len() as f64;
        for i in 0..models_per_group {
            let x: f64 = rng.random_range(x_lo..x_hi);
            let eps: f64 = StandardNormal.sample(&mut rng);
            let y = m * x + b + tau * eps;
            let model_id = format!("{g}{i}");
            for (dataset, z) in [("id", x), ("ood", y)] {
                let correct = Binomial::new(total, phi(z)).unwrap().sample(&mut rng);
                records.push(AccuracyRecord {
                    model_id: model_id.clone(),
                    group: g.into(),
                    dataset_id: dataset.into(),
                    correct,
                    total,
                });
            }
        }
    }
    let truth_m = lines.iter().map(|l| l.1).sum::<f64>() / lines.len() as f64;
    let query = RegressionQuery {
        x: XSpec::IdAccuracy,
        id_dataset: "id".into(),
        ood_dataset: "ood".into(),
        group_by: GroupBy::Group,
        probit_eps: DEFAULT_PROBIT_EPS,
    };
    let fit = lib(grouped_regression(&records, &[], &query))?;
    check(
        (fit.averaged_m - truth_m).abs() <= 0.05,
        format!("averaged m {} vs {truth_m}", fit.averaged_m),
    )?;
    check(
        (fit.averaged_r2 - truth_r2).abs() <= 0.1,
        format!("averaged R2 {} vs {truth_r2}", fit.averaged_r2),
    )?;

    let xs: Vec<f64> = (0..25).map(|i| -1.0 + 0.1 * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 0.7 * x - 0.2).collect();
    let exact = lib(fit_line(&xs, &ys))?;
    check((exact.r2 - 1.0).abs() <= 1e-9, format!("exact line R2 {}", exact.r2))?;

    // Exact line through the regression entry point, with a raw metric as x.
    let mut accs = Vec::new();
    let mut metrics = Vec::new();
    for i in 0..12u64 {
        let correct = 3000 + 500 * i;
        let id = format!("m{i}");
        accs.push(AccuracyRecord {
            model_id: id.clone(),
            group: "g".into(),
            dataset_id: "ood".into(),
            correct,
            total,
        });
        let y = probit(correct as f64 / total as f64, DEFAULT_PROBIT_EPS);
        metrics.push(MetricRecord {
            model_id: id,
            metric_name: "score".into(),
            value: (y - 0.25) / 1.5,
            value_kind: ValueKind::Raw,
        });
    }
    let raw = lib(grouped_regression(
        &accs,
        &metrics,
        &RegressionQuery {
            x: XSpec::Metric("score".into()),
            ..query
        },
    ))?;
    check((raw.averaged_r2 - 1.0).abs() <= 1e-9, format!("exact metric line R2 {}", raw.averaged_r2))?;
    check((raw.averaged_m - 1.5).abs() <= 1e-9, format!("exact metric slope {}", raw.averaged_m))?;
    Ok(format!(
        "averaged m {:.4} (truth {truth_m:.4}), averaged R2 {:.4} (truth {truth_r2:.4}), exact lines R2 = 1",
        fit.averaged_m, fit.averaged_r2
    ))
}

fn read_all(dir: &Path, outputs: &[std::path::PathBuf]) -> Vec<(String, Vec<u8>)> {
    outputs
        .iter()
        .map(|p| {
            let rel = p.strip_prefix(dir).unwrap().display().to_string();
            (rel, std::fs::read(p).unwrap())
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let config = ToyConfig::default();
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = lib(run_toy_pipeline(first.path(), &config))?;
    let b = lib(run_toy_pipeline(second.path(), &config))?;

    check(a.path_values.len() == config.n_paths * config.groups.len() * config.epochs.len(), "path count")?;
    for &(h, cd) in &a.path_values {
        check((0.0..=1.0).contains(&h), format!("hff {h} outside [0, 1]"))?;
        check((2..=100).contains(&cd), format!("cd {cd} outside [2, 100]"))?;
    }
    let files_a = read_all(first.path(), &a.outputs);
    let files_b = read_all(second.path(), &b.outputs);
    check(files_a.len() == files_b.len(), "different file sets")?;
    for ((na, da), (nb, db)) in files_a.iter().zip(&files_b) {
        check(na == nb && da == db, format!("{na} differs between runs"))?;
    }
    check(a.models == b.models, "model summaries differ between runs")?;
    let hffs: Vec<f64> = a.models.iter().map(|m| m.mean_hff).collect();
    let cds: Vec<f64> = a.models.iter().map(|m| m.mean_cd).collect();
    Ok(format!(
        "{} models, {} traces, {} files identical across runs; model mean HFF {:.3}..{:.3}, mean CD {:.1}..{:.1}",
        a.models.len(),
        a.path_values.len(),
        files_a.len(),
        hffs.iter().cloned().fold(f64::INFINITY, f64::min),
        hffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        cds.iter().cloned().fold(f64::INFINITY, f64::min),
        cds.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    ))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..50 {
        let rank = 1 + i % 4;
        let shape: Vec<usize> = (0..rank).map(|_| rng.random_range(1..7)).collect();
        let n: usize = shape.iter().product();
        let mut data: Vec<f32> = (0..n).map(|_| f32::from_bits(rng.random::<u32>())).map(|v| if v.is_finite() { v } else { 1.5 }).collect();
        if n > 3 {
            data[0] = -0.0;
            data[1] = f32::MIN_POSITIVE / 4.0;
            data[2] = f32::MAX;
        }
        let path = dir.path().join(format!("t{i}.tnsr"));
        lib(io::write_tensor(&path, &data, &shape))?;
        let (back, back_shape) = lib(io::read_tensor(&path))?;
        check(back_shape == shape, format!("tensor {i}: shape changed"))?;
        check(
            back.iter().map(|v| v.to_bits()).eq(data.iter().map(|v| v.to_bits())),
            format!("tensor {i}: payload changed"),
        )?;
    }

    let head = "path_id,step,p_0,p_1\n";
    let fixtures: [(&str, String, u64); 8] = [
        ("bad header", "path,step,p_0,p_1\na,1,0.5,0.5\n".into(), 1),
        ("single class", "path_id,step,p_0\na,1,1.0\n".into(), 1),
        ("non-numeric", format!("{head}a,1,0.5,0.5\na,2,x,0.5\n"), 3),
        ("negative", format!("{head}a,1,0.5,0.5\na,2,-0.5,1.5\n"), 3),
        ("row sum", format!("{head}a,1,0.5,0.5\na,2,0.7,0.7\n"), 3),
        ("missing column", format!("{head}a,1,0.5,0.5\na,2,0.5\n"), 3),
        ("step gap", format!("{head}a,1,0.5,0.5\na,2,0.5,0.5\na,4,0.5,0.5\n"), 4),
        ("empty id", format!("{head}a,1,0.5,0.5\n,2,0.5,0.5\n"), 3),
    ];
    for (name, body, line) in &fixtures {
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, body).unwrap();
        match io::read_traces(&path) {
            Err(Error::Parse { line: got, .. }) => {
                check(got == *line, format!("fixture {name}: error on line {got}, expected {line}"))?
            }
            other => return Err(format!("fixture {name}: expected a parse error, got {other:?}")),
        }
    }

    let map = lib(psd(&(0..4).map(|_| random_image(&mut rng, 1, 8, 8)).collect::<Vec<_>>()))?;
    let pgm_a = dir.path().join("a.pgm");
    let pgm_b = dir.path().join("b.pgm");
    lib(io::emit_pgm(&map, &pgm_a))?;
    lib(io::emit_pgm(&map, &pgm_b))?;
    check(std::fs::read(&pgm_a).unwrap() == std::fs::read(&pgm_b).unwrap(), "pgm output differs")?;
    let points: Vec<ScatterPoint> = (0..20)
        .map(|i| ScatterPoint {
            x: i as f64 / 10.0,
            y: rng.random_range(-1.0..1.0),
            group: format!("g{}", i % 3),
            ci: Some((-1.5, 1.5)),
        })
        .collect();
    let lines: Vec<GroupLine> = (0..3)
        .map(|g| GroupLine {
            group: format!("g{g}"),
            slope: 0.5 * g as f64,
            intercept: -0.1,
            r2: 0.3 * g as f64,
        })
        .collect();
    let svg_a = dir.path().join("a.svg");
    let svg_b = dir.path().join("b.svg");
    lib(io::emit_scatter_svg(&points, &lines, &AxisLabels::default(), &svg_a))?;
    lib(io::emit_scatter_svg(&points, &lines, &AxisLabels::default(), &svg_b))?;
    check(std::fs::read(&svg_a).unwrap() == std::fs::read(&svg_b).unwrap(), "svg output differs")?;
    Ok(format!(
        "50 tensors bit-exact, {} malformed trace fixtures rejected on the right line, PGM/SVG deterministic",
        fixtures.len()
    ))
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("spectral correctness", Duration::from_secs(5), criterion_1),
        ("path construction", Duration::from_secs(60), criterion_2),
        ("HFF analytic case", Duration::from_secs(5), criterion_3),
        ("CD semantics", Duration::from_secs(2), criterion_4),
        ("shift-PSD ordering", Duration::from_secs(60), criterion_5),
        ("Jacobian estimator", Duration::from_secs(120), criterion_6),
        ("exact statistics", Duration::from_secs(10), criterion_7),
        ("regression recovery", Duration::from_secs(10), criterion_8),
        ("end-to-end toy pipeline", Duration::from_secs(300), criterion_9),
        ("I/O round trips", Duration::from_secs(5), criterion_10),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *budget => Err(format!("{detail}; took {took:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS {name} [{took:.2?}]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name} [{took:.2?}]: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
