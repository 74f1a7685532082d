//! Probit-domain OOD-vs-ID lines per group, exact binomial intervals and
//! effective robustness, with an SVG plot in the temp dir.

use fourier_robustness::io::{emit_scatter_svg, AxisLabels, GroupLine, ScatterPoint};
use fourier_robustness::robustness_stats::{
    clopper_pearson, effective_robustness, grouped_regression, normal_cdf, AccuracyRecord, GroupBy,
    RegressionQuery, XSpec, DEFAULT_PROBIT_EPS,
};

fn main() -> fourier_robustness::Result<()> {
    let groups = [("resnet", 0.9, -0.4), ("vgg", 1.1, -0.7)];
    let mut records = Vec::new();
    for (g, m, b) in groups {
        for i in 0..6 {
            let z = 0.4 + 0.2 * i as f64;
            let wobble = 0.03 * ((i * 7 % 5) as f64 - 2.0);
            for (dataset, acc) in [("id", normal_cdf(z)), ("shifted", normal_cdf(m * z + b + wobble))] {
                records.push(AccuracyRecord {
                    model_id: format!("{g}-{i}"),
                    group: g.into(),
                    dataset_id: dataset.into(),
                    correct: (acc * 10_000.0).round() as u64,
                    total: 10_000,
                });
            }
        }
    }

    let (lo, hi) = clopper_pearson(9_130, 10_000, 0.05)?;
    println!("9130/10000 correct: 95% interval [{lo:.4}, {hi:.4}]");

    let query = RegressionQuery {
        x: XSpec::IdAccuracy,
        id_dataset: "id".into(),
        ood_dataset: "shifted".into(),
        group_by: GroupBy::Group,
        probit_eps: DEFAULT_PROBIT_EPS,
    };
    let fit = grouped_regression(&records, &[], &query)?;
    for g in &fit.per_group {
        println!(
            "{:<7} m = {:.3}, b = {:.3}, R2 = {:.3} ({} models)",
            g.group, g.fit.slope, g.fit.intercept, g.fit.r2, g.n_models
        );
    }
    println!("averaged m = {:.3}, averaged R2 = {:.3}", fit.averaged_m, fit.averaged_r2);

    let base = &fit.per_group[0].fit;
    let er = effective_robustness(0.85, 0.75, (base.slope, base.intercept));
    println!("a model at 85% ID / 75% OOD sits {er:+.3} probits off the {} line", fit.per_group[0].group);

    let points: Vec<ScatterPoint> = fit
        .points
        .iter()
        .map(|p| ScatterPoint {
            x: p.x,
            y: p.y,
            group: p.group.clone(),
            ci: Some(p.y_ci),
        })
        .collect();
    let lines: Vec<GroupLine> = fit
        .per_group
        .iter()
        .map(|g| GroupLine {
            group: g.group.clone(),
            slope: g.fit.slope,
            intercept: g.fit.intercept,
            r2: g.fit.r2,
        })
        .collect();
    let out = std::env::temp_dir().join("probit_fit.svg");
    emit_scatter_svg(&points, &lines, &AxisLabels::default(), &out)?;
    println!("plot written to {}", out.display());
    Ok(())
}
