//! Probit-domain robustness regression.
//!
//! OOD accuracy is regressed against ID accuracy, or against a model
//! property metric, one ordinary least squares line per model group (for
//! example per architecture). Table-style summaries report the unweighted
//! mean of the per-group slopes and R² values, never a pooled refit.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

pub const DEFAULT_PROBIT_EPS: f64 = 1e-6;
pub const ID_ACCURACY: &str = "ID accuracy";

/// Exact (Clopper-Pearson) two-sided binomial interval at level `1 - alpha`.
pub fn clopper_pearson(correct: u64, total: u64, alpha: f64) -> Result<(f64, f64)> {
    if total == 0 || correct > total {
        return Err(Error::invalid(format!(
            "need 0 <= correct <= total and total >= 1, got {correct}/{total}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} outside (0, 1)")));
    }
    let (k, n) = (correct as f64, total as f64);
    let low = if correct == 0 {
        0.0
    } else {
        beta_quantile(k, n - k + 1.0, alpha / 2.0)
    };
    let high = if correct == total {
        1.0
    } else {
        beta_quantile(k + 1.0, n - k, 1.0 - alpha / 2.0)
    };
    Ok((low, high))
}

/// Inverse of the regularized incomplete beta function by bisection.
fn beta_quantile(a: f64, b: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse standard normal CDF of `p` clamped to `[eps, 1 - eps]`.
pub fn probit(p: f64, eps: f64) -> f64 {
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    std_normal.inverse_cdf(p.clamp(eps, 1.0 - eps))
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").cdf(z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
///
/// When every `y` is equal, R² is 1 if the fit is exact and 0 otherwise.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!("{} xs vs {} ys", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateFit("need at least 2 points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite regression input"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all x values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(LineFit {
        slope,
        intercept,
        r2,
    })
}

/// Probit-domain residual of a model against a baseline line; positive
/// values lie above the line.
pub fn effective_robustness(id_acc: f64, ood_acc: f64, baseline: (f64, f64)) -> f64 {
    let (m, b) = baseline;
    probit(ood_acc, DEFAULT_PROBIT_EPS) - (m * probit(id_acc, DEFAULT_PROBIT_EPS) + b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccuracyRecord {
    pub model_id: String,
    pub group: String,
    pub dataset_id: String,
    pub correct: u64,
    pub total: u64,
}

impl AccuracyRecord {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.total == 0 || self.correct > self.total {
            return Err(Error::invalid(format!(
                "model {} on {}: need 0 <= correct <= total, total >= 1",
                self.model_id, self.dataset_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Accuracy,
    Raw,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Accuracy => "accuracy",
            ValueKind::Raw => "raw",
        })
    }
}

impl FromStr for ValueKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accuracy" => Ok(ValueKind::Accuracy),
            "raw" => Ok(ValueKind::Raw),
            other => Err(Error::invalid(format!("unknown value kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub model_id: String,
    pub metric_name: String,
    pub value: f64,
    pub value_kind: ValueKind,
}

impl MetricRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.value.is_finite() {
            return Err(Error::invalid(format!(
                "metric {} of {} is not finite",
                self.metric_name, self.model_id
            )));
        }
        if self.value_kind == ValueKind::Accuracy && !(0.0..=1.0).contains(&self.value) {
            return Err(Error::invalid(format!(
                "accuracy metric {} of {} outside [0, 1]",
                self.metric_name, self.model_id
            )));
        }
        Ok(())
    }
}

/// Regressor: ID accuracy on a dataset, or a named metric.
#[derive(Debug, Clone, PartialEq)]
pub enum XSpec {
    IdAccuracy,
    Metric(String),
}

impl XSpec {
    pub fn parse(s: &str) -> Self {
        if s == ID_ACCURACY {
            XSpec::IdAccuracy
        } else {
            XSpec::Metric(s.to_string())
        }
    }

    pub fn label(&self) -> &str {
        match self {
            XSpec::IdAccuracy => ID_ACCURACY,
            XSpec::Metric(name) => name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    /// The accuracy records' `group` column.
    Group,
    /// Every model in one group.
    All,
}

impl FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group" => Ok(GroupBy::Group),
            "all" | "none" => Ok(GroupBy::All),
            other => Err(Error::invalid(format!("cannot group by {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionQuery {
    pub x: XSpec,
    pub id_dataset: String,
    pub ood_dataset: String,
    pub group_by: GroupBy,
    pub probit_eps: f64,
}

/// One model's coordinates in the regression plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionPoint {
    pub model_id: String,
    pub group: String,
    pub x: f64,
    /// probit(OOD accuracy)
    pub y: f64,
    /// Clopper-Pearson bounds on OOD accuracy, probit-transformed.
    pub y_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupFit {
    pub group: String,
    pub fit: LineFit,
    pub n_models: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedGroup {
    pub group: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbitRegression {
    pub x_label: String,
    /// Whether x went through probit (accuracy-kind) or entered raw.
    pub x_probit: bool,
    pub per_group: Vec<GroupFit>,
    pub skipped: Vec<SkippedGroup>,
    pub averaged_m: f64,
    pub averaged_r2: f64,
    pub points: Vec<RegressionPoint>,
}

/// Fits one probit-domain line per group and averages slope and R².
///
/// Groups with fewer than two usable models, or with constant x, are
/// reported in `skipped` and left out of the averages.
pub fn grouped_regression(
    accuracies: &[AccuracyRecord],
    metrics: &[MetricRecord],
    query: &RegressionQuery,
) -> Result<ProbitRegression> {
    let eps = query.probit_eps;
    let mut acc: HashMap<(&str, &str), &AccuracyRecord> = HashMap::new();
    let mut model_group: BTreeMap<&str, &str> = BTreeMap::new();
    for r in accuracies {
        r.validate()?;
        if acc.insert((&r.model_id, &r.dataset_id), r).is_some() {
            return Err(Error::invalid(format!(
                "duplicate accuracy record for model {} on {}",
                r.model_id, r.dataset_id
            )));
        }
        let group = match query.group_by {
            GroupBy::Group => r.group.as_str(),
            GroupBy::All => "all",
        };
        if let Some(prev) = model_group.insert(&r.model_id, group) {
            if prev != group {
                return Err(Error::invalid(format!(
                    "model {} listed in groups {prev} and {group}",
                    r.model_id
                )));
            }
        }
    }
    let mut metric: HashMap<(&str, &str), &MetricRecord> = HashMap::new();
    for m in metrics {
        m.validate()?;
        if metric.insert((&m.model_id, &m.metric_name), m).is_some() {
            return Err(Error::invalid(format!(
                "duplicate metric {} for model {}",
                m.metric_name, m.model_id
            )));
        }
    }

    let mut x_kinds = Vec::new();
    let mut grouped: BTreeMap<&str, Vec<RegressionPoint>> = BTreeMap::new();
    for (&model, &group) in &model_group {
        let entry = grouped.entry(group).or_default();
        let Some(ood) = acc.get(&(model, query.ood_dataset.as_str())) else {
            continue;
        };
        let x = match &query.x {
            XSpec::IdAccuracy => match acc.get(&(model, query.id_dataset.as_str())) {
                Some(r) => {
                    x_kinds.push(true);
                    probit(r.accuracy(), eps)
                }
                None => continue,
            },
            XSpec::Metric(name) => match metric.get(&(model, name.as_str())) {
                Some(m) => {
                    let is_acc = m.value_kind == ValueKind::Accuracy;
                    x_kinds.push(is_acc);
                    if is_acc {
                        probit(m.value, eps)
                    } else {
                        m.value
                    }
                }
                None => continue,
            },
        };
        let (lo, hi) = clopper_pearson(ood.correct, ood.total, 0.05)?;
        entry.push(RegressionPoint {
            model_id: model.to_string(),
            group: group.to_string(),
            x,
            y: probit(ood.accuracy(), eps),
            y_ci: (probit(lo, eps), probit(hi, eps)),
        });
    }
    if x_kinds.iter().any(|&k| k != x_kinds[0]) {
        return Err(Error::invalid(format!(
            "metric {} mixes accuracy and raw value kinds",
            query.x.label()
        )));
    }

    let mut per_group = Vec::new();
    let mut skipped = Vec::new();
    let mut points = Vec::new();
    for (group, pts) in grouped {
        if pts.len() < 2 {
            skipped.push(SkippedGroup {
                group: group.to_string(),
                reason: format!("only {} usable model(s)", pts.len()),
            });
        } else {
            let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
            match fit_line(&xs, &ys) {
                Ok(fit) => per_group.push(GroupFit {
                    group: group.to_string(),
                    fit,
                    n_models: pts.len(),
                }),
                Err(Error::DegenerateFit(reason)) => skipped.push(SkippedGroup {
                    group: group.to_string(),
                    reason,
                }),
                Err(e) => return Err(e),
            }
        }
        points.extend(pts);
    }
    if per_group.is_empty() {
        return Err(Error::DegenerateFit(format!(
            "no group has two usable models for {} vs {}",
            query.x.label(),
            query.ood_dataset
        )));
    }
    let g = per_group.len() as f64;
    Ok(ProbitRegression {
        x_label: query.x.label().to_string(),
        x_probit: x_kinds.first().copied().unwrap_or(false),
        averaged_m: per_group.iter().map(|f| f.fit.slope).sum::<f64>() / g,
        averaged_r2: per_group.iter().map(|f| f.fit.r2).sum::<f64>() / g,
        per_group,
        skipped,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn binom_upper_tail(k: u64, n: u64, p: f64) -> f64 {
        // P[X >= k]
        (k..=n).map(|i| binom_pmf(i, n, p)).sum()
    }

    fn binom_pmf(i: u64, n: u64, p: f64) -> f64 {
        let mut c = 1.0;
        for j in 0..i {
            c *= (n - j) as f64 / (j + 1) as f64;
        }
        c * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32)
    }

    fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> bool) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn clopper_pearson_closed_forms() {
        let (lo, hi) = clopper_pearson(0, 10, 0.05).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-9);
        assert!((hi - 0.30850).abs() < 1e-5);
        let (lo, hi) = clopper_pearson(10, 10, 0.05).unwrap();
        assert!((lo - 0.025f64.powf(0.1)).abs() < 1e-9);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn clopper_pearson_matches_tail_bisection() {
        let (lo, hi) = clopper_pearson(5, 10, 0.05).unwrap();
        // Lower bound: P[X >= 5 | p] = alpha/2; upper: P[X <= 5 | p] = alpha/2.
        let want_lo = bisect(0.0, 1.0, |p| binom_upper_tail(5, 10, p) >= 0.025);
        let want_hi = bisect(0.0, 1.0, |p| 1.0 - binom_upper_tail(6, 10, p) <= 0.025);
        assert!((lo - want_lo).abs() < 1e-9);
        assert!((hi - want_hi).abs() < 1e-9);
    }

    #[test]
    fn clopper_pearson_errors() {
        assert!(clopper_pearson(3, 2, 0.05).is_err());
        assert!(clopper_pearson(0, 0, 0.05).is_err());
        assert!(clopper_pearson(1, 2, 0.0).is_err());
        assert!(clopper_pearson(1, 2, 1.0).is_err());
    }

    #[test]
    fn probit_values() {
        assert_eq!(probit(0.5, DEFAULT_PROBIT_EPS), 0.0);
        assert!((probit(0.975, DEFAULT_PROBIT_EPS) - 1.959964).abs() < 1e-6);
        assert!(probit(0.3, 1e-6) < probit(0.31, 1e-6));
        assert_eq!(probit(0.0, 1e-6), probit(1e-6, 1e-6));
        assert!(probit(1.0, 1e-6).is_finite());
    }

    #[test]
    fn fit_line_examples() {
        let xs = [0.1, 0.5, 1.2, 2.0, 3.3];
        let ys: Vec<f64> = xs.iter().map(|x| 0.9 * x + 0.1).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope - 0.9).abs() < 1e-9);
        assert!((f.intercept - 0.1).abs() < 1e-9);
        assert!((f.r2 - 1.0).abs() < 1e-9);

        assert_eq!(fit_line(&[0.0, 1.0], &[3.0, -2.0]).unwrap().r2, 1.0);
        assert_eq!(fit_line(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).unwrap().r2, 1.0);
        assert!(matches!(fit_line(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::DegenerateFit(_))));
        assert!(fit_line(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn fit_line_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..40).map(|_| rng.random_range(-2.0..3.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.4 * x - 1.0 + rng.random_range(-0.5..0.5)).collect();
        let f = fit_line(&xs, &ys).unwrap();
        // Solve [n sx; sx sxx] [b; m] = [sy; sxy] by Cramer's rule.
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let det = n * sxx - sx * sx;
        let m = (n * sxy - sx * sy) / det;
        let b = (sxx * sy - sx * sxy) / det;
        assert!((f.slope - m).abs() < 1e-10);
        assert!((f.intercept - b).abs() < 1e-10);
    }

    #[test]
    fn effective_robustness_examples() {
        let (m, b) = (0.8, -0.2);
        let id = 0.9;
        let on_line = normal_cdf(m * probit(id, 1e-6) + b);
        assert!(effective_robustness(id, on_line, (m, b)).abs() < 1e-9);
        let above = normal_cdf(m * probit(id, 1e-6) + b + 0.3);
        assert!((effective_robustness(id, above, (m, b)) - 0.3).abs() < 1e-9);
    }

    fn rec(model: &str, group: &str, ds: &str, correct: u64, total: u64) -> AccuracyRecord {
        AccuracyRecord {
            model_id: model.into(),
            group: group.into(),
            dataset_id: ds.into(),
            correct,
            total,
        }
    }

    fn query(x: XSpec) -> RegressionQuery {
        RegressionQuery {
            x,
            id_dataset: "id".into(),
            ood_dataset: "ood".into(),
            group_by: GroupBy::Group,
            probit_eps: DEFAULT_PROBIT_EPS,
        }
    }

    #[test]
    fn skips_small_groups_and_averages_the_rest() {
        let mut recs = Vec::new();
        for (i, (id, ood)) in [(700, 500), (800, 600), (900, 700)].iter().enumerate() {
            recs.push(rec(&format!("a{i}"), "A", "id", *id, 1000));
            recs.push(rec(&format!("a{i}"), "A", "ood", *ood, 1000));
        }
        recs.push(rec("b0", "B", "id", 700, 1000));
        recs.push(rec("b0", "B", "ood", 600, 1000));
        let r = grouped_regression(&recs, &[], &query(XSpec::IdAccuracy)).unwrap();
        assert_eq!(r.per_group.len(), 1);
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].group, "B");
        assert_eq!(r.averaged_m, r.per_group[0].fit.slope);
        assert!(r.x_probit);
        assert_eq!(r.points.len(), 4);
    }

    #[test]
    fn raw_metrics_enter_untransformed() {
        let mut recs = Vec::new();
        let mut metrics = Vec::new();
        for i in 0..4 {
            let m = format!("m{i}");
            recs.push(rec(&m, "G", "ood", 400 + 100 * i, 1000));
            metrics.push(MetricRecord {
                model_id: m,
                metric_name: "jacobian".into(),
                value: 10.0 + i as f64,
                value_kind: ValueKind::Raw,
            });
        }
        let r = grouped_regression(&recs, &metrics, &query(XSpec::Metric("jacobian".into()))).unwrap();
        assert!(!r.x_probit);
        assert_eq!(r.points[0].x, 10.0);
        assert!(r.averaged_m > 0.0);
    }

    #[test]
    fn duplicate_records_rejected() {
        let recs = vec![rec("a", "G", "ood", 1, 2), rec("a", "G", "ood", 1, 2)];
        assert!(grouped_regression(&recs, &[], &query(XSpec::IdAccuracy)).is_err());
    }
}
