//! Posterior summaries: HPD intervals, KDE modes, HPD-based variable
//! selection and confusion-matrix metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::{effective_sample_size, ChainOutput};
use crate::numeric::{mean, sorted_copy, sorted_quantile, variance};

pub const MIN_SAMPLES: usize = 100;
pub const KDE_GRID: usize = 512;
pub const DEFAULT_LEVEL: f64 = 0.95;

fn check_len(samples: &[f64]) -> Result<()> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SAMPLES,
            found: samples.len(),
        });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite sample".into()));
    }
    Ok(())
}

/// Shortest window of sorted samples containing `ceil(level * n)` of them.
pub fn hpd_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    check_len(samples)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter {
            name: "level",
            value: level,
            reason: "must lie in (0, 1)",
        });
    }
    let sorted = sorted_copy(samples);
    Ok(hpd_sorted(&sorted, level))
}

fn hpd_sorted(sorted: &[f64], level: f64) -> (f64, f64) {
    let n = sorted.len();
    let k = ((level * n as f64).ceil() as usize).clamp(1, n);
    let mut best = 0;
    let mut best_width = f64::INFINITY;
    for i in 0..=n - k {
        let w = sorted[i + k - 1] - sorted[i];
        if w < best_width {
            best_width = w;
            best = i;
        }
    }
    (sorted[best], sorted[best + k - 1])
}

/// Silverman's rule `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`, falling back to
/// the sd when the IQR collapses.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let sorted = sorted_copy(samples);
    let sd = variance(samples).sqrt();
    let iqr = sorted_quantile(&sorted, 0.75) - sorted_quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (samples.len() as f64).powf(-0.2)
}

/// Gaussian KDE evaluated on an evenly spaced grid over `[min, max]`.
pub fn kde_curve(samples: &[f64], grid_points: usize) -> Result<Vec<(f64, f64)>> {
    check_len(samples)?;
    let grid_points = grid_points.max(2);
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo == hi {
        return Ok(vec![(lo, f64::INFINITY)]);
    }
    let h = silverman_bandwidth(samples);
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let step = (hi - lo) / (grid_points - 1) as f64;
    Ok((0..grid_points)
        .map(|g| {
            let x = lo + step * g as f64;
            let d: f64 = samples
                .iter()
                .map(|s| {
                    let z = (x - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum();
            (x, d * norm)
        })
        .collect())
}

/// Argmax of the KDE over a 512-point grid spanning the samples.
pub fn marginal_mode(samples: &[f64]) -> Result<f64> {
    let curve = kde_curve(samples, KDE_GRID)?;
    Ok(curve
        .iter()
        .fold((curve[0].0, f64::NEG_INFINITY), |best, &(x, d)| {
            if d > best.1 {
                (x, d)
            } else {
                best
            }
        })
        .0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mode: f64,
    pub mean: f64,
    pub median: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub ess: f64,
    /// Zero lies outside the HPD interval.
    pub selected: bool,
}

pub fn summarize_column(name: &str, samples: &[f64], level: f64) -> Result<ParameterSummary> {
    let (hpd_low, hpd_high) = hpd_interval(samples, level)?;
    let sorted = sorted_copy(samples);
    Ok(ParameterSummary {
        name: name.to_string(),
        mode: marginal_mode(samples)?,
        mean: mean(samples),
        median: sorted_quantile(&sorted, 0.5),
        hpd_low,
        hpd_high,
        ess: effective_sample_size(samples)?.ess,
        selected: !(hpd_low <= 0.0 && 0.0 <= hpd_high),
    })
}

/// One summary per chain column (coefficients, then any rate columns).
pub fn summarize_chain(chain: &ChainOutput, level: f64) -> Result<Vec<ParameterSummary>> {
    chain
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| summarize_column(name, &chain.column(j), level))
        .collect()
}

/// Confusion-matrix fractions; `None` where the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    pub tnr: Option<f64>,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn selection_metrics(selected: &[bool], truth_nonzero: &[bool]) -> Result<SelectionMetrics> {
    if selected.len() != truth_nonzero.len() {
        return Err(Error::DimensionMismatch {
            expected: truth_nonzero.len(),
            found: selected.len(),
        });
    }
    let (mut tp, mut fp, mut fneg, mut tn) = (0, 0, 0, 0);
    for (&s, &t) in selected.iter().zip(truth_nonzero) {
        match (s, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(SelectionMetrics {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fneg,
        true_negatives: tn,
        tnr: ratio(tn, tn + fp),
        recall: ratio(tp, tp + fneg),
        precision: ratio(tp, tp + fp),
        f1: ratio(2 * tp, 2 * tp + fneg + fp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normals(n: usize, mu: f64, seed: u64) -> Vec<f64> {
        let mut rng = seeded_rng(seed);
        (0..n).map(|_| mu + rng.sample::<f64, _>(StandardNormal)).collect()
    }

    #[test]
    fn hpd_uniform_grid() {
        let grid: Vec<f64> = (0..1001).map(|i| i as f64 / 1000.0).collect();
        let (lo, hi) = hpd_interval(&grid, 0.95).unwrap();
        assert!((hi - lo - 0.95).abs() < 2e-3, "{lo} {hi}");
    }

    #[test]
    fn hpd_standard_normal() {
        let (lo, hi) = hpd_interval(&normals(100_000, 0.0, 1), 0.95).unwrap();
        assert!((lo + 1.96).abs() < 0.05 && (hi - 1.96).abs() < 0.05, "{lo} {hi}");
    }

    #[test]
    fn hpd_shorter_than_equal_tailed_on_skewed_draws() {
        let draws: Vec<f64> = normals(20_000, 0.0, 2).into_iter().map(f64::exp).collect();
        let (lo, hi) = hpd_interval(&draws, 0.95).unwrap();
        let sorted = sorted_copy(&draws);
        let et = sorted_quantile(&sorted, 0.975) - sorted_quantile(&sorted, 0.025);
        assert!(hi - lo < et);
    }

    #[test]
    fn hpd_rejects_small_input() {
        assert!(hpd_interval(&[1.0; 99], 0.95).is_err());
        assert!(hpd_interval(&[1.0; 200], 1.0).is_err());
    }

    #[test]
    fn mode_examples() {
        assert_eq!(marginal_mode(&[2.5; 300]).unwrap(), 2.5);
        let m = marginal_mode(&normals(100_000, 3.0, 4)).unwrap();
        assert!((m - 3.0).abs() < 0.05, "{m}");
    }

    #[test]
    fn mode_picks_taller_component() {
        let mut draws = normals(6000, -2.0, 5);
        draws.extend(normals(3000, 2.0, 6));
        let m = marginal_mode(&draws).unwrap();
        assert!((m + 2.0).abs() < 0.2, "{m}");
    }

    #[test]
    fn kde_integrates_to_about_one() {
        let draws = normals(5000, 0.0, 7);
        let curve = kde_curve(&draws, KDE_GRID).unwrap();
        let step = curve[1].0 - curve[0].0;
        let area: f64 = curve.iter().map(|p| p.1).sum::<f64>() * step;
        // tails beyond the sample range are cut off
        assert!(area > 0.97 && area < 1.01, "{area}");
    }

    #[test]
    fn metrics_from_counts() {
        let mut sel = vec![true; 12];
        let mut truth = vec![true; 12];
        sel.push(true);
        truth.push(false);
        sel.push(false);
        truth.push(true);
        sel.extend([false; 36]);
        truth.extend([false; 36]);
        let m = selection_metrics(&sel, &truth).unwrap();
        assert!((m.precision.unwrap() - 12.0 / 13.0).abs() < 1e-12);
        assert!((m.recall.unwrap() - 12.0 / 13.0).abs() < 1e-12);
        assert!((m.f1.unwrap() - 24.0 / 26.0).abs() < 1e-12);
        assert!((m.tnr.unwrap() - 36.0 / 37.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_edge_cases() {
        let perfect = selection_metrics(&[true, false], &[true, false]).unwrap();
        assert_eq!(
            (perfect.tnr, perfect.recall, perfect.precision, perfect.f1),
            (Some(1.0), Some(1.0), Some(1.0), Some(1.0))
        );
        let none = selection_metrics(&[false, false], &[true, false]).unwrap();
        assert_eq!(none.recall, Some(0.0));
        assert_eq!(none.precision, None);
        assert!(selection_metrics(&[true], &[true, false]).is_err());
    }

    #[test]
    fn column_summary_matches_direct_computation() {
        let draws = normals(2000, 1.0, 9);
        let s = summarize_column("b", &draws, 0.95).unwrap();
        let sorted = sorted_copy(&draws);
        assert_eq!(s.mean, mean(&draws));
        assert_eq!(s.median, sorted_quantile(&sorted, 0.5));
        assert_eq!((s.hpd_low, s.hpd_high), hpd_interval(&draws, 0.95).unwrap());
        assert_eq!(s.selected, s.hpd_low > 0.0 || s.hpd_high < 0.0);
        let zeros = summarize_column("z", &[0.0; 200], 0.95).unwrap();
        assert!(!zeros.selected);
        let pos: Vec<f64> = draws.iter().map(|v| v.abs() + 0.01).collect();
        assert!(summarize_column("p", &pos, 0.95).unwrap().selected);
    }

    fn brute_force_width(sorted: &[f64], k: usize) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..sorted.len() {
            for j in i..sorted.len() {
                if j - i + 1 >= k {
                    best = best.min(sorted[j] - sorted[i]);
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn hpd_is_minimal_and_covers(v in prop::collection::vec(-50.0f64..50.0, 100..140), level in 0.5f64..0.99) {
            let (lo, hi) = hpd_interval(&v, level).unwrap();
            let k = (level * v.len() as f64).ceil() as usize;
            let inside = v.iter().filter(|x| **x >= lo && **x <= hi).count();
            prop_assert!(inside >= k);
            let sorted = sorted_copy(&v);
            prop_assert!((hi - lo - brute_force_width(&sorted, k)).abs() < 1e-12);
        }

        #[test]
        fn mode_within_range(v in prop::collection::vec(-10.0f64..10.0, 100..200)) {
            let m = marginal_mode(&v).unwrap();
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(m >= lo && m <= hi);
        }

        #[test]
        fn selection_metrics_permutation_invariant(
            pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60),
            rot in 0usize..60,
        ) {
            let (s, t): (Vec<bool>, Vec<bool>) = pairs.iter().cloned().unzip();
            let r = rot % s.len();
            let (mut s2, mut t2) = (s.clone(), t.clone());
            s2.rotate_left(r);
            t2.rotate_left(r);
            prop_assert_eq!(selection_metrics(&s, &t).unwrap(), selection_metrics(&s2, &t2).unwrap());
        }
    }
}
