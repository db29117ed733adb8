//! Evaluation metrics for density estimates and classifiers.

use crate::error::{Error, Result};

/// Pearson correlation coefficient; `NaN` if either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::Empty("correlation needs at least two points"));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Trapezoid-rule integral of `values` sampled at increasing `xs`.
pub fn trapezoid(xs: &[f64], values: &[f64]) -> f64 {
    xs.windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}

/// Mean absolute error between `pdf` and `estimate` after rescaling the
/// estimate to the same integral over the grid `xs`.
pub fn normalized_mae(xs: &[f64], estimate: &[f64], pdf: &[f64]) -> Result<f64> {
    if xs.len() != estimate.len() || xs.len() != pdf.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: estimate.len().min(pdf.len()),
        });
    }
    let scale = trapezoid(xs, pdf) / trapezoid(xs, estimate);
    Ok(estimate.iter().zip(pdf).map(|(e, p)| (e * scale - p).abs()).sum::<f64>() / xs.len() as f64)
}

/// Confusion matrix, accuracy and per-class precision / recall.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationMetrics {
    /// `confusion[truth][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

impl ClassificationMetrics {
    pub fn compute(truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                found: predicted.len(),
            });
        }
        if truth.is_empty() {
            return Err(Error::Empty("labels"));
        }
        let classes = truth.iter().chain(predicted).max().map_or(0, |m| m + 1);
        let mut confusion = vec![vec![0usize; classes]; classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t][p] += 1;
        }
        let correct: usize = (0..classes).map(|c| confusion[c][c]).sum();
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = (0..classes)
            .map(|c| ratio(confusion[c][c], (0..classes).map(|t| confusion[t][c]).sum()))
            .collect();
        let recall = (0..classes)
            .map(|c| ratio(confusion[c][c], confusion[c].iter().sum()))
            .collect();
        Ok(ClassificationMetrics {
            accuracy: correct as f64 / truth.len() as f64,
            confusion,
            precision,
            recall,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_of_affine_map_is_one() {
        let a = [1.0, 2.0, 4.0, 8.0];
        let b: Vec<f64> = a.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((pearson(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let c: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((pearson(&a, &c).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_constant_classifiers() {
        let truth = [0, 1, 0, 1];
        let m = ClassificationMetrics::compute(&truth, &truth).unwrap();
        assert_eq!(m.accuracy, 1.0);
        let m = ClassificationMetrics::compute(&truth, &[1, 1, 1, 1]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.confusion, vec![vec![0, 2], vec![0, 2]]);
        assert_eq!(m.precision, vec![0.0, 0.5]);
        assert_eq!(m.recall, vec![0.0, 1.0]);
        for (row, count) in m.confusion.iter().zip([2, 2]) {
            assert_eq!(row.iter().sum::<usize>(), count);
        }
    }

    #[test]
    fn scaled_estimate_has_zero_mae() {
        let xs = [0.0, 1.0, 2.0];
        let pdf = [0.25, 0.5, 0.25];
        let est = [0.5, 1.0, 0.5];
        assert!(normalized_mae(&xs, &est, &pdf).unwrap() < 1e-15);
    }
}
