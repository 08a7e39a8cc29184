//! PSNR and classification metrics.

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::synth::{Frame, NoiseLevel, Plane};
use crate::tensor::{Scalar, Tensor};

/// Peak signal-to-noise ratio, or `Identical` when the mean squared error is
/// zero and the ratio is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Identical,
    Db(f64),
}

impl Psnr {
    pub fn db(self) -> Option<f64> {
        match self {
            Psnr::Identical => None,
            Psnr::Db(v) => Some(v),
        }
    }

    fn from_mse(mse: f64, max_value: f64) -> Self {
        if mse == 0.0 {
            Psnr::Identical
        } else {
            Psnr::Db(10.0 * (max_value * max_value / mse).log10())
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Identical => f.write_str("identical"),
            Psnr::Db(v) => write!(f, "{v:.4} dB"),
        }
    }
}

fn check_max(max_value: f64) -> Result<()> {
    if max_value > 0.0 && max_value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("max value {max_value} must be positive")))
    }
}

/// PSNR over two equally sized sample sequences.
pub fn psnr_samples<A: Copy + Into<f64>>(a: &[A], b: &[A], max_value: f64) -> Result<Psnr> {
    check_max(max_value)?;
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::shape(&[a.len()], &[b.len()]));
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x.into() - y.into();
            d * d
        })
        .sum();
    Ok(Psnr::from_mse(sum / a.len() as f64, max_value))
}

/// PSNR with one MSE over all three planes of both frames.
pub fn psnr_frames(a: &Frame, b: &Frame, max_value: f64) -> Result<Psnr> {
    check_max(max_value)?;
    if !a.same_dimensions(b) {
        return Err(Error::shape(&[a.height(), a.width()], &[b.height(), b.width()]));
    }
    // integer accumulation keeps uniform-difference cases exact
    let mut sum: u64 = 0;
    for p in Plane::ALL {
        for (&x, &y) in a.plane(p).iter().zip(b.plane(p)) {
            let d = u64::from(x.abs_diff(y));
            sum += d * d;
        }
    }
    let n = 3 * a.width() * a.height();
    Ok(Psnr::from_mse(sum as f64 / n as f64, max_value))
}

pub fn psnr_tensors<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>, max_value: f64) -> Result<Psnr> {
    a.ensure_shape(b.shape())?;
    let a: Vec<f64> = a.data().iter().map(|v| v.as_f64()).collect();
    let b: Vec<f64> = b.data().iter().map(|v| v.as_f64()).collect();
    psnr_samples(&a, &b, max_value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of samples whose true class is this one.
    pub support: u64,
    /// Set when the class occurs in neither predictions nor truths; the
    /// metrics are then reported as 0.
    pub absent: bool,
}

/// Confusion matrix (rows = true level, columns = predicted) and derived
/// per-class metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub confusion: [[u64; 5]; 5],
    pub classes: [ClassMetrics; 5],
    pub accuracy: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn classification_report(predictions: &[NoiseLevel], truths: &[NoiseLevel]) -> Result<MetricsReport> {
    if predictions.is_empty() || predictions.len() != truths.len() {
        return Err(Error::InvalidArgument(format!(
            "need equal, non-empty prediction and truth lists (got {} and {})",
            predictions.len(),
            truths.len()
        )));
    }
    let mut confusion = [[0u64; 5]; 5];
    for (p, t) in predictions.iter().zip(truths) {
        confusion[t.index()][p.index()] += 1;
    }
    Ok(MetricsReport::from_confusion(confusion))
}

impl MetricsReport {
    pub fn from_confusion(confusion: [[u64; 5]; 5]) -> Self {
        let classes = std::array::from_fn(|k| {
            let correct = confusion[k][k];
            let row: u64 = confusion[k].iter().sum();
            let col: u64 = confusion.iter().map(|r| r[k]).sum();
            let precision = ratio(correct, col);
            let recall = ratio(correct, row);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support: row,
                absent: row == 0 && col == 0,
            }
        });
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..5).map(|k| confusion[k][k]).sum();
        Self {
            confusion,
            classes,
            accuracy: ratio(trace, total),
        }
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn class(&self, level: NoiseLevel) -> &ClassMetrics {
        &self.classes[level.index()]
    }

    pub fn macro_precision(&self) -> f64 {
        self.classes.iter().map(|c| c.precision).sum::<f64>() / 5.0
    }

    pub fn macro_recall(&self) -> f64 {
        self.classes.iter().map(|c| c.recall).sum::<f64>() / 5.0
    }

    pub fn macro_f1(&self) -> f64 {
        self.classes.iter().map(|c| c.f1).sum::<f64>() / 5.0
    }

    /// Plain-text table with Precision / Recall / F1-Score columns and an
    /// accuracy footer, followed by the confusion matrix.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<10}{:>11}{:>8}{:>10}{:>9}", "Category", "Precision", "Recall", "F1-Score", "Support");
        for (k, c) in self.classes.iter().enumerate() {
            let _ = write!(
                out,
                "{:<10}{:>11.2}{:>8.2}{:>10.2}{:>9}",
                format!("Level {}", k + 1),
                c.precision,
                c.recall,
                c.f1,
                c.support
            );
            if c.absent {
                out.push_str("  (absent)");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "{:<10}{:>29.2}{:>9}", "Accuracy", self.accuracy, self.total());
        out.push('\n');
        out.push_str("Confusion matrix (rows: true level, columns: predicted level)\n");
        let _ = write!(out, "{:<10}", "");
        for k in 1..=5 {
            let _ = write!(out, "{:>7}", format!("L{k}"));
        }
        out.push('\n');
        for (k, row) in self.confusion.iter().enumerate() {
            let _ = write!(out, "{:<10}", format!("L{}", k + 1));
            for v in row {
                let _ = write!(out, "{v:>7}");
            }
            out.push('\n');
        }
        out
    }

    /// Comma-separated per-class metrics plus an accuracy row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,precision,recall,f1,support,absent\n");
        for (k, c) in self.classes.iter().enumerate() {
            let _ = writeln!(
                out,
                "level{},{:.6},{:.6},{:.6},{},{}",
                k + 1,
                c.precision,
                c.recall,
                c.f1,
                c.support,
                c.absent
            );
        }
        let _ = writeln!(out, "accuracy,,,{:.6},{},", self.accuracy, self.total());
        out
    }

    /// Confusion matrix as a comma-separated grid with a header row.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true\\pred,L1,L2,L3,L4,L5\n");
        for (k, row) in self.confusion.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "L{},{}", k + 1, cells.join(","));
        }
        out
    }
}
