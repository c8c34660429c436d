//! Turning a sparse basis into hard feature labels.

mod cheeger;
mod contour;
mod grid;

pub use cheeger::{cheeger_threshold, cheeger_threshold_with, CheegerOptions, CheegerResult, LevelScore};
pub use contour::{extract_level, LevelSet, Polyline};
pub use grid::GridField;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// `H_μ(z) = z` if `|z| > μ`, else 0.
#[inline]
pub fn hard_threshold(z: f64, mu: f64) -> f64 {
    if z.abs() > mu {
        z
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMethod {
    PartitionUnity,
    DisjointSupport,
    MaxLikelihood,
    Manual(f64),
    Cheeger,
}

impl ThresholdMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdMethod::PartitionUnity => "partition_unity",
            ThresholdMethod::DisjointSupport => "disjoint_support",
            ThresholdMethod::MaxLikelihood => "max_likelihood",
            ThresholdMethod::Manual(_) => "manual",
            ThresholdMethod::Cheeger => "cheeger",
        }
    }
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMethod::PartitionUnity => f.write_str("partition-unity"),
            ThresholdMethod::DisjointSupport => f.write_str("disjoint"),
            ThresholdMethod::MaxLikelihood => f.write_str("maxlike"),
            ThresholdMethod::Manual(t) => write!(f, "manual:{t}"),
            ThresholdMethod::Cheeger => f.write_str("cheeger"),
        }
    }
}

impl FromStr for ThresholdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(t) = s.strip_prefix("manual:") {
            let tau: f64 = t
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad manual threshold '{t}'")))?;
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(Error::InvalidConfig(format!("manual threshold must be >= 0, got {tau}")));
            }
            return Ok(ThresholdMethod::Manual(tau));
        }
        match s {
            "partition-unity" | "partition_unity" | "pu" => Ok(ThresholdMethod::PartitionUnity),
            "disjoint" | "disjoint_support" | "dp" => Ok(ThresholdMethod::DisjointSupport),
            "maxlike" | "max_likelihood" => Ok(ThresholdMethod::MaxLikelihood),
            "cheeger" => Ok(ThresholdMethod::Cheeger),
            other => Err(Error::InvalidConfig(format!(
                "unknown method '{other}' (expected partition-unity, disjoint, maxlike, manual:<tau> or cheeger)"
            ))),
        }
    }
}

/// Hard labels `a_i ∈ {0, …, r}` (0 = unassigned) and the thresholded matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureAssignment {
    pub labels: Vec<usize>,
    pub thresholded: DenseMatrix,
    /// Threshold applied to each column (all equal except for Cheeger).
    pub taus: Vec<f64>,
    pub method: ThresholdMethod,
}

impl FeatureAssignment {
    /// Number of rows carrying label `j` (1-based).
    pub fn count(&self, j: usize) -> usize {
        self.labels.iter().filter(|&&a| a == j).count()
    }
}

fn clamp_nonnegative(s: &DenseMatrix) -> DenseMatrix {
    s.map(|x| x.max(0.0))
}

/// Row `i` of `s` sorted descending.
fn sorted_row(s: &DenseMatrix, i: usize) -> Vec<f64> {
    let mut row = s.row(i);
    row.sort_by(|a, b| b.total_cmp(a));
    row
}

/// 1-based column of the largest positive entry of each row, ties to the
/// smallest column; 0 when no entry is positive.
pub fn argmax_labels(s: &DenseMatrix) -> Vec<usize> {
    (0..s.rows())
        .map(|i| {
            let mut best = 0;
            let mut top = 0.0;
            for j in 0..s.cols() {
                let v = s[(i, j)];
                if v > top {
                    top = v;
                    best = j + 1;
                }
            }
            best
        })
        .collect()
}

/// Applies `H_τ` to the clamped matrix and assigns by argmax.
fn threshold_and_assign(clamped: DenseMatrix, tau: f64, method: ThresholdMethod) -> FeatureAssignment {
    let r = clamped.cols();
    let thresholded = clamped.map(|x| hard_threshold(x, tau));
    FeatureAssignment {
        labels: argmax_labels(&thresholded),
        thresholded,
        taus: vec![tau; r],
        method,
    }
}

/// Smallest global threshold after which every row sums to at most one.
pub fn partition_unity_tau(s: &DenseMatrix) -> f64 {
    let clamped = clamp_nonnegative(s);
    let mut tau: f64 = 0.0;
    for i in 0..clamped.rows() {
        let mut cum = 0.0;
        for v in sorted_row(&clamped, i) {
            cum += v;
            if cum > 1.0 {
                tau = tau.max(v);
            }
        }
    }
    tau
}

/// Largest second-largest row value of the clamped matrix.
pub fn disjoint_support_tau(s: &DenseMatrix) -> f64 {
    if s.cols() < 2 {
        return 0.0;
    }
    let clamped = clamp_nonnegative(s);
    (0..clamped.rows())
        .map(|i| sorted_row(&clamped, i)[1])
        .fold(0.0, f64::max)
}

/// Thresholds so the features form a sub-partition of unity.
pub fn partition_unity(s: &DenseMatrix) -> FeatureAssignment {
    let tau = partition_unity_tau(s);
    threshold_and_assign(clamp_nonnegative(s), tau, ThresholdMethod::PartitionUnity)
}

/// Thresholds so the features have disjoint supports.
pub fn disjoint_support(s: &DenseMatrix) -> FeatureAssignment {
    let tau = disjoint_support_tau(s);
    threshold_and_assign(clamp_nonnegative(s), tau, ThresholdMethod::DisjointSupport)
}

/// Labels by the largest positive entry, without thresholding.
pub fn max_likelihood(s: &DenseMatrix) -> FeatureAssignment {
    FeatureAssignment {
        labels: argmax_labels(s),
        thresholded: s.clone(),
        taus: vec![0.0; s.cols()],
        method: ThresholdMethod::MaxLikelihood,
    }
}

/// Clamps, applies a caller-chosen `H_τ` and assigns by argmax.
pub fn manual(s: &DenseMatrix, tau: f64) -> Result<FeatureAssignment> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::InvalidConfig(format!("threshold must be >= 0, got {tau}")));
    }
    Ok(threshold_and_assign(clamp_nonnegative(s), tau, ThresholdMethod::Manual(tau)))
}

/// Per-column thresholds (e.g. from Cheeger sweeps) applied to the clamped
/// matrix.
pub fn per_column(s: &DenseMatrix, taus: &[f64]) -> Result<FeatureAssignment> {
    if taus.len() != s.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} thresholds for {} columns",
            taus.len(),
            s.cols()
        )));
    }
    let mut thresholded = clamp_nonnegative(s);
    for (j, &tau) in taus.iter().enumerate() {
        thresholded.col_mut(j).iter_mut().for_each(|x| *x = hard_threshold(*x, tau));
    }
    Ok(FeatureAssignment {
        labels: argmax_labels(&thresholded),
        thresholded,
        taus: taus.to_vec(),
        method: ThresholdMethod::Cheeger,
    })
}

/// `min(1, Σ_j max(S_ij, 0))`: how strongly each row belongs to some feature.
pub fn superposition(s: &DenseMatrix) -> Vec<f64> {
    (0..s.rows())
        .map(|i| s.row(i).iter().map(|x| x.max(0.0)).sum::<f64>().min(1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_row(v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_rows(&[v.to_vec()]).unwrap()
    }

    #[test]
    fn hard_threshold_examples() {
        assert_eq!(hard_threshold(0.5, 0.5), 0.0);
        assert_eq!(hard_threshold(0.6, 0.5), 0.6);
        assert_eq!(hard_threshold(-0.1, 0.0), -0.1);
    }

    #[test]
    fn single_row_traces() {
        let s = one_row(&[0.7, 0.6]);
        let pu = partition_unity(&s);
        assert_eq!(pu.taus[0], 0.6);
        assert_eq!(pu.thresholded.row(0), vec![0.7, 0.0]);
        assert_eq!(pu.labels, vec![1]);
        let dp = disjoint_support(&s);
        assert_eq!(dp.taus[0], 0.6);
        assert_eq!(dp.thresholded.row(0), vec![0.7, 0.0]);
    }

    #[test]
    fn no_overlap_means_no_threshold() {
        let s = DenseMatrix::from_rows(&[vec![0.4, 0.5], vec![-0.1, 1.0], vec![0.0, 0.0]]).unwrap();
        let pu = partition_unity(&s);
        assert_eq!(pu.taus[0], 0.0);
        assert_eq!(pu.thresholded, s.map(|x| x.max(0.0)));
        assert_eq!(pu.labels, vec![2, 2, 0]);
    }

    #[test]
    fn disjoint_input_is_unchanged() {
        let s = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.3], vec![0.2, 0.0]]).unwrap();
        let dp = disjoint_support(&s);
        assert_eq!(dp.taus[0], 0.0);
        assert_eq!(dp.thresholded, s);
    }

    #[test]
    fn max_likelihood_rows() {
        let s = DenseMatrix::from_rows(&[vec![0.2, 0.9], vec![-0.2, 0.0], vec![0.5, 0.5]]).unwrap();
        assert_eq!(max_likelihood(&s).labels, vec![2, 0, 1]);
    }

    #[test]
    fn superposition_rows() {
        let s = DenseMatrix::from_rows(&[vec![0.8, 0.8], vec![-0.3, 0.4]]).unwrap();
        assert_eq!(superposition(&s), vec![1.0, 0.4]);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("manual:0.25".parse::<ThresholdMethod>().unwrap(), ThresholdMethod::Manual(0.25));
        assert_eq!("disjoint".parse::<ThresholdMethod>().unwrap(), ThresholdMethod::DisjointSupport);
        assert!("manual:-1".parse::<ThresholdMethod>().is_err());
        assert!("median".parse::<ThresholdMethod>().is_err());
        for m in [
            ThresholdMethod::PartitionUnity,
            ThresholdMethod::DisjointSupport,
            ThresholdMethod::MaxLikelihood,
            ThresholdMethod::Manual(0.5),
            ThresholdMethod::Cheeger,
        ] {
            assert_eq!(m.to_string().parse::<ThresholdMethod>().unwrap(), m);
        }
    }

    #[test]
    fn manual_threshold() {
        let s = one_row(&[0.3, 0.6, -0.9]);
        let fa = manual(&s, 0.4).unwrap();
        assert_eq!(fa.thresholded.row(0), vec![0.0, 0.6, 0.0]);
        assert_eq!(fa.labels, vec![2]);
    }
}
