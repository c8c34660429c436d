//! Choosing how many vectors to keep (r) and how many features to trust (k).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seba::{seba, EigenBasis, OperatorKind, SebaConfig, SparseBasis};

/// Eigenvalues divided by their Weyl growth rate, plus the ranked drops
/// between consecutive `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledSpectrum {
    pub kind: OperatorKind,
    pub d: usize,
    /// `(r, rescaled value)` with `r` counted from 1.
    pub values: Vec<(usize, f64)>,
    /// `(r, value(r) − value(r+1))`, largest first; ties keep the smaller `r`
    /// first.
    pub drops: Vec<(usize, f64)>,
    pub warnings: Vec<String>,
}

impl RescaledSpectrum {
    /// Drops that are clearly positive, i.e. above `rel_tol · max |value|`.
    pub fn significant_drops(&self, rel_tol: f64) -> Vec<(usize, f64)> {
        let scale = self.values.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        self.drops
            .iter()
            .copied()
            .filter(|&(_, d)| d > rel_tol * scale)
            .collect()
    }
}

/// Tolerance on the leading eigenvalue's convention.
const KIND_TOL: f64 = 1e-6;

pub fn weyl_rescale(eigenvalues: &[f64], kind: OperatorKind, d: usize) -> Result<RescaledSpectrum> {
    if d == 0 {
        return Err(Error::InvalidConfig("manifold dimension must be >= 1".into()));
    }
    let Some(&lead) = eigenvalues.first() else {
        return Err(Error::InvalidConfig("no eigenvalues given".into()));
    };
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("non-finite eigenvalue".into()));
    }
    let mismatch = match kind {
        OperatorKind::Markov => (lead - 1.0).abs() > KIND_TOL,
        OperatorKind::LaplaceNeumann => lead.abs() > KIND_TOL,
        OperatorKind::LaplaceDirichlet => lead >= 0.0,
    };
    if mismatch {
        return Err(Error::KindMismatch {
            kind: kind.as_str(),
            leading: lead,
        });
    }

    let expo = 2.0 / d as f64;
    let mut values = Vec::new();
    let mut warnings = Vec::new();
    for (idx, &lam) in eigenvalues.iter().enumerate() {
        let r = idx + 1;
        match kind {
            OperatorKind::LaplaceNeumann if r >= 2 => {
                values.push((r, lam / ((r - 1) as f64).powf(expo)));
            }
            OperatorKind::LaplaceDirichlet => {
                values.push((r, lam / (r as f64).powf(expo)));
            }
            OperatorKind::Markov if r >= 2 => {
                if lam <= 0.0 {
                    warnings.push(format!("skipping nonpositive eigenvalue {lam} at r = {r}"));
                } else {
                    values.push((r, lam.ln() / ((r - 1) as f64).powf(expo)));
                }
            }
            _ => {}
        }
    }

    let mut drops: Vec<(usize, f64)> = values
        .windows(2)
        .filter(|w| w[1].0 == w[0].0 + 1)
        .map(|w| (w[0].0, w[0].1 - w[1].1))
        .collect();
    drops.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    Ok(RescaledSpectrum {
        kind,
        d,
        values,
        drops,
        warnings,
    })
}

/// Column minima and the cumulative minimum value `Σ_j max(−m_j, 0)`.
///
/// Columns with a strictly positive minimum contribute nothing, which keeps the
/// quantity a sum of nonnegative terms.
pub fn min_value_profile(s: &SparseBasis) -> (Vec<f64>, f64) {
    let m = s.minima.clone();
    let total = cumulative_min_value(&m, m.len());
    (m, total)
}

/// `Σ_{j<k} max(−m_j, 0)` over already sorted minima.
pub fn cumulative_min_value(minima: &[f64], k: usize) -> f64 {
    minima[..k].iter().map(|m| (-m).max(0.0)).sum()
}

/// Minimum-value table over `2 ≤ r ≤ r_max`, `1 ≤ k ≤ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub r_max: usize,
    /// `rows[i]` holds `(r, [Min(S^(r), k) for k = 1..=r])`, ascending `r`;
    /// values of `r` whose run failed are absent.
    pub rows: Vec<(usize, Vec<f64>)>,
    /// `(k, r_min(k))` for every `k` that has at least one candidate `r`.
    pub optimal_pairs: Vec<(usize, usize)>,
    pub warnings: Vec<String>,
}

impl ScanTable {
    pub fn minval(&self, r: usize, k: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|(rr, _)| *rr == r)
            .and_then(|(_, v)| v.get(k.checked_sub(1)?).copied())
    }

    pub fn r_min(&self, k: usize) -> Option<usize> {
        self.optimal_pairs
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|&(_, r)| r)
    }

    /// Builds the table from per-`r` rows, computing `r_min`.
    pub fn from_rows(r_max: usize, mut rows: Vec<(usize, Vec<f64>)>, warnings: Vec<String>) -> Self {
        rows.sort_by_key(|(r, _)| *r);
        let mut optimal_pairs = Vec::new();
        for k in 1..=r_max {
            let mut best: Option<(usize, f64)> = None;
            for (r, vals) in &rows {
                if *r < k {
                    continue;
                }
                let v = vals[k - 1];
                // strict comparison keeps the smallest r on ties
                if best.map_or(true, |(_, b)| v < b) {
                    best = Some((*r, v));
                }
            }
            if let Some((r, _)) = best {
                optimal_pairs.push((k, r));
            }
        }
        Self {
            r_max,
            rows,
            optimal_pairs,
            warnings,
        }
    }
}

/// Runs the sparse-basis iteration on the first `r` vectors for every
/// `2 ≤ r ≤ r_max` (in parallel) and tabulates the cumulative minimum values.
pub fn scan(basis: &EigenBasis, r_max: usize, cfg: &SebaConfig) -> Result<ScanTable> {
    if r_max < 2 {
        return Err(Error::InvalidConfig(format!("r_max must be >= 2, got {r_max}")));
    }
    if r_max > basis.len() {
        return Err(Error::InvalidConfig(format!(
            "r_max = {r_max} exceeds the {} available vectors",
            basis.len()
        )));
    }
    let results: Vec<(usize, Result<SparseBasis>)> = (2..=r_max)
        .into_par_iter()
        .map(|r| (r, basis.leading(r).and_then(|b| seba(&b, cfg))))
        .collect();

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (r, res) in results {
        match res {
            Ok(s) => {
                if !s.converged {
                    warnings.push(format!("r = {r}: not converged after {} iterations", s.iterations));
                }
                let vals = (1..=r).map(|k| cumulative_min_value(&s.minima, k)).collect();
                rows.push((r, vals));
            }
            Err(e) => warnings.push(format!("r = {r}: {e}")),
        }
    }
    Ok(ScanTable::from_rows(r_max, rows, warnings))
}

/// Recommended `(k, r)` pairs: one per maximal run of consecutive `k` sharing
/// the same `r_min`, taking the smallest `k` of the run. Sorted by `r`.
pub fn select_kr(table: &ScanTable) -> Result<Vec<(usize, usize)>> {
    if table.optimal_pairs.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut picks: Vec<(usize, usize)> = Vec::new();
    let mut prev: Option<(usize, usize)> = None;
    for &(k, r) in &table.optimal_pairs {
        let continues = matches!(prev, Some((pk, pr)) if pk + 1 == k && pr == r);
        if !continues {
            picks.push((k, r));
        }
        prev = Some((k, r));
    }
    picks.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(picks)
}
