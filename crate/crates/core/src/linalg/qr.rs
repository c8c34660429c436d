use super::matrix::{axpy, DenseMatrix, WeightVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct QrOptions {
    /// Rank-deficiency tolerance, relative to the largest input column norm.
    pub tol: f64,
}

impl Default for QrOptions {
    fn default() -> Self {
        Self { tol: 1e-10 }
    }
}

/// Orthonormalises the columns of `m` (modified Gram–Schmidt with one
/// reorthogonalisation pass). Column order is preserved, so the span of the
/// first `k` output columns equals the span of the first `k` inputs.
pub fn qr_orthonormalize(m: &DenseMatrix, opts: QrOptions) -> Result<DenseMatrix> {
    gram_schmidt(m, None, opts)
}

/// Same as [`qr_orthonormalize`] in the inner product ⟨v, w⟩_ν = Σ ν_i v_i w_i.
pub fn qr_orthonormalize_w(
    m: &DenseMatrix,
    nu: &WeightVector,
    opts: QrOptions,
) -> Result<DenseMatrix> {
    if nu.len() != m.rows() {
        return Err(Error::WeightMismatch {
            weights: nu.len(),
            rows: m.rows(),
        });
    }
    gram_schmidt(m, Some(nu.as_slice()), opts)
}

fn inner(a: &[f64], b: &[f64], w: Option<&[f64]>) -> f64 {
    match w {
        None => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        Some(w) => a
            .iter()
            .zip(b)
            .zip(w)
            .map(|((x, y), wi)| wi * x * y)
            .sum(),
    }
}

fn gram_schmidt(m: &DenseMatrix, w: Option<&[f64]>, opts: QrOptions) -> Result<DenseMatrix> {
    let (p, r) = m.shape();
    if r > p {
        return Err(Error::RankDeficient {
            column: p,
            pivot: 0.0,
            tol: opts.tol,
        });
    }
    let scale = m
        .columns()
        .map(|c| inner(c, c, w).sqrt())
        .fold(0.0, f64::max);
    let tol = opts.tol * scale;
    let mut q = m.clone();
    for j in 0..r {
        let mut v = q.col(j).to_vec();
        for _pass in 0..2 {
            for k in 0..j {
                let qk = q.col(k);
                let h = inner(qk, &v, w);
                axpy(-h, qk, &mut v);
            }
        }
        let nrm = inner(&v, &v, w).sqrt();
        if !(nrm > tol) {
            return Err(Error::RankDeficient {
                column: j,
                pivot: nrm,
                tol,
            });
        }
        for (dst, x) in q.col_mut(j).iter_mut().zip(&v) {
            *dst = x / nrm;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Orthogonal projector onto span(M) built with classical Gram–Schmidt.
    fn projector_oracle(m: &DenseMatrix) -> DenseMatrix {
        let (p, r) = m.shape();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for j in 0..r {
            let col = m.col(j);
            let mut v = col.to_vec();
            let coeffs: Vec<f64> = basis
                .iter()
                .map(|b| b.iter().zip(col).map(|(x, y)| x * y).sum())
                .collect();
            for (b, c) in basis.iter().zip(&coeffs) {
                for i in 0..p {
                    v[i] -= c * b[i];
                }
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            basis.push(v.iter().map(|x| x / n).collect());
        }
        DenseMatrix::from_fn(p, p, |i, k| basis.iter().map(|b| b[i] * b[k]).sum())
    }

    #[test]
    fn orthonormal_input_is_preserved() {
        let s = 0.5f64.sqrt();
        let q0 = DenseMatrix::from_rows(&[vec![s, s], vec![s, -s], vec![0.0, 0.0]]).unwrap();
        let q = qr_orthonormalize(&q0, QrOptions::default()).unwrap();
        assert!(q.orthonormality_error() < 1e-12);
        assert!(q.max_abs_diff(&q0) < 1e-15);
    }

    #[test]
    fn projector_matches_gram_schmidt_oracle() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let q = qr_orthonormalize(&m, QrOptions::default()).unwrap();
        assert!(q.orthonormality_error() < 1e-12);
        let pq = q.matmul_t(&q);
        assert!(pq.max_abs_diff(&projector_oracle(&m)) < 1e-12);
    }

    #[test]
    fn duplicate_columns_are_rank_deficient() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        assert!(matches!(
            qr_orthonormalize(&m, QrOptions::default()),
            Err(Error::RankDeficient { column: 1, .. })
        ));
    }

    #[test]
    fn weighted_orthonormality() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.3], vec![1.0, -0.7], vec![1.0, 2.0]]).unwrap();
        let nu = WeightVector::new(vec![0.5, 2.0, 1.5]).unwrap();
        let q = qr_orthonormalize_w(&m, &nu, QrOptions::default()).unwrap();
        let gram = q.t_matmul(&q.scale_rows(nu.as_slice()));
        assert!(gram.max_abs_diff(&DenseMatrix::identity(2)) < 1e-12);
    }
}
