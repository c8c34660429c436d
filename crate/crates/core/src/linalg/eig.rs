//! Symmetric eigensolvers.
//!
//! [`symmetric_eig`] is a cyclic Jacobi solver for dense matrices of moderate
//! size. [`symmetric_eig_leading`] extracts only the leading eigenpairs of a
//! positive semidefinite operator by block subspace iteration, with the
//! Rayleigh–Ritz projections solved by Jacobi; it is what the transfer
//! operator demos use once the box count reaches the thousands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{axpy, dot, norm2, DenseMatrix};
use super::norms::frobenius_norm;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct EigOptions {
    /// Maximum number of full Jacobi sweeps.
    pub max_sweeps: usize,
    /// Stop once the off-diagonal Frobenius mass falls below `tol · ‖A‖_F`.
    pub tol: f64,
    /// Allowed relative asymmetry ‖A − Aᵀ‖_F / ‖A‖_F.
    pub symmetry_tol: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 60,
            tol: 1e-15,
            symmetry_tol: 1e-10,
        }
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Relative asymmetry ‖A − Aᵀ‖_F / ‖A‖_F (zero for the zero matrix).
pub fn asymmetry(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut diff = 0.0;
    for j in 0..n {
        for i in 0..j {
            let d = a[(i, j)] - a[(j, i)];
            diff += 2.0 * d * d;
        }
    }
    let nrm = frobenius_norm(a);
    if nrm == 0.0 {
        0.0
    } else {
        diff.sqrt() / nrm
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
pub fn symmetric_eig(a: &DenseMatrix, opts: EigOptions) -> Result<SymmetricEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "symmetric_eig needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = asymmetry(a);
    if asym >= opts.symmetry_tol {
        return Err(Error::NotSymmetric(asym));
    }
    let n = a.rows();
    // symmetrise so rounding in the input cannot bias the rotations
    let mut m = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = DenseMatrix::identity(n);
    let scale = frobenius_norm(&m);
    if scale == 0.0 || n == 1 {
        return Ok(sorted(m, v));
    }
    let target = opts.tol * scale;

    let mut converged = false;
    for sweep in 0..opts.max_sweeps {
        let off = off_diagonal_norm(&m);
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // negligible relative to both diagonal entries: drop it
                if sweep > 3 && app.abs() + 1e2 * apq.abs() == app.abs()
                    && aqq.abs() + 1e2 * apq.abs() == aqq.abs()
                {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > target {
        return Err(Error::NoConvergence("Jacobi eigensolver"));
    }
    Ok(sorted(m, v))
}

fn off_diagonal_norm(m: &DenseMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for j in 0..n {
        let col = m.col(j);
        for (i, x) in col.iter().enumerate() {
            if i != j {
                s += x * x;
            }
        }
    }
    s.sqrt()
}

fn rotate(m: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let n = m.rows();
    let apq = m[(p, q)];
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        let np = c * akp - s * akq;
        let nq = s * akp + c * akq;
        m[(k, p)] = np;
        m[(p, k)] = np;
        m[(k, q)] = nq;
        m[(q, k)] = nq;
    }
    m[(p, p)] = app - t * apq;
    m[(q, q)] = aqq + t * apq;
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn sorted(m: DenseMatrix, v: DenseMatrix) -> SymmetricEigen {
    let n = m.rows();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[b].total_cmp(&diag[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = v.select_columns(&order);
    for j in 0..n {
        fix_sign(vectors.col_mut(j));
    }
    SymmetricEigen { values, vectors }
}

/// Flips `x` so its largest-magnitude entry (first one on ties) is positive.
pub(crate) fn fix_sign(x: &mut [f64]) {
    let mut best = 0usize;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if x[best] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LeadingEigOptions {
    /// Extra block columns beyond the requested count.
    pub oversample: usize,
    pub max_iter: usize,
    /// Converged once every requested Ritz residual is below `tol · θ₁`.
    pub tol: f64,
    /// Seed of the deterministic starting block.
    pub seed: u64,
}

impl Default for LeadingEigOptions {
    fn default() -> Self {
        Self {
            oversample: 12,
            max_iter: 20_000,
            tol: 1e-10,
            seed: 0x5EBA,
        }
    }
}

/// Leading `k` eigenpairs of the symmetric positive semidefinite operator
/// `apply` (acting on blocks of column vectors of length `n`).
pub fn symmetric_eig_leading<F>(
    n: usize,
    k: usize,
    apply: F,
    opts: LeadingEigOptions,
) -> Result<SymmetricEigen>
where
    F: Fn(&DenseMatrix) -> DenseMatrix,
{
    assert!(k >= 1 && k <= n, "requested {k} eigenpairs of a size-{n} operator");
    let b = (k + opts.oversample).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DenseMatrix::from_fn(n, b, |_, _| rng.gen::<f64>() - 0.5);
    orthonormalize_in_place(&mut x);

    for iter in 0..opts.max_iter {
        let y = apply(&x);
        if iter % 5 == 4 || iter + 1 == opts.max_iter {
            // Rayleigh–Ritz on the current block
            let h = x.t_matmul(&y);
            let h = DenseMatrix::from_fn(b, b, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]));
            let small = symmetric_eig(&h, EigOptions::default())?;
            let ritz = x.matmul(&small.vectors);
            let ay = y.matmul(&small.vectors);
            let lead = small.values[0].abs().max(f64::MIN_POSITIVE);
            let worst = (0..k)
                .map(|i| {
                    let mut r = ay.col(i).to_vec();
                    axpy(-small.values[i], ritz.col(i), &mut r);
                    norm2(&r)
                })
                .fold(0.0, f64::max);
            if worst <= opts.tol * lead {
                let mut vectors = ritz.leading_columns(k);
                for j in 0..k {
                    fix_sign(vectors.col_mut(j));
                }
                return Ok(SymmetricEigen {
                    values: small.values[..k].to_vec(),
                    vectors,
                });
            }
            x = ay;
        } else {
            x = y;
        }
        orthonormalize_in_place(&mut x);
    }
    Err(Error::NoConvergence("subspace iteration"))
}

fn orthonormalize_in_place(x: &mut DenseMatrix) {
    let b = x.cols();
    for j in 0..b {
        let mut v = x.col(j).to_vec();
        for _pass in 0..2 {
            for k in 0..j {
                let h = dot(x.col(k), &v);
                axpy(-h, x.col(k), &mut v);
            }
        }
        let nrm = norm2(&v);
        if nrm > 0.0 {
            v.iter_mut().for_each(|e| *e /= nrm);
        } else {
            // collapsed direction: replace with a unit axis orthogonal to the rest
            v.iter_mut().for_each(|e| *e = 0.0);
            let n = v.len();
            v[j % n] = 1.0;
        }
        x.col_mut(j).copy_from_slice(&v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &DenseMatrix, e: &SymmetricEigen) -> f64 {
        let av = a.matmul(&e.vectors);
        (0..e.values.len())
            .map(|i| {
                let mut r = av.col(i).to_vec();
                axpy(-e.values[i], e.vectors.col(i), &mut r);
                norm2(&r)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_input_sorts_descending() {
        let a = DenseMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let e = symmetric_eig(&a, EigOptions::default()).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert!((e.vectors[(0, 0)].abs() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(2, 1)].abs() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(1, 2)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eig(&a, EigOptions::default()).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let s = 0.5f64.sqrt();
        assert!((e.vectors[(0, 0)].abs() - s).abs() < 1e-14);
        assert!((e.vectors[(0, 0)] - e.vectors[(1, 0)]).abs() < 1e-14);
        assert!((e.vectors[(0, 1)] + e.vectors[(1, 1)]).abs() < 1e-14);
    }

    #[test]
    fn random_symmetric_self_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = DenseMatrix::from_fn(50, 50, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let a = b.add(&b.transpose());
        let e = symmetric_eig(&a, EigOptions::default()).unwrap();
        assert!(residual(&a, &e) <= 1e-9 * frobenius_norm(&a));
        assert!(e.vectors.orthonormality_error() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rejects_asymmetric_input() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            symmetric_eig(&a, EigOptions::default()),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn sweep_cap_reports_no_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = DenseMatrix::from_fn(20, 20, |_, _| rng.gen::<f64>());
        let a = b.add(&b.transpose());
        let opts = EigOptions {
            max_sweeps: 1,
            ..EigOptions::default()
        };
        assert!(matches!(symmetric_eig(&a, opts), Err(Error::NoConvergence(_))));
    }

    #[test]
    fn leading_pairs_match_full_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = DenseMatrix::from_fn(80, 80, |_, _| rng.gen::<f64>() - 0.5);
        let a = b.t_matmul(&b);
        let full = symmetric_eig(&a, EigOptions::default()).unwrap();
        let lead =
            symmetric_eig_leading(80, 6, |x| a.matmul(x), LeadingEigOptions::default()).unwrap();
        for i in 0..6 {
            assert!((full.values[i] - lead.values[i]).abs() < 1e-8 * full.values[0]);
            let overlap = dot(full.vectors.col(i), lead.vectors.col(i)).abs();
            assert!((overlap - 1.0).abs() < 1e-6, "eigvec {i} overlap {overlap}");
        }
    }
}
