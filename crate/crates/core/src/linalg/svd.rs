use super::eig::{symmetric_eig, EigOptions};
use super::matrix::{axpy, dot, norm2, DenseMatrix};
use super::norms::frobenius_norm;
use crate::error::{Error, Result};

/// Largest order accepted by [`svd_small`].
pub const SVD_SMALL_MAX: usize = 256;

/// `A = P · diag(singular) · Qᵀ` with singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub p: DenseMatrix,
    pub singular: Vec<f64>,
    pub q: DenseMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        let pd = DenseMatrix::from_fn(self.p.rows(), self.p.cols(), |i, j| {
            self.p[(i, j)] * self.singular[j]
        });
        pd.matmul_t(&self.q)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SvdOptions {
    pub eig: EigOptions,
    /// Singular values at or below `zero_tol · ‖A‖_F` are treated as exact zeros.
    pub zero_tol: f64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            eig: EigOptions::default(),
            zero_tol: 1e-14,
        }
    }
}

/// SVD of a small square matrix through the eigendecomposition of AᵀA.
///
/// Right vectors come from AᵀA; each left vector is `A q_i / ‖A q_i‖`, which
/// fixes its sign consistently with `q_i`. Columns belonging to zero singular
/// values are completed from the standard basis by Gram–Schmidt, so the
/// result is deterministic for rank-deficient input.
pub fn svd_small(a: &DenseMatrix, opts: SvdOptions) -> Result<Svd> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "svd_small needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let r = a.rows();
    if r > SVD_SMALL_MAX {
        return Err(Error::DimensionMismatch(format!(
            "svd_small handles order <= {SVD_SMALL_MAX}, got {r}"
        )));
    }
    let gram = a.t_matmul(a);
    let eig = symmetric_eig(&gram, opts.eig)?;
    let q = eig.vectors;
    let aq = a.matmul(&q);
    let scale = frobenius_norm(a);
    let zero = opts.zero_tol * scale;

    let mut sigma: Vec<f64> = aq.columns().map(norm2).collect();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]).then(x.cmp(&y)));
    let q = q.select_columns(&order);
    let aq = aq.select_columns(&order);
    sigma = order.iter().map(|&i| sigma[i]).collect();

    let mut p = DenseMatrix::zeros(r, r);
    let mut filled = 0;
    for j in 0..r {
        if sigma[j] <= zero || sigma[j] == 0.0 {
            break;
        }
        let mut v: Vec<f64> = aq.col(j).iter().map(|x| x / sigma[j]).collect();
        // clean up the small loss of orthogonality from forming AᵀA
        for k in 0..j {
            let h = dot(p.col(k), &v);
            axpy(-h, p.col(k), &mut v);
        }
        let n = norm2(&v);
        v.iter_mut().for_each(|x| *x /= n);
        p.col_mut(j).copy_from_slice(&v);
        filled += 1;
    }
    for s in &mut sigma[filled..] {
        *s = 0.0;
    }
    complete_basis(&mut p, filled);
    Ok(Svd {
        p,
        singular: sigma,
        q,
    })
}

/// Fills columns `filled..` of `p` with standard basis vectors orthogonalised
/// against the columns already present.
fn complete_basis(p: &mut DenseMatrix, mut filled: usize) {
    let r = p.rows();
    let mut axis = 0;
    while filled < r && axis < r {
        let mut v = vec![0.0; r];
        v[axis] = 1.0;
        for _pass in 0..2 {
            for k in 0..filled {
                let h = dot(p.col(k), &v);
                axpy(-h, p.col(k), &mut v);
            }
        }
        let n = norm2(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            p.col_mut(filled).copy_from_slice(&v);
            filled += 1;
        }
        axis += 1;
    }
}

/// Orthogonal factor R = P Qᵀ of the polar decomposition A = R H.
pub fn polar_orthonormal(a: &DenseMatrix) -> Result<DenseMatrix> {
    polar_orthonormal_with(a, SvdOptions::default())
}

pub fn polar_orthonormal_with(a: &DenseMatrix, opts: SvdOptions) -> Result<DenseMatrix> {
    let svd = svd_small(a, opts)?;
    Ok(svd.p.matmul_t(&svd.q))
}

/// Spectral norm of a small square matrix.
pub fn matrix_2norm(a: &DenseMatrix) -> Result<f64> {
    Ok(svd_small(a, SvdOptions::default())?.singular[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_svd() {
        let s = svd_small(&DenseMatrix::identity(3), SvdOptions::default()).unwrap();
        assert_eq!(s.singular, vec![1.0; 3]);
        assert!(s.p.max_abs_diff(&DenseMatrix::identity(3)) < 1e-15);
        assert!(s.q.max_abs_diff(&DenseMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn zero_singular_value_sorted_last() {
        let a = DenseMatrix::from_diagonal(&[0.0, 2.0]);
        let s = svd_small(&a, SvdOptions::default()).unwrap();
        assert_eq!(s.singular, vec![2.0, 0.0]);
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-15);
        assert!(s.p.orthonormality_error() < 1e-15);
        assert!(s.q.orthonormality_error() < 1e-15);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DenseMatrix::from_fn(5, 5, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let s = svd_small(&a, SvdOptions::default()).unwrap();
        assert!(s.reconstruct().max_abs_diff(&a) <= 1e-10 * frobenius_norm(&a));
        assert!(s.p.orthonormality_error() < 1e-12);
        assert!(s.q.orthonormality_error() < 1e-12);
        assert!(s.singular.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn polar_of_orthogonal_and_spd() {
        let (c, sn) = (0.3f64.cos(), 0.3f64.sin());
        let rot = DenseMatrix::from_rows(&[vec![c, -sn], vec![sn, c]]).unwrap();
        assert!(polar_orthonormal(&rot).unwrap().max_abs_diff(&rot) < 1e-14);
        let spd = DenseMatrix::from_diagonal(&[2.0, 3.0]);
        assert!(polar_orthonormal(&spd)
            .unwrap()
            .max_abs_diff(&DenseMatrix::identity(2))
            < 1e-14);
    }

    #[test]
    fn polar_of_rank_deficient_is_deterministic_and_orthogonal() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let r1 = polar_orthonormal(&a).unwrap();
        let r2 = polar_orthonormal(&a).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.orthonormality_error() < 1e-12);
        let zero = polar_orthonormal(&DenseMatrix::zeros(3, 3)).unwrap();
        assert!(zero.orthonormality_error() < 1e-15);
    }

    #[test]
    fn two_norm_of_diagonal() {
        let a = DenseMatrix::from_diagonal(&[-4.0, 1.0, 3.0]);
        assert!((matrix_2norm(&a).unwrap() - 4.0).abs() < 1e-14);
    }
}
