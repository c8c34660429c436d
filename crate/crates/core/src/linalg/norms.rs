use super::matrix::{DenseMatrix, WeightVector};

/// ‖A‖_F.
pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// ‖A‖_{F,ν} = sqrt(Σ ν_i A_ij²).
pub fn frobenius_norm_w(a: &DenseMatrix, nu: &WeightVector) -> f64 {
    assert_eq!(a.rows(), nu.len(), "weight length mismatch");
    a.columns()
        .map(|col| {
            col.iter()
                .zip(nu.as_slice())
                .map(|(v, w)| w * v * v)
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// ‖A‖_{1,1} = Σ |A_ij|.
pub fn l11_norm(a: &DenseMatrix) -> f64 {
    a.as_slice().iter().map(|v| v.abs()).sum()
}

/// ‖A‖_{1,1,ν} = Σ ν_i |A_ij|.
pub fn l11_norm_w(a: &DenseMatrix, nu: &WeightVector) -> f64 {
    assert_eq!(a.rows(), nu.len(), "weight length mismatch");
    a.columns()
        .map(|col| {
            col.iter()
                .zip(nu.as_slice())
                .map(|(v, w)| w * v.abs())
                .sum::<f64>()
        })
        .sum()
}

/// Number of entries that are not exactly zero.
pub fn l01_count(a: &DenseMatrix) -> usize {
    a.as_slice().iter().filter(|v| **v != 0.0).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frobenius_examples() {
        assert!((frobenius_norm(&DenseMatrix::identity(2)) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(frobenius_norm(&DenseMatrix::zeros(3, 2)), 0.0);
        let a = DenseMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        assert_eq!(frobenius_norm(&a), 5.0);
        let nu = WeightVector::new(vec![0.25]).unwrap();
        assert_eq!(frobenius_norm_w(&a, &nu), 2.5);
    }

    #[test]
    fn l11_and_count_examples() {
        let a = DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(l11_norm(&a), 6.0);
        assert_eq!(l01_count(&a), 3);
        let id = DenseMatrix::identity(5);
        assert_eq!(l11_norm(&id), 5.0);
        assert_eq!(l01_count(&id), 5);
        let b = DenseMatrix::from_rows(&[vec![1.0], vec![-2.0]]).unwrap();
        let nu = WeightVector::new(vec![2.0, 3.0]).unwrap();
        assert_eq!(l11_norm_w(&b, &nu), 8.0);
    }

    proptest! {
        #[test]
        fn frobenius_splits_over_columns(
            rows in 1usize..8,
            cols in 1usize..6,
            seed in proptest::collection::vec(-10.0f64..10.0, 48),
        ) {
            let a = DenseMatrix::from_fn(rows, cols, |i, j| seed[(i * cols + j) % seed.len()]);
            let by_cols: f64 = a.columns().map(|c| c.iter().map(|v| v * v).sum::<f64>()).sum();
            let f = frobenius_norm(&a);
            prop_assert!((f * f - by_cols).abs() <= 1e-10 * (1.0 + by_cols));
        }
    }
}
