//! Nearly decoupled Markov chains with known block structure.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ulam::normalize_transition;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eig, DenseMatrix, EigOptions};
use crate::seba::{EigenBasis, OperatorKind};

/// Weight of the uniform component inside each block.
const MIXING: f64 = 0.5;
/// Number of random permutations mixed into each block.
const PERMUTATIONS: usize = 3;

#[derive(Debug, Clone)]
pub struct BlockMarkovDemo {
    /// Row-stochastic transition matrix.
    pub transition: DenseMatrix,
    /// Block of each state, 1-based.
    pub labels: Vec<usize>,
    /// Singular values of the normalised operator, descending.
    pub singular_values: Vec<f64>,
    /// Leading `k` left singular vectors, `k` = number of blocks.
    pub basis: EigenBasis,
}

/// Builds a chain whose within-block dynamics are a random doubly
/// stochastic matrix (uniform mixing plus random permutations) and which
/// leaks mass `eps` uniformly to the states of other blocks.
pub fn block_markov_demo(sizes: &[usize], eps: f64, seed: u64) -> Result<BlockMarkovDemo> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidConfig("block sizes must be nonempty and positive".into()));
    }
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::InvalidConfig(format!("leak must lie in [0, 0.5), got {eps}")));
    }
    let n: usize = sizes.iter().sum();
    let k = sizes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = DenseMatrix::zeros(n, n);
    let mut labels = Vec::with_capacity(n);
    let mut start = 0;
    for (b, &nb) in sizes.iter().enumerate() {
        labels.extend(std::iter::repeat(b + 1).take(nb));
        let keep = if k == 1 { 1.0 } else { 1.0 - eps };
        let raw: Vec<f64> = (0..PERMUTATIONS).map(|_| rng.gen::<f64>() + 0.1).collect();
        let total: f64 = raw.iter().sum();
        for w in raw {
            let mut perm: Vec<usize> = (0..nb).collect();
            perm.shuffle(&mut rng);
            for (i, &j) in perm.iter().enumerate() {
                p[(start + i, start + j)] += keep * (1.0 - MIXING) * w / total;
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                p[(start + i, start + j)] += keep * MIXING / nb as f64;
            }
            if k > 1 {
                let leak = eps / (n - nb) as f64;
                for j in (0..n).filter(|j| !(start..start + nb).contains(j)) {
                    p[(start + i, j)] = leak;
                }
            }
        }
        start += nb;
    }

    let l = normalize_transition(&p);
    let eig = symmetric_eig(&l.matmul_t(&l), EigOptions::default())?;
    let singular_values: Vec<f64> = eig.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    let mut ev = singular_values[..k].to_vec();
    // the top singular value is one by construction; remove rounding so the
    // Markov convention holds exactly
    ev[0] = ev[0].min(1.0);
    let basis = EigenBasis::new(eig.vectors.leading_columns(k), OperatorKind::Markov, 1)?
        .with_eigenvalues(ev)?;
    Ok(BlockMarkovDemo {
        transition: p,
        labels,
        singular_values,
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_stochastic() {
        let d = block_markov_demo(&[5, 7, 3], 0.1, 4).unwrap();
        for i in 0..15 {
            let s: f64 = d.transition.row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(d.transition.as_slice().iter().all(|&v| v >= 0.0));
        assert!((d.singular_values[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_block_gives_constant_vector() {
        let d = block_markov_demo(&[12], 0.0, 1).unwrap();
        let c = 1.0 / 12f64.sqrt();
        assert!(d.basis.vectors().col(0).iter().all(|v| (v.abs() - c).abs() < 1e-10));
    }

    #[test]
    fn rejects_bad_leak() {
        assert!(block_markov_demo(&[3, 3], 0.5, 0).is_err());
        assert!(block_markov_demo(&[3, 0], 0.1, 0).is_err());
    }
}
