//! Lloyd's k-means with k-means++ seeding, used as a hard-clustering
//! baseline on embedded rows.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const MAX_LLOYD_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    /// Cluster of each row, 0-based.
    pub labels: Vec<usize>,
    /// `k × dim` centroids.
    pub centroids: DenseMatrix,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Clusters the rows of `points`; the best of `restarts` runs wins.
pub fn kmeans_baseline(points: &DenseMatrix, k: usize, restarts: usize, seed: u64) -> Result<KMeans> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!("cannot form {k} clusters from {n} points")));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| points.row(i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeans> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(&rows, k, &mut rng);
        if best.as_ref().map_or(true, |b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn seed_plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centres = vec![rows[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| dist2(r, &centres[0])).collect();
    while centres.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // every point coincides with a centre already
            Err(_) => rng.gen_range(0..n),
        };
        centres.push(rows[next].clone());
        let c = centres.last().unwrap();
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(dist2(r, c));
        }
    }
    centres
}

fn lloyd(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> KMeans {
    let dim = rows[0].len();
    let mut centres = seed_plus_plus(rows, k, rng);
    let mut labels = vec![usize::MAX; rows.len()];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        for (l, r) in labels.iter_mut().zip(rows) {
            let mut best = 0;
            let mut bd = f64::INFINITY;
            for (c, centre) in centres.iter().enumerate() {
                let d = dist2(r, centre);
                if d < bd {
                    bd = d;
                    best = c;
                }
            }
            if *l != best {
                *l = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&l, r) in labels.iter().zip(rows) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(r) {
                *s += x;
            }
        }
        for c in 0..k {
            // an emptied cluster keeps its previous centre
            if counts[c] > 0 {
                centres[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = labels.iter().zip(rows).map(|(&l, r)| dist2(r, &centres[l])).sum();
    KMeans {
        labels,
        centroids: DenseMatrix::from_fn(k, dim, |c, d| centres[c][d]),
        inertia,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cluster_is_the_mean() {
        let pts = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, -1.0]]).unwrap();
        let km = kmeans_baseline(&pts, 1, 3, 0).unwrap();
        assert_eq!(km.labels, vec![0, 0, 0]);
        assert!((km.centroids[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((km.centroids[(0, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn separated_blobs_split_perfectly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts = DenseMatrix::from_fn(80, 2, |i, _| {
            let centre = if i < 40 { -10.0 } else { 10.0 };
            centre + rng.gen::<f64>() - 0.5
        });
        let km = kmeans_baseline(&pts, 2, 5, 1).unwrap();
        let first = km.labels[0];
        assert!(km.labels[..40].iter().all(|&l| l == first));
        assert!(km.labels[40..].iter().all(|&l| l != first));
    }

    #[test]
    fn too_many_clusters() {
        assert!(kmeans_baseline(&DenseMatrix::identity(2), 3, 1, 0).is_err());
    }
}
