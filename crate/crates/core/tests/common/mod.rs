#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seba_core::linalg::{qr_orthonormalize, DenseMatrix, QrOptions};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; u1 is kept away from zero
    let u1: f64 = rng.gen_range(1e-300..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_orthonormal(p: usize, r: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    qr_orthonormalize(&random_matrix(p, r, rng), QrOptions::default()).expect("random matrix has full rank")
}

/// Random orthogonal matrix with determinant +1.
pub fn random_rotation(r: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut q = random_orthonormal(r, r, rng);
    if determinant(&q) < 0.0 {
        for x in q.col_mut(0) {
            *x = -*x;
        }
    }
    q
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i)).collect();
    let mut det = 1.0;
    for k in 0..n {
        let piv = (k..n).max_by(|&x, &y| m[x][k].abs().total_cmp(&m[y][k].abs())).unwrap();
        if m[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            m.swap(piv, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn inverse(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i);
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for k in 0..n {
        let piv = (k..n).max_by(|&x, &y| m[x][k].abs().total_cmp(&m[y][k].abs())).unwrap();
        m.swap(piv, k);
        let d = m[k][k];
        m[k].iter_mut().for_each(|x| *x /= d);
        for i in 0..n {
            if i != k {
                let f = m[i][k];
                let pivot_row = m[k].clone();
                m[i].iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
            }
        }
    }
    DenseMatrix::from_fn(n, n, |i, j| m[i][n + j])
}

/// Orthogonal projector onto the column span of an orthonormal `q`.
pub fn projector(q: &DenseMatrix) -> DenseMatrix {
    q.matmul_t(q)
}

/// Unit columns, the optimal sparse factor for a fixed rotation.
pub fn s_step(v: &DenseMatrix, rot: &DenseMatrix, mu: f64) -> DenseMatrix {
    let z = v.matmul_t(rot);
    let mut s = DenseMatrix::zeros(z.rows(), z.cols());
    for j in 0..z.cols() {
        let src = z.col(j);
        let dst = s.col_mut(j);
        for (d, &x) in dst.iter_mut().zip(src) {
            *d = x.signum() * (x.abs() - mu).max(0.0);
        }
        let nrm = dst.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 0.0 {
            dst.iter_mut().for_each(|x| *x /= nrm);
        } else {
            // every |z_i| ≤ μ: the best unit vector is a signed coordinate
            // vector at the largest |z_i|
            let k = (0..src.len()).max_by(|&a, &b| src[a].abs().total_cmp(&src[b].abs())).unwrap();
            dst[k] = if src[k] < 0.0 { -1.0 } else { 1.0 };
        }
    }
    s
}

/// Best assignment of labels `1..=r` to reference classes `0..r`, as the
/// fraction of indices that agree under the best permutation.
pub fn best_match_fraction(labels: &[usize], truth: &[usize], r: usize) -> f64 {
    let mut counts = vec![vec![0usize; r]; r + 1];
    for (&a, &t) in labels.iter().zip(truth) {
        counts[a][t] += 1;
    }
    let mut perm: Vec<usize> = (0..r).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |p| {
        let hits: usize = (0..r).map(|j| counts[j + 1][p[j]]).sum();
        best = best.max(hits);
    });
    best as f64 / labels.len() as f64
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}
