//! Box discretisation of a transfer operator from sampled trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::bickley::{advect, VelocityField};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eig_leading, DenseMatrix, LeadingEigOptions};
use crate::seba::{EigenBasis, OperatorKind};

/// A regular `nx × ny` partition of a rectangle into boxes, numbered with `x`
/// fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGrid {
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub periodic_x: bool,
}

impl BoxGrid {
    pub fn new(nx: usize, ny: usize, x_range: (f64, f64), y_range: (f64, f64), periodic_x: bool) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidConfig(format!("box grid {nx}x{ny} is empty")));
        }
        if !(x_range.1 > x_range.0 && y_range.1 > y_range.0) {
            return Err(Error::InvalidConfig("box grid needs a nonempty rectangle".into()));
        }
        Ok(Self {
            nx,
            ny,
            x_range,
            y_range,
            periodic_x,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_size(&self) -> (f64, f64) {
        (
            (self.x_range.1 - self.x_range.0) / self.nx as f64,
            (self.y_range.1 - self.y_range.0) / self.ny as f64,
        )
    }

    /// `(i, j)` of box `b`.
    pub fn coords(&self, b: usize) -> (usize, usize) {
        (b % self.nx, b / self.nx)
    }

    pub fn lower_corner(&self, b: usize) -> [f64; 2] {
        let (i, j) = self.coords(b);
        let (dx, dy) = self.box_size();
        [self.x_range.0 + i as f64 * dx, self.y_range.0 + j as f64 * dy]
    }

    pub fn center(&self, b: usize) -> [f64; 2] {
        let (dx, dy) = self.box_size();
        let c = self.lower_corner(b);
        [c[0] + 0.5 * dx, c[1] + 0.5 * dy]
    }

    /// Box containing `(x, y)`. Periodic `x` is wrapped; anything outside the
    /// rectangle otherwise lands in the nearest boundary box.
    pub fn locate(&self, x: f64, y: f64) -> usize {
        let (dx, dy) = self.box_size();
        let mut fx = x - self.x_range.0;
        if self.periodic_x {
            fx = fx.rem_euclid(self.x_range.1 - self.x_range.0);
        }
        let fy = y - self.y_range.0;
        let i = ((fx / dx).floor().max(0.0) as usize).min(self.nx - 1);
        let j = ((fy / dy).floor().max(0.0) as usize).min(self.ny - 1);
        j * self.nx + i
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.periodic_x || (x >= self.x_range.0 && x <= self.x_range.1))
            && y >= self.y_range.0
            && y <= self.y_range.1
    }
}

/// Ulam matrix `P` (row-stochastic, stored by rows) together with the
/// normalised operator `L = P D⁻¹ᐟ²`, where `D` holds the column sums of `P`.
///
/// With uniform weight on the boxes the column sums are the image measure, so
/// `L Lᵀ 1 = 1`: the top singular value is exactly one with a constant left
/// singular vector.
#[derive(Debug, Clone)]
pub struct UlamOperator {
    grid: BoxGrid,
    samples_per_box: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    col_sums: Vec<f64>,
    /// Sample images that fell outside the rectangle and were assigned to a
    /// boundary box.
    pub clamped_samples: usize,
}

impl UlamOperator {
    /// Samples `samples_per_box` uniform points in every box, maps them with
    /// `map` and counts where they land. Deterministic for a given seed: box
    /// `b` draws from stream `b` of a ChaCha8 generator.
    pub fn from_map<M>(grid: BoxGrid, samples_per_box: usize, seed: u64, map: M) -> Result<Self>
    where
        M: Fn([f64; 2]) -> [f64; 2] + Sync,
    {
        if samples_per_box == 0 {
            return Err(Error::InvalidConfig("samples_per_box must be >= 1".into()));
        }
        let (dx, dy) = grid.box_size();
        let rows: Vec<(Vec<(usize, usize)>, usize)> = (0..grid.len())
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let c = grid.lower_corner(b);
                let mut hits: Vec<usize> = Vec::with_capacity(samples_per_box);
                let mut clamped = 0;
                for _ in 0..samples_per_box {
                    let p = [c[0] + rng.gen::<f64>() * dx, c[1] + rng.gen::<f64>() * dy];
                    let q = map(p);
                    if !grid.contains(q[0], q[1]) {
                        clamped += 1;
                    }
                    hits.push(grid.locate(q[0], q[1]));
                }
                hits.sort_unstable();
                let mut counts: Vec<(usize, usize)> = Vec::new();
                for h in hits {
                    match counts.last_mut() {
                        Some((j, n)) if *j == h => *n += 1,
                        _ => counts.push((h, 1)),
                    }
                }
                (counts, clamped)
            })
            .collect();

        let n = grid.len();
        let s = samples_per_box as f64;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut col_sums = vec![0.0; n];
        let mut clamped_samples = 0;
        row_ptr.push(0);
        for (counts, clamped) in rows {
            clamped_samples += clamped;
            for (j, c) in counts {
                let v = c as f64 / s;
                col_idx.push(j);
                vals.push(v);
                col_sums[j] += v;
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            grid,
            samples_per_box,
            row_ptr,
            col_idx,
            vals,
            col_sums,
            clamped_samples,
        })
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn samples_per_box(&self) -> usize {
        self.samples_per_box
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero `(j, P_ij)` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    /// `P` as a dense matrix.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.len();
        let mut p = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.row(i) {
                p[(i, j)] = v;
            }
        }
        p
    }

    fn col_scale(&self) -> Vec<f64> {
        self.col_sums
            .iter()
            .map(|&c| if c > 0.0 { 1.0 / c.sqrt() } else { 0.0 })
            .collect()
    }

    /// `L` as a dense matrix.
    pub fn normalized_dense(&self) -> DenseMatrix {
        let d = self.col_scale();
        let n = self.len();
        let mut l = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.row(i) {
                l[(i, j)] = v * d[j];
            }
        }
        l
    }

    /// `L X` for a block `X` of columns.
    pub fn apply_l(&self, x: &DenseMatrix) -> DenseMatrix {
        let d = self.col_scale();
        let n = self.len();
        let mut y = DenseMatrix::zeros(n, x.cols());
        for c in 0..x.cols() {
            let xc = x.col(c);
            let yc = y.col_mut(c);
            for (i, out) in yc.iter_mut().enumerate() {
                *out = self.row(i).map(|(j, v)| v * d[j] * xc[j]).sum();
            }
        }
        y
    }

    /// `Lᵀ X` for a block `X` of columns.
    pub fn apply_lt(&self, x: &DenseMatrix) -> DenseMatrix {
        let d = self.col_scale();
        let n = self.len();
        let mut y = DenseMatrix::zeros(n, x.cols());
        for c in 0..x.cols() {
            let xc = x.col(c);
            let yc = y.col_mut(c);
            for (i, &xi) in xc.iter().enumerate() {
                for (j, v) in self.row(i) {
                    yc[j] += v * d[j] * xi;
                }
            }
        }
        y
    }

    /// Leading `k` left singular vectors and singular values of `L`.
    pub fn left_singular(&self, k: usize, opts: LeadingEigOptions) -> Result<(DenseMatrix, Vec<f64>)> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidConfig(format!(
                "cannot take {k} singular vectors of a {}-box operator",
                self.len()
            )));
        }
        let eig = symmetric_eig_leading(self.len(), k, |x| self.apply_l(&self.apply_lt(x)), opts)?;
        let sigma = eig.values.iter().map(|v| v.max(0.0).sqrt()).collect();
        Ok((eig.vectors, sigma))
    }

    /// The leading `k` left singular vectors as a Markov-kind basis whose
    /// eigenvalues are the singular values.
    pub fn markov_basis(&self, k: usize, opts: LeadingEigOptions) -> Result<EigenBasis> {
        let (v, sigma) = self.left_singular(k, opts)?;
        EigenBasis::new(v, OperatorKind::Markov, 2)?.with_eigenvalues(sigma)
    }
}

/// Normalises a dense row-stochastic matrix as `P D⁻¹ᐟ²` with `D` the column
/// sums (zero columns stay zero).
pub fn normalize_transition(p: &DenseMatrix) -> DenseMatrix {
    let mut l = p.clone();
    for j in 0..p.cols() {
        let c: f64 = p.col(j).iter().sum();
        let s = if c > 0.0 { 1.0 / c.sqrt() } else { 0.0 };
        l.col_mut(j).iter_mut().for_each(|v| *v *= s);
    }
    l
}

/// Ulam matrix of the time-`t0 → t1` flow map, integrated with RK4 at `step`.
pub fn ulam_build<F: VelocityField>(
    flow: &F,
    grid: BoxGrid,
    t0: f64,
    t1: f64,
    samples_per_box: usize,
    seed: u64,
    step: f64,
) -> Result<UlamOperator> {
    if !(step > 0.0) {
        return Err(Error::InvalidConfig(format!("RK4 step must be positive, got {step}")));
    }
    UlamOperator::from_map(grid, samples_per_box, seed, |p| advect(flow, p, t0, t1, step))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(nx: usize, ny: usize) -> BoxGrid {
        BoxGrid::new(nx, ny, (0.0, nx as f64), (0.0, ny as f64), false).unwrap()
    }

    #[test]
    fn identity_map_gives_identity_matrix() {
        let u = UlamOperator::from_map(unit_grid(3, 2), 20, 1, |p| p).unwrap();
        assert_eq!(u.to_dense(), DenseMatrix::identity(6));
        assert_eq!(u.clamped_samples, 0);
    }

    #[test]
    fn swap_map() {
        let u = UlamOperator::from_map(unit_grid(2, 1), 10, 1, |p| [1.0 - (p[0] - 1.0), p[1]]).unwrap();
        let expect = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(u.to_dense(), expect);
        let (_, s) = u.left_singular(2, LeadingEigOptions::default()).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12 && (s[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn locate_wraps_and_clamps() {
        let g = BoxGrid::new(4, 2, (0.0, 4.0), (-1.0, 1.0), true).unwrap();
        assert_eq!(g.locate(4.5, 0.5), 4);
        assert_eq!(g.locate(-0.5, -0.5), 3);
        assert_eq!(g.locate(1.5, 7.0), 5);
        assert_eq!(g.center(5), [1.5, 0.5]);
    }

    #[test]
    fn sparse_products_match_dense() {
        let u = UlamOperator::from_map(unit_grid(5, 4), 30, 3, |p| [p[0] * 0.7 + 0.9, (p[1] * 1.3) % 4.0])
            .unwrap();
        let l = u.normalized_dense();
        let x = DenseMatrix::from_fn(20, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        assert!(u.apply_l(&x).max_abs_diff(&l.matmul(&x)) < 1e-12);
        assert!(u.apply_lt(&x).max_abs_diff(&l.t_matmul(&x)) < 1e-12);
        assert!(normalize_transition(&u.to_dense()).max_abs_diff(&l) < 1e-15);
        assert!(u.row_sums().iter().all(|s| (s - 1.0).abs() < 1e-12));
    }
}
