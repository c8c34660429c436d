//! Sparse eigenbasis approximation.
//!
//! Given an orthonormal `p × r` basis `V`, alternate between
//!
//! 1. soft-thresholding the rotated basis `V Rᵀ` column by column and
//!    renormalising (exact minimiser over unit-norm `S` for fixed `R`), and
//! 2. setting `R` to the orthogonal polar factor of `Sᵀ V` (exact Procrustes
//!    minimiser for fixed `S`),
//!
//! starting from `R = I` until `R` stops moving in the spectral norm. The
//! columns are then flipped to be mostly nonnegative, scaled to a maximum of
//! one, and ordered by their minimum entry so the cleanest features come first.
//!
//! The weighted variant runs the same iteration on `D_ν^{1/2} V` with a
//! per-row threshold `μ·√ν_i` and maps the result back with `D_ν^{-1/2}`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{
    l01_count, matrix_2norm, polar_orthonormal, DenseMatrix, WeightVector,
};

/// Which family of operator the basis came from; decides the eigenvalue
/// conventions used by the spectrum heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    LaplaceNeumann,
    LaplaceDirichlet,
    Markov,
}

impl OperatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::LaplaceNeumann => "neumann",
            OperatorKind::LaplaceDirichlet => "dirichlet",
            OperatorKind::Markov => "markov",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neumann" | "laplace_neumann" => Ok(OperatorKind::LaplaceNeumann),
            "dirichlet" | "laplace_dirichlet" => Ok(OperatorKind::LaplaceDirichlet),
            "markov" => Ok(OperatorKind::Markov),
            other => Err(Error::InvalidConfig(format!(
                "unknown operator kind '{other}' (expected neumann, dirichlet or markov)"
            ))),
        }
    }
}

/// Orthonormality tolerance accepted for an input basis.
pub const BASIS_ORTHONORMAL_TOL: f64 = 1e-8;

/// An orthonormal basis of leading eigenvectors (or singular vectors).
#[derive(Debug, Clone)]
pub struct EigenBasis {
    vectors: DenseMatrix,
    eigenvalues: Option<Vec<f64>>,
    kind: OperatorKind,
    manifold_dim: usize,
    weights: Option<WeightVector>,
}

impl EigenBasis {
    pub fn new(vectors: DenseMatrix, kind: OperatorKind, manifold_dim: usize) -> Result<Self> {
        if manifold_dim == 0 {
            return Err(Error::InvalidBasis("manifold dimension must be >= 1".into()));
        }
        if vectors.cols() > vectors.rows() {
            return Err(Error::InvalidBasis(format!(
                "{} columns cannot be orthonormal in dimension {}",
                vectors.cols(),
                vectors.rows()
            )));
        }
        let err = vectors.orthonormality_error();
        if err > BASIS_ORTHONORMAL_TOL {
            return Err(Error::InvalidBasis(format!(
                "columns are not orthonormal (max |VᵀV − I| = {err:e})"
            )));
        }
        Ok(Self {
            vectors,
            eigenvalues: None,
            kind,
            manifold_dim,
            weights: None,
        })
    }

    /// A basis whose columns are orthonormal in ⟨·,·⟩_ν.
    pub fn new_weighted(
        vectors: DenseMatrix,
        weights: WeightVector,
        kind: OperatorKind,
        manifold_dim: usize,
    ) -> Result<Self> {
        if weights.len() != vectors.rows() {
            return Err(Error::WeightMismatch {
                weights: weights.len(),
                rows: vectors.rows(),
            });
        }
        if manifold_dim == 0 {
            return Err(Error::InvalidBasis("manifold dimension must be >= 1".into()));
        }
        check_weighted_orthonormal(&vectors, &weights)?;
        Ok(Self {
            vectors,
            eigenvalues: None,
            kind,
            manifold_dim,
            weights: Some(weights),
        })
    }

    /// Attaches eigenvalues, checking they are descending and follow the
    /// sign convention of the operator kind.
    pub fn with_eigenvalues(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() < self.vectors.cols() {
            return Err(Error::InvalidBasis(format!(
                "{} eigenvalues for {} vectors",
                values.len(),
                self.vectors.cols()
            )));
        }
        validate_eigenvalues(&values, self.kind)?;
        self.eigenvalues = Some(values);
        Ok(self)
    }

    pub fn vectors(&self) -> &DenseMatrix {
        &self.vectors
    }

    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.eigenvalues.as_deref()
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn manifold_dim(&self) -> usize {
        self.manifold_dim
    }

    pub fn weights(&self) -> Option<&WeightVector> {
        self.weights.as_ref()
    }

    /// Number of rows `p`.
    pub fn dim(&self) -> usize {
        self.vectors.rows()
    }

    /// Number of basis vectors `r`.
    pub fn len(&self) -> usize {
        self.vectors.cols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The basis restricted to its first `r` vectors.
    pub fn leading(&self, r: usize) -> Result<EigenBasis> {
        if r == 0 || r > self.len() {
            return Err(Error::InvalidConfig(format!(
                "requested {r} vectors from a basis of {}",
                self.len()
            )));
        }
        Ok(EigenBasis {
            vectors: self.vectors.leading_columns(r),
            eigenvalues: self.eigenvalues.clone(),
            kind: self.kind,
            manifold_dim: self.manifold_dim,
            weights: self.weights.clone(),
        })
    }
}

fn check_weighted_orthonormal(v: &DenseMatrix, nu: &WeightVector) -> Result<()> {
    let gram = v.t_matmul(&v.scale_rows(nu.as_slice()));
    let err = gram.max_abs_diff(&DenseMatrix::identity(v.cols()));
    if err > BASIS_ORTHONORMAL_TOL {
        return Err(Error::InvalidBasis(format!(
            "columns are not ν-orthonormal (max |VᵀD_νV − I| = {err:e})"
        )));
    }
    Ok(())
}

fn validate_eigenvalues(values: &[f64], kind: OperatorKind) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidBasis("non-finite eigenvalue".into()));
    }
    if values.windows(2).any(|w| w[1] > w[0] + 1e-12 * w[0].abs().max(1.0)) {
        return Err(Error::InvalidBasis("eigenvalues must be descending".into()));
    }
    let lead = values[0];
    let ok = match kind {
        OperatorKind::Markov => {
            (lead - 1.0).abs() <= 1e-6 && values.iter().all(|v| v.abs() <= 1.0 + 1e-8)
        }
        OperatorKind::LaplaceNeumann => lead.abs() <= 1e-6 && values.iter().all(|v| *v <= 1e-8),
        OperatorKind::LaplaceDirichlet => values.iter().all(|v| *v < 0.0),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::KindMismatch {
            kind: kind.as_str(),
            leading: lead,
        })
    }
}

/// `C_μ(z) = sign(z) · max(|z| − μ, 0)`.
#[inline]
pub fn soft_threshold(z: f64, mu: f64) -> f64 {
    let m = z.abs() - mu;
    if m > 0.0 {
        m.copysign(z)
    } else {
        0.0
    }
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SebaConfig {
    mu: Option<f64>,
    tol: f64,
    max_iter: usize,
}

impl Default for SebaConfig {
    fn default() -> Self {
        Self {
            mu: None,
            tol: 1e-14,
            max_iter: 5000,
        }
    }
}

impl SebaConfig {
    /// `mu = None` selects `0.99/√p` (or `0.99/√‖ν‖₁` when weighted).
    pub fn new(mu: Option<f64>, tol: f64, max_iter: usize) -> Result<Self> {
        if let Some(m) = mu {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidConfig(format!("mu must be positive, got {m}")));
            }
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {tol}")));
        }
        if max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        Ok(Self { mu, tol, max_iter })
    }

    pub fn with_mu(mu: f64) -> Result<Self> {
        Self::new(Some(mu), 1e-14, 5000)
    }

    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    /// The sparsity parameter for a problem whose "mass" is `mass`
    /// (`p` unweighted, `‖ν‖₁` weighted); must satisfy `mu < 1/√mass`.
    pub fn resolve_mu(&self, mass: f64) -> Result<f64> {
        let bound = 1.0 / mass.sqrt();
        let mu = self.mu.unwrap_or(0.99 * bound);
        if mu >= bound {
            return Err(Error::InvalidConfig(format!(
                "mu = {mu} must be below 1/sqrt({mass}) = {bound}"
            )));
        }
        Ok(mu)
    }
}

/// Fit and sparsity of the unit-norm sparse basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitMetrics {
    /// `(1/r) ‖V − S̃ R‖_F²`.
    pub subspace_error: f64,
    /// Fraction of nonzero entries of `S̃`.
    pub absolute_sparsity: f64,
    /// `‖S̃‖_{1,1} / ‖V‖_{1,1}`.
    pub relative_sparsity: f64,
}

/// Output of the sparse-basis iteration.
#[derive(Debug, Clone)]
pub struct SparseBasis {
    /// Sparse columns after sign fixing, max-one scaling and reliability
    /// ordering.
    pub s: DenseMatrix,
    /// Unit-norm sparse columns from the last iteration, in iteration order
    /// (pairs with `rotation`: `V ≈ unit_s · rotation`).
    pub unit_s: DenseMatrix,
    pub rotation: DenseMatrix,
    /// `order[j]` is the iteration-order column that became output column `j`.
    pub order: Vec<usize>,
    /// Column minima of `s`, descending.
    pub minima: Vec<f64>,
    pub mu: f64,
    pub tol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub metrics: FitMetrics,
}

impl SparseBasis {
    pub fn rows(&self) -> usize {
        self.s.rows()
    }

    pub fn cols(&self) -> usize {
        self.s.cols()
    }
}

/// Snapshot handed to an observer after every rotation update.
#[derive(Debug)]
pub struct IterationState<'a> {
    pub iteration: usize,
    /// Unit-norm sparse basis of this iteration (in the scaled coordinates
    /// `D_ν^{1/2} S` when weighted).
    pub s: &'a DenseMatrix,
    pub rotation: &'a DenseMatrix,
    /// `½‖V − S R‖_{F,ν}² + μ ‖S‖_{1,1,ν}` at `(s, rotation)`.
    pub objective: f64,
    /// `‖R_new − R_old‖₂`.
    pub rotation_change: f64,
}

/// The objective `½ ‖V − S R‖_F² + μ ‖S‖_{1,1}`.
pub fn objective(v: &DenseMatrix, s: &DenseMatrix, r: &DenseMatrix, mu: f64) -> f64 {
    let fit = v.sub(&s.matmul(r));
    let f2: f64 = fit.as_slice().iter().map(|x| x * x).sum();
    let l1: f64 = s.as_slice().iter().map(|x| x.abs()).sum();
    0.5 * f2 + mu * l1
}

/// Sparse basis of an orthonormal basis. A basis that carries weights is
/// handed to [`seba_weighted`].
pub fn seba(basis: &EigenBasis, cfg: &SebaConfig) -> Result<SparseBasis> {
    seba_observed(basis, cfg, |_| {})
}

/// [`seba`] with a callback after every iteration.
pub fn seba_observed<F>(basis: &EigenBasis, cfg: &SebaConfig, observer: F) -> Result<SparseBasis>
where
    F: FnMut(&IterationState<'_>),
{
    if let Some(nu) = basis.weights() {
        return seba_weighted_observed(basis, nu, cfg, observer);
    }
    let p = basis.dim() as f64;
    let mu = cfg.resolve_mu(p)?;
    run(basis.vectors(), None, mu, cfg, observer)
}

/// Weighted sparse basis: the columns of `basis` must be orthonormal in
/// ⟨·,·⟩_ν.
pub fn seba_weighted(
    basis: &EigenBasis,
    nu: &WeightVector,
    cfg: &SebaConfig,
) -> Result<SparseBasis> {
    seba_weighted_observed(basis, nu, cfg, |_| {})
}

pub fn seba_weighted_observed<F>(
    basis: &EigenBasis,
    nu: &WeightVector,
    cfg: &SebaConfig,
    observer: F,
) -> Result<SparseBasis>
where
    F: FnMut(&IterationState<'_>),
{
    if nu.len() != basis.dim() {
        return Err(Error::WeightMismatch {
            weights: nu.len(),
            rows: basis.dim(),
        });
    }
    check_weighted_orthonormal(basis.vectors(), nu)?;
    let mu = cfg.resolve_mu(nu.l1())?;
    run(basis.vectors(), Some(nu), mu, cfg, observer)
}

/// Soft-thresholds every column of `z` (per-row thresholds `mu_rows`) and
/// normalises it to unit length.
fn threshold_columns(z: &DenseMatrix, mu: f64, sqrt_nu: Option<&[f64]>) -> Result<DenseMatrix> {
    let p = z.rows();
    let mut s = DenseMatrix::zeros(p, z.cols());
    for j in 0..z.cols() {
        let src = z.col(j);
        let dst = s.col_mut(j);
        match sqrt_nu {
            None => {
                for (d, &x) in dst.iter_mut().zip(src) {
                    *d = soft_threshold(x, mu);
                }
            }
            Some(w) => {
                for ((d, &x), &wi) in dst.iter_mut().zip(src).zip(w) {
                    *d = soft_threshold(x, mu * wi);
                }
            }
        }
        let nrm = dst.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return Err(Error::DegenerateColumn { column: j });
        }
        dst.iter_mut().for_each(|x| *x /= nrm);
    }
    Ok(s)
}

fn scaled_objective(
    v: &DenseMatrix,
    s: &DenseMatrix,
    r: &DenseMatrix,
    mu: f64,
    sqrt_nu: Option<&[f64]>,
) -> f64 {
    match sqrt_nu {
        None => objective(v, s, r, mu),
        Some(w) => {
            let fit = v.sub(&s.matmul(r));
            let f2: f64 = fit.as_slice().iter().map(|x| x * x).sum();
            let l1: f64 = s
                .columns()
                .map(|c| c.iter().zip(w).map(|(x, wi)| wi * x.abs()).sum::<f64>())
                .sum();
            0.5 * f2 + mu * l1
        }
    }
}

fn run<F>(
    v: &DenseMatrix,
    nu: Option<&WeightVector>,
    mu: f64,
    cfg: &SebaConfig,
    mut observer: F,
) -> Result<SparseBasis>
where
    F: FnMut(&IterationState<'_>),
{
    let (p, r) = v.shape();
    let sqrt_nu = nu.map(WeightVector::sqrt);
    let sqrt_nu = sqrt_nu.as_deref();
    // V' = D^{1/2} V
    let v_scaled = match sqrt_nu {
        None => v.clone(),
        Some(w) => v.scale_rows(w),
    };

    let mut rot = DenseMatrix::identity(r);
    let mut s_unit;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let z = v_scaled.matmul_t(&rot);
        s_unit = threshold_columns(&z, mu, sqrt_nu)?;
        let next = polar_orthonormal(&s_unit.t_matmul(&v_scaled))?;
        let change = matrix_2norm(&next.sub(&rot))?;
        rot = next;
        iterations += 1;
        observer(&IterationState {
            iteration: iterations,
            s: &s_unit,
            rotation: &rot,
            objective: scaled_objective(&v_scaled, &s_unit, &rot, mu, sqrt_nu),
            rotation_change: change,
        });
        if change <= cfg.tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
    }

    let metrics = fit_metrics(&v_scaled, &s_unit, &rot, sqrt_nu);

    // back to the original coordinates: S = D^{-1/2} S'
    let unit_s = match sqrt_nu {
        None => s_unit,
        Some(w) => {
            let inv: Vec<f64> = w.iter().map(|x| 1.0 / x).collect();
            s_unit.scale_rows(&inv)
        }
    };

    let mut s = unit_s.clone();
    for j in 0..r {
        let col = s.col_mut(j);
        let mass: f64 = match nu {
            None => col.iter().sum(),
            Some(nu) => col.iter().zip(nu.as_slice()).map(|(x, w)| w * x).sum(),
        };
        // sign(0) := +1
        if mass < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        let top = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        col.iter_mut().for_each(|x| *x /= top);
    }
    let raw_minima: Vec<f64> = s
        .columns()
        .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| raw_minima[b].total_cmp(&raw_minima[a]).then(a.cmp(&b)));
    let s = s.select_columns(&order);
    let minima = order.iter().map(|&j| raw_minima[j]).collect();
    debug_assert_eq!(s.rows(), p);

    Ok(SparseBasis {
        s,
        unit_s,
        rotation: rot,
        order,
        minima,
        mu,
        tol: cfg.tol,
        iterations,
        converged,
        metrics,
    })
}

fn fit_metrics(
    v_scaled: &DenseMatrix,
    s_scaled: &DenseMatrix,
    rot: &DenseMatrix,
    sqrt_nu: Option<&[f64]>,
) -> FitMetrics {
    let (p, r) = v_scaled.shape();
    let fit = v_scaled.sub(&s_scaled.matmul(rot));
    let f2: f64 = fit.as_slice().iter().map(|x| x * x).sum();
    // ‖A‖_{1,1,ν} = Σ √ν_i |A'_ij| for A' = D^{1/2} A
    let l1 = |a: &DenseMatrix| -> f64 {
        match sqrt_nu {
            None => a.as_slice().iter().map(|x| x.abs()).sum(),
            Some(w) => a
                .columns()
                .map(|c| c.iter().zip(w).map(|(x, wi)| wi * x.abs()).sum::<f64>())
                .sum(),
        }
    };
    FitMetrics {
        subspace_error: f2 / r as f64,
        absolute_sparsity: l01_count(s_scaled) as f64 / (p * r) as f64,
        relative_sparsity: l1(s_scaled) / l1(v_scaled),
    }
}
