//! Graph Laplacians of point clouds, including a four-blob fixture whose
//! leading eigenvectors mix the blob indicators.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eig, DenseMatrix, EigOptions};
use crate::seba::{EigenBasis, OperatorKind};

/// Unnormalised Laplacian `D − W` of the graph joining points within
/// `radius` of each other.
pub fn radius_graph_laplacian(points: &[[f64; 2]], radius: f64) -> DenseMatrix {
    let n = points.len();
    let r2 = radius * radius;
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            if dx * dx + dy * dy <= r2 {
                l[(i, j)] = -1.0;
                l[(j, i)] = -1.0;
                l[(i, i)] += 1.0;
                l[(j, j)] += 1.0;
            }
        }
    }
    l
}

/// Leading eigenpairs of the radius graph's Laplacian, negated so they are
/// descending from zero.
#[derive(Debug, Clone)]
pub struct GraphDemo {
    pub points: Vec<[f64; 2]>,
    /// Negated Laplacian eigenvalues, all of them, descending.
    pub spectrum: Vec<f64>,
    pub basis: EigenBasis,
}

pub fn graph_laplacian_demo(points: &[[f64; 2]], radius: f64, k: usize) -> Result<GraphDemo> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyMatrix { rows: 0, cols: 0 });
    }
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!("cannot take {k} eigenvectors of {n} nodes")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidConfig(format!("radius must be positive, got {radius}")));
    }
    let lap = radius_graph_laplacian(points, radius);
    let neg = lap.scale(-1.0);
    let eig = symmetric_eig(&neg, EigOptions::default())?;
    let scale = eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let zeros = eig.values.iter().filter(|v| v.abs() <= 1e-9 * scale).count();
    if zeros > 1 {
        return Err(Error::Disconnected(zeros));
    }
    let mut values = eig.values.clone();
    // the top eigenvalue is zero up to rounding; pin it so the Neumann
    // convention holds exactly
    values[0] = 0.0;
    let basis = EigenBasis::new(eig.vectors.leading_columns(k), OperatorKind::LaplaceNeumann, 2)?
        .with_eigenvalues(values[..k].to_vec())?;
    Ok(GraphDemo {
        points: points.to_vec(),
        spectrum: values,
        basis,
    })
}

/// Points of a plus-shaped domain on a square lattice: four round blobs of
/// radius `blob_radius` centred at distance `arm` from the origin, joined to
/// a small hub by one-node-wide necks. Returns the points and each point's
/// blob (1–4, counter-clockwise from +x) or 0 for hub and neck nodes.
pub fn plus_blob_cloud(spacing: f64, blob_radius: f64, arm: f64) -> (Vec<[f64; 2]>, Vec<usize>) {
    let hub = 2.0 * spacing;
    let extent = arm + blob_radius + spacing;
    let m = (extent / spacing).ceil() as i64;
    let centres = [[arm, 0.0], [0.0, arm], [-arm, 0.0], [0.0, -arm]];
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for jy in -m..=m {
        for ix in -m..=m {
            let x = ix as f64 * spacing;
            let y = jy as f64 * spacing;
            let blob = centres
                .iter()
                .position(|c| (x - c[0]).hypot(y - c[1]) <= blob_radius + 1e-9);
            let on_axis_neck = (jy == 0 && x.abs() <= arm) || (ix == 0 && y.abs() <= arm);
            let in_hub = x.hypot(y) <= hub + 1e-9;
            if let Some(b) = blob {
                points.push([x, y]);
                labels.push(b + 1);
            } else if on_axis_neck || in_hub {
                points.push([x, y]);
                labels.push(0);
            }
        }
    }
    (points, labels)
}
