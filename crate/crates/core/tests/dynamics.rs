mod common;

use common::*;
use seba_core::dynamics::*;
use seba_core::linalg::{DenseMatrix, LeadingEigOptions};
use seba_core::seba::{seba, SebaConfig};
use seba_core::thresholding::{disjoint_support, max_likelihood};

fn row_sums(m: &DenseMatrix) -> Vec<f64> {
    (0..m.rows()).map(|i| m.row(i).iter().sum()).collect()
}

fn cfg() -> SebaConfig {
    SebaConfig::new(None, 1e-14, 5000).unwrap()
}

#[test]
fn bickley_velocity_is_divergence_free_and_matches_the_stream_function() {
    let f = BickleyFlow::default();
    let h = 1e-5;
    for &(x, y, t) in &[(1.3, 0.4, 0.0), (7.9, -2.1, 3.5), (15.0, 1.7, 12.25), (19.9, -0.2, 40.0)] {
        let [u, v] = f.velocity(x, y, t);
        let dudx = (f.velocity(x + h, y, t)[0] - f.velocity(x - h, y, t)[0]) / (2.0 * h);
        let dvdy = (f.velocity(x, y + h, t)[1] - f.velocity(x, y - h, t)[1]) / (2.0 * h);
        assert!((dudx + dvdy).abs() < 1e-7);
        let psi_y = (f.stream_function(x, y + h, t) - f.stream_function(x, y - h, t)) / (2.0 * h);
        let psi_x = (f.stream_function(x + h, y, t) - f.stream_function(x - h, y, t)) / (2.0 * h);
        assert!((u + psi_y).abs() < 1e-7);
        assert!((v - psi_x).abs() < 1e-7);
    }
}

#[test]
fn bickley_velocity_is_periodic() {
    let f = BickleyFlow::default();
    for &(x, y, t) in &[(0.5, 0.3, 1.0), (13.0, -1.0, 9.0)] {
        let a = f.velocity(x, y, t);
        let b = f.velocity(x + f.period, y, t);
        let c = f.velocity(x - 3.0 * f.period, y, t);
        for k in 0..2 {
            assert!((a[k] - b[k]).abs() < 1e-12 && (a[k] - c[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn rk4_error_shrinks_at_fourth_order() {
    let f = BickleyFlow::default();
    let p = [4.0, 0.8];
    let reference = advect(&f, p, 0.0, 5.0, 0.005);
    let err = |step: f64| {
        let q = advect(&f, p, 0.0, 5.0, step);
        (q[0] - reference[0]).hypot(q[1] - reference[1])
    };
    let ratio = err(0.2) / err(0.1);
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn flow_map_does_not_wrap() {
    let f = BickleyFlow::default();
    let out = flow_map(&f, &[[19.0, 0.0]], 0.0, 2.0, 0.1);
    // the jet core moves east at about u0 ≈ 5.4 Mm/day
    assert!(out[0][0] > 20.0);
}

#[test]
fn ulam_rows_are_stochastic_and_seeded() {
    let f = BickleyFlow::default();
    let grid = BoxGrid::new(20, 6, (0.0, f.period), f.y_range, true).unwrap();
    let a = ulam_build(&f, grid, 0.0, 5.0, 12, 3, 0.25).unwrap();
    for s in a.row_sums() {
        assert!((s - 1.0).abs() < 1e-12);
    }
    let b = ulam_build(&f, grid, 0.0, 5.0, 12, 3, 0.25).unwrap();
    assert_eq!(a.to_dense(), b.to_dense());
    let c = ulam_build(&f, grid, 0.0, 5.0, 12, 4, 0.25).unwrap();
    assert_ne!(a.to_dense(), c.to_dense());
}

#[test]
fn leading_singular_value_is_one() {
    let f = BickleyFlow::default();
    let grid = BoxGrid::new(24, 8, (0.0, f.period), f.y_range, true).unwrap();
    let op = ulam_build(&f, grid, 0.0, 10.0, 16, 5, 0.25).unwrap();
    let (u, sigma) = op.left_singular(4, LeadingEigOptions::default()).unwrap();
    assert!((sigma[0] - 1.0).abs() < 1e-9);
    assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
    let c = 1.0 / (grid.len() as f64).sqrt();
    assert!(u.col(0).iter().all(|x| (x.abs() - c).abs() < 1e-6));
    // dense cross-check of the normalised operator
    let l = op.normalized_dense();
    let llt = l.matmul_t(&l);
    let res = llt.matmul(&u).sub(&u.matmul(&DenseMatrix::from_diagonal(&sigma.iter().map(|s| s * s).collect::<Vec<_>>())));
    assert!(res.max_abs() < 1e-8);
}

#[test]
fn box_location_wraps_and_clamps() {
    let g = BoxGrid::new(10, 4, (0.0, 20.0), (-3.0, 3.0), true).unwrap();
    assert_eq!(g.locate(21.0, -2.9), g.locate(1.0, -2.9));
    assert_eq!(g.locate(-1.0, 0.1), g.locate(19.0, 0.1));
    assert_eq!(g.locate(5.0, 10.0), g.locate(5.0, 2.99));
    for b in 0..g.len() {
        let [x, y] = g.center(b);
        assert_eq!(g.locate(x, y), b);
    }
}

#[test]
fn graph_laplacian_blobs_become_sparse_vectors() {
    let (pts, blobs) = plus_blob_cloud(0.2, 1.0, 3.0);
    let demo = graph_laplacian_demo(&pts, 0.201, 4).unwrap();
    assert_eq!(demo.spectrum[0], 0.0);
    let out = seba(&demo.basis, &cfg()).unwrap();
    let labels = max_likelihood(&out.s).labels;
    // every blob node goes to the column that owns its blob
    let in_blobs: Vec<usize> = (0..pts.len()).filter(|&i| blobs[i] > 0).collect();
    let lab: Vec<usize> = in_blobs.iter().map(|&i| labels[i]).collect();
    let truth: Vec<usize> = in_blobs.iter().map(|&i| blobs[i] - 1).collect();
    assert!(best_match_fraction(&lab, &truth, 4) > 0.95);
}

#[test]
fn disconnected_graph_is_reported() {
    let pts = [[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]];
    assert!(matches!(graph_laplacian_demo(&pts, 1.5, 2), Err(seba_core::Error::Disconnected(2))));
}

#[test]
fn block_chain_is_recovered() {
    let demo = block_markov_demo(&[50, 30, 20], 0.05, 11).unwrap();
    for s in row_sums(&demo.transition) {
        assert!((s - 1.0).abs() < 1e-12);
    }
    let out = seba(&demo.basis, &cfg()).unwrap();
    let truth: Vec<usize> = demo.labels.iter().map(|l| l - 1).collect();
    assert!(best_match_fraction(&disjoint_support(&out.s).labels, &truth, 3) >= 0.95);
    assert!(demo.singular_values[2] > 0.8 && demo.singular_values[3] < 0.5);
}

#[test]
fn kmeans_separates_the_block_embedding() {
    let demo = block_markov_demo(&[50, 30, 20], 0.05, 12).unwrap();
    let km = kmeans_baseline(demo.basis.vectors(), 3, 5, 1).unwrap();
    let truth: Vec<usize> = demo.labels.iter().map(|l| l - 1).collect();
    let lab: Vec<usize> = km.labels.iter().map(|l| l + 1).collect();
    assert_eq!(best_match_fraction(&lab, &truth, 3), 1.0);
    assert_eq!(km, kmeans_baseline(demo.basis.vectors(), 3, 5, 1).unwrap());
}
