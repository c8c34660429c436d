//! Level sets of a gridded field by marching squares.
//!
//! Edge crossings are placed by linear interpolation; a saddle cell joins its
//! two above-level corners when the cell average is above the level and
//! separates them otherwise. The super-level area of each cell is the exact
//! area of the polygon cut out by the interpolated contour.

use std::collections::HashMap;

use super::grid::{bilinear, GridField};

/// A chained piece of contour, in domain coordinates (x wrapped into the
/// fundamental period for periodic grids).
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    edges: [usize; 2],
    points: [[f64; 2]; 2],
}

/// Measurements of `{u = τ}` and of the regions `{u > τ}`, `{u ≤ τ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    pub tau: f64,
    pub length: f64,
    /// Length of the contour's image under the node map (0 without images).
    pub image_length: f64,
    pub area_above: f64,
    pub area_below: f64,
    pub segment_count: usize,
    segments: Vec<Segment>,
}

impl LevelSet {
    /// Chains segments that share a grid edge into polylines. Open pieces
    /// (ending on the boundary) come first, then closed loops.
    pub fn polylines(&self) -> Vec<Polyline> {
        let segs = &self.segments;
        let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, s) in segs.iter().enumerate() {
            for e in s.edges {
                by_edge.entry(e).or_default().push(k);
            }
        }
        let mut used = vec![false; segs.len()];
        let mut out = Vec::new();

        let walk = |start: usize, from_edge: usize, used: &mut Vec<bool>| -> Polyline {
            let mut points = Vec::new();
            let mut k = start;
            let mut entry = from_edge;
            let first_edge = from_edge;
            let s0 = segs[k];
            let a = if s0.edges[0] == entry { 0 } else { 1 };
            points.push(s0.points[a]);
            loop {
                used[k] = true;
                let s = segs[k];
                let a = if s.edges[0] == entry { 0 } else { 1 };
                let exit = s.edges[1 - a];
                points.push(s.points[1 - a]);
                let next = by_edge
                    .get(&exit)
                    .and_then(|v| v.iter().copied().find(|&n| n != k && !used[n]));
                match next {
                    Some(n) => {
                        k = n;
                        entry = exit;
                    }
                    None => {
                        let closed = exit == first_edge;
                        if closed {
                            points.pop();
                        }
                        return Polyline { points, closed };
                    }
                }
            }
        };

        for k in 0..segs.len() {
            if used[k] {
                continue;
            }
            for e in segs[k].edges {
                if by_edge[&e].len() == 1 {
                    out.push(walk(k, e, &mut used));
                    break;
                }
            }
        }
        for k in 0..segs.len() {
            if !used[k] {
                let e = segs[k].edges[0];
                out.push(walk(k, e, &mut used));
            }
        }
        out
    }
}

/// Measures the level set `{u = τ}`; segments are kept only when
/// `keep_segments` is set.
pub fn extract_level(field: &GridField, tau: f64, keep_segments: bool) -> LevelSet {
    let nx = field.nx();
    let (hx, hy) = field.spacing();
    let (x0, y0) = field.origin();
    let has_image = field.image().is_some();
    let mut length = 0.0;
    let mut image_length = 0.0;
    let mut above_units = 0.0;
    let mut segment_count = 0;
    let mut segments = Vec::new();

    for j in 0..field.cells_y() {
        for i in 0..field.cells_x() {
            let ir = field.right(i);
            let v = [
                field.value(i, j),
                field.value(ir, j),
                field.value(ir, j + 1),
                field.value(i, j + 1),
            ];
            let up = [v[0] > tau, v[1] > tau, v[2] > tau, v[3] > tau];
            let n_up = up.iter().filter(|&&b| b).count();
            if n_up == 0 {
                continue;
            }
            if n_up == 4 {
                above_units += 1.0;
                continue;
            }

            // crossing parameter along each edge, always measured from the
            // lower-indexed node so neighbouring cells agree bit for bit
            let cross = |a: f64, b: f64| (tau - a) / (b - a);
            let mut pts: [Option<[f64; 2]>; 4] = [None; 4];
            if up[0] != up[1] {
                pts[0] = Some([cross(v[0], v[1]), 0.0]);
            }
            if up[1] != up[2] {
                pts[1] = Some([1.0, cross(v[1], v[2])]);
            }
            if up[3] != up[2] {
                pts[2] = Some([cross(v[3], v[2]), 1.0]);
            }
            if up[0] != up[3] {
                pts[3] = Some([0.0, cross(v[0], v[3])]);
            }

            let saddle = n_up == 2 && up[0] == up[2];
            let center_up = saddle && (v[0] + v[1] + v[2] + v[3]) / 4.0 > tau;

            // super-level area in cell units
            above_units += if saddle && !center_up {
                let corner = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
                let mut a = 0.0;
                for c in 0..4 {
                    if up[c] {
                        let p = pts[c].unwrap();
                        let q = pts[(c + 3) % 4].unwrap();
                        a += triangle_area(corner[c], p, q);
                    }
                }
                a
            } else {
                cell_polygon_area(&up, &pts)
            };

            // segment pairs: each joins two crossed edges
            let mut pairs = [(0usize, 0usize); 2];
            let n_pairs = if saddle {
                // cut off the two corners on the minority side of the centre;
                // corner c is bounded by edges (c+3)%4 and c
                let cut_up = !center_up;
                let mut n = 0;
                for c in (0..4).filter(|&c| up[c] == cut_up) {
                    pairs[n] = ((c + 3) % 4, c);
                    n += 1;
                }
                n
            } else {
                let mut e = (0..4).filter(|&k| pts[k].is_some());
                pairs[0] = (e.next().unwrap(), e.next().unwrap());
                1
            };

            let imgs = if has_image { field.cell_images(i, j) } else { None };
            for &(ea, eb) in &pairs[..n_pairs] {
                let pa = pts[ea].unwrap();
                let pb = pts[eb].unwrap();
                length += ((pb[0] - pa[0]) * hx).hypot((pb[1] - pa[1]) * hy);
                if let Some(c) = imgs {
                    let ta = map_local(&c, pa);
                    let tb = map_local(&c, pb);
                    image_length += (tb[0] - ta[0]).hypot(tb[1] - ta[1]);
                }
                segment_count += 1;
                if keep_segments {
                    let to_global = |p: [f64; 2]| {
                        [
                            field.wrap_x(x0 + (i as f64 + p[0]) * hx),
                            y0 + (j as f64 + p[1]) * hy,
                        ]
                    };
                    segments.push(Segment {
                        edges: [edge_id(nx, i, j, ea, ir), edge_id(nx, i, j, eb, ir)],
                        points: [to_global(pa), to_global(pb)],
                    });
                }
            }
        }
    }

    let area_above = above_units * hx * hy;
    LevelSet {
        tau,
        length,
        image_length,
        area_above,
        area_below: (field.total_area() - area_above).max(0.0),
        segment_count,
        segments,
    }
}

/// Global id of local edge `e` of cell `(i, j)`: horizontal edges leaving node
/// `n` get `2n`, vertical ones `2n + 1`.
fn edge_id(nx: usize, i: usize, j: usize, e: usize, ir: usize) -> usize {
    let node = |a: usize, b: usize| b * nx + a;
    match e {
        0 => 2 * node(i, j),
        1 => 2 * node(ir, j) + 1,
        2 => 2 * node(i, j + 1),
        _ => 2 * node(i, j) + 1,
    }
}

fn map_local(c: &[[f64; 2]; 4], p: [f64; 2]) -> [f64; 2] {
    [
        bilinear([c[0][0], c[1][0], c[2][0], c[3][0]], p[0], p[1]),
        bilinear([c[0][1], c[1][1], c[2][1], c[3][1]], p[0], p[1]),
    ]
}

fn triangle_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
}

/// Area of the polygon obtained by walking the unit cell boundary
/// counter-clockwise, keeping above-level corners and edge crossings.
fn cell_polygon_area(up: &[bool; 4], pts: &[Option<[f64; 2]>; 4]) -> f64 {
    const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut poly: [[f64; 2]; 8] = [[0.0; 2]; 8];
    let mut n = 0;
    // edge k runs from corner k to corner k+1 counter-clockwise
    for k in 0..4 {
        if up[k] {
            poly[n] = CORNERS[k];
            n += 1;
        }
        if let Some(p) = pts[k] {
            poly[n] = p;
            n += 1;
        }
    }
    let mut twice = 0.0;
    for a in 0..n {
        let b = (a + 1) % n;
        twice += poly[a][0] * poly[b][1] - poly[b][0] * poly[a][1];
    }
    0.5 * twice.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(a: f64, b: f64) -> GridField {
        GridField::from_fn(11, 11, [0.0, 1.0, 0.0, 1.0], false, |x, y| a * x + b * y).unwrap()
    }

    #[test]
    fn straight_line_contour() {
        // u = x, level 0.35: a vertical line of length 1, area above 0.65
        let g = plane(1.0, 0.0);
        let l = extract_level(&g, 0.35, true);
        assert!((l.length - 1.0).abs() < 1e-12);
        assert!((l.area_above - 0.65).abs() < 1e-12);
        assert!((l.area_below - 0.35).abs() < 1e-12);
        let p = l.polylines();
        assert_eq!(p.len(), 1);
        assert!(!p[0].closed);
        assert_eq!(p[0].points.len(), 11);
        assert!(p[0].points.iter().all(|q| (q[0] - 0.35).abs() < 1e-12));
    }

    #[test]
    fn diagonal_line_contour() {
        let g = plane(1.0, 1.0);
        let l = extract_level(&g, 1.0, false);
        assert!((l.length - 2f64.sqrt()).abs() < 1e-9);
        assert!((l.area_above - 0.5).abs() < 1e-9);
    }

    #[test]
    fn saddle_rule() {
        // corners (bl, br, tr, tl) = (1, 0, 1, 0) with centre above
        let g = GridField::new(2, 2, [0.0, 1.0, 0.0, 1.0], false, vec![1.0, 0.0, 0.0, 1.0])
            .unwrap();
        // values stored i-fastest: (0,0)=1, (1,0)=0, (0,1)=0, (1,1)=1
        let hi = extract_level(&g, 0.4, true);
        // centre average 0.5 > 0.4: a hexagon, two corners of legs 0.4 cut off
        assert!((hi.area_above - (1.0 - 2.0 * 0.5 * 0.4 * 0.4)).abs() < 1e-12);
        let lo = extract_level(&g, 0.6, true);
        // centre below: two triangles of legs 0.4
        assert!((lo.area_above - 2.0 * 0.5 * 0.4 * 0.4).abs() < 1e-12);
        assert_eq!(hi.segment_count, 2);
        assert_eq!(lo.segment_count, 2);
    }

    #[test]
    fn closed_loop_is_chained() {
        let g = GridField::from_fn(41, 41, [-1.0, 1.0, -1.0, 1.0], false, |x, y| 1.0 - x * x - y * y)
            .unwrap();
        let l = extract_level(&g, 0.75, true);
        let p = l.polylines();
        assert_eq!(p.len(), 1);
        assert!(p[0].closed);
        assert_eq!(p[0].points.len(), l.segment_count);
        let rho = 0.5;
        assert!((l.length - 2.0 * std::f64::consts::PI * rho).abs() < 0.01);
    }

    #[test]
    fn periodic_band_wraps() {
        // u depends on y only on a periodic strip: two seamless closed loops
        let g = GridField::from_fn(16, 9, [0.0, 4.0, -1.0, 1.0], true, |_, y| 1.0 - y * y).unwrap();
        let l = extract_level(&g, 0.5, true);
        assert!((l.length - 8.0).abs() < 1e-9);
        let p = l.polylines();
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(|q| q.closed));
    }

    #[test]
    fn identity_image_doubles_nothing() {
        let g = GridField::from_fn(31, 31, [-1.0, 1.0, -1.0, 1.0], false, |x, y| (-(x * x + y * y)).exp())
            .unwrap()
            .with_image_fn(|x, y| [x, y])
            .unwrap();
        let l = extract_level(&g, 0.6, false);
        assert!((l.length - l.image_length).abs() < 1e-12);
    }
}
