use crate::error::{Error, Result};

/// A scalar field sampled on a regular 2-D grid, optionally periodic in `x`,
/// with optional per-node images under a map `T`.
///
/// Nodes are `(x0 + i·hx, y0 + j·hy)` and stored with `i` fastest. In the
/// periodic case the node row wraps, so there are `nx` cells per row instead
/// of `nx − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
    period_x: Option<f64>,
    values: Vec<f64>,
    image: Option<Vec<[f64; 2]>>,
}

impl GridField {
    /// `domain = [x0, x1, y0, y1]`. With `periodic_x` the point `x1` is
    /// identified with `x0`.
    pub fn new(nx: usize, ny: usize, domain: [f64; 4], periodic_x: bool, values: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidConfig(format!("grid must be at least 2x2, got {nx}x{ny}")));
        }
        if values.len() != nx * ny {
            return Err(Error::ShapeMismatch {
                rows: ny,
                cols: nx,
                len: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / nx,
                col: k % nx,
            });
        }
        let [x0, x1, y0, y1] = domain;
        if !(x1 > x0 && y1 > y0) || domain.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("empty domain {domain:?}")));
        }
        let (hx, period_x) = if periodic_x {
            ((x1 - x0) / nx as f64, Some(x1 - x0))
        } else {
            ((x1 - x0) / (nx - 1) as f64, None)
        };
        Ok(Self {
            nx,
            ny,
            x0,
            y0,
            hx,
            hy: (y1 - y0) / (ny - 1) as f64,
            period_x,
            values,
            image: None,
        })
    }

    pub fn from_fn(
        nx: usize,
        ny: usize,
        domain: [f64; 4],
        periodic_x: bool,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut g = Self::new(nx, ny, domain, periodic_x, vec![0.0; nx * ny])?;
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = g.node(i, j);
                g.values[j * nx + i] = f(x, y);
            }
        }
        Ok(g)
    }

    /// Attaches node images `T(x)`, stored in the same order as the values.
    pub fn with_image(mut self, points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() != self.values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} image points for {} nodes",
                points.len(),
                self.values.len()
            )));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite image point".into()));
        }
        self.image = Some(points);
        Ok(self)
    }

    /// Uses `f` to map every node.
    pub fn with_image_fn(self, f: impl Fn(f64, f64) -> [f64; 2]) -> Result<Self> {
        let pts = (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| (i, j)))
            .map(|(i, j)| {
                let (x, y) = self.node(i, j);
                f(x, y)
            })
            .collect();
        self.with_image(pts)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.hx, self.hy)
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.x0, self.y0)
    }

    pub fn period_x(&self) -> Option<f64> {
        self.period_x
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn image(&self) -> Option<&[[f64; 2]]> {
        self.image.as_deref()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.hx, self.y0 + j as f64 * self.hy)
    }

    pub fn cells_x(&self) -> usize {
        if self.period_x.is_some() {
            self.nx
        } else {
            self.nx - 1
        }
    }

    pub fn cells_y(&self) -> usize {
        self.ny - 1
    }

    pub fn total_area(&self) -> f64 {
        (self.cells_x() * self.cells_y()) as f64 * self.hx * self.hy
    }

    /// Column index of the node to the right of `i`.
    #[inline]
    pub(crate) fn right(&self, i: usize) -> usize {
        if i + 1 == self.nx {
            0
        } else {
            i + 1
        }
    }

    /// Wraps an x coordinate into the fundamental period when periodic.
    pub fn wrap_x(&self, x: f64) -> f64 {
        match self.period_x {
            Some(p) => self.x0 + (x - self.x0).rem_euclid(p),
            None => x,
        }
    }

    /// The same field with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> GridField {
        let mut g = self.clone();
        g.values.iter_mut().for_each(|v| *v *= c);
        g
    }

    /// Corner images of cell `(i, j)` in the order (bottom-left,
    /// bottom-right, top-right, top-left), unwrapped in `x` around the first
    /// corner so that bilinear interpolation does not jump across the seam.
    pub(crate) fn cell_images(&self, i: usize, j: usize) -> Option<[[f64; 2]; 4]> {
        let img = self.image.as_ref()?;
        let ir = self.right(i);
        let nx = self.nx;
        let mut c = [
            img[j * nx + i],
            img[j * nx + ir],
            img[(j + 1) * nx + ir],
            img[(j + 1) * nx + i],
        ];
        if let Some(p) = self.period_x {
            let base = c[0][0];
            for corner in &mut c[1..] {
                let d = corner[0] - base;
                corner[0] = base + d - p * (d / p).round();
            }
        }
        Some(c)
    }

    /// Bilinear refinement by an integer factor.
    pub fn refine(&self, factor: usize) -> Result<GridField> {
        if factor == 0 {
            return Err(Error::InvalidConfig("refinement factor must be >= 1".into()));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let nx = if self.period_x.is_some() {
            self.nx * factor
        } else {
            (self.nx - 1) * factor + 1
        };
        let ny = (self.ny - 1) * factor + 1;
        let f = factor as f64;
        let mut values = Vec::with_capacity(nx * ny);
        let mut image = self.image.as_ref().map(|_| Vec::with_capacity(nx * ny));
        for jj in 0..ny {
            let (cj, t) = split(jj, factor, self.cells_y());
            for ii in 0..nx {
                let (ci, s) = split(ii, factor, self.cells_x());
                let s = s as f64 / f;
                let t = t as f64 / f;
                let ir = self.right(ci);
                let v = [
                    self.value(ci, cj),
                    self.value(ir, cj),
                    self.value(ir, cj + 1),
                    self.value(ci, cj + 1),
                ];
                values.push(bilinear(v, s, t));
                if let Some(img) = image.as_mut() {
                    let c = self.cell_images(ci, cj).expect("image present");
                    img.push([
                        bilinear([c[0][0], c[1][0], c[2][0], c[3][0]], s, t),
                        bilinear([c[0][1], c[1][1], c[2][1], c[3][1]], s, t),
                    ]);
                }
            }
        }
        Ok(GridField {
            nx,
            ny,
            x0: self.x0,
            y0: self.y0,
            hx: self.hx / f,
            hy: self.hy / f,
            period_x: self.period_x,
            values,
            image,
        })
    }
}

/// Coarse cell and sub-index of fine node `k`; the last node of a
/// non-periodic axis sits at the far edge of the last cell.
fn split(k: usize, factor: usize, cells: usize) -> (usize, usize) {
    let c = k / factor;
    if c >= cells {
        (cells - 1, factor)
    } else {
        (c, k % factor)
    }
}

/// Bilinear interpolation of corner values (bottom-left, bottom-right,
/// top-right, top-left) at local coordinates `(s, t) ∈ [0, 1]²`.
#[inline]
pub(crate) fn bilinear(v: [f64; 4], s: f64, t: f64) -> f64 {
    (1.0 - t) * ((1.0 - s) * v[0] + s * v[1]) + t * ((1.0 - s) * v[3] + s * v[2])
}
