//! The Bickley jet: a meandering zonal jet flanked by travelling vortices.
//!
//! Lengths are in megametres and times in days.

use rayon::prelude::*;

/// A planar velocity field, optionally periodic in `x`.
pub trait VelocityField: Sync {
    fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2];

    fn period_x(&self) -> Option<f64> {
        None
    }
}

/// Seconds per day over metres per megametre.
const MS_TO_MMDAY: f64 = 86_400.0 / 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BickleyFlow {
    /// Jet speed (Mm/day).
    pub u0: f64,
    /// Jet width (Mm).
    pub l0: f64,
    /// Earth radius (Mm).
    pub r_e: f64,
    pub amplitudes: [f64; 3],
    /// Phase speeds (Mm/day).
    pub speeds: [f64; 3],
    /// Wave numbers (1/Mm).
    pub wavenumbers: [f64; 3],
    /// Length of the periodic channel (Mm).
    pub period: f64,
    /// Channel walls in `y` (Mm).
    pub y_range: (f64, f64),
}

impl Default for BickleyFlow {
    fn default() -> Self {
        let u0 = 62.66 * MS_TO_MMDAY;
        let r_e = 6.371;
        Self {
            u0,
            l0: 1.77,
            r_e,
            amplitudes: [0.0075, 0.15, 0.3],
            speeds: [0.1446 * u0, 0.205 * u0, 0.461 * u0],
            wavenumbers: [2.0 / r_e, 4.0 / r_e, 6.0 / r_e],
            period: 20.0,
            y_range: (-3.0, 3.0),
        }
    }
}

impl BickleyFlow {
    /// The flow with different perturbation amplitudes.
    pub fn with_amplitudes(mut self, a: [f64; 3]) -> Self {
        self.amplitudes = a;
        self
    }

    /// Stream function `ψ` with `u = −∂ψ/∂y`, `v = ∂ψ/∂x`.
    pub fn stream_function(&self, x: f64, y: f64, t: f64) -> f64 {
        let x = x.rem_euclid(self.period);
        let th = (y / self.l0).tanh();
        let sech2 = 1.0 - th * th;
        let wave: f64 = (0..3)
            .map(|i| self.amplitudes[i] * (self.wavenumbers[i] * (x - self.speeds[i] * t)).cos())
            .sum();
        -self.u0 * self.l0 * th + self.u0 * self.l0 * sech2 * wave
    }
}

impl VelocityField for BickleyFlow {
    fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let x = x.rem_euclid(self.period);
        let th = (y / self.l0).tanh();
        let sech2 = 1.0 - th * th;
        let mut cos_sum = 0.0;
        let mut ksin_sum = 0.0;
        for i in 0..3 {
            let (s, c) = (self.wavenumbers[i] * (x - self.speeds[i] * t)).sin_cos();
            cos_sum += self.amplitudes[i] * c;
            ksin_sum += self.amplitudes[i] * self.wavenumbers[i] * s;
        }
        let u = self.u0 * sech2 + 2.0 * self.u0 * sech2 * th * cos_sum;
        let v = -self.u0 * self.l0 * sech2 * ksin_sum;
        [u, v]
    }

    fn period_x(&self) -> Option<f64> {
        Some(self.period)
    }
}

/// Advects one point from `t0` to `t1` with classical RK4. The step is
/// shortened so that a whole number of steps fits the interval.
pub fn advect<F: VelocityField + ?Sized>(flow: &F, p: [f64; 2], t0: f64, t1: f64, step: f64) -> [f64; 2] {
    let span = t1 - t0;
    if span == 0.0 {
        return p;
    }
    let n = (span.abs() / step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let [mut x, mut y] = p;
    for s in 0..n {
        let t = t0 + s as f64 * h;
        let k1 = flow.velocity(x, y, t);
        let k2 = flow.velocity(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], t + 0.5 * h);
        let k3 = flow.velocity(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], t + 0.5 * h);
        let k4 = flow.velocity(x + h * k3[0], y + h * k3[1], t + h);
        x += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    [x, y]
}

/// Advects many points in parallel. Positions are not wrapped, so periodic
/// displacement is preserved in the output.
pub fn flow_map<F: VelocityField + ?Sized>(
    flow: &F,
    points: &[[f64; 2]],
    t0: f64,
    t1: f64,
    step: f64,
) -> Vec<[f64; 2]> {
    assert!(step > 0.0, "step must be positive");
    points
        .par_iter()
        .map(|&p| advect(flow, p, t0, t1, step))
        .collect()
}
