//! Level-set thresholds that minimise a dynamic Cheeger ratio
//! `(ℓ(Γ) + ℓ(TΓ)) / (2 √min(|M₁|, |M₂|))`.

use rayon::prelude::*;

use super::contour::{extract_level, LevelSet, Polyline};
use super::grid::GridField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheegerOptions {
    pub n_levels: usize,
    /// Relative band above the minimum reported as the flat region.
    pub flat_tol: f64,
}

impl Default for CheegerOptions {
    fn default() -> Self {
        Self {
            n_levels: 256,
            flat_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelScore {
    pub tau: f64,
    /// `None` when the level has no contour or one side has no area.
    pub h: Option<f64>,
    pub length: f64,
    pub image_length: f64,
    pub area_above: f64,
    pub area_below: f64,
}

#[derive(Debug, Clone)]
pub struct CheegerResult {
    pub tau_star: f64,
    pub h_star: f64,
    pub levels: Vec<LevelScore>,
    /// Contour at `tau_star`.
    pub contour: Vec<Polyline>,
    pub level_set: LevelSet,
    /// Range of levels around `tau_star` whose ratio stays within
    /// `(1 + flat_tol) · h_star`.
    pub flat_interval: (f64, f64),
}

pub fn cheeger_threshold(field: &GridField, n_levels: usize) -> Result<CheegerResult> {
    cheeger_threshold_with(
        field,
        CheegerOptions {
            n_levels,
            ..CheegerOptions::default()
        },
    )
}

fn ratio(l: &LevelSet) -> Option<f64> {
    let a = l.area_above.min(l.area_below);
    if l.segment_count == 0 || a <= 0.0 {
        return None;
    }
    Some((l.length + l.image_length) / (2.0 * a.sqrt()))
}

pub fn cheeger_threshold_with(field: &GridField, opts: CheegerOptions) -> Result<CheegerResult> {
    if opts.n_levels == 0 {
        return Err(Error::InvalidConfig("n_levels must be >= 1".into()));
    }
    if field.image().is_none() {
        return Err(Error::InvalidConfig(
            "field needs image points (use the identity map for a static ratio)".into(),
        ));
    }
    let lo = field.values().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range < 1e-12 {
        return Err(Error::DegenerateField(range));
    }
    let n = opts.n_levels;
    let levels: Vec<LevelScore> = (0..n)
        .into_par_iter()
        .map(|l| {
            let tau = lo + (l + 1) as f64 / (n + 1) as f64 * range;
            let set = extract_level(field, tau, false);
            LevelScore {
                tau,
                h: ratio(&set),
                length: set.length,
                image_length: set.image_length,
                area_above: set.area_above,
                area_below: set.area_below,
            }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (k, s) in levels.iter().enumerate() {
        if let Some(h) = s.h {
            if best.map_or(true, |(_, b)| h < b) {
                best = Some((k, h));
            }
        }
    }
    let Some((k_star, h_star)) = best else {
        return Err(Error::DegenerateField(range));
    };

    let within = |k: usize| levels[k].h.is_some_and(|h| h <= (1.0 + opts.flat_tol) * h_star);
    let mut a = k_star;
    while a > 0 && within(a - 1) {
        a -= 1;
    }
    let mut b = k_star;
    while b + 1 < n && within(b + 1) {
        b += 1;
    }

    let tau_star = levels[k_star].tau;
    let level_set = extract_level(field, tau_star, true);
    Ok(CheegerResult {
        tau_star,
        h_star,
        contour: level_set.polylines(),
        level_set,
        flat_interval: (levels[a].tau, levels[b].tau),
        levels,
    })
}
