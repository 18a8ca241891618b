//! Sums of Gaussian wells on a lattice, used as fields with known minima.
//!
//! `f(x) = baseline - Σ_j depth_j · exp(-‖x - center_j‖² / width_j²)`, with `x`
//! in grid units.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map};

use super::{GridSpec, ScalarField};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub center: Vec<f64>,
    pub depth: f64,
    pub width: f64,
}

pub fn well_value(x: &[f64], wells: &[Well], baseline: f64) -> f64 {
    baseline
        - wells
            .iter()
            .map(|w| w.depth * (-sq_dist(x, &w.center) / (w.width * w.width)).exp())
            .sum::<f64>()
}

fn well_gradient(x: &[f64], wells: &[Well]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for w in wells {
        let w2 = w.width * w.width;
        let e = w.depth * (-sq_dist(x, &w.center) / w2).exp();
        for (gi, (xi, ci)) in g.iter_mut().zip(x.iter().zip(&w.center)) {
            *gi += 2.0 * e * (xi - ci) / w2;
        }
    }
    g
}

/// Upper bound on `‖∇f‖` over all of space: each well contributes at most
/// `depth · √2 · e^{-1/2} / width`.
pub fn gradient_bound(wells: &[Well]) -> f64 {
    let peak = std::f64::consts::SQRT_2 * (-0.5f64).exp();
    wells.iter().map(|w| w.depth * peak / w.width).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Continuous local minimum reached by gradient descent from `start`, kept
/// inside the lattice box `[0, r-1]^n`.
pub fn refine_minimum(start: &[f64], wells: &[Well], r: usize) -> Vec<f64> {
    let total_depth: f64 = wells.iter().map(|w| w.depth).sum();
    let min_w2 = wells
        .iter()
        .map(|w| w.width * w.width)
        .fold(f64::INFINITY, f64::min);
    let step = min_w2 / (4.0 * total_depth.max(f64::MIN_POSITIVE));
    let hi = (r - 1) as f64;
    let mut x = start.to_vec();
    for _ in 0..200_000 {
        let g = well_gradient(&x, wells);
        let mut moved = 0.0f64;
        for (xi, gi) in x.iter_mut().zip(&g) {
            let next = (*xi - step * gi).clamp(0.0, hi);
            moved = moved.max((next - *xi).abs());
            *xi = next;
        }
        if moved < 1e-14 {
            break;
        }
    }
    x
}

/// Samples the well sum on the full `r^n` lattice.
///
/// Provenance records the wells, each well's refined continuous minimum, and
/// the gradient bound used for discretization-error checks.
pub fn synth_wells(n: usize, r: usize, wells: &[Well], baseline: f64) -> Result<ScalarField> {
    if wells.is_empty() {
        return Err(Error::param("at least one well is required"));
    }
    let spec = GridSpec::new(n, r)?;
    let hi = (r - 1) as f64;
    for (j, w) in wells.iter().enumerate() {
        if w.center.len() != n {
            return Err(Error::param(format!("well {j} center has {} coordinates, expected {n}", w.center.len())));
        }
        if w.center.iter().any(|&c| !(0.0..=hi).contains(&c)) {
            return Err(Error::param(format!("well {j} center {:?} lies outside the lattice", w.center)));
        }
        if !(w.width.is_finite() && w.width > 0.0) {
            return Err(Error::param(format!("well {j} width must be positive")));
        }
        if !w.depth.is_finite() {
            return Err(Error::param(format!("well {j} depth must be finite")));
        }
    }

    let count = spec.point_count()?;
    let values: Vec<f64> = (0..count)
        .map(|i| {
            let x: Vec<f64> = spec.coords_of(i).into_iter().map(|c| c as f64).collect();
            well_value(&x, wells, baseline)
        })
        .collect();

    let minima: Vec<_> = wells
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let loc = refine_minimum(&w.center, wells, r);
            json!({ "well": j, "location": loc, "value": well_value(&loc, wells, baseline) })
        })
        .collect();
    let mut prov = Map::new();
    prov.insert("generator".into(), json!("synth_wells"));
    prov.insert("wells".into(), serde_json::to_value(wells)?);
    prov.insert("baseline".into(), json!(baseline));
    prov.insert("analytic_minima".into(), json!(minima));
    prov.insert("gradient_bound".into(), json!(gradient_bound(wells)));
    ScalarField::from_grid(spec, values, prov)
}

/// `count` well-separated wells with lattice-point centers, drawn from `seed`.
///
/// Widths lie in `[1.5, 2.5]`, depths in `[0.5, 1.5]`; centers keep a margin of
/// two cells from the lattice boundary and any two centers are at least
/// `2 (w_a + w_b)` apart.
pub fn scatter_wells(n: usize, r: usize, count: usize, seed: u64) -> Result<Vec<Well>> {
    if r < 5 {
        return Err(Error::param("scatter_wells needs r >= 5"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..1000 {
        let mut wells: Vec<Well> = Vec::with_capacity(count);
        for _ in 0..200 * count {
            if wells.len() == count {
                break;
            }
            let width = rng.gen_range(1.5..2.5);
            let center: Vec<f64> = (0..n).map(|_| rng.gen_range(2..=r - 3) as f64).collect();
            let separated = wells
                .iter()
                .all(|w| sq_dist(&w.center, &center).sqrt() >= 2.0 * (w.width + width));
            if separated {
                wells.push(Well { center, depth: rng.gen_range(0.5..1.5), width });
            }
        }
        if wells.len() == count {
            return Ok(wells);
        }
    }
    Err(Error::param(format!("cannot place {count} separated wells on an r = {r} lattice")))
}
