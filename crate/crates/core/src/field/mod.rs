//! Scalar fields sampled over an n-dimensional subspace.
//!
//! Coordinates are stored in grid units. The physical step of the grid lives
//! in [`GridSpec::scale`] and is only used when perturbing a model, so every
//! distance computed downstream is isotropic.

mod io;
mod synth;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{Error, Result};

pub use io::{parse_field, read_binary, read_csv, write_binary, write_csv, write_field, FieldFormat};
pub use synth::{gradient_bound, refine_minimum, scatter_wells, synth_wells, well_value, Well};

/// Half-width of the default grid in parameter space.
pub const DEFAULT_HALF_SPAN: f64 = 0.01;
pub const DEFAULT_RESOLUTION: usize = 41;

/// Regular lattice `{0..r-1}^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub r: usize,
    /// Physical step per grid unit.
    pub scale: f64,
}

impl GridSpec {
    /// Grid with the default scale, spanning ±0.01 around the center.
    pub fn new(n: usize, r: usize) -> Result<Self> {
        let half_units = (r.max(2) - 1) as f64 / 2.0;
        Self::with_scale(n, r, DEFAULT_HALF_SPAN / half_units)
    }

    pub fn with_scale(n: usize, r: usize, scale: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("grid dimension n must be at least 1"));
        }
        if r < 2 {
            return Err(Error::param("grid resolution r must be at least 2"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::param(format!("grid scale must be positive, got {scale}")));
        }
        let spec = Self { n, r, scale };
        spec.point_count()?;
        Ok(spec)
    }

    /// `r^n`, or a size error when it does not fit in `usize`.
    pub fn point_count(&self) -> Result<usize> {
        u32::try_from(self.n)
            .ok()
            .and_then(|n| self.r.checked_pow(n))
            .ok_or(Error::Size { n: self.n, r: self.r })
    }

    /// Lattice index of the center point; only defined for odd `r`.
    pub fn center_index(&self) -> Option<usize> {
        if self.r.is_multiple_of(2) {
            return None;
        }
        let mid = (self.r - 1) / 2;
        Some(self.index_of(&vec![mid; self.n]))
    }

    /// Continuous grid-unit coordinate of the center.
    pub fn center(&self) -> f64 {
        (self.r - 1) as f64 / 2.0
    }

    /// Row-major lattice coordinates of point `index` (last axis fastest).
    pub fn coords_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = index % self.r;
            index /= self.r;
        }
        out
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.n);
        coords.iter().fold(0, |acc, &c| acc * self.r + c)
    }

    /// Physical displacement from the center along each axis for point `index`.
    pub fn displacement(&self, index: usize) -> Vec<f64> {
        let c = self.center();
        self.coords_of(index)
            .into_iter()
            .map(|a| (a as f64 - c) * self.scale)
            .collect()
    }
}

/// All `r^n` lattice points, flattened row-major into `N × n` grid-unit coordinates.
pub fn generate_grid(spec: &GridSpec) -> Result<Vec<f64>> {
    let count = spec.point_count()?;
    let bytes = count
        .checked_mul(spec.n)
        .ok_or(Error::Size { n: spec.n, r: spec.r })?;
    let mut coords = Vec::with_capacity(bytes);
    let mut current = vec![0usize; spec.n];
    for _ in 0..count {
        coords.extend(current.iter().map(|&c| c as f64));
        for axis in (0..spec.n).rev() {
            current[axis] += 1;
            if current[axis] < spec.r {
                break;
            }
            current[axis] = 0;
        }
    }
    Ok(coords)
}

/// N sample points in an n-dimensional subspace, each with one loss value.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    dims: usize,
    coords: Vec<f64>,
    values: Vec<f64>,
    grid: Option<GridSpec>,
    provenance: Map<String, Value>,
}

impl ScalarField {
    /// Builds a field from flat `N × dims` coordinates, validating every invariant.
    pub fn new(
        dims: usize,
        coords: Vec<f64>,
        values: Vec<f64>,
        grid: Option<GridSpec>,
        provenance: Map<String, Value>,
    ) -> Result<Self> {
        if dims == 0 {
            return Err(Error::Dimension("field must have at least one coordinate".into()));
        }
        if coords.len() != values.len() * dims {
            return Err(Error::Dimension(format!(
                "{} coordinates for {} values of dimension {dims}",
                coords.len(),
                values.len()
            )));
        }
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, value: values[row] });
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / dims, value: coords[pos] });
        }
        if let Some(spec) = &grid {
            if spec.n != dims {
                return Err(Error::Dimension(format!(
                    "grid has n = {} but coordinates have {dims} columns",
                    spec.n
                )));
            }
            if spec.point_count()? != values.len() {
                return Err(Error::Dimension(format!(
                    "grid expects {} points, field has {}",
                    spec.point_count()?,
                    values.len()
                )));
            }
            if coords != generate_grid(spec)? {
                return Err(Error::Dimension(
                    "coordinates do not enumerate the lattice in row-major order".into(),
                ));
            }
        }
        Ok(Self { dims, coords, values, grid, provenance })
    }

    /// Full-grid field with lattice coordinates generated from `spec`.
    pub fn from_grid(spec: GridSpec, values: Vec<f64>, provenance: Map<String, Value>) -> Result<Self> {
        let coords = generate_grid(&spec)?;
        Self::new(spec.n, coords, values, Some(spec), provenance)
    }

    /// Field with 1-D coordinates `0, 1, ..., N-1`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let coords = (0..values.len()).map(|i| i as f64).collect();
        Self::new(1, coords, values, None, Map::new())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dims..(i + 1) * self.dims]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        self.grid.as_ref()
    }

    pub fn provenance(&self) -> &Map<String, Value> {
        &self.provenance
    }

    pub fn provenance_mut(&mut self) -> &mut Map<String, Value> {
        &mut self.provenance
    }

    /// `(min, max)` of the values; `None` for an empty field.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        let mut it = self.values.iter().copied();
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// Same points with transformed values.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::new(self.dims, self.coords.clone(), values, self.grid, self.provenance.clone())
    }
}
