//! Finite d-dimensional lattice geometry: site indexing, boundary modes,
//! positions, and the unit-cell decomposition behind the χ_a projections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// No wrap links; position operator globally defined (measured from the
    /// volume center).
    Open,
    /// Torus; translations act, position lives on the fundamental domain.
    Periodic,
}

/// Finite grid in d ≤ 3 dimensions with lattice spacing `a` and a cell map
/// site → ℤ^d. At spacing 1 every site is its own unit cell; at spacing
/// 1/q each cell holds q^d sites (cell label = floor(a·index) per axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    dims: Vec<usize>,
    spacing: f64,
    boundary: BoundaryMode,
}

impl LatticeGeometry {
    pub fn new(dims: Vec<usize>, spacing: f64, boundary: BoundaryMode) -> Result<Self> {
        let d = dims.len();
        if d == 0 || d > 3 {
            return Err(Error::DimensionMismatch(format!(
                "dimension must be 1..=3, got {d}"
            )));
        }
        if dims.iter().any(|&l| l == 0) {
            return Err(Error::DimensionMismatch("zero extent".into()));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::NonFinite("spacing must be positive".into()));
        }
        if spacing < 1.0 {
            let q = 1.0 / spacing;
            if (q - q.round()).abs() > 1e-12 {
                return Err(Error::DimensionMismatch(
                    "spacing below 1 must be 1/q with integer q so cells tile exactly".into(),
                ));
            }
        } else if spacing > 1.0 {
            return Err(Error::DimensionMismatch(
                "spacing above 1 leaves empty unit cells".into(),
            ));
        }
        Ok(Self {
            dims,
            spacing,
            boundary,
        })
    }

    /// Unit spacing, open boundary; the default desk configuration.
    pub fn open_unit(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, 1.0, BoundaryMode::Open)
    }

    pub fn periodic_unit(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, 1.0, BoundaryMode::Periodic)
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn num_sites(&self) -> usize {
        self.dims.iter().product()
    }

    /// Row-major site index from integer coordinates.
    pub fn site_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dims.len());
        let mut idx = 0;
        for (c, l) in coords.iter().zip(&self.dims) {
            debug_assert!(c < l);
            idx = idx * l + c;
        }
        idx
    }

    pub fn site_coords(&self, mut index: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dims.len()];
        for axis in (0..self.dims.len()).rev() {
            coords[axis] = index % self.dims[axis];
            index /= self.dims[axis];
        }
        coords
    }

    /// Neighbor in +e_axis, respecting the boundary mode. `None` on an open
    /// edge.
    pub fn neighbor(&self, site: usize, axis: usize) -> Option<usize> {
        let mut coords = self.site_coords(site);
        if coords[axis] + 1 < self.dims[axis] {
            coords[axis] += 1;
        } else {
            match self.boundary {
                BoundaryMode::Open => return None,
                BoundaryMode::Periodic => coords[axis] = 0,
            }
        }
        Some(self.site_index(&coords))
    }

    /// Site shifted by an integer vector (periodic wrap); only meaningful on
    /// the torus.
    pub fn shifted_site(&self, site: usize, shift: &[i64]) -> usize {
        let coords = self.site_coords(site);
        let new: Vec<usize> = coords
            .iter()
            .zip(shift)
            .zip(&self.dims)
            .map(|((&c, &s), &l)| (c as i64 + s).rem_euclid(l as i64) as usize)
            .collect();
        self.site_index(&new)
    }

    /// Physical position of a site. Open mode: measured from the volume
    /// center (symmetric growth of |x|); periodic mode: fundamental domain
    /// [0, L·a) per axis.
    pub fn position(&self, site: usize) -> Vec<f64> {
        let coords = self.site_coords(site);
        match self.boundary {
            BoundaryMode::Open => coords
                .iter()
                .zip(&self.dims)
                .map(|(&c, &l)| self.spacing * (c as f64 - 0.5 * (l as f64 - 1.0)))
                .collect(),
            BoundaryMode::Periodic => coords
                .iter()
                .map(|&c| self.spacing * c as f64)
                .collect(),
        }
    }

    /// Unit-cell label of a site: floor(a·index) per axis.
    pub fn cell_of(&self, site: usize) -> Vec<i64> {
        self.site_coords(site)
            .iter()
            .map(|&c| (self.spacing * c as f64).floor() as i64)
            .collect()
    }

    /// Number of unit cells in the volume.
    pub fn num_cells(&self) -> usize {
        let q = (1.0 / self.spacing).round() as usize;
        self.dims.iter().map(|&l| l.div_ceil(q)).product()
    }

    /// All sites belonging to the cell with the given label.
    pub fn cell_sites(&self, label: &[i64]) -> Vec<usize> {
        (0..self.num_sites())
            .filter(|&s| self.cell_of(s) == label)
            .collect()
    }

    /// All cell labels, in lexicographic order.
    pub fn cell_labels(&self) -> Vec<Vec<i64>> {
        let mut labels: Vec<Vec<i64>> = (0..self.num_sites()).map(|s| self.cell_of(s)).collect();
        labels.sort();
        labels.dedup();
        labels
    }

    /// The distinguished cell carrying χ₀: the cell at the volume center in
    /// open mode (keeps boundary effects away from the trace window), the
    /// origin cell on the torus.
    pub fn reference_cell(&self) -> Vec<i64> {
        match self.boundary {
            BoundaryMode::Open => {
                let center: Vec<usize> = self.dims.iter().map(|&l| (l - 1) / 2).collect();
                self.cell_of(self.site_index(&center))
            }
            BoundaryMode::Periodic => vec![0; self.dims.len()],
        }
    }
}
