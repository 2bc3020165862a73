//! A seeded family of disorder realizations sharing one geometry and one
//! field profile — the unit every ensemble-level computation runs over.

use crate::disorder::{realization_seed, DisorderModel, Realization};
use crate::error::Result;
use crate::field::FieldProfile;
use crate::geometry::LatticeGeometry;
use crate::hamiltonian::DrivenSystem;
use crate::linalg::HermitianOperator;

#[derive(Debug, Clone)]
pub struct SystemEnsemble {
    pub geometry: LatticeGeometry,
    pub disorder: DisorderModel,
    pub field: FieldProfile,
    pub master_seed: u64,
    realizations: Vec<Realization>,
}

impl SystemEnsemble {
    /// Sample `count` realizations under the documented seed derivation
    /// (master ⊕ index hash).
    pub fn sample(
        geometry: LatticeGeometry,
        disorder: DisorderModel,
        field: FieldProfile,
        master_seed: u64,
        count: usize,
    ) -> Result<Self> {
        disorder.validate(&geometry)?;
        if field.dimension() != geometry.dimension() {
            return Err(crate::error::Error::DimensionMismatch(format!(
                "field dimension {} vs geometry {}",
                field.dimension(),
                geometry.dimension()
            )));
        }
        let realizations = (0..count)
            .map(|i| disorder.sample(&geometry, realization_seed(master_seed, i as u64)))
            .collect();
        Ok(Self {
            geometry,
            disorder,
            field,
            master_seed,
            realizations,
        })
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.realizations.iter().map(|r| r.seed).collect()
    }

    pub fn realization(&self, index: usize) -> &Realization {
        &self.realizations[index]
    }

    pub fn realizations(&self) -> &[Realization] {
        &self.realizations
    }

    /// The driven time-dependent system of realization `index`.
    pub fn driven(&self, index: usize) -> DrivenSystem {
        DrivenSystem::new(
            self.geometry.clone(),
            self.realizations[index].clone(),
            self.field.clone(),
        )
        .expect("validated at sampling")
    }

    /// Per-realization H(t) across the ensemble.
    pub fn hamiltonians(&self, t: f64) -> Vec<HermitianOperator> {
        crate::map_indexed(self.len(), |i| self.driven(i).hamiltonian(t))
    }
}
