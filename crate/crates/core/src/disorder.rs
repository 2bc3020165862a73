//! Disorder ensembles: bounded random on-site potentials and link phases,
//! deterministic per-realization seeding, and the lattice translation action
//! on samples.
//!
//! Distributions are i.i.d. per site/link, hence translation invariant over
//! unit cells — the finite-volume surrogate of ergodicity. Bounded supports
//! keep the relative form bound of the negative part trivial and the ground
//! offset γ a single ensemble-wide constant.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryMode, LatticeGeometry};

/// SplitMix64 scrambler; the standard way to stretch one master seed into
/// decorrelated streams.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `index` under a master seed: master ⊕ scrambled
/// index, scrambled again. Documented so runs are reproducible from the
/// config alone.
pub fn realization_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

/// Uniform f64 in [0, 1) from the top 53 bits; bit-identical across
/// platforms.
fn u01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Distribution parameters of one disorder ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderModel {
    /// V₊ ~ uniform on [0, v_plus_max].
    pub v_plus_max: f64,
    /// V₋ ~ uniform on [0, v_minus_max]; the bounded negative part.
    pub v_minus_max: f64,
    /// Link phases ~ uniform on [-link_phase_amplitude, +link_phase_amplitude].
    pub link_phase_amplitude: f64,
    /// Uniform magnetic field strength (Landau-gauge Peierls phases on the
    /// xy-plane); requires dimension ≥ 2 and, on the torus, integer flux.
    pub b_field: f64,
}

impl DisorderModel {
    pub fn validate(&self, geometry: &LatticeGeometry) -> Result<()> {
        for (name, v) in [
            ("disorder.v_plus_max", self.v_plus_max),
            ("disorder.v_minus_max", self.v_minus_max),
            ("disorder.link_phase_amplitude", self.link_phase_amplitude),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Validation {
                    path: name.into(),
                    message: format!("must be finite and ≥ 0, got {v}"),
                });
            }
        }
        if self.b_field != 0.0 {
            if geometry.dimension() < 2 {
                return Err(Error::Validation {
                    path: "disorder.b_field".into(),
                    message: "a uniform magnetic field needs dimension ≥ 2".into(),
                });
            }
            if geometry.boundary() == BoundaryMode::Periodic {
                // flux through the torus cross-section must be an integer
                // number of quanta or magnetic translations fail to close
                let a = geometry.spacing();
                let (lx, ly) = (geometry.extents()[0] as f64, geometry.extents()[1] as f64);
                let quanta = self.b_field * a * a * lx * ly / std::f64::consts::TAU;
                if (quanta - quanta.round()).abs() > 1e-9 {
                    return Err(Error::Validation {
                        path: "disorder.b_field".into(),
                        message: format!(
                            "periodic mode requires B = 2πn/(LxLy a²); got {:.6} flux quanta",
                            quanta
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Ground offset γ = 1 + sup|V₋| + 2d/a², one constant for the whole
    /// ensemble, guaranteeing spectrum ≥ 1 after the shift.
    pub fn ground_offset(&self, geometry: &LatticeGeometry) -> f64 {
        let d = geometry.dimension() as f64;
        let a = geometry.spacing();
        1.0 + self.v_minus_max + 2.0 * d / (a * a)
    }

    /// Draw one realization. Sampling order is fixed (V₊ by site, V₋ by
    /// site, phases by direction then site) so a seed pins the sample
    /// bit-exactly.
    pub fn sample(&self, geometry: &LatticeGeometry, seed: u64) -> Realization {
        let n = geometry.num_sites();
        let d = geometry.dimension();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v_plus: Vec<f64> = (0..n).map(|_| self.v_plus_max * u01(&mut rng)).collect();
        let v_minus: Vec<f64> = (0..n).map(|_| self.v_minus_max * u01(&mut rng)).collect();
        let w = self.link_phase_amplitude;
        let link_phases: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..n).map(|_| w * (2.0 * u01(&mut rng) - 1.0)).collect())
            .collect();
        Realization {
            seed,
            v_plus,
            v_minus,
            link_phases,
            b_field: self.b_field,
            ground_offset: self.ground_offset(geometry),
        }
    }
}

/// One disorder sample ω: potentials, link phases, and the ensemble
/// constants it was drawn under. Link phases are stored on the forward
/// (+e_j) directed edge rooted at each site; the reverse edge carries the
/// negated phase by hermiticity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub seed: u64,
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
    /// `link_phases[axis][site]`: phase θ on the edge site → site + e_axis.
    pub link_phases: Vec<Vec<f64>>,
    pub b_field: f64,
    pub ground_offset: f64,
}

impl Realization {
    pub fn matches(&self, geometry: &LatticeGeometry) -> bool {
        let n = geometry.num_sites();
        self.v_plus.len() == n
            && self.v_minus.len() == n
            && self.link_phases.len() == geometry.dimension()
            && self.link_phases.iter().all(|p| p.len() == n)
    }

    /// Net on-site potential V = V₊ − V₋.
    pub fn potential(&self, site: usize) -> f64 {
        self.v_plus[site] - self.v_minus[site]
    }

    /// The translated sample τ(a)ω: all site-indexed data shifted so that
    /// the new value at site r is the old value at r − a. Torus only.
    pub fn translated(&self, geometry: &LatticeGeometry, shift: &[i64]) -> Result<Realization> {
        if geometry.boundary() != BoundaryMode::Periodic {
            return Err(Error::UnsupportedBoundary(
                "translation action needs periodic boundary".into(),
            ));
        }
        let n = geometry.num_sites();
        let neg: Vec<i64> = shift.iter().map(|&s| -s).collect();
        let source: Vec<usize> = (0..n).map(|r| geometry.shifted_site(r, &neg)).collect();
        let permute = |v: &[f64]| -> Vec<f64> { source.iter().map(|&s| v[s]).collect() };
        Ok(Realization {
            seed: self.seed,
            v_plus: permute(&self.v_plus),
            v_minus: permute(&self.v_minus),
            link_phases: self.link_phases.iter().map(|p| permute(p)).collect(),
            b_field: self.b_field,
            ground_offset: self.ground_offset,
        })
    }
}
