//! Experiment configuration: one TOML document determines everything a run
//! does, including every random draw. Unknown keys are rejected so a typo
//! cannot silently change an experiment.

use serde::{Deserialize, Serialize};

use crate::disorder::DisorderModel;
use crate::error::{Error, Result};
use crate::field::FieldProfile;
use crate::geometry::{BoundaryMode, LatticeGeometry};
use crate::liouville::{EquilibriumSpec, InverseTemperature, LiouvilleConfig};
use crate::propagator::PropagatorSchedule;
use crate::system::SystemEnsemble;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_suite")]
    pub suite: String,
    pub geometry: GeometryBlock,
    pub disorder: DisorderBlock,
    pub field: FieldBlock,
    pub propagator: PropagatorBlock,
    pub liouville: LiouvilleBlock,
}

fn default_suite() -> String {
    "smoke".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub dimension: usize,
    pub extent: Vec<usize>,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    pub boundary: BoundaryMode,
}

fn default_spacing() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderBlock {
    pub v_plus_max: f64,
    #[serde(default)]
    pub v_minus_max: f64,
    #[serde(default)]
    pub link_phase_amplitude: f64,
    #[serde(default)]
    pub b_field: f64,
    pub realizations: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldBlock {
    pub e: Vec<f64>,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorBlock {
    pub interval: [f64; 2],
    #[serde(default = "default_k0")]
    pub k0: u32,
    pub tolerance: f64,
    #[serde(default = "default_k_cap")]
    pub k_cap: u32,
}

fn default_k0() -> u32 {
    4
}

fn default_k_cap() -> u32 {
    crate::tol::K_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiouvilleBlock {
    pub beta: InverseTemperature,
    pub fermi_energy: f64,
    pub t_min: f64,
    #[serde(default = "default_quadrature_order")]
    pub quadrature_order: usize,
    #[serde(default = "default_table_subdivision")]
    pub table_subdivision: u32,
    pub t_grid: Vec<f64>,
}

fn default_quadrature_order() -> usize {
    8
}

fn default_table_subdivision() -> u32 {
    1024
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Validation {
            path: "<config>".into(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// All validation problems, itemized by field path. Empty = valid.
    pub fn validation_errors(&self) -> Vec<Error> {
        fn problem(errors: &mut Vec<Error>, path: &str, message: String) {
            errors.push(Error::Validation {
                path: path.into(),
                message,
            });
        }
        let mut errors = Vec::new();
        if self.geometry.dimension == 0 || self.geometry.dimension > 3 {
            problem(
                &mut errors,
                "geometry.dimension",
                format!("must be 1..=3, got {}", self.geometry.dimension),
            );
        }
        if self.geometry.extent.len() != self.geometry.dimension {
            problem(
                &mut errors,
                "geometry.extent",
                format!(
                    "needs {} entries, got {}",
                    self.geometry.dimension,
                    self.geometry.extent.len()
                ),
            );
        }
        if let Err(e) = LatticeGeometry::new(
            self.geometry.extent.clone(),
            self.geometry.spacing,
            self.geometry.boundary,
        ) {
            problem(&mut errors, "geometry", e.to_string());
        } else {
            let geometry = self.geometry_unchecked();
            if let Err(e) = self.disorder_model().validate(&geometry) {
                errors.push(e);
            }
        }
        if self.disorder.realizations == 0 {
            problem(&mut errors, "disorder.realizations", "need at least one realization".into());
        }
        if self.field.e.len() != self.geometry.dimension {
            problem(
                &mut errors,
                "field.e",
                format!(
                    "field vector needs {} entries, got {}",
                    self.geometry.dimension,
                    self.field.e.len()
                ),
            );
        }
        if !(self.field.eta > 0.0) || !self.field.eta.is_finite() {
            problem(
                &mut errors,
                "field.eta",
                format!("switching rate must be positive, got {}", self.field.eta),
            );
        }
        if let Err(e) = PropagatorSchedule::new(
            (self.propagator.interval[0], self.propagator.interval[1]),
            self.propagator.k0,
            self.propagator.tolerance,
            self.propagator.k_cap,
        ) {
            errors.push(e);
        }
        if let Err(e) = self.liouville.beta.validate() {
            errors.push(e);
        }
        if !(self.liouville.t_min < self.liouville.t_grid.iter().cloned().fold(0.0, f64::min).min(0.0)) {
            problem(
                &mut errors,
                "liouville.t_min",
                format!(
                    "must sit below min(t_grid ∪ {{0}}), got {}",
                    self.liouville.t_min
                ),
            );
        }
        if self.liouville.quadrature_order == 0 {
            problem(&mut errors, "liouville.quadrature_order", "need at least one node".into());
        }
        if self.liouville.table_subdivision == 0 {
            problem(&mut errors, "liouville.table_subdivision", "need at least one cell per unit time".into());
        }
        if !matches!(self.suite.as_str(), "smoke" | "acceptance") {
            problem(
                &mut errors,
                "suite",
                format!("unknown suite `{}` (expected smoke|acceptance)", self.suite),
            );
        }
        errors
    }

    pub fn validate(&self) -> Result<()> {
        match self.validation_errors().into_iter().next() {
            None => Ok(()),
            Some(e) => Err(e),
        }
    }

    fn geometry_unchecked(&self) -> LatticeGeometry {
        LatticeGeometry::new(
            self.geometry.extent.clone(),
            self.geometry.spacing,
            self.geometry.boundary,
        )
        .expect("validated")
    }

    pub fn geometry(&self) -> Result<LatticeGeometry> {
        LatticeGeometry::new(
            self.geometry.extent.clone(),
            self.geometry.spacing,
            self.geometry.boundary,
        )
    }

    pub fn disorder_model(&self) -> DisorderModel {
        DisorderModel {
            v_plus_max: self.disorder.v_plus_max,
            v_minus_max: self.disorder.v_minus_max,
            link_phase_amplitude: self.disorder.link_phase_amplitude,
            b_field: self.disorder.b_field,
        }
    }

    pub fn field_profile(&self) -> Result<FieldProfile> {
        FieldProfile::new(self.field.e.clone(), self.field.eta)
    }

    pub fn schedule(&self) -> Result<PropagatorSchedule> {
        PropagatorSchedule::new(
            (self.propagator.interval[0], self.propagator.interval[1]),
            self.propagator.k0,
            self.propagator.tolerance,
            self.propagator.k_cap,
        )
    }

    pub fn equilibrium_spec(&self) -> EquilibriumSpec {
        EquilibriumSpec {
            beta: self.liouville.beta,
            fermi_energy: self.liouville.fermi_energy,
        }
    }

    pub fn liouville_config(&self) -> LiouvilleConfig {
        let window_end = self
            .liouville
            .t_grid
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
            + 0.25;
        LiouvilleConfig {
            t_min: self.liouville.t_min,
            window_end,
            panel_length: 0.5,
            nodes_per_panel: self.liouville.quadrature_order,
            table_subdivision: self.liouville.table_subdivision,
            requested_accuracy: None,
        }
    }

    /// The seeded ensemble this config describes; `seed_override` replaces
    /// the master seed (the CLI `--seed` flag).
    pub fn system_ensemble(&self, seed_override: Option<u64>) -> Result<SystemEnsemble> {
        SystemEnsemble::sample(
            self.geometry()?,
            self.disorder_model(),
            self.field_profile()?,
            seed_override.unwrap_or(self.disorder.master_seed),
            self.disorder.realizations,
        )
    }

    /// The reference desk configuration every acceptance run starts from.
    pub fn reference() -> Self {
        Self::from_toml_str(REFERENCE_TOML).expect("reference config parses")
    }
}

/// Reference configuration: d=1, L=16, open, unit spacing, V₊ uniform on
/// [0,1], V₋ = 0, B = 0, E = (0.1), η = 1, M = 8, interval [-2, 0].
pub const REFERENCE_TOML: &str = r#"
suite = "acceptance"

[geometry]
dimension = 1
extent = [16]
spacing = 1.0
boundary = "open"

[disorder]
v_plus_max = 1.0
v_minus_max = 0.0
link_phase_amplitude = 0.0
b_field = 0.0
realizations = 8
master_seed = 24245

[field]
e = [0.1]
eta = 1.0

[propagator]
interval = [-2.0, 0.0]
k0 = 4
tolerance = 6e-6
k_cap = 16384

[liouville]
beta = "inf"
fermi_energy = 4.0
t_min = -8.0
quadrature_order = 8
table_subdivision = 1024
t_grid = [-0.5, -0.25, 0.0]
"#;
