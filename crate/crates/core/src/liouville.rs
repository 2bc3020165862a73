//! Density-matrix dynamics under the adiabatically switched field.
//!
//! The equilibrium state is a bounded function of the undriven operator,
//! ζ_ω = f(H_ω) (Fermi-Dirac at finite β, the Fermi projection at β = ∞).
//! Its driven image ζ_ω(t) = G(t) ζ_ω G(t)* feeds the Duhamel integral
//!
//!   ρ(t) = ζ(t) − i ∫_{-∞}^t dr e^{η r_-} 𝒰(t,r)([E·x, ζ(r)]),
//!
//! which this module evaluates with composite Gauss panels over a
//! truncated lower limit (the dropped tail is bounded analytically by
//! e^{η t_min}/η · ‖[E·x, ζ]‖₂ and reported). The same solver exposes the
//! limit representation ρ(t) = lim_{s→-∞} 𝒰(t,s)(ζ), the quadratic forms
//! built from the left/right generator square roots, and the
//! finite-difference residuals of the weak Liouville equation. All form
//! pairings use the translation-closed inner product, under which the
//! equation is an exact operator identity at finite volume and every
//! residual measures pure numerics (propagator, quadrature, truncation).

use serde::{Deserialize, Serialize};

use crate::covariant::{apply_hl_sqrt, apply_hr_sqrt, CovariantEnsemble, EnsembleConjugation};
use crate::error::{Error, Result};
use crate::geometry::BoundaryMode;
use crate::hamiltonian::{build_hamiltonian, gauge_unitary};
use crate::linalg::{cr, CMatrix, HermitianOperator, C64, IM};
use crate::propagator::{PropagatorTable, StepRule};
use crate::quadrature::gauss_legendre_on;
use crate::system::SystemEnsemble;

/// β ∈ (0, ∞]: finite inverse temperature or the zero-temperature
/// projection. Serializes as a number or the string "inf".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BetaRepr", into = "BetaRepr")]
pub enum InverseTemperature {
    Finite(f64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BetaRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<BetaRepr> for InverseTemperature {
    type Error = String;

    fn try_from(repr: BetaRepr) -> std::result::Result<Self, String> {
        match repr {
            BetaRepr::Number(x) if x.is_infinite() && x > 0.0 => Ok(Self::Infinite),
            BetaRepr::Number(x) => Ok(Self::Finite(x)),
            BetaRepr::Text(s) if matches!(s.as_str(), "inf" | "infinite" | "∞") => {
                Ok(Self::Infinite)
            }
            BetaRepr::Text(s) => Err(format!("unrecognized inverse temperature `{s}`")),
        }
    }
}

impl From<InverseTemperature> for BetaRepr {
    fn from(beta: InverseTemperature) -> Self {
        match beta {
            InverseTemperature::Finite(b) => BetaRepr::Number(b),
            InverseTemperature::Infinite => BetaRepr::Text("inf".into()),
        }
    }
}

impl InverseTemperature {
    pub fn validate(&self) -> Result<()> {
        if let InverseTemperature::Finite(b) = self {
            if !(*b > 0.0) || !b.is_finite() {
                return Err(Error::Validation {
                    path: "liouville.beta".into(),
                    message: format!("inverse temperature must be positive, got {b}"),
                });
            }
        }
        Ok(())
    }
}

/// Equilibrium specification: occupation function of the undriven operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSpec {
    pub beta: InverseTemperature,
    pub fermi_energy: f64,
}

/// Ties at the Fermi energy (β = ∞) are resolved by including eigenvalues
/// up to E_F + this margin, so near-degeneracies behave deterministically.
pub const FERMI_TIE_MARGIN: f64 = 1e-12;

impl EquilibriumSpec {
    pub fn zero_temperature(fermi_energy: f64) -> Self {
        Self {
            beta: InverseTemperature::Infinite,
            fermi_energy,
        }
    }

    pub fn thermal(beta: f64, fermi_energy: f64) -> Self {
        Self {
            beta: InverseTemperature::Finite(beta),
            fermi_energy,
        }
    }

    /// Occupation f(λ) ∈ [0, 1].
    pub fn occupation(&self, lambda: f64) -> f64 {
        match self.beta {
            InverseTemperature::Finite(beta) => {
                1.0 / (1.0 + (beta * (lambda - self.fermi_energy)).exp())
            }
            InverseTemperature::Infinite => {
                if lambda <= self.fermi_energy + FERMI_TIE_MARGIN {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// How a density ensemble was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Equilibrium,
    GaugeEvolved,
    Duhamel,
    Limit,
}

/// A time-stamped ensemble of density matrices.
#[derive(Debug, Clone)]
pub struct DensityEnsemble {
    pub ensemble: CovariantEnsemble,
    pub time: f64,
    pub provenance: Provenance,
}

impl DensityEnsemble {
    /// Largest hermiticity defect across realizations (Frobenius, relative
    /// to the matrix norm).
    pub fn hermiticity_defect(&self) -> f64 {
        self.ensemble
            .matrices()
            .iter()
            .map(|m| {
                let scale = m.norm().max(f64::MIN_POSITIVE);
                (m - m.adjoint()).norm() / scale
            })
            .fold(0.0, f64::max)
    }
}

/// ζ = f(H) per realization from the spectral factorizations of the
/// supplied (undriven) operators. The result satisfies 0 ≤ ζ ≤ I by
/// construction of the occupation; at β = ∞ it is an orthogonal projection.
pub fn equilibrium_state(
    spec: &EquilibriumSpec,
    sys: &SystemEnsemble,
    hams: &[HermitianOperator],
) -> Result<DensityEnsemble> {
    spec.beta.validate()?;
    if hams.len() != sys.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} Hamiltonians vs {} realizations",
            hams.len(),
            sys.len()
        )));
    }
    let mats: Vec<CMatrix> = crate::map_indexed(sys.len(), |i| {
        hams[i].map_spectrum(|l| cr(spec.occupation(l)))
    });
    Ok(DensityEnsemble {
        ensemble: CovariantEnsemble::from_matrices(sys.geometry.clone(), sys.seeds(), mats)?,
        time: f64::NEG_INFINITY,
        provenance: Provenance::Equilibrium,
    })
}

/// Position operator component diag(x_axis), measured from the volume
/// center; open boundary only (there is no globally consistent x on the
/// torus).
pub fn position_operator(
    geometry: &crate::geometry::LatticeGeometry,
    axis: usize,
) -> Result<CMatrix> {
    if geometry.boundary() != BoundaryMode::Open {
        return Err(Error::UnsupportedBoundary(
            "position operator needs open boundary".into(),
        ));
    }
    let n = geometry.num_sites();
    let mut m = CMatrix::zeros(n, n);
    for site in 0..n {
        m[(site, site)] = cr(geometry.position(site)[axis]);
    }
    Ok(m)
}

/// [x_axis, A] per realization.
pub fn position_commutator(a: &CovariantEnsemble, axis: usize) -> Result<CovariantEnsemble> {
    let x = position_operator(a.geometry(), axis)?;
    Ok(a.map(|m| &x * m - m * &x))
}

/// The two finiteness statistics behind the form-core membership of the
/// state: (‖H^{1/2}[x_k, ζ]‖₂ cell estimate, E‖x_k² ζ χ₀‖₂²). Reported
/// across volumes; boundedness in L is the finite-volume shadow of the
/// key hypothesis.
pub fn q0_check(
    zeta: &DensityEnsemble,
    hams: &[HermitianOperator],
    axis: usize,
) -> Result<(f64, f64)> {
    let commutator = position_commutator(&zeta.ensemble, axis)?;
    let first = apply_hl_sqrt(&commutator, hams)?.norm2_cell();
    let geometry = zeta.ensemble.geometry();
    let x = position_operator(geometry, axis)?;
    let x2 = &x * &x;
    let chi = crate::covariant::CellProjector::reference(geometry);
    let per: Vec<f64> = crate::map_indexed(zeta.ensemble.len(), |i| {
        let m = &x2 * zeta.ensemble.matrix(i);
        chi.sites()
            .iter()
            .map(|&c| m.column(c).norm_squared())
            .sum::<f64>()
    });
    let second = per.iter().sum::<f64>() / per.len() as f64;
    Ok((first, second))
}

/// Quadratic form ⟨⟨H(t)^{1/2}A, H(t)^{1/2}B⟩⟩ (left generator),
/// translation-closed pairing.
pub fn form_hl(
    a: &CovariantEnsemble,
    b: &CovariantEnsemble,
    hams: &[HermitianOperator],
) -> Result<C64> {
    apply_hl_sqrt(a, hams)?.inner_closed(&apply_hl_sqrt(b, hams)?)
}

/// Right-generator form ⟨⟨H_R(t)^{1/2}A, H_R(t)^{1/2}B⟩⟩.
pub fn form_hr(
    a: &CovariantEnsemble,
    b: &CovariantEnsemble,
    hams: &[HermitianOperator],
) -> Result<C64> {
    apply_hr_sqrt(a, hams)?.inner_closed(&apply_hr_sqrt(b, hams)?)
}

/// 𝕃_t(A, B) = ℍ_L − ℍ_R: the weak form of the commutator with H(t).
pub fn form_l(
    a: &CovariantEnsemble,
    b: &CovariantEnsemble,
    hams: &[HermitianOperator],
) -> Result<C64> {
    Ok(form_hl(a, b, hams)? - form_hr(a, b, hams)?)
}

/// Accuracy/geometry knobs of the Duhamel solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleConfig {
    /// Truncated lower limit of the switching integral (must sit below
    /// min(t, 0) for every queried t).
    pub t_min: f64,
    /// Latest time the solver will be asked about.
    pub window_end: f64,
    /// Target panel length of the composite Gauss rule in r.
    pub panel_length: f64,
    /// Gauss nodes per panel.
    pub nodes_per_panel: usize,
    /// Subdivisions per unit time of the per-realization propagator tables.
    pub table_subdivision: u32,
    /// Optional accuracy request; a truncation bound above it produces a
    /// warning record on results.
    pub requested_accuracy: Option<f64>,
}

impl Default for LiouvilleConfig {
    fn default() -> Self {
        Self {
            t_min: -8.0,
            window_end: 0.25,
            panel_length: 0.5,
            nodes_per_panel: 8,
            table_subdivision: 1024,
            requested_accuracy: None,
        }
    }
}

/// Outcome of one Duhamel evaluation.
#[derive(Debug, Clone)]
pub struct DuhamelOutcome {
    pub rho: DensityEnsemble,
    /// Analytic bound on the dropped tail: e^{η t_min}/η · ‖[E·x, ζ]‖₂.
    pub truncation_bound: f64,
    pub warning: Option<String>,
}

/// Outcome of the limit representation along a decreasing s-list.
#[derive(Debug, Clone)]
pub struct LimitOutcome {
    pub rho: DensityEnsemble,
    /// ‖𝒰(t,s_{i+1})(ζ) − 𝒰(t,s_i)(ζ)‖₂ between consecutive s values.
    pub gaps: Vec<f64>,
    /// ‖𝒰(t,s)(ζ) − 𝒰(t,s)(ζ(s))‖₂ along the list: the two limits in the
    /// representation must merge.
    pub gauge_agreement: Vec<f64>,
    /// Set when the gaps fail to decrease.
    pub diverging: bool,
}

/// Per-ensemble Liouville solver: one midpoint-rule propagator table per
/// realization over [t_min, window_end], the equilibrium state, and the
/// Duhamel/limit machinery on top.
pub struct DuhamelSolver {
    sys: SystemEnsemble,
    spec: EquilibriumSpec,
    cfg: LiouvilleConfig,
    tables: Vec<PropagatorTable>,
    zeta: DensityEnsemble,
    commutator_norm: f64,
}

impl DuhamelSolver {
    pub fn new(sys: SystemEnsemble, spec: EquilibriumSpec, cfg: LiouvilleConfig) -> Result<Self> {
        spec.beta.validate()?;
        if sys.geometry.boundary() != BoundaryMode::Open {
            return Err(Error::UnsupportedBoundary(
                "the driven dynamics use the position operator; open boundary required".into(),
            ));
        }
        if !(cfg.t_min < cfg.window_end) {
            return Err(Error::Validation {
                path: "liouville.t_min".into(),
                message: "t_min must precede the window end".into(),
            });
        }
        // undriven operators define the equilibrium state
        let zero_shift = vec![0.0; sys.geometry.dimension()];
        let base: Vec<HermitianOperator> = crate::map_indexed(sys.len(), |i| {
            build_hamiltonian(&sys.geometry, sys.realization(i), &zero_shift)
                .expect("validated at sampling")
        });
        let zeta = equilibrium_state(&spec, &sys, &base)?;
        let tables: Vec<PropagatorTable> = crate::map_indexed(sys.len(), |i| {
            PropagatorTable::build(
                sys.driven(i),
                cfg.t_min,
                cfg.window_end,
                cfg.table_subdivision,
                StepRule::Midpoint,
            )
        });
        let commutator_norm = bare_field_commutator(&sys, &zeta)?.norm2_closed();
        Ok(Self {
            sys,
            spec,
            cfg,
            tables,
            zeta,
            commutator_norm,
        })
    }

    pub fn system(&self) -> &SystemEnsemble {
        &self.sys
    }

    pub fn config(&self) -> &LiouvilleConfig {
        &self.cfg
    }

    pub fn spec(&self) -> &EquilibriumSpec {
        &self.spec
    }

    /// ζ: the equilibrium state of the undriven operators.
    pub fn zeta(&self) -> &DensityEnsemble {
        &self.zeta
    }

    /// ζ(t) = G(t) ζ G(t)*: gauge-evolved state; spectrum preserved
    /// exactly since G(t) is a diagonal unitary.
    pub fn zeta_at(&self, t: f64) -> DensityEnsemble {
        let g = gauge_unitary(&self.sys.geometry, &self.sys.field, t);
        DensityEnsemble {
            ensemble: self.zeta.ensemble.map(|m| &g * m * g.adjoint()),
            time: t,
            provenance: Provenance::GaugeEvolved,
        }
    }

    /// [E·x, ζ(t)] with the bare amplitude vector E (the e^{ηr} switching
    /// factor stays outside, in the integrand weight).
    pub fn switched_commutator(&self, t: f64) -> Result<CovariantEnsemble> {
        let zeta_t = self.zeta_at(t);
        let e = &self.sys.field.amplitude;
        let mut x_e = CMatrix::zeros(self.sys.geometry.num_sites(), self.sys.geometry.num_sites());
        for (axis, &amp) in e.iter().enumerate() {
            if amp != 0.0 {
                x_e += position_operator(&self.sys.geometry, axis)? * cr(amp);
            }
        }
        Ok(zeta_t.ensemble.map(|m| &x_e * m - m * &x_e))
    }

    /// The conjugation superoperator 𝒰(t, s) assembled from the tables.
    pub fn conjugation(&self, t: f64, s: f64) -> Result<EnsembleConjugation> {
        self.check_window(t)?;
        self.check_window(s)?;
        let us: Vec<CMatrix> =
            crate::map_indexed(self.sys.len(), |i| self.tables[i].matrix(t, s));
        EnsembleConjugation::new(self.sys.geometry.clone(), self.sys.seeds(), us)
    }

    fn check_window(&self, t: f64) -> Result<()> {
        let (lo, hi) = (self.cfg.t_min, self.cfg.window_end);
        if t < lo - 1e-12 || t > hi + 1e-12 {
            return Err(Error::Validation {
                path: "liouville.window".into(),
                message: format!("time {t} outside the table window [{lo}, {hi}]"),
            });
        }
        Ok(())
    }

    /// The Duhamel representation at time t.
    pub fn rho(&self, t: f64) -> Result<DuhamelOutcome> {
        self.check_window(t)?;
        if !(self.cfg.t_min < t.min(0.0)) {
            return Err(Error::Validation {
                path: "liouville.t_min".into(),
                message: format!("t_min = {} must sit below min(t, 0) = {}", self.cfg.t_min, t.min(0.0)),
            });
        }
        let eta = self.sys.field.rate;
        let truncation_bound = (eta * self.cfg.t_min).exp() / eta * self.commutator_norm;
        let warning = self.cfg.requested_accuracy.and_then(|acc| {
            (truncation_bound > acc).then(|| {
                format!(
                    "truncation bound {truncation_bound:.3e} exceeds requested accuracy {acc:.3e}; deepen t_min"
                )
            })
        });

        let span = t - self.cfg.t_min;
        let panels = (span / self.cfg.panel_length).ceil().max(1.0) as usize;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in 0..panels {
            let a = self.cfg.t_min + span * p as f64 / panels as f64;
            let b = self.cfg.t_min + span * (p + 1) as f64 / panels as f64;
            let (xs, ws) = gauss_legendre_on(self.cfg.nodes_per_panel, a, b);
            nodes.extend(xs);
            weights.extend(ws);
        }
        // per-realization accumulation of the switched integral
        let zeta_t = self.zeta_at(t);
        let e = &self.sys.field.amplitude;
        let n = self.sys.geometry.num_sites();
        let mut x_e = CMatrix::zeros(n, n);
        for (axis, &amp) in e.iter().enumerate() {
            if amp != 0.0 {
                x_e += position_operator(&self.sys.geometry, axis)? * cr(amp);
            }
        }
        let g_at = |r: f64| gauge_unitary(&self.sys.geometry, &self.sys.field, r);
        let gauges: Vec<CMatrix> = nodes.iter().map(|&r| g_at(r)).collect();
        let mats: Vec<CMatrix> = crate::map_indexed(self.sys.len(), |i| {
            let table = &self.tables[i];
            let p_t = table.matrix(t, self.cfg.t_min);
            let zeta_i = self.zeta.ensemble.matrix(i);
            let mut acc = CMatrix::zeros(n, n);
            for ((&r, &w), g_r) in nodes.iter().zip(&weights).zip(&gauges) {
                let ramp = (eta * r.min(0.0)).exp();
                if ramp * w == 0.0 {
                    continue;
                }
                let zeta_r = g_r * zeta_i * g_r.adjoint();
                let commutator = &x_e * &zeta_r - &zeta_r * &x_e;
                let p_r = table.matrix(r, self.cfg.t_min);
                let u_tr = &p_t * p_r.adjoint();
                acc += &u_tr * commutator * u_tr.adjoint() * cr(w * ramp);
            }
            zeta_t.ensemble.matrix(i) - acc * IM
        });
        Ok(DuhamelOutcome {
            rho: DensityEnsemble {
                ensemble: CovariantEnsemble::from_matrices(
                    self.sys.geometry.clone(),
                    self.sys.seeds(),
                    mats,
                )?,
                time: t,
                provenance: Provenance::Duhamel,
            },
            truncation_bound,
            warning,
        })
    }

    /// The limit representation ρ(t) = lim_{s→-∞} 𝒰(t,s)(ζ), probed along
    /// a decreasing list of s values (all within the table window).
    pub fn rho_by_limit(&self, t: f64, s_list: &[f64]) -> Result<LimitOutcome> {
        if s_list.len() < 2 || !s_list.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::Validation {
                path: "liouville.s_list".into(),
                message: "need a strictly decreasing list of at least two s values".into(),
            });
        }
        let mut previous: Option<CovariantEnsemble> = None;
        let mut gaps = Vec::new();
        let mut gauge_agreement = Vec::new();
        let mut last = None;
        for &s in s_list {
            let conj = self.conjugation(t, s)?;
            let a_s = conj.apply(&self.zeta.ensemble)?;
            let b_s = conj.apply(&self.zeta_at(s).ensemble)?;
            gauge_agreement.push(a_s.sub(&b_s)?.norm2_closed());
            if let Some(prev) = &previous {
                gaps.push(a_s.sub(prev)?.norm2_closed());
            }
            previous = Some(a_s.clone());
            last = Some(a_s);
        }
        let diverging = gaps.windows(2).any(|w| w[1] >= w[0]);
        Ok(LimitOutcome {
            rho: DensityEnsemble {
                ensemble: last.expect("nonempty list"),
                time: t,
                provenance: Provenance::Limit,
            },
            gaps,
            gauge_agreement,
            diverging,
        })
    }

    /// |i ∂_t ⟨⟨A, ρ(t)⟩⟩ − 𝕃_t(A, ρ(t))| with a central difference at
    /// step h: the weak Liouville equation as a residual.
    pub fn liouville_residual(&self, a: &CovariantEnsemble, t: f64, h: f64) -> Result<f64> {
        assert!(h > 0.0);
        let plus = self.rho(t + h)?.rho.ensemble;
        let minus = self.rho(t - h)?.rho.ensemble;
        let fd = (a.inner_closed(&plus)? - a.inner_closed(&minus)?) / cr(2.0 * h);
        let center = self.rho(t)?.rho.ensemble;
        let hams = self.sys.hamiltonians(t);
        let form = form_l(a, &center, &hams)?;
        Ok((IM * fd - form).norm())
    }

    /// |i ∂_t ⟨⟨A, 𝒰(t,r)(B)⟩⟩ − 𝕃_t(A, 𝒰(t,r)(B))|.
    pub fn propagation_derivative_residual_t(
        &self,
        a: &CovariantEnsemble,
        b: &CovariantEnsemble,
        t: f64,
        r: f64,
        h: f64,
    ) -> Result<f64> {
        assert!(h > 0.0);
        let val = |time: f64| -> Result<C64> {
            a.inner_closed(&self.conjugation(time, r)?.apply(b)?)
        };
        let fd = (val(t + h)? - val(t - h)?) / cr(2.0 * h);
        let center = self.conjugation(t, r)?.apply(b)?;
        let hams = self.sys.hamiltonians(t);
        Ok((IM * fd - form_l(a, &center, &hams)?).norm())
    }

    /// |i ∂_r ⟨⟨B, 𝒰(t,r)(A)⟩⟩ + 𝕃_r(𝒰(r,t)(B), A)|: the r-derivative
    /// carries the opposite sign.
    pub fn propagation_derivative_residual_r(
        &self,
        a: &CovariantEnsemble,
        b: &CovariantEnsemble,
        t: f64,
        r: f64,
        h: f64,
    ) -> Result<f64> {
        assert!(h > 0.0);
        let val = |time: f64| -> Result<C64> {
            b.inner_closed(&self.conjugation(t, time)?.apply(a)?)
        };
        let fd = (val(r + h)? - val(r - h)?) / cr(2.0 * h);
        let pulled = self.conjugation(r, t)?.apply(b)?;
        let hams = self.sys.hamiltonians(r);
        Ok((IM * fd + form_l(&pulled, a, &hams)?).norm())
    }

    /// Uniqueness surrogate: a homogeneous solution v(t) = 𝒰(t, s₀)(V₀)
    /// pulled back to s₀ must pair constantly with every test element;
    /// returns the largest deviation of ⟨⟨A, 𝒰(s₀,t)(v(t))⟩⟩ from its
    /// value at t = s₀ over the probe times. The zero solution stays zero
    /// identically.
    pub fn uniqueness_deviation(
        &self,
        a: &CovariantEnsemble,
        seed_element: &CovariantEnsemble,
        s0: f64,
        times: &[f64],
    ) -> Result<f64> {
        let reference = a.inner_closed(seed_element)?;
        let mut worst: f64 = 0.0;
        for &t in times {
            let v_t = self.conjugation(t, s0)?.apply(seed_element)?;
            let back = self.conjugation(s0, t)?.apply(&v_t)?;
            worst = worst.max((a.inner_closed(&back)? - reference).norm());
        }
        Ok(worst)
    }
}

/// ‖[E·x, ζ]‖ input of the truncation bound (bare field vector, undriven
/// state).
fn bare_field_commutator(
    sys: &SystemEnsemble,
    zeta: &DensityEnsemble,
) -> Result<CovariantEnsemble> {
    let n = sys.geometry.num_sites();
    let mut x_e = CMatrix::zeros(n, n);
    for (axis, &amp) in sys.field.amplitude.iter().enumerate() {
        if amp != 0.0 {
            x_e += position_operator(&sys.geometry, axis)? * cr(amp);
        }
    }
    Ok(zeta.ensemble.map(|m| &x_e * m - m * &x_e))
}

/// The standard dictionary of test elements: two localized cell
/// projectors, two smooth spectral bumps of each realization's operator,
/// and a smoothed position commutator. All lie in the finite-volume form
/// core by construction.
pub fn test_dictionary(
    sys: &SystemEnsemble,
    hams: &[HermitianOperator],
) -> Result<Vec<CovariantEnsemble>> {
    let geometry = &sys.geometry;
    let chi = crate::covariant::CellProjector::reference(geometry);
    let n = geometry.num_sites();
    let mut dict = Vec::new();
    dict.push(CovariantEnsemble::constant(
        geometry.clone(),
        sys.seeds(),
        chi.matrix(n),
    )?);
    // a second localized projector, one cell over from the reference
    let mut neighbor_label = geometry.reference_cell();
    neighbor_label[0] += 1;
    let neighbor = crate::covariant::CellProjector::new(geometry, neighbor_label);
    if neighbor.site_count() > 0 {
        dict.push(CovariantEnsemble::constant(
            geometry.clone(),
            sys.seeds(),
            neighbor.matrix(n),
        )?);
    }
    // smooth bumps centered mid-spectrum, two widths
    let (lo, hi) = hams
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| {
            (lo.min(h.min_eigenvalue()), hi.max(h.max_eigenvalue()))
        });
    let center = 0.5 * (lo + hi);
    let spread = (hi - lo).max(1e-6);
    let mut first_bump = None;
    for frac in [0.25, 0.1] {
        let width = frac * spread;
        let bump = move |l: f64| cr((-((l - center) / width).powi(2)).exp());
        let bumps: Vec<CMatrix> = hams.iter().map(|h| h.map_spectrum(bump)).collect();
        let ens = CovariantEnsemble::from_matrices(geometry.clone(), sys.seeds(), bumps)?;
        if first_bump.is_none() {
            first_bump = Some(ens.clone());
        }
        dict.push(ens);
    }
    // smoothed position commutator [x_0, g(H)]
    dict.push(position_commutator(&first_bump.expect("bump built"), 0)?);
    Ok(dict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderModel;
    use crate::field::FieldProfile;
    use crate::geometry::LatticeGeometry;
    use approx::assert_relative_eq;

    fn ensemble(l: usize, e: f64, m: usize, seed: u64) -> SystemEnsemble {
        let g = LatticeGeometry::open_unit(vec![l]).unwrap();
        let model = DisorderModel {
            v_plus_max: 1.0,
            v_minus_max: 0.0,
            link_phase_amplitude: 0.0,
            b_field: 0.0,
        };
        SystemEnsemble::sample(g, model, FieldProfile::new(vec![e], 1.0).unwrap(), seed, m)
            .unwrap()
    }

    fn base_hams(sys: &SystemEnsemble) -> Vec<HermitianOperator> {
        let zero = vec![0.0; sys.geometry.dimension()];
        (0..sys.len())
            .map(|i| build_hamiltonian(&sys.geometry, sys.realization(i), &zero).unwrap())
            .collect()
    }

    #[test]
    fn equilibrium_extremes_and_projection() {
        let sys = ensemble(6, 0.1, 3, 1);
        let hams = base_hams(&sys);
        let min = hams.iter().map(|h| h.min_eigenvalue()).fold(f64::INFINITY, f64::min);
        let max = hams.iter().map(|h| h.max_eigenvalue()).fold(0.0, f64::max);
        // E_F below the spectrum: ζ = 0; above: ζ = I
        let zero = equilibrium_state(&EquilibriumSpec::zero_temperature(min - 1.0), &sys, &hams)
            .unwrap();
        assert!(zero.ensemble.norm_inf() < 1e-14);
        let one = equilibrium_state(&EquilibriumSpec::zero_temperature(max + 1.0), &sys, &hams)
            .unwrap();
        let id = CovariantEnsemble::identity_element(sys.geometry.clone(), sys.seeds());
        assert!(one.ensemble.sub(&id).unwrap().norm2_closed() < 1e-14);
        // mid-spectrum projection squares to itself
        let spec = EquilibriumSpec::zero_temperature(0.5 * (min + max));
        let p = equilibrium_state(&spec, &sys, &hams).unwrap();
        let p2 = p.ensemble.zip(&p.ensemble, |a, b| a * b).unwrap();
        assert!(p2.sub(&p.ensemble).unwrap().norm2_closed() < 1e-12);
        // occupations stay inside [0, 1]
        assert!(p.ensemble.norm_inf() <= 1.0 + 1e-12);
        assert!(p.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn single_site_half_filling() {
        // 1-site H = [E_F] at β = 2: ζ = [1/2]
        let g = LatticeGeometry::open_unit(vec![1]).unwrap();
        let model = DisorderModel {
            v_plus_max: 0.0,
            v_minus_max: 0.0,
            link_phase_amplitude: 0.0,
            b_field: 0.0,
        };
        let sys = SystemEnsemble::sample(
            g,
            model,
            FieldProfile::new(vec![0.0], 1.0).unwrap(),
            1,
            1,
        )
        .unwrap();
        let hams = base_hams(&sys);
        let ef = hams[0].matrix()[(0, 0)].re;
        let spec = EquilibriumSpec::thermal(2.0, ef);
        let z = equilibrium_state(&spec, &sys, &hams).unwrap();
        assert_relative_eq!(z.ensemble.matrix(0)[(0, 0)].re, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn gauge_evolution_preserves_spectrum_and_matches_driven_equilibrium() {
        let sys = ensemble(8, 0.3, 3, 2);
        let solver = DuhamelSolver::new(
            sys.clone(),
            EquilibriumSpec::thermal(2.0, 4.0),
            LiouvilleConfig {
                t_min: -4.0,
                window_end: 0.25,
                table_subdivision: 128,
                ..Default::default()
            },
        )
        .unwrap();
        let z0 = solver.zeta();
        let zt = solver.zeta_at(0.0);
        // eigenvalues preserved exactly under the diagonal unitary
        for i in 0..sys.len() {
            let e0 = HermitianOperator::new(z0.ensemble.matrix(i).clone()).unwrap();
            let et = HermitianOperator::new(zt.ensemble.matrix(i).clone()).unwrap();
            for (a, b) in e0
                .eigensystem()
                .values
                .iter()
                .zip(&et.eigensystem().values)
            {
                assert!((a - b).abs() < 1e-12);
            }
        }
        // two independent constructions of ζ(t): gauge conjugation vs
        // equilibrium state of H(t)
        let hams_t = sys.hamiltonians(0.0);
        let direct = equilibrium_state(solver.spec(), &sys, &hams_t).unwrap();
        let diff = zt.ensemble.sub(&direct.ensemble).unwrap().norm2_closed();
        assert!(diff <= 1e-10, "route disagreement {diff:.3e}");
        // t → −∞: F → 0, ζ(t) → ζ
        let deep = solver.zeta_at(-200.0);
        assert!(deep.ensemble.sub(&z0.ensemble).unwrap().norm2_closed() < 1e-12);
    }

    #[test]
    fn commutator_trivial_cases() {
        let sys = ensemble(6, 0.1, 2, 3);
        let id = CovariantEnsemble::identity_element(sys.geometry.clone(), sys.seeds());
        let c = position_commutator(&id, 0).unwrap();
        assert!(c.norm2_closed() < 1e-15, "identity commutes with x");
        let zero = id.scale(cr(0.0));
        assert!(position_commutator(&zero, 0).unwrap().norm2_closed() == 0.0);
    }

    #[test]
    fn zero_field_fixed_point() {
        let sys = ensemble(6, 0.0, 2, 4);
        let solver = DuhamelSolver::new(
            sys,
            EquilibriumSpec::thermal(1.0, 4.0),
            LiouvilleConfig {
                t_min: -3.0,
                window_end: 0.25,
                table_subdivision: 64,
                ..Default::default()
            },
        )
        .unwrap();
        let out = solver.rho(0.0).unwrap();
        let diff = out
            .rho
            .ensemble
            .sub(&solver.zeta().ensemble)
            .unwrap()
            .norm2_closed();
        assert!(diff <= 1e-12, "E = 0 keeps ρ = ζ, got {diff:.3e}");
        assert_eq!(out.truncation_bound, 0.0);
        // limit representation also fixed
        let lim = solver.rho_by_limit(0.0, &[-1.0, -2.0, -3.0]).unwrap();
        let ldiff = lim
            .rho
            .ensemble
            .sub(&solver.zeta().ensemble)
            .unwrap()
            .norm2_closed();
        assert!(ldiff <= 1e-12);
        // Liouville residual is pure rounding
        let dict = test_dictionary(solver.system(), &solver.system().hamiltonians(0.0)).unwrap();
        let r = solver.liouville_residual(&dict[0], -0.5, 1e-2).unwrap();
        assert!(r <= 1e-12, "constant pairing FD error {r:.3e}");
    }

    #[test]
    fn duhamel_hermitian_and_warning() {
        let sys = ensemble(6, 0.2, 2, 5);
        let solver = DuhamelSolver::new(
            sys,
            EquilibriumSpec::thermal(2.0, 4.0),
            LiouvilleConfig {
                t_min: -3.0,
                window_end: 0.25,
                table_subdivision: 256,
                requested_accuracy: Some(1e-9),
                ..Default::default()
            },
        )
        .unwrap();
        let out = solver.rho(0.0).unwrap();
        assert!(out.rho.hermiticity_defect() < 1e-10);
        assert!(out.truncation_bound > 0.0);
        // shallow t_min for the requested accuracy: warning present
        assert!(out.warning.is_some());
    }

    #[test]
    fn bath_identity_exact_via_closed_forms() {
        let sys = ensemble(8, 0.3, 3, 6);
        let solver = DuhamelSolver::new(
            sys.clone(),
            EquilibriumSpec::thermal(2.0, 4.0),
            LiouvilleConfig {
                t_min: -3.0,
                window_end: 0.25,
                table_subdivision: 64,
                ..Default::default()
            },
        )
        .unwrap();
        let t = -0.4;
        let hams = sys.hamiltonians(t);
        let zeta_t = solver.zeta_at(t);
        for a in test_dictionary(&sys, &hams).unwrap() {
            let val = form_l(&a, &zeta_t.ensemble, &hams).unwrap();
            let scale = apply_hl_sqrt(&a, &hams).unwrap().norm2_closed()
                * apply_hl_sqrt(&zeta_t.ensemble, &hams).unwrap().norm2_closed();
            assert!(
                val.norm() <= 1e-8 * scale.max(1e-300),
                "bath residual {:.3e} vs scale {scale:.3e}",
                val.norm()
            );
        }
    }

    #[test]
    fn form_l_is_commutator_form() {
        // 𝕃_t(A, B) = ⟨⟨A, [H(t), B]⟩⟩ under the closed pairing
        let sys = ensemble(6, 0.2, 3, 7);
        let t = -0.3;
        let hams = sys.hamiltonians(t);
        let dict = test_dictionary(&sys, &hams).unwrap();
        let (a, b) = (&dict[0], &dict[2]);
        let lhs = form_l(a, b, &hams).unwrap();
        let commutators = CovariantEnsemble::from_matrices(
            sys.geometry.clone(),
            sys.seeds(),
            (0..sys.len())
                .map(|i| hams[i].matrix() * b.matrix(i) - b.matrix(i) * hams[i].matrix())
                .collect(),
        )
        .unwrap();
        let rhs = a.inner_closed(&commutators).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        // E = 0 symmetric case: 𝕃(I, I) = 0
        let id = CovariantEnsemble::identity_element(sys.geometry.clone(), sys.seeds());
        assert!(form_l(&id, &id, &hams).unwrap().norm() < 1e-12);
    }

    #[test]
    fn uniqueness_surrogate() {
        let sys = ensemble(6, 0.3, 2, 8);
        let solver = DuhamelSolver::new(
            sys.clone(),
            EquilibriumSpec::thermal(2.0, 4.0),
            LiouvilleConfig {
                t_min: -4.0,
                window_end: 0.25,
                table_subdivision: 128,
                ..Default::default()
            },
        )
        .unwrap();
        let dict = test_dictionary(&sys, &sys.hamiltonians(0.0)).unwrap();
        let a = &dict[1];
        let v0 = &dict[2];
        let dev = solver
            .uniqueness_deviation(a, v0, -4.0, &[-3.0, -2.0, -1.0, 0.0])
            .unwrap();
        let scale = a.norm2_closed() * v0.norm2_closed();
        assert!(dev <= 1e-8 * scale, "deviation {dev:.3e} vs scale {scale:.3e}");
        // zero seed element: identically zero
        let zero = v0.scale(cr(0.0));
        let dz = solver
            .uniqueness_deviation(a, &zero, -4.0, &[-2.0, 0.0])
            .unwrap();
        assert_eq!(dz, 0.0);
    }

    #[test]
    fn q0_check_gapped_state_stable_in_volume() {
        // dimerized hopping opens a gap at half filling; with E_F in the
        // gap the zero-temperature state is exponentially localized and
        // E‖x²ζχ₀‖₂² stabilizes as the volume grows
        let value_at = |l: usize| -> f64 {
            let g = LatticeGeometry::open_unit(vec![l]).unwrap();
            let n = g.num_sites();
            let (strong, weak) = (1.5, 0.25);
            let gamma = 4.0;
            let mut m = CMatrix::zeros(n, n);
            for s in 0..n {
                m[(s, s)] = cr(2.0 + gamma);
                if s + 1 < n {
                    let hop = if s % 2 == 0 { strong } else { weak };
                    m[(s, s + 1)] = cr(-hop);
                    m[(s + 1, s)] = cr(-hop);
                }
            }
            let h = HermitianOperator::new(m).unwrap();
            // E_F mid-gap: between the two bands of the dimerized chain
            let ef = 2.0 + gamma;
            let model = DisorderModel {
                v_plus_max: 0.0,
                v_minus_max: 0.0,
                link_phase_amplitude: 0.0,
                b_field: 0.0,
            };
            let sys = SystemEnsemble::sample(
                g,
                model,
                FieldProfile::new(vec![0.0], 1.0).unwrap(),
                1,
                1,
            )
            .unwrap();
            let zeta = equilibrium_state(&EquilibriumSpec::zero_temperature(ef), &sys, &[h.clone()])
                .unwrap();
            let (_, x2) = q0_check(&zeta, &[h], 0).unwrap();
            x2
        };
        let (v16, v32) = (value_at(16), value_at(32));
        assert!(
            (v32 - v16).abs() <= 0.10 * v16.abs(),
            "x²ζχ₀ statistic drifts: L16 {v16:.6e} vs L32 {v32:.6e}"
        );
    }
}
