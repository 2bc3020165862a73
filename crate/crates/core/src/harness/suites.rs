//! Experiment suites: the smoke checks and the thirteen acceptance
//! criteria, each producing named check records with pinned bounds from
//! `tol`. Every number a suite emits is deterministic given (config,
//! master seed) — reductions are fixed-order, draws are seeded.

use rand_core::{RngCore, SeedableRng};

use crate::covariant::{
    apply_hl_sqrt, diamond_identity_residuals, CovariantEnsemble,
};
use crate::disorder::realization_seed;
use crate::error::Result;
use crate::geometry::{BoundaryMode, LatticeGeometry};
use crate::hamiltonian::{build_hamiltonian, covariance_residual, gauge_identity_residual};
use crate::linalg::{cr, identity, operator_norm, CMatrix, C64};
use crate::liouville::{test_dictionary, DuhamelSolver, LiouvilleConfig};
use crate::propagator::{
    self, converge_propagator, dyson_series, dyson_terms, u_k_matrix, PropagatorTable, StepRule,
};
use crate::stats::RunningStats;
use crate::system::SystemEnsemble;
use crate::tol;

use super::config::ExperimentConfig;
use super::report::{CheckRecord, RunReport};

/// A scalar series worth persisting next to the report.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct CriterionOutput {
    pub records: Vec<CheckRecord>,
    pub series: Vec<Series>,
}

impl CriterionOutput {
    fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }
}

/// Run the suite selected by the config (or overridden); returns the report
/// and any series artifacts.
pub fn run(
    cfg: &ExperimentConfig,
    suite_override: Option<&str>,
    seed_override: Option<u64>,
) -> Result<(RunReport, Vec<Series>)> {
    let suite = suite_override.unwrap_or(&cfg.suite).to_string();
    let seed = seed_override.unwrap_or(cfg.disorder.master_seed);
    let started = std::time::Instant::now();
    let outputs = match suite.as_str() {
        "smoke" => smoke_suite(cfg, seed)?,
        "acceptance" => acceptance_suite(cfg, seed)?,
        other => {
            return Err(crate::error::Error::Validation {
                path: "suite".into(),
                message: format!("unknown suite `{other}`"),
            })
        }
    };
    let mut records = Vec::new();
    let mut series = Vec::new();
    for out in outputs {
        records.extend(out.records);
        series.extend(out.series);
    }
    let mut report = RunReport::new(&suite, seed, cfg.to_toml(), records);
    report.elapsed_seconds = started.elapsed().as_secs_f64();
    Ok((report, series))
}

/// Fast identity checks on the configured system; the full acceptance gate
/// lives in the criterion functions below.
pub fn smoke_suite(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<CriterionOutput>> {
    let sys = cfg.system_ensemble(Some(seed))?;
    let mut out = CriterionOutput::default();
    let driven = sys.driven(0);
    let h0 = driven.hamiltonian(0.0);

    match sys.geometry.boundary() {
        BoundaryMode::Open => {
            let mut worst: f64 = 0.0;
            for t in [-1.0, 0.0] {
                let r =
                    gauge_identity_residual(&sys.geometry, sys.realization(0), &sys.field, t)?;
                worst = worst.max(r / h0.operator_norm());
            }
            out.push(CheckRecord::upper(
                "smoke.gauge_identity",
                worst,
                tol::EXACT_IDENTITY_REL,
                "‖G H G* − H(F)‖ / ‖H‖",
            ));
        }
        BoundaryMode::Periodic => {
            let mut worst: f64 = 0.0;
            for shift in [1i64, sys.geometry.extents()[0] as i64 / 2] {
                let mut s = vec![0i64; sys.geometry.dimension()];
                s[0] = shift;
                let zero = vec![0.0; sys.geometry.dimension()];
                let r = covariance_residual(&sys.geometry, sys.realization(0), &s, &zero)?;
                worst = worst.max(r / h0.operator_norm());
            }
            out.push(CheckRecord::upper(
                "smoke.covariance",
                worst,
                tol::EXACT_IDENTITY_REL,
                "‖U(a) H U(a)* − H_τω‖ / ‖H‖",
            ));
        }
    }

    // product-formula identities at a moderate subdivision
    let (s0, t1) = (cfg.propagator.interval[0], cfg.propagator.interval[1]);
    let mid = 0.5 * (s0 + t1);
    let k = 64;
    let u_ts = u_k_matrix(&driven, s0, k, t1, s0);
    out.push(CheckRecord::upper(
        "smoke.unitarity",
        crate::linalg::unitarity_defect(&u_ts),
        tol::UNITARITY,
        "‖U*U − I‖",
    ));
    let u_tr = u_k_matrix(&driven, s0, k, t1, mid);
    let u_rs = u_k_matrix(&driven, s0, k, mid, s0);
    out.push(CheckRecord::upper(
        "smoke.composition",
        operator_norm(&(&u_tr * &u_rs - &u_ts)),
        tol::COMPOSITION,
        "grid-aligned U(t,r)U(r,s) = U(t,s)",
    ));
    let u_st = u_k_matrix(&driven, s0, k, s0, t1);
    out.push(CheckRecord::upper(
        "smoke.adjoint",
        operator_norm(&(u_st.adjoint() - &u_ts)),
        tol::COMPOSITION,
        "U(s,t)* = U(t,s), independent chains",
    ));

    // diamond centrality on seeded random ensembles
    let ra = random_ensemble(&sys, 0xA);
    let rb = random_ensemble(&sys, 0xB);
    let rc = random_ensemble(&sys, 0xC);
    let d = diamond_identity_residuals(&ra, &rb, &rc)?;
    out.push(CheckRecord::upper(
        "smoke.diamond",
        d.inner_product.max(d.symmetry).max(d.module) / d.scale,
        tol::CENTRALITY_REL,
        "⋄/T centrality residuals / scale",
    ));

    // conjugation isometry + bath identity through a small solver
    if sys.geometry.boundary() == BoundaryMode::Open {
        let solver = DuhamelSolver::new(
            sys.clone(),
            cfg.equilibrium_spec(),
            LiouvilleConfig {
                t_min: cfg.liouville.t_min.max(-4.0),
                window_end: 0.1,
                table_subdivision: cfg.liouville.table_subdivision.min(256),
                ..cfg.liouville_config()
            },
        )?;
        let conj = solver.conjugation(0.0, -1.0)?;
        let mapped = conj.apply(&ra)?;
        out.push(CheckRecord::upper(
            "smoke.isometry",
            (mapped.norm2_closed() / ra.norm2_closed() - 1.0).abs(),
            tol::SUPERPROP_ISOMETRY,
            "‖𝒰(A)‖₂/‖A‖₂ − 1",
        ));
        let t = -0.5;
        let hams = sys.hamiltonians(t);
        let zeta_t = solver.zeta_at(t);
        let a = &test_dictionary(&sys, &hams)?[0];
        let val = crate::liouville::form_l(a, &zeta_t.ensemble, &hams)?;
        let scale = apply_hl_sqrt(a, &hams)?.norm2_closed()
            * apply_hl_sqrt(&zeta_t.ensemble, &hams)?.norm2_closed();
        out.push(CheckRecord::upper(
            "smoke.bath",
            val.norm() / scale.max(f64::MIN_POSITIVE),
            tol::BATH_REL,
            "|𝕃_t(A, ζ(t))| / scale",
        ));
        if sys.field.is_zero() {
            let fixed = solver.rho(0.0)?.rho.ensemble;
            out.push(CheckRecord::upper(
                "smoke.fixed_point",
                fixed.sub(&solver.zeta().ensemble)?.norm2_closed(),
                tol::FIXED_POINT,
                "E = 0 keeps ρ = ζ",
            ));
        }
    }
    Ok(vec![out])
}

/// The full acceptance gate: every criterion at its pinned tolerance.
pub fn acceptance_suite(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<CriterionOutput>> {
    Ok(vec![
        criterion_01_propagator_axioms(cfg, seed)?,
        criterion_02_convergence(cfg, seed)?,
        criterion_03_wk_bound(cfg, seed)?,
        criterion_04_dyson(cfg, seed)?,
        criterion_05_gamma_calculus(cfg, seed)?,
        criterion_06_gauge_covariance(cfg, seed)?,
        criterion_07_algebra(cfg, seed)?,
        criterion_08_bath(cfg, seed)?,
        criterion_09_liouville_residual(cfg, seed)?,
        criterion_10_two_representations(cfg, seed)?,
        criterion_11_fixed_points(cfg, seed)?,
        criterion_12_birkhoff(cfg, seed)?,
        criterion_13_linear_response(cfg, seed)?,
    ])
}

fn random_ensemble(sys: &SystemEnsemble, tag: u64) -> CovariantEnsemble {
    let n = sys.geometry.num_sites();
    let seeds = sys.seeds();
    let mats: Vec<CMatrix> = seeds
        .iter()
        .map(|&s| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s ^ (tag.wrapping_mul(0x9E37)));
            let mut u = || (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0) - 0.5;
            CMatrix::from_fn(n, n, |_, _| C64::new(u(), u()))
        })
        .collect();
    CovariantEnsemble::from_matrices(sys.geometry.clone(), seeds, mats).expect("shapes match")
}

/// Criterion 1: unitarity, grid-aligned composition, and the adjoint
/// relation of the product propagator.
pub fn criterion_01_propagator_axioms(
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<CriterionOutput> {
    let sys = cfg.system_ensemble(Some(seed))?;
    let driven = sys.driven(0);
    let (s0, t1) = (cfg.propagator.interval[0], cfg.propagator.interval[1]);
    let mut out = CriterionOutput::default();
    let mut unit: f64 = 0.0;
    let mut comp: f64 = 0.0;
    let mut adj: f64 = 0.0;
    for k in [16u32, 256, 4096] {
        let u_ts = u_k_matrix(&driven, s0, k, t1, s0);
        unit = unit.max(crate::linalg::unitarity_defect(&u_ts));
        let r = 0.5 * (s0 + t1); // grid point for every even k
        let u_tr = u_k_matrix(&driven, s0, k, t1, r);
        let u_rs = u_k_matrix(&driven, s0, k, r, s0);
        comp = comp.max(operator_norm(&(&u_tr * &u_rs - &u_ts)));
        let u_st = u_k_matrix(&driven, s0, k, s0, t1);
        adj = adj.max(operator_norm(&(u_st.adjoint() - &u_ts)));
    }
    out.push(CheckRecord::upper(
        "01.unitarity",
        unit,
        tol::UNITARITY,
        "max ‖U_k*U_k − I‖ over k ∈ {16, 256, 4096}",
    ));
    out.push(CheckRecord::upper(
        "01.composition",
        comp,
        tol::COMPOSITION,
        "grid-aligned U(t,r)U(r,s) − U(t,s)",
    ));
    out.push(CheckRecord::upper(
        "01.adjoint",
        adj,
        tol::COMPOSITION,
        "U(s,t)* − U(t,s), independent product chains",
    ));
    Ok(out)
}

/// Criterion 2: Cauchy convergence of the k-doubling and agreement with the
/// independent reference integrator.
pub fn criterion_02_convergence(cfg: &ExperimentConfig, seed: u64) -> Result<CriterionOutput> {
    let sys = cfg.system_ensemble(Some(seed))?;
    let driven = sys.driven(0);
    let schedule = cfg.schedule()?;
    let (s0, t1) = schedule.interval;
    let mut result = converge_propagator(&driven, t1, s0, &schedule);
    let reference = propagator::reference::reference_propagator(&driven, t1, s0, 1e-11);
    let deviation = operator_norm(&(&result.matrix - &reference));
    result.reference_deviation = Some(deviation);

    let mut out = CriterionOutput::default();
    out.push(CheckRecord::lower(
        "02.converged",
        if result.converged { 1.0 } else { 0.0 },
        1.0,
        format!("k-doubling met tol {:.1e} at k = {}", schedule.tolerance, result.k),
    ));
    out.push(CheckRecord::upper(
        "02.reference_agreement",
        deviation,
        tol::REFERENCE_AGREEMENT,
        "‖U_k − U_ref‖, Dormand-Prince reference",
    ));
    let worst_ratio = result
        .gap_history
        .windows(2)
        .map(|w| w[1].1 / w[0].1)
        .fold(0.0f64, f64::max);
    out.push(CheckRecord::upper(
        "02.gap_ratio_max",
        worst_ratio,
        1.0,
        "Cauchy gaps strictly decreasing across doublings",
    ));
    out.series.push(Series {
        name: "convergence_gaps".into(),
        header: vec!["k".into(), "gap".into()],
        rows: result
            .gap_history
            .iter()
            .map(|&(k, g)| vec![k as f64, g])
            .collect(),
    });
    Ok(out)
}

/// Criterion 3: the product-formula norm bound on W_k across k and random
/// endpoint pairs.
pub fn criterion_03_wk_bound(cfg: &ExperimentConfig, seed: u64) -> Result<CriterionOutput> {
    let sys = cfg.system_ensemble(Some(seed))?;
    let driven = sys.driven(0);
    let (s0, t1) = (cfg.propagator.interval[0], cfg.propagator.interval[1]);
    let m_hat =
        propagator::gamma_rate_sup(&driven, (s0, t1), 33) * tol::RATE_INFLATION;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x3333);
    let mut uniform = |lo: f64, hi: f64| {
        lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mut t = uniform(s0, t1);
        let mut s = uniform(s0, t1);
        if (t - s).abs() < 1e-3 {
            t = (s + 0.25).min(t1);
            s = (s - 0.25).max(s0);
        }
        if t < s {
            std::mem::swap(&mut t, &mut s);
        }
        for k in [8u32, 32, 128] {
            let check = propagator::w_k_bound_check(&driven, s0, k, t, s, m_hat);
            worst = worst.max(check.norm / check.bound);
        }
    }
    let mut out = CriterionOutput::default();
    out.push(CheckRecord::upper(
        "03.wk_bound_ratio",
        worst,
        1.0,
        "max ‖W_k‖ / ((1 + M̂/k)² e^{M̂|t−s|}), 10 pairs × k ∈ {8,32,128}",
    ));
    Ok(out)
}

/// Criterion 4: Dyson reconstruction of H(t)^{1/2} U H(s)^{-1/2} and the
/// factorial term bounds, at d=1, L=8.
pub fn criterion_04_dyson(cfg: &ExperimentConfig, seed: u64) -> Result<CriterionOutput> {
    let geometry = LatticeGeometry::open_unit(vec![8])?;
    let disorder = cfg.disorder_model();
    let field = cfg.field_profile()?;
    let sys = SystemEnsemble::sample(geometry, disorder, field, seed, 1)?;
    let driven = sys.driven(0);
    let table = PropagatorTable::build(driven.clone(), -1.0, 0.0, 4096, StepRule::Midpoint);
    let m_hat = propagator::gamma_rate_sup(&driven, (-1.0, 0.0), 33) * tol::RATE_INFLATION;

    let mut worst_reconstruction: f64 = 0.0;
    let mut worst_term_ratio: f64 = 0.0;
    for (t, s) in [(-0.2, -0.7), (-0.05, -0.55), (-0.45, -0.9)] {
        let series = dyson_series(&table, t, s, 6, 256);
        let direct = driven.hamiltonian(t).sqrt()
            * table.matrix(t, s)
            * driven.hamiltonian(s).inv_sqrt();
        worst_reconstruction =
            worst_reconstruction.max(operator_norm(&(series - direct)));
        let terms = dyson_terms(&table, t, s, 6, 256);
        let mut factorial = 1.0;
        for (j, term) in terms.iter().enumerate() {
            factorial *= (j + 1) as f64;
            let bound =
                ((t - s).abs() * m_hat).powi(j as i32 + 1) / factorial * tol::RATE_INFLATION;
            worst_term_ratio = worst_term_ratio.max(operator_norm(term) / bound);
        }
    }
    let mut out = CriterionOutput::default();
    out.push(CheckRecord::upper(
        "04.reconstruction",
        worst_reconstruction,
        tol::DYSON_RECONSTRUCTION,
        "‖U + Σ_{j≤6} W^{(j)} − H(t)^{1/2}UH(s)^{-1/2}‖, |t−s| ≤ 1/2",
    ));
    out.push(CheckRecord::upper(
        "04.term_bound_ratio",
        worst_term_ratio,
        1.0,
        "max ‖W^{(j)}‖ / (|t−s|^j M̂^j / j! × 1.1)",
    ));
    Ok(out)
}

/// Criterion 5: the Γ/C calculus — vanishing at equal times, one-sided
/// cancellation rate, the half-line resolvent identity, and the
/// extrapolated C(s) limit.
pub fn criterion_05_gamma_calculus(cfg: &ExperimentConfig, seed: u64) -> Result<CriterionOutput> {
    let sys = cfg.system_ensemble(Some(seed))?;
    let driven = sys.driven(0);
    let mut out = CriterionOutput::default();
    // Γ(t,t) from one factorization pair, no shortcut
    let h = driven.hamiltonian(-0.7);
    let gamma_tt = operator_norm(&(h.sqrt() * h.inv_sqrt() - identity(driven.dim())));
    out.push(CheckRecord::upper(
        "05.gamma_equal_times",
        gamma_tt,
        1e-13,
        "‖H^{1/2}H^{-1/2} − I‖ at t = s",
    ));
    let lim = propagator::gamma_one_sided(&driven, -0.5, &[1e-2, 5e-3]);
    let slope = (lim.residuals[0] / lim.residuals[1]).log2();
    out.push(CheckRecord::lower(
        "05.cancellation_slope",
        slope,
        tol::SLOPE1_MIN,
        "‖Γ₁+Γ₂‖ shrink rate in h over {1e-2, 5e-3}",
    ));
    let closed = propagator::gamma1_closed_form(&driven, -0.5, 96);
    out.push(CheckRecord::upper(
        "05.gamma1_closed_form",
        operator_norm(&(&lim.gamma1 - &closed)),
        tol::EXTRAPOLATED_LIMIT,
        "extrapolated Γ₁ vs half-line resolvent quadrature",
    ));
    out.push(CheckRecord::upper(
        "05.dunford_taylor",
        propagator::dunford_taylor_residual(&driven, -0.2, -0.6, 64),
        tol::DUNFORD_TAYLOR,
        "inverse-sqrt difference vs 64-node substituted Gauss rule",
    ));
    let c_lim = propagator::c_limit(&driven, -0.5, &[1e-2, 5e-3]);
    let c_closed = propagator::c_closed_form(&driven, -0.5);
    out.push(CheckRecord::upper(
        "05.c_limit",
        operator_norm(&(c_lim - c_closed)),
        tol::EXTRAPOLATED_LIMIT,
        "C(t,s)/(t−s) extrapolation vs closed form",
    ));
    Ok(out)
}

/// Criterion 6: exactness of the lattice gauge identity and of translation
/// covariance.
pub fn criterion_06_gauge_covariance(cfg: &ExperimentConfig, seed: u64) -> Result<CriterionOutput> {
    let sys = cfg.system_ensemble(Some(seed))?;
    let h_norm = sys.driven(0).hamiltonian(0.0).operator_norm();
    let mut out = CriterionOutput::default();
    let mut worst: f64 = 0.0;
    for t in [-2.0, -0.3, 0.5] {
        let r = gauge_identity_residual(&sys.geometry, sys.realization(0), &sys.field, t)?;
        worst = worst.max(r / h_norm);
    }
    out.push(CheckRecord::upper(
        "06.gauge_identity",
        worst,
        tol::EXACT_IDENTITY_REL,
        "‖G(t)HG(t)* − H(F(t))‖ / ‖H‖ at three times",
    ));
    // periodic companion system, d=1, L=8
    let geometry = LatticeGeometry::periodic_unit(vec![8])?;
    let torus = SystemEnsemble::sample(
        geometry.clone(),
        cfg.disorder_model(),
        crate::field::FieldProfile::zero(1),
        seed,
        1,
    )?;
    let h_torus = build_hamiltonian(&geometry, torus.realization(0), &[0.0])?;
    let mut worst_cov: f64 = 0.0;
    for shift in [1i64, 3, 5] {
        let r = covariance_residual(&geometry, torus.realization(0), &[shift], &[0.0])?;
        worst_cov = worst_cov.max(r / h_torus.operator_norm());
    }
    out.push(CheckRecord::upper(
        "06.covariance",
        worst_cov,
        tol::EXACT_IDENTITY_REL,
        "‖U(a)HU(a)* − H_τω‖ / ‖H‖, shifts {1,3,5} on the L=8 torus",
    ));
    Ok(out)
}

/// Criterion 7: ⋄/T centrality, conjugation isometry, and ‡-compatibility.
pub fn criterion_07_algebra(cfg: &ExperimentConfig, seed: u64) -> Result<CriterionOutput> {
    let geometry = LatticeGeometry::open_unit(vec![8])?;
    let sys = SystemEnsemble::sample(
        geometry,
        cfg.disorder_model(),
        cfg.field_profile()?,
        seed,
        16,
    )?;
    let a = random_ensemble(&sys, 0x71);
    let b = random_ensemble(&sys, 0x72);
    let c = random_ensemble(&sys, 0x73);
    let d = diamond_identity_residuals(&a, &b, &c)?;
    let mut out = CriterionOutput::default();
    out.push(CheckRecord::upper(
        "07.diamond_inner",
        d.inner_product / d.scale,
        tol::CENTRALITY_REL,
        "|T(A⋄B) − ⟨⟨A‡,B⟩⟩| / scale",
    ));
    out.push(CheckRecord::upper(
        "07.diamond_symmetry",
        d.symmetry / d.scale,
        tol::CENTRALITY_REL,
        "|T(A⋄B) − T(B⋄A)| / scale",
    ));
    out.push(CheckRecord::upper(
        "07.diamond_module",
        d.module / d.scale,
        tol::CENTRALITY_REL,
        "|T((C⊙A)⋄B) − T(A⋄(B⊙C))| / scale",
    ));
    let solver = DuhamelSolver::new(
        sys.clone(),
        cfg.equilibrium_spec(),
        LiouvilleConfig {
            t_min: -2.0,
            window_end: 0.1,
            table_subdivision: 256,
            ..Default::default()
        },
    )?;
    let conj = solver.conjugation(0.0, -1.0)?;
    let mapped = conj.apply(&a)?;
    out.push(CheckRecord::upper(
        "07.isometry",
        (mapped.norm2_closed() / a.norm2_closed() - 1.0).abs(),
        tol::SUPERPROP_ISOMETRY,
        "‖𝒰(t,s)(A)‖₂ / ‖A‖₂ − 1",
    ));
    let dagger_defect = conj
        .apply(&a)?
        .dagger()
        .sub(&conj.apply(&a.dagger())?)?
        .norm2_closed()
        / a.norm2_closed();
    out.push(CheckRecord::upper(
        "07.dagger_compat",
        dagger_defect,
        tol::CENTRALITY_REL,
        "{𝒰(A)}‡ = 𝒰(A‡) / ‖A‖₂",
    ));
    Ok(out)
}

fn reference_solver(cfg: &ExperimentConfig, seed: u64) -> Result<DuhamelSolver> {
    let sys = cfg.system_ensemble(Some(seed))?;
    DuhamelSolver::new(sys, cfg.equilibrium_spec(), cfg.liouville_config())
}

/// Criterion 8: the bath identity 𝕃_t(A, ζ(t)) = 0 over the dictionary and
/// a time grid.
pub fn criterion_08_bath(cfg: &ExperimentConfig, seed: u64) -> Result<CriterionOutput> {
    let solver = reference_solver(cfg, seed)?;
    let sys = solver.system().clone();
    let mut worst: f64 = 0.0;
    for &t in &[-2.0, -1.0, -0.5, -0.25, 0.0] {
        let hams = sys.hamiltonians(t);
        let zeta_t = solver.zeta_at(t);
        let zeta_scale = apply_hl_sqrt(&zeta_t.ensemble, &hams)?.norm2_closed();
        for a in test_dictionary(&sys, &hams)? {
            let val = crate::liouville::form_l(&a, &zeta_t.ensemble, &hams)?;
            let scale = apply_hl_sqrt(&a, &hams)?.norm2_closed() * zeta_scale;
            worst = worst.max(val.norm() / scale.max(f64::MIN_POSITIVE));
        }
    }
    let mut out = CriterionOutput::default();
    out.push(CheckRecord::upper(
        "08.bath",
        worst,
        tol::BATH_REL,
        "max |𝕃_t(A, ζ(t))| / (‖H^{1/2}A‖₂‖H^{1/2}ζ‖₂), 5 A × 5 t",
    ));
    Ok(out)
}

/// Criterion 9: the weak Liouville equation as a finite-difference
/// residual — O(h²) slope, floor below the reported truncation bound.
pub fn criterion_09_liouville_residual(
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<CriterionOutput> {
    let solver = reference_solver(cfg, seed)?;
    let sys = solver.system().clone();
    let dict = test_dictionary(&sys, &sys.hamiltonians(-0.5))?;
    let a = &dict[0];
    let t0 = -0.5;
    let hs = [4e-2, 2e-2, 1e-2];
    let residuals: Vec<f64> = hs
        .iter()
        .map(|&h| solver.liouville_residual(a, t0, h))
        .collect::<Result<_>>()?;
    let slope = (residuals[0] / residuals[1]).log2();
    let floor = solver.liouville_residual(a, t0, 1e-4)?;
    let bound = solver.rho(t0)?.truncation_bound;
    let mut out = CriterionOutput::default();
    out.push(CheckRecord::within(
        "09.slope",
        slope,
        tol::SLOPE2_LO,
        tol::SLOPE2_HI,
        "FD-vs-form residual Richardson slope",
    ));
    out.push(CheckRecord::upper(
        "09.floor",
        floor,
        bound.max(1e-12),
        "small-h floor vs reported truncation bound",
    ));
    out.series.push(Series {
        name: "liouville_residuals".into(),
        header: vec!["h".into(), "residual".into()],
        rows: hs
            .iter()
            .zip(&residuals)
            .map(|(&h, &r)| vec![h, r])
            .chain(std::iter::once(vec![1e-4, floor]))
            .collect(),
    });
    Ok(out)
}

/// Criterion 10: Duhamel and limit representations agree within budgets;
/// limit gaps shrink at the switching rate.
pub fn criterion_10_two_representations(
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<CriterionOutput> {
    let solver = reference_solver(cfg, seed)?;
    let duhamel = solver.rho(0.0)?;
    let s_list = [-2.0, -4.0, -6.0, -8.0];
    let limit = solver.rho_by_limit(0.0, &s_list)?;
    let diff = duhamel
        .rho
        .ensemble
        .sub(&limit.rho.ensemble)?
        .norm2_closed();
    let eta = solver.system().field.rate;
    let delta_s = 2.0;
    let ratio_expected = (-eta * delta_s).exp();
    // geometric tail estimate of the limit beyond the deepest s
    let last_gap = *limit.gaps.last().unwrap();
    let tail = last_gap * ratio_expected / (1.0 - ratio_expected);
    let budget = duhamel.truncation_bound + tail + 1e-8;
    let mut out = CriterionOutput::default();
    out.push(CheckRecord::upper(
        "10.representation_gap",
        diff,
        budget,
        format!(
            "‖ρ_duhamel − ρ_limit‖₂ vs truncation {:.2e} + tail {:.2e}",
            duhamel.truncation_bound, tail
        ),
    ));
    let worst_rate = limit
        .gaps
        .windows(2)
        .map(|w| (w[1] / w[0]) / ratio_expected)
        .fold(0.0f64, |acc, r| acc.max((r - 1.0).abs()));
    out.push(CheckRecord::upper(
        "10.gap_rate",
        worst_rate,
        tol::GAP_RATE_REL,
        "limit gap ratio vs e^{-ηΔs}, relative deviation",
    ));
    let final_agreement = *limit.gauge_agreement.last().unwrap();
    let first_agreement = limit.gauge_agreement[0];
    out.push(CheckRecord::upper(
        "10.second_limit",
        final_agreement,
        first_agreement,
        "‖𝒰(t,s)(ζ) − 𝒰(t,s)(ζ(s))‖₂ decreasing along s",
    ));
    out.series.push(Series {
        name: "limit_gaps".into(),
        header: vec!["s".into(), "gap_to_previous".into(), "gauge_agreement".into()],
        rows: s_list
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                vec![
                    s,
                    if i == 0 { f64::NAN } else { limit.gaps[i - 1] },
                    limit.gauge_agreement[i],
                ]
            })
            .collect(),
    });
    Ok(out)
}

/// Criterion 11: the E = 0 fixed point and the e^{ηt} approach to the
/// initial condition.
pub fn criterion_11_fixed_points(cfg: &ExperimentConfig, seed: u64) -> Result<CriterionOutput> {
    // E = 0 companion run
    let mut quiet = cfg.clone();
    quiet.field.e = vec![0.0; cfg.geometry.dimension];
    quiet.disorder.realizations = 4;
    let quiet_solver = DuhamelSolver::new(
        quiet.system_ensemble(Some(seed))?,
        quiet.equilibrium_spec(),
        LiouvilleConfig {
            t_min: -4.0,
            window_end: 0.1,
            table_subdivision: 256,
            ..quiet.liouville_config()
        },
    )?;
    let mut worst_fixed: f64 = 0.0;
    for t in [-1.0, 0.0] {
        let rho = quiet_solver.rho(t)?.rho.ensemble;
        worst_fixed = worst_fixed.max(rho.sub(&quiet_solver.zeta().ensemble)?.norm2_closed());
    }
    let mut out = CriterionOutput::default();
    out.push(CheckRecord::upper(
        "11.fixed_point",
        worst_fixed,
        tol::FIXED_POINT,
        "E = 0: ρ(t) ≡ ζ",
    ));
    // envelope of the initial condition under the reference field
    let solver = reference_solver(cfg, seed)?;
    let sys = solver.system().clone();
    let dict = test_dictionary(&sys, &sys.hamiltonians(0.0))?;
    let a = &dict[0];
    let zeta_pairing = a.inner_closed(&solver.zeta().ensemble)?;
    let eta = sys.field.rate;
    let mut cs = Vec::new();
    let mut rows = Vec::new();
    for &t in &[-4.0, -5.0, -6.0] {
        let r = (a.inner_closed(&solver.rho(t)?.rho.ensemble)? - zeta_pairing).norm();
        let c = r * (-eta * t).exp();
        cs.push(c);
        rows.push(vec![t, r, c]);
    }
    let spread = cs.iter().cloned().fold(0.0f64, f64::max)
        / cs.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(CheckRecord::upper(
        "11.envelope_stability",
        spread,
        tol::ENVELOPE_STABILITY,
        "max/min of |⟨⟨A,ρ(t)⟩⟩ − ⟨⟨A,ζ⟩⟩| e^{-ηt} over t ∈ {-4,-5,-6}",
    ));
    out.series.push(Series {
        name: "initial_condition_envelope".into(),
        header: vec!["t".into(), "pairing_gap".into(), "fitted_c".into()],
        rows,
    });
    Ok(out)
}

/// Criterion 12: Birkhoff — volume average of one realization vs ensemble
/// mean of the cell trace, for a smooth spectral bump.
pub fn criterion_12_birkhoff(cfg: &ExperimentConfig, seed: u64) -> Result<CriterionOutput> {
    let geometry = LatticeGeometry::periodic_unit(vec![64])?;
    let disorder = cfg.disorder_model();
    let sys = SystemEnsemble::sample(
        geometry.clone(),
        disorder,
        crate::field::FieldProfile::zero(1),
        seed,
        200,
    )?;
    let hams = sys.hamiltonians(0.0);
    // fixed smooth bump on the common spectral window
    let center = 0.5 * (hams[0].min_eigenvalue() + hams[0].max_eigenvalue());
    let width = 0.25 * (hams[0].max_eigenvalue() - hams[0].min_eigenvalue());
    let chi0_site = geometry.cell_sites(&geometry.reference_cell())[0];
    let mut ensemble_stats = RunningStats::new();
    for h in &hams {
        let f = h.map_spectrum(|l| cr((-((l - center) / width).powi(2)).exp()));
        ensemble_stats.push(f[(chi0_site, chi0_site)].re);
    }
    // one realization, averaged over the volume
    let f0 = hams[0].map_spectrum(|l| cr((-((l - center) / width).powi(2)).exp()));
    let mut volume_stats = RunningStats::new();
    for site in 0..geometry.num_sites() {
        volume_stats.push(f0[(site, site)].re);
    }
    let diff = (ensemble_stats.mean() - volume_stats.mean()).abs();
    let sigma = (ensemble_stats.standard_error().powi(2)
        + volume_stats.standard_error().powi(2))
    .sqrt();
    let mut out = CriterionOutput::default();
    out.push(CheckRecord::upper(
        "12.birkhoff",
        diff,
        tol::SIGMA_FACTOR * sigma,
        format!(
            "|tuv_volume − tuv| for f(H), L=64, M=200 (σ = {sigma:.3e})"
        ),
    ));
    Ok(out)
}

/// Criterion 13: linear response — ‖ρ(0) − ζ(0)‖₂ scales like |E| over a
/// decade.
pub fn criterion_13_linear_response(cfg: &ExperimentConfig, seed: u64) -> Result<CriterionOutput> {
    let mut deviations = Vec::new();
    let amplitudes = [1e-3, 2e-3, 4e-3];
    for &e in &amplitudes {
        let mut scaled = cfg.clone();
        scaled.field.e = vec![e];
        let solver = DuhamelSolver::new(
            scaled.system_ensemble(Some(seed))?,
            scaled.equilibrium_spec(),
            scaled.liouville_config(),
        )?;
        let rho = solver.rho(0.0)?.rho.ensemble;
        let zeta0 = solver.zeta_at(0.0).ensemble;
        deviations.push(rho.sub(&zeta0)?.norm2_closed());
    }
    let slope_lo = (deviations[1] / deviations[0]).log2();
    let slope_hi = (deviations[2] / deviations[1]).log2();
    let mut out = CriterionOutput::default();
    out.push(CheckRecord::within(
        "13.response_slope_lo",
        slope_lo,
        tol::LINEAR_RESPONSE_LO,
        tol::LINEAR_RESPONSE_HI,
        "log₂ slope of ‖ρ(0) − ζ(0)‖₂ from |E| = 1e-3 → 2e-3",
    ));
    out.push(CheckRecord::within(
        "13.response_slope_hi",
        slope_hi,
        tol::LINEAR_RESPONSE_LO,
        tol::LINEAR_RESPONSE_HI,
        "log₂ slope from |E| = 2e-3 → 4e-3",
    ));
    out.series.push(Series {
        name: "linear_response".into(),
        header: vec!["e".into(), "deviation".into()],
        rows: amplitudes
            .iter()
            .zip(&deviations)
            .map(|(&e, &d)| vec![e, d])
            .collect(),
    });
    Ok(out)
}

/// Per-realization seeds used by criterion functions that sample their own
/// companion systems (kept here so tests can reproduce them).
pub fn companion_seed(master: u64, index: u64) -> u64 {
    realization_seed(master, index)
}
