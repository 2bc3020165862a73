//! Finite-volume magnetic Schrödinger operators.
//!
//! The kinetic part is the nearest-neighbor discretization of (-i∇ - A)²
//! with the vector potential carried by Peierls phases on the links: the
//! hopping site → site+e_j is -(1/a²)·e^{-ia(θ_j + θ^B_j + F_j)}, the
//! diagonal is 2d/a² + V + γ. Encoding the field in link phases keeps gauge
//! covariance exact at finite volume: conjugation by e^{iF·x} shifts every
//! forward phase by exactly aF_j, so G(t) H G(t)* equals the operator built
//! at field F(t) to rounding. The test suite leans on this identity.

use crate::disorder::Realization;
use crate::error::{Error, Result};
use crate::field::FieldProfile;
use crate::geometry::{BoundaryMode, LatticeGeometry};
use crate::linalg::{cr, identity, operator_norm, CMatrix, HermitianOperator, IM};

/// Deterministic Landau-gauge phase value on the forward link at `site` in
/// direction `axis`: A_y = B·x on y-links, zero elsewhere. Stored as a
/// potential value; the hopping exponent multiplies it by the spacing.
fn landau_phase(geometry: &LatticeGeometry, b_field: f64, site: usize, axis: usize) -> f64 {
    if b_field == 0.0 || axis != 1 {
        return 0.0;
    }
    let x = geometry.site_coords(site)[0] as f64;
    b_field * geometry.spacing() * x
}

/// Total phase value on the forward link (disorder + Landau + field shift).
fn link_phase(
    geometry: &LatticeGeometry,
    realization: &Realization,
    field_shift: &[f64],
    site: usize,
    axis: usize,
) -> f64 {
    realization.link_phases[axis][site]
        + landau_phase(geometry, realization.b_field, site, axis)
        + field_shift[axis]
}

/// Peierls-discretized H(A + F, V) + γ.
///
/// Hermitian by construction, and with the ensemble offset γ the spectrum
/// sits at or above 1.
pub fn build_hamiltonian(
    geometry: &LatticeGeometry,
    realization: &Realization,
    field_shift: &[f64],
) -> Result<HermitianOperator> {
    if field_shift.len() != geometry.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "field shift has length {}, geometry dimension is {}",
            field_shift.len(),
            geometry.dimension()
        )));
    }
    if !realization.matches(geometry) {
        return Err(Error::DimensionMismatch(
            "realization does not match geometry".into(),
        ));
    }
    if field_shift.iter().any(|f| !f.is_finite()) {
        return Err(Error::NonFinite("field shift".into()));
    }
    let n = geometry.num_sites();
    let a = geometry.spacing();
    let inv_a2 = 1.0 / (a * a);
    let kinetic_diag = 2.0 * geometry.dimension() as f64 * inv_a2;
    let mut m = CMatrix::zeros(n, n);
    for site in 0..n {
        let v = realization.potential(site);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("potential sample at site {site}")));
        }
        m[(site, site)] = cr(kinetic_diag + v + realization.ground_offset);
        for axis in 0..geometry.dimension() {
            if let Some(nb) = geometry.neighbor(site, axis) {
                let phase = a * link_phase(geometry, realization, field_shift, site, axis);
                let hop = -cr(inv_a2) * (-IM * cr(phase)).exp();
                m[(site, nb)] += hop;
                m[(nb, site)] += hop.conj();
            }
        }
    }
    HermitianOperator::new(m)
}

/// A single disorder realization driven by the switched field: the
/// time-dependent operator family H(t) = H(A + F(t), V) + γ and its exact
/// time derivative.
#[derive(Debug, Clone)]
pub struct DrivenSystem {
    pub geometry: LatticeGeometry,
    pub realization: Realization,
    pub profile: FieldProfile,
}

impl DrivenSystem {
    pub fn new(
        geometry: LatticeGeometry,
        realization: Realization,
        profile: FieldProfile,
    ) -> Result<Self> {
        if profile.dimension() != geometry.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "field has dimension {}, geometry {}",
                profile.dimension(),
                geometry.dimension()
            )));
        }
        if !realization.matches(&geometry) {
            return Err(Error::DimensionMismatch(
                "realization does not match geometry".into(),
            ));
        }
        Ok(Self {
            geometry,
            realization,
            profile,
        })
    }

    pub fn dim(&self) -> usize {
        self.geometry.num_sites()
    }

    /// H(t), built at field shift F(t).
    pub fn hamiltonian(&self, t: f64) -> HermitianOperator {
        build_hamiltonian(
            &self.geometry,
            &self.realization,
            &self.profile.field_integral(t),
        )
        .expect("validated at construction")
    }

    /// The Peierls forward shift S_j(t): entries e^{-ia(θ+θ^B+F_j(t))} on
    /// (site, site+e_j).
    fn forward_shift(&self, t: f64, axis: usize) -> CMatrix {
        let n = self.dim();
        let a = self.geometry.spacing();
        let shift = self.profile.field_integral(t);
        let mut s = CMatrix::zeros(n, n);
        for site in 0..n {
            if let Some(nb) = self.geometry.neighbor(site, axis) {
                let phase = a * link_phase(&self.geometry, &self.realization, &shift, site, axis);
                s[(site, nb)] = (-IM * cr(phase)).exp();
            }
        }
        s
    }

    /// Discrete covariant derivative at field F(t):
    /// D_j(t) = (S_j(t) − S_j(t)†)/(2ia), the lattice analog of the
    /// component -i∂_j - A_j - F_j. Hermitian.
    pub fn covariant_derivative(&self, t: f64, axis: usize) -> CMatrix {
        let s = self.forward_shift(t, axis);
        let factor = cr(1.0) / (cr(2.0 * self.geometry.spacing()) * IM);
        (&s - s.adjoint()) * factor
    }

    /// Exact dH/dt = -2 Σ_j E_j(t) D_j(t). Only the hopping phases move
    /// with t, so this is an identity of the discretization, not an
    /// approximation.
    pub fn hamiltonian_rate(&self, t: f64) -> CMatrix {
        let n = self.dim();
        let e = self.profile.electric_field(t);
        let mut rate = CMatrix::zeros(n, n);
        for (axis, &ej) in e.iter().enumerate() {
            if ej != 0.0 {
                rate += self.covariant_derivative(t, axis) * cr(-2.0 * ej);
            }
        }
        rate
    }
}

/// Diagonal gauge transformation G(t) = e^{iF(t)·x}. Open mode has the
/// position measured from the volume center; on the torus the fundamental
/// domain convention applies (but the gauge identity itself only holds in
/// open mode, where x is globally consistent with the link structure).
pub fn gauge_unitary(geometry: &LatticeGeometry, profile: &FieldProfile, t: f64) -> CMatrix {
    let n = geometry.num_sites();
    let f = profile.field_integral(t);
    let mut g = CMatrix::zeros(n, n);
    for site in 0..n {
        let x = geometry.position(site);
        let phase: f64 = f.iter().zip(&x).map(|(fi, xi)| fi * xi).sum();
        g[(site, site)] = (IM * cr(phase)).exp();
    }
    g
}

/// ‖G(t) H(0-shift) G(t)* − H(F(t)-shift)‖: the lattice gauge identity,
/// exact to rounding in open mode.
pub fn gauge_identity_residual(
    geometry: &LatticeGeometry,
    realization: &Realization,
    profile: &FieldProfile,
    t: f64,
) -> Result<f64> {
    if geometry.boundary() != BoundaryMode::Open {
        return Err(Error::UnsupportedBoundary(
            "gauge identity needs a globally defined position (open mode)".into(),
        ));
    }
    let zero = vec![0.0; geometry.dimension()];
    let h0 = build_hamiltonian(geometry, realization, &zero)?;
    let ht = build_hamiltonian(geometry, realization, &profile.field_integral(t))?;
    let g = gauge_unitary(geometry, profile, t);
    let conjugated = &g * h0.matrix() * g.adjoint();
    Ok(operator_norm(&(conjugated - ht.matrix())))
}

/// Magnetic translation unitary U(a) on the torus: cyclic shift composed
/// with the diagonal phase that repairs the (unshifted) Landau gauge.
///
/// The phase is found by integrating the discrete gauge equation
/// χ(r+e_j) − χ(r) = a·(θ^B_j(r) − θ^B_j(r−a)) along a spanning tree and
/// then verified on every link; at B ≠ 0 the equation is solvable only on
/// the magnetic sublattice of shifts, and a non-closing shift is reported
/// as an error rather than silently mangled.
pub fn magnetic_translation(
    geometry: &LatticeGeometry,
    b_field: f64,
    shift: &[i64],
) -> Result<CMatrix> {
    if geometry.boundary() != BoundaryMode::Periodic {
        return Err(Error::UnsupportedBoundary(
            "magnetic translations need periodic boundary".into(),
        ));
    }
    if shift.len() != geometry.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "shift has length {}, geometry dimension is {}",
            shift.len(),
            geometry.dimension()
        )));
    }
    let n = geometry.num_sites();
    let a = geometry.spacing();
    let neg: Vec<i64> = shift.iter().map(|&s| -s).collect();
    // required phase difference along the forward link at `site`
    let delta = |site: usize, axis: usize| -> f64 {
        let back = geometry.shifted_site(site, &neg);
        a * (landau_phase(geometry, b_field, site, axis)
            - landau_phase(geometry, b_field, back, axis))
    };
    // integrate along a BFS spanning tree from site 0
    let mut chi = vec![f64::NAN; n];
    chi[0] = 0.0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(site) = queue.pop_front() {
        for axis in 0..geometry.dimension() {
            if let Some(nb) = geometry.neighbor(site, axis) {
                if chi[nb].is_nan() {
                    chi[nb] = chi[site] + delta(site, axis);
                    queue.push_back(nb);
                }
            }
        }
    }
    // closure check: every link equation must hold mod 2π
    for site in 0..n {
        for axis in 0..geometry.dimension() {
            if let Some(nb) = geometry.neighbor(site, axis) {
                let defect = chi[nb] - chi[site] - delta(site, axis);
                let wrapped = defect - std::f64::consts::TAU * (defect / std::f64::consts::TAU).round();
                if wrapped.abs() > 1e-9 {
                    return Err(Error::TranslationNotClosed {
                        shift: shift.to_vec(),
                        detail: format!(
                            "gauge equation fails on link {site}→{nb} by {wrapped:.3e}; \
                             the shift is off the magnetic sublattice for this flux"
                        ),
                    });
                }
            }
        }
    }
    let mut u = CMatrix::zeros(n, n);
    for site in 0..n {
        let from = geometry.shifted_site(site, &neg);
        u[(site, from)] = (IM * cr(chi[site])).exp();
    }
    Ok(u)
}

/// ‖U(a) H_ω U(a)* − H_{τ(a)ω}‖ at a fixed uniform field shift; the
/// covariance relation, exact on the torus.
pub fn covariance_residual(
    geometry: &LatticeGeometry,
    realization: &Realization,
    shift: &[i64],
    field_shift: &[f64],
) -> Result<f64> {
    let u = magnetic_translation(geometry, realization.b_field, shift)?;
    let h = build_hamiltonian(geometry, realization, field_shift)?;
    let shifted = realization.translated(geometry, shift)?;
    let h_shifted = build_hamiltonian(geometry, &shifted, field_shift)?;
    let conjugated = &u * h.matrix() * u.adjoint();
    Ok(operator_norm(&(conjugated - h_shifted.matrix())))
}

/// The plain lattice Laplacian −Δ (no phases, no potential, no offset).
pub fn neg_laplacian(geometry: &LatticeGeometry) -> CMatrix {
    let n = geometry.num_sites();
    let inv_a2 = 1.0 / (geometry.spacing() * geometry.spacing());
    let mut m = identity(n) * cr(2.0 * geometry.dimension() as f64 * inv_a2);
    for site in 0..n {
        for axis in 0..geometry.dimension() {
            if let Some(nb) = geometry.neighbor(site, axis) {
                m[(site, nb)] -= cr(inv_a2);
                m[(nb, site)] -= cr(inv_a2);
            }
        }
    }
    m
}

/// Relative form bound of the sampled negative part: true iff
/// α·(−Δ) + β − V₋ ≥ 0 as a quadratic form.
pub fn verify_form_bound(
    geometry: &LatticeGeometry,
    realization: &Realization,
    alpha: f64,
    beta: f64,
) -> Result<bool> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Validation {
            path: "form_bound.alpha".into(),
            message: format!("need 0 ≤ α < 1, got {alpha}"),
        });
    }
    if beta < 0.0 {
        return Err(Error::Validation {
            path: "form_bound.beta".into(),
            message: format!("need β ≥ 0, got {beta}"),
        });
    }
    let n = geometry.num_sites();
    let mut m = neg_laplacian(geometry) * cr(alpha) + identity(n) * cr(beta);
    for site in 0..n {
        m[(site, site)] -= cr(realization.v_minus[site]);
    }
    let h = HermitianOperator::new(m)?;
    // tolerate rounding at the boundary of positivity
    Ok(h.min_eigenvalue() >= -1e-12 * h.operator_norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderModel;
    use approx::assert_relative_eq;

    fn model() -> DisorderModel {
        DisorderModel {
            v_plus_max: 1.0,
            v_minus_max: 0.0,
            link_phase_amplitude: 0.4,
            b_field: 0.0,
        }
    }

    #[test]
    fn single_site_hamiltonian() {
        let g = LatticeGeometry::open_unit(vec![1]).unwrap();
        let mut r = model().sample(&g, 1);
        r.v_plus[0] = 0.0;
        let h = build_hamiltonian(&g, &r, &[0.0]).unwrap();
        // no edges: just 2d/a² + γ on the diagonal
        assert_relative_eq!(
            h.matrix()[(0, 0)].re,
            2.0 + r.ground_offset,
            epsilon = 1e-15
        );
        assert_eq!(h.dim(), 1);
    }

    #[test]
    fn zero_field_shift_is_identity_case() {
        let g = LatticeGeometry::open_unit(vec![5]).unwrap();
        let r = model().sample(&g, 3);
        let h0 = build_hamiltonian(&g, &r, &[0.0]).unwrap();
        let profile = FieldProfile::zero(1);
        let sys = DrivenSystem::new(g, r, profile).unwrap();
        let ht = sys.hamiltonian(0.7);
        assert_eq!(h0.matrix(), ht.matrix());
    }

    #[test]
    fn path_graph_spectrum_closed_form() {
        // d=1, L=4, open, V=0, θ=0, a=1: hopping part has eigenvalues
        // 2 − 2cos(kπ/5), k = 1..4
        let g = LatticeGeometry::open_unit(vec![4]).unwrap();
        let quiet = DisorderModel {
            v_plus_max: 0.0,
            v_minus_max: 0.0,
            link_phase_amplitude: 0.0,
            b_field: 0.0,
        };
        let r = quiet.sample(&g, 0);
        let h = build_hamiltonian(&g, &r, &[0.0]).unwrap();
        let gamma = r.ground_offset;
        let mut expected: Vec<f64> = (1..=4)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 5.0).cos() + gamma)
            .collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in h.eigensystem().values.iter().zip(&expected) {
            assert_relative_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn offset_spectrum_at_least_one() {
        let g = LatticeGeometry::open_unit(vec![12]).unwrap();
        let noisy = DisorderModel {
            v_plus_max: 1.0,
            v_minus_max: 0.5,
            link_phase_amplitude: 0.8,
            b_field: 0.0,
        };
        for seed in 0..8 {
            let r = noisy.sample(&g, seed);
            let h = build_hamiltonian(&g, &r, &[0.3]).unwrap();
            assert!(h.min_eigenvalue() >= 1.0, "seed {seed}");
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = LatticeGeometry::open_unit(vec![4]).unwrap();
        let r = model().sample(&g, 1);
        assert!(build_hamiltonian(&g, &r, &[0.0, 0.0]).is_err());
        let g2 = LatticeGeometry::open_unit(vec![5]).unwrap();
        assert!(build_hamiltonian(&g2, &r, &[0.0]).is_err());
    }

    #[test]
    fn non_finite_sample_rejected() {
        let g = LatticeGeometry::open_unit(vec![4]).unwrap();
        let mut r = model().sample(&g, 1);
        r.v_plus[2] = f64::NAN;
        assert!(matches!(
            build_hamiltonian(&g, &r, &[0.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn gauge_unitary_values() {
        // two sites at x = ±0.5 with F = π: phases e^{±iπ/2}
        let g = LatticeGeometry::open_unit(vec![2]).unwrap();
        let p = FieldProfile::new(vec![std::f64::consts::PI], 1.0).unwrap();
        let gm = gauge_unitary(&g, &p, 10.0);
        assert!((gm[(0, 0)].norm() - 1.0).abs() < 1e-14, "diagonal unitary");
        // zero field: identity
        let z = FieldProfile::zero(1);
        let gi = gauge_unitary(&g, &z, 0.3);
        assert!(crate::linalg::frobenius(&(gi - identity(2))) < 1e-15);
        // single site at x = 0
        let g1 = LatticeGeometry::open_unit(vec![1]).unwrap();
        let gu = gauge_unitary(&g1, &p, 0.0);
        assert_relative_eq!(gu[(0, 0)].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn gauge_identity_exact_on_lattice() {
        let g = LatticeGeometry::open_unit(vec![8]).unwrap();
        let r = model().sample(&g, 5);
        let p = FieldProfile::new(vec![0.4], 1.0).unwrap();
        for t in [-3.0, -0.5, 0.0, 1.0] {
            let res = gauge_identity_residual(&g, &r, &p, t).unwrap();
            let h = build_hamiltonian(&g, &r, &[0.0]).unwrap();
            assert!(
                res <= 1e-12 * h.operator_norm(),
                "t={t}: residual {res:.3e}"
            );
        }
        // zero field: residual identically zero
        let z = FieldProfile::zero(1);
        assert!(gauge_identity_residual(&g, &r, &z, 0.5).unwrap() < 1e-14);
    }

    #[test]
    fn gauge_identity_needs_open_mode() {
        let g = LatticeGeometry::periodic_unit(vec![8]).unwrap();
        let r = model().sample(&g, 5);
        let p = FieldProfile::new(vec![0.4], 1.0).unwrap();
        assert!(matches!(
            gauge_identity_residual(&g, &r, &p, 0.0),
            Err(Error::UnsupportedBoundary(_))
        ));
    }

    #[test]
    fn hamiltonian_rate_matches_finite_difference() {
        let g = LatticeGeometry::open_unit(vec![6]).unwrap();
        let r = model().sample(&g, 2);
        let p = FieldProfile::new(vec![0.3], 1.0).unwrap();
        let sys = DrivenSystem::new(g, r, p).unwrap();
        let t = -0.7;
        let rate = sys.hamiltonian_rate(t);
        let h = 1e-6;
        let fd = (sys.hamiltonian(t + h).matrix() - sys.hamiltonian(t - h).matrix())
            / cr(2.0 * h);
        assert!(crate::linalg::frobenius(&(rate - fd)) < 1e-8);
    }

    #[test]
    fn translation_identity_at_zero_shift() {
        let g = LatticeGeometry::periodic_unit(vec![6]).unwrap();
        let u = magnetic_translation(&g, 0.0, &[0]).unwrap();
        assert!(crate::linalg::frobenius(&(u - identity(6))) < 1e-15);
    }

    #[test]
    fn covariance_exact_b_zero() {
        let g = LatticeGeometry::periodic_unit(vec![8]).unwrap();
        let r = model().sample(&g, 11);
        let h = build_hamiltonian(&g, &r, &[0.0]).unwrap();
        for shift in [[1i64], [3], [7]] {
            let res = covariance_residual(&g, &r, &shift, &[0.0]).unwrap();
            assert!(res <= 1e-12 * h.operator_norm(), "shift {shift:?}: {res:.3e}");
        }
        // uniform potential: conjugated operator is translation invariant
        let quiet = DisorderModel {
            v_plus_max: 0.0,
            v_minus_max: 0.0,
            link_phase_amplitude: 0.0,
            b_field: 0.0,
        };
        let rq = quiet.sample(&g, 0);
        let res = covariance_residual(&g, &rq, &[3], &[0.2]).unwrap();
        assert!(res < 1e-13);
    }

    #[test]
    fn covariance_exact_with_flux() {
        // 4x4 torus with 4 flux quanta: B a² Lx = 2π, so single-site shifts
        // stay on the magnetic sublattice and close exactly
        let g = LatticeGeometry::periodic_unit(vec![4, 4]).unwrap();
        let m = DisorderModel {
            v_plus_max: 0.7,
            v_minus_max: 0.0,
            link_phase_amplitude: 0.0,
            b_field: std::f64::consts::TAU * 4.0 / 16.0,
        };
        m.validate(&g).unwrap();
        let r = m.sample(&g, 4);
        let h = build_hamiltonian(&g, &r, &[0.0, 0.0]).unwrap();
        for shift in [[1i64, 0], [0, 1], [2, 3]] {
            let res = covariance_residual(&g, &r, &shift, &[0.0, 0.0]).unwrap();
            assert!(res <= 1e-12 * h.operator_norm(), "shift {shift:?}: {res:.3e}");
        }
    }

    #[test]
    fn off_sublattice_translation_reports() {
        // one flux quantum on 4x4: single-site x-shift does not close
        let g = LatticeGeometry::periodic_unit(vec![4, 4]).unwrap();
        let b = std::f64::consts::TAU / 16.0;
        assert!(matches!(
            magnetic_translation(&g, b, &[1, 0]),
            Err(Error::TranslationNotClosed { .. })
        ));
    }

    #[test]
    fn translation_rejected_in_open_mode() {
        let g = LatticeGeometry::open_unit(vec![6]).unwrap();
        assert!(matches!(
            magnetic_translation(&g, 0.0, &[1]),
            Err(Error::UnsupportedBoundary(_))
        ));
    }

    #[test]
    fn form_bound_cases() {
        let g = LatticeGeometry::open_unit(vec![10]).unwrap();
        // V₋ = 0: holds with α = β = 0
        let r0 = model().sample(&g, 1);
        assert!(verify_form_bound(&g, &r0, 0.0, 0.0).unwrap());
        // constant V₋ ≡ μ: with α = 0 holds iff β ≥ μ
        let mut rc = r0.clone();
        rc.v_minus = vec![0.3; 10];
        assert!(verify_form_bound(&g, &rc, 0.0, 0.3).unwrap());
        assert!(!verify_form_bound(&g, &rc, 0.0, 0.2).unwrap());
        // sampled V₋ uniform on [0, 0.5] with β = 0.5
        let ms = DisorderModel {
            v_plus_max: 0.0,
            v_minus_max: 0.5,
            link_phase_amplitude: 0.0,
            b_field: 0.0,
        };
        let rs = ms.sample(&g, 9);
        assert!(verify_form_bound(&g, &rs, 0.0, 0.5).unwrap());
        // invalid ranges rejected
        assert!(verify_form_bound(&g, &r0, 1.0, 0.0).is_err());
        assert!(verify_form_bound(&g, &r0, 0.5, -0.1).is_err());
    }
}
