//! Weak-derivative residuals of the propagator: the time derivative of
//! ⟨φ, U(t,s)ψ⟩ tested against the quadratic-form pairing of H(t)^{1/2},
//! by central finite differences. The residual must shrink O(h²), since
//! the identity itself is exact for the limit propagator.

use crate::hamiltonian::DrivenSystem;
use crate::linalg::{cr, CMatrix, CVector, C64, IM};

fn pairing(phi: &CVector, m: &CMatrix, psi: &CVector) -> C64 {
    (phi.adjoint() * m * psi)[(0, 0)]
}

/// |i ∂_t ⟨φ, U(t,s)ψ⟩ − ⟨H(t)^{1/2}φ, H(t)^{1/2} U(t,s) ψ⟩| with the
/// derivative replaced by the central difference at step h. `u` supplies
/// the propagator U(t', s') for arbitrary endpoint pairs.
pub fn weak_derivative_residual_t(
    sys: &DrivenSystem,
    u: &dyn Fn(f64, f64) -> CMatrix,
    t: f64,
    s: f64,
    phi: &CVector,
    psi: &CVector,
    h: f64,
) -> f64 {
    assert!(h > 0.0);
    let fd = (pairing(phi, &u(t + h, s), psi) - pairing(phi, &u(t - h, s), psi)) / cr(2.0 * h);
    // ⟨H^{1/2}φ, H^{1/2} U ψ⟩ = φ* H U ψ, assembled from the square root
    // so the form-domain pairing is what is actually evaluated
    let half = sys.hamiltonian(t).sqrt();
    let rhs = (phi.adjoint() * &half * &half * u(t, s) * psi)[(0, 0)];
    (IM * fd - rhs).norm()
}

/// The s-version: |i ∂_s ⟨φ, U(t,s)ψ⟩ + ⟨H(s)^{1/2} U(t,s)* φ, H(s)^{1/2} ψ⟩|.
pub fn weak_derivative_residual_s(
    sys: &DrivenSystem,
    u: &dyn Fn(f64, f64) -> CMatrix,
    t: f64,
    s: f64,
    phi: &CVector,
    psi: &CVector,
    h: f64,
) -> f64 {
    assert!(h > 0.0);
    let fd = (pairing(phi, &u(t, s + h), psi) - pairing(phi, &u(t, s - h), psi)) / cr(2.0 * h);
    let half = sys.hamiltonian(s).sqrt();
    // ⟨H^{1/2}U*φ, H^{1/2}ψ⟩ = φ* U H ψ
    let rhs = (phi.adjoint() * u(t, s) * &half * &half * psi)[(0, 0)];
    (IM * fd + rhs).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderModel;
    use crate::field::FieldProfile;
    use crate::geometry::LatticeGeometry;
    use crate::propagator::{PropagatorTable, StepRule};

    fn driven(l: usize, e: f64, seed: u64) -> DrivenSystem {
        let g = LatticeGeometry::open_unit(vec![l]).unwrap();
        let model = DisorderModel {
            v_plus_max: 1.0,
            v_minus_max: 0.0,
            link_phase_amplitude: 0.0,
            b_field: 0.0,
        };
        let r = model.sample(&g, seed);
        DrivenSystem::new(g, r, FieldProfile::new(vec![e], 1.0).unwrap()).unwrap()
    }

    fn test_vectors(n: usize, seed: u64) -> (CVector, CVector) {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut u = || (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0) - 0.5;
        let phi = CVector::from_fn(n, |_, _| C64::new(u(), u()));
        let psi = CVector::from_fn(n, |_, _| C64::new(u(), u()));
        (phi.normalize(), psi.normalize())
    }

    #[test]
    fn static_case_residual_is_fd_error() {
        // E = 0 with the exact exponential: the residual is the pure
        // O(h²) truncation of the central difference
        let sys = driven(6, 0.0, 1);
        let h0 = sys.hamiltonian(0.0);
        let u = move |t: f64, s: f64| h0.evolution(t - s);
        let (phi, psi) = test_vectors(6, 2);
        let r1 = weak_derivative_residual_t(&sys, &u, -0.3, -0.8, &phi, &psi, 1e-2);
        let r2 = weak_derivative_residual_t(&sys, &u, -0.3, -0.8, &phi, &psi, 5e-3);
        let slope = (r1 / r2).log2();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope:.3}");
    }

    #[test]
    fn driven_case_second_order_both_variables() {
        let sys = driven(6, 0.3, 3);
        let table = PropagatorTable::build(sys.clone(), -1.0, 0.1, 4096, StepRule::Midpoint);
        let u = move |t: f64, s: f64| table.matrix(t, s);
        let (phi, psi) = test_vectors(6, 4);
        let (t, s) = (-0.25, -0.75);
        let rt1 = weak_derivative_residual_t(&sys, &u, t, s, &phi, &psi, 1e-2);
        let rt2 = weak_derivative_residual_t(&sys, &u, t, s, &phi, &psi, 5e-3);
        let st = (rt1 / rt2).log2();
        assert!((st - 2.0).abs() < 0.2, "t-slope {st:.3}");
        let rs1 = weak_derivative_residual_s(&sys, &u, t, s, &phi, &psi, 1e-2);
        let rs2 = weak_derivative_residual_s(&sys, &u, t, s, &phi, &psi, 5e-3);
        let ss = (rs1 / rs2).log2();
        assert!((ss - 2.0).abs() < 0.2, "s-slope {ss:.3}");
    }

    #[test]
    fn s_version_sign_matters() {
        // flipping the sign of the form term must blow the residual up
        let sys = driven(6, 0.3, 5);
        let table = PropagatorTable::build(sys.clone(), -1.0, 0.1, 2048, StepRule::Midpoint);
        let u = move |t: f64, s: f64| table.matrix(t, s);
        let (phi, psi) = test_vectors(6, 6);
        let (t, s, h) = (-0.25, -0.75, 5e-3);
        let correct = weak_derivative_residual_s(&sys, &u, t, s, &phi, &psi, h);
        // wrong-sign variant computed inline
        let fd = (phi.adjoint() * u(t, s + h) * &psi - phi.adjoint() * u(t, s - h) * &psi)
            [(0, 0)]
            / cr(2.0 * h);
        let half = sys.hamiltonian(s).sqrt();
        let rhs = (phi.adjoint() * u(t, s) * &half * &half * &psi)[(0, 0)];
        let wrong = (IM * fd - rhs).norm();
        assert!(wrong > 10.0 * correct, "wrong {wrong:.3e} vs {correct:.3e}");
    }
}
