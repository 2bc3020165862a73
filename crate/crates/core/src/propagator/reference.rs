//! Reference propagator by adaptive Dormand-Prince 5(4) integration of the
//! matrix equation U' = -iH(t)U, U(s) = I.
//!
//! This is a diagnostics-only route, deliberately disjoint from the product
//! formula: a different algorithm through different code, used to fill the
//! `reference_deviation` field of convergence reports and as the
//! independent side of the convergence acceptance check. It is not the
//! propagation engine anywhere.

use crate::hamiltonian::DrivenSystem;
use crate::linalg::{cr, identity, CMatrix, IM};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th-order weights
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

/// Integrate U' = -iH(t)U from s to t with local error control at `tol`
/// (absolute, Frobenius per unit step). Handles either time ordering.
pub fn reference_propagator(sys: &DrivenSystem, t: f64, s: f64, tol: f64) -> CMatrix {
    let n = sys.dim();
    let mut u = identity(n);
    if t == s {
        return u;
    }
    let rhs = |time: f64, y: &CMatrix| -> CMatrix { sys.hamiltonian(time).matrix() * y * (-IM) };
    let span = t - s;
    let dir = span.signum();
    let mut x = s;
    // initial step from the generator scale
    let scale = sys.hamiltonian(s).operator_norm().max(1.0);
    let mut h = (0.1 / scale).min(span.abs()) * dir;
    let mut steps = 0usize;
    while (t - x) * dir > 1e-14 {
        if (x + h - t) * dir > 0.0 {
            h = t - x;
        }
        let k1 = rhs(x, &u);
        let k2 = rhs(x + C2 * h, &(&u + &k1 * cr(h * A21)));
        let k3 = rhs(x + C3 * h, &(&u + &k1 * cr(h * A31) + &k2 * cr(h * A32)));
        let k4 = rhs(
            x + C4 * h,
            &(&u + &k1 * cr(h * A41) + &k2 * cr(h * A42) + &k3 * cr(h * A43)),
        );
        let k5 = rhs(
            x + C5 * h,
            &(&u + &k1 * cr(h * A51) + &k2 * cr(h * A52) + &k3 * cr(h * A53) + &k4 * cr(h * A54)),
        );
        let k6 = rhs(
            x + h,
            &(&u
                + &k1 * cr(h * A61)
                + &k2 * cr(h * A62)
                + &k3 * cr(h * A63)
                + &k4 * cr(h * A64)
                + &k5 * cr(h * A65)),
        );
        let y5 = &u
            + (&k1 * cr(B1) + &k3 * cr(B3) + &k4 * cr(B4) + &k5 * cr(B5) + &k6 * cr(B6)) * cr(h);
        let k7 = rhs(x + h, &y5);
        let y4 = &u
            + (&k1 * cr(E1) + &k3 * cr(E3) + &k4 * cr(E4) + &k5 * cr(E5) + &k6 * cr(E6)
                + &k7 * cr(E7))
                * cr(h);
        let err = (&y5 - &y4).norm() / h.abs().max(1e-300);
        if err <= tol || h.abs() < 1e-12 {
            x += h;
            u = y5;
        }
        // PI-free classical step control
        let factor = if err > 0.0 {
            0.9 * (tol / err).powf(0.2)
        } else {
            5.0
        };
        h *= factor.clamp(0.2, 5.0);
        steps += 1;
        assert!(steps < 2_000_000, "reference integrator stalled");
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderModel;
    use crate::field::FieldProfile;
    use crate::geometry::LatticeGeometry;
    use crate::linalg::{operator_norm, unitarity_defect};

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

    #[test]
    fn static_generator_matches_exponential() {
        let sys = driven(6, 0.0, 1);
        let exact = sys.hamiltonian(0.0).evolution(0.7);
        let num = reference_propagator(&sys, -0.1, -0.8, 1e-11);
        assert!(operator_norm(&(num - exact)) < 1e-9);
    }

    #[test]
    fn driven_result_nearly_unitary_and_composes() {
        let sys = driven(6, 0.3, 2);
        let u = reference_propagator(&sys, 0.0, -1.0, 1e-11);
        assert!(unitarity_defect(&u) < 1e-8);
        let u1 = reference_propagator(&sys, 0.0, -0.5, 1e-12);
        let u2 = reference_propagator(&sys, -0.5, -1.0, 1e-12);
        assert!(operator_norm(&(u1 * u2 - u)) < 1e-7);
    }

    #[test]
    fn reverse_time_is_adjoint() {
        let sys = driven(5, 0.3, 3);
        let fwd = reference_propagator(&sys, 0.0, -0.7, 1e-11);
        let bwd = reference_propagator(&sys, -0.7, 0.0, 1e-11);
        assert!(operator_norm(&(bwd.adjoint() - fwd)) < 1e-8);
    }
}
