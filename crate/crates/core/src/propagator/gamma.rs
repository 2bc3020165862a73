//! The Γ/C operator calculus: how fast the square root of the generator
//! turns with time.
//!
//! Γ(t,s) = H(t)^{1/2} H(s)^{-1/2} − I measures form-domain compatibility
//! across times; its rate sup over an interval is the constant every
//! product-formula bound runs on. C(t,s) = H(s)^{-1/2}(H(t)−H(s))H(s)^{-1/2}
//! is the resolvent-friendly version; both have closed small-time limits
//! that the lattice realizes exactly through dH/dt = -2E(t)·D(t), and a
//! half-line resolvent integral (tan²-substituted Gauss quadrature) ties
//! the two together.

use crate::hamiltonian::DrivenSystem;
use crate::linalg::{cr, identity, operator_norm, CMatrix, HermitianOperator};
use crate::quadrature::half_line_sqrt_rule;

/// Γ(t,s) with its endpoints.
#[derive(Debug, Clone)]
pub struct GammaOperator {
    pub matrix: CMatrix,
    pub t: f64,
    pub s: f64,
}

/// Γ(t,s) = H(t)^{1/2} H(s)^{-1/2} − I.
pub fn gamma(sys: &DrivenSystem, t: f64, s: f64) -> GammaOperator {
    let n = sys.dim();
    let matrix = if t == s {
        // one factorization, exact cancellation
        CMatrix::zeros(n, n)
    } else {
        sys.hamiltonian(t).sqrt() * sys.hamiltonian(s).inv_sqrt() - identity(n)
    };
    GammaOperator { matrix, t, s }
}

/// Γ(t,s)/(t−s); the quantity whose interval sup is the product-formula
/// constant.
pub fn gamma_rate(sys: &DrivenSystem, t: f64, s: f64) -> CMatrix {
    assert!(t != s, "gamma_rate needs t ≠ s");
    gamma(sys, t, s).matrix / cr(t - s)
}

/// One-sided limits of the Γ rate at u, by two-point Richardson
/// extrapolation over the tail of `h_seq` (decreasing, > 0):
/// Γ₁(u) = lim_{t↑u} Γ(t,u)/(u−t), Γ₂(u) = lim_{s↑u} Γ(u,s)/(u−s).
/// `residuals[i]` = ‖Γ₁^{(h_i)} + Γ₂^{(h_i)}‖, which must shrink linearly
/// in h since the limits cancel.
#[derive(Debug, Clone)]
pub struct OneSidedLimits {
    pub gamma1: CMatrix,
    pub gamma2: CMatrix,
    pub residuals: Vec<f64>,
}

pub fn gamma_one_sided(sys: &DrivenSystem, u: f64, h_seq: &[f64]) -> OneSidedLimits {
    assert!(h_seq.len() >= 2, "need at least two step sizes");
    assert!(
        h_seq.windows(2).all(|w| w[1] < w[0]) && *h_seq.last().unwrap() > 0.0,
        "h sequence must decrease to 0"
    );
    let h_u = sys.hamiltonian(u);
    let (sqrt_u, inv_sqrt_u) = (h_u.sqrt(), h_u.inv_sqrt());
    let n = sys.dim();
    let pair = |h: f64| -> (CMatrix, CMatrix) {
        let h_m = sys.hamiltonian(u - h);
        // Γ(u−h, u)/h and Γ(u, u−h)/h share the two factorizations
        let g1 = (h_m.sqrt() * &inv_sqrt_u - identity(n)) / cr(h);
        let g2 = (&sqrt_u * h_m.inv_sqrt() - identity(n)) / cr(h);
        (g1, g2)
    };
    let mut residuals = Vec::with_capacity(h_seq.len());
    let mut last_two: Vec<(f64, CMatrix, CMatrix)> = Vec::new();
    for &h in h_seq {
        let (g1, g2) = pair(h);
        residuals.push(operator_norm(&(&g1 + &g2)));
        last_two.push((h, g1, g2));
        if last_two.len() > 2 {
            last_two.remove(0);
        }
    }
    let (h1, g1a, g2a) = last_two.remove(0);
    let (h2, g1b, g2b) = last_two.remove(0);
    // first-order Richardson: X ≈ (h1·X(h2) − h2·X(h1))/(h1 − h2)
    let extrap = |xa: &CMatrix, xb: &CMatrix| (xb * cr(h1) - xa * cr(h2)) / cr(h1 - h2);
    OneSidedLimits {
        gamma1: extrap(&g1a, &g1b),
        gamma2: extrap(&g2a, &g2b),
        residuals,
    }
}

/// Spectral (divided-difference) route to Γ₂(u) = −H(u)^{1/2} d/ds
/// H(s)^{-1/2}|_{s=u}, exact given the exact lattice rate dH/dt. Used as
/// the kernel of the Dyson recursion.
pub fn gamma2_spectral(sys: &DrivenSystem, u: f64) -> CMatrix {
    let h = sys.hamiltonian(u);
    let hdot = sys.hamiltonian_rate(u);
    let d_inv_sqrt = h.map_derivative(|l| l.powf(-0.5), |l| -0.5 * l.powf(-1.5), &hdot);
    -(h.sqrt() * d_inv_sqrt)
}

/// Half-line resolvent quadrature for Γ₁(u):
/// Γ₁(u) = −(1/π) ∫ λ^{-1/2} T_λ H^{1/2} C(u) T_λ dλ with
/// T_λ = H^{1/2}(H+λ)^{-1}, everything at time u.
pub fn gamma1_closed_form(sys: &DrivenSystem, u: f64, nodes: usize) -> CMatrix {
    let h = sys.hamiltonian(u);
    let c_u = c_closed_form(sys, u);
    let half_c = h.sqrt() * c_u;
    let (lambdas, weights) = half_line_sqrt_rule(nodes);
    let n = sys.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (&lam, &w) in lambdas.iter().zip(&weights) {
        let t_lam = h.map_spectrum(|l| cr(l.sqrt() / (l + lam)));
        acc += &t_lam * &half_c * &t_lam * cr(w);
    }
    -(acc / cr(std::f64::consts::PI))
}

/// Grid estimate of the interval rate constant sup ‖Γ(t,s)‖/|t−s|.
/// The grid includes all pairs of `points` uniform samples (endpoints in),
/// so refining the grid only ever adds pairs and the estimate is monotone
/// nondecreasing.
pub fn gamma_rate_sup(sys: &DrivenSystem, interval: (f64, f64), points: usize) -> f64 {
    assert!(points >= 2);
    let ts: Vec<f64> = (0..points)
        .map(|i| interval.0 + (interval.1 - interval.0) * i as f64 / (points - 1) as f64)
        .collect();
    let hams: Vec<HermitianOperator> = ts.iter().map(|&t| sys.hamiltonian(t)).collect();
    let sqrts: Vec<CMatrix> = hams.iter().map(|h| h.sqrt()).collect();
    let inv_sqrts: Vec<CMatrix> = hams.iter().map(|h| h.inv_sqrt()).collect();
    let n = sys.dim();
    let mut sup: f64 = 0.0;
    for i in 0..points {
        for j in 0..points {
            if i == j {
                continue;
            }
            let g = &sqrts[i] * &inv_sqrts[j] - identity(n);
            sup = sup.max(operator_norm(&g) / (ts[i] - ts[j]).abs());
        }
    }
    sup
}

/// Companion estimate sup ‖H(s)^{1/2} C(t,s)‖/|t−s| over the same grid.
pub fn h_half_c_rate_sup(sys: &DrivenSystem, interval: (f64, f64), points: usize) -> f64 {
    assert!(points >= 2);
    let ts: Vec<f64> = (0..points)
        .map(|i| interval.0 + (interval.1 - interval.0) * i as f64 / (points - 1) as f64)
        .collect();
    let hams: Vec<HermitianOperator> = ts.iter().map(|&t| sys.hamiltonian(t)).collect();
    let mut sup: f64 = 0.0;
    for i in 0..ts.len() {
        for j in 0..ts.len() {
            if i == j {
                continue;
            }
            // H(s)^{1/2} C(t,s) collapses to (H(t) − H(s)) H(s)^{-1/2}
            let diff = hams[i].matrix() - hams[j].matrix();
            let m = diff * hams[j].inv_sqrt();
            sup = sup.max(operator_norm(&m) / (ts[i] - ts[j]).abs());
        }
    }
    sup
}

/// C(t,s) = H(s)^{-1/2}(H(t) − H(s))H(s)^{-1/2}, the definition route.
pub fn c_operator(sys: &DrivenSystem, t: f64, s: f64) -> CMatrix {
    let h_t = sys.hamiltonian(t);
    let h_s = sys.hamiltonian(s);
    let inv = h_s.inv_sqrt();
    let diff = h_t.matrix() - h_s.matrix();
    &inv * diff * &inv
}

/// C(t,s) assembled from the hopping-phase difference directly: only the
/// Peierls factors move with the field, so H(t) − H(s) is the sum over
/// directions of the forward-shift differences plus adjoints — no diagonal
/// and no potential. Agreement with `c_operator` checks exactly that.
pub fn c_operator_field_form(sys: &DrivenSystem, t: f64, s: f64) -> CMatrix {
    let inv = sys.hamiltonian(s).inv_sqrt();
    let diff = hopping_difference(sys, t, s);
    &inv * diff * &inv
}

/// The exact lattice H(t) − H(s) from phase factors alone.
fn hopping_difference(sys: &DrivenSystem, t: f64, s: f64) -> CMatrix {
    let n = sys.dim();
    let a = sys.geometry.spacing();
    let f_t = sys.profile.field_integral(t);
    let f_s = sys.profile.field_integral(s);
    let mut m = CMatrix::zeros(n, n);
    for site in 0..n {
        for axis in 0..sys.geometry.dimension() {
            if let Some(nb) = sys.geometry.neighbor(site, axis) {
                let base = sys.realization.link_phases[axis][site]
                    + landau_like_phase(sys, site, axis);
                let hop = |f: f64| -> crate::linalg::C64 {
                    -cr(1.0 / (a * a)) * (-crate::linalg::IM * cr(a * (base + f))).exp()
                };
                let d = hop(f_t[axis]) - hop(f_s[axis]);
                m[(site, nb)] += d;
                m[(nb, site)] += d.conj();
            }
        }
    }
    m
}

fn landau_like_phase(sys: &DrivenSystem, site: usize, axis: usize) -> f64 {
    if sys.realization.b_field == 0.0 || axis != 1 {
        return 0.0;
    }
    let x = sys.geometry.site_coords(site)[0] as f64;
    sys.realization.b_field * sys.geometry.spacing() * x
}

/// The small-time limit C(s) = lim_{t↑s} C(t,s)/(t−s)
/// = H(s)^{-1/2} dH/ds H(s)^{-1/2}, with the rate evaluated through the
/// field-shifted covariant derivative (the lattice-exact combination of the
/// F′·F and F′·D contributions).
pub fn c_closed_form(sys: &DrivenSystem, s: f64) -> CMatrix {
    let inv = sys.hamiltonian(s).inv_sqrt();
    &inv * sys.hamiltonian_rate(s) * &inv
}

/// Richardson-extrapolated C(t,s)/(t−s) as t ↑ s along `h_seq`.
pub fn c_limit(sys: &DrivenSystem, s: f64, h_seq: &[f64]) -> CMatrix {
    assert!(h_seq.len() >= 2 && h_seq.windows(2).all(|w| w[1] < w[0]));
    let h_s = sys.hamiltonian(s);
    let inv = h_s.inv_sqrt();
    let rate = |h: f64| -> CMatrix {
        let h_t = sys.hamiltonian(s - h);
        let diff = h_t.matrix() - h_s.matrix();
        (&inv * diff * &inv) / cr(-h)
    };
    let h1 = h_seq[h_seq.len() - 2];
    let h2 = h_seq[h_seq.len() - 1];
    let (xa, xb) = (rate(h1), rate(h2));
    (xb * cr(h1) - xa * cr(h2)) / cr(h1 - h2)
}

/// Residual of the half-line resolvent representation of
/// H(s)^{-1/2} − H(t)^{-1/2}: the left side from the factorizations, the
/// right side by the substituted Gauss rule on
/// (1/π)∫ λ^{-1/2}(H(t)+λ)^{-1} H(s)^{1/2} C(t,s) H(s)^{1/2}(H(s)+λ)^{-1} dλ.
pub fn dunford_taylor_residual(sys: &DrivenSystem, t: f64, s: f64, nodes: usize) -> f64 {
    let h_t = sys.hamiltonian(t);
    let h_s = sys.hamiltonian(s);
    let lhs = h_s.inv_sqrt() - h_t.inv_sqrt();
    let sqrt_s = h_s.sqrt();
    let middle = &sqrt_s * c_operator(sys, t, s) * &sqrt_s;
    let (lambdas, weights) = half_line_sqrt_rule(nodes);
    let n = sys.dim();
    let mut rhs = CMatrix::zeros(n, n);
    for (&lam, &w) in lambdas.iter().zip(&weights) {
        rhs += h_t.resolvent(lam) * &middle * h_s.resolvent(lam) * cr(w);
    }
    rhs /= cr(std::f64::consts::PI);
    operator_norm(&(lhs - rhs))
}
