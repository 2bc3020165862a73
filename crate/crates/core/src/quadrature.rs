//! Gauss-Legendre quadrature, hand-rolled: node/weight tables via Newton
//! iteration on the Legendre recurrence. Used for the half-line operator
//! integrals (after the tan² substitution that removes the endpoint
//! singularity analytically) and for the time panels of the Duhamel
//! integral.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// n-point rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| half * w).collect(),
    )
}

/// Nodes/weights for ∫_0^∞ λ^{-1/2} f(λ) dλ via λ = tan²θ:
/// λ^{-1/2} dλ = 2 sec²θ dθ, so the integral becomes
/// 2 ∫_0^{π/2} f(tan²θ) sec²θ dθ with the endpoint singularity gone
/// analytically; plain Gauss-Legendre in θ then converges fast for
/// resolvent-type f. Returns the λ nodes and the weights with the full
/// Jacobian folded in.
pub fn half_line_sqrt_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (thetas, ws) = gauss_legendre_on(n, 0.0, std::f64::consts::FRAC_PI_2);
    let lambdas: Vec<f64> = thetas.iter().map(|t| t.tan().powi(2)).collect();
    let weights: Vec<f64> = thetas
        .iter()
        .zip(&ws)
        .map(|(t, w)| 2.0 * w / (t.cos() * t.cos()))
        .collect();
    (lambdas, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn five_point_nodes_match_tables() {
        let (x, w) = gauss_legendre(5);
        // classical values
        assert_relative_eq!(x[0], -0.906_179_845_938_664, epsilon = 1e-12);
        assert_relative_eq!(x[2], 0.0, epsilon = 1e-15);
        assert_relative_eq!(w[2], 0.568_888_888_888_889, epsilon = 1e-12);
    }

    #[test]
    fn integrates_polynomials_exactly() {
        // n points are exact through degree 2n-1
        let (x, w) = gauss_legendre(4);
        let int_x6: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(6)).sum();
        assert_relative_eq!(int_x6, 2.0 / 7.0, epsilon = 1e-13);
        let (x, w) = gauss_legendre_on(6, 0.0, 2.0);
        let int: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(3)).sum();
        assert_relative_eq!(int, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn half_line_rule_reproduces_inverse_sqrt_resolvent() {
        // (1/π) ∫ λ^{-1/2} (c+λ)^{-2} dλ = 1/(2 c^{3/2})
        let c = 3.7;
        let (lam, w) = half_line_sqrt_rule(64);
        let quad: f64 = lam
            .iter()
            .zip(&w)
            .map(|(l, wi)| wi / ((c + l) * (c + l)))
            .sum::<f64>()
            / std::f64::consts::PI;
        assert_relative_eq!(quad, 0.5 * c.powf(-1.5), epsilon = 1e-12);
    }
}
