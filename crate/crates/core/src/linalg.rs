//! Dense complex linear algebra: the `HermitianOperator` wrapper with a
//! cached spectral factorization, and the handful of matrix utilities the
//! rest of the crate leans on.
//!
//! At desk scale (N ≤ a few thousand) full eigendecomposition is cheap and
//! we need functions of the operator (H^{±1/2}, e^{-itH}, resolvents)
//! constantly, so everything routes through one factorization per operator.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = num_complex::Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

/// i as a `C64`.
pub const IM: C64 = C64::new(0.0, 1.0);

pub fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Eigensystem of a Hermitian matrix, eigenvalues ascending and the
/// eigenvector matrix unitary.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigensystem {
    /// V f(Λ) V* for a scalar function of the spectrum.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        // scale columns of V by f(λ), then multiply by V*
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fj = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// Daleckii-Krein derivative of a matrix function: given the rate
    /// `hdot` of the underlying operator, returns d/ds f(H(s)) via divided
    /// differences of `f` on the spectrum.
    pub fn map_derivative(
        &self,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
        hdot: &CMatrix,
    ) -> CMatrix {
        let n = self.values.len();
        let b = self.vectors.adjoint() * hdot * &self.vectors;
        let mut c = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (li, lj) = (self.values[i], self.values[j]);
                let dd = if (li - lj).abs() < 1e-9 * li.abs().max(1.0) {
                    df(0.5 * (li + lj))
                } else {
                    (f(li) - f(lj)) / (li - lj)
                };
                c[(i, j)] = b[(i, j)] * cr(dd);
            }
        }
        &self.vectors * c * self.vectors.adjoint()
    }
}

/// Dense complex Hermitian matrix with a lazily computed, cached spectral
/// factorization. Immutable after construction; safe to share across
/// threads (the factorization is computed at most once).
#[derive(Debug)]
pub struct HermitianOperator {
    mat: CMatrix,
    eig: OnceLock<Eigensystem>,
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        let eig = OnceLock::new();
        if let Some(e) = self.eig.get() {
            let _ = eig.set(e.clone());
        }
        Self {
            mat: self.mat.clone(),
            eig,
        }
    }
}

impl HermitianOperator {
    /// Wrap a matrix, enforcing hermiticity to `tol::HERMITICITY_REL`
    /// (relative Frobenius asymmetry) and finiteness of every entry.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "expected square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        let scale = mat.norm().max(f64::MIN_POSITIVE);
        let asymmetry = (&mat - mat.adjoint()).norm() / scale;
        if asymmetry > tol::HERMITICITY_REL {
            return Err(Error::NotHermitian {
                asymmetry,
                limit: tol::HERMITICITY_REL,
            });
        }
        Ok(Self {
            mat,
            eig: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Spectral factorization, computed on first use. The matrix is
    /// symmetrized before the decomposition and the eigenpairs are sorted
    /// ascending (the backend returns them unordered).
    pub fn eigensystem(&self) -> &Eigensystem {
        self.eig.get_or_init(|| {
            let n = self.mat.nrows();
            let sym = (&self.mat + self.mat.adjoint()) * cr(0.5);
            let se = nalgebra::SymmetricEigen::new(sym);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
            let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
            let mut vectors = CMatrix::zeros(n, n);
            for (new_col, &old_col) in order.iter().enumerate() {
                vectors.set_column(new_col, &se.eigenvectors.column(old_col));
            }
            Eigensystem { values, vectors }
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigensystem().values[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigensystem().values.last().unwrap()
    }

    /// Operator norm = max |λ|.
    pub fn operator_norm(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }

    /// f(H) through the cached factorization.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        self.eigensystem().map(f)
    }

    /// H^{1/2} (spectrum must be positive; guarded by the offset convention).
    pub fn sqrt(&self) -> CMatrix {
        self.map_spectrum(|l| cr(l.max(0.0).sqrt()))
    }

    /// H^{-1/2}.
    pub fn inv_sqrt(&self) -> CMatrix {
        self.map_spectrum(|l| cr(1.0 / l.max(f64::MIN_POSITIVE).sqrt()))
    }

    /// e^{-i dt H}: the step kernel of the product-formula propagator.
    /// Unitary to rounding because the factorization is.
    pub fn evolution(&self, dt: f64) -> CMatrix {
        self.map_spectrum(|l| (-IM * cr(dt * l)).exp())
    }

    /// (H + λ)^{-1} for λ ≥ 0.
    pub fn resolvent(&self, lambda: f64) -> CMatrix {
        self.map_spectrum(|l| cr(1.0 / (l + lambda)))
    }

    /// Daleckii-Krein: d/ds f(H(s)) given dH/ds.
    pub fn map_derivative(
        &self,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
        hdot: &CMatrix,
    ) -> CMatrix {
        self.eigensystem().map_derivative(f, df, hdot)
    }
}

/// Operator (spectral) norm of a general complex matrix, via the largest
/// eigenvalue of M*M.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let se = nalgebra::SymmetricEigen::new(gram);
    se.eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.max(0.0)))
        .sqrt()
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn trace(m: &CMatrix) -> C64 {
    let mut t = C64::default();
    for i in 0..m.nrows().min(m.ncols()) {
        t += m[(i, i)];
    }
    t
}

/// ‖U*U − I‖ (operator norm): unitarity defect.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    operator_norm(&(u.adjoint() * u - identity(n)))
}

/// Balanced (tree) product of a sequence of matrices, preserving order:
/// `factors[0] * factors[1] * ... * factors[n-1]`. The tree shape keeps
/// rounding growth logarithmic in the factor count, which matters for
/// products of tens of thousands of step exponentials.
pub fn ordered_product(factors: &[CMatrix]) -> CMatrix {
    match factors.len() {
        0 => panic!("ordered_product of empty sequence"),
        1 => factors[0].clone(),
        n => {
            let (a, b) = factors.split_at(n / 2);
            ordered_product(a) * ordered_product(b)
        }
    }
}
