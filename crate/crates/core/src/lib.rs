//! Finite-volume laboratory for disordered magnetic Schrödinger dynamics.
//!
//! The crate builds lattice discretizations of `H = (-i∇ - A)² + V` with
//! Peierls link phases, drives them with an adiabatically switched uniform
//! electric field, constructs the two-parameter unitary propagator by the
//! frozen-generator product formula, and evolves disorder-averaged density
//! matrices through the Liouville equation in the Hilbert space of covariant
//! operators. Every operator identity used along the way is exposed as a
//! runtime diagnostic with an explicit residual, so the whole construction is
//! executable and testable at desk scale.
//!
//! Module map:
//!
//! - [`geometry`], [`disorder`], [`field`], [`hamiltonian`]: lattice model,
//!   disorder ensembles, field profile, gauge and translation unitaries.
//! - [`linalg`]: dense Hermitian operators with cached spectral factorizations.
//! - [`propagator`]: product-formula propagators, the Γ/C operator calculus,
//!   Dyson reconstruction, and the reference integrator diagnostics.
//! - [`covariant`]: finite-volume surrogate of the covariant operator spaces
//!   (inner products, trace per unit volume, module products, ⋄ identities,
//!   the conjugation superoperator).
//! - [`liouville`]: equilibrium states, the Duhamel solution of the Liouville
//!   equation, quadratic forms, and their residual checks.
//! - [`harness`]: configuration, seeding, suites, reports, and persistence.

pub mod covariant;
pub mod disorder;
pub mod error;
pub mod field;
pub mod geometry;
pub mod hamiltonian;
pub mod harness;
pub mod linalg;
pub mod liouville;
pub mod propagator;
pub mod quadrature;
pub mod stats;
pub mod system;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, HermitianOperator, C64};

/// Map realization indices `0..m` through `f`, in parallel when the
/// `parallel` feature is on. Results come back index-ordered, so every
/// downstream reduction is deterministic regardless of thread count.
pub(crate) fn map_indexed<T: Send>(m: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..m).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..m).map(f).collect()
    }
}

/// Pairwise (tree) summation over a slice; fixed reduction order makes
/// ensemble means reproducible across thread counts.
pub(crate) fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + std::ops::Add<Output = T> + num_traits::Zero,
{
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
