//! Finite-volume surrogate of the covariant operator spaces: seeded
//! matrix families with the K₂ inner products, the trace per unit volume,
//! the left/right module products, the ‡ involution, the ⋄ pairing with its
//! centrality identities, and the conjugation superoperator.
//!
//! Two pairings coexist and both are exposed:
//!
//! - the *cell* forms (`inner_cell`, `tuv`) compress through the reference
//!   cell χ₀ and average over realizations — the direct finite-volume
//!   reading of the disorder-averaged definitions; they fluctuate at
//!   O(1/√M) and feed the ensemble statistics (Birkhoff comparisons,
//!   distributional invariance);
//! - the *closed* forms (`inner_closed`, `tuv_closed`) average the cell
//!   forms over the whole translation orbit, which collapses to the
//!   normalized full trace tr(·)/N_cells. Trace cyclicity then makes every
//!   covariance-based operator identity (centrality of ⋄, isometry of the
//!   conjugation map, the bath identity) exact per realization, so those
//!   identities can be asserted at rounding precision instead of
//!   statistically. The two pairings agree in expectation.

use crate::error::{Error, Result};
use crate::geometry::LatticeGeometry;
use crate::linalg::{cr, identity, operator_norm, CMatrix, HermitianOperator, C64};
use crate::{map_indexed, pairwise_sum};

/// Projection onto the sites of one unit cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProjector {
    label: Vec<i64>,
    sites: Vec<usize>,
}

impl CellProjector {
    pub fn new(geometry: &LatticeGeometry, label: Vec<i64>) -> Self {
        let sites = geometry.cell_sites(&label);
        Self { label, sites }
    }

    /// χ₀: the reference cell of the geometry.
    pub fn reference(geometry: &LatticeGeometry) -> Self {
        Self::new(geometry, geometry.reference_cell())
    }

    pub fn label(&self) -> &[i64] {
        &self.label
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// The full-size projection matrix χ.
    pub fn matrix(&self, n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for &s in &self.sites {
            m[(s, s)] = cr(1.0);
        }
        m
    }

    /// tr(χ M χ) = Σ_{c in cell} M_cc.
    pub fn block_trace(&self, m: &CMatrix) -> C64 {
        self.sites.iter().map(|&c| m[(c, c)]).sum()
    }

    /// tr((Aχ)* Bχ) = Σ_{c in cell} ⟨A e_c, B e_c⟩ without forming products.
    pub fn column_pairing(&self, a: &CMatrix, b: &CMatrix) -> C64 {
        let mut acc = C64::default();
        for &c in &self.sites {
            for k in 0..a.nrows() {
                acc += a[(k, c)].conj() * b[(k, c)];
            }
        }
        acc
    }
}

/// A seeded family ω ↦ A_ω of same-shape matrices over one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantEnsemble {
    geometry: LatticeGeometry,
    seeds: Vec<u64>,
    mats: Vec<CMatrix>,
}

impl CovariantEnsemble {
    pub fn from_matrices(
        geometry: LatticeGeometry,
        seeds: Vec<u64>,
        mats: Vec<CMatrix>,
    ) -> Result<Self> {
        if seeds.len() != mats.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} seeds vs {} matrices",
                seeds.len(),
                mats.len()
            )));
        }
        let n = geometry.num_sites();
        if mats.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch(
                "ensemble matrix does not match geometry volume".into(),
            ));
        }
        Ok(Self {
            geometry,
            seeds,
            mats,
        })
    }

    /// The same matrix for every realization (deterministic elements like
    /// projectors or the identity).
    pub fn constant(geometry: LatticeGeometry, seeds: Vec<u64>, mat: CMatrix) -> Result<Self> {
        let mats = vec![mat; seeds.len()];
        Self::from_matrices(geometry, seeds, mats)
    }

    pub fn identity_element(geometry: LatticeGeometry, seeds: Vec<u64>) -> Self {
        let n = geometry.num_sites();
        Self::constant(geometry, seeds, identity(n)).expect("identity matches geometry")
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.seeds.clone()
    }

    pub fn matrix(&self, i: usize) -> &CMatrix {
        &self.mats[i]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.mats
    }

    /// Seeds and geometry must agree before any per-realization pairing;
    /// silent re-pairing would break every per-ω identity.
    pub fn check_paired(&self, other: &Self) -> Result<()> {
        if self.geometry != other.geometry {
            return Err(Error::DimensionMismatch(
                "ensembles live on different geometries".into(),
            ));
        }
        if self.seeds != other.seeds {
            return Err(Error::SeedMismatch(format!(
                "left has {} seeds starting {:?}, right has {} starting {:?}",
                self.seeds.len(),
                self.seeds.first(),
                other.seeds.len(),
                other.seeds.first()
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(&CMatrix) -> CMatrix + Sync + Send) -> Self {
        let mats = map_indexed(self.len(), |i| f(&self.mats[i]));
        Self {
            geometry: self.geometry.clone(),
            seeds: self.seeds.clone(),
            mats,
        }
    }

    pub fn zip(
        &self,
        other: &Self,
        f: impl Fn(&CMatrix, &CMatrix) -> CMatrix + Sync + Send,
    ) -> Result<Self> {
        self.check_paired(other)?;
        let mats = map_indexed(self.len(), |i| f(&self.mats[i], &other.mats[i]));
        Ok(Self {
            geometry: self.geometry.clone(),
            seeds: self.seeds.clone(),
            mats,
        })
    }

    /// ‡: per-realization adjoint; an involution.
    pub fn dagger(&self) -> Self {
        self.map(|m| m.adjoint())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: C64) -> Self {
        self.map(|m| m * factor)
    }

    fn mean_over(&self, per: impl Fn(usize) -> C64 + Sync + Send) -> C64 {
        let vals = map_indexed(self.len(), per);
        pairwise_sum(&vals) / cr(self.len() as f64)
    }

    /// Cell inner product: E_M tr((A_ω χ₀)* B_ω χ₀). Conjugate-linear in
    /// the first slot.
    pub fn inner_cell(&self, other: &Self) -> Result<C64> {
        self.check_paired(other)?;
        let chi = CellProjector::reference(&self.geometry);
        Ok(self.mean_over(|i| chi.column_pairing(&self.mats[i], &other.mats[i])))
    }

    /// Translation-closed inner product: E_M tr(A_ω* B_ω)/N_cells — the
    /// cell pairing averaged over the whole translation orbit.
    pub fn inner_closed(&self, other: &Self) -> Result<C64> {
        self.check_paired(other)?;
        let cells = self.geometry.num_cells() as f64;
        Ok(self.mean_over(|i| frobenius_pairing(&self.mats[i], &other.mats[i]) / cr(cells)))
    }

    pub fn norm2_cell(&self) -> f64 {
        self.inner_cell(self)
            .expect("self-pairing")
            .re
            .max(0.0)
            .sqrt()
    }

    pub fn norm2_closed(&self) -> f64 {
        self.inner_closed(self)
            .expect("self-pairing")
            .re
            .max(0.0)
            .sqrt()
    }

    /// Cell 1-norm estimate: E_M tr(χ₀ |A_ω| χ₀) with |A| from the spectral
    /// factorization of A*A.
    pub fn norm1_cell(&self) -> f64 {
        let chi = CellProjector::reference(&self.geometry);
        let traces = map_indexed(self.len(), |i| {
            let a = &self.mats[i];
            let gram =
                HermitianOperator::new(a.adjoint() * a).expect("gram matrix is Hermitian");
            let abs = gram.map_spectrum(|l| cr(l.max(0.0).sqrt()));
            chi.block_trace(&abs)
        });
        pairwise_sum(&traces).re / self.len() as f64
    }

    /// sup-norm estimate: max over realizations of the operator norm.
    pub fn norm_inf(&self) -> f64 {
        let norms = map_indexed(self.len(), |i| operator_norm(&self.mats[i]));
        norms.into_iter().fold(0.0, f64::max)
    }

    /// Trace per unit volume, cell form: E_M tr(χ₀ A_ω χ₀).
    pub fn tuv(&self) -> C64 {
        let chi = CellProjector::reference(&self.geometry);
        self.mean_over(|i| chi.block_trace(&self.mats[i]))
    }

    /// Volume average of a single realization: |Λ|^{-1} Σ_a tr(χ_a A χ_a)
    /// = tr(A)/N_cells — the Birkhoff side of the trace per unit volume.
    pub fn tuv_volume(&self, index: usize) -> C64 {
        crate::linalg::trace(&self.mats[index]) / cr(self.geometry.num_cells() as f64)
    }

    /// Ensemble mean of the volume averages (the translation closure of
    /// `tuv`).
    pub fn tuv_closed(&self) -> C64 {
        let cells = self.geometry.num_cells() as f64;
        self.mean_over(|i| crate::linalg::trace(&self.mats[i]) / cr(cells))
    }
}

fn frobenius_pairing(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::default();
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}

/// Left module product B ⊙_L A = B_ω A_ω.
pub fn odot_l(bounded: &CovariantEnsemble, a: &CovariantEnsemble) -> Result<CovariantEnsemble> {
    bounded.zip(a, |b, a| b * a)
}

/// Right module product A ⊙_R B = (B* ⊙_L A‡)‡, built literally through
/// the involution so the defining identity holds exactly, not just to
/// rounding.
pub fn odot_r(a: &CovariantEnsemble, bounded: &CovariantEnsemble) -> Result<CovariantEnsemble> {
    let b_star = bounded.dagger();
    Ok(odot_l(&b_star, &a.dagger())?.dagger())
}

/// ⋄: the pointwise product landing in the trace-class slot.
pub fn diamond(a: &CovariantEnsemble, b: &CovariantEnsemble) -> Result<CovariantEnsemble> {
    a.zip(b, |x, y| x * y)
}

/// Residuals of the three centrality identities of the trace per unit
/// volume, evaluated with the translation-closed forms (where they are
/// exact by cyclicity):
///   T(A⋄B) = ⟨⟨A‡, B⟩⟩,  T(A⋄B) = T(B⋄A),
///   T((C ⊙_L A)⋄B) = T(A⋄(B ⊙_R C)).
#[derive(Debug, Clone, Copy)]
pub struct DiamondResiduals {
    pub inner_product: f64,
    pub symmetry: f64,
    pub module: f64,
    /// Natural magnitude of the operands, for relative gates:
    /// ‖A‖₂‖B‖₂(1 + ‖C‖_∞).
    pub scale: f64,
}

pub fn diamond_identity_residuals(
    a: &CovariantEnsemble,
    b: &CovariantEnsemble,
    c: &CovariantEnsemble,
) -> Result<DiamondResiduals> {
    let t_ab = diamond(a, b)?.tuv_closed();
    let t_ba = diamond(b, a)?.tuv_closed();
    let pairing = a.dagger().inner_closed(b)?;
    let t_left = diamond(&odot_l(c, a)?, b)?.tuv_closed();
    let t_right = diamond(a, &odot_r(b, c)?)?.tuv_closed();
    let scale = a.norm2_closed() * b.norm2_closed() * (1.0 + c.norm_inf());
    Ok(DiamondResiduals {
        inner_product: (t_ab - pairing).norm(),
        symmetry: (t_ab - t_ba).norm(),
        module: (t_left - t_right).norm(),
        scale,
    })
}

/// The conjugation superoperator A ↦ U ⊙_L A ⊙_R U*, one unitary per
/// realization: unitary on the closed 2-norm, an isometry on the sup norm,
/// and ‡-compatible.
#[derive(Debug, Clone)]
pub struct EnsembleConjugation {
    geometry: LatticeGeometry,
    seeds: Vec<u64>,
    forward: Vec<CMatrix>,
}

impl EnsembleConjugation {
    pub fn new(geometry: LatticeGeometry, seeds: Vec<u64>, forward: Vec<CMatrix>) -> Result<Self> {
        if seeds.len() != forward.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} seeds vs {} propagators",
                seeds.len(),
                forward.len()
            )));
        }
        let n = geometry.num_sites();
        if forward.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch(
                "propagator does not match geometry volume".into(),
            ));
        }
        Ok(Self {
            geometry,
            seeds,
            forward,
        })
    }

    pub fn identity_map(geometry: LatticeGeometry, seeds: Vec<u64>) -> Self {
        let n = geometry.num_sites();
        let forward = vec![identity(n); seeds.len()];
        Self {
            geometry,
            seeds,
            forward,
        }
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn unitary(&self, i: usize) -> &CMatrix {
        &self.forward[i]
    }

    pub fn apply(&self, a: &CovariantEnsemble) -> Result<CovariantEnsemble> {
        if self.seeds != a.seeds() {
            return Err(Error::SeedMismatch(
                "conjugation map and ensemble are differently seeded".into(),
            ));
        }
        CovariantEnsemble::from_matrices(
            self.geometry.clone(),
            self.seeds.clone(),
            map_indexed(a.len(), |i| {
                &self.forward[i] * a.matrix(i) * self.forward[i].adjoint()
            }),
        )
    }
}

/// Left multiplication by H_ω^{1/2} per realization: the concrete action of
/// the square root of the left generator on ensembles.
pub fn apply_hl_sqrt(
    a: &CovariantEnsemble,
    hams: &[HermitianOperator],
) -> Result<CovariantEnsemble> {
    if hams.len() != a.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} Hamiltonians vs {} realizations",
            hams.len(),
            a.len()
        )));
    }
    CovariantEnsemble::from_matrices(
        a.geometry().clone(),
        a.seeds(),
        map_indexed(a.len(), |i| hams[i].sqrt() * a.matrix(i)),
    )
}

/// Right-generator square root through the involution:
/// H_R^{1/2} A = (H_L^{1/2} A‡)‡, definitionally.
pub fn apply_hr_sqrt(
    a: &CovariantEnsemble,
    hams: &[HermitianOperator],
) -> Result<CovariantEnsemble> {
    Ok(apply_hl_sqrt(&a.dagger(), hams)?.dagger())
}

/// The pair of finiteness statistics deciding membership in the common
/// form core: (‖H^{1/2}A‖₂, ‖H^{1/2}A‡‖₂) in the cell norm. Finite at any
/// finite volume; the interesting content is the trend across volumes.
pub fn q0_membership(a: &CovariantEnsemble, hams: &[HermitianOperator]) -> Result<(f64, f64)> {
    Ok((
        apply_hl_sqrt(a, hams)?.norm2_cell(),
        apply_hl_sqrt(&a.dagger(), hams)?.norm2_cell(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderModel;
    use crate::field::FieldProfile;
    use crate::geometry::LatticeGeometry;
    use crate::system::SystemEnsemble;
    use approx::assert_relative_eq;
    use rand_core::{RngCore, SeedableRng};

    fn random_ensemble(geometry: &LatticeGeometry, m: usize, tag: u64) -> CovariantEnsemble {
        let n = geometry.num_sites();
        let mats: Vec<CMatrix> = (0..m)
            .map(|i| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(tag * 1000 + i as u64);
                let mut u = || (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0) - 0.5;
                CMatrix::from_fn(n, n, |_, _| C64::new(u(), u()))
            })
            .collect();
        let seeds: Vec<u64> = (0..m as u64).collect();
        CovariantEnsemble::from_matrices(geometry.clone(), seeds, mats).unwrap()
    }

    fn geometry8() -> LatticeGeometry {
        LatticeGeometry::open_unit(vec![8]).unwrap()
    }

    #[test]
    fn inner_product_basics() {
        let g = geometry8();
        let seeds = vec![1, 2, 3];
        let id = CovariantEnsemble::identity_element(g.clone(), seeds.clone());
        // ⟨⟨I, I⟩⟩ = sites in the reference cell (1 at unit spacing)
        assert_relative_eq!(id.inner_cell(&id).unwrap().re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(id.inner_closed(&id).unwrap().re, 1.0, epsilon = 1e-14);
        let zero = id.scale(cr(0.0));
        assert_eq!(zero.inner_cell(&zero).unwrap(), C64::default());
        // scalar case: 1-site volume, A = [2], B = [3i] → ⟨⟨A,B⟩⟩ = 6i
        let g1 = LatticeGeometry::open_unit(vec![1]).unwrap();
        let a = CovariantEnsemble::constant(g1.clone(), vec![7], identity(1) * cr(2.0)).unwrap();
        let b = CovariantEnsemble::constant(g1, vec![7], identity(1) * C64::new(0.0, 3.0)).unwrap();
        let ip = a.inner_cell(&b).unwrap();
        assert_relative_eq!(ip.im, 6.0, epsilon = 1e-14);
        assert_relative_eq!(ip.re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn inner_product_sesquilinear_and_positive() {
        let g = geometry8();
        let a = random_ensemble(&g, 4, 1);
        let b = random_ensemble(&g, 4, 2);
        for inner in [
            CovariantEnsemble::inner_cell as fn(&CovariantEnsemble, &CovariantEnsemble) -> Result<C64>,
            CovariantEnsemble::inner_closed,
        ] {
            let ab = inner(&a, &b).unwrap();
            let ba = inner(&b, &a).unwrap();
            assert!((ab - ba.conj()).norm() < 1e-12, "conjugate symmetry");
            let aa = inner(&a, &a).unwrap();
            assert!(aa.re >= 0.0 && aa.im.abs() < 1e-12);
            // Cauchy-Schwarz
            assert!(ab.norm() <= aa.re.sqrt() * inner(&b, &b).unwrap().re.sqrt() + 1e-12);
            // linear in the second slot, conjugate-linear in the first
            let c = C64::new(0.3, -0.7);
            let scaled = inner(&a, &b.scale(c)).unwrap();
            assert!((scaled - ab * c).norm() < 1e-12);
            let scaled_left = inner(&a.scale(c), &b).unwrap();
            assert!((scaled_left - ab * c.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn dagger_antiunitary_on_k2() {
        let g = geometry8();
        let a = random_ensemble(&g, 4, 3);
        let b = random_ensemble(&g, 4, 4);
        // ⟨⟨A‡, B‡⟩⟩ = ⟨⟨B, A⟩⟩, exact for the closed pairing
        let lhs = a.dagger().inner_closed(&b.dagger()).unwrap();
        let rhs = b.inner_closed(&a).unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
        // involution
        assert_eq!(a.dagger().dagger(), a);
    }

    #[test]
    fn norms_basics() {
        let g = geometry8();
        let seeds = vec![1, 2];
        let id = CovariantEnsemble::identity_element(g.clone(), seeds.clone());
        assert_relative_eq!(id.norm_inf(), 1.0, epsilon = 1e-12);
        // rank-1 at the reference cell site: all three norms are 1
        let chi = CellProjector::reference(&g);
        let site = chi.sites()[0];
        let mut m = CMatrix::zeros(8, 8);
        m[(site, site)] = cr(1.0);
        let rank1 = CovariantEnsemble::constant(g.clone(), seeds, m).unwrap();
        assert_relative_eq!(rank1.norm2_cell(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(rank1.norm1_cell(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(rank1.norm_inf(), 1.0, epsilon = 1e-12);
        // ‖A‖₂ ≤ ‖A‖_∞ √(tr χ₀)
        let a = random_ensemble(&g, 3, 5);
        assert!(a.norm2_cell() <= a.norm_inf() * (chi.site_count() as f64).sqrt() + 1e-12);
    }

    #[test]
    fn module_products_and_dagger_identity() {
        let g = LatticeGeometry::open_unit(vec![4]).unwrap();
        let a = random_ensemble(&g, 3, 6);
        let b = random_ensemble(&g, 3, 7);
        // B = I: both products return A
        let id = CovariantEnsemble::identity_element(g.clone(), a.seeds());
        assert_eq!(odot_l(&id, &a).unwrap(), a);
        let right = odot_r(&a, &id).unwrap();
        assert!(right
            .matrices()
            .iter()
            .zip(a.matrices())
            .all(|(x, y)| crate::linalg::frobenius(&(x - y)) < 1e-14));
        // defining identity (A ⊙_R B)‡ = B* ⊙_L A‡, exact by construction
        let lhs = odot_r(&a, &b).unwrap().dagger();
        let rhs = odot_l(&b.dagger(), &a.dagger()).unwrap();
        assert_eq!(lhs, rhs);
        // and it coincides with plain right multiplication
        let plain = a.zip(&b, |x, y| x * y).unwrap();
        for (x, y) in odot_r(&a, &b).unwrap().matrices().iter().zip(plain.matrices()) {
            assert!(crate::linalg::frobenius(&(x - y)) < 1e-13);
        }
        // scalars commute
        let g1 = LatticeGeometry::open_unit(vec![1]).unwrap();
        let sa = CovariantEnsemble::constant(g1.clone(), vec![1], identity(1) * cr(2.0)).unwrap();
        let sb = CovariantEnsemble::constant(g1, vec![1], identity(1) * cr(3.0)).unwrap();
        assert_relative_eq!(
            odot_l(&sb, &sa).unwrap().matrix(0)[(0, 0)].re,
            6.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            odot_r(&sa, &sb).unwrap().matrix(0)[(0, 0)].re,
            6.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn seed_mismatch_rejected() {
        let g = geometry8();
        let a = random_ensemble(&g, 3, 8);
        let other = random_ensemble(&g, 3, 9);
        let reseeded =
            CovariantEnsemble::from_matrices(g, vec![5, 6, 7], other.matrices().to_vec()).unwrap();
        assert!(matches!(a.inner_cell(&reseeded), Err(Error::SeedMismatch(_))));
    }

    #[test]
    fn diamond_identities_exact() {
        let g = geometry8();
        let a = random_ensemble(&g, 16, 10);
        let b = random_ensemble(&g, 16, 11);
        let c = random_ensemble(&g, 16, 12);
        let r = diamond_identity_residuals(&a, &b, &c).unwrap();
        assert!(r.inner_product <= 1e-12 * r.scale, "{r:?}");
        assert!(r.symmetry <= 1e-12 * r.scale, "{r:?}");
        assert!(r.module <= 1e-12 * r.scale, "{r:?}");
        // identity operands: T(I⋄I) = sites per cell = ⟨⟨I,I⟩⟩
        let id = CovariantEnsemble::identity_element(g.clone(), a.seeds());
        let t = diamond(&id, &id).unwrap().tuv_closed();
        assert_relative_eq!(t.re, 1.0, epsilon = 1e-14);
        // scalar ensembles: all residuals exactly zero
        let g1 = LatticeGeometry::open_unit(vec![1]).unwrap();
        let s = |v: f64| {
            CovariantEnsemble::constant(g1.clone(), vec![1, 2], identity(1) * cr(v)).unwrap()
        };
        let rs = diamond_identity_residuals(&s(2.0), &s(3.0), &s(-1.0)).unwrap();
        assert_eq!(rs.inner_product, 0.0);
        assert_eq!(rs.symmetry, 0.0);
        assert_eq!(rs.module, 0.0);
    }

    #[test]
    fn tuv_forms() {
        let g = geometry8();
        let seeds = vec![1, 2, 3, 4];
        let id = CovariantEnsemble::identity_element(g.clone(), seeds);
        assert_relative_eq!(id.tuv().re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(id.tuv_volume(0).re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(id.tuv_closed().re, 1.0, epsilon = 1e-14);
        // |T(A)| ≤ ‖A‖₁ estimate
        let a = random_ensemble(&g, 4, 13);
        assert!(a.tuv().norm() <= a.norm1_cell() + 1e-12);
    }

    #[test]
    fn conjugation_is_isometric_and_dagger_compatible() {
        let g = geometry8();
        let m = 8;
        let a = random_ensemble(&g, m, 14);
        // random unitaries from spectral factorizations
        let us: Vec<CMatrix> = (0..m)
            .map(|i| {
                let h = random_ensemble(&g, 1, 20 + i as u64).matrix(0).clone();
                let herm = HermitianOperator::new((&h + h.adjoint()) * cr(0.5)).unwrap();
                herm.evolution(0.37)
            })
            .collect();
        let conj = EnsembleConjugation::new(g.clone(), a.seeds(), us).unwrap();
        let mapped = conj.apply(&a).unwrap();
        // closed 2-norm preserved at rounding
        assert!(
            (mapped.norm2_closed() / a.norm2_closed() - 1.0).abs() < 1e-10,
            "isometry"
        );
        assert!((mapped.norm_inf() / a.norm_inf() - 1.0).abs() < 1e-10);
        // ‡-compatibility
        let lhs = conj.apply(&a).unwrap().dagger();
        let rhs = conj.apply(&a.dagger()).unwrap();
        let diff = lhs.sub(&rhs).unwrap();
        assert!(diff.norm2_closed() <= 1e-12 * a.norm2_closed());
        // identity map leaves ensembles alone
        let idmap = EnsembleConjugation::identity_map(g, a.seeds());
        assert_eq!(idmap.apply(&a).unwrap(), a);
    }

    #[test]
    fn hl_hr_and_gauge_surrogate() {
        let geometry = geometry8();
        let disorder = DisorderModel {
            v_plus_max: 1.0,
            v_minus_max: 0.0,
            link_phase_amplitude: 0.0,
            b_field: 0.0,
        };
        let field = FieldProfile::new(vec![0.3], 1.0).unwrap();
        let sys =
            SystemEnsemble::sample(geometry.clone(), disorder, field.clone(), 5, 4).unwrap();
        let hams0 = sys.hamiltonians(0.0);
        let raw = random_ensemble(&geometry, 4, 15);
        let a = CovariantEnsemble::from_matrices(
            geometry.clone(),
            sys.seeds(),
            raw.matrices().to_vec(),
        )
        .unwrap();
        // H_R through ‡ is definitionally (H_L A‡)‡
        let hr = apply_hr_sqrt(&a, &hams0).unwrap();
        let via = apply_hl_sqrt(&a.dagger(), &hams0).unwrap().dagger();
        assert_eq!(hr, via);
        // A = H^{-1/2} ensemble: H_L^{1/2} A = identity
        let inv = CovariantEnsemble::from_matrices(
            geometry.clone(),
            sys.seeds(),
            hams0.iter().map(|h| h.inv_sqrt()).collect(),
        )
        .unwrap();
        let should_be_id = apply_hl_sqrt(&inv, &hams0).unwrap();
        let id = CovariantEnsemble::identity_element(geometry.clone(), sys.seeds());
        assert!(should_be_id.sub(&id).unwrap().norm2_closed() < 1e-12);
        // gauge-conjugation surrogate: applying H_L(s)^{1/2} directly
        // equals pulling back by G(s), applying the *undriven* H_L^{1/2}
        // (zero field shift), and pushing forward again
        let s = -0.4;
        let hams_s = sys.hamiltonians(s);
        let hams_base: Vec<HermitianOperator> = (0..sys.len())
            .map(|i| {
                crate::hamiltonian::build_hamiltonian(&geometry, sys.realization(i), &[0.0])
                    .unwrap()
            })
            .collect();
        let g_s = crate::hamiltonian::gauge_unitary(&geometry, &field, s);
        let direct = apply_hl_sqrt(&a, &hams_s).unwrap();
        let pulled = a.map(|m| g_s.adjoint() * m * &g_s);
        let inner = apply_hl_sqrt(&pulled, &hams_base).unwrap();
        let pushed = inner.map(|m| &g_s * m * g_s.adjoint());
        let rel = direct.sub(&pushed).unwrap().norm2_closed() / direct.norm2_closed();
        assert!(rel < 1e-10, "gauge surrogate relative error {rel:.3e}");
        // q0 membership statistics are finite and positive
        let (l, r) = q0_membership(&a, &hams0).unwrap();
        assert!(l.is_finite() && r.is_finite() && l > 0.0 && r > 0.0);
    }
}
