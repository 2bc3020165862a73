//! Shared test support: an independent Padé scaling-and-squaring matrix
//! exponential (the oracle for the spectral step kernel — deliberately a
//! different algorithm through different code), seeded random matrices,
//! and standard system builders.
#![allow(dead_code)]

use ergolab::disorder::DisorderModel;
use ergolab::field::FieldProfile;
use ergolab::geometry::LatticeGeometry;
use ergolab::hamiltonian::DrivenSystem;
use ergolab::linalg::{cr, identity, CMatrix, C64};
use ergolab::system::SystemEnsemble;
use rand_core::{RngCore, SeedableRng};

/// Padé(13) scaling-and-squaring exp(A); coefficients from the classical
/// double-precision table.
pub fn expm_pade(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let norm = one_norm(a);
    let theta13 = 5.37;
    let squarings = if norm > theta13 {
        (norm / theta13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / cr((1u64 << squarings) as f64);
    let mut result = pade13(&scaled);
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

const PADE_COEFFS: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn pade13(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let eye = identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = &PADE_COEFFS;
    let u_inner = &a6 * cr(b[13]) + &a4 * cr(b[11]) + &a2 * cr(b[9]);
    let u = a * (&a6 * u_inner + &a6 * cr(b[7]) + &a4 * cr(b[5]) + &a2 * cr(b[3]) + &eye * cr(b[1]));
    let v_inner = &a6 * cr(b[12]) + &a4 * cr(b[10]) + &a2 * cr(b[8]);
    let v = &a6 * v_inner + &a6 * cr(b[6]) + &a4 * cr(b[4]) + &a2 * cr(b[2]) + &eye * cr(b[0]);
    let denom = &v - &u;
    let numer = &v + &u;
    denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is invertible")
}

fn one_norm(a: &CMatrix) -> f64 {
    let mut max = 0.0f64;
    for j in 0..a.ncols() {
        let col: f64 = (0..a.nrows()).map(|i| a[(i, j)].norm()).sum();
        max = max.max(col);
    }
    max
}

pub fn seeded_uniform(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

pub fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_fn(n, n, |_, _| {
        C64::new(
            seeded_uniform(&mut rng) - 0.5,
            seeded_uniform(&mut rng) - 0.5,
        )
    });
    (&a + a.adjoint()) * cr(0.5)
}

pub fn random_vector(n: usize, seed: u64) -> ergolab::CVector {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    ergolab::CVector::from_fn(n, |_, _| {
        C64::new(
            seeded_uniform(&mut rng) - 0.5,
            seeded_uniform(&mut rng) - 0.5,
        )
    })
    .normalize()
}

/// Standard 1d open disordered chain driven by E with rate η = 1.
pub fn driven_chain(l: usize, e: f64, seed: u64) -> DrivenSystem {
    let geometry = LatticeGeometry::open_unit(vec![l]).unwrap();
    let model = DisorderModel {
        v_plus_max: 1.0,
        v_minus_max: 0.0,
        link_phase_amplitude: 0.0,
        b_field: 0.0,
    };
    let realization = model.sample(&geometry, seed);
    DrivenSystem::new(geometry, realization, FieldProfile::new(vec![e], 1.0).unwrap()).unwrap()
}

pub fn chain_ensemble(l: usize, e: f64, m: usize, master: u64) -> SystemEnsemble {
    let geometry = LatticeGeometry::open_unit(vec![l]).unwrap();
    let model = DisorderModel {
        v_plus_max: 1.0,
        v_minus_max: 0.0,
        link_phase_amplitude: 0.0,
        b_field: 0.0,
    };
    SystemEnsemble::sample(
        geometry,
        model,
        FieldProfile::new(vec![e], 1.0).unwrap(),
        master,
        m,
    )
    .unwrap()
}
