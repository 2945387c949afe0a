//! Seeded generators for states, unitaries and channels used by the
//! optimizers, the Monte Carlo harnesses and the test suites.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::qmath::{c, CMatrix, CVector, DensityOperator};

/// Standard complex Gaussian (Ginibre) matrix.
pub fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-like random density operator (normalized GG†).
pub fn random_density<R: Rng>(dim: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    DensityOperator::from_matrix_unchecked(m.scale(1.0 / tr))
}

pub fn random_ket<R: Rng>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v.scale(1.0 / n)
}

pub fn random_pure<R: Rng>(dim: usize, rng: &mut R) -> DensityOperator {
    let v = random_ket(dim, rng);
    DensityOperator::from_matrix_unchecked(&v * v.adjoint())
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..dim {
                q[(i, j)] *= phase.conj();
            }
        }
    }
    q
}

/// Random isometry V: C^in → C^(out·env), columns orthonormal.
/// Requires out*env ≥ in.
pub fn random_isometry<R: Rng>(out_env: usize, input: usize, rng: &mut R) -> CMatrix {
    assert!(out_env >= input, "isometry needs out*env >= in");
    let u = random_unitary(out_env, rng);
    u.columns(0, input).into_owned()
}

/// Two-outcome POVM {D, 1 − D} with D = U diag(d) U†, d uniform in [0,1].
pub fn random_povm_pair<R: Rng>(dim: usize, rng: &mut R) -> Vec<crate::qmath::PovmElement> {
    let u = random_unitary(dim, rng);
    let d = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            c(rng.gen::<f64>(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let d0 = &u * d * u.adjoint();
    let d1 = CMatrix::identity(dim, dim) - &d0;
    vec![
        crate::qmath::PovmElement::from_matrix_unchecked(d0),
        crate::qmath::PovmElement::from_matrix_unchecked(d1),
    ]
}

/// Random cptp map via a Stinespring isometry with `env_dim` environment
/// dimensions (Kraus count = env_dim, padded if out*env < in).
pub fn random_channel<R: Rng>(
    in_dims: &[usize],
    out_dims: &[usize],
    env_dim: usize,
    rng: &mut R,
) -> crate::channel::Channel {
    let in_total: usize = in_dims.iter().product();
    let out_total: usize = out_dims.iter().product();
    let mut env = env_dim;
    while out_total * env < in_total {
        env += 1;
    }
    let v = random_isometry(out_total * env, in_total, rng);
    let kraus: Vec<CMatrix> = (0..env)
        .map(|e| {
            DMatrix::from_fn(out_total, in_total, |o, i| v[(o * env + e, i)])
        })
        .collect();
    crate::channel::Channel::new(in_dims.to_vec(), out_dims.to_vec(), kraus)
        .expect("Stinespring construction is trace preserving")
}
