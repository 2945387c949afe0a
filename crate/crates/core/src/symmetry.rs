//! Permutation unitaries on tensor powers, code and jammer-state
//! symmetrization, and numerical checks of the covariance identity and the
//! de Finetti penalty.

use itertools::Itertools;

use crate::channel::Channel;
use crate::code::{
    p_err_powered, ClassicalCode, JammerObservable, QuantumCode, RandomCode,
};
use crate::error::{Error, Result};
use crate::qmath::{self, permute_factors, CMatrix, DensityOperator, PovmElement};

/// Permutation enumeration cap: ℓ! with ℓ ≤ 6 (720 variants).
pub const ENUM_CAP_ELL: usize = 6;

/// Unitary representation of π ∈ S_ℓ on (C^d)^⊗ℓ: output slot i carries
/// input slot π⁻¹(i).
#[derive(Debug, Clone)]
pub struct PermutationOp {
    ell: usize,
    perm: Vec<usize>,
    local_dim: usize,
    matrix: CMatrix,
}

impl PermutationOp {
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        &self.matrix * m * self.matrix.adjoint()
    }

    /// The conjugation channel U_π · U_π†.
    pub fn channel(&self) -> Channel {
        let dims = vec![self.local_dim; self.ell];
        Channel::from_unitary(self.matrix.clone(), dims.clone(), dims)
            .expect("permutation matrices are unitary")
    }

    pub fn inverse(&self) -> Result<PermutationOp> {
        let mut inv = vec![0usize; self.ell];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        perm_unitary(&inv, self.local_dim, self.ell)
    }
}

/// Builds U^π for the 0-based bijection `pi` of {0..ℓ-1}, read as
/// "slot i moves to slot pi[i]".
pub fn perm_unitary(pi: &[usize], local_dim: usize, ell: usize) -> Result<PermutationOp> {
    if pi.len() != ell {
        return Err(Error::Domain(format!(
            "permutation has length {}, expected {ell}",
            pi.len()
        )));
    }
    let mut inv = vec![usize::MAX; ell];
    for (i, &p) in pi.iter().enumerate() {
        if p >= ell || inv[p] != usize::MAX {
            return Err(Error::Domain(format!("not a bijection: {pi:?}")));
        }
        inv[p] = i;
    }
    let dims = vec![local_dim; ell];
    let matrix = permute_factors(&dims, &inv)?;
    Ok(PermutationOp {
        ell,
        perm: pi.to_vec(),
        local_dim,
        matrix,
    })
}

pub fn all_permutations(ell: usize) -> Result<Vec<Vec<usize>>> {
    if ell > ENUM_CAP_ELL {
        return Err(Error::Size(format!(
            "permutation enumeration capped at ell <= {ENUM_CAP_ELL}, got {ell}"
        )));
    }
    Ok((0..ell).permutations(ell).collect())
}

/// Uniform random code over all ℓ! permuted copies
/// 𝒞_π = {(U^π ρ_m U^π†, U^π D_m U^π†)}.
pub fn symmetrize_classical(code: &ClassicalCode) -> Result<RandomCode<ClassicalCode>> {
    let ell = code.ell();
    let a_dim = per_letter_dim(code.states()[0].dim(), ell)?;
    let b_dim = per_letter_dim(code.povm()[0].dim(), ell)?;
    let mut variants = Vec::new();
    for pi in all_permutations(ell)? {
        let ua = perm_unitary(&pi, a_dim, ell)?;
        let ub = perm_unitary(&pi, b_dim, ell)?;
        let states = code
            .states()
            .iter()
            .map(|s| DensityOperator::from_matrix_unchecked(ua.conjugate(s.matrix())))
            .collect();
        let povm = code
            .povm()
            .iter()
            .map(|d| PovmElement::from_matrix_unchecked(ub.conjugate(d.matrix())))
            .collect();
        variants.push(ClassicalCode::new(ell, states, povm)?);
    }
    RandomCode::uniform(variants)
}

/// Uniform random code over 𝒬_π = (𝒰_π ∘ ℰ, 𝒟 ∘ 𝒰_{π⁻¹}).
pub fn symmetrize_quantum(code: &QuantumCode) -> Result<RandomCode<QuantumCode>> {
    let ell = code.ell();
    let a_dim = per_letter_dim(code.encoder().out_total(), ell)?;
    let b_dim = per_letter_dim(code.decoder().in_total(), ell)?;
    let mut variants = Vec::new();
    for pi in all_permutations(ell)? {
        let ua = perm_unitary(&pi, a_dim, ell)?;
        let ub_inv = perm_unitary(&pi, b_dim, ell)?.inverse()?;
        let encoder = ua.channel().compose(code.encoder())?;
        let decoder = code.decoder().compose(&ub_inv.channel())?;
        variants.push(QuantumCode::new(ell, code.local_dim(), encoder, decoder)?);
    }
    RandomCode::uniform(variants)
}

fn per_letter_dim(total: usize, ell: usize) -> Result<usize> {
    // total = d^ell for integer d
    let mut d = 1usize;
    loop {
        let p = d.checked_pow(ell as u32);
        match p {
            Some(p) if p == total => return Ok(d),
            Some(p) if p < total => d += 1,
            _ => {
                return Err(Error::Shape(format!(
                    "dimension {total} is not an ell-th power (ell = {ell})"
                )))
            }
        }
    }
}

/// Twirl over S_ℓ: ζ' = (1/ℓ!) Σ_π U^π ζ U^π†.
pub fn symmetrize_state(zeta: &DensityOperator, local_dim: usize, ell: usize) -> Result<DensityOperator> {
    if local_dim.pow(ell as u32) != zeta.dim() {
        return Err(Error::Shape(format!(
            "state dim {} != {local_dim}^{ell}",
            zeta.dim()
        )));
    }
    let perms = all_permutations(ell)?;
    let n = perms.len() as f64;
    let mut acc = CMatrix::zeros(zeta.dim(), zeta.dim());
    for pi in perms {
        let u = perm_unitary(&pi, local_dim, ell)?;
        acc += u.conjugate(zeta.matrix());
    }
    Ok(DensityOperator::from_matrix_unchecked(acc.scale(1.0 / n)))
}

/// Evaluates both sides of the covariance identity:
/// lhs = E_π P_err(𝒞_π, ζ), rhs = P_err(𝒞, ζ') with ζ' the twirled state.
pub fn verify_covariance_identity(
    code: &ClassicalCode,
    base: &Channel,
    zeta: &DensityOperator,
) -> Result<(f64, f64)> {
    let ell = code.ell();
    let power = base.tensor_power(ell)?;
    let sym = symmetrize_classical(code)?;
    let lhs = sym.average_error(&power, zeta)?;
    let j_dim = per_letter_dim(zeta.dim(), ell)?;
    let zeta_sym = symmetrize_state(zeta, j_dim, ell)?;
    let rhs = p_err_powered(code, &power, &zeta_sym)?;
    Ok((lhs, rhs))
}

/// Outcome of a de Finetti penalty check:
/// lhs = E_π error(𝒞_π, ζ) must not exceed compound_err·(ℓ+1)^{|J|²}.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyCheck {
    pub lhs: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn definetti_penalty_factor(ell: usize, j_dim: usize) -> f64 {
    ((ell + 1) as f64).powi((j_dim * j_dim) as i32)
}

/// Checks E_π error(𝒞_π, ζ) ≤ compound_err·(ℓ+1)^{|J|²} for a classical
/// code; `compound_err` must upper-bound sup_σ error(𝒞, σ^⊗ℓ) (caller
/// computed, typically grid + ascent over single-letter σ).
pub fn verify_definetti_penalty<T: JammerObservable>(
    sym: &RandomCode<T>,
    base: &Channel,
    zeta: &DensityOperator,
    compound_err: f64,
    j_dim: usize,
) -> Result<PenaltyCheck> {
    let ell = sym.ell();
    let power = base.tensor_power(ell)?;
    let lhs = sym.average_error(&power, zeta)?;
    let bound = compound_err * definetti_penalty_factor(ell, j_dim);
    Ok(PenaltyCheck {
        lhs,
        bound,
        ok: lhs <= bound + 1e-9,
    })
}

/// sup over a grid + local ascent of error(𝒞, σ^⊗ℓ) for single-qubit σ;
/// the caller-side estimate of the compound-channel error.
pub fn compound_error_sup<T: JammerObservable>(
    code: &T,
    base: &Channel,
    grid: &[DensityOperator],
) -> Result<f64> {
    let ell = code.ell();
    let power = base.tensor_power(ell)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_sigma: Option<DensityOperator> = None;
    for sigma in grid {
        let mut prod = sigma.clone();
        for _ in 1..ell {
            prod = prod.tensor(sigma)?;
        }
        let v = code.error_powered(&power, &prod)?;
        if v > best {
            best = v;
            best_sigma = Some(sigma.clone());
        }
    }
    // Local ascent around the best grid point (qubit Bloch coordinates).
    if let Some(sigma) = best_sigma {
        if sigma.dim() == 2 {
            let m = sigma.matrix();
            let mut x = 2.0 * m[(0, 1)].re;
            let mut y = 2.0 * m[(1, 0)].im;
            let mut z = m[(0, 0)].re - m[(1, 1)].re;
            let mut step = 0.1;
            while step > 1e-4 {
                let mut improved = false;
                for (dx, dy, dz) in [
                    (step, 0.0, 0.0),
                    (-step, 0.0, 0.0),
                    (0.0, step, 0.0),
                    (0.0, -step, 0.0),
                    (0.0, 0.0, step),
                    (0.0, 0.0, -step),
                ] {
                    let (nx, ny, nz) = (x + dx, y + dy, z + dz);
                    let r = (nx * nx + ny * ny + nz * nz).sqrt();
                    let (nx, ny, nz) = if r > 1.0 {
                        (nx / r, ny / r, nz / r)
                    } else {
                        (nx, ny, nz)
                    };
                    let cand = qmath::bloch_state(nx, ny, nz)?;
                    let mut prod = cand.clone();
                    for _ in 1..ell {
                        prod = prod.tensor(&cand)?;
                    }
                    let v = code.error_powered(&power, &prod)?;
                    if v > best + 1e-12 {
                        best = v;
                        x = nx;
                        y = ny;
                        z = nz;
                        improved = true;
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
        }
    }
    Ok(best)
}
