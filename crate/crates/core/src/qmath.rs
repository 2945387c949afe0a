//! Dense complex-matrix substrate: tensor products, partial traces,
//! Hermitian eigendecomposition, operator-order tests and canonical states.
//!
//! Tolerance ladder: structural checks (Hermiticity, trace) at 1e-10,
//! eigensolver residuals at 1e-9 per dim, operator inequalities at 1e-8.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Entry-count cap per matrix (default 2^20); guards ℓ-sweeps against blowup.
pub const DIM_CAP: usize = 1 << 20;

pub const TOL_STRUCT: f64 = 1e-10;
pub const TOL_EIG: f64 = 1e-9;
pub const TOL_INEQ: f64 = 1e-8;

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Kronecker product with the entry-count cap applied to the result.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) if r.saturating_mul(c) <= DIM_CAP => Ok(a.kronecker(b)),
        _ => Err(Error::Size(format!(
            "kron result {}x{} * {}x{} exceeds cap of {} entries",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            DIM_CAP
        ))),
    }
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&CMatrix]) -> Result<CMatrix> {
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        out = kron(&out, f)?;
    }
    Ok(out)
}

fn check_factor_dims(total: usize, factor_dims: &[usize]) -> Result<()> {
    let prod: usize = factor_dims.iter().product();
    if prod != total {
        return Err(Error::Shape(format!(
            "factor dims {:?} (product {}) do not match matrix dim {}",
            factor_dims, prod, total
        )));
    }
    Ok(())
}

/// Partial trace over the factors NOT listed in `keep`.
/// `keep` holds indices into `factor_dims`, in the order they appear in the output.
pub fn partial_trace(m: &CMatrix, factor_dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape("partial_trace requires a square matrix".into()));
    }
    check_factor_dims(m.nrows(), factor_dims)?;
    let k = factor_dims.len();
    if keep.iter().any(|&i| i >= k) {
        return Err(Error::Shape(format!("keep index out of range: {:?}", keep)));
    }
    let traced: Vec<usize> = (0..k).filter(|i| !keep.contains(i)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&i| factor_dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| factor_dims[i]).collect();
    let out_dim: usize = keep_dims.iter().product();
    let tr_dim: usize = traced_dims.iter().product();

    // Row-major strides of the full index.
    let mut strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * factor_dims[i + 1];
    }
    let flat = |multi: &[usize], which: &[usize]| -> usize {
        which
            .iter()
            .zip(multi.iter())
            .map(|(&f, &v)| strides[f] * v)
            .sum()
    };
    let unrank = |mut r: usize, dims: &[usize]| -> Vec<usize> {
        let mut multi = vec![0usize; dims.len()];
        for i in (0..dims.len()).rev() {
            multi[i] = r % dims[i];
            r /= dims[i];
        }
        multi
    };

    let mut out = CMatrix::zeros(out_dim, out_dim);
    for r in 0..out_dim {
        let rm = unrank(r, &keep_dims);
        let rbase = flat(&rm, keep);
        for s in 0..out_dim {
            let sm = unrank(s, &keep_dims);
            let sbase = flat(&sm, keep);
            let mut acc = C64::default();
            for t in 0..tr_dim {
                let tm = unrank(t, &traced_dims);
                let toff = flat(&tm, &traced);
                acc += m[(rbase + toff, sbase + toff)];
            }
            out[(r, s)] = acc;
        }
    }
    Ok(out)
}

/// Unitary that reorders tensor factors: basis ket indexed by `multi` over
/// `dims` is mapped so that output factor `i` is input factor `perm[i]`.
pub fn permute_factors(dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let k = dims.len();
    if perm.len() != k {
        return Err(Error::Shape("permutation length mismatch".into()));
    }
    let mut seen = vec![false; k];
    for &p in perm {
        if p >= k || seen[p] {
            return Err(Error::Domain(format!("not a permutation: {:?}", perm)));
        }
        seen[p] = true;
    }
    let total: usize = dims.iter().product();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut in_strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        in_strides[i] = in_strides[i + 1] * dims[i + 1];
    }
    let mut u = CMatrix::zeros(total, total);
    for col in 0..total {
        // `col` indexes the input basis ket; compute its multi-index.
        let mut multi = vec![0usize; k];
        let mut r = col;
        for i in (0..k).rev() {
            multi[i] = r % dims[i];
            r /= dims[i];
        }
        let mut row = 0usize;
        for (i, &p) in perm.iter().enumerate() {
            row = row * out_dims[i] + multi[p];
        }
        u[(row, col)] = c(1.0, 0.0);
    }
    Ok(u)
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues descending,
/// eigenvector columns phase-fixed so the first component of modulus
/// above 1e-10 is real and positive.
pub fn eig_hermitian(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !is_hermitian(m, TOL_INEQ) {
        return Err(Error::Domain("eig_hermitian: matrix is not Hermitian".into()));
    }
    let n = m.nrows();
    // Symmetrize before factoring so the solver sees an exactly Hermitian input.
    let h = (m + m.adjoint()).scale(0.5);
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let mut vals = Vec::with_capacity(n);
    let mut vecs = CMatrix::zeros(n, n);
    for (out_col, &src) in order.iter().enumerate() {
        vals.push(se.eigenvalues[src]);
        let mut col: CVector = se.eigenvectors.column(src).into_owned();
        if let Some(pivot) = col.iter().find(|z| z.norm() > 1e-10) {
            let phase = pivot.conj() / pivot.norm();
            col *= phase;
        }
        vecs.set_column(out_col, &col);
    }
    Ok((vals, vecs))
}

pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    let (vals, _) = eig_hermitian(m)?;
    Ok(*vals.last().expect("nonempty spectrum"))
}

pub fn max_eigenvalue(m: &CMatrix) -> Result<f64> {
    let (vals, _) = eig_hermitian(m)?;
    Ok(vals[0])
}

/// Operator order test: a ≤ b iff λ_min(b − a) ≥ −tol.
pub fn op_leq(a: &CMatrix, b: &CMatrix, tol: f64) -> Result<bool> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "op_leq shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(min_eigenvalue(&(b - a))? >= -tol)
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(m: &CMatrix) -> Result<f64> {
    let (vals, _) = eig_hermitian(m)?;
    Ok(vals.iter().map(|v| v.abs()).sum())
}

/// Von Neumann entropy in bits; eigenvalues below 1e-12 contribute zero.
pub fn entropy_bits(m: &CMatrix) -> Result<f64> {
    let (vals, _) = eig_hermitian(m)?;
    Ok(vals
        .iter()
        .filter(|&&p| p > 1e-12)
        .map(|&p| -p * p.log2())
        .sum())
}

/// Positive unit-trace operator; jammer states, code states and channel
/// outputs all live here.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dim: usize,
    mat: CMatrix,
}

impl DensityOperator {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Shape("density operator must be square".into()));
        }
        if !is_finite(&mat) {
            return Err(Error::Domain("density operator has non-finite entries".into()));
        }
        if !is_hermitian(&mat, TOL_STRUCT) {
            return Err(Error::Domain("density operator is not Hermitian".into()));
        }
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > TOL_STRUCT || tr.im.abs() > TOL_STRUCT {
            return Err(Error::Domain(format!("density operator trace {} != 1", tr)));
        }
        let min = min_eigenvalue(&mat)?;
        if min < -TOL_STRUCT {
            return Err(Error::Domain(format!(
                "density operator has negative eigenvalue {min}"
            )));
        }
        Ok(Self {
            dim: mat.nrows(),
            mat,
        })
    }

    /// For internal construction paths that preserve validity (channel
    /// outputs, convex mixtures); positivity may drift by roundoff only.
    pub fn from_matrix_unchecked(mat: CMatrix) -> Self {
        Self {
            dim: mat.nrows(),
            mat,
        }
    }

    pub fn pure(vector: &CVector) -> Result<Self> {
        let n2 = vector.norm_squared();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("ket norm² {} != 1", n2)));
        }
        let m = vector * vector.adjoint();
        Ok(Self::from_matrix_unchecked(m))
    }

    /// Computational basis state |k⟩⟨k| in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Domain(format!("basis index {k} out of range {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = c(1.0, 0.0);
        Ok(Self {
            dim,
            mat: m,
        })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension 0".into()));
        }
        Ok(Self {
            dim,
            mat: identity(dim).scale(1.0 / dim as f64),
        })
    }

    pub fn mix(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let dim = parts
            .first()
            .ok_or_else(|| Error::Domain("empty mixture".into()))?
            .1
            .dim;
        let mut m = CMatrix::zeros(dim, dim);
        let mut w = 0.0;
        for (p, rho) in parts {
            if rho.dim != dim {
                return Err(Error::Shape("mixture dim mismatch".into()));
            }
            m += rho.mat.scale(*p);
            w += p;
        }
        if (w - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("mixture weights sum to {w}")));
        }
        Ok(Self {
            dim,
            mat: m,
        })
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        Ok(Self::from_matrix_unchecked(kron(&self.mat, &other.mat)?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Spectral decomposition into (weight, ket) pairs with weight > 1e-12.
    pub fn spectral(&self) -> Result<Vec<(f64, CVector)>> {
        let (vals, vecs) = eig_hermitian(&self.mat)?;
        Ok(vals
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 1e-12)
            .map(|(i, &p)| (p, vecs.column(i).into_owned()))
            .collect())
    }
}

/// POVM element: Hermitian with spectrum in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    dim: usize,
    mat: CMatrix,
}

impl PovmElement {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Shape("POVM element must be square".into()));
        }
        if !is_hermitian(&mat, TOL_INEQ) {
            return Err(Error::Domain("POVM element is not Hermitian".into()));
        }
        let (vals, _) = eig_hermitian(&mat)?;
        let lo = *vals.last().unwrap();
        let hi = vals[0];
        if lo < -TOL_INEQ || hi > 1.0 + TOL_INEQ {
            return Err(Error::Domain(format!(
                "POVM element spectrum [{lo}, {hi}] outside [0,1]"
            )));
        }
        Ok(Self {
            dim: mat.nrows(),
            mat,
        })
    }

    pub fn from_matrix_unchecked(mat: CMatrix) -> Self {
        Self {
            dim: mat.nrows(),
            mat,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

/// Maximally entangled ket (1/√L) Σ |ii⟩ on C^L ⊗ C^L.
pub fn max_entangled_ket(big_l: usize) -> Result<CVector> {
    if big_l == 0 {
        return Err(Error::Domain("max_entangled requires L ≥ 1".into()));
    }
    let mut v = CVector::zeros(big_l * big_l);
    let amp = c(1.0 / (big_l as f64).sqrt(), 0.0);
    for i in 0..big_l {
        v[i * big_l + i] = amp;
    }
    Ok(v)
}

/// Maximally entangled state Φ_L on C^L ⊗ C^L.
pub fn max_entangled(big_l: usize) -> Result<DensityOperator> {
    let v = max_entangled_ket(big_l)?;
    DensityOperator::pure(&v)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Qubit state from Bloch coordinates with |r| ≤ 1.
pub fn bloch_state(x: f64, y: f64, z: f64) -> Result<DensityOperator> {
    let r = (x * x + y * y + z * z).sqrt();
    if r > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("Bloch vector length {r} > 1")));
    }
    let m = identity(2).scale(0.5)
        + pauli_x().scale(0.5 * x)
        + pauli_y().scale(0.5 * y)
        + pauli_z().scale(0.5 * z);
    Ok(DensityOperator::from_matrix_unchecked(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kron_identity() {
        let i2 = identity(2);
        let out = kron(&i2, &i2).unwrap();
        assert_eq!(out, identity(4));
    }

    #[test]
    fn kron_pauli_flips_basis() {
        let xx = kron(&pauli_x(), &pauli_x()).unwrap();
        let mut ket01 = CVector::zeros(4);
        ket01[1] = c(1.0, 0.0);
        let out = &xx * &ket01;
        let mut ket10 = CVector::zeros(4);
        ket10[2] = c(1.0, 0.0);
        assert!((out - ket10).norm() < 1e-14);
    }

    #[test]
    fn kron_trace_multiplies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let lhs = trace(&kron(&a, &b).unwrap());
        let rhs = trace(&a) * trace(&b);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn kron_cap_enforced() {
        let big = identity(1 << 11);
        assert!(matches!(kron(&big, &big), Err(Error::Size(_))));
    }

    #[test]
    fn partial_trace_max_entangled_marginal() {
        let phi = max_entangled(2).unwrap();
        let marg = partial_trace(phi.matrix(), &[2, 2], &[0]).unwrap();
        assert!(frobenius(&(marg - identity(2).scale(0.5))) < 1e-12);
    }

    #[test]
    fn partial_trace_all_factors_gives_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(4, &mut rng);
        let s = partial_trace(rho.matrix(), &[2, 2], &[]).unwrap();
        assert_eq!(s.nrows(), 1);
        assert!((s[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(2, &mut rng);
        let sigma = random_density(3, &mut rng);
        let joint = rho.tensor(&sigma).unwrap();
        let back = partial_trace(joint.matrix(), &[2, 3], &[0]).unwrap();
        assert!(frobenius(&(back - rho.matrix())) < 1e-12);
    }

    #[test]
    fn partial_trace_shape_error() {
        let m = identity(6);
        assert!(matches!(
            partial_trace(&m, &[2, 2], &[0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn eig_diag_sorted() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.3, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.7, 0.0)],
        );
        let (vals, _) = eig_hermitian(&m).unwrap();
        assert_abs_diff_eq!(vals[0], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 0.3, epsilon = 1e-12);
    }

    #[test]
    fn eig_pauli_x() {
        let (vals, _) = eig_hermitian(&pauli_x()).unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn eig_reconstruction_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_hermitian(8, &mut rng);
        let (vals, vecs) = eig_hermitian(&m).unwrap();
        let lam = CMatrix::from_diagonal(&CVector::from_iterator(
            8,
            vals.iter().map(|&v| c(v, 0.0)),
        ));
        let recon = &vecs * lam * vecs.adjoint();
        assert!(frobenius(&(recon - &m)) < 1e-9 * 8.0);
        let sum: f64 = vals.iter().sum();
        assert!((sum - trace(&m).re).abs() < 1e-9);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        );
        assert!(matches!(eig_hermitian(&m), Err(Error::Domain(_))));
    }

    #[test]
    fn op_leq_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(4, &mut rng);
        let zero = CMatrix::zeros(4, 4);
        assert!(op_leq(&zero, rho.matrix(), 1e-10).unwrap());
        assert!(!op_leq(&pauli_x(), &identity(2).scale(0.5), 1e-10).unwrap());
        // reflexive
        assert!(op_leq(rho.matrix(), rho.matrix(), 1e-12).unwrap());
    }

    #[test]
    fn max_entangled_props() {
        let phi = max_entangled(2).unwrap();
        let m0 = partial_trace(phi.matrix(), &[2, 2], &[0]).unwrap();
        let m1 = partial_trace(phi.matrix(), &[2, 2], &[1]).unwrap();
        assert!(frobenius(&(m0 - identity(2).scale(0.5))) < 1e-12);
        assert!(frobenius(&(m1 - identity(2).scale(0.5))) < 1e-12);

        let phi1 = max_entangled(1).unwrap();
        assert!((phi1.matrix()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);

        let phi3 = max_entangled(3).unwrap();
        let purity = trace(&(phi3.matrix() * phi3.matrix())).re;
        assert_abs_diff_eq!(purity, 1.0, epsilon = 1e-12);

        assert!(max_entangled(0).is_err());
    }

    #[test]
    fn permute_factors_swap() {
        let u = permute_factors(&[2, 2], &[1, 0]).unwrap();
        // |01> -> |10>
        let mut v = CVector::zeros(4);
        v[1] = c(1.0, 0.0);
        let out = &u * v;
        assert!((out[2] - c(1.0, 0.0)).norm() < 1e-14);
        // unitarity exact
        assert!(frobenius(&(&u * u.adjoint() - identity(4))) == 0.0);
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::new(identity(2)).is_err()); // trace 2
        assert!(DensityOperator::new(pauli_x().scale(0.5)).is_err()); // negative eig
        assert!(DensityOperator::new(identity(2).scale(0.5)).is_ok());
    }
}
