//! cptp maps in Kraus form with declared input/output tensor factors.
//!
//! Channels with a jammer input carry it as the trailing input factor(s):
//! a base channel has `in_dims = [|A|, |J|]`. Tensor powers use the sorted
//! factor order (A_1..A_ell, J_1..J_ell); the permutation from the naive
//! interleaved order ((A J)_1..(A J)_ell) is applied inside `tensor_power`
//! so every caller sees the sorted convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    self, c, eig_hermitian, identity, kron, max_entangled_ket, partial_trace, permute_factors,
    trace_norm_hermitian, CMatrix, CVector, DensityOperator, PovmElement, DIM_CAP,
};

#[derive(Debug, Clone)]
pub struct Channel {
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    kraus: Vec<CMatrix>,
}

/// A QAVC together with an optional classical jammer state set S.
#[derive(Debug, Clone)]
pub struct JammerFamily {
    pub base: Channel,
    pub classical_states: Option<Vec<DensityOperator>>,
}

impl Channel {
    pub fn new(in_dims: Vec<usize>, out_dims: Vec<usize>, kraus: Vec<CMatrix>) -> Result<Self> {
        let in_total: usize = in_dims.iter().product();
        let out_total: usize = out_dims.iter().product();
        if in_total == 0 || out_total == 0 {
            return Err(Error::Domain("channel with zero-dimensional factor".into()));
        }
        if kraus.is_empty() {
            return Err(Error::Domain("channel needs at least one Kraus operator".into()));
        }
        for k in &kraus {
            if k.nrows() != out_total || k.ncols() != in_total {
                return Err(Error::Shape(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    out_total,
                    in_total
                )));
            }
        }
        let ch = Self {
            in_dims,
            out_dims,
            kraus,
        };
        let resid = ch.trace_preservation_residual();
        if resid > 1e-9 {
            return Err(Error::Domain(format!(
                "channel is not trace preserving: ||sum K'K - 1||_F = {resid:.3e}"
            )));
        }
        Ok(ch)
    }

    pub fn trace_preservation_residual(&self) -> f64 {
        let n = self.in_total();
        let mut acc = CMatrix::zeros(n, n);
        for k in &self.kraus {
            acc += k.adjoint() * k;
        }
        qmath::frobenius(&(acc - identity(n)))
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn in_total(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn out_total(&self) -> usize {
        self.out_dims.iter().product()
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn identity_channel(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self {
            in_dims: dims.clone(),
            out_dims: dims,
            kraus: vec![identity(n)],
        }
    }

    pub fn from_unitary(u: CMatrix, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        Self::new(in_dims, out_dims, vec![u])
    }

    /// Replaces the input with a fixed output state (a constant channel).
    pub fn constant(in_dims: Vec<usize>, state: &DensityOperator) -> Result<Self> {
        let n: usize = in_dims.iter().product();
        let mut kraus = Vec::new();
        for (p, v) in state.spectral()? {
            for j in 0..n {
                // sqrt(p) |v><j|
                let mut k = CMatrix::zeros(state.dim(), n);
                for i in 0..state.dim() {
                    k[(i, j)] = v[i] * c(p.sqrt(), 0.0);
                }
                kraus.push(k);
            }
        }
        Self::new(in_dims, vec![state.dim()], kraus)
    }

    /// Traces out the factors not in `keep`.
    pub fn partial_trace_channel(dims: Vec<usize>, keep: &[usize]) -> Result<Self> {
        let k = dims.len();
        if keep.iter().any(|&i| i >= k) {
            return Err(Error::Shape("keep index out of range".into()));
        }
        let traced: Vec<usize> = (0..k).filter(|i| !keep.contains(i)).collect();
        let keep_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
        let out_dim: usize = keep_dims.iter().product();
        let tr_dim: usize = traced_dims.iter().product();
        let in_total: usize = dims.iter().product();

        let mut strides = vec![1usize; k];
        for i in (0..k.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let mut kraus = Vec::with_capacity(tr_dim);
        for t in 0..tr_dim {
            let mut tm = vec![0usize; traced.len()];
            let mut r = t;
            for i in (0..traced.len()).rev() {
                tm[i] = r % traced_dims[i];
                r /= traced_dims[i];
            }
            let toff: usize = traced
                .iter()
                .zip(tm.iter())
                .map(|(&f, &v)| strides[f] * v)
                .sum();
            let mut kmat = CMatrix::zeros(out_dim, in_total);
            for row in 0..out_dim {
                let mut km = vec![0usize; keep.len()];
                let mut r = row;
                for i in (0..keep.len()).rev() {
                    km[i] = r % keep_dims[i];
                    r /= keep_dims[i];
                }
                let koff: usize = keep
                    .iter()
                    .zip(km.iter())
                    .map(|(&f, &v)| strides[f] * v)
                    .sum();
                kmat[(row, koff + toff)] = c(1.0, 0.0);
            }
            kraus.push(kmat);
        }
        Self::new(dims, keep_dims, kraus)
    }

    /// Linear action on an arbitrary matrix (no state validation).
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        let n = self.in_total();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Shape(format!(
                "channel input is {n}-dimensional, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut out = CMatrix::zeros(self.out_total(), self.out_total());
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator::from_matrix_unchecked(
            self.apply_matrix(rho.matrix())?,
        ))
    }

    /// Heisenberg-picture adjoint action on an arbitrary matrix.
    pub fn adjoint_apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        let n = self.out_total();
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::Shape(format!(
                "adjoint input is {n}-dimensional, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        let mut out = CMatrix::zeros(self.in_total(), self.in_total());
        for k in &self.kraus {
            out += k.adjoint() * x * k;
        }
        Ok(out)
    }

    pub fn adjoint_apply(&self, x: &PovmElement) -> Result<PovmElement> {
        Ok(PovmElement::from_matrix_unchecked(
            self.adjoint_apply_matrix(x.matrix())?,
        ))
    }

    /// Sequential composition self ∘ first.
    pub fn compose(&self, first: &Channel) -> Result<Self> {
        if first.out_total() != self.in_total() {
            return Err(Error::Shape(format!(
                "compose: inner output {} != outer input {}",
                first.out_total(),
                self.in_total()
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        Ok(Self {
            in_dims: first.in_dims.clone(),
            out_dims: self.out_dims.clone(),
            kraus,
        })
    }

    /// Parallel composition self ⊗ other.
    pub fn tensor(&self, other: &Channel) -> Result<Self> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b)?);
            }
        }
        let mut in_dims = self.in_dims.clone();
        in_dims.extend_from_slice(&other.in_dims);
        let mut out_dims = self.out_dims.clone();
        out_dims.extend_from_slice(&other.out_dims);
        Ok(Self {
            in_dims,
            out_dims,
            kraus,
        })
    }

    /// Fixes the jammer state: the trailing input factors whose dimension
    /// product equals `sigma.dim()` are absorbed, realizing ρ ↦ N(ρ ⊗ σ).
    /// σ is purified spectrally, so the Kraus count grows by rank(σ).
    pub fn fix_jammer(&self, sigma: &DensityOperator) -> Result<Self> {
        let jd = sigma.dim();
        let mut prod = 1usize;
        let mut split = self.in_dims.len();
        while split > 0 && prod < jd {
            split -= 1;
            prod *= self.in_dims[split];
        }
        if prod != jd || split == 0 {
            return Err(Error::Shape(format!(
                "no trailing factor block of dimension {jd} in input dims {:?}",
                self.in_dims
            )));
        }
        let a_dims = self.in_dims[..split].to_vec();
        let a_total: usize = a_dims.iter().product();
        let ia = identity(a_total);
        let mut kraus = Vec::new();
        for (p, v) in sigma.spectral()? {
            let vcol = CMatrix::from_column_slice(jd, 1, v.as_slice());
            let embed = kron(&ia, &vcol)?.scale(p.sqrt());
            for k in &self.kraus {
                kraus.push(k * &embed);
            }
        }
        Self::new(a_dims, self.out_dims.clone(), kraus)
    }

    /// Memoryless ℓ-fold power with sorted factor blocks: for a base with
    /// factors (A, J) the power has input (A_1..A_ell, J_1..J_ell).
    pub fn tensor_power(&self, ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Domain("tensor_power requires ell >= 1".into()));
        }
        if ell == 1 {
            return Ok(self.clone());
        }
        let kin = self.in_dims.len();
        let kout = self.out_dims.len();
        let in_total = self
            .in_total()
            .checked_pow(ell as u32)
            .ok_or_else(|| Error::Size("tensor_power input dim overflow".into()))?;
        let out_total = self
            .out_total()
            .checked_pow(ell as u32)
            .ok_or_else(|| Error::Size("tensor_power output dim overflow".into()))?;
        if in_total * in_total > DIM_CAP || out_total * out_total > DIM_CAP {
            return Err(Error::Size(format!(
                "tensor_power dims {in_total}->{out_total} exceed cap"
            )));
        }

        // Sorted dims: block b of the base repeated over the ell copies.
        let sorted = |dims: &[usize]| -> Vec<usize> {
            dims.iter()
                .flat_map(|&d| std::iter::repeat(d).take(ell))
                .collect()
        };
        let in_sorted = sorted(&self.in_dims);
        let out_sorted = sorted(&self.out_dims);
        // Maps a sorted-order ket to the interleaved ((f1..fk)_1 ..) order:
        // interleaved slot t*k+b reads sorted slot b*ell+t.
        let perm_in: Vec<usize> = (0..ell * kin).map(|i| (i % kin) * ell + i / kin).collect();
        let perm_out: Vec<usize> = (0..ell * kout)
            .map(|i| (i % kout) * ell + i / kout)
            .collect();
        let p_in = permute_factors(&in_sorted, &perm_in)?;
        let p_out = permute_factors(&out_sorted, &perm_out)?;
        let p_out_dag = p_out.adjoint();

        let mut kraus: Vec<CMatrix> = vec![identity(1)];
        for _ in 0..ell {
            let mut next = Vec::with_capacity(kraus.len() * self.kraus.len());
            for a in &kraus {
                for b in &self.kraus {
                    next.push(kron(a, b)?);
                }
            }
            kraus = next;
        }
        let kraus = kraus
            .into_iter()
            .map(|k| &p_out_dag * k * &p_in)
            .collect();
        Self::new(in_sorted, out_sorted, kraus)
    }

    /// Normalized Choi state (id ⊗ N)(Φ_in) on (in_ref, out).
    pub fn choi_state(&self) -> Result<DensityOperator> {
        let d = self.in_total();
        let phi = max_entangled_ket(d)?;
        let ext = Channel::identity_channel(vec![d]).tensor(self)?;
        let m = ext.apply_matrix(&(&phi * phi.adjoint()))?;
        Ok(DensityOperator::from_matrix_unchecked(m))
    }

    /// Choi channel Γ: L(J) → L(A ⊗ B), Γ(σ) = (id_A ⊗ N)(Φ_A ⊗ σ),
    /// mapping each jammer state to the Choi state of N_σ.
    /// Requires exactly two input factors (A, J).
    pub fn choi_channel(&self) -> Result<Self> {
        if self.in_dims.len() != 2 {
            return Err(Error::Shape(format!(
                "choi_channel requires (A, J) input factors, got {:?}",
                self.in_dims
            )));
        }
        let (a, j) = (self.in_dims[0], self.in_dims[1]);
        let b = self.out_total();
        let phi = max_entangled_ket(a)?;
        // V: J → A ⊗ A' ⊗ J, |j> -> |phi>|j>
        let phicol = CMatrix::from_column_slice(a * a, 1, phi.as_slice());
        let v = kron(&phicol, &identity(j))?;
        let kraus = self
            .kraus
            .iter()
            .map(|k| Ok(kron(&identity(a), k)? * &v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vec![j], vec![a, b], kraus)
    }
}

/// Embeds a classical AVC N(y|x,s) as a channel that dephases both inputs
/// in the computational basis; `w[s]` is the row-stochastic matrix with
/// entry `w[s][x][y]`.
pub fn embed_classical_avc(w: &[Vec<Vec<f64>>]) -> Result<Channel> {
    let s_dim = w.len();
    if s_dim == 0 {
        return Err(Error::Domain("empty jammer alphabet".into()));
    }
    let x_dim = w[0].len();
    let y_dim = w[0].first().map(|r| r.len()).unwrap_or(0);
    if x_dim == 0 || y_dim == 0 {
        return Err(Error::Domain("empty input/output alphabet".into()));
    }
    for (s, ws) in w.iter().enumerate() {
        if ws.len() != x_dim {
            return Err(Error::Shape("ragged transition family".into()));
        }
        for (x, row) in ws.iter().enumerate() {
            if row.len() != y_dim {
                return Err(Error::Shape("ragged transition row".into()));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!(
                    "transition row (x={x}, s={s}) is not a distribution (sum {sum})"
                )));
            }
        }
    }
    let mut kraus = Vec::new();
    for (s, ws) in w.iter().enumerate() {
        for (x, row) in ws.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                // sqrt(p) |y><x| ⊗ <s|
                let mut k = CMatrix::zeros(y_dim, x_dim * s_dim);
                k[(y, x * s_dim + s)] = c(p.sqrt(), 0.0);
                kraus.push(k);
            }
        }
    }
    Channel::new(vec![x_dim, s_dim], vec![y_dim], kraus)
}

/// Certified interval for the half diamond distance ½‖N₁ − N₂‖_◊.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiamondBound {
    /// Best stabilized trace distance found over optimized pure inputs.
    pub lower: f64,
    /// min(½‖tr_B|J|‖_∞, ½‖J‖₁, 1) for the Choi operator J of the difference.
    pub upper: f64,
}

impl DiamondBound {
    pub fn converged(&self) -> bool {
        self.gap() <= 1e-6
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    /// Certified achieved distinguishability (the lower endpoint).
    pub fn value(&self) -> f64 {
        self.lower
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DiamondCfg {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for DiamondCfg {
    fn default() -> Self {
        Self {
            restarts: 100,
            max_iter: 60,
            seed: 0x9e3779b97f4a7c15,
        }
    }
}

/// Half diamond distance via see-saw ascent (lower bound) and Choi-operator
/// norm bounds (upper bound). Inputs are canonicalized by their Choi bytes
/// so the result is exactly symmetric in (n1, n2).
pub fn diamond_distance(n1: &Channel, n2: &Channel) -> Result<DiamondBound> {
    diamond_distance_with(n1, n2, &DiamondCfg::default())
}

/// Cheap certified upper bound min(½‖tr_B|J|‖_∞, ½‖J‖₁, 1) on the half
/// diamond distance, without the ascent for the lower bound. Suitable for
/// the inner loop of net construction.
pub fn diamond_upper(n1: &Channel, n2: &Channel) -> Result<f64> {
    if n1.in_total() != n2.in_total() || n1.out_total() != n2.out_total() {
        return Err(Error::Shape("diamond_upper dimension mismatch".into()));
    }
    let d_in = n1.in_total();
    let d_out = n1.out_total();
    let c1 = n1.choi_state()?;
    let c2 = n2.choi_state()?;
    let jop = (c1.matrix() - c2.matrix()).scale(d_in as f64);
    let (jvals, jvecs) = eig_hermitian(&jop)?;
    let mut jabs = CMatrix::zeros(jop.nrows(), jop.ncols());
    for (i, &v) in jvals.iter().enumerate() {
        let col = jvecs.column(i);
        jabs += (col * col.adjoint()).scale(v.abs());
    }
    let red = partial_trace(&jabs, &[d_in, d_out], &[0])?;
    let upper_marginal = 0.5 * qmath::max_eigenvalue(&red)?;
    let upper_trace = 0.5 * jvals.iter().map(|v| v.abs()).sum::<f64>();
    Ok(upper_marginal.min(upper_trace).min(1.0))
}

pub fn diamond_distance_with(n1: &Channel, n2: &Channel, cfg: &DiamondCfg) -> Result<DiamondBound> {
    if n1.in_total() != n2.in_total() || n1.out_total() != n2.out_total() {
        return Err(Error::Shape("diamond_distance dimension mismatch".into()));
    }
    let d_in = n1.in_total();

    // Canonical order so d(a,b) == d(b,a) bitwise.
    let c1 = n1.choi_state()?;
    let c2 = n2.choi_state()?;
    let key = |m: &CMatrix| -> Vec<u64> {
        m.iter()
            .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
            .collect()
    };
    let (a, b) = if key(c1.matrix()) <= key(c2.matrix()) {
        (n1, n2)
    } else {
        (n2, n1)
    };

    let mut upper = diamond_upper(n1, n2)?;

    // See-saw lower bound over pure inputs on R ⊗ A with |R| = |A|.
    let ida = Channel::identity_channel(vec![d_in]);
    let ext_a = ida.tensor(a)?;
    let ext_b = ida.tensor(b)?;
    let eval = |psi: &CVector| -> Result<(f64, CMatrix)> {
        let rho = psi * psi.adjoint();
        let t = ext_a.apply_matrix(&rho)? - ext_b.apply_matrix(&rho)?;
        let val = 0.5 * trace_norm_hermitian(&t)?;
        Ok((val, t))
    };

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts: Vec<CVector> = vec![max_entangled_ket(d_in)?];
    for _ in 1..cfg.restarts {
        starts.push(crate::random::random_ket(d_in * d_in, &mut rng));
    }

    let mut lower: f64 = 0.0;
    for mut psi in starts {
        let (mut val, mut t) = eval(&psi)?;
        for _ in 0..cfg.max_iter {
            // Sign operator of the output difference.
            let (tvals, tvecs) = eig_hermitian(&t)?;
            let n = t.nrows();
            let mut w = CMatrix::zeros(n, n);
            for (i, &v) in tvals.iter().enumerate() {
                let col = tvecs.column(i);
                w += (col * col.adjoint()).scale(if v >= 0.0 { 1.0 } else { -1.0 });
            }
            let h = ext_a.adjoint_apply_matrix(&w)? - ext_b.adjoint_apply_matrix(&w)?;
            let (_, hvecs) = eig_hermitian(&h)?;
            // Candidate updates from both ends of the spectrum; the trace
            // norm is sign-invariant so either extreme may be the ascent.
            let cand_top: CVector = hvecs.column(0).into_owned();
            let cand_bot: CVector = hvecs.column(h.nrows() - 1).into_owned();
            let (vt, tt) = eval(&cand_top)?;
            let (vb, tb) = eval(&cand_bot)?;
            let (nv, nt, np) = if vt >= vb {
                (vt, tt, cand_top)
            } else {
                (vb, tb, cand_bot)
            };
            if nv <= val + 1e-12 {
                break;
            }
            val = nv;
            t = nt;
            psi = np;
        }
        let _ = psi;
        if val > lower {
            lower = val;
        }
        if upper - lower <= 1e-9 {
            break;
        }
    }
    if upper < lower {
        upper = lower;
    }
    Ok(DiamondBound { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_channel};
    use crate::scenario;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_channel_fixes_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rho = random_density(4, &mut rng);
        let ch = Channel::identity_channel(vec![4]);
        let out = ch.apply(&rho).unwrap();
        assert!(qmath::frobenius(&(out.matrix() - rho.matrix())) < 1e-14);
    }

    #[test]
    fn constant_channel_outputs_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(2, &mut rng);
        let mixed = DensityOperator::maximally_mixed(2).unwrap();
        let ch = Channel::constant(vec![2], &mixed).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert!(qmath::frobenius(&(out.matrix() - mixed.matrix())) < 1e-12);
    }

    #[test]
    fn random_channel_preserves_state_validity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = random_channel(&[2, 2], &[2], 2, &mut rng);
        let rho = random_density(4, &mut rng);
        let out = ch.apply(&rho).unwrap();
        assert!((qmath::trace(out.matrix()).re - 1.0).abs() < 1e-10);
        assert!(qmath::min_eigenvalue(out.matrix()).unwrap() > -1e-10);
    }

    #[test]
    fn adjoint_unital_and_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = random_channel(&[2, 2], &[2], 3, &mut rng);
        let one = identity(2);
        let back = ch.adjoint_apply_matrix(&one).unwrap();
        assert!(qmath::frobenius(&(back - identity(4))) < 1e-9);
        for _ in 0..50 {
            let rho = random_density(4, &mut rng);
            let x = crate::random::random_density(2, &mut rng); // any psd works as a test observable
            let lhs = qmath::trace(&(ch.apply_matrix(rho.matrix()).unwrap() * x.matrix()));
            let rhs = qmath::trace(
                &(rho.matrix() * ch.adjoint_apply_matrix(x.matrix()).unwrap()),
            );
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn fix_jammer_cnot_control() {
        // CNOT with control J (second factor), then discard J.
        let ch = scenario::bitflip_jammer_channel();
        let s0 = DensityOperator::basis(2, 0).unwrap();
        let s1 = DensityOperator::basis(2, 1).unwrap();
        let id_like = ch.fix_jammer(&s0).unwrap();
        let x_like = ch.fix_jammer(&s1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(2, &mut rng);
        let out0 = id_like.apply(&rho).unwrap();
        assert!(qmath::frobenius(&(out0.matrix() - rho.matrix())) < 1e-12);
        let out1 = x_like.apply(&rho).unwrap();
        let expect = qmath::pauli_x() * rho.matrix() * qmath::pauli_x();
        assert!(qmath::frobenius(&(out1.matrix() - expect)) < 1e-12);
    }

    #[test]
    fn fix_jammer_invariant_when_jammer_discarded() {
        let ch = scenario::jammer_ignoring_channel();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s1 = random_density(2, &mut rng);
        let s2 = random_density(2, &mut rng);
        let c1 = ch.fix_jammer(&s1).unwrap();
        let c2 = ch.fix_jammer(&s2).unwrap();
        let d = diamond_distance(&c1, &c2).unwrap();
        assert!(d.upper < 1e-9);
    }

    #[test]
    fn tensor_power_identity() {
        let ch = Channel::identity_channel(vec![2]);
        let p = ch.tensor_power(2).unwrap();
        assert_eq!(p.in_total(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_density(4, &mut rng);
        let out = p.apply(&rho).unwrap();
        assert!(qmath::frobenius(&(out.matrix() - rho.matrix())) < 1e-12);
    }

    #[test]
    fn tensor_power_qubit_dims() {
        let ch = scenario::bitflip_jammer_channel();
        let p = ch.tensor_power(3).unwrap();
        assert_eq!(p.out_total(), 8);
        assert_eq!(p.in_dims(), &[2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn compound_identity_choi() {
        // Choi((N^⊗2)_{σ⊗σ}) = Choi((N_σ)^⊗2)
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let ch = random_channel(&[2, 2], &[2], 2, &mut rng);
            let sigma = random_density(2, &mut rng);
            let lhs = ch
                .tensor_power(2)
                .unwrap()
                .fix_jammer(&sigma.tensor(&sigma).unwrap())
                .unwrap()
                .choi_state()
                .unwrap();
            let rhs = ch
                .fix_jammer(&sigma)
                .unwrap()
                .tensor_power(2)
                .unwrap()
                .choi_state()
                .unwrap();
            assert!(qmath::frobenius(&(lhs.matrix() - rhs.matrix())) < 1e-10);
        }
    }

    #[test]
    fn s_ell_covariance() {
        // N^⊗ℓ ∘ (U_π^A ⊗ U_π^J) = U_π^B ∘ N^⊗ℓ
        use itertools::Itertools;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = random_channel(&[2, 2], &[2], 2, &mut rng);
        let ell = 3;
        let p = ch.tensor_power(ell).unwrap();
        for perm in (0..ell).permutations(ell) {
            let ua = crate::symmetry::perm_unitary(&perm, 2, ell).unwrap();
            let uj = ua.clone();
            let ub = ua.clone();
            let u_in = kron(ua.matrix(), uj.matrix()).unwrap();
            let rho = random_density(64, &mut rng);
            let lhs = p
                .apply_matrix(&(&u_in * rho.matrix() * u_in.adjoint()))
                .unwrap();
            let rhs = ub.matrix() * p.apply_matrix(rho.matrix()).unwrap() * ub.matrix().adjoint();
            assert!(qmath::frobenius(&(lhs - rhs)) < 1e-10);
        }
    }

    #[test]
    fn embed_bsc_family() {
        let ch = scenario::bsc_family_channel(&[0.1, 0.2]);
        // input |0><0| ⊗ |s><s| -> diag(1-p_s, p_s)
        for (s, p) in [(0usize, 0.1f64), (1, 0.2)] {
            let x0 = DensityOperator::basis(2, 0).unwrap();
            let js = DensityOperator::basis(2, s).unwrap();
            let input = x0.tensor(&js).unwrap();
            let out = ch.apply(&input).unwrap();
            assert_abs_diff_eq!(out.matrix()[(0, 0)].re, 1.0 - p, epsilon = 1e-12);
            assert_abs_diff_eq!(out.matrix()[(1, 1)].re, p, epsilon = 1e-12);
        }
        // coherent |+> jammer input equals the (1/2, 1/2) average channel
        let plus = qmath::bloch_state(1.0, 0.0, 0.0).unwrap();
        let x0 = DensityOperator::basis(2, 0).unwrap();
        let out = ch.apply(&x0.tensor(&plus).unwrap()).unwrap();
        let avg_p = 0.5 * 0.1 + 0.5 * 0.2;
        assert_abs_diff_eq!(out.matrix()[(1, 1)].re, avg_p, epsilon = 1e-12);
    }

    #[test]
    fn embed_rejects_non_stochastic() {
        let w = vec![vec![vec![0.6, 0.6], vec![0.0, 1.0]]];
        assert!(matches!(embed_classical_avc(&w), Err(Error::Domain(_))));
    }

    #[test]
    fn diamond_identical_channels() {
        let ch = scenario::bitflip_jammer_channel();
        let d = diamond_distance(&ch, &ch).unwrap();
        assert!(d.upper < 1e-12);
    }

    #[test]
    fn diamond_identity_vs_x() {
        let id = Channel::identity_channel(vec![2]);
        let x = Channel::from_unitary(qmath::pauli_x(), vec![2], vec![2]).unwrap();
        let d = diamond_distance(&id, &x).unwrap();
        assert!(d.converged(), "gap {}", d.gap());
        assert_abs_diff_eq!(d.value(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn diamond_identity_vs_depolarizing() {
        let id = Channel::identity_channel(vec![2]);
        let dep = Channel::constant(vec![2], &DensityOperator::maximally_mixed(2).unwrap()).unwrap();
        let d = diamond_distance(&id, &dep).unwrap();
        assert!(d.converged(), "gap {}", d.gap());
        // frozen regression constant from the optimization oracle
        assert_abs_diff_eq!(d.value(), 0.75, epsilon = 1e-7);
    }

    #[test]
    fn diamond_pseudometric_on_bitflip_family() {
        let ch = scenario::bitflip_jammer_channel();
        let fam: Vec<Channel> = [0.1, 0.4, 0.8]
            .iter()
            .map(|&p| {
                let s = qmath::bloch_state(0.0, 0.0, 1.0 - 2.0 * p).unwrap();
                ch.fix_jammer(&s).unwrap()
            })
            .collect();
        let d01 = diamond_distance(&fam[0], &fam[1]).unwrap();
        let d10 = diamond_distance(&fam[1], &fam[0]).unwrap();
        assert_eq!(d01.value(), d10.value()); // symmetry exact by canonicalization
        let d12 = diamond_distance(&fam[1], &fam[2]).unwrap();
        let d02 = diamond_distance(&fam[0], &fam[2]).unwrap();
        assert!(d02.value() <= d01.value() + d12.value() + 2e-6);
        // analytic distance |p - p'| for this family
        assert_abs_diff_eq!(d01.value(), 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(d02.value(), 0.7, epsilon = 1e-6);
    }

    #[test]
    fn choi_channel_two_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = random_channel(&[2, 2], &[2], 2, &mut rng);
        let gamma = ch.choi_channel().unwrap();
        for _ in 0..5 {
            let sigma = random_density(2, &mut rng);
            let lhs = gamma.apply(&sigma).unwrap();
            let rhs = ch.fix_jammer(&sigma).unwrap().choi_state().unwrap();
            assert!(qmath::frobenius(&(lhs.matrix() - rhs.matrix())) < 1e-10);
        }
    }

    #[test]
    fn choi_channel_cnot_control() {
        let ch = scenario::bitflip_jammer_channel();
        let gamma = ch.choi_channel().unwrap();
        let out = gamma
            .apply(&DensityOperator::basis(2, 0).unwrap())
            .unwrap();
        let phi = qmath::max_entangled(2).unwrap();
        assert!(qmath::frobenius(&(out.matrix() - phi.matrix())) < 1e-12);
    }

    #[test]
    fn choi_channel_discarding_jammer() {
        let ch = scenario::jammer_ignoring_channel();
        let gamma = ch.choi_channel().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let phi = qmath::max_entangled(2).unwrap();
        for _ in 0..3 {
            let sigma = random_density(2, &mut rng);
            let out = gamma.apply(&sigma).unwrap();
            assert!(qmath::frobenius(&(out.matrix() - phi.matrix())) < 1e-12);
        }
    }
}
