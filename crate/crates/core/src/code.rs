//! Classical and quantum codes, their error functionals against arbitrary
//! jammer states, and the error observables on J^ℓ whose top eigenvalue is
//! the worst-case error.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::qmath::{
    self, identity, kron, max_entangled_ket, partial_trace, CMatrix, DensityOperator, PovmElement,
};

#[derive(Debug, Clone)]
pub struct ClassicalCode {
    ell: usize,
    states: Vec<DensityOperator>,
    povm: Vec<PovmElement>,
}

impl ClassicalCode {
    pub fn new(ell: usize, states: Vec<DensityOperator>, povm: Vec<PovmElement>) -> Result<Self> {
        if states.is_empty() || states.len() != povm.len() {
            return Err(Error::Shape(format!(
                "code needs equally many states ({}) and POVM elements ({})",
                states.len(),
                povm.len()
            )));
        }
        let sdim = states[0].dim();
        if states.iter().any(|s| s.dim() != sdim) {
            return Err(Error::Shape("code states have mixed dimensions".into()));
        }
        let pdim = povm[0].dim();
        let mut sum = CMatrix::zeros(pdim, pdim);
        for d in &povm {
            if d.dim() != pdim {
                return Err(Error::Shape("POVM elements have mixed dimensions".into()));
            }
            sum += d.matrix();
        }
        let resid = qmath::frobenius(&(sum - identity(pdim)));
        if resid > 1e-9 {
            return Err(Error::Domain(format!(
                "POVM does not sum to identity: residual {resid:.3e}"
            )));
        }
        Ok(Self { ell, states, povm })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn messages(&self) -> usize {
        self.states.len()
    }

    pub fn rate(&self) -> f64 {
        (self.messages() as f64).log2() / self.ell as f64
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn povm(&self) -> &[PovmElement] {
        &self.povm
    }
}

#[derive(Debug, Clone)]
pub struct QuantumCode {
    ell: usize,
    local_dim: usize,
    encoder: Channel,
    decoder: Channel,
}

impl QuantumCode {
    pub fn new(ell: usize, local_dim: usize, encoder: Channel, decoder: Channel) -> Result<Self> {
        if encoder.in_total() != local_dim || decoder.out_total() != local_dim {
            return Err(Error::Shape(format!(
                "encoder/decoder do not match local dimension {local_dim}"
            )));
        }
        Ok(Self {
            ell,
            local_dim,
            encoder,
            decoder,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn rate(&self) -> f64 {
        (self.local_dim as f64).log2() / self.ell as f64
    }

    pub fn encoder(&self) -> &Channel {
        &self.encoder
    }

    pub fn decoder(&self) -> &Channel {
        &self.decoder
    }
}

/// Finitely supported distribution over deterministic codes.
#[derive(Debug, Clone)]
pub struct RandomCode<T> {
    weights: Vec<f64>,
    variants: Vec<T>,
}

impl<T> RandomCode<T> {
    pub fn new(weights: Vec<f64>, variants: Vec<T>) -> Result<Self> {
        if variants.is_empty() || weights.len() != variants.len() {
            return Err(Error::Shape("weights/variants length mismatch".into()));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Domain("negative weight".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { weights, variants })
    }

    pub fn singleton(variant: T) -> Self {
        Self {
            weights: vec![1.0],
            variants: vec![variant],
        }
    }

    pub fn uniform(variants: Vec<T>) -> Result<Self> {
        let n = variants.len();
        if n == 0 {
            return Err(Error::Domain("empty code family".into()));
        }
        Ok(Self {
            weights: vec![1.0 / n as f64; n],
            variants,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn variants(&self) -> &[T] {
        &self.variants
    }

    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }
}

/// POVM element E on J^ℓ with P_err(𝒞, ζ) = tr ζE.
#[derive(Debug, Clone)]
pub struct ErrorObservable {
    matrix: PovmElement,
}

impl ErrorObservable {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn expectation(&self, zeta: &DensityOperator) -> Result<f64> {
        if zeta.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "observable dim {} vs state dim {}",
                self.dim(),
                zeta.dim()
            )));
        }
        Ok(qmath::trace(&(zeta.matrix() * self.matrix())).re)
    }
}

/// Splits the powered channel input into the A-block and J-block totals,
/// given the code's state dimension.
fn split_blocks(power: &Channel, a_total: usize) -> Result<(usize, usize)> {
    let in_total = power.in_total();
    if a_total == 0 || in_total % a_total != 0 {
        return Err(Error::Shape(format!(
            "code state dim {a_total} does not divide channel input {in_total}"
        )));
    }
    Ok((a_total, in_total / a_total))
}

/// Average-error functional of a classical code under jammer state ζ on
/// J^ℓ, with the ℓ-fold channel supplied explicitly.
pub fn p_err_powered(
    code: &ClassicalCode,
    power: &Channel,
    zeta: &DensityOperator,
) -> Result<f64> {
    let a_total = code.states()[0].dim();
    let (_, j_total) = split_blocks(power, a_total)?;
    if zeta.dim() != j_total {
        return Err(Error::Shape(format!(
            "jammer state dim {} != J-block dim {}",
            zeta.dim(),
            j_total
        )));
    }
    let big_m = code.messages() as f64;
    let one = identity(power.out_total());
    let mut err = 0.0;
    for (rho, d) in code.states().iter().zip(code.povm().iter()) {
        let input = kron(rho.matrix(), zeta.matrix())?;
        let out = power.apply_matrix(&input)?;
        err += qmath::trace(&(out * (&one - d.matrix()))).re;
    }
    Ok(err / big_m)
}

/// Same as [`p_err_powered`], building N^⊗ℓ from the base channel.
pub fn p_err(code: &ClassicalCode, base: &Channel, zeta: &DensityOperator) -> Result<f64> {
    p_err_powered(code, &base.tensor_power(code.ell())?, zeta)
}

/// Error observable E(𝒞) on J^ℓ via the Heisenberg adjoint:
/// E = (1/M) Σ_m tr_{A^ℓ} (ρ_m ⊗ 1)(N*^{⊗ℓ}(1 − D_m)).
pub fn error_observable_powered(code: &ClassicalCode, power: &Channel) -> Result<ErrorObservable> {
    let a_total = code.states()[0].dim();
    let (da, dj) = split_blocks(power, a_total)?;
    let one_out = identity(power.out_total());
    let one_j = identity(dj);
    let mut e = CMatrix::zeros(dj, dj);
    for (rho, d) in code.states().iter().zip(code.povm().iter()) {
        let lifted = power.adjoint_apply_matrix(&(&one_out - d.matrix()))?;
        let weighted = kron(rho.matrix(), &one_j)? * lifted;
        e += partial_trace(&weighted, &[da, dj], &[1])?;
    }
    e /= qmath::c(code.messages() as f64, 0.0);
    Ok(ErrorObservable {
        matrix: PovmElement::new(e)?,
    })
}

pub fn error_observable(code: &ClassicalCode, base: &Channel) -> Result<ErrorObservable> {
    error_observable_powered(code, &base.tensor_power(code.ell())?)
}

/// Infidelity of a quantum code under jammer state ζ on J^ℓ.
pub fn infidelity_powered(
    code: &QuantumCode,
    power: &Channel,
    zeta: &DensityOperator,
) -> Result<f64> {
    let fixed = power.fix_jammer(zeta)?;
    let eff = code.decoder().compose(&fixed.compose(code.encoder())?)?;
    let big_l = code.local_dim();
    let ext = Channel::identity_channel(vec![big_l]).tensor(&eff)?;
    let phi = max_entangled_ket(big_l)?;
    let phi_mat = &phi * phi.adjoint();
    let out = ext.apply_matrix(&phi_mat)?;
    Ok(1.0 - qmath::trace(&(out * phi_mat)).re)
}

pub fn infidelity(code: &QuantumCode, base: &Channel, zeta: &DensityOperator) -> Result<f64> {
    infidelity_powered(code, &base.tensor_power(code.ell())?, zeta)
}

/// Infidelity observable G(𝒬) on J^ℓ:
/// G = tr_{L'L} (Φ_L ⊗ 1)((id ⊗ E* ∘ N*^{⊗ℓ} ∘ D*)(1 − Φ_L)).
pub fn infidelity_observable_powered(code: &QuantumCode, power: &Channel) -> Result<ErrorObservable> {
    let a_total = code.encoder().out_total();
    let (_, dj) = split_blocks(power, a_total)?;
    let big_l = code.local_dim();
    let enc_ext = code.encoder().tensor(&Channel::identity_channel(vec![dj]))?;
    let chain = code.decoder().compose(&power.compose(&enc_ext)?)?;
    let full = Channel::identity_channel(vec![big_l]).tensor(&chain)?;
    let phi = max_entangled_ket(big_l)?;
    let phi_mat = &phi * phi.adjoint();
    let x = identity(big_l * big_l) - &phi_mat;
    let lifted = full.adjoint_apply_matrix(&x)?;
    let weighted = kron(&phi_mat, &identity(dj))? * lifted;
    let g = partial_trace(&weighted, &[big_l * big_l, dj], &[1])?;
    Ok(ErrorObservable {
        matrix: PovmElement::new(g)?,
    })
}

pub fn infidelity_observable(code: &QuantumCode, base: &Channel) -> Result<ErrorObservable> {
    infidelity_observable_powered(code, &base.tensor_power(code.ell())?)
}

/// Codes whose error functional is an observable on the jammer register.
pub trait JammerObservable {
    fn ell(&self) -> usize;
    fn observable_powered(&self, power: &Channel) -> Result<ErrorObservable>;
    /// Direct evaluation of the error functional; an independent route
    /// from the observable expectation.
    fn error_powered(&self, power: &Channel, zeta: &DensityOperator) -> Result<f64>;
}

impl JammerObservable for ClassicalCode {
    fn ell(&self) -> usize {
        self.ell
    }

    fn observable_powered(&self, power: &Channel) -> Result<ErrorObservable> {
        error_observable_powered(self, power)
    }

    fn error_powered(&self, power: &Channel, zeta: &DensityOperator) -> Result<f64> {
        p_err_powered(self, power, zeta)
    }
}

impl JammerObservable for QuantumCode {
    fn ell(&self) -> usize {
        self.ell
    }

    fn observable_powered(&self, power: &Channel) -> Result<ErrorObservable> {
        infidelity_observable_powered(self, power)
    }

    fn error_powered(&self, power: &Channel, zeta: &DensityOperator) -> Result<f64> {
        infidelity_powered(self, power, zeta)
    }
}

impl<T: JammerObservable> RandomCode<T> {
    pub fn ell(&self) -> usize {
        self.variants[0].ell()
    }

    /// Ē = Σ_λ w_λ E_λ on J^ℓ.
    pub fn average_observable(&self, power: &Channel) -> Result<CMatrix> {
        let mut acc: Option<CMatrix> = None;
        for (w, v) in self.weights.iter().zip(self.variants.iter()) {
            let e = v.observable_powered(power)?;
            let term = e.matrix().scale(*w);
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        Ok(acc.expect("nonempty family"))
    }

    pub fn average_error(&self, power: &Channel, zeta: &DensityOperator) -> Result<f64> {
        let mut acc = 0.0;
        for (w, v) in self.weights.iter().zip(self.variants.iter()) {
            acc += w * v.error_powered(power, zeta)?;
        }
        Ok(acc)
    }
}

/// Worst-case error sup_ζ E_λ P_err(𝒞_λ, ζ) = λ_max(Ē), with the top
/// eigenprojector returned as the jammer's optimal (possibly entangled)
/// strategy on J^ℓ.
pub fn worst_case_error<T: JammerObservable>(
    rc: &RandomCode<T>,
    base: &Channel,
) -> Result<(f64, DensityOperator)> {
    worst_case_error_powered(rc, &base.tensor_power(rc.ell())?)
}

pub fn worst_case_error_powered<T: JammerObservable>(
    rc: &RandomCode<T>,
    power: &Channel,
) -> Result<(f64, DensityOperator)> {
    if rc.is_empty() {
        return Err(Error::Domain("empty code family".into()));
    }
    let ebar = rc.average_observable(power)?;
    let (vals, vecs) = qmath::eig_hermitian(&ebar)?;
    let top = vecs.column(0).into_owned();
    let witness = DensityOperator::from_matrix_unchecked(&top * top.adjoint());
    Ok((vals[0], witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_channel, random_density, random_povm_pair};
    use crate::scenario;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_classical_code<R: rand::Rng>(ell: usize, rng: &mut R) -> ClassicalCode {
        let dim = 1usize << ell;
        let states = vec![
            crate::random::random_pure(dim, rng),
            crate::random::random_pure(dim, rng),
        ];
        let povm = random_povm_pair(dim, rng);
        ClassicalCode::new(ell, states, povm).unwrap()
    }

    #[test]
    fn depolarizing_forces_uniform_error() {
        let base = scenario::depolarizing_channel().unwrap();
        let code = scenario::basis_code().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let zeta = random_density(2, &mut rng);
        let e = p_err(&code, &base, &zeta).unwrap();
        assert_abs_diff_eq!(e, 0.5, epsilon = 1e-12); // 1 - 1/M with M = 2
    }

    #[test]
    fn bitflip_jammer_basis_code_errors() {
        let base = scenario::bitflip_jammer_channel();
        let code = scenario::basis_code().unwrap();
        let z0 = DensityOperator::basis(2, 0).unwrap();
        let z1 = DensityOperator::basis(2, 1).unwrap();
        let zm = DensityOperator::maximally_mixed(2).unwrap();
        assert_abs_diff_eq!(p_err(&code, &base, &z0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p_err(&code, &base, &z1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p_err(&code, &base, &zm).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn observation_one_duality_classical() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for ell in 1..=2usize {
            let base = random_channel(&[2, 2], &[2], 2, &mut rng);
            let power = base.tensor_power(ell).unwrap();
            let code = random_classical_code(ell, &mut rng);
            let e = error_observable_powered(&code, &power).unwrap();
            for _ in 0..10 {
                let zeta = random_density(1 << ell, &mut rng);
                let direct = p_err_powered(&code, &power, &zeta).unwrap();
                let via_obs = e.expectation(&zeta).unwrap();
                assert!((direct - via_obs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn observable_jammer_independent_channel() {
        // N ignores J: E must be a multiple of the identity.
        let base = scenario::jammer_ignoring_channel();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let code = random_classical_code(1, &mut rng);
        let e = error_observable(&code, &base).unwrap();
        let c00 = e.matrix()[(0, 0)];
        let resid = qmath::frobenius(&(e.matrix() - identity(2).scale(c00.re)));
        assert!(resid < 1e-10);
    }

    #[test]
    fn observable_bitflip_diag() {
        let base = scenario::bitflip_jammer_channel();
        let code = scenario::basis_code().unwrap();
        let e = error_observable(&code, &base).unwrap();
        assert_abs_diff_eq!(e.matrix()[(0, 0)].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.matrix()[(1, 1)].re, 1.0, epsilon = 1e-12);
        assert!(e.matrix()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn infidelity_identity_and_constant() {
        let base = scenario::jammer_ignoring_channel();
        let code = scenario::identity_quantum_code(1).unwrap();
        let zeta = DensityOperator::maximally_mixed(2).unwrap();
        assert_abs_diff_eq!(infidelity(&code, &base, &zeta).unwrap(), 0.0, epsilon = 1e-12);

        // decoder output forced to I/L: infidelity = 1 - 1/L²
        let big_l = 2;
        let enc = Channel::identity_channel(vec![2]);
        let dec = Channel::constant(vec![2], &DensityOperator::maximally_mixed(big_l).unwrap())
            .unwrap();
        let code = QuantumCode::new(1, big_l, enc, dec).unwrap();
        assert_abs_diff_eq!(
            infidelity(&code, &base, &zeta).unwrap(),
            1.0 - 1.0 / (big_l * big_l) as f64,
            epsilon = 1e-12
        );
        let g = infidelity_observable(&code, &base).unwrap();
        let expect = identity(2).scale(1.0 - 0.25);
        assert!(qmath::frobenius(&(g.matrix() - expect)) < 1e-10);
    }

    #[test]
    fn observation_one_duality_quantum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = random_channel(&[2, 2], &[2], 2, &mut rng);
        let power = base.tensor_power(2).unwrap();
        let code = scenario::identity_quantum_code(2).unwrap();
        let g = infidelity_observable_powered(&code, &power).unwrap();
        for _ in 0..20 {
            let zeta = random_density(4, &mut rng);
            let direct = infidelity_powered(&code, &power, &zeta).unwrap();
            let via_obs = g.expectation(&zeta).unwrap();
            assert!((direct - via_obs).abs() < 1e-10);
        }
    }

    #[test]
    fn p_err_affine_in_zeta() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base = random_channel(&[2, 2], &[2], 2, &mut rng);
        let power = base.tensor_power(2).unwrap();
        let code = random_classical_code(2, &mut rng);
        let z1 = random_density(4, &mut rng);
        let z2 = random_density(4, &mut rng);
        let alpha = 0.3;
        let mixed = DensityOperator::mix(&[(alpha, &z1), (1.0 - alpha, &z2)]).unwrap();
        let lhs = p_err_powered(&code, &power, &mixed).unwrap();
        let rhs = alpha * p_err_powered(&code, &power, &z1).unwrap()
            + (1.0 - alpha) * p_err_powered(&code, &power, &z2).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn worst_case_singleton_jammer_ignoring() {
        let base = scenario::jammer_ignoring_channel();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let code = random_classical_code(1, &mut rng);
        let fixed_err = p_err(&code, &base, &DensityOperator::maximally_mixed(2).unwrap()).unwrap();
        let rc = RandomCode::singleton(code);
        let (val, _) = worst_case_error(&rc, &base).unwrap();
        assert!((val - fixed_err).abs() < 1e-10);
    }

    #[test]
    fn worst_case_bitflip_witness() {
        let base = scenario::bitflip_jammer_channel();
        let rc = RandomCode::singleton(scenario::basis_code().unwrap());
        let (val, witness) = worst_case_error(&rc, &base).unwrap();
        assert_abs_diff_eq!(val, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(witness.matrix()[(1, 1)].re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn worst_case_dominates_random_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let base = random_channel(&[2, 2], &[2], 2, &mut rng);
        let power = base.tensor_power(2).unwrap();
        let codes = vec![
            random_classical_code(2, &mut rng),
            random_classical_code(2, &mut rng),
        ];
        let rc = RandomCode::uniform(codes).unwrap();
        let (val, witness) = worst_case_error_powered(&rc, &power).unwrap();
        let ebar = rc.average_observable(&power).unwrap();
        for _ in 0..100 {
            let zeta = random_density(4, &mut rng);
            let sample = qmath::trace(&(zeta.matrix() * &ebar)).re;
            assert!(sample <= val + 1e-9);
        }
        let at_witness = qmath::trace(&(witness.matrix() * &ebar)).re;
        assert!((at_witness - val).abs() < 1e-9);
    }
}
