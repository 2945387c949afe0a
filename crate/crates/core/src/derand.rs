//! Elimination of correlation: i.i.d. sampling of code variants, the
//! operator-order test of the empirical mean observable, tail-bound
//! arithmetic and shared-randomness accounting.
//!
//! All tail-bound arithmetic is in nats (natural log); shared-randomness
//! bit counts are base 2. Both bases are carried in the serialized plan.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::code::{worst_case_error_powered, JammerObservable, RandomCode};
use crate::error::{Error, Result};
use crate::qmath::{self, identity, CMatrix};
use crate::seed;

/// Binary relative entropy D(u‖v) = u ln(u/v) + (1−u) ln((1−u)/(1−v)),
/// in nats. Returns +∞ when v ∈ {0, 1} with u ≠ v.
pub fn bin_rel_entropy(u: f64, v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("D({u}||{v}) needs arguments in [0,1]")));
    }
    if (u - v).abs() == 0.0 {
        return Ok(0.0);
    }
    if v <= 0.0 || v >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    Ok(term(u, v) + term(1.0 - u, 1.0 - v))
}

/// A-W style tail bound |J|^ℓ · exp(−n · D(ε+δ‖ε)) for the probability
/// that the empirical mean observable violates (ε+δ)·1.
pub fn tail_bound(n: usize, epsilon: f64, delta: f64, jdim: usize, ell: usize) -> Result<f64> {
    let d = bin_rel_entropy(epsilon + delta, epsilon)?;
    Ok((jdim as f64).powi(ell as i32) * (-(n as f64) * d).exp())
}

/// Sample sizes making the tail bound < 1: the Pinsker-based sufficient
/// count floor((1/2δ²)(ln|J|)ℓ) + 1 and the exact smallest n.
pub fn sample_size(
    epsilon: f64,
    delta: f64,
    jdim: usize,
    ell: usize,
) -> Result<(usize, usize)> {
    if epsilon + delta >= 1.0 || delta <= 0.0 {
        return Err(Error::Domain(format!(
            "need 0 < delta and epsilon + delta < 1, got eps={epsilon}, delta={delta}"
        )));
    }
    let lnj = (jdim as f64).ln();
    let n_pinsker = ((1.0 / (2.0 * delta * delta)) * lnj * ell as f64).floor() as usize + 1;
    let d = bin_rel_entropy(epsilon + delta, epsilon)?;
    let n_exact = if d.is_infinite() {
        1
    } else {
        ((ell as f64) * lnj / d).floor() as usize + 1
    };
    Ok((n_pinsker, n_exact))
}

/// Parameters of a sampling reduction, with the tail bound value
/// and the shared-randomness bit count log₂ n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerandPlan {
    pub epsilon: f64,
    pub delta: f64,
    pub ell: usize,
    pub jdim: usize,
    pub n: usize,
    /// jdim^ℓ · exp(−n·D(ε+δ‖ε)); exponent in nats.
    pub tail_bound: f64,
    /// log₂(n).
    pub shared_bits: f64,
    /// Unit annotations, fixed: entropy in nats, bits in base 2.
    pub log_base_note: String,
}

impl DerandPlan {
    pub fn new(epsilon: f64, delta: f64, ell: usize, jdim: usize) -> Result<Self> {
        let (_, n_exact) = sample_size(epsilon, delta, jdim, ell)?;
        Ok(Self {
            epsilon,
            delta,
            ell,
            jdim,
            n: n_exact,
            tail_bound: tail_bound(n_exact, epsilon, delta, jdim, ell)?,
            shared_bits: (n_exact as f64).log2(),
            log_base_note: "tail bound in nats; shared_bits in base 2".into(),
        })
    }
}

/// Outcome of a successful sampling reduction.
#[derive(Debug, Clone)]
pub struct DerandResult<T> {
    pub plan: DerandPlan,
    pub chosen: Vec<usize>,
    pub reduced: RandomCode<T>,
    /// λ_max of the empirical mean observable.
    pub achieved: f64,
    pub attempts: usize,
}

const MAX_ATTEMPTS: usize = 100;

fn empirical_mean(observables: &[CMatrix], idx: &[usize]) -> CMatrix {
    let dim = observables[0].nrows();
    let mut acc = CMatrix::zeros(dim, dim);
    for &i in idx {
        acc += &observables[i];
    }
    acc.scale(1.0 / idx.len() as f64)
}

fn draw_indices<R: rand::Rng>(weights: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let dist = WeightedIndex::new(weights).expect("validated weights");
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Draws n = n_exact i.i.d. variants, tests the empirical mean observable
/// against (ε+δ)·1 in operator order, retrying with fresh seed streams up
/// to 100 times. ε is measured as the worst-case error of `rc` itself.
pub fn derandomize<T: JammerObservable + Clone>(
    rc: &RandomCode<T>,
    base: &Channel,
    delta: f64,
    rng_seed: u64,
) -> Result<DerandResult<T>> {
    let power = base.tensor_power(rc.ell())?;
    let (epsilon, _) = worst_case_error_powered(rc, &power)?;
    let jdim = per_letter_jdim(&power, rc, base)?;
    let plan = DerandPlan::new(epsilon, delta, rc.ell(), jdim)?;

    let observables: Vec<CMatrix> = rc
        .variants()
        .iter()
        .map(|v| Ok(v.observable_powered(&power)?.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    let dim = observables[0].nrows();
    let threshold = identity(dim).scale(epsilon + delta);

    let mut failures = 0usize;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(rng_seed, &[attempt as u64]));
        let chosen = draw_indices(rc.weights(), plan.n, &mut rng);
        let mean = empirical_mean(&observables, &chosen);
        if qmath::op_leq(&mean, &threshold, 1e-9)? {
            let achieved = qmath::max_eigenvalue(&mean)?;
            let variants: Vec<T> = chosen.iter().map(|&i| rc.variants()[i].clone()).collect();
            let reduced = RandomCode::uniform(variants)?;
            return Ok(DerandResult {
                plan,
                chosen,
                reduced,
                achieved,
                attempts: attempt + 1,
            });
        }
        failures += 1;
    }
    Err(Error::Verification(format!(
        "derandomize failed {failures}/{MAX_ATTEMPTS} attempts; empirical failure rate {:.3} \
         exceeds what the tail bound {:.3e} predicts",
        failures as f64 / MAX_ATTEMPTS as f64,
        plan.tail_bound
    )))
}

fn per_letter_jdim<T: JammerObservable>(
    power: &Channel,
    rc: &RandomCode<T>,
    base: &Channel,
) -> Result<usize> {
    // J is the trailing factor of the base channel.
    let _ = power;
    let _ = rc;
    base.in_dims()
        .last()
        .copied()
        .ok_or_else(|| Error::Shape("channel without input factors".into()))
}

/// Fraction of independent trials in which the empirical mean observable
/// violates the operator-order test; deterministic given the seed.
pub fn empirical_failure_rate<T: JammerObservable>(
    rc: &RandomCode<T>,
    base: &Channel,
    delta: f64,
    n: usize,
    trials: usize,
    rng_seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    let power = base.tensor_power(rc.ell())?;
    let (epsilon, _) = worst_case_error_powered(rc, &power)?;
    let observables: Vec<CMatrix> = rc
        .variants()
        .iter()
        .map(|v| Ok(v.observable_powered(&power)?.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    let dim = observables[0].nrows();
    let threshold = identity(dim).scale(epsilon + delta);
    let mut failures = 0usize;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(rng_seed, &[trial as u64]));
        let chosen = draw_indices(rc.weights(), n, &mut rng);
        let mean = empirical_mean(&observables, &chosen);
        if !qmath::op_leq(&mean, &threshold, 1e-9)? {
            failures += 1;
        }
    }
    Ok(failures as f64 / trials as f64)
}
