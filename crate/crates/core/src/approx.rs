//! Discretization machinery: nets of jammer states under the induced
//! half-diamond distance, lifted product nets at block length ℓ, and the
//! telescoping combinator that replaces a multi-letter jammer state letter
//! by letter while accumulating certified per-step bounds.

use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{diamond_upper, Channel, JammerFamily};
use crate::code::{JammerObservable, RandomCode};
use crate::error::{Error, Result};
use crate::qmath::{self, bloch_state, kron, permute_factors, CMatrix, DensityOperator};
use crate::random;

/// η-net of single-letter jammer states: every family member is within η
/// of some net point in the induced half-diamond distance
/// d(σ, σ') = ½‖𝒩_σ − 𝒩_{σ'}‖_◊ (certified via the cheap upper bound).
#[derive(Debug, Clone)]
pub struct StateNet {
    eta: f64,
    points: Vec<DensityOperator>,
    fixed: Vec<Channel>,
    family: JammerFamily,
    covering_radius: f64,
}

/// Serializable net summary with the validation outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetReport {
    pub eta: f64,
    pub size: usize,
    /// Max observed distance-to-net over the validation samples.
    pub covering_radius: f64,
    pub log_size: f64,
    /// Log of the volumetric existence bound (10|A|²/η)^{2|A|²|B|²}.
    pub log_cardinality_bound: f64,
    /// Net points as row-major [re, im] entry lists.
    pub points: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy)]
pub struct NetCfg {
    pub max_points: usize,
    pub validation_trials: usize,
    pub validation_rounds: usize,
    pub seed: u64,
}

impl Default for NetCfg {
    fn default() -> Self {
        Self {
            max_points: 512,
            validation_trials: 1000,
            validation_rounds: 5,
            seed: 0x5eed,
        }
    }
}

fn per_letter_jdim(family: &JammerFamily) -> Result<usize> {
    family
        .base
        .in_dims()
        .last()
        .copied()
        .ok_or_else(|| Error::Shape("channel without input factors".into()))
}

/// Log of the volumetric net-cardinality bound for per-letter dims |A|, |B|.
pub fn cardinality_log_bound(a_dim: usize, b_dim: usize, eta: f64) -> f64 {
    let a2 = (a_dim * a_dim) as f64;
    let b2 = (b_dim * b_dim) as f64;
    2.0 * a2 * b2 * (10.0 * a2 / eta).ln()
}

fn sample_family_state<R: Rng>(
    family: &JammerFamily,
    jdim: usize,
    rng: &mut R,
) -> DensityOperator {
    match &family.classical_states {
        Some(set) => set[rng.gen_range(0..set.len())].clone(),
        None => {
            if rng.gen_bool(0.5) {
                random::random_pure(jdim, rng)
            } else {
                random::random_density(jdim, rng)
            }
        }
    }
}

/// Candidate pool for the greedy construction when no finite classical
/// state set is declared. Supported up to |J| = 3.
fn candidate_pool(jdim: usize, seed_val: u64) -> Result<Vec<DensityOperator>> {
    let mut pool = Vec::new();
    for k in 0..jdim {
        pool.push(DensityOperator::basis(jdim, k)?);
    }
    pool.push(DensityOperator::maximally_mixed(jdim)?);
    match jdim {
        2 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for (r, count) in [(1.0, 120usize), (0.5, 40)] {
                for i in 0..count {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let theta = golden * i as f64;
                    let s = (1.0 - z * z).sqrt();
                    pool.push(bloch_state(r * s * theta.cos(), r * s * theta.sin(), r * z)?);
                }
            }
        }
        3 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_val);
            for _ in 0..160 {
                pool.push(random::random_pure(jdim, &mut rng));
            }
            for _ in 0..80 {
                pool.push(random::random_density(jdim, &mut rng));
            }
        }
        _ => {
            return Err(Error::Size(format!(
                "no candidate parameterization for |J| = {jdim}"
            )))
        }
    }
    Ok(pool)
}

pub fn build_state_net(family: &JammerFamily, eta: f64) -> Result<StateNet> {
    build_state_net_with(family, eta, &NetCfg::default())
}

/// Greedy farthest-point covering: repeatedly adds the family state
/// farthest from the current net until the certified covering radius over
/// the candidate pool drops to η, then Monte Carlo validates on fresh
/// family samples (violators are absorbed as extra net points).
pub fn build_state_net_with(family: &JammerFamily, eta: f64, cfg: &NetCfg) -> Result<StateNet> {
    if eta <= 0.0 {
        return Err(Error::Domain(format!("net radius {eta} must be positive")));
    }
    let jdim = per_letter_jdim(family)?;
    let candidates = match &family.classical_states {
        Some(set) if !set.is_empty() => set.clone(),
        Some(_) => return Err(Error::Domain("empty classical state set".into())),
        None => candidate_pool(jdim, cfg.seed)?,
    };
    let cand_fixed = candidates
        .iter()
        .map(|s| family.base.fix_jammer(s))
        .collect::<Result<Vec<_>>>()?;

    let mut points = vec![candidates[0].clone()];
    let mut fixed = vec![cand_fixed[0].clone()];
    // distance of each candidate to the current net
    let mut mindist: Vec<f64> = cand_fixed
        .iter()
        .map(|ch| diamond_upper(ch, &fixed[0]))
        .collect::<Result<Vec<_>>>()?;

    loop {
        let (far, &radius) = mindist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("nonempty pool");
        if radius <= eta {
            break;
        }
        if points.len() >= cfg.max_points {
            return Err(Error::NonConvergence(format!(
                "net capped at {} points with covering radius {radius:.4e} > η = {eta:.4e}",
                points.len()
            )));
        }
        points.push(candidates[far].clone());
        fixed.push(cand_fixed[far].clone());
        let newest = fixed.last().unwrap();
        for (d, ch) in mindist.iter_mut().zip(cand_fixed.iter()) {
            let nd = diamond_upper(ch, newest)?;
            if nd < *d {
                *d = nd;
            }
        }
    }

    // Monte Carlo validation on fresh family members; any uncovered sample
    // becomes a net point and the round is retried.
    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(cfg.seed, &[1]));
    let covering_radius;
    let mut round = 0;
    loop {
        let mut worst = 0.0f64;
        let mut violator: Option<DensityOperator> = None;
        for _ in 0..cfg.validation_trials {
            let s = sample_family_state(family, jdim, &mut rng);
            let ch = family.base.fix_jammer(&s)?;
            let mut d = f64::INFINITY;
            for f in &fixed {
                d = d.min(diamond_upper(&ch, f)?);
                if d <= eta {
                    break;
                }
            }
            if d > worst {
                worst = d;
            }
            if d > eta && violator.is_none() {
                violator = Some(s);
            }
        }
        match violator {
            None => {
                covering_radius = worst;
                break;
            }
            Some(s) => {
                round += 1;
                if round > cfg.validation_rounds || points.len() >= cfg.max_points {
                    return Err(Error::NonConvergence(format!(
                        "validation still finds radius {worst:.4e} > η after {round} rounds"
                    )));
                }
                fixed.push(family.base.fix_jammer(&s)?);
                points.push(s);
            }
        }
    }

    Ok(StateNet {
        eta,
        points,
        fixed,
        family: family.clone(),
        covering_radius,
    })
}

impl StateNet {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DensityOperator] {
        &self.points
    }

    pub fn family(&self) -> &JammerFamily {
        &self.family
    }

    /// Validated covering radius (max sampled distance-to-net).
    pub fn covering_radius(&self) -> f64 {
        self.covering_radius
    }

    /// Index of the closest net point to σ and the certified distance.
    pub fn nearest(&self, sigma: &DensityOperator) -> Result<(usize, f64)> {
        let ch = self.family.base.fix_jammer(sigma)?;
        let mut best = (0usize, f64::INFINITY);
        for (i, f) in self.fixed.iter().enumerate() {
            let d = diamond_upper(&ch, f)?;
            if d < best.1 {
                best = (i, d);
            }
        }
        Ok(best)
    }

    pub fn report(&self) -> Result<NetReport> {
        let jdim = per_letter_jdim(&self.family)?;
        let a_dim = self.family.base.in_total() / jdim;
        let b_dim = self.family.base.out_total();
        Ok(NetReport {
            eta: self.eta,
            size: self.len(),
            covering_radius: self.covering_radius,
            log_size: (self.len() as f64).ln(),
            log_cardinality_bound: cardinality_log_bound(a_dim, b_dim, self.eta),
            points: self
                .points
                .iter()
                .map(|p| p.matrix().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        })
    }
}

/// Worst-case error over net product tuples versus over sampled family
/// tuples at block length ℓ.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LiftedGap {
    /// Max of E_λ P_err over σ_{i_1} ⊗ … ⊗ σ_{i_ℓ} from the net.
    pub sup_net: f64,
    /// Max over sampled s^ℓ tuples of family members.
    pub sup_sampled: f64,
    /// False when |net|^ℓ exceeded the cap and the net side was sampled too.
    pub net_enumerated: bool,
}

const TUPLE_CAP: usize = 20_000;

pub fn lifted_net_gap<T: JammerObservable>(
    net: &StateNet,
    rc: &RandomCode<T>,
    base: &Channel,
    ell: usize,
    trials: usize,
    seed_val: u64,
) -> Result<LiftedGap> {
    if rc.ell() != ell {
        return Err(Error::Shape(format!(
            "code block length {} != requested ℓ = {ell}",
            rc.ell()
        )));
    }
    let power = base.tensor_power(ell)?;
    let ebar = rc.average_observable(&power)?;
    let expect = |zeta: &CMatrix| -> f64 { qmath::trace(&(zeta * &ebar)).re };
    let product = |idx: &[usize]| -> Result<CMatrix> {
        let mut m = qmath::identity(1);
        for &i in idx {
            m = kron(&m, net.points[i].matrix())?;
        }
        Ok(m)
    };

    let total = (net.len() as f64).powi(ell as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_val);
    let mut sup_net = f64::NEG_INFINITY;
    let net_enumerated = total <= TUPLE_CAP as f64;
    if net_enumerated {
        for idx in (0..ell).map(|_| 0..net.len()).multi_cartesian_product() {
            sup_net = sup_net.max(expect(&product(&idx)?));
        }
    } else {
        for _ in 0..trials {
            let idx: Vec<usize> = (0..ell).map(|_| rng.gen_range(0..net.len())).collect();
            sup_net = sup_net.max(expect(&product(&idx)?));
        }
    }

    let jdim = per_letter_jdim(&net.family)?;
    let mut sup_sampled = f64::NEG_INFINITY;
    // enumerate finite classical families exactly when affordable
    if let Some(set) = net
        .family
        .classical_states
        .as_ref()
        .filter(|s| (s.len() as f64).powi(ell as i32) <= TUPLE_CAP as f64)
    {
        for tuple in (0..ell).map(|_| set.iter()).multi_cartesian_product() {
            let mut m = qmath::identity(1);
            for s in tuple {
                m = kron(&m, s.matrix())?;
            }
            sup_sampled = sup_sampled.max(expect(&m));
        }
    } else {
        for _ in 0..trials {
            let mut m = qmath::identity(1);
            for _ in 0..ell {
                let s = sample_family_state(&net.family, jdim, &mut rng);
                m = kron(&m, s.matrix())?;
            }
            sup_sampled = sup_sampled.max(expect(&m));
        }
    }
    Ok(LiftedGap {
        sup_net,
        sup_sampled,
        net_enumerated,
    })
}

/// One letter of a telescoping approximation: returns the modified state
/// and a certified half-diamond bound on the induced change of the ℓ-fold
/// jammer-fixed channel.
pub trait StepApprox {
    fn approx_letter(
        &self,
        sigma: &DensityOperator,
        ell: usize,
        letter: usize,
    ) -> Result<(DensityOperator, f64)>;
}

/// Replaces letters 0..ℓ of a (possibly correlated) jammer state on J^ℓ
/// one at a time; by the triangle inequality the ℓ-fold channels at σ and
/// at the returned σ' differ by at most the sum of the step bounds.
pub fn telescope_approx<S: StepApprox + ?Sized>(
    sigma: &DensityOperator,
    step: &S,
    ell: usize,
) -> Result<(DensityOperator, Vec<f64>)> {
    let mut cur = sigma.clone();
    let mut bounds = Vec::with_capacity(ell);
    for i in 0..ell {
        let (next, b) = step.approx_letter(&cur, ell, i).map_err(|e| {
            Error::Verification(format!("telescoping failed at letter {i}: {e}"))
        })?;
        bounds.push(b);
        cur = next;
    }
    Ok((cur, bounds))
}

/// Step approximator for classical (computational-basis) jammer letters:
/// conditioned on the letter's basis value, the letter is replaced by the
/// nearest net point; the step bound is the expectation of the per-value
/// net distances.
#[derive(Debug, Clone)]
pub struct ClassicalNetProjection {
    jdim: usize,
    /// nearest net point and certified distance for each basis value
    assignments: Vec<(DensityOperator, f64)>,
}

impl ClassicalNetProjection {
    pub fn new(net: &StateNet) -> Result<Self> {
        let jdim = per_letter_jdim(&net.family)?;
        let mut assignments = Vec::with_capacity(jdim);
        for j in 0..jdim {
            let basis = DensityOperator::basis(jdim, j)?;
            let (idx, d) = net.nearest(&basis)?;
            assignments.push((net.points[idx].clone(), d));
        }
        Ok(Self { jdim, assignments })
    }
}

impl StepApprox for ClassicalNetProjection {
    fn approx_letter(
        &self,
        sigma: &DensityOperator,
        ell: usize,
        letter: usize,
    ) -> Result<(DensityOperator, f64)> {
        let jdim = self.jdim;
        let total = jdim.checked_pow(ell as u32).ok_or_else(|| {
            Error::Size("jammer register dimension overflow".into())
        })?;
        if sigma.dim() != total {
            return Err(Error::Shape(format!(
                "state dim {} != |J|^ℓ = {total}",
                sigma.dim()
            )));
        }
        if letter >= ell {
            return Err(Error::Shape(format!("letter {letter} out of range {ell}")));
        }
        // bring the letter to the front
        let dims = vec![jdim; ell];
        let mut perm = vec![letter];
        perm.extend((0..ell).filter(|&i| i != letter));
        let u = permute_factors(&dims, &perm)?;
        let front = &u * sigma.matrix() * u.adjoint();
        let rest = total / jdim;

        // check the letter is classical: off-diagonal blocks must vanish
        let mut offdiag = 0.0f64;
        for j in 0..jdim {
            for k in 0..jdim {
                if j == k {
                    continue;
                }
                for a in 0..rest {
                    for b in 0..rest {
                        offdiag += front[(j * rest + a, k * rest + b)].norm_sqr();
                    }
                }
            }
        }
        if offdiag.sqrt() > 1e-9 {
            return Err(Error::Domain(format!(
                "letter {letter} carries coherences (off-diagonal norm {:.2e})",
                offdiag.sqrt()
            )));
        }

        let mut out_front = CMatrix::zeros(total, total);
        let mut bound = 0.0;
        for j in 0..jdim {
            let mut block = CMatrix::zeros(rest, rest);
            for a in 0..rest {
                for b in 0..rest {
                    block[(a, b)] = front[(j * rest + a, j * rest + b)];
                }
            }
            let p = qmath::trace(&block).re;
            if p < 1e-14 {
                continue;
            }
            let (target, d) = &self.assignments[j];
            out_front += kron(target.matrix(), &block)?;
            bound += p * d;
        }
        let back = u.adjoint() * out_front * u;
        Ok((DensityOperator::from_matrix_unchecked(back), bound))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::diamond_distance;
    use crate::scenario;
    use approx::assert_abs_diff_eq;

    fn bitflip_continuous() -> JammerFamily {
        JammerFamily {
            base: scenario::bitflip_jammer_channel(),
            classical_states: None,
        }
    }

    fn bloch_p(p: f64) -> DensityOperator {
        // ⟨1|σ|1⟩ = p
        qmath::bloch_state(0.0, 0.0, 1.0 - 2.0 * p).unwrap()
    }

    #[test]
    fn induced_metric_matches_oracle_on_bitflip() {
        let base = scenario::bitflip_jammer_channel();
        for (p, q) in [(0.0, 1.0), (0.1, 0.4), (0.3, 0.35)] {
            let cp = base.fix_jammer(&bloch_p(p)).unwrap();
            let cq = base.fix_jammer(&bloch_p(q)).unwrap();
            let fast = diamond_upper(&cp, &cq).unwrap();
            let full = diamond_distance(&cp, &cq).unwrap();
            assert!(full.converged(), "gap {}", full.gap());
            assert_abs_diff_eq!(fast, (p - q).abs(), epsilon = 1e-9);
            assert_abs_diff_eq!(full.value(), (p - q).abs(), epsilon = 1e-6);
        }
    }

    #[test]
    fn jammer_ignoring_net_is_singleton() {
        let family = JammerFamily {
            base: scenario::jammer_ignoring_channel(),
            classical_states: None,
        };
        for eta in [0.5, 0.1, 0.01] {
            let net = build_state_net(&family, eta).unwrap();
            assert_eq!(net.len(), 1);
            assert!(net.covering_radius() < 1e-9);
        }
    }

    #[test]
    fn bitflip_net_small_and_covering() {
        let net = build_state_net(&bitflip_continuous(), 0.1).unwrap();
        // farthest-point packing: pairwise distances > η force ≤ 11 points
        // on the p-interval metric
        assert!(net.len() <= 11, "net size {}", net.len());
        assert!(net.covering_radius() <= 0.1 + 1e-6);
        let report = net.report().unwrap();
        assert!(report.log_size <= report.log_cardinality_bound);
    }

    #[test]
    fn cardinality_bound_value() {
        // (10·4/0.1)^(2·4·4) = 400^32 in log space
        let b = cardinality_log_bound(2, 2, 0.1);
        assert_abs_diff_eq!(b, 32.0 * 400f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn refinement_improves_radius() {
        let fam = bitflip_continuous();
        let coarse = build_state_net(&fam, 0.2).unwrap();
        let fine = build_state_net(&fam, 0.1).unwrap();
        assert!(fine.covering_radius() <= coarse.covering_radius() + 1e-12);
        assert!(fine.len() >= coarse.len());
    }

    #[test]
    fn classical_family_net_is_exact() {
        let family = scenario::bitflip_family().unwrap();
        let net = build_state_net(&family, 0.05).unwrap();
        assert_eq!(net.len(), 2);
        assert!(net.covering_radius() < 1e-12);
    }

    #[test]
    fn lifted_gap_zero_radius_net() {
        // net = S exactly: the net-side sup is the true sup over S^ℓ
        let family = scenario::bitflip_family().unwrap();
        let net = build_state_net(&family, 0.05).unwrap();
        let rc = RandomCode::singleton(scenario::repetition_code(2).unwrap());
        let gap = lifted_net_gap(&net, &rc, &family.base, 2, 200, 7).unwrap();
        assert!(gap.net_enumerated);
        // jammer flipping both letters defeats the repetition code
        assert_abs_diff_eq!(gap.sup_net, 1.0, epsilon = 1e-10);
        assert!(gap.sup_sampled <= gap.sup_net + 1e-10);
    }

    #[test]
    fn lifted_gap_bounded_by_lipschitz_slack() {
        let net = build_state_net(&bitflip_continuous(), 0.05).unwrap();
        let rc = RandomCode::singleton(scenario::repetition_code(2).unwrap());
        let gap = lifted_net_gap(&net, &rc, &scenario::bitflip_jammer_channel(), 2, 400, 8)
            .unwrap();
        assert!(gap.sup_sampled <= gap.sup_net + 2.0 * 0.05 + 1e-6);
    }

    #[test]
    fn lifted_gap_vanishes_without_jammer_influence() {
        let family = JammerFamily {
            base: scenario::jammer_ignoring_channel(),
            classical_states: None,
        };
        let net = build_state_net(&family, 0.1).unwrap();
        let rc = RandomCode::singleton(scenario::repetition_code(2).unwrap());
        let gap = lifted_net_gap(&net, &rc, &family.base, 2, 100, 9).unwrap();
        assert!((gap.sup_net - gap.sup_sampled).abs() < 1e-9);
    }

    #[test]
    fn telescoping_fixed_point_on_net_product() {
        let family = scenario::bitflip_family().unwrap();
        let net = build_state_net(&family, 0.05).unwrap();
        let step = ClassicalNetProjection::new(&net).unwrap();
        let sigma = DensityOperator::basis(2, 0)
            .unwrap()
            .tensor(&DensityOperator::basis(2, 1).unwrap())
            .unwrap();
        let (sigma_prime, bounds) = telescope_approx(&sigma, &step, 2).unwrap();
        assert!(bounds.iter().all(|&b| b < 1e-9));
        assert!(qmath::frobenius(&(sigma_prime.matrix() - sigma.matrix())) < 1e-9);
    }

    #[test]
    fn telescoping_bound_certified_by_diamond_oracle() {
        // correlated classical jammer state on J²; the net misses the basis
        // states by construction, so the steps do real work
        let base = scenario::bitflip_jammer_channel();
        let family = JammerFamily {
            base: base.clone(),
            classical_states: Some(vec![bloch_p(0.02), bloch_p(0.97)]),
        };
        let net = build_state_net(&family, 0.05).unwrap();
        let step = ClassicalNetProjection::new(&net).unwrap();
        let b0 = DensityOperator::basis(2, 0).unwrap();
        let b1 = DensityOperator::basis(2, 1).unwrap();
        let sigma = DensityOperator::mix(&[
            (0.5, &b0.tensor(&b0).unwrap()),
            (0.5, &b1.tensor(&b1).unwrap()),
        ])
        .unwrap();
        let (sigma_prime, bounds) = telescope_approx(&sigma, &step, 2).unwrap();
        assert!(bounds.iter().all(|&b| b > 0.0));
        let power = base.tensor_power(2).unwrap();
        let ca = power.fix_jammer(&sigma).unwrap();
        let cb = power.fix_jammer(&sigma_prime).unwrap();
        let d = diamond_distance(&ca, &cb).unwrap();
        let total: f64 = bounds.iter().sum();
        assert!(
            d.value() <= total + 1e-6,
            "measured {} vs bound {}",
            d.value(),
            total
        );
    }

    #[test]
    fn projection_rejects_coherent_letter() {
        let family = scenario::bitflip_family().unwrap();
        let net = build_state_net(&family, 0.05).unwrap();
        let step = ClassicalNetProjection::new(&net).unwrap();
        let plus = qmath::bloch_state(1.0, 0.0, 0.0).unwrap();
        let sigma = plus.tensor(&plus).unwrap();
        assert!(telescope_approx(&sigma, &step, 2).is_err());
    }
}
