//! Pipeline stage implementations: each stage consumes the resolved
//! channel, its parameter map and a derived seed, and yields a JSON result
//! for the run record.

use qavc_core::approx::{build_state_net, telescope_approx, ClassicalNetProjection};
use qavc_core::capacity::{self, OptCfg};
use qavc_core::channel::{diamond_distance, Channel, JammerFamily};
use qavc_core::code::{worst_case_error, RandomCode};
use qavc_core::derand::derandomize;
use qavc_core::qmath::DensityOperator;
use qavc_core::symmetry::{
    compound_error_sup, definetti_penalty_factor, symmetrize_classical,
    verify_covariance_identity, verify_definetti_penalty,
};
use qavc_core::{random, scenario, seed, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

/// Jammer family with the finite classical state set where the scenario
/// declares one; otherwise the full parameterized state space.
pub fn family_for(name: Option<&str>, base: &Channel) -> JammerFamily {
    match name {
        Some("bsc-family") => JammerFamily {
            base: base.clone(),
            classical_states: Some(vec![
                DensityOperator::basis(2, 0).expect("qubit basis"),
                DensityOperator::basis(2, 1).expect("qubit basis"),
            ]),
        },
        _ => JammerFamily {
            base: base.clone(),
            classical_states: None,
        },
    }
}

fn parse_params<T: for<'de> Deserialize<'de>>(raw: Option<&Value>) -> Result<T> {
    let v = raw.cloned().unwrap_or_else(|| json!({}));
    serde_json::from_value(v).map_err(|e| Error::Domain(format!("bad stage params: {e}")))
}

fn per_letter_jdim(base: &Channel) -> usize {
    *base.in_dims().last().expect("channel with input factors")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SymmetrizeParams {
    ell: usize,
    trials: usize,
}

impl Default for SymmetrizeParams {
    fn default() -> Self {
        Self { ell: 3, trials: 10 }
    }
}

pub fn stage_symmetrize(base: &Channel, raw: Option<&Value>, stage_seed: u64) -> Result<Value> {
    let p: SymmetrizeParams = parse_params(raw)?;
    let code = scenario::repetition_code(p.ell)?;
    let sym = symmetrize_classical(&code)?;
    let jdim = per_letter_jdim(base);

    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed);
    let mut max_gap = 0.0f64;
    for _ in 0..p.trials {
        let zeta = random::random_density(jdim.pow(p.ell as u32), &mut rng);
        let (lhs, rhs) = verify_covariance_identity(&code, base, &zeta)?;
        max_gap = max_gap.max((lhs - rhs).abs());
    }

    let grid = capacity::sigma_grid(jdim, 40, seed::derive(stage_seed, &[1]))?;
    let compound = compound_error_sup(&code, base, &grid)?;
    let ghz = scenario::ghz_state(p.ell)?;
    let penalty = verify_definetti_penalty(&sym, base, &ghz, compound, jdim)?;
    let (worst, _) = worst_case_error(&sym, base)?;

    Ok(json!({
        "ell": p.ell,
        "variants": sym.len(),
        "covariance_max_gap": max_gap,
        "covariance_ok": max_gap <= 1e-10,
        "compound_sup": compound,
        "penalty_factor": definetti_penalty_factor(p.ell, jdim),
        "penalty_lhs": penalty.lhs,
        "penalty_bound": penalty.bound,
        "penalty_ok": penalty.ok,
        "worst_case_error": worst,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DerandParams {
    ell: usize,
    delta: f64,
}

impl Default for DerandParams {
    fn default() -> Self {
        Self { ell: 3, delta: 0.1 }
    }
}

pub fn stage_derandomize(base: &Channel, raw: Option<&Value>, stage_seed: u64) -> Result<Value> {
    let p: DerandParams = parse_params(raw)?;
    // Random code: the permutation-symmetrized repetition code and its
    // bit-flip conjugate, flattened into one uniform family.
    let pair = scenario::flip_pair_code(p.ell)?;
    let mut variants = Vec::new();
    for v in pair.variants() {
        for s in symmetrize_classical(v)?.variants() {
            variants.push(s.clone());
        }
    }
    let rc = RandomCode::uniform(variants)?;
    let res = derandomize(&rc, base, p.delta, stage_seed)?;
    let power = base.tensor_power(p.ell)?;
    let (reduced_worst, _) =
        qavc_core::code::worst_case_error_powered(&res.reduced, &power)?;
    Ok(json!({
        "plan": res.plan,
        "attempts": res.attempts,
        "achieved": res.achieved,
        "reduced_worst_case": reduced_worst,
        "reduced_ok": reduced_worst <= res.plan.epsilon + res.plan.delta + 1e-9,
        "chosen": res.chosen,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CapacityParams {
    ell: usize,
    kind: String,
    grid_points: usize,
    restarts: usize,
    perturb_iters: usize,
}

impl Default for CapacityParams {
    fn default() -> Self {
        Self {
            ell: 1,
            kind: "holevo".into(),
            grid_points: 120,
            restarts: 2,
            perturb_iters: 10,
        }
    }
}

pub fn stage_capacity(base: &Channel, raw: Option<&Value>, stage_seed: u64) -> Result<Value> {
    let p: CapacityParams = parse_params(raw)?;
    let cfg = OptCfg {
        grid_points: p.grid_points,
        restarts: p.restarts,
        perturb_iters: p.perturb_iters,
        seed: stage_seed,
    };
    let est = match p.kind.as_str() {
        "holevo" => capacity::estimate_c_rand(base, p.ell, &cfg)?,
        "coherent" => capacity::estimate_q_rand(base, p.ell, &cfg)?,
        other => {
            return Err(Error::Domain(format!(
                "capacity kind '{other}' (expected holevo or coherent)"
            )))
        }
    };
    Ok(json!({ "kind": p.kind, "summary": est.summary }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct NetParams {
    eta: f64,
}

impl Default for NetParams {
    fn default() -> Self {
        Self { eta: 0.1 }
    }
}

pub fn stage_net(
    base: &Channel,
    scenario_name: Option<&str>,
    raw: Option<&Value>,
) -> Result<Value> {
    let p: NetParams = parse_params(raw)?;
    let family = family_for(scenario_name, base);
    let net = build_state_net(&family, p.eta)?;
    let report = net.report()?;
    Ok(serde_json::to_value(report).expect("report serializes"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TelescopeParams {
    eta: f64,
    ell: usize,
}

impl Default for TelescopeParams {
    fn default() -> Self {
        Self { eta: 0.1, ell: 2 }
    }
}

pub fn stage_telescope(
    base: &Channel,
    scenario_name: Option<&str>,
    raw: Option<&Value>,
) -> Result<Value> {
    let p: TelescopeParams = parse_params(raw)?;
    let family = family_for(scenario_name, base);
    // per-letter net radius η/ℓ so the telescoped total stays below η
    let net = build_state_net(&family, p.eta / p.ell as f64)?;
    let step = ClassicalNetProjection::new(&net)?;
    let jdim = per_letter_jdim(base);
    // classically correlated test state: uniform over the all-equal strings
    let parts: Vec<DensityOperator> = (0..jdim)
        .map(|k| {
            let b = DensityOperator::basis(jdim, k)?;
            let mut prod = b.clone();
            for _ in 1..p.ell {
                prod = prod.tensor(&b)?;
            }
            Ok(prod)
        })
        .collect::<Result<Vec<_>>>()?;
    let weighted: Vec<(f64, &DensityOperator)> = parts
        .iter()
        .map(|s| (1.0 / jdim as f64, s))
        .collect();
    let sigma = DensityOperator::mix(&weighted)?;
    let (sigma_prime, bounds) = telescope_approx(&sigma, &step, p.ell)?;
    let total: f64 = bounds.iter().sum();

    let power = base.tensor_power(p.ell)?;
    let measurable = power.in_total() <= 64;
    let mut result = json!({
        "eta": p.eta,
        "ell": p.ell,
        "net_size": net.len(),
        "step_bounds": bounds,
        "total_bound": total,
        "within_eta": total <= p.eta + 1e-12,
    });
    if measurable {
        let ca = power.fix_jammer(&sigma)?;
        let cb = power.fix_jammer(&sigma_prime)?;
        let d = diamond_distance(&ca, &cb)?;
        result["measured_lower"] = json!(d.lower);
        result["measured_upper"] = json!(d.upper);
        result["triangle_ok"] = json!(d.value() <= total + 1e-6);
    }
    Ok(result)
}
