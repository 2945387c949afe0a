//! Verification suites: seeded re-checks of the library's executable
//! identities and inequalities, with one verdict per check and a numeric
//! record that is byte-identical across runs with the same seed.

use qavc_core::approx::{build_state_net, telescope_approx, ClassicalNetProjection};
use qavc_core::capacity::{
    binary_entropy, blahut_arimoto, classical_avc_oracle, coherent_info, estimate_c_rand,
    OptCfg, PureInput,
};
use qavc_core::channel::{diamond_distance, Channel, JammerFamily};
use qavc_core::code::{worst_case_error, RandomCode};
use qavc_core::derand::{bin_rel_entropy, derandomize, sample_size};
use qavc_core::qmath::{self, DensityOperator};
use qavc_core::symmetry::{
    compound_error_sup, definetti_penalty_factor, symmetrize_classical,
    verify_covariance_identity, verify_definetti_penalty,
};
use qavc_core::{capacity, random, scenario, seed, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub suite: String,
    pub check: String,
    pub ok: bool,
    pub details: serde_json::Value,
}

impl Verdict {
    fn new(suite: &str, check: &str, ok: bool, details: serde_json::Value) -> Self {
        Self {
            suite: suite.into(),
            check: check.into(),
            ok,
            details,
        }
    }
}

pub const SUITES: [&str; 4] = ["approx", "capacity", "derand", "symmetry"];

pub fn run_suite(name: &str, root_seed: u64) -> Result<Vec<Verdict>> {
    match name {
        "symmetry" => suite_symmetry(seed::derive(root_seed, &[1])),
        "derand" => suite_derand(seed::derive(root_seed, &[2])),
        "capacity" => suite_capacity(seed::derive(root_seed, &[3])),
        "approx" => suite_approx(seed::derive(root_seed, &[4])),
        "all" => {
            let mut all = Vec::new();
            for s in SUITES {
                all.extend(run_suite(s, root_seed)?);
            }
            Ok(all)
        }
        other => Err(qavc_core::Error::Domain(format!(
            "unknown suite '{other}' (expected one of {SUITES:?} or all)"
        ))),
    }
}

fn suite_symmetry(s: u64) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(s);

    // covariance identity on random channels and jammer states
    let mut max_gap = 0.0f64;
    for ell in [2usize, 3] {
        let base = random::random_channel(&[2, 2], &[2], 2, &mut rng);
        let code = scenario::repetition_code(ell)?;
        for _ in 0..5 {
            let zeta = random::random_density(1 << ell, &mut rng);
            let (lhs, rhs) = verify_covariance_identity(&code, &base, &zeta)?;
            max_gap = max_gap.max((lhs - rhs).abs());
        }
        let ghz = scenario::ghz_state(ell)?;
        let (lhs, rhs) = verify_covariance_identity(&code, &base, &ghz)?;
        max_gap = max_gap.max((lhs - rhs).abs());
    }
    out.push(Verdict::new(
        "symmetry",
        "covariance-identity",
        max_gap <= 1e-10,
        json!({ "max_gap": max_gap, "tolerance": 1e-10 }),
    ));

    out.push(Verdict::new(
        "symmetry",
        "penalty-factor-arithmetic",
        (definetti_penalty_factor(3, 2) - 256.0).abs() < 1e-12
            && (definetti_penalty_factor(2, 2) - 81.0).abs() < 1e-12,
        json!({ "factor_ell3": definetti_penalty_factor(3, 2),
                "factor_ell2": definetti_penalty_factor(2, 2) }),
    ));

    let base = scenario::bitflip_jammer_channel();
    let code = scenario::repetition_code(3)?;
    let grid = capacity::sigma_grid(2, 40, seed::derive(s, &[1]))?;
    let compound = compound_error_sup(&code, &base, &grid)?;
    let sym = symmetrize_classical(&code)?;
    let ghz = scenario::ghz_state(3)?;
    let check = verify_definetti_penalty(&sym, &base, &ghz, compound, 2)?;
    out.push(Verdict::new(
        "symmetry",
        "definetti-penalty",
        check.ok,
        json!({ "lhs": check.lhs, "bound": check.bound }),
    ));
    Ok(out)
}

fn suite_derand(s: u64) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();

    let mut pinsker_ok = true;
    let mut worst_margin = f64::INFINITY;
    for i in 1..100 {
        for j in 1..100 {
            let (u, v) = (i as f64 / 100.0, j as f64 / 100.0);
            let margin = bin_rel_entropy(u, v)? - 2.0 * (u - v) * (u - v);
            worst_margin = worst_margin.min(margin);
            pinsker_ok &= margin >= -1e-12;
        }
    }
    out.push(Verdict::new(
        "derand",
        "pinsker-grid",
        pinsker_ok,
        json!({ "worst_margin": worst_margin }),
    ));

    let d = bin_rel_entropy(0.15, 0.1)?;
    out.push(Verdict::new(
        "derand",
        "rel-entropy-reference",
        (d - 0.0122351).abs() <= 1e-6,
        json!({ "value_nats": d, "reference": 0.0122351 }),
    ));

    let (n_pinsker, n_exact) = sample_size(0.05, 0.1, 2, 4)?;
    out.push(Verdict::new(
        "derand",
        "sample-size-reference",
        n_pinsker == 139 && n_exact == 40,
        json!({ "n_pinsker": n_pinsker, "n_exact": n_exact }),
    ));

    let base = scenario::bitflip_jammer_channel();
    let rc = scenario::flip_pair_code(3)?;
    let res = derandomize(&rc, &base, 0.1, seed::derive(s, &[1]))?;
    let shared_bound = (res.plan.ell as f64).log2() - 2.0 * res.plan.delta.log2()
        + (res.plan.jdim as f64).ln().log2()
        + 1.0;
    out.push(Verdict::new(
        "derand",
        "sampling-reduction",
        res.achieved <= res.plan.epsilon + res.plan.delta + 1e-9
            && res.plan.shared_bits <= shared_bound,
        json!({ "plan": res.plan, "achieved": res.achieved, "attempts": res.attempts,
                "shared_bits_bound": shared_bound }),
    ));
    Ok(out)
}

fn suite_capacity(s: u64) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();

    let w = vec![
        vec![vec![0.9, 0.1], vec![0.1, 0.9]],
        vec![vec![0.8, 0.2], vec![0.2, 0.8]],
    ];
    let oracle = classical_avc_oracle(&w)?;
    let reference = 1.0 - binary_entropy(0.2);
    let base = scenario::bsc_family_channel(&[0.1, 0.2]);
    let cfg = OptCfg {
        grid_points: 120,
        restarts: 2,
        perturb_iters: 10,
        seed: seed::derive(s, &[1]),
    };
    let est = estimate_c_rand(&base, 1, &cfg)?;
    out.push(Verdict::new(
        "capacity",
        "bsc-family-cross-check",
        (est.summary.value_bits_per_use - oracle).abs() <= 2e-3
            && (oracle - reference).abs() <= 1e-4,
        json!({ "estimate_bits": est.summary.value_bits_per_use, "oracle_bits": oracle,
                "reference_bits": reference, "grid_gap": est.summary.grid_gap }),
    ));

    let id = scenario::jammer_ignoring_channel();
    let est_id = estimate_c_rand(&id, 1, &cfg)?;
    out.push(Verdict::new(
        "capacity",
        "identity-channel",
        (est_id.summary.value_bits_per_use - 1.0).abs() <= 1e-3,
        json!({ "estimate_bits": est_id.summary.value_bits_per_use }),
    ));

    let phi = PureInput::new(qmath::max_entangled_ket(2)?, 2)?;
    let ci = coherent_info(&phi, &Channel::identity_channel(vec![2]))?;
    out.push(Verdict::new(
        "capacity",
        "coherent-info-identity",
        (ci - 1.0).abs() <= 1e-9,
        json!({ "value_bits": ci }),
    ));

    let single = blahut_arimoto(&[vec![0.9, 0.1], vec![0.1, 0.9]], 1e-10, 2000);
    out.push(Verdict::new(
        "capacity",
        "blahut-arimoto-bsc",
        (single - (1.0 - binary_entropy(0.1))).abs() <= 1e-5,
        json!({ "value_bits": single }),
    ));
    Ok(out)
}

fn suite_approx(s: u64) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    let family = JammerFamily {
        base: scenario::bitflip_jammer_channel(),
        classical_states: None,
    };
    let net = build_state_net(&family, 0.1)?;
    let report = net.report()?;
    out.push(Verdict::new(
        "approx",
        "net-covering",
        report.covering_radius <= 0.1 + 1e-6 && report.log_size <= report.log_cardinality_bound,
        json!({ "size": report.size, "covering_radius": report.covering_radius,
                "log_size": report.log_size,
                "log_cardinality_bound": report.log_cardinality_bound }),
    ));

    let step = ClassicalNetProjection::new(&net)?;
    let b0 = DensityOperator::basis(2, 0)?;
    let b1 = DensityOperator::basis(2, 1)?;
    let sigma = DensityOperator::mix(&[
        (0.5, &b0.tensor(&b0)?),
        (0.5, &b1.tensor(&b1)?),
    ])?;
    let (sigma_prime, bounds) = telescope_approx(&sigma, &step, 2)?;
    let total: f64 = bounds.iter().sum();
    let power = family.base.tensor_power(2)?;
    let d = diamond_distance(&power.fix_jammer(&sigma)?, &power.fix_jammer(&sigma_prime)?)?;
    out.push(Verdict::new(
        "approx",
        "telescoping-triangle",
        d.value() <= total + 1e-6,
        json!({ "measured_lower": d.lower, "measured_upper": d.upper,
                "sum_of_step_bounds": total, "step_bounds": bounds }),
    ));

    // the worst-case error over the lifted net dominates sampled tuples up
    // to the per-letter slack
    let rc = RandomCode::singleton(scenario::repetition_code(2)?);
    let gap = qavc_core::approx::lifted_net_gap(
        &net,
        &rc,
        &family.base,
        2,
        200,
        seed::derive(s, &[1]),
    )?;
    out.push(Verdict::new(
        "approx",
        "lifted-net-gap",
        gap.sup_sampled <= gap.sup_net + 2.0 * 0.1 + 1e-6,
        json!({ "sup_net": gap.sup_net, "sup_sampled": gap.sup_sampled,
                "net_enumerated": gap.net_enumerated }),
    ));

    let (eps, _) = worst_case_error(&rc, &family.base)?;
    out.push(Verdict::new(
        "approx",
        "worst-case-dominates-net",
        gap.sup_net <= eps + 1e-9,
        json!({ "worst_case": eps, "sup_net": gap.sup_net }),
    ));
    Ok(out)
}
