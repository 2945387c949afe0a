//! Built-in channels, codes and jammer states used by the CLI pipelines
//! and the verification suites.

use crate::channel::{embed_classical_avc, Channel, JammerFamily};
use crate::code::{ClassicalCode, QuantumCode, RandomCode};
use crate::error::{Error, Result};
use crate::qmath::{c, identity, CMatrix, CVector, DensityOperator, PovmElement};

/// Scenario names exposed by the CLI, lexicographically ordered.
pub fn scenario_names() -> Vec<&'static str> {
    vec![
        "bitflip-jammer",
        "bsc-family",
        "dephasing-jammer",
        "depolarizing",
        "ghz-jammer-test",
        "jammer-ignoring",
    ]
}

pub fn channel_for(name: &str) -> Result<Channel> {
    match name {
        "bitflip-jammer" | "ghz-jammer-test" => Ok(bitflip_jammer_channel()),
        "bsc-family" => Ok(bsc_family_channel(&[0.1, 0.2])),
        "dephasing-jammer" => Ok(dephasing_jammer_channel()),
        "depolarizing" => depolarizing_channel(),
        "jammer-ignoring" => Ok(jammer_ignoring_channel()),
        other => Err(Error::Domain(format!("unknown scenario '{other}'"))),
    }
}

/// CNOT with control J and target A, then discard J: the jammer's |1⟩
/// weight is the probability of a bit flip on A.
pub fn bitflip_jammer_channel() -> Channel {
    // K_j = (1_A ⊗ ⟨j|) CNOT, input index a*2 + j
    let mut k0 = CMatrix::zeros(2, 4);
    k0[(0, 0)] = c(1.0, 0.0);
    k0[(1, 2)] = c(1.0, 0.0);
    let mut k1 = CMatrix::zeros(2, 4);
    k1[(1, 1)] = c(1.0, 0.0);
    k1[(0, 3)] = c(1.0, 0.0);
    Channel::new(vec![2, 2], vec![2], vec![k0, k1]).expect("valid Kraus set")
}

/// Identity on A, jammer input discarded.
pub fn jammer_ignoring_channel() -> Channel {
    let mut k0 = CMatrix::zeros(2, 4);
    k0[(0, 0)] = c(1.0, 0.0);
    k0[(1, 2)] = c(1.0, 0.0);
    let mut k1 = CMatrix::zeros(2, 4);
    k1[(0, 1)] = c(1.0, 0.0);
    k1[(1, 3)] = c(1.0, 0.0);
    Channel::new(vec![2, 2], vec![2], vec![k0, k1]).expect("valid Kraus set")
}

/// Controlled-Z with control J, then discard J: the jammer's |1⟩ weight
/// is the probability of a phase flip on A.
pub fn dephasing_jammer_channel() -> Channel {
    let mut k0 = CMatrix::zeros(2, 4);
    k0[(0, 0)] = c(1.0, 0.0);
    k0[(1, 2)] = c(1.0, 0.0);
    let mut k1 = CMatrix::zeros(2, 4);
    k1[(0, 1)] = c(1.0, 0.0);
    k1[(1, 3)] = c(-1.0, 0.0);
    Channel::new(vec![2, 2], vec![2], vec![k0, k1]).expect("valid Kraus set")
}

/// Embedded classical binary symmetric channel family with jammer-selected
/// crossover probabilities.
pub fn bsc_family_channel(crossovers: &[f64]) -> Channel {
    let w: Vec<Vec<Vec<f64>>> = crossovers
        .iter()
        .map(|&p| vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
        .collect();
    embed_classical_avc(&w).expect("stochastic by construction")
}

/// Output fixed to the maximally mixed state; both inputs discarded.
pub fn depolarizing_channel() -> Result<Channel> {
    Channel::constant(vec![2, 2], &DensityOperator::maximally_mixed(2)?)
}

/// Jammer family with the classical state set {|0⟩⟨0|, |1⟩⟨1|} on J.
pub fn bitflip_family() -> Result<JammerFamily> {
    Ok(JammerFamily {
        base: bitflip_jammer_channel(),
        classical_states: Some(vec![
            DensityOperator::basis(2, 0)?,
            DensityOperator::basis(2, 1)?,
        ]),
    })
}

/// GHZ-type state (|0..0⟩ + |1..1⟩)/√2 on ℓ qubits.
pub fn ghz_state(ell: usize) -> Result<DensityOperator> {
    let dim = 1usize << ell;
    let mut v = CVector::zeros(dim);
    let amp = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[0] = amp;
    v[dim - 1] = amp;
    DensityOperator::pure(&v)
}

/// Basis code at block length 1: messages |0⟩, |1⟩ with the computational
/// basis measurement.
pub fn basis_code() -> Result<ClassicalCode> {
    let states = vec![DensityOperator::basis(2, 0)?, DensityOperator::basis(2, 1)?];
    let povm = vec![
        PovmElement::new(DensityOperator::basis(2, 0)?.matrix().clone())?,
        PovmElement::new(DensityOperator::basis(2, 1)?.matrix().clone())?,
    ];
    ClassicalCode::new(1, states, povm)
}

/// Repetition code on ℓ qubits: codewords |0..0⟩, |1..1⟩ with majority
/// vote decoding (ties broken toward message 1).
pub fn repetition_code(ell: usize) -> Result<ClassicalCode> {
    let dim = 1usize << ell;
    let states = vec![
        DensityOperator::basis(dim, 0)?,
        DensityOperator::basis(dim, dim - 1)?,
    ];
    let mut d0 = CMatrix::zeros(dim, dim);
    let mut d1 = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        let ones = (b as u32).count_ones() as usize;
        if 2 * ones < ell {
            d0[(b, b)] = c(1.0, 0.0);
        } else {
            d1[(b, b)] = c(1.0, 0.0);
        }
    }
    let povm = vec![PovmElement::new(d0)?, PovmElement::new(d1)?];
    ClassicalCode::new(ell, states, povm)
}

/// Repetition code paired with the variant that keeps its codewords but
/// swaps the decoder's message assignment, as a uniform two-variant random
/// code. The two variants' error observables sum to the identity on every
/// jammer input, so the family's average error observable is exactly 1/2
/// of the identity and its worst-case error is 1/2 — strictly below the
/// error 1 that either deterministic variant suffers against its worst
/// flip pattern.
pub fn flip_pair_code(ell: usize) -> Result<RandomCode<ClassicalCode>> {
    let rep = repetition_code(ell)?;
    let swapped = ClassicalCode::new(
        ell,
        rep.states().to_vec(),
        vec![rep.povm()[1].clone(), rep.povm()[0].clone()],
    )?;
    RandomCode::uniform(vec![rep, swapped])
}

/// Trivial quantum code at block length ℓ on qubits: identity encoder into
/// the first ℓ-qubit register and identity decoder (L = 2^ℓ).
pub fn identity_quantum_code(ell: usize) -> Result<QuantumCode> {
    let dim = 1usize << ell;
    let enc = Channel::new(
        vec![dim],
        vec![2; ell],
        vec![identity(dim)],
    )?;
    let dec = Channel::new(vec![2; ell], vec![dim], vec![identity(dim)])?;
    QuantumCode::new(ell, dim, enc, dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::worst_case_error;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scenario_names_sorted_and_resolvable() {
        let names = scenario_names();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        assert_eq!(names, sorted);
        for n in names {
            channel_for(n).unwrap();
        }
        assert!(channel_for("no-such-scenario").is_err());
    }

    #[test]
    fn flip_pair_halves_worst_case() {
        let base = bitflip_jammer_channel();
        let rc = flip_pair_code(3).unwrap();
        let (eps, _) = worst_case_error(&rc, &base).unwrap();
        assert_abs_diff_eq!(eps, 0.5, epsilon = 1e-10);
        // either variant alone is defeated by the all-flip jammer
        let single = crate::code::RandomCode::singleton(repetition_code(3).unwrap());
        let (eps1, _) = worst_case_error(&single, &base).unwrap();
        assert_abs_diff_eq!(eps1, 1.0, epsilon = 1e-10);
    }
}
