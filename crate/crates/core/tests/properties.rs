use std::collections::BTreeMap;

use proptest::prelude::*;

use cmip_core::dense::DEFAULT_QUBIT_CAP;
use cmip_core::desim::{
    correct_answer, correction_update, declifford_with, DesimOptions, LambdaForm,
};
use cmip_core::exec::{fixed_question_distribution, ExecConfig};
use cmip_core::random::{
    random_bits, random_clifford_circuit, random_clifford_strategy, random_hermitian_pauli,
    random_pauli, random_protocol, ProtocolShape, StrategyShape,
};
use cmip_core::strategy::validate_model;
use cmip_core::{
    BitString, DenseMatrix, PauliOperator, Protocol, QuantumStrategy, SplitMix64, Strategy,
};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 128,
        ..ProptestConfig::default()
    }
}

fn shapes(seed: u64) -> (ProtocolShape, StrategyShape) {
    (
        ProtocolShape {
            provers: 1 + (seed % 3) as usize,
            rounds: 1 + (seed / 3 % 2) as usize,
            max_question: 1 + (seed % 3 != 2) as usize,
            max_answer: 2,
            max_view: 2,
        },
        StrategyShape {
            max_share: 2,
            max_gates: 15,
            dense: seed.is_multiple_of(5),
            postprocessing: seed.is_multiple_of(4),
            qubit_budget: 10,
        },
    )
}

/// A random Clifford instance, or `None` when it exceeds the dense cap.
fn instance(
    pshape: &ProtocolShape,
    sshape: &StrategyShape,
    rng: &mut SplitMix64,
) -> Option<(Protocol, QuantumStrategy)> {
    let p = random_protocol(pshape, rng).unwrap();
    let s = random_clifford_strategy(&p, sshape, rng).unwrap();
    (validate_model(&s, &p).unwrap().total_qubits() <= DEFAULT_QUBIT_CAP).then_some((p, s))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pauli_product_is_associative_and_matches_dense(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = SplitMix64::new(seed);
        let (a, b, c) = (random_pauli(n, &mut rng), random_pauli(n, &mut rng), random_pauli(n, &mut rng));
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        let dense = DenseMatrix::of_pauli(&a).unwrap().mul(&DenseMatrix::of_pauli(&b).unwrap());
        prop_assert!(dense.max_diff(&DenseMatrix::of_pauli(&a.mul(&b).unwrap()).unwrap()) < 1e-15);
    }

    #[test]
    fn hermitian_paulis_square_to_identity(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = SplitMix64::new(seed);
        let p = random_hermitian_pauli(n, &mut rng);
        prop_assert!(p.is_hermitian());
        prop_assert_eq!(p.mul(&p).unwrap(), PauliOperator::identity(n));
        let m = DenseMatrix::of_pauli(&p).unwrap();
        prop_assert!(m.max_diff(&m.adjoint()) < 1e-15);
    }

    #[test]
    fn conjugation_matches_dense(seed in any::<u64>(), n in 1usize..5, len in 0usize..50) {
        let mut rng = SplitMix64::new(seed);
        let u = random_clifford_circuit(n, len, &mut rng);
        let p = random_pauli(n, &mut rng);
        let image = u.conjugate(&p).unwrap();
        let um = DenseMatrix::of_circuit(&u).unwrap();
        let lhs = um.mul(&DenseMatrix::of_pauli(&p).unwrap()).mul(&um.adjoint());
        prop_assert!(lhs.max_diff(&DenseMatrix::of_pauli(&image).unwrap()) < 1e-12);
        prop_assert_eq!(image.is_hermitian(), p.is_hermitian());
    }

    #[test]
    fn tableau_matches_replay(seed in any::<u64>(), n in 1usize..8, len in 0usize..80) {
        let mut rng = SplitMix64::new(seed);
        let u = random_clifford_circuit(n, len, &mut rng);
        let t = u.compile_tableau();
        prop_assert!(t.is_symplectic());
        for _ in 0..4 {
            let p = random_pauli(n, &mut rng);
            prop_assert_eq!(t.conjugate(&p).unwrap(), u.conjugate(&p).unwrap());
        }
    }

    #[test]
    fn corrections_stay_hermitian(seed in any::<u64>(), n in 1usize..6, len in 0usize..40) {
        let mut rng = SplitMix64::new(seed);
        let u = random_clifford_circuit(n, len, &mut rng);
        let s = rng.below(n as u64 + 1) as usize;
        let prev = random_hermitian_pauli(n - s, &mut rng);
        let (q, qt) = (random_bits(s, &mut rng), random_bits(s, &mut rng));
        let r = correction_update(&u, &q, &qt, &prev).unwrap();
        prop_assert!(r.is_hermitian());
        if q == qt && prev.is_identity() {
            prop_assert!(r.is_identity());
        }
    }

    /// The corrected string is what the measured qubits read after `R`
    /// moves any basis state consistent with `a`.
    #[test]
    fn projector_correction_follows_basis_states(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = SplitMix64::new(seed);
        let r = random_pauli(n, &mut rng);
        let b = random_bits(n, &mut rng);
        let m = 1 + rng.below(n as u64) as usize;
        let mut measured: Vec<usize> = (0..n).collect();
        for j in 0..m {
            measured.swap(j, j + rng.below((n - j) as u64) as usize);
        }
        measured.truncate(m);
        let a = b.select(&measured);
        let corrected = correct_answer(&r, &a, &measured).unwrap();
        let (_, moved) = r.apply_to_basis(&b).unwrap();
        prop_assert_eq!(&corrected, &moved.select(&measured));
        // Correcting twice undoes the correction.
        prop_assert_eq!(correct_answer(&r, &corrected, &measured).unwrap(), a);
    }

    #[test]
    fn strategies_round_trip_through_json(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let (pshape, sshape) = shapes(seed);
        let inst = instance(&pshape, &sshape, &mut rng);
        prop_assume!(inst.is_some());
        let (p, q) = inst.unwrap();
        let s = Strategy::Quantum(q.clone());
        prop_assert_eq!(Strategy::from_json(&s.to_json()).unwrap(), s);
        let opts = DesimOptions { lambda: LambdaForm::Table, ..DesimOptions::default() };
        let c = Strategy::Classical(declifford_with(&q, &p, &opts).unwrap().strategy);
        prop_assert_eq!(Strategy::from_json(&c.to_json()).unwrap(), c);
    }

    /// Changing the other provers' questions leaves a prover's answer
    /// marginal unchanged.
    #[test]
    fn answer_marginals_are_local(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let (mut pshape, sshape) = shapes(seed);
        pshape.provers = 2 + (seed % 2) as usize;
        let inst = instance(&pshape, &sshape, &mut rng);
        prop_assume!(inst.is_some());
        let (p, s) = inst.unwrap();
        let i = rng.below(p.provers() as u64) as usize;
        let questions = |rng: &mut SplitMix64| -> Vec<Vec<BitString>> {
            (0..p.rounds()).map(|r| (0..p.provers()).map(|j| random_bits(p.question_width(r, j), rng)).collect()).collect()
        };
        let q = questions(&mut rng);
        let mut q2 = questions(&mut rng);
        for r in 0..p.rounds() {
            q2[r][i] = q[r][i].clone();
        }
        let cfg = ExecConfig::default();
        let marginal = |qs: &[Vec<BitString>]| -> BTreeMap<Vec<BitString>, f64> {
            let mut out = BTreeMap::new();
            for (answers, w) in fixed_question_distribution(&s, qs, &cfg).unwrap() {
                let mine: Vec<BitString> = answers.iter().map(|a| a[i].clone()).collect();
                *out.entry(mine).or_insert(0.0) += w;
            }
            out
        };
        prop_assert!(cmip_core::tv_distance(&marginal(&q), &marginal(&q2)) < 1e-12);
    }
}
