use anyhow::Result;
use cmip_core::desim::CorrectionSession;
use cmip_core::strategy::{evaluate_classical, ClassicalProver};
use cmip_core::{ClassicalStrategy, History, Protocol, SplitMix64};

/// One run of `strategy` with the correction operator of every prover after
/// every round, one line per (prover, round). Uses the same streams of
/// `seed` as `run_once`.
pub fn correction_trace(
    protocol: &Protocol,
    strategy: &ClassicalStrategy,
    seed: u64,
) -> Result<Vec<String>> {
    let mut verifier = SplitMix64::stream(seed, 0);
    let mut provers_rng = SplitMix64::stream(seed, 1);
    let lambda = strategy.shared.sample(&mut provers_rng)?;
    let mut private: Vec<SplitMix64> = (0..strategy.provers.len())
        .map(|_| provers_rng.split())
        .collect();
    let mut sessions: Vec<Option<CorrectionSession>> = strategy
        .provers
        .iter()
        .map(|p| match p {
            ClassicalProver::Correction(prog) => Some(CorrectionSession::new(prog, true)),
            _ => None,
        })
        .collect();

    let mut lines = vec![format!("lambda {lambda}")];
    let mut history = History::new();
    for r in 0..protocol.rounds() {
        let questions = protocol.sample_questions(r, &history, &mut verifier)?;
        let mut answers = Vec::with_capacity(questions.len());
        for (i, q) in questions.iter().enumerate() {
            let (a, correction) = match &mut sessions[i] {
                Some(s) => {
                    let a = s.step(&lambda, q)?;
                    (a, s.correction().to_string())
                }
                None => {
                    let local = history.local_view(i);
                    let a =
                        evaluate_classical(strategy, &lambda, i, r, &local, q, &mut private[i])?;
                    (a, "-".to_string())
                }
            };
            lines.push(format!(
                "prover {i} round {r} question {q} answer {a} R {correction}"
            ));
            answers.push(a);
        }
        history.push(questions, answers);
    }
    let accept = protocol.accepts(&history)?;
    lines.push(format!(
        "history {history} {}",
        if accept { "accept" } else { "reject" }
    ));
    Ok(lines)
}
