use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cmip_core::desim::{declifford_with, DesimOptions, Hardcoded, LambdaForm};
use cmip_core::distribution::{chi_square, chi_square_homogeneity, game_value};
use cmip_core::exec::{exact_history_distribution, run_shots, Distribution};
use cmip_core::random::{random_clifford_circuit, random_pauli};
use cmip_core::strategy::SharedRandomness;
use cmip_core::{
    declifford_mostly, games, tv_distance, BitString, Error, ExecConfig, History, Protocol,
    SplitMix64, Strategy,
};
use serde::Serialize;

use crate::inputs;
use crate::report::{RunReport, Verdict};
use crate::trace::correction_trace;
use crate::{BenchArgs, DecliffordArgs, ExecArgs, Lambda, RunArgs, VerifyArgs};

fn exact(protocol: &Protocol, strategy: &Strategy, cfg: &ExecConfig) -> Result<Distribution> {
    exact_history_distribution(protocol, strategy, cfg).map_err(|e| match e {
        Error::CapExceeded { needed, cap } => anyhow::anyhow!(
            "exact enumeration needs {needed} qubits but the dense cap is {cap}; sample with --shots N or raise --cap"
        ),
        e => e.into(),
    })
}

fn runs_label(exec: &ExecArgs) -> Result<String> {
    match (exec.exact, exec.shots) {
        (true, _) => Ok("exact".into()),
        (false, Some(n)) if n > 0 => Ok(n.to_string()),
        (false, Some(_)) => bail!("--shots must be positive"),
        (false, None) => bail!("choose --exact or --shots N"),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn finish(mut report: RunReport, timing: bool, out: Option<&Path>, start: Instant) -> Result<bool> {
    if timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    print!("{}", report.render());
    if let Some(path) = out {
        write_file(path, &(report.to_json() + "\n"))?;
    }
    Ok(report.verdict == Verdict::Pass)
}

fn frequencies(counts: &BTreeMap<History, u64>) -> BTreeMap<History, f64> {
    let n: u64 = counts.values().sum();
    counts
        .iter()
        .map(|(h, c)| (h.clone(), *c as f64 / n as f64))
        .collect()
}

pub fn run(a: &RunArgs) -> Result<bool> {
    let start = Instant::now();
    let game = inputs::game(a.game.game.as_deref(), a.game.protocol.as_deref())?;
    let s = inputs::strategy(&a.strategy, &game)?;
    let cfg = a.exec.config();
    let mut report = RunReport::new("run", &game.id, &s.id, a.exec.seed, runs_label(&a.exec)?);
    report.expected = s.expected.value;
    report.at_most = s.expected.at_most;
    let mut ok = true;
    match a.exec.shots.filter(|_| !a.exec.exact) {
        None => {
            let d = exact(&game.protocol, &s.strategy, &cfg)?;
            let v = game_value(&game.protocol, &d)?;
            report.value = Some(v);
            if let Some(e) = s.expected.value {
                ok &= (v - e).abs() <= 1e-6;
            }
            if let Some(m) = s.expected.at_most {
                ok &= v <= m + 1e-9;
            }
        }
        Some(n) => {
            let counts = run_shots(&game.protocol, &s.strategy, a.exec.seed, n, &cfg)?;
            let mut wins = 0;
            for (h, c) in &counts {
                if game.protocol.accepts(h)? {
                    wins += c;
                }
            }
            let rate = wins as f64 / n as f64;
            let se = (rate * (1.0 - rate) / n as f64).sqrt();
            report.win_rate = Some(rate);
            report.std_error = Some(se);
            match exact_history_distribution(&game.protocol, &s.strategy, &cfg) {
                Ok(d) => report.chi_square = Some(chi_square(&counts, &d).into()),
                Err(e) => report.notes.push(format!("no goodness-of-fit test: {e}")),
            }
            if let Some(e) = s.expected.value {
                ok &= (rate - e).abs() <= (4.0 * se).max(1e-9);
            }
        }
    }
    report.verdict = Verdict::of(ok);
    finish(report, a.exec.timing, a.exec.out.as_deref(), start)
}

/// `0,1;10,01` → rounds of per-prover questions.
fn parse_hardcoded(text: &str) -> Result<Vec<Vec<BitString>>> {
    text.split(';')
        .map(|round| {
            round
                .split(',')
                .map(|q| {
                    q.trim()
                        .parse::<BitString>()
                        .with_context(|| format!("bad question {q:?}"))
                })
                .collect()
        })
        .collect()
}

pub fn declifford(a: &DecliffordArgs) -> Result<bool> {
    let start = Instant::now();
    let game = inputs::game(a.game.game.as_deref(), a.game.protocol.as_deref())?;
    let s = inputs::strategy(&a.strategy, &game)?;
    let Strategy::Quantum(q) = &s.strategy else {
        bail!("{} is already a classical strategy", s.id);
    };
    let hardcoded = match &a.hardcoded_q {
        Some(text) => Hardcoded::Protocol(parse_hardcoded(text)?),
        None => Hardcoded::Zeros,
    };
    let mut report = RunReport::new("declifford", &game.id, &s.id, a.seed, "exact".into());
    let classical = if a.mostly {
        report.notes.push(
            "at most one prover outside the Clifford model; shared randomness as a table".into(),
        );
        declifford_mostly(q, &game.protocol, &hardcoded)?
    } else {
        let opts = DesimOptions {
            hardcoded,
            lambda: match a.lambda {
                Lambda::Precomputed => LambdaForm::Precomputed,
                Lambda::Table => LambdaForm::Table,
            },
        };
        let d = declifford_with(q, &game.protocol, &opts)?;
        if !d.delegated.is_trivial() {
            report.notes.push(format!(
                "post-processing delegated: {} rounds become {} sub-rounds",
                game.protocol.rounds(),
                d.delegated.protocol.rounds()
            ));
        }
        d.strategy
    };
    let out = Strategy::Classical(classical.clone());
    if a.out.is_none() && !a.check && !a.trace {
        println!("{}", out.to_json());
        return Ok(true);
    }
    report.notes.push(match &classical.shared {
        SharedRandomness::Table(rows) => format!("shared randomness: table of {} rows", rows.len()),
        SharedRandomness::Precomputed(p) => format!(
            "shared randomness: precomputed interaction over {} sub-rounds",
            p.questions.len()
        ),
    });
    if let Some(path) = &a.out {
        write_file(path, &(out.to_json() + "\n"))?;
        report
            .notes
            .push(format!("classical strategy written to {}", path.display()));
    }
    if a.check {
        let cfg = ExecConfig::default();
        let tv = tv_distance(
            &exact(&game.protocol, &s.strategy, &cfg)?,
            &exact(&game.protocol, &out, &cfg)?,
        );
        report.tv = Some(tv);
        report.verdict = Verdict::of(tv <= 1e-9);
    }
    if a.trace {
        report.trace = correction_trace(&game.protocol, &classical, a.seed)?;
    }
    finish(report, a.timing, None, start)
}

pub fn verify(a: &VerifyArgs) -> Result<bool> {
    let start = Instant::now();
    let game = inputs::game(a.game.game.as_deref(), a.game.protocol.as_deref())?;
    let s = inputs::strategy(&a.strategy, &game)?;
    let t = inputs::strategy(&a.against, &game)?;
    let cfg = a.exec.config();
    let mut report = RunReport::new("verify", &game.id, &s.id, a.exec.seed, runs_label(&a.exec)?);
    report.against = Some(t.id.clone());
    match a.exec.shots.filter(|_| !a.exec.exact) {
        None => {
            let tv = tv_distance(
                &exact(&game.protocol, &s.strategy, &cfg)?,
                &exact(&game.protocol, &t.strategy, &cfg)?,
            );
            report.tv = Some(tv);
            report.verdict = Verdict::of(tv <= a.tolerance);
        }
        Some(n) => {
            let first = run_shots(&game.protocol, &s.strategy, a.exec.seed, n, &cfg)?;
            let second_seed = SplitMix64::stream(a.exec.seed, 2).next_u64();
            let second = run_shots(&game.protocol, &t.strategy, second_seed, n, &cfg)?;
            report.tv = Some(tv_distance(&frequencies(&first), &frequencies(&second)));
            let chi = chi_square_homogeneity(&first, &second);
            report.verdict = Verdict::of(chi.p_value > a.alpha);
            report.chi_square = Some(chi.into());
            report
                .notes
                .push("tv is between empirical distributions".into());
        }
    }
    finish(report, a.exec.timing, a.exec.out.as_deref(), start)
}

#[derive(Serialize)]
struct Timing {
    gates: usize,
    seconds: f64,
    ns_per_gate: f64,
}

#[derive(Serialize)]
struct BenchReport {
    command: &'static str,
    qubits: usize,
    gates: usize,
    reps: usize,
    seed: u64,
    replay: Vec<Timing>,
    /// Largest over smallest per-gate time across the replay lengths.
    scaling_spread: f64,
    tableau_compile_seconds: f64,
    tableau_conjugate_seconds: f64,
    tableau_matches_replay: bool,
    verdict: Verdict,
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let v = std::hint::black_box(f());
        best = best.min(start.elapsed().as_secs_f64());
        out = Some(v);
    }
    (out.expect("at least one repetition"), best)
}

pub fn bench(a: &BenchArgs) -> Result<bool> {
    if a.qubits < 2 || a.gates < 4 {
        bail!("need at least 2 qubits and 4 gates");
    }
    let mut rng = SplitMix64::new(a.seed);
    let full = random_clifford_circuit(a.qubits, a.gates, &mut rng);
    let p = random_pauli(a.qubits, &mut rng);
    let mut replay = Vec::new();
    let mut last = None;
    for len in [a.gates / 4, a.gates / 2, a.gates] {
        let u = cmip_core::CliffordCircuit::new(a.qubits, full.gates()[..len].to_vec())?;
        let (image, seconds) = best_of(a.reps, || u.conjugate(&p));
        last = Some(image?);
        replay.push(Timing {
            gates: len,
            seconds,
            ns_per_gate: seconds * 1e9 / len as f64,
        });
    }
    let (tableau, compile) = best_of(1, || full.compile_tableau());
    let (via_tableau, conjugate) = best_of(a.reps, || tableau.conjugate(&p));
    let agree = via_tableau? == last.expect("three lengths timed");
    let per_gate: Vec<f64> = replay.iter().map(|t| t.ns_per_gate).collect();
    let spread = per_gate.iter().copied().fold(0.0, f64::max)
        / per_gate.iter().copied().fold(f64::INFINITY, f64::min);
    let report = BenchReport {
        command: "bench",
        qubits: a.qubits,
        gates: a.gates,
        reps: a.reps,
        seed: a.seed,
        replay,
        scaling_spread: spread,
        tableau_compile_seconds: compile,
        tableau_conjugate_seconds: conjugate,
        tableau_matches_replay: agree,
        verdict: Verdict::of(agree),
    };
    for t in &report.replay {
        println!(
            "replay      {:>9} gates  {:.4}s  {:.1} ns/gate",
            t.gates, t.seconds, t.ns_per_gate
        );
    }
    println!(
        "scaling     per-gate spread {spread:.2}x ({} 2x)",
        if spread <= 2.0 { "within" } else { "outside" }
    );
    println!(
        "tableau     compile {compile:.4}s, conjugate {conjugate:.6}s, matches replay: {agree}"
    );
    println!("verdict     {}", if agree { "PASS" } else { "FAIL" });
    let json = serde_json::to_string_pretty(&report)?;
    println!("--- json\n{json}");
    if let Some(path) = &a.out {
        write_file(path, &(json + "\n"))?;
    }
    Ok(agree)
}

pub fn list_games() -> Result<bool> {
    for name in games::list() {
        let b = games::load_bundle(name)?;
        let p = &b.protocol;
        println!(
            "{name}: {} ({} provers, {} rounds)",
            b.description,
            p.provers(),
            p.rounds()
        );
        for s in &b.strategies {
            let mut line = format!("  {}", s.name);
            if let Some(v) = s.expected.value {
                line.push_str(&format!("  value {v}"));
            }
            if let Some(m) = s.expected.at_most {
                line.push_str(&format!("  at most {m}"));
            }
            println!("{line}");
        }
    }
    Ok(true)
}
