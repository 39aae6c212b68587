//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use dqc_compiler::cli::{self, run_bench, run_pipeline, BenchSpec, ReportRow, Settings, Suite};
use dqc_compiler::decomposer::{build_ghz, BitAllocator, BlockKind};
use dqc_compiler::frontend::{emit_qasm, gen_bv, gen_dj, gen_random, DjOracle, LogicalCircuit, Pattern};
use dqc_compiler::ir::{GateKind, Instruction, QubitRef};
use dqc_compiler::parallelizer::Mode;
use dqc_compiler::scheduler::bucketize;
use dqc_compiler::simulator::{check_equivalence, simulate, state_fidelity, EquivalenceOptions, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;
const COST_RUNTIME_LIMIT: Duration = Duration::from_secs(1);
const EQUIVALENCE_RUNTIME_LIMIT: Duration = Duration::from_secs(600);
const RANDOM_STATES: usize = 20;
const SWEEP_CIRCUITS: usize = 500;
const SWEEP_MAX_QUBITS: usize = 12;
const SWEEP_MAX_GATES: usize = 200;
const TREND_SLACK: f64 = 0.01;
const DAG_CIRCUITS: usize = 200;
const DAG_MAX_INSTRUCTIONS: usize = 50;

/// Written straight to stdout so the line survives libtest output capture.
fn report(n: u32, ok: bool, detail: &str) {
    let line = format!("criterion {n}: {} {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
}

fn settings() -> Settings {
    Settings::default()
}

fn fan_out(n: usize) -> LogicalCircuit {
    LogicalCircuit::new(
        format!("fanout_{n}"),
        n + 1,
        (1..=n).map(|t| Instruction::cnot(0, t)).collect(),
    )
}

#[test]
fn criterion_1_cost_model_constants() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for k in 1..=10u64 {
        let c = LogicalCircuit::new("seq", 2, vec![Instruction::cnot(0, 1); k as usize]);
        let r = run_pipeline(&c, Mode::Naive, &settings(), 0).unwrap();
        if r.row.weighted_naive != 19 * k {
            failures.push(format!("k={k}: weighted {}", r.row.weighted_naive));
        }
    }
    for n in 2..=6usize {
        let r = run_pipeline(&fan_out(n), Mode::Relaxed, &settings(), 0).unwrap();
        let blocks: Vec<_> = r.optimized.blocks.iter().filter(|b| b.kind == BlockKind::SharedControl).collect();
        let want = 42 + (n as u64 - 2);
        if blocks.len() != 1 || blocks[0].cost != want || r.row.weighted_opt != want {
            failures.push(format!("n={n}: blocks {blocks:?}, weighted {}", r.row.weighted_opt));
        }
        let cons = run_pipeline(&fan_out(n), Mode::Conservative, &settings(), 0).unwrap();
        let parallel = cons.optimized.blocks.iter().any(|b| b.kind == BlockKind::SharedControl);
        if parallel != (n >= 3) {
            failures.push(format!("n={n}: conservative parallel={parallel}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= COST_RUNTIME_LIMIT {
        failures.push(format!("runtime {elapsed:?}"));
    }
    report(1, failures.is_empty(), &format!("{failures:?} in {elapsed:?}"));
    assert!(failures.is_empty(), "{failures:?}");
}

fn bit_strings(n: usize) -> impl Iterator<Item = String> {
    (0..1usize << n).map(move |v| (0..n).map(|i| if v >> i & 1 == 1 { '1' } else { '0' }).collect())
}

fn equivalence_corpus() -> Vec<LogicalCircuit> {
    let mut out = Vec::new();
    for n in 1..=5 {
        for s in bit_strings(n) {
            out.push(gen_bv(n, &s).unwrap());
            if s.contains('1') {
                out.push(gen_dj(n, &DjOracle::Balanced(s)).unwrap());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..50u64 {
        let n = rng.random_range(2..=5);
        let gates = rng.random_range(1..=30);
        out.push(gen_random(n, gates, i, Pattern::ALL[i as usize % 3]).unwrap());
    }
    out
}

#[test]
fn criterion_2_equivalence_suite() {
    let start = Instant::now();
    let corpus = equivalence_corpus();
    let mut worst = 1.0f64;
    let mut failures = Vec::new();
    for c in &corpus {
        for mode in Mode::ALL {
            let r = run_pipeline(c, mode, &settings(), 0).unwrap();
            let opts = EquivalenceOptions {
                random_states: RANDOM_STATES,
                seed: 7,
            };
            let rep = check_equivalence(c, &r.optimized, opts).unwrap();
            worst = worst.min(rep.worst_fidelity);
            if !rep.equivalent || rep.worst_fidelity < FIDELITY_FLOOR {
                failures.push(format!("{} {}: {:?}", c.name, mode.name(), rep.failing_input));
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < EQUIVALENCE_RUNTIME_LIMIT;
    report(
        2,
        ok,
        &format!(
            "{} circuits x 3 modes, worst infidelity {:.3e}, {elapsed:?}",
            corpus.len(),
            1.0 - worst
        ),
    );
    assert!(ok, "{failures:?}");
}

/// The 500-circuit random run shared by criteria 3 and 6.
fn sweep_rows() -> &'static [ReportRow] {
    static ROWS: OnceLock<Vec<ReportRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let spec = BenchSpec {
            suite: Suite::Random,
            qubits: 2..=SWEEP_MAX_QUBITS,
            count: SWEEP_CIRCUITS,
            seed: 1000,
            modes: vec![Mode::Conservative, Mode::Relaxed],
            max_gates: SWEEP_MAX_GATES,
        };
        run_bench(&spec, &settings()).unwrap()
    })
}

#[test]
fn criterion_3_conservative_never_deeper() {
    let rows: Vec<_> = sweep_rows().iter().filter(|r| r.mode == Mode::Conservative).collect();
    let bad: Vec<_> = rows.iter().filter(|r| r.depth_opt > r.depth_naive).map(|r| r.name.clone()).collect();
    let improved = rows.iter().filter(|r| r.depth_opt < r.depth_naive).count();
    let ok = rows.len() >= SWEEP_CIRCUITS && bad.is_empty();
    report(3, ok, &format!("{} circuits, {} deeper, {improved} improved", rows.len(), bad.len()));
    assert!(ok, "{bad:?}");
}

#[test]
fn criterion_4_sequential_structure_speedup() {
    let mut failures = Vec::new();
    for (family, make) in [
        ("bv", (|n: usize| gen_bv(n, &"1".repeat(n)).unwrap()) as fn(usize) -> LogicalCircuit),
        ("dj", |n: usize| gen_dj(n, &DjOracle::Balanced("1".repeat(n))).unwrap()),
    ] {
        let mut prev: Option<f64> = None;
        let mut trend = Vec::new();
        for n in 3..=12 {
            let r = run_pipeline(&make(n), Mode::Conservative, &settings(), 0).unwrap().row;
            if r.depth_opt >= r.depth_naive {
                failures.push(format!("{family} n={n}: {} >= {}", r.depth_opt, r.depth_naive));
            }
            if n >= 4 {
                if let Some(p) = prev {
                    if r.relative_improvement < p - TREND_SLACK {
                        failures.push(format!("{family} n={n}: improvement fell {p:.4} -> {:.4}", r.relative_improvement));
                    }
                }
                prev = Some(r.relative_improvement);
                trend.push(format!("{:.3}", r.relative_improvement));
            }
        }
        println!("{family} relative improvement n=4..12: {}", trend.join(" "));
    }
    report(4, failures.is_empty(), &format!("{failures:?}"));
    assert!(failures.is_empty(), "{failures:?}");
}

/// Random circuits whose CNOTs never share a qubit with one another.
fn disjoint_circuit(seed: u64) -> LogicalCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=12);
    let mut free: Vec<usize> = (0..n).collect();
    let mut instrs = Vec::new();
    for _ in 0..rng.random_range(1..=40) {
        if free.len() >= 2 && rng.random_bool(0.4) {
            let a = free.swap_remove(rng.random_range(0..free.len()));
            let b = free.swap_remove(rng.random_range(0..free.len()));
            instrs.push(Instruction::cnot(a, b));
        } else {
            let kinds = [GateKind::H, GateKind::T, GateKind::X, GateKind::Rz(0.4), GateKind::S];
            instrs.push(Instruction::single(kinds[rng.random_range(0..kinds.len())], rng.random_range(0..n)));
        }
    }
    LogicalCircuit::new(format!("disjoint_{seed}"), n, instrs)
}

#[test]
fn criterion_5_already_parallel_neutrality() {
    let mut failures = Vec::new();
    for seed in 0..100 {
        let c = disjoint_circuit(seed);
        let r = run_pipeline(&c, Mode::Conservative, &settings(), seed).unwrap().row;
        if r.depth_opt != r.depth_naive {
            failures.push(format!("{}: {} vs {}", c.name, r.depth_opt, r.depth_naive));
        }
    }
    report(5, failures.is_empty(), &format!("100 circuits, {} mismatches", failures.len()));
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn criterion_6_relaxed_mode_dichotomy() {
    let rows = sweep_rows();
    let mut better_than_conservative = 0;
    let mut worse_than_naive = 0;
    for pair in rows.chunks(2) {
        let [cons, relaxed] = pair else { unreachable!() };
        assert_eq!(cons.name, relaxed.name);
        if relaxed.depth_opt < cons.depth_opt {
            better_than_conservative += 1;
        }
        if relaxed.depth_opt > relaxed.depth_naive {
            worse_than_naive += 1;
        }
    }
    let ok = better_than_conservative >= 1 && worse_than_naive >= 1;
    report(
        6,
        ok,
        &format!("{better_than_conservative} beat conservative, {worse_than_naive} deeper than naive"),
    );
    assert!(ok);
}

fn ghz(k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::default(); 1 << k];
    v[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[(1 << k) - 1] = v[0];
    v
}

#[test]
fn criterion_7_protocol_state_checks() {
    let mut failures = Vec::new();
    for k in 2..=4 {
        let nodes: Vec<usize> = (0..k).collect();
        let mut bits = BitAllocator::starting_at(0);
        let seq = build_ghz(&nodes, Some(QubitRef::memory(0, 3)), &mut bits).unwrap();
        let branches = simulate(&seq, &StateVector::vacuum()).unwrap();
        let comm: Vec<QubitRef> = nodes.iter().map(|n| QubitRef::comm(*n)).collect();
        for b in &branches {
            let mut amps = Vec::new();
            // the fusion buffer, when used, must be back in |0⟩; drop it
            let buffer = b.state.qubits.iter().position(|q| !q.is_comm());
            for (i, a) in b.state.amplitudes.iter().enumerate() {
                match buffer {
                    Some(p) if i >> p & 1 == 1 => {
                        if a.norm() > 1e-9 {
                            failures.push(format!("k={k}: buffer not |0⟩"));
                        }
                    }
                    _ => amps.push(*a),
                }
            }
            let mut qubits = b.state.qubits.clone();
            if let Some(p) = buffer {
                qubits.remove(p);
            }
            let s = StateVector::new(qubits, amps).unwrap();
            let f = state_fidelity(&s.reordered(&comm).unwrap(), &ghz(k)).unwrap();
            if f < FIDELITY_FLOOR {
                failures.push(format!("k={k}: fidelity {f}"));
            }
        }
    }
    for n in 2..=6 {
        let r = run_pipeline(&fan_out(n), Mode::Relaxed, &settings(), 0).unwrap();
        if r.optimized.epr_count() != n {
            failures.push(format!("n={n}: {} EPRs", r.optimized.epr_count()));
        }
    }
    report(7, failures.is_empty(), &format!("{failures:?}"));
    assert!(failures.is_empty(), "{failures:?}");
}

/// Random logical program mixing gates, measurements and barriers.
fn dag_circuit(seed: u64) -> LogicalCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6);
    let len = rng.random_range(1..=DAG_MAX_INSTRUCTIONS);
    let mut instrs = Vec::new();
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let roll = rng.random_range(0..10);
        instrs.push(match roll {
            0..=3 if n >= 2 => {
                let t = (q + rng.random_range(1..n)) % n;
                Instruction::cnot(q, t)
            }
            4 => Instruction::measure_z(q, rng.random_range(0..3)),
            5 => Instruction::barrier((0..n).filter(|_| rng.random_bool(0.5)).collect()),
            _ => Instruction::single(GateKind::H, q),
        });
    }
    LogicalCircuit::new(format!("dag_{seed}"), n, instrs)
}

/// Longest path through the pairwise-conflict DAG; barriers weigh zero.
fn longest_path(instrs: &[Instruction]) -> usize {
    let mut finish = vec![0usize; instrs.len()];
    for j in 0..instrs.len() {
        let start = (0..j)
            .filter(|&i| instrs[i].conflicts_with(&instrs[j]))
            .map(|i| finish[i])
            .max()
            .unwrap_or(0);
        finish[j] = start + usize::from(!instrs[j].is_barrier());
    }
    finish.into_iter().max().unwrap_or(0).max(usize::from(!instrs.is_empty()))
}

/// Logical circuits whose compiled form contains every protocol.
fn mutation_corpus() -> Vec<LogicalCircuit> {
    vec![
        LogicalCircuit::new("naive_cnot", 2, vec![Instruction::cnot(0, 1)]),
        LogicalCircuit::new("naive_cz", 2, vec![Instruction::cz(0, 1)]),
        fan_out(2),
        fan_out(3),
        LogicalCircuit::new("fan_in_3", 4, (1..=3).map(|c| Instruction::cnot(c, 0)).collect()),
    ]
}

#[test]
fn criterion_8_oracle_cross_checks() {
    let mut failures = Vec::new();
    for seed in 0..DAG_CIRCUITS as u64 {
        let c = dag_circuit(seed);
        let got = bucketize(&c).bucket_count();
        let want = longest_path(&c.instructions);
        if got != want {
            failures.push(format!("{}: {got} buckets, longest path {want}", c.name));
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let mut mutants = 0;
    for c in mutation_corpus() {
        let path = dir.path().join(format!("{}.qasm", c.name));
        std::fs::write(&path, emit_qasm(&c)).unwrap();
        let p = path.to_str().unwrap().to_string();
        let r = run_pipeline(&c, Mode::Relaxed, &settings(), 0).unwrap();
        let corrections = r.optimized.instructions.iter().filter(|i| i.condition.is_some()).count();
        let verify = |extra: &[String]| {
            let mut argv: Vec<String> = ["dqcc", "verify", &p, "--mode", "relaxed"].iter().map(|s| s.to_string()).collect();
            argv.extend_from_slice(extra);
            cli::run(argv, &mut Vec::new(), &mut Vec::new())
        };
        if verify(&[]) != 0 {
            failures.push(format!("{}: unmutated circuit rejected", c.name));
        }
        for k in 0..corrections {
            mutants += 1;
            let code = verify(&["--drop-correction".into(), k.to_string()]);
            if code != 3 {
                failures.push(format!("{}: dropping correction {k} gave exit {code}", c.name));
            }
        }
    }
    report(
        8,
        failures.is_empty(),
        &format!("{DAG_CIRCUITS} DAG checks, {mutants} mutants, {failures:?}"),
    );
    assert!(failures.is_empty(), "{failures:?}");
}
