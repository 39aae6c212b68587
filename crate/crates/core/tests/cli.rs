//! The `dqcc` subcommands driven end to end through files.

use std::path::Path;

use dqc_compiler::cli::{self, read_physical, rows_from_csv, ReportRow};
use dqc_compiler::frontend::parse_qasm;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(std::iter::once("dqcc").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn gen_then_compile_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let qasm = path(dir.path(), "bv.qasm");
    let phys = path(dir.path(), "bv.phys");

    let (code, _, err) = run(&["gen", "--gen", "bv", "--qubits", "5", "--secret", "10111", "--out", &qasm]);
    assert_eq!(code, 0, "{err}");
    let circuit = parse_qasm(&std::fs::read_to_string(&qasm).unwrap()).unwrap();
    assert_eq!(circuit.qubit_count, 6);

    let (code, out, err) = run(&["compile", &qasm, "--mode", "conservative", "--out", &phys]);
    assert_eq!(code, 0, "{err}");
    let [row]: [ReportRow; 1] = serde_json::from_str(&out).unwrap();
    assert_eq!(row.cnot_count, 4);
    assert!(row.depth_opt < row.depth_naive);
    let physical = read_physical(&std::fs::read_to_string(&phys).unwrap()).unwrap();
    assert_eq!(physical.depth(), row.depth_opt);

    let (code, _, err) = run(&["verify", &qasm, "--mode", "relaxed", "--random-states", "4"]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn compile_csv_report_has_one_row() {
    let (code, out, err) = run(&["compile", "--gen", "random", "--qubits", "5", "--gates", "30", "--seed", "9", "--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    let rows = rows_from_csv(&out).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].seed, 9);
}

#[test]
fn bench_writes_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "bench.csv");
    let (code, _, err) = run(&[
        "bench", "--suite", "random", "--qubits", "3..5", "--count", "4", "--max-gates", "20", "--out", &csv,
    ]);
    assert_eq!(code, 0, "{err}");
    let rows = rows_from_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 4 * 3);
}

#[test]
fn config_files_overlay_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let topo = path(dir.path(), "topo.toml");
    let cost = path(dir.path(), "cost.toml");
    std::fs::write(&topo, "nodes = 8\nmemory_per_node = 3\n").unwrap();
    std::fs::write(&cost, "naive_cnot_cost = 20\n").unwrap();
    let (code, out, err) = run(&[
        "compile", "--gen", "bv", "--qubits", "4", "--topology", &topo, "--cost-model", &cost, "--mode", "naive",
    ]);
    assert_eq!(code, 0, "{err}");
    let [row]: [ReportRow; 1] = serde_json::from_str(&out).unwrap();
    assert_eq!(row.weighted_naive, row.weighted_opt);

    std::fs::write(&cost, "naive_cnot_cost = 0\n").unwrap();
    let (code, _, err) = run(&["compile", "--gen", "bv", "--qubits", "4", "--cost-model", &cost]);
    assert_eq!(code, cli::EXIT_INPUT);
    assert!(err.contains("naive_cnot_cost"), "{err}");
}

#[test]
fn bad_inputs_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let qasm = path(dir.path(), "bad.qasm");
    std::fs::write(&qasm, "OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[5];\n").unwrap();
    let (code, _, err) = run(&["compile", &qasm]);
    assert_eq!(code, cli::EXIT_INPUT);
    assert!(err.contains("q"), "{err}");
    let (code, _, _) = run(&["compile", &path(dir.path(), "missing.qasm")]);
    assert_eq!(code, cli::EXIT_INPUT);
    let (code, _, _) = run(&["bench", "--qubits", "9..3"]);
    assert_eq!(code, cli::EXIT_INPUT);
}
