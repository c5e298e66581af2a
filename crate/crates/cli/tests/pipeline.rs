//! End-to-end command pipeline: generate, run, analyze, and the peer driver's
//! failure and accounting behaviour.

use std::io::{BufRead, BufReader};
use std::process::{Command, Stdio};

use acop_cli::{analysis, manifest, results, runner};
use acop_core::fixtures;
use acop_core::protocol::{AgentEndpoint, DEFAULT_MAX_PROPOSALS_TOTAL};
use acop_core::scenario::{BatchParams, GridKind, ValueRange};
use acop_core::wire::run_wire_session;
use acop_core::{ConstraintPolicy, Protocol, Role, ScenarioFile};

fn acop_bin() -> &'static str {
    env!("CARGO_BIN_EXE_acop")
}

#[test]
fn generate_run_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let batch_dir = dir.path().join("batch");
    let params = BatchParams {
        n_issues: 3,
        n_values: 3,
        n_base_scenarios: 2,
        ranges: vec![ValueRange::ZeroTo100],
        constraint_counts: vec![0, 1],
        grids: vec![GridKind::Linear],
        master_seed: 7,
    };
    let written = manifest::write_batch(&params, &batch_dir).unwrap();
    assert_eq!(written, 400);

    let (loaded, base_dir) = manifest::read_manifest(&batch_dir).unwrap();
    let configs = manifest::load_configurations(&loaded, &base_dir).unwrap();
    let options = runner::RunOptions {
        master_seed: loaded.params.master_seed,
        policy: ConstraintPolicy::Reactive,
        workers: 2,
    };
    let out1 = dir.path().join("r1.csv");
    let out2 = dir.path().join("r2.csv");
    let n1 = runner::run_batch_to_file(&configs, &options, &out1).unwrap();
    let n2 = runner::run_batch_to_file(&configs, &options, &out2).unwrap();
    assert_eq!(n1, 1600);
    assert_eq!(
        std::fs::read(&out1).unwrap(),
        std::fs::read(&out2).unwrap(),
        "reruns are byte-identical"
    );
    assert_eq!(n1, n2);

    let rows = results::read_rows(&out1).unwrap();
    let report = analysis::analyze(&rows, false).unwrap();
    assert_eq!(report.pairs, 800);
    assert!(report.incomplete.is_empty());
    let plot_dir = dir.path().join("plots");
    acop_cli::write_plot_data(&report, &plot_dir).unwrap();
    for file in [
        "messages_saved_box.csv",
        "utility_categories.csv",
        "length_histogram.csv",
    ] {
        let text = std::fs::read_to_string(plot_dir.join(file)).unwrap();
        assert!(text.lines().count() > 1, "{file} has data rows");
    }
}

#[test]
fn dry_run_reports_full_scale_configuration_count() {
    let output = Command::new(acop_bin())
        .args(["generate", "--paper-scale", "--dry-run"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(
        text.contains("776100 configurations"),
        "300 bases x 13 counts x 199 pairs: {text}"
    );
}

#[test]
fn peer_protocol_mismatch_aborts_at_first_constrained_frame() {
    let dir = tempfile::tempdir().unwrap();
    let (space, ua, ub) = fixtures::example_trace_tables();
    let file = ScenarioFile::new(
        &space,
        &ua,
        fixtures::EXAMPLE_TRACE_RESERVATION,
        &ub,
        fixtures::EXAMPLE_TRACE_RESERVATION,
    );
    let scenario = dir.path().join("scenario.json");
    std::fs::write(&scenario, serde_json::to_string_pretty(&file).unwrap()).unwrap();
    let scenario = scenario.to_str().unwrap();

    // B expects the plain protocol, A speaks the constrained one
    let mut peer_b = Command::new(acop_bin())
        .args([
            "peer", "--role", "b", "--scenario", scenario,
            "--listen", "127.0.0.1:0", "--protocol", "aop", "--sid", "mismatch",
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut stdout = BufReader::new(peer_b.stdout.take().unwrap());
    let mut line = String::new();
    stdout.read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("LISTENING ").unwrap().to_string();

    let peer_a = Command::new(acop_bin())
        .args([
            "peer", "--role", "a", "--scenario", scenario,
            "--connect", &addr, "--protocol", "acop", "--sid", "mismatch",
        ])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .unwrap();
    let status_b = peer_b.wait().unwrap();
    assert!(!status_b.success(), "mismatched peer must abort");
    assert!(!peer_a.success(), "its counterpart cannot finish either");
}

#[test]
fn constrained_protocol_uses_fewer_bytes_when_it_saves_messages() {
    use std::net::{TcpListener, TcpStream};
    use std::thread;

    let run = |protocol: Protocol| {
        let (space, a, b) = fixtures::example_trace_profiles(protocol);
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let client = thread::spawn(move || TcpStream::connect(addr).unwrap());
        let (stream_b, _) = listener.accept().unwrap();
        let stream_a = client.join().unwrap();

        let endpoint_a = AgentEndpoint::new(
            &space,
            a,
            Role::A,
            ConstraintPolicy::Reactive,
            1,
            DEFAULT_MAX_PROPOSALS_TOTAL,
        );
        let endpoint_b = AgentEndpoint::new(
            &space,
            b,
            Role::B,
            ConstraintPolicy::Reactive,
            1,
            DEFAULT_MAX_PROPOSALS_TOTAL,
        );
        let task_b = thread::spawn(move || {
            let reader = BufReader::new(stream_b.try_clone().unwrap());
            run_wire_session(endpoint_b, reader, stream_b, "bytes", false).unwrap()
        });
        let reader = BufReader::new(stream_a.try_clone().unwrap());
        let out_a = run_wire_session(endpoint_a, reader, stream_a, "bytes", false).unwrap();
        let out_b = task_b.join().unwrap();
        (out_a.message_count, out_a.stats.bytes_total(), out_b.stats.bytes_total())
    };

    let (messages_acop, bytes_acop_a, bytes_acop_b) = run(Protocol::Acop);
    let (messages_aop, bytes_aop_a, bytes_aop_b) = run(Protocol::Aop);
    assert!(messages_aop >= messages_acop + 2, "fixture saves messages");
    assert!(
        bytes_acop_a < bytes_aop_a,
        "constraint exchange pays for itself in bytes: {bytes_acop_a} vs {bytes_aop_a}"
    );
    assert_eq!(bytes_acop_a, bytes_acop_b);
    assert_eq!(bytes_aop_a, bytes_aop_b);
}
