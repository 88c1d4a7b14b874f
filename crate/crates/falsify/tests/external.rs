use std::path::PathBuf;

use falsify::falsify_core::models::{ModelError, SystemModel, Transmission};
use falsify::falsify_core::signal::{InputSignal, Segment};
use falsify::{ExternalModel, ExternalSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn python(script: &str, inputs: &[&str], outputs: &[&str]) -> ExternalModel {
    ExternalModel::new(ExternalSpec {
        command: "python3".into(),
        args: vec![fixture(script)],
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    })
}

fn random_input<R: Rng>(rng: &mut R, dim: usize, pieces: usize, length: f64) -> InputSignal {
    let segments = (0..pieces)
        .map(|_| {
            let values = (0..dim).map(|_| rng.gen_range(0.0..100.0)).collect();
            Segment::new(length / pieces as f64, values).unwrap()
        })
        .collect();
    InputSignal::from_segments(dim, segments).unwrap()
}

#[test]
fn echo_simulator_returns_the_sampled_input() {
    let mut model = python("echo_sim.py", &["a", "b"], &["a", "b"]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // several requests over one process
    for _ in 0..5 {
        let input = random_input(&mut rng, 2, 3, 6.0);
        let trace = model.simulate(&input, 0.5).unwrap();
        assert_eq!(trace.len(), 13);
        for (i, row) in trace.rows().enumerate() {
            assert_eq!(row, input.value_at(i as f64 * 0.5).unwrap(), "sample {i}");
        }
    }
}

#[test]
fn wrong_column_count_is_a_protocol_error_with_diagnostics() {
    let mut model = python("bad_columns_sim.py", &["a"], &["a"]);
    let input = random_input(&mut ChaCha8Rng::seed_from_u64(2), 1, 2, 2.0);
    let err = model.simulate(&input, 1.0).unwrap_err();
    let ModelError::Other(message) = err else {
        panic!("unexpected {err:?}")
    };
    assert!(message.contains("columns"), "{message}");
    assert!(message.contains("about to send a malformed trace"), "{message}");
}

#[test]
fn dead_simulator_reports_its_stderr() {
    let mut model = python("crash_sim.py", &["a"], &["a"]);
    let input = random_input(&mut ChaCha8Rng::seed_from_u64(3), 1, 2, 2.0);
    let err = model.simulate(&input, 1.0).unwrap_err().to_string();
    assert!(err.contains("license server unavailable"), "{err}");
    // a fresh process is started for the next request, and fails the same way
    assert!(model.simulate(&input, 1.0).is_err());
}

#[test]
fn missing_program_is_an_error() {
    let mut model = ExternalModel::new(ExternalSpec {
        command: "/nonexistent/simulator".into(),
        args: vec![],
        inputs: vec!["a".into()],
        outputs: vec!["a".into()],
    });
    let input = random_input(&mut ChaCha8Rng::seed_from_u64(4), 1, 1, 1.0);
    assert!(model.simulate(&input, 0.5).unwrap_err().to_string().contains("cannot start"));
}

#[test]
fn loopback_through_the_cli_matches_in_process_simulation() {
    let mut remote = ExternalModel::new(ExternalSpec {
        command: env!("CARGO_BIN_EXE_falsify").into(),
        args: vec!["serve".into(), "transmission".into()],
        inputs: vec!["throttle".into(), "brake".into()],
        outputs: vec!["v".into(), "w".into(), "g".into()],
    });
    let mut local = Transmission::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let pieces = rng.gen_range(1..8);
        let input = random_input(&mut rng, 2, pieces, 30.0);
        assert_eq!(
            remote.simulate(&input, 0.1).unwrap(),
            local.simulate(&input, 0.1).unwrap()
        );
    }
    // simulation failures are reported without losing the session
    let input = random_input(&mut rng, 2, 2, 30.0);
    assert!(remote.simulate(&input, f64::NAN).is_err());
    assert!(remote.simulate(&input, 0.1).is_ok());
}
