use rbench::dataset_io::{read_dataset, write_dataset, DATASET_CSV, DATASET_SIDECAR};
use rbench_core::clifford::PhysicalGate;
use rbench_core::dynamics::NoiseModel;
use rbench_core::protocol::{run_experiment, square_pulse, RbConfig};

fn small_config() -> RbConfig {
    let mut c = RbConfig::new(square_pulse(1e-6));
    c.lengths = vec![1, 3, 7];
    c.sequences_per_length = 3;
    c.shots_per_sequence = 5;
    c.noise = NoiseModel::depolarizing(0.05);
    c.seed = 17;
    c
}

#[test]
fn round_trip_preserves_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    for gate in [None, Some(PhysicalGate::MinusHalfY)] {
        let mut c = small_config();
        c.interleaved_gate = gate;
        let data = run_experiment(&c).unwrap();
        write_dataset(tmp.path(), &data, None).unwrap();
        assert_eq!(read_dataset(tmp.path()).unwrap(), data);
        assert_eq!(read_dataset(&tmp.path().join(DATASET_CSV)).unwrap(), data);
    }
}

#[test]
fn csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let data = run_experiment(&small_config()).unwrap();
    write_dataset(tmp.path(), &data, None).unwrap();
    let text = std::fs::read_to_string(tmp.path().join(DATASET_CSV)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,k,target,shot_index,outcome");
    assert_eq!(lines.len(), 1 + 3 * 3 * 5);
    assert!(!text.contains('\r'));
    assert!(lines[1].starts_with("1,0,"));
    let sidecar = std::fs::read_to_string(tmp.path().join(DATASET_SIDECAR)).unwrap();
    assert!(sidecar.contains("\"seed\": 17"));
    assert!(!sidecar.contains("created_unix"));
}

fn tampered(edit: impl Fn(String) -> String) -> String {
    let tmp = tempfile::tempdir().unwrap();
    let data = run_experiment(&small_config()).unwrap();
    write_dataset(tmp.path(), &data, None).unwrap();
    let path = tmp.path().join(DATASET_CSV);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, edit(text)).unwrap();
    read_dataset(tmp.path()).unwrap_err().to_string()
}

#[test]
fn malformed_files_are_rejected() {
    let drop_last = |t: String| {
        let mut lines: Vec<&str> = t.lines().collect();
        lines.pop();
        lines.join("\n") + "\n"
    };
    assert!(tampered(drop_last).contains("shots"));
    let relabel = |t: String| {
        t.lines()
            .map(|l| match l.strip_prefix("1,0,") {
                Some(rest) => format!("2,0,{rest}"),
                None => l.to_string(),
            })
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    };
    assert!(tampered(relabel).contains("not part"));
    let bad_outcome = |t: String| {
        let mut lines: Vec<String> = t.lines().map(str::to_string).collect();
        let last = lines[1].len() - 1;
        lines[1].replace_range(last.., "7");
        lines.join("\n") + "\n"
    };
    assert!(tampered(bad_outcome).contains("outcome"));
    assert!(tampered(|t| t.replacen("n,k,target", "n,k,tgt", 1)).contains("header"));
}
