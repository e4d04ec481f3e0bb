use std::fs;

use union_harness::{run_experiment, validate_bundle, ExperimentConfig};

fn small_config(dir: &std::path::Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::preset("paper-fig1").unwrap();
    c.counts = Some(vec![300, 400]);
    c.bandwidth = union_harness::Bandwidth::Constant(0.3);
    c.seeds = vec![5, 6];
    c.out = Some(dir.to_path_buf());
    c
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&small_config(a.path())).unwrap();
    run_experiment(&small_config(b.path())).unwrap();
    for stem in ["paper-fig1_seed5", "paper-fig1_seed6"] {
        for suffix in [".json", "_vectors.csv"] {
            let name = format!("{stem}{suffix}");
            let x = fs::read(a.path().join(&name)).unwrap();
            let y = fs::read(b.path().join(&name)).unwrap();
            assert!(x == y, "{name} differs between reruns");
        }
    }
}

#[test]
fn written_bundles_validate() {
    let dir = tempfile::tempdir().unwrap();
    let bundles = run_experiment(&small_config(dir.path())).unwrap();
    for b in &bundles {
        let path = dir.path().join(format!("paper-fig1_seed{}.json", b.metadata.seed));
        let back = validate_bundle(&path).unwrap();
        assert_eq!(back.metadata, b.metadata);
        assert_eq!(back.spectrum.eigenvalues.len(), 6);
        assert!(back.reference.is_some() && back.alignment.is_some());
        assert_eq!(back.metadata.counts, vec![300, 400]);
    }
}

#[test]
fn truncated_vectors_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small_config(dir.path())).unwrap();
    let csv = dir.path().join("paper-fig1_seed5_vectors.csv");
    let text = fs::read_to_string(&csv).unwrap();
    let keep: Vec<&str> = text.lines().take(10).collect();
    fs::write(&csv, keep.join("\n") + "\n").unwrap();
    let err = validate_bundle(&dir.path().join("paper-fig1_seed5.json")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn different_seeds_give_different_clouds() {
    let dir = tempfile::tempdir().unwrap();
    let bundles = run_experiment(&small_config(dir.path())).unwrap();
    assert_ne!(bundles[0].spectrum.eigenvalues, bundles[1].spectrum.eigenvalues);
}
