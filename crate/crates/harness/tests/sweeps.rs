use union_harness::{convergence_sweep, median, write_sweep_csv, ExperimentConfig};

#[test]
fn circle_second_eigenvalue_converges() {
    let config = ExperimentConfig::preset("circle-sweep").unwrap();
    let rows = convergence_sweep(&config).unwrap();
    assert_eq!(rows.len(), 9);
    let medians: Vec<f64> = config
        .n_list
        .iter()
        .map(|&n| median(&rows.iter().filter(|r| r.n == n).map(|r| r.relative_errors[1]).collect::<Vec<_>>()))
        .collect();
    // reference: (σ/β)·1 = 1/3 for the first circle mode
    for r in &rows {
        assert!(((r.eigenvalues[1] - 1.0 / 3.0).abs() / (1.0 / 3.0) - r.relative_errors[1]).abs() < 1e-12);
    }
    assert!(medians.windows(2).all(|w| w[1] < w[0]), "{medians:?}");

    let mut out = Vec::new();
    write_sweep_csv(&mut out, &rows).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().next().unwrap().starts_with("n,seed,epsilon,bandwidth_ok,lambda1"));
}

#[test]
fn median_of_even_and_odd() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    assert!(median(&[]).is_nan());
}
