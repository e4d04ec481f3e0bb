use std::f64::consts::PI;

use union_laplacian::continuum::{
    log_layer_energy, merged_union_spectrum, metric_graph_spectrum_fd, nonlocal_energy, LimitKind, LocalFunction,
    NonlocalOptions, SmoothFunctionSpec,
};
use union_laplacian::kernels::{kernel_moments, KernelProfile};
use union_laplacian::manifolds::{Component, DensitySpec, MixtureModel, Patch};
use union_laplacian::presets;

#[test]
fn indicator_moments() {
    let m1 = kernel_moments(&KernelProfile::<f64>::Indicator, 1).unwrap();
    let m2 = kernel_moments(&KernelProfile::<f64>::Indicator, 2).unwrap();
    assert!((m1.sigma - 2.0 / 3.0).abs() < 1e-12 && (m1.beta - 2.0).abs() < 1e-12);
    assert!((m2.sigma - PI / 4.0).abs() < 1e-12 && (m2.beta - PI).abs() < 1e-12);
}

#[test]
fn triangular_moments() {
    // σ₁ = 2∫(1-t)t² dt, β₁ = 2∫(1-t) dt; σ₂ = π∫(1-t)t³ dt, β₂ = 2π∫(1-t)t dt
    let m1 = kernel_moments(&KernelProfile::<f64>::Triangular, 1).unwrap();
    let m2 = kernel_moments(&KernelProfile::<f64>::Triangular, 2).unwrap();
    assert!((m1.sigma - 1.0 / 6.0).abs() < 1e-10 && (m1.beta - 1.0).abs() < 1e-10);
    assert!((m2.sigma - PI / 20.0).abs() < 1e-10 && (m2.beta - PI / 3.0).abs() < 1e-10);
}

#[test]
fn paper_joint_spectrum() {
    let model = presets::paper_rect_segment::<f64>();
    let r = merged_union_spectrum(&model, &KernelProfile::Indicator, LimitKind::NormalizedLimit, 6).unwrap();
    let pi2 = PI * PI;
    let expected = [0.0, 0.0, pi2 / (4.0 * 1.96), pi2 / (3.0 * 1.69), pi2 / 4.0, pi2 / (4.0 * 1.96) + pi2 / 4.0];
    let got = r.values();
    assert_eq!(got.len(), 6);
    for (g, e) in got.iter().zip(expected) {
        assert!((g - e).abs() <= 1e-12 * e.max(1.0), "{g} vs {e}");
    }
}

fn segment(len: f64) -> MixtureModel<f64> {
    let p = Patch::axis_box(1, vec![0.0], &[0], vec![len]).unwrap();
    MixtureModel::new(vec![Component { patch: p, density: DensitySpec::Uniform, alpha: 1.0 }]).unwrap()
}

#[test]
fn metric_graph_single_segment() {
    let len = 1.3;
    let r = metric_graph_spectrum_fd(&segment(len), &KernelProfile::Indicator, 1e-3, 5).unwrap();
    for (m, v) in r.values().iter().enumerate().skip(1) {
        let exact = (PI * m as f64 / len).powi(2) / 3.0;
        assert!((v - exact).abs() / exact < 1e-4, "mode {m}: {v} vs {exact}");
    }
}

#[test]
fn metric_graph_second_order_on_cross() {
    let model = presets::crossing_segments::<f64>();
    let at = |h: f64| metric_graph_spectrum_fd(&model, &KernelProfile::Indicator, h, 4).unwrap().values();
    let (a, b, c) = (at(4e-3), at(2e-3), at(1e-3));
    for i in 1..4 {
        let ratio = (a[i] - b[i]) / (b[i] - c[i]);
        assert!((ratio - 4.0).abs() < 0.5, "eigenvalue {i}: ratio {ratio}");
    }
}

#[test]
fn log_layer_closed_form() {
    for eps in [0.01f64, 0.001] {
        let e = log_layer_energy(eps).unwrap();
        assert!((e.quadrature - e.closed_form).abs() / e.closed_form < 1e-3);
        assert!((e.closed_form - 4.0 * PI / eps.ln().abs()).abs() < 1e-14);
    }
}

#[test]
fn circle_energy_approaches_limit() {
    let model = presets::unit_circle::<f64>();
    let u = SmoothFunctionSpec::new(vec![LocalFunction::CircleMode { amplitude: 1.0, m: 1, sine: false }]);
    let opts = NonlocalOptions { nodes_per_eps: vec![64], ..Default::default() };
    let mut last = f64::INFINITY;
    for eps in [0.2, 0.1, 0.05] {
        let e = nonlocal_energy(&model, &u, &KernelProfile::Indicator, eps, &opts).unwrap();
        let err = (e.value - 1.0 / 6.0).abs();
        assert!(err < last);
        last = err;
    }
    assert!(last < 0.02);
}

#[test]
fn unnormalized_limit_sees_only_top_dimension() {
    let model = presets::paper_rect_segment::<f64>();
    let r = merged_union_spectrum(&model, &KernelProfile::Indicator, LimitKind::UnnormalizedLimit, 4).unwrap();
    let v = r.values();
    // segment contributes only its constant; rectangle modes carry σ₂ α/|R|
    let w = (PI / 4.0) * (2800.0 / 5400.0) / 1.4;
    assert_eq!(v[0], 0.0);
    assert_eq!(v[1], 0.0);
    assert!((v[2] - w * (PI / 1.4).powi(2)).abs() < 1e-12);
    assert!((v[3] - w * PI * PI).abs() < 1e-12);
}

#[test]
fn wide_gaussian_ratio_tends_to_one() {
    // rescaled support: η(t) = exp(-(r t)²/2), so r²σ/β is the untruncated
    // Gaussian's variance per axis up to an e^{-r²/2} tail
    for d in 1..=3 {
        let mut last = f64::INFINITY;
        for radius in [2.0f64, 4.0, 6.0] {
            let m = kernel_moments(&KernelProfile::truncated_gaussian(radius).unwrap(), d).unwrap();
            let dev = (radius * radius * m.ratio() - 1.0).abs();
            assert!(dev < last, "d={d} r={radius}");
            last = dev;
        }
        assert!(last < 1e-6, "d={d}: {last}");
    }
}
