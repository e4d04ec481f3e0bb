use union_laplacian::graph::{build_graph, LaplacianKind};
use union_laplacian::kernels::KernelProfile;
use union_laplacian::manifolds::sample_mixture;
use union_laplacian::presets;
use union_laplacian::spectra::{smallest_eigenpairs_with, SolverMethod, SolverOptions};

/// The whole pipeline runs in single precision and tracks the f64 result.
#[test]
fn single_precision_pipeline() {
    let m32 = presets::paper_rect_segment::<f32>();
    let m64 = presets::paper_rect_segment::<f64>();
    let c32 = sample_mixture(&m32, 400, 3).unwrap();
    let c64 = sample_mixture(&m64, 400, 3).unwrap();
    let g32 = build_graph(&c32, 0.35, &KernelProfile::Indicator).unwrap();
    let g64 = build_graph(&c64, 0.35, &KernelProfile::Indicator).unwrap();
    let o32 = SolverOptions { tol: 1e-4f32, method: SolverMethod::Lanczos, ..SolverOptions::default() };
    let r32 = smallest_eigenpairs_with(&g32, LaplacianKind::NormalizedSym, 4, &o32).unwrap();
    let o64 = SolverOptions { method: SolverMethod::Dense, ..SolverOptions::default() };
    let r64 = smallest_eigenpairs_with(&g64, LaplacianKind::NormalizedSym, 4, &o64).unwrap();
    for (a, b) in r32.eigenvalues.iter().zip(&r64.eigenvalues) {
        assert!((*a as f64 - b).abs() < 1e-3 * r64.operator_norm, "{a} vs {b}");
    }
}
