use proptest::prelude::*;
use union_laplacian::graph::{build_graph, build_graph_from_points, NeighborSearch};
use union_laplacian::kernels::KernelProfile;
use union_laplacian::manifolds::sample_mixture;
use union_laplacian::presets;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Grid hashing and the all-pairs scan must produce the same graph bit
    /// for bit on 512-point subsamples.
    #[test]
    fn grid_matches_all_pairs(seed in any::<u64>(), eps in 0.02f64..0.5, offset in 0usize..3000) {
        let model = presets::paper_rect_segment::<f64>();
        let cloud = sample_mixture(&model, 4000, seed).unwrap();
        let idx: Vec<usize> = (offset..offset + 512).collect();
        let sub = cloud.subset(&idx);
        let profile = KernelProfile::Triangular;
        let grid = build_graph_from_points(&sub.points, 3, eps, &profile, NeighborSearch::Grid).unwrap();
        let brute = build_graph_from_points(&sub.points, 3, eps, &profile, NeighborSearch::AllPairs).unwrap();
        prop_assert_eq!(grid.adjacency(), brute.adjacency());
        for i in 0..grid.len() {
            prop_assert_eq!(grid.row(i), brute.row(i));
        }
        prop_assert_eq!(grid.degrees(), brute.degrees());
    }

    #[test]
    fn graph_is_symmetric_with_positive_degrees(seed in any::<u64>(), eps in 0.05f64..0.4) {
        let model = presets::crossing_segments::<f64>();
        let cloud = sample_mixture(&model, 600, seed).unwrap();
        let g = build_graph(&cloud, eps, &KernelProfile::Indicator).unwrap();
        let n = g.len() as f64;
        for i in 0..g.len() {
            let (cols, ws) = g.row(i);
            // degree oracle: brute force over all points, self term included
            let deg: f64 = (0..g.len())
                .filter(|&j| {
                    let (a, b) = (cloud.point(i), cloud.point(j));
                    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() <= eps * eps
                })
                .count() as f64 / n;
            prop_assert!((g.degrees()[i] - deg).abs() < 1e-12);
            for (&j, &w) in cols.iter().zip(ws) {
                let (cj, wj) = g.row(j as usize);
                let back = cj.iter().position(|&c| c as usize == i);
                prop_assert!(back.is_some());
                prop_assert_eq!(wj[back.unwrap()], w);
            }
        }
    }
}

#[test]
fn rejects_bad_bandwidth() {
    let pts = [0.0, 0.0, 1.0, 1.0];
    for eps in [0.0, -1.0, f64::NAN] {
        assert!(build_graph_from_points(&pts, 2, eps, &KernelProfile::Indicator, NeighborSearch::Auto).is_err());
    }
}
