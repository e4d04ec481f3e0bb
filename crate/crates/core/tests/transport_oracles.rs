use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use union_laplacian::transport::{tl2_exact, tl2_proxy, Coupling};
use union_laplacian::continuum::{LocalFunction, SmoothFunctionSpec};
use union_laplacian::manifolds::sample_mixture;
use union_laplacian::presets;

const ENUM_TOL: f64 = 1e-12;

/// Minimum over all permutations, by Heap's algorithm.
fn enumerate(pa: &[f64], ua: &[f64], pb: &[f64], ub: &[f64], dim: usize) -> f64 {
    let m = ua.len();
    let cost = |perm: &[usize]| {
        perm.iter()
            .enumerate()
            .map(|(i, &j)| {
                let s: f64 = (0..dim).map(|c| (pa[i * dim + c] - pb[j * dim + c]).powi(2)).sum();
                s + (ua[i] - ub[j]).powi(2)
            })
            .sum::<f64>()
            / m as f64
    };
    let mut perm: Vec<usize> = (0..m).collect();
    let mut best = cost(&perm);
    let mut c = vec![0usize; m];
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best.sqrt()
}

fn atoms(m: usize, dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-1.0f64..1.0, m * dim), prop::collection::vec(-1.0f64..1.0, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn assignment_matches_enumeration(
        m in 1usize..=8,
        dim in 1usize..=3,
        seed_a in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed_a);
        let mut draw = |k: usize| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let (pa, ua, pb, ub) = (draw(m * dim), draw(m), draw(m * dim), draw(m));
        let r = tl2_exact(&pa, &ua, &pb, &ub, dim).unwrap();
        let oracle = enumerate(&pa, &ua, &pb, &ub, dim);
        prop_assert!((r.distance - oracle).abs() <= ENUM_TOL, "{} vs {}", r.distance, oracle);
        prop_assert!(((r.spatial + r.value).sqrt() - r.distance).abs() <= ENUM_TOL);
        let Coupling::Assignment { assignment } = r.coupling else { panic!("expected an assignment") };
        let mut sorted = assignment.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..m).collect::<Vec<_>>());
    }

    #[test]
    fn symmetric_and_triangle((pa, ua) in atoms(7, 2), (pb, ub) in atoms(7, 2), (pc, uc) in atoms(7, 2)) {
        let d = |p: &[f64], u: &[f64], q: &[f64], v: &[f64]| tl2_exact(p, u, q, v, 2).unwrap().distance;
        let ab = d(&pa, &ua, &pb, &ub);
        let ba = d(&pb, &ub, &pa, &ua);
        let bc = d(&pb, &ub, &pc, &uc);
        let ac = d(&pa, &ua, &pc, &uc);
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!(d(&pa, &ua, &pa, &ua).abs() <= 1e-12);
    }

    /// Permuting the atoms of one measure does not change the distance.
    #[test]
    fn invariant_under_relabeling((pa, ua) in atoms(6, 3), (pb, ub) in atoms(6, 3), shift in 0usize..6) {
        let rot = |p: &[f64], k: usize| -> Vec<f64> { let mut v = p.to_vec(); v.rotate_left(k); v };
        let a = tl2_exact(&pa, &ua, &pb, &ub, 3).unwrap().distance;
        let b = tl2_exact(&pa, &ua, &rot(&pb, 3 * shift), &rot(&ub, shift), 3).unwrap().distance;
        prop_assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn proxy_vanishes_on_exact_values() {
    let model = presets::paper_rect_segment::<f64>();
    let cloud = sample_mixture(&model, 300, 4).unwrap();
    let u = SmoothFunctionSpec::new(vec![LocalFunction::constant(2.0), LocalFunction::constant(-1.0)]);
    let exact: Vec<f64> = cloud.labels.iter().map(|&l| if l == 0 { 2.0 } else { -1.0 }).collect();
    assert_eq!(tl2_proxy(&model, &cloud, &exact, &u).unwrap(), 0.0);
    let shifted: Vec<f64> = exact.iter().map(|v| v + 0.25).collect();
    assert!((tl2_proxy(&model, &cloud, &shifted, &u).unwrap() - 0.25).abs() < 1e-14);
}
