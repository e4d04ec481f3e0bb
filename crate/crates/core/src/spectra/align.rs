use serde::{Deserialize, Serialize};

use crate::continuum::{ModeShape, ReferenceSpectrum, CLUSTER_TOL};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::sym_eigen;
use crate::manifolds::{MixtureModel, SampleCloud};
use crate::scalar::Scalar;

use super::solve::SpectralResult;

/// Separation scores are capped here when the within-group spread vanishes.
pub const SEPARATION_CAP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair<T> {
    pub index: usize,
    pub computed: T,
    pub reference: T,
    pub relative_error: T,
}

/// Eigenvalues of one reference multiplicity cluster compared as a subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterAngle<T> {
    pub indices: Vec<usize>,
    pub reference: T,
    /// Principal angles in radians, ascending.
    pub angles: Vec<T>,
}

impl<T: Scalar> ClusterAngle<T> {
    pub fn largest(&self) -> T {
        self.angles.iter().copied().fold(T::zero(), T::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation<T> {
    pub index: usize,
    pub components: (usize, usize),
    pub score: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport<T> {
    pub pairs: Vec<EigenPair<T>>,
    pub clusters: Vec<ClusterAngle<T>>,
    pub separations: Vec<Separation<T>>,
}

impl<T: Scalar> AlignmentReport<T> {
    pub fn max_relative_error(&self, from: usize) -> T {
        self.pairs.iter().skip(from).map(|p| p.relative_error).fold(T::zero(), T::max)
    }
}

/// Pairs computed and reference eigenvalues in order; relative errors are
/// taken against `max(λ_ref, λ₃_ref)` so zero reference values stay
/// meaningful.
pub fn pair_eigenvalues<T: Scalar>(computed: &[T], reference: &[T]) -> Vec<EigenPair<T>> {
    let k = computed.len().min(reference.len());
    let floor = reference
        .get(2)
        .or_else(|| reference.last())
        .copied()
        .unwrap_or_else(T::zero);
    (0..k)
        .map(|i| {
            let scale = reference[i].max(floor);
            let diff = (computed[i] - reference[i]).abs();
            let relative_error = if scale > T::zero() { diff / scale } else { diff };
            EigenPair { index: i, computed: computed[i], reference: reference[i], relative_error }
        })
        .collect()
}

/// `|mean(values on a) - mean(values on b)| / pooled std`, capped at
/// [`SEPARATION_CAP`].
pub fn separation_score<T: Scalar>(values: &[T], labels: &[usize], a: usize, b: usize) -> T {
    let stats = |c: usize| {
        let xs: Vec<T> = values.iter().zip(labels).filter(|(_, &l)| l == c).map(|(&v, _)| v).collect();
        let n = xs.len();
        if n == 0 {
            return (0, T::zero(), T::zero());
        }
        let mean = xs.iter().copied().sum::<T>() / T::from_usize_lossy(n);
        let ss = xs.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
        (n, mean, ss)
    };
    let (na, ma, sa) = stats(a);
    let (nb, mb, sb) = stats(b);
    if na == 0 || nb == 0 {
        return T::zero();
    }
    let diff = (ma - mb).abs();
    let dof = (na + nb).saturating_sub(2).max(1);
    let pooled = ((sa + sb) / T::from_usize_lossy(dof)).sqrt();
    let cap = T::lit(SEPARATION_CAP);
    if pooled > T::zero() {
        (diff / pooled).min(cap)
    } else if diff > T::zero() {
        cap
    } else {
        T::zero()
    }
}

/// Share of the total sum of squares of `values` that comes from variation
/// within `component`: `Σ_{x∈c} (u - mean_c)² / Σ_x (u - mean)²`.
pub fn within_variance_fraction<T: Scalar>(values: &[T], labels: &[usize], component: usize) -> T {
    let n = values.len();
    if n == 0 {
        return T::zero();
    }
    let mean = values.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let total: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let own: Vec<T> = values.iter().zip(labels).filter(|(_, &l)| l == component).map(|(&v, _)| v).collect();
    if own.is_empty() || total <= T::zero() {
        return T::zero();
    }
    let m = own.iter().copied().sum::<T>() / T::from_usize_lossy(own.len());
    own.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / total
}

/// Values whose groupwise structure is compared: `u/√deg` for the
/// normalized operator, `u` otherwise.
pub fn shape_values<T: Scalar>(result: &SpectralResult<T>, graph: &Graph<T>, index: usize) -> Vec<T> {
    let u = &result.eigenvectors[index];
    if result.kind.is_normalized() {
        u.iter().zip(graph.degrees()).map(|(&v, &d)| v / d.sqrt()).collect()
    } else {
        u.clone()
    }
}

/// `|⟨u_index, m⟩| / (‖u_index‖ ‖m‖)` for a closed-form mode `m`, taken
/// times `√deg` for the normalized operator.
pub fn mode_correlation<T: Scalar>(
    result: &SpectralResult<T>,
    graph: &Graph<T>,
    model: &MixtureModel<T>,
    cloud: &SampleCloud<T>,
    index: usize,
    mode: &ModeShape,
) -> T {
    let mut m = mode.eval_cloud(model, cloud);
    if result.kind.is_normalized() {
        m.iter_mut().zip(graph.degrees()).for_each(|(x, &d)| *x *= d.sqrt());
    }
    let u = &result.eigenvectors[index];
    let nu = crate::scalar::dot(u, u).sqrt();
    let nm = crate::scalar::dot(&m, &m).sqrt();
    if nu == T::zero() || nm == T::zero() {
        return T::zero();
    }
    crate::scalar::dot(u, &m).abs() / (nu * nm)
}

/// Orthonormal basis (empirical inner product) of the span of `vectors`,
/// dropping numerically dependent ones.
fn orthonormalize<T: Scalar>(vectors: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        let scale = w.iter().map(|&x| x * x).sum::<T>().sqrt();
        for _ in 0..2 {
            for q in &out {
                let c = crate::scalar::dot(&w, q);
                for (wi, &qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let norm = w.iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm > scale * T::lit(1e-10) && norm > T::zero() {
            w.iter_mut().for_each(|x| *x /= norm);
            out.push(w);
        }
    }
    out
}

/// Principal angles between two spans, ascending, as many as the smaller
/// dimension.
pub fn principal_angles<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<T> {
    let qa = orthonormalize(a);
    let qb = orthonormalize(b);
    let (small, large) = if qa.len() <= qb.len() { (&qa, &qb) } else { (&qb, &qa) };
    let k = small.len();
    if k == 0 {
        return Vec::new();
    }
    let m: Vec<Vec<T>> = small.iter().map(|s| large.iter().map(|l| crate::scalar::dot(s, l)).collect()).collect();
    let mut g = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            g[i * k + j] = m[i].iter().zip(&m[j]).map(|(&x, &y)| x * y).sum();
        }
    }
    let (vals, _) = sym_eigen(&g, k);
    let mut angles: Vec<T> = vals.iter().map(|&v| v.max(T::zero()).sqrt().min(T::one()).acos()).collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    angles
}

/// Compares a computed spectrum with a reference: eigenvalue pairs,
/// subspace angles against closed-form mode shapes for every cluster, and
/// separation scores for eigenvectors whose reference modes are constant
/// on single components.
pub fn align_spectra<T: Scalar>(
    result: &SpectralResult<T>,
    reference: &ReferenceSpectrum<T>,
    model: &MixtureModel<T>,
    cloud: &SampleCloud<T>,
    graph: &Graph<T>,
) -> Result<AlignmentReport<T>> {
    let n = cloud.len();
    if graph.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: graph.len() });
    }
    if let Some(v) = result.eigenvectors.iter().find(|v| v.len() != n) {
        return Err(Error::LengthMismatch { expected: n, got: v.len() });
    }
    let ref_values = reference.values();
    let modes = reference.modes();
    let pairs = pair_eigenvalues(&result.eigenvalues, &ref_values);
    let k = pairs.len();

    let tol = T::lit(CLUSTER_TOL);
    let mut clusters = Vec::new();
    let mut separations = Vec::new();
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < ref_values.len() && (ref_values[end] - ref_values[start]).abs() <= tol {
            end += 1;
        }
        let cluster_modes: Option<Vec<ModeShape>> = modes[start..end].iter().cloned().collect();
        let indices: Vec<usize> = (start..end.min(k)).collect();
        if let Some(shapes) = cluster_modes {
            let sqrt_deg: Option<Vec<T>> =
                result.kind.is_normalized().then(|| graph.degrees().iter().map(|d| d.sqrt()).collect());
            let reference_vecs: Vec<Vec<T>> = shapes
                .iter()
                .map(|m| {
                    let mut v = m.eval_cloud(model, cloud);
                    if let Some(s) = &sqrt_deg {
                        v.iter_mut().zip(s).for_each(|(x, &d)| *x *= d);
                    }
                    v
                })
                .collect();
            let computed: Vec<Vec<T>> = indices.iter().map(|&i| result.eigenvectors[i].clone()).collect();
            clusters.push(ClusterAngle {
                indices: indices.clone(),
                reference: ref_values[start],
                angles: principal_angles(&computed, &reference_vecs),
            });
            let mut comps: Vec<usize> = shapes
                .iter()
                .filter(|m| matches!(m, ModeShape::Constant { .. }))
                .map(|m| m.component())
                .collect();
            comps.dedup();
            if comps.len() >= 2 {
                for &i in &indices {
                    let values = shape_values(result, graph, i);
                    separations.push(Separation {
                        index: i,
                        components: (comps[0], comps[1]),
                        score: separation_score(&values, &cloud.labels, comps[0], comps[1]),
                    });
                }
            }
        }
        start = end;
    }
    Ok(AlignmentReport { pairs, clusters, separations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_arithmetic() {
        let computed = [0.0f64, 0.001, 1.30, 2.02, 2.51];
        let reference = [0.0, 0.0, 1.2589, 1.9467, 2.4674];
        let p = pair_eigenvalues(&computed, &reference);
        let expect = [0.0, 0.001 / 1.2589, 0.0411 / 1.2589, 0.0733 / 1.9467, 0.0426 / 2.4674];
        for (pi, e) in p.iter().zip(expect) {
            assert!((pi.relative_error - e).abs() < 1e-12);
        }
        assert!(p[2].relative_error <= 0.033 && p[3].relative_error <= 0.038 && p[4].relative_error <= 0.018);
    }

    #[test]
    fn identical_lists_have_zero_error() {
        let v = [0.0, 0.5, 0.5, 2.0];
        assert!(pair_eigenvalues(&v, &v).iter().all(|p| p.relative_error == 0.0));
    }

    #[test]
    fn constant_groups_hit_the_cap() {
        let labels = [0, 0, 0, 1, 1];
        let u = [2.0, 2.0, 2.0, -1.0, -1.0];
        assert_eq!(separation_score(&u, &labels, 0, 1), SEPARATION_CAP);
        assert_eq!(separation_score(&[1.0; 5], &labels, 0, 1), 0.0);
    }

    #[test]
    fn angles_of_rotated_planes() {
        let a = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let t = 0.3f64;
        let b = vec![vec![1.0, 0.0, 0.0], vec![0.0, t.cos(), t.sin()]];
        let ang = principal_angles(&a, &b);
        assert!(ang[0].abs() < 1e-7 && (ang[1] - t).abs() < 1e-12);
    }

    #[test]
    fn within_fraction_of_piecewise_constant_is_zero() {
        let labels = [0, 0, 1, 1];
        assert_eq!(within_variance_fraction(&[1.0, 1.0, -1.0, -1.0], &labels, 0), 0.0);
        let f = within_variance_fraction(&[1.0f64, -1.0, 0.0, 0.0], &labels, 0);
        assert!((f - 1.0).abs() < 1e-15);
    }
}
