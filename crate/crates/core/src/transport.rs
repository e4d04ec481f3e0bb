//! TL² distances between function-measure pairs on point clouds.

use serde::{Deserialize, Serialize};

use crate::continuum::SmoothFunctionSpec;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::manifolds::{MixtureModel, SampleCloud};
use crate::scalar::{dist_sq, dot, Scalar};

/// Largest atom count accepted by [`tl2_exact`].
pub const ASSIGNMENT_MAX: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coupling {
    /// `assignment[i]` is the atom of the second measure matched to atom `i`.
    Assignment { assignment: Vec<usize> },
    IdentityProxy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tl2Result<T> {
    pub distance: T,
    pub coupling: Coupling,
    /// Mean squared spatial displacement under the coupling.
    pub spatial: T,
    /// Mean squared value difference under the coupling.
    pub value: T,
}

/// Exact TL² distance between two uniform empirical measures with the same
/// number of atoms, points stored row-major with stride `dim`.
pub fn tl2_exact<T: Scalar>(points_a: &[T], u_a: &[T], points_b: &[T], u_b: &[T], dim: usize) -> Result<Tl2Result<T>> {
    let m = u_a.len();
    if u_b.len() != m {
        return Err(Error::Unsupported(format!(
            "transport between {m} and {} atoms needs a general plan",
            u_b.len()
        )));
    }
    if points_a.len() != m * dim {
        return Err(Error::LengthMismatch { expected: m * dim, got: points_a.len() });
    }
    if points_b.len() != m * dim {
        return Err(Error::LengthMismatch { expected: m * dim, got: points_b.len() });
    }
    if m > ASSIGNMENT_MAX {
        return Err(Error::Unsupported(format!("{m} atoms exceed the assignment bound {ASSIGNMENT_MAX}")));
    }
    if m == 0 {
        return Err(Error::EmptyCloud);
    }
    let spatial_cost = |i: usize, j: usize| dist_sq(&points_a[i * dim..(i + 1) * dim], &points_b[j * dim..(j + 1) * dim]);
    let value_cost = |i: usize, j: usize| (u_a[i] - u_b[j]) * (u_a[i] - u_b[j]);
    let assignment = hungarian(m, |i, j| spatial_cost(i, j) + value_cost(i, j));
    let mf = T::from_usize_lossy(m);
    let spatial = assignment.iter().enumerate().map(|(i, &j)| spatial_cost(i, j)).sum::<T>() / mf;
    let value = assignment.iter().enumerate().map(|(i, &j)| value_cost(i, j)).sum::<T>() / mf;
    Ok(Tl2Result { distance: (spatial + value).sqrt(), coupling: Coupling::Assignment { assignment }, spatial, value })
}

/// Minimum-cost perfect matching of an `m × m` cost matrix by the
/// shortest augmenting path method with potentials, `O(m³)`.
fn hungarian<T: Scalar, C: Fn(usize, usize) -> T>(m: usize, cost: C) -> Vec<usize> {
    // 1-based arrays; column 0 is a sentinel
    let inf = T::infinity();
    let mut u = vec![T::zero(); m + 1];
    let mut v = vec![T::zero(); m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; m];
    for j in 1..=m {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}

/// `√((1/n) Σ_i |u_n(x_i) - u(x_i)|²)`, the TL² cost of the identity
/// coupling between the empirical measure and `μ`.
pub fn tl2_proxy<T: Scalar>(model: &MixtureModel<T>, cloud: &SampleCloud<T>, values: &[T], u: &SmoothFunctionSpec<T>) -> Result<T> {
    if values.len() != cloud.len() {
        return Err(Error::LengthMismatch { expected: cloud.len(), got: values.len() });
    }
    u.check(model)?;
    let reference: Vec<T> = (0..cloud.len())
        .map(|i| {
            let c = cloud.labels[i];
            let d = model.components[c].patch.dim();
            u.value(model, c, &cloud.local_coords(i)[..d])
        })
        .collect();
    Ok(tl2_proxy_values(values, &reference))
}

/// Identity-coupling TL² cost between two value vectors on the same cloud.
pub fn tl2_proxy_values<T: Scalar>(values: &[T], reference: &[T]) -> T {
    let n = values.len().min(reference.len());
    if n == 0 {
        return T::zero();
    }
    let s: T = values.iter().zip(reference).map(|(&a, &b)| (a - b) * (a - b)).sum();
    (s / T::from_usize_lossy(n)).sqrt()
}

/// Flips `u` so that `⟨u, reference⟩ ≥ 0`.
pub fn align_sign<T: Scalar>(u: &[T], reference: &[T]) -> Vec<T> {
    if dot(u, reference) < T::zero() {
        u.iter().map(|&x| -x).collect()
    } else {
        u.to_vec()
    }
}

/// Rotates the span of `computed` onto `reference` (same count) by the
/// orthogonal matrix maximizing `Σ_j ⟨(computed Q)_j, reference_j⟩`.
pub fn procrustes_align<T: Scalar>(computed: &[Vec<T>], reference: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let k = computed.len();
    if reference.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: reference.len() });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if k == 1 {
        return Ok(vec![align_sign(&computed[0], &reference[0])]);
    }
    let n = computed[0].len();
    // M_ij = <c_i, r_j>; Q = M (MᵀM)^{-1/2}
    let m: Vec<T> = (0..k * k).map(|idx| dot(&computed[idx / k], &reference[idx % k])).collect();
    let mut mtm = vec![T::zero(); k * k];
    for a in 0..k {
        for b in 0..k {
            mtm[a * k + b] = (0..k).map(|i| m[i * k + a] * m[i * k + b]).sum();
        }
    }
    let (vals, vecs) = sym_eigen(&mtm, k);
    let top = vals.iter().copied().fold(T::zero(), T::max);
    if vals.iter().any(|&s| s <= top * T::lit(1e-24)) {
        return Err(Error::DegenerateIntersection("computed and reference spans are orthogonal in some direction".into()));
    }
    let mut inv_sqrt = vec![T::zero(); k * k];
    for a in 0..k {
        for b in 0..k {
            inv_sqrt[a * k + b] = (0..k).map(|l| vecs[a * k + l] * vecs[b * k + l] / vals[l].sqrt()).sum();
        }
    }
    let mut q = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            q[i * k + j] = (0..k).map(|l| m[i * k + l] * inv_sqrt[l * k + j]).sum();
        }
    }
    Ok((0..k)
        .map(|j| {
            let mut out = vec![T::zero(); n];
            for i in 0..k {
                let c = q[i * k + j];
                for (o, &x) in out.iter_mut().zip(&computed[i]) {
                    *o += c * x;
                }
            }
            out
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swapped_points_cost_nothing() {
        let a = [0.0, 0.0, 1.0, 1.0];
        let b = [1.0, 1.0, 0.0, 0.0];
        let r = tl2_exact(&a, &[0.5, 0.5], &b, &[0.5, 0.5], 2).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.coupling, Coupling::Assignment { assignment: vec![1, 0] });
    }

    #[test]
    fn unequal_counts_rejected() {
        let r = tl2_exact(&[0.0, 1.0], &[0.0, 0.0], &[0.0], &[0.0], 1);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn shift_proxy() {
        let v = [1.0, 2.0, 3.0];
        let w = [1.5, 2.5, 3.5];
        assert!((tl2_proxy_values(&w, &v) - 0.5f64).abs() < 1e-15);
    }

    #[test]
    fn procrustes_undoes_rotation() {
        let r = vec![vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]];
        let t = 0.7f64;
        let c = vec![
            r[0].iter().zip(&r[1]).map(|(&x, &y)| t.cos() * x + t.sin() * y).collect::<Vec<_>>(),
            r[0].iter().zip(&r[1]).map(|(&x, &y)| -t.sin() * x + t.cos() * y).collect::<Vec<_>>(),
        ];
        let back = procrustes_align(&c, &r).unwrap();
        for (a, b) in back.iter().zip(&r) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
