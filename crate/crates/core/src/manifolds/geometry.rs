use serde::{Deserialize, Serialize};

use super::patch::Patch;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::scalar::{dist_sq, dot, Scalar};

/// Singular values of `AᵀB` closer to 1 than this count as shared directions.
const SHARED_TOL: f64 = 1e-10;

/// Affine subspace `point + span(basis)` with orthonormal basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineSubspace<T> {
    pub point: Vec<T>,
    pub basis: Vec<Vec<T>>,
}

impl<T: Scalar> AffineSubspace<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection of `x`.
    pub fn project(&self, x: &[T]) -> Vec<T> {
        let rel: Vec<T> = x.iter().zip(&self.point).map(|(&a, &b)| a - b).collect();
        let mut p = self.point.clone();
        for e in &self.basis {
            let c = dot(&rel, e);
            for (pi, &ei) in p.iter_mut().zip(e) {
                *pi += c * ei;
            }
        }
        p
    }

    pub fn distance(&self, x: &[T]) -> T {
        dist_sq(x, &self.project(x)).sqrt()
    }
}

fn flat_parts<T: Scalar>(p: &Patch<T>) -> Result<(&[T], &[Vec<T>])> {
    match p {
        Patch::Flat { origin, frame, .. } => Ok((origin, frame)),
        Patch::Circle { .. } => Err(Error::Unsupported("principal angles are defined for flat pieces only".into())),
    }
}

/// Row-major `k × l` matrix `AᵀB`.
fn cross_gram<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<T> {
    let mut m = Vec::with_capacity(a.len() * b.len());
    for u in a {
        for v in b {
            m.push(dot(u, v));
        }
    }
    m
}

/// Singular values of `AᵀB` with the left singular vectors (in `A`
/// coordinates) when `A` is the smaller frame.
fn cross_svd<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let (k, l) = (a.len(), b.len());
    let m = cross_gram(a, b);
    let mut g = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            let mut s = T::zero();
            for c in 0..l {
                s += m[i * l + c] * m[j * l + c];
            }
            g[i * k + j] = s;
        }
    }
    let (vals, vecs) = sym_eigen(&g, k);
    let sv = vals.iter().map(|&v| v.max(T::zero()).sqrt()).collect();
    let cols = (0..k).map(|j| (0..k).map(|i| vecs[i * k + j]).collect()).collect();
    (sv, cols)
}

/// Smallest principal angle between the tangent spaces of two flat pieces
/// after removing their shared directions, in `(0, π/2]`.
pub fn principal_angle<T: Scalar>(a: &Patch<T>, b: &Patch<T>) -> Result<T> {
    let (_, fa) = flat_parts(a)?;
    let (_, fb) = flat_parts(b)?;
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::InvalidModel("patches live in different ambient spaces".into()));
    }
    let (small, large) = if fa.len() <= fb.len() { (fa, fb) } else { (fb, fa) };
    let (sv, _) = cross_svd(small, large);
    let tol = T::lit(SHARED_TOL).max(T::epsilon().sqrt());
    let best = sv
        .iter()
        .copied()
        .filter(|&s| s < T::one() - tol)
        .fold(None, |acc: Option<T>, s| Some(acc.map_or(s, |m| m.max(s))));
    match best {
        Some(s) => Ok(s.min(T::one()).acos()),
        None => Err(Error::DegenerateIntersection(
            "tangent space of one piece contains the other".into(),
        )),
    }
}

/// Intersection of the affine spans of two flat pieces.
pub fn flat_intersection<T: Scalar>(a: &Patch<T>, b: &Patch<T>) -> Result<AffineSubspace<T>> {
    let (oa, fa) = flat_parts(a)?;
    let (ob, fb) = flat_parts(b)?;
    let (k, l) = (fa.len(), fb.len());
    let m = k + l;
    // columns of [A, -B]
    let cols: Vec<Vec<T>> = fa
        .iter()
        .cloned()
        .chain(fb.iter().map(|v| v.iter().map(|&x| -x).collect()))
        .collect();
    let rhs: Vec<T> = ob.iter().zip(oa).map(|(&x, &y)| x - y).collect();
    let mut g = vec![T::zero(); m * m];
    for i in 0..m {
        for j in 0..m {
            g[i * m + j] = dot(&cols[i], &cols[j]);
        }
    }
    let r: Vec<T> = cols.iter().map(|c| dot(c, &rhs)).collect();
    let (vals, vecs) = sym_eigen(&g, m);
    let cut = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
    let mut z = vec![T::zero(); m];
    for j in 0..m {
        if vals[j] > cut {
            let c = (0..m).map(|i| vecs[i * m + j] * r[i]).sum::<T>() / vals[j];
            for i in 0..m {
                z[i] += c * vecs[i * m + j];
            }
        }
    }
    let mut point = oa.to_vec();
    for (s, e) in z[..k].iter().zip(fa) {
        for (p, &ei) in point.iter_mut().zip(e) {
            *p += *s * ei;
        }
    }
    let mut other = ob.to_vec();
    for (t, e) in z[k..].iter().zip(fb) {
        for (p, &ei) in other.iter_mut().zip(e) {
            *p += *t * ei;
        }
    }
    let gap = dist_sq(&point, &other).sqrt();
    let scale = T::one() + dot(&rhs, &rhs).sqrt();
    if gap > T::lit(1e-9).max(T::epsilon().sqrt()) * scale {
        return Err(Error::DegenerateIntersection(format!("affine spans miss each other by {gap}")));
    }

    let (small, large) = if k <= l { (fa, fb) } else { (fb, fa) };
    let (sv, left) = cross_svd(small, large);
    let tol = T::lit(SHARED_TOL).max(T::epsilon().sqrt());
    let basis = sv
        .iter()
        .zip(&left)
        .filter(|(&s, _)| s >= T::one() - tol)
        .map(|(_, w)| {
            let mut v = vec![T::zero(); a.ambient_dim()];
            for (c, e) in w.iter().zip(small) {
                for (vi, &ei) in v.iter_mut().zip(e) {
                    *vi += *c * ei;
                }
            }
            v
        })
        .collect();
    Ok(AffineSubspace { point, basis })
}

/// Lower bandwidth scale: `√(ln ln n / n)` for `d = 1`, `(ln n / n)^{1/d}` otherwise.
pub fn ell_n<T: Scalar>(n: usize, d: usize) -> T {
    assert!(n >= 3 && d >= 1);
    let nf = T::from_usize_lossy(n);
    if d == 1 {
        (nf.ln().ln() / nf).sqrt()
    } else {
        (nf.ln() / nf).powf(T::one() / T::from_usize_lossy(d))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandwidthReport<T> {
    pub ok: bool,
    pub ell: T,
    /// `epsilon / ell`.
    pub ratio: T,
}

/// Checks `ell_n(n, d_max) < epsilon < 1`.
pub fn bandwidth_ok<T: Scalar>(n: usize, d_max: usize, epsilon: T) -> BandwidthReport<T> {
    let ell = ell_n::<T>(n, d_max);
    BandwidthReport {
        ok: ell < epsilon && epsilon < T::one(),
        ell,
        ratio: epsilon / ell,
    }
}

/// The bandwidth rule `c · ell_n(n, d)^γ`.
pub fn bandwidth_rule<T: Scalar>(n: usize, d: usize, scale: T, exponent: T) -> T {
    scale * ell_n::<T>(n, d).powf(exponent)
}
