use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::build::Graph;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    /// `(2/ε²)(u(x) - (1/n) Σ_y w u(y) / √(deg(x) deg(y)))`
    NormalizedSym,
    /// `(2/(nε²)) Σ_y w (u(x) - u(y))`
    Unnormalized,
    /// The unnormalized operator multiplied by `ε^{-d}`.
    UnnormalizedScaled(u32),
}

impl LaplacianKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::UnnormalizedScaled(0) => Err(Error::Domain("scaling exponent must be at least 1".into())),
            _ => Ok(()),
        }
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self, Self::NormalizedSym)
    }
}

impl FromStr for LaplacianKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.trim() {
            "normalized" => Self::NormalizedSym,
            "unnormalized" => Self::Unnormalized,
            other => {
                let d = other
                    .strip_prefix("unnormalized-scaled:")
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::Domain(format!("unknown Laplacian kind '{other}'")))?;
                Self::UnnormalizedScaled(d)
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl fmt::Display for LaplacianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NormalizedSym => f.write_str("normalized"),
            Self::Unnormalized => f.write_str("unnormalized"),
            Self::UnnormalizedScaled(d) => write!(f, "unnormalized-scaled:{d}"),
        }
    }
}

fn check_len<T>(g: &Graph<T>, u: &[T]) -> Result<()> {
    if u.len() != g.n {
        return Err(Error::LengthMismatch { expected: g.n, got: u.len() });
    }
    Ok(())
}

/// Per-row sums reduced in row order, so the total is independent of how
/// rayon splits the rows.
fn ordered_sum<T: Scalar, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> T {
    let parts: Vec<T> = (0..n).into_par_iter().map(f).collect();
    parts.into_iter().fold(T::zero(), |a, b| a + b)
}

impl<T: Scalar> Graph<T> {
    /// `(1/(n²ε²)) Σ_{x,y} w (u(x)/√deg(x) - u(y)/√deg(y))²`
    pub fn dirichlet_normalized(&self, u: &[T]) -> Result<T> {
        check_len(self, u)?;
        let v: Vec<T> = u.iter().zip(&self.deg).map(|(&a, &d)| a / d.sqrt()).collect();
        Ok(self.quadratic_differences(&v))
    }

    /// `(1/(n²ε²)) Σ_{x,y} w (u(x) - u(y))²`
    pub fn dirichlet_unnormalized(&self, u: &[T]) -> Result<T> {
        check_len(self, u)?;
        Ok(self.quadratic_differences(u))
    }

    /// The energy whose operator is `kind`.
    pub fn energy(&self, kind: LaplacianKind, u: &[T]) -> Result<T> {
        match kind {
            LaplacianKind::NormalizedSym => self.dirichlet_normalized(u),
            LaplacianKind::Unnormalized => self.dirichlet_unnormalized(u),
            LaplacianKind::UnnormalizedScaled(d) => {
                Ok(self.dirichlet_unnormalized(u)? * self.epsilon.powi(-(d as i32)))
            }
        }
    }

    fn quadratic_differences(&self, v: &[T]) -> T {
        let s = ordered_sum(self.n, |i| {
            let (cols, ws) = self.row(i);
            cols.iter().zip(ws).fold(T::zero(), |acc, (&j, &w)| {
                let d = v[i] - v[j as usize];
                acc + w * d * d
            })
        });
        let nf = T::from_usize_lossy(self.n);
        s / (nf * nf * self.epsilon * self.epsilon)
    }

    /// `L u` for the given kind.
    pub fn apply_laplacian(&self, kind: LaplacianKind, u: &[T]) -> Result<Vec<T>> {
        check_len(self, u)?;
        kind.validate()?;
        let mut out = vec![T::zero(); self.n];
        self.apply_into(kind, u, &mut out);
        Ok(out)
    }

    /// `out = L u`; lengths are the caller's responsibility.
    pub fn apply_into(&self, kind: LaplacianKind, u: &[T], out: &mut [T]) {
        let nf = T::from_usize_lossy(self.n);
        let eps2 = self.epsilon * self.epsilon;
        match kind {
            LaplacianKind::NormalizedSym => {
                let scale = T::lit(2.0) / eps2;
                out.par_iter_mut().enumerate().for_each(|(i, o)| {
                    let (cols, ws) = self.row(i);
                    let s = cols
                        .iter()
                        .zip(ws)
                        .fold(T::zero(), |acc, (&j, &w)| acc + w * u[j as usize] / self.deg[j as usize].sqrt());
                    *o = scale * (u[i] - s / (nf * self.deg[i].sqrt()));
                });
            }
            LaplacianKind::Unnormalized | LaplacianKind::UnnormalizedScaled(_) => {
                let mut scale = T::lit(2.0) / (nf * eps2);
                if let LaplacianKind::UnnormalizedScaled(d) = kind {
                    scale = scale * self.epsilon.powi(-(d as i32));
                }
                out.par_iter_mut().enumerate().for_each(|(i, o)| {
                    let (cols, ws) = self.row(i);
                    let s = cols
                        .iter()
                        .zip(ws)
                        .fold(T::zero(), |acc, (&j, &w)| acc + w * (u[i] - u[j as usize]));
                    *o = scale * s;
                });
            }
        }
    }

    /// Known null vector of the operator: `√deg` for the normalized kind,
    /// constants otherwise.
    pub fn kernel_vector(&self, kind: LaplacianKind) -> Vec<T> {
        match kind {
            LaplacianKind::NormalizedSym => self.deg.iter().map(|d| d.sqrt()).collect(),
            _ => vec![T::one(); self.n],
        }
    }

    /// Row-major dense matrix of the operator.
    pub fn dense_laplacian(&self, kind: LaplacianKind) -> Vec<T> {
        let n = self.n;
        let mut a = vec![T::zero(); n * n];
        let mut e = vec![T::zero(); n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            self.apply_into(kind, &e, &mut col);
            for i in 0..n {
                a[i * n + j] = col[i];
            }
            e[j] = T::zero();
        }
        // symmetrize away rounding
        for i in 0..n {
            for j in 0..i {
                let m = (a[i * n + j] + a[j * n + i]) / T::lit(2.0);
                a[i * n + j] = m;
                a[j * n + i] = m;
            }
        }
        a
    }
}

/// `(1/n) Σ u v`, the inner product of the empirical measure.
pub fn empirical_inner<T: Scalar>(u: &[T], v: &[T]) -> T {
    let n = T::from_usize_lossy(u.len());
    u.iter().zip(v).fold(T::zero(), |a, (&x, &y)| a + x * y) / n
}

#[cfg(test)]
mod tests {
    use super::super::build::{build_graph_from_points, NeighborSearch};
    use super::*;
    use crate::kernels::KernelProfile;

    fn two_point() -> Graph<f64> {
        build_graph_from_points(&[0.0, 0.5], 1, 1.0, &KernelProfile::Indicator, NeighborSearch::Auto).unwrap()
    }

    #[test]
    fn two_point_energies() {
        let g = two_point();
        assert!((g.dirichlet_normalized(&[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((g.dirichlet_unnormalized(&[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_point_unnormalized_operator() {
        let g = two_point();
        let lu = g.apply_laplacian(LaplacianKind::Unnormalized, &[0.0, 1.0]).unwrap();
        assert_eq!(lu, vec![-1.0, 1.0]);
    }

    #[test]
    fn kind_keys() {
        for key in ["normalized", "unnormalized", "unnormalized-scaled:2"] {
            let k: LaplacianKind = key.parse().unwrap();
            assert_eq!(k.to_string(), key);
        }
        assert!("unnormalized-scaled:0".parse::<LaplacianKind>().is_err());
        assert!("random-walk".parse::<LaplacianKind>().is_err());
    }

    #[test]
    fn wrong_length_rejected() {
        let g = two_point();
        assert!(matches!(g.dirichlet_normalized(&[1.0]), Err(Error::LengthMismatch { .. })));
    }
}
