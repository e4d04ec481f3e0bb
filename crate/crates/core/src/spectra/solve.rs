use serde::{Deserialize, Serialize};

use super::lanczos::{lanczos_smallest, LanczosOptions, SymmetricOperator};
use crate::error::{Error, Result};
use crate::graph::{Graph, LaplacianKind};
use crate::linalg::sym_eigen;
use crate::scalar::{dot, Scalar};

/// Graphs up to this size are solved densely under `SolverMethod::Auto`.
pub const DENSE_MAX: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct SolverOptions<T> {
    /// Residual tolerance relative to the operator norm estimate.
    pub tol: T,
    pub method: SolverMethod,
    /// Restart cap; `None` means `50 · k`.
    pub max_restarts: Option<usize>,
    pub basis_size: Option<usize>,
    /// Deflate the known null vector before iterating.
    pub deflate: bool,
    pub seed: u64,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-8),
            method: SolverMethod::Auto,
            max_restarts: None,
            basis_size: None,
            deflate: true,
            seed: 0x5eed,
        }
    }
}

/// Smallest eigenpairs, eigenvectors normalized so `(1/n) Σ u² = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult<T> {
    pub kind: LaplacianKind,
    pub eigenvalues: Vec<T>,
    /// One vector of length `n` per eigenvalue.
    pub eigenvectors: Vec<Vec<T>>,
    /// `‖L u - λ u‖ / ‖u‖` per pair.
    pub residuals: Vec<T>,
    /// Estimate of `‖L‖`; residuals are small relative to it.
    pub operator_norm: T,
    pub method: SolverMethod,
    pub restarts: usize,
    pub matvecs: usize,
}

impl<T: Scalar> SpectralResult<T> {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }
}

struct GraphOperator<'a, T> {
    graph: &'a Graph<T>,
    kind: LaplacianKind,
}

impl<T: Scalar> SymmetricOperator<T> for GraphOperator<'_, T> {
    fn dim(&self) -> usize {
        self.graph.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.graph.apply_into(self.kind, x, y);
    }
}

/// The `k` smallest eigenpairs of the graph Laplacian of the given kind.
pub fn smallest_eigenpairs<T: Scalar>(graph: &Graph<T>, kind: LaplacianKind, k: usize, tol: T) -> Result<SpectralResult<T>> {
    let opts = SolverOptions { tol, ..SolverOptions::default() };
    smallest_eigenpairs_with(graph, kind, k, &opts)
}

pub fn smallest_eigenpairs_with<T: Scalar>(
    graph: &Graph<T>,
    kind: LaplacianKind,
    k: usize,
    opts: &SolverOptions<T>,
) -> Result<SpectralResult<T>> {
    kind.validate()?;
    let n = graph.len();
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("need 0 < k < n, got k={k}, n={n}")));
    }
    if !graph.is_connected() {
        log::warn!("graph has {} connected components at this bandwidth", graph.components());
    }
    let dense = match opts.method {
        SolverMethod::Auto => n <= DENSE_MAX,
        SolverMethod::Dense => true,
        SolverMethod::Lanczos => false,
    };
    #[allow(clippy::type_complexity)]
    let (values, vectors, norm, restarts, matvecs, method): (Vec<T>, Vec<Vec<T>>, T, usize, usize, SolverMethod) = if dense {
        let a = graph.dense_laplacian(kind);
        let (vals, vecs) = sym_eigen(&a, n);
        let norm = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let vectors = (0..k).map(|j| (0..n).map(|i| vecs[i * n + j]).collect()).collect();
        (vals[..k].to_vec(), vectors, norm, 0, 0, SolverMethod::Dense)
    } else {
        let op = GraphOperator { graph, kind };
        let mut locked = Vec::new();
        if opts.deflate {
            let mut z = graph.kernel_vector(kind);
            let nz = dot(&z, &z).sqrt();
            z.iter_mut().for_each(|x| *x /= nz);
            locked.push(z);
        }
        let lopts = LanczosOptions {
            tol: opts.tol,
            max_restarts: opts.max_restarts.unwrap_or(50 * k),
            basis_size: opts.basis_size,
            seed: opts.seed,
        };
        let out = lanczos_smallest(&op, k - locked.len(), &locked, &lopts)?;
        let mut pairs: Vec<(T, Vec<T>)> = locked
            .into_iter()
            .map(|z| {
                let mut lz = vec![T::zero(); n];
                op.apply(&z, &mut lz);
                (dot(&z, &lz), z)
            })
            .chain(out.values.into_iter().zip(out.vectors))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let (values, vectors): (Vec<T>, Vec<Vec<T>>) = pairs.into_iter().unzip();
        (values, vectors, out.norm_estimate, out.restarts, out.matvecs, SolverMethod::Lanczos)
    };

    let scale = T::from_usize_lossy(n).sqrt();
    let mut eigenvectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut lu = vec![T::zero(); n];
    for (lambda, mut v) in values.iter().copied().zip(vectors) {
        graph.apply_into(kind, &v, &mut lu);
        let r = lu
            .iter()
            .zip(&v)
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - lambda * b) * (a - lambda * b))
            .sqrt()
            / dot(&v, &v).sqrt();
        residuals.push(r);
        let nv = dot(&v, &v).sqrt();
        let mut big = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[big].abs() {
                big = i;
            }
        }
        let sign = if v[big] < T::zero() { -T::one() } else { T::one() };
        v.iter_mut().for_each(|x| *x = *x * sign * scale / nv);
        eigenvectors.push(v);
    }
    Ok(SpectralResult {
        kind,
        eigenvalues: values,
        eigenvectors,
        residuals,
        operator_norm: norm,
        method,
        restarts,
        matvecs,
    })
}
