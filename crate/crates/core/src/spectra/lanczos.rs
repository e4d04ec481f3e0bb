//! Thick-restart Lanczos (Krylov–Schur form) for the smallest eigenpairs of
//! a symmetric operator, with full reorthogonalization and optional
//! deflation of known eigenvectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::scalar::{dot, Scalar};

/// A symmetric linear operator on `R^dim`.
pub trait SymmetricOperator<T>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
}

/// Row-major dense symmetric matrix as an operator.
pub struct DenseOperator<'a, T> {
    pub n: usize,
    pub data: &'a [T],
}

impl<T: Scalar> SymmetricOperator<T> for DenseOperator<'_, T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(&self.data[i * self.n..(i + 1) * self.n], x);
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosOptions<T> {
    /// Convergence when `β |y_last| ≤ tol · ‖A‖_est`.
    pub tol: T,
    pub max_restarts: usize,
    /// Krylov basis size; `None` picks `max(2 nev + 20, nev + 50)`.
    pub basis_size: Option<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct LanczosOutput<T> {
    pub values: Vec<T>,
    /// Unit Euclidean norm.
    pub vectors: Vec<Vec<T>>,
    pub restarts: usize,
    pub matvecs: usize,
    pub norm_estimate: T,
}

/// Orthogonalizes `w` against `locked` and `basis` (classical Gram–Schmidt
/// applied twice) and returns the coefficients against `basis`.
fn orthogonalize<T: Scalar>(w: &mut [T], locked: &[Vec<T>], basis: &[Vec<T>]) -> Vec<T> {
    let mut coeffs = vec![T::zero(); basis.len()];
    for _ in 0..2 {
        let lc: Vec<T> = locked.iter().map(|z| dot(z, w)).collect();
        let bc: Vec<T> = basis.iter().map(|v| dot(v, w)).collect();
        for (z, &c) in locked.iter().zip(&lc) {
            for (wi, &zi) in w.iter_mut().zip(z) {
                *wi -= c * zi;
            }
        }
        for (v, &c) in basis.iter().zip(&bc) {
            for (wi, &vi) in w.iter_mut().zip(v) {
                *wi -= c * vi;
            }
        }
        for (a, b) in coeffs.iter_mut().zip(bc) {
            *a += b;
        }
    }
    coeffs
}

fn random_unit<T: Scalar>(n: usize, rng: &mut ChaCha8Rng, locked: &[Vec<T>], basis: &[Vec<T>]) -> Option<Vec<T>> {
    for _ in 0..8 {
        let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.gen::<f64>() - 0.5)).collect();
        orthogonalize(&mut v, locked, basis);
        let nv = dot(&v, &v).sqrt();
        if nv > T::lit(1e-8) {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// The `nev` smallest eigenpairs of `op` restricted to the orthogonal
/// complement of `locked` (orthonormal vectors).
pub fn lanczos_smallest<T: Scalar, A: SymmetricOperator<T>>(
    op: &A,
    nev: usize,
    locked: &[Vec<T>],
    opts: &LanczosOptions<T>,
) -> Result<LanczosOutput<T>> {
    let n = op.dim();
    let avail = n.saturating_sub(locked.len());
    if nev == 0 {
        return Ok(LanczosOutput { values: vec![], vectors: vec![], restarts: 0, matvecs: 0, norm_estimate: T::zero() });
    }
    if nev > avail {
        return Err(Error::Domain(format!("asked for {nev} eigenpairs of a {avail}-dimensional space")));
    }
    let m = opts
        .basis_size
        .unwrap_or_else(|| (2 * nev + 20).max(nev + 50))
        .max(nev + 2)
        .min(avail);
    let keep = (nev + (m - nev) / 2).min(m - 1).max(nev.min(m - 1));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    basis.push(random_unit(n, &mut rng, locked, &[]).ok_or_else(|| Error::Domain("no start vector".into()))?);
    let mut h = vec![T::zero(); m * m];
    let mut start = 0;
    let mut norm_est = T::zero();
    let mut matvecs = 0;
    let mut w = vec![T::zero(); n];
    let tiny = T::epsilon() * T::lit(1e3);
    let mut last_res = vec![f64::INFINITY; nev];

    for restart in 0..=opts.max_restarts {
        let mut beta = T::zero();
        let mut residual: Option<Vec<T>> = None;
        for j in start..m {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let coeffs = orthogonalize(&mut w, locked, &basis[..=j]);
            for (i, &c) in coeffs.iter().enumerate() {
                h[i * m + j] = c;
                h[j * m + i] = c;
            }
            beta = dot(&w, &w).sqrt();
            norm_est = norm_est.max(coeffs[j].abs() + beta);
            let breakdown = beta <= tiny * norm_est.max(T::one());
            if j + 1 < m {
                let next = if breakdown {
                    beta = T::zero();
                    match random_unit(n, &mut rng, locked, &basis) {
                        Some(v) => v,
                        None => break,
                    }
                } else {
                    w.iter().map(|&x| x / beta).collect()
                };
                h[(j + 1) * m + j] = beta;
                h[j * m + j + 1] = beta;
                basis.push(next);
            } else {
                if breakdown {
                    beta = T::zero();
                }
                residual = Some(w.clone());
            }
        }
        let dim = basis.len().min(m);
        let hk: Vec<T> = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| h[i * m + j]).collect();
        let (theta, y) = sym_eigen(&hk, dim);
        for t in &theta {
            norm_est = norm_est.max(t.abs());
        }
        let thresh = opts.tol * norm_est.max(T::epsilon());
        let res: Vec<T> = (0..dim).map(|i| beta * y[(dim - 1) * dim + i].abs()).collect();
        let take = nev.min(dim);
        last_res = res[..take].iter().map(|r| r.as_f64()).collect();
        let converged = dim < m || res[..take].iter().all(|&r| r <= thresh);
        if converged || restart == opts.max_restarts {
            if !converged {
                let worst = last_res.iter().cloned().fold(0.0, f64::max);
                return Err(Error::NoConvergence { restarts: restart, worst_residual: worst, residuals: last_res });
            }
            let vectors = ritz_vectors(&basis[..dim], &y, dim, take);
            return Ok(LanczosOutput {
                values: theta[..take].to_vec(),
                vectors,
                restarts: restart,
                matvecs,
                norm_estimate: norm_est,
            });
        }
        // thick restart: keep the `keep` smallest Ritz pairs
        let mut new_basis = ritz_vectors(&basis[..dim], &y, dim, keep);
        let f = residual.expect("full basis has a residual");
        h.iter_mut().for_each(|x| *x = T::zero());
        for i in 0..keep {
            h[i * m + i] = theta[i];
            let b = beta * y[(dim - 1) * dim + i];
            h[keep * m + i] = b;
            h[i * m + keep] = b;
        }
        let next = if beta > T::zero() {
            let mut v: Vec<T> = f.iter().map(|&x| x / beta).collect();
            // re-project to keep the restarted basis orthonormal to working precision
            orthogonalize(&mut v, locked, &new_basis);
            let nv = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            v
        } else {
            random_unit(n, &mut rng, locked, &new_basis).ok_or_else(|| Error::Domain("basis exhausted".into()))?
        };
        new_basis.push(next);
        basis = new_basis;
        start = keep;
    }
    unreachable!("loop returns on the last restart")
}

fn ritz_vectors<T: Scalar>(basis: &[Vec<T>], y: &[T], dim: usize, count: usize) -> Vec<Vec<T>> {
    let n = basis[0].len();
    (0..count)
        .map(|c| {
            let mut x = vec![T::zero(); n];
            for (r, v) in basis.iter().enumerate() {
                let coef = y[r * dim + c];
                for (xi, &vi) in x.iter_mut().zip(v) {
                    *xi += coef * vi;
                }
            }
            let nx = dot(&x, &x).sqrt();
            x.iter_mut().for_each(|v| *v /= nx);
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diagonal(Vec<f64>);

    impl SymmetricOperator<f64> for Diagonal {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.0) {
                *yi = xi * d;
            }
        }
    }

    fn opts() -> LanczosOptions<f64> {
        LanczosOptions { tol: 1e-10, max_restarts: 500, basis_size: Some(30), seed: 1 }
    }

    #[test]
    fn diagonal_smallest_values() {
        let d: Vec<f64> = (0..400).map(|i| (i as f64 + 1.0).powf(1.5)).collect();
        let out = lanczos_smallest(&Diagonal(d.clone()), 5, &[], &opts()).unwrap();
        for (i, v) in out.values.iter().enumerate() {
            assert!((v - d[i]).abs() < 1e-8 * d[399], "{v} vs {}", d[i]);
        }
        assert!(out.restarts > 0);
    }

    #[test]
    fn deflation_skips_locked_vector() {
        let d: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mut e0 = vec![0.0; 100];
        e0[0] = 1.0;
        let out = lanczos_smallest(&Diagonal(d), 3, &[e0], &opts()).unwrap();
        assert!((out.values[0] - 1.0).abs() < 1e-9);
        assert!((out.values[2] - 3.0).abs() < 1e-9);
        assert!(out.vectors[0][0].abs() < 1e-12);
    }

    #[test]
    fn small_space_is_exhausted_exactly() {
        let d = vec![3.0, 1.0, 2.0];
        let out = lanczos_smallest(&Diagonal(d), 2, &[], &opts()).unwrap();
        assert!((out.values[0] - 1.0).abs() < 1e-12 && (out.values[1] - 2.0).abs() < 1e-12);
    }
}
