use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelProfile;
use crate::manifolds::{flat_intersection, MixtureModel, Patch};
use crate::quadrature::composite_gauss;
use crate::scalar::Scalar;

use super::functions::SmoothFunctionSpec;
use super::reference::intersection_dim;

/// `Σ_i (σ_i/β_i) ∫ |∇(u/√(α_i ρ_i)) α_i ρ_i|² dVol_i`, or `+∞` when a
/// codimension-one intersection sees mismatched traces of `u/√(αρ)`.
pub fn limit_energy<T: Scalar>(model: &MixtureModel<T>, u: &SmoothFunctionSpec<T>, profile: &KernelProfile<T>) -> Result<T> {
    model.validate()?;
    u.check(model)?;
    if !traces_match(model, u)? {
        return Ok(T::infinity());
    }
    let mut total = T::zero();
    for (i, c) in model.components.iter().enumerate() {
        let ratio = profile.moments(c.patch.dim())?.ratio();
        let integrand = |s: &[T]| -> T {
            let rho = c.alpha * c.density.value(&c.patch, s);
            let grad_rho = c.density.gradient(&c.patch, s);
            let val = u.value(model, i, s);
            let grad = u.gradient(model, i, s);
            let sq = rho.sqrt();
            grad.iter()
                .zip(&grad_rho)
                .map(|(&g, &gr)| {
                    let x = sq * g - val * c.alpha * gr / (T::lit(2.0) * sq);
                    x * x
                })
                .sum::<T>()
        };
        total += ratio * integrate_patch(&c.patch, integrand);
    }
    Ok(total)
}

/// `∫ f dVol` over a patch by composite Gauss–Legendre in local coordinates.
pub fn integrate_patch<T: Scalar, F: Fn(&[T]) -> T>(patch: &Patch<T>, f: F) -> T {
    let (panels, order) = match patch.dim() {
        1 => (64, 10),
        2 => (24, 8),
        _ => (10, 6),
    };
    let rules: Vec<(Vec<T>, Vec<T>)> = match patch {
        Patch::Flat { lengths, .. } => lengths
            .iter()
            .map(|&l| composite_gauss(-l / T::lit(2.0), l / T::lit(2.0), panels, order))
            .collect(),
        Patch::Circle { radius, .. } => vec![composite_gauss(T::zero(), T::lit(2.0) * T::PI() * *radius, panels, order)],
    };
    let d = rules.len();
    let mut idx = vec![0usize; d];
    let mut s = vec![T::zero(); d];
    let mut total = T::zero();
    loop {
        let mut w = T::one();
        for j in 0..d {
            s[j] = rules[j].0[idx[j]];
            w *= rules[j].1[idx[j]];
        }
        total += w * f(&s);
        let mut j = 0;
        while j < d {
            idx[j] += 1;
            if idx[j] < rules[j].0.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == d {
            return total;
        }
    }
}

/// Compares `u/√(αρ)` from both sides at points of every codimension-one
/// intersection.
fn traces_match<T: Scalar>(model: &MixtureModel<T>, u: &SmoothFunctionSpec<T>) -> Result<bool> {
    let dims = model.dims();
    for a in 0..model.len() {
        for b in a + 1..model.len() {
            let Some(d12) = intersection_dim(model, a, b) else { continue };
            if !(dims[a] == dims[b] && dims[a] == d12 + 1) {
                continue;
            }
            let (pa, pb) = (&model.components[a].patch, &model.components[b].patch);
            let x = flat_intersection(pa, pb)?;
            let mut probes = vec![x.point.clone()];
            for e in &x.basis {
                for t in [-0.5, -0.25, -0.1, 0.1, 0.25, 0.5] {
                    let p: Vec<T> = x.point.iter().zip(e).map(|(&p, &ei)| p + T::lit(t) * ei).collect();
                    probes.push(p);
                }
            }
            let tol = T::lit(1e-8);
            for p in probes {
                if pa.distance(&p) > tol || pb.distance(&p) > tol {
                    continue;
                }
                let side = |i: usize, patch: &Patch<T>| {
                    let s = patch.local_coords(&p);
                    let c = &model.components[i];
                    u.value(model, i, &s) / (c.alpha * c.density.value(&c.patch, &s)).sqrt()
                };
                let (va, vb) = (side(a, pa), side(b, pb));
                if (va - vb).abs() > tol * (T::one() + va.abs().max(vb.abs())) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLayerEnergy<T> {
    /// `4π / |ln ε|`
    pub closed_form: T,
    /// Polar quadrature of `∫_{ε ≤ |x| ≤ √ε} |∇w|² dx` with
    /// `w = (ln √ε - ln |x|) / (ln √ε - ln ε)` and finite-difference gradients.
    pub quadrature: T,
}

/// Dirichlet energy of the logarithmic interpolation layer in the plane.
pub fn log_layer_energy<T: Scalar>(epsilon: T) -> Result<LogLayerEnergy<T>> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::Domain(format!("need 0 < ε < 1, got {epsilon}")));
    }
    let ln_eps = epsilon.ln();
    let ln_root = ln_eps / T::lit(2.0);
    let w = |r: T| (ln_root - r.ln()) / (ln_root - ln_eps);
    // substitute r = e^t so the radial weight r dr becomes r² dt
    let (nodes, weights) = composite_gauss(ln_eps, ln_root, 32, 8);
    let mut radial = T::zero();
    for (&t, &wt) in nodes.iter().zip(&weights) {
        let r = t.exp();
        let h = r * T::lit(1e-5);
        let dw = (w(r + h) - w(r - h)) / (T::lit(2.0) * h);
        radial += wt * dw * dw * r * r;
    }
    Ok(LogLayerEnergy {
        closed_form: T::lit(4.0) * T::PI() / ln_eps.abs(),
        quadrature: T::lit(2.0) * T::PI() * radial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_layer_value() {
        let e = log_layer_energy(0.01f64).unwrap();
        assert!((e.closed_form - 2.728_752_708).abs() < 1e-8);
        assert!((e.quadrature - e.closed_form).abs() / e.closed_form < 1e-6);
        assert!(log_layer_energy(1.0f64).is_err());
    }

    #[test]
    fn integrate_box_volume() {
        let p = Patch::<f64>::axis_box(3, vec![0.0; 3], &[0, 1], vec![1.4, 1.0]).unwrap();
        assert!((integrate_patch(&p, |_| 1.0) - 1.4).abs() < 1e-12);
    }
}
