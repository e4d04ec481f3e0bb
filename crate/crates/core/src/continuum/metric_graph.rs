//! Finite-difference reference for unions of segments meeting at points,
//! where the limit problem couples the pieces through continuity of
//! `u/√(αρ)` and a zero total weighted flux at each junction.

use crate::error::{Error, Result};
use crate::kernels::KernelProfile;
use crate::linalg::{sym_eigenvalues, tridiagonal_eigenvalues};
use crate::manifolds::{flat_intersection, MixtureModel, Patch};
use crate::scalar::Scalar;

use super::reference::{LimitKind, ReferenceEntry, ReferenceSpectrum, Source};

/// Smallest `k` eigenvalues of `-(σ/β) w⁻¹ (w v')' = λ v` with `w = (αρ)²`
/// on the metric graph formed by the (one-dimensional, flat) components,
/// using P1 elements with lumped mass on a grid of spacing at most `h`.
pub fn metric_graph_spectrum_fd<T: Scalar>(
    model: &MixtureModel<T>,
    profile: &KernelProfile<T>,
    h: T,
    k: usize,
) -> Result<ReferenceSpectrum<T>> {
    model.validate()?;
    if !(h > T::zero()) {
        return Err(Error::Domain("grid spacing must be positive".into()));
    }
    for (i, c) in model.components.iter().enumerate() {
        if !(c.patch.is_flat() && c.patch.dim() == 1) {
            return Err(Error::Unsupported(format!("component {i} is not a segment")));
        }
    }
    let factor = profile.moments(1)?.ratio();
    let tol = T::lit(1e-9);

    // breakpoints (local coordinate, junction id) per segment
    let mut breaks: Vec<Vec<(T, Option<usize>)>> = model
        .components
        .iter()
        .map(|c| {
            let half = segment_length(&c.patch) / T::lit(2.0);
            vec![(-half, None), (half, None)]
        })
        .collect();
    let mut junctions = 0;
    for a in 0..model.len() {
        for b in a + 1..model.len() {
            let (pa, pb) = (&model.components[a].patch, &model.components[b].patch);
            let Ok(x) = flat_intersection(pa, pb) else { continue };
            if x.dim() > 0 {
                return Err(Error::Unsupported(format!("segments {a} and {b} overlap")));
            }
            if pa.distance(&x.point) > tol || pb.distance(&x.point) > tol {
                continue;
            }
            breaks[a].push((pa.local_coords(&x.point)[0], Some(junctions)));
            breaks[b].push((pb.local_coords(&x.point)[0], Some(junctions)));
            junctions += 1;
        }
    }

    // global node numbering: junction nodes first, then per-segment nodes
    let mut next = junctions;
    let mut stiff: Vec<(usize, usize, T)> = Vec::new();
    let mut mass_diag: Vec<T> = vec![T::zero(); junctions];
    let mut shortest = T::infinity();
    for (i, c) in model.components.iter().enumerate() {
        let mut pts = breaks[i].clone();
        pts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
        // merge coincident breakpoints (junction at an endpoint)
        let mut merged: Vec<(T, Option<usize>)> = Vec::new();
        for p in pts {
            match merged.last_mut() {
                Some(last) if (p.0 - last.0).abs() <= tol => {
                    if last.1.is_none() {
                        last.1 = p.1;
                    } else if p.1.is_some() && p.1 != last.1 {
                        return Err(Error::Unsupported("two junctions at one point of a segment".into()));
                    }
                }
                _ => merged.push(p),
            }
        }
        let alpha = c.alpha;
        let mut prev_node: Option<usize> = None;
        let node_of = |b: &(T, Option<usize>), next: &mut usize, mass: &mut Vec<T>| -> usize {
            match b.1 {
                Some(j) => j,
                None => {
                    *next += 1;
                    mass.push(T::zero());
                    *next - 1
                }
            }
        };
        for w in merged.windows(2) {
            let (s0, s1) = (w[0].0, w[1].0);
            let len = s1 - s0;
            shortest = shortest.min(len);
            let cells = (len / h).ceil().to_usize().unwrap_or(1).max(1);
            let hc = len / T::from_usize_lossy(cells);
            let start = match prev_node {
                Some(p) => p,
                None => node_of(&w[0], &mut next, &mut mass_diag),
            };
            let mut left = start;
            for cidx in 0..cells {
                let right = if cidx + 1 == cells {
                    node_of(&w[1], &mut next, &mut mass_diag)
                } else {
                    next += 1;
                    mass_diag.push(T::zero());
                    next - 1
                };
                let mid = s0 + hc * (T::from_usize_lossy(cidx) + T::lit(0.5));
                let rho = alpha * c.density.value(&c.patch, &[mid]);
                let wgt = rho * rho;
                let kc = factor * wgt / hc;
                stiff.push((left, left, kc));
                stiff.push((right, right, kc));
                stiff.push((left, right, -kc));
                let mc = wgt * hc / T::lit(2.0);
                mass_diag[left] += mc;
                mass_diag[right] += mc;
                left = right;
            }
            prev_node = Some(left);
        }
    }
    if h > shortest / T::lit(10.0) {
        return Err(Error::Resolution(format!(
            "spacing {h} exceeds a tenth of the shortest edge ({shortest})"
        )));
    }
    let n = next;
    if k > n {
        return Err(Error::Domain(format!("asked for {k} eigenvalues of a {n}-node grid")));
    }
    let inv_sqrt: Vec<T> = mass_diag.iter().map(|m| T::one() / m.sqrt()).collect();
    let values = if junctions == 0 && model.len() == 1 {
        // a single path numbered consecutively: tridiagonal
        let mut diag = vec![T::zero(); n];
        let mut off = vec![T::zero(); n - 1];
        for &(a, b, v) in &stiff {
            let s = v * inv_sqrt[a] * inv_sqrt[b];
            if a == b {
                diag[a] += s;
            } else {
                off[a.min(b)] += s;
            }
        }
        tridiagonal_eigenvalues(&diag, &off)
    } else {
        let mut a = vec![T::zero(); n * n];
        for &(i, j, v) in &stiff {
            let s = v * inv_sqrt[i] * inv_sqrt[j];
            a[i * n + j] += s;
            if i != j {
                a[j * n + i] += s;
            }
        }
        sym_eigenvalues(&a, n)
    };
    let source = if junctions > 0 { Source::Coupled } else { Source::Component(0) };
    let mut entries: Vec<ReferenceEntry<T>> = values
        .into_iter()
        .take(k)
        .map(|lambda| ReferenceEntry { lambda, multiplicity: 1, source, modes: vec![] })
        .collect();
    if let Some(first) = entries.first_mut() {
        // the constant vector is exact; strip rounding
        if first.lambda.abs() < T::lit(1e-10) {
            first.lambda = T::zero();
        }
    }
    Ok(ReferenceSpectrum { kind: LimitKind::NormalizedLimit, entries })
}

fn segment_length<T: Scalar>(p: &Patch<T>) -> T {
    match p {
        Patch::Flat { lengths, .. } => lengths[0],
        Patch::Circle { radius, .. } => T::lit(2.0) * T::PI() * *radius,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{Component, DensitySpec};

    fn segment(len: f64) -> MixtureModel<f64> {
        let p = Patch::axis_box(1, vec![0.0], &[0], vec![len]).unwrap();
        MixtureModel::new(vec![Component { patch: p, density: DensitySpec::Uniform, alpha: 1.0 }]).unwrap()
    }

    #[test]
    fn coarse_grid_rejected() {
        let r = metric_graph_spectrum_fd(&segment(1.0), &KernelProfile::Indicator, 0.2, 2);
        assert!(matches!(r, Err(Error::Resolution(_))));
    }

    #[test]
    fn uniform_segment_matches_neumann() {
        let r = metric_graph_spectrum_fd(&segment(1.0), &KernelProfile::Indicator, 1e-3, 3).unwrap();
        let v = r.values();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(v[0].abs() < 1e-8);
        assert!((v[1] - pi2 / 3.0).abs() / (pi2 / 3.0) < 1e-5);
        assert!((v[2] - 4.0 * pi2 / 3.0).abs() / (4.0 * pi2 / 3.0) < 1e-5);
    }
}
