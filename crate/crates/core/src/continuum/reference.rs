use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelProfile;
use crate::manifolds::{flat_intersection, DensitySpec, MixtureModel, Patch, SampleCloud};
use crate::scalar::Scalar;

/// Reference values closer than this form one multiplicity cluster.
pub const CLUSTER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// Limit of the normalized energy, weighted by `σ/β`.
    NormalizedLimit,
    /// Limit of the `ε^{-d}`-rescaled unnormalized energy, weighted by `σ`
    /// and `(αρ)²`.
    UnnormalizedLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Component(usize),
    Coupled,
}

/// Closed-form eigenfunction of a limiting problem, supported on one component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeShape {
    Constant { component: usize },
    /// `∏_j cos(π m_j (s_j + L_j/2) / L_j)` on a flat piece.
    Neumann { component: usize, wavenumbers: Vec<u32> },
    CircleCos { component: usize, m: u32 },
    CircleSin { component: usize, m: u32 },
}

impl ModeShape {
    pub fn component(&self) -> usize {
        match self {
            Self::Constant { component }
            | Self::Neumann { component, .. }
            | Self::CircleCos { component, .. }
            | Self::CircleSin { component, .. } => *component,
        }
    }

    /// Value at local coordinates on the mode's own patch.
    pub fn eval_local<T: Scalar>(&self, patch: &Patch<T>, local: &[T]) -> T {
        match (self, patch) {
            (Self::Constant { .. }, _) => T::one(),
            (Self::Neumann { wavenumbers, .. }, Patch::Flat { lengths, .. }) => wavenumbers
                .iter()
                .zip(lengths)
                .zip(local)
                .fold(T::one(), |acc, ((&m, &l), &s)| {
                    acc * (T::PI() * T::from_usize_lossy(m as usize) * (s + l / T::lit(2.0)) / l).cos()
                }),
            (Self::CircleCos { m, .. }, Patch::Circle { radius, .. }) => {
                (T::from_usize_lossy(*m as usize) * local[0] / *radius).cos()
            }
            (Self::CircleSin { m, .. }, Patch::Circle { radius, .. }) => {
                (T::from_usize_lossy(*m as usize) * local[0] / *radius).sin()
            }
            _ => T::zero(),
        }
    }

    /// Values at every sample, zero off the mode's component.
    pub fn eval_cloud<T: Scalar>(&self, model: &MixtureModel<T>, cloud: &SampleCloud<T>) -> Vec<T> {
        let c = self.component();
        let patch = &model.components[c].patch;
        let d = patch.dim();
        (0..cloud.len())
            .map(|i| {
                if cloud.labels[i] == c {
                    self.eval_local(patch, &cloud.local_coords(i)[..d])
                } else {
                    T::zero()
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry<T> {
    pub lambda: T,
    pub multiplicity: usize,
    pub source: Source,
    /// One shape per multiplicity when known in closed form.
    pub modes: Vec<ModeShape>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpectrum<T> {
    pub kind: LimitKind,
    pub entries: Vec<ReferenceEntry<T>>,
}

impl<T: Scalar> ReferenceSpectrum<T> {
    /// Eigenvalues repeated by multiplicity, ascending.
    pub fn values(&self) -> Vec<T> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat(e.lambda).take(e.multiplicity))
            .collect()
    }

    /// Mode shapes aligned with `values()` (None where unknown).
    pub fn modes(&self) -> Vec<Option<ModeShape>> {
        self.entries
            .iter()
            .flat_map(|e| (0..e.multiplicity).map(move |i| e.modes.get(i).cloned()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps entries until at least `k` values are covered.
    pub fn truncate(&mut self, k: usize) {
        let mut seen = 0;
        let mut keep = 0;
        for e in &self.entries {
            if seen >= k {
                break;
            }
            seen += e.multiplicity;
            keep += 1;
        }
        self.entries.truncate(keep);
    }
}

/// Neumann eigenvalues `factor · π² Σ (m_j/L_j)²` on a flat piece, or
/// `factor · (m/r)²` on a circle, for the given component index.
fn component_entries<T: Scalar>(patch: &Patch<T>, index: usize, factor: T, k: usize) -> Vec<ReferenceEntry<T>> {
    let mut out = Vec::new();
    match patch {
        Patch::Flat { lengths, .. } => {
            let d = lengths.len();
            let mut m = vec![0u32; d];
            loop {
                let s: T = m
                    .iter()
                    .zip(lengths)
                    .map(|(&mj, &l)| (T::from_usize_lossy(mj as usize) / l).powi(2))
                    .sum();
                let lambda = factor * T::PI() * T::PI() * s;
                let mode = if m.iter().all(|&x| x == 0) {
                    ModeShape::Constant { component: index }
                } else {
                    ModeShape::Neumann { component: index, wavenumbers: m.clone() }
                };
                out.push(ReferenceEntry { lambda, multiplicity: 1, source: Source::Component(index), modes: vec![mode] });
                // odometer over {0..k-1}^d
                let mut j = 0;
                while j < d {
                    m[j] += 1;
                    if (m[j] as usize) < k.max(1) {
                        break;
                    }
                    m[j] = 0;
                    j += 1;
                }
                if j == d {
                    break;
                }
            }
        }
        Patch::Circle { radius, .. } => {
            out.push(ReferenceEntry {
                lambda: T::zero(),
                multiplicity: 1,
                source: Source::Component(index),
                modes: vec![ModeShape::Constant { component: index }],
            });
            for m in 1..k.max(1) as u32 {
                let lambda = factor * (T::from_usize_lossy(m as usize) / *radius).powi(2);
                out.push(ReferenceEntry {
                    lambda,
                    multiplicity: 2,
                    source: Source::Component(index),
                    modes: vec![
                        ModeShape::CircleCos { component: index, m },
                        ModeShape::CircleSin { component: index, m },
                    ],
                });
            }
        }
    }
    out
}

fn sort_entries<T: Scalar>(entries: &mut [ReferenceEntry<T>]) {
    // stable: ties keep component and wavenumber order
    entries.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap_or(std::cmp::Ordering::Equal));
}

/// First `k` eigenvalues of the normalized limit problem on a single
/// patch with uniform density.
pub fn reference_spectrum_component<T: Scalar>(
    patch: &Patch<T>,
    density: &DensitySpec<T>,
    profile: &KernelProfile<T>,
    k: usize,
) -> Result<ReferenceSpectrum<T>> {
    if !matches!(density, DensitySpec::Uniform) {
        return Err(Error::Unsupported("analytic spectra need a uniform density".into()));
    }
    let factor = profile.moments(patch.dim())?.ratio();
    let mut entries = component_entries(patch, 0, factor, k);
    sort_entries(&mut entries);
    let mut r = ReferenceSpectrum { kind: LimitKind::NormalizedLimit, entries };
    r.truncate(k);
    Ok(r)
}

/// Intersection dimension of two components when they meet, `None` when
/// they are disjoint or not both flat.
pub fn intersection_dim<T: Scalar>(model: &MixtureModel<T>, a: usize, b: usize) -> Option<usize> {
    let (pa, pb) = (&model.components[a].patch, &model.components[b].patch);
    if !pa.is_flat() || !pb.is_flat() {
        return None;
    }
    let x = flat_intersection(pa, pb).ok()?;
    let tol = T::lit(1e-9);
    (pa.distance(&x.point) <= tol && pb.distance(&x.point) <= tol).then_some(x.dim())
}

/// Spectrum of the limit problem on the whole union, for decoupled
/// intersections.
pub fn merged_union_spectrum<T: Scalar>(
    model: &MixtureModel<T>,
    profile: &KernelProfile<T>,
    kind: LimitKind,
    k: usize,
) -> Result<ReferenceSpectrum<T>> {
    model.validate()?;
    let dims = model.dims();
    let top = model.max_dim();
    for a in 0..model.len() {
        for b in a + 1..model.len() {
            let Some(d12) = intersection_dim(model, a, b) else { continue };
            let (da, db) = (dims[a], dims[b]);
            if da == db && da == d12 + 1 {
                return Err(Error::CodimensionOne);
            }
            if kind == LimitKind::NormalizedLimit && da.max(db) < d12 + 2 {
                return Err(Error::Unsupported(format!(
                    "components {a} and {b} meet with codimension {} in the larger piece",
                    da.max(db) - d12
                )));
            }
        }
    }
    let mut entries = Vec::new();
    for (i, c) in model.components.iter().enumerate() {
        if !matches!(c.density, DensitySpec::Uniform) {
            return Err(Error::Unsupported(format!("component {i}: analytic spectra need a uniform density")));
        }
        let m = profile.moments(c.patch.dim())?;
        match kind {
            LimitKind::NormalizedLimit => entries.extend(component_entries(&c.patch, i, m.ratio(), k)),
            LimitKind::UnnormalizedLimit => {
                if c.patch.dim() < top {
                    entries.push(ReferenceEntry {
                        lambda: T::zero(),
                        multiplicity: 1,
                        source: Source::Component(i),
                        modes: vec![ModeShape::Constant { component: i }],
                    });
                } else {
                    let weight = c.alpha / c.patch.volume();
                    entries.extend(component_entries(&c.patch, i, m.sigma * weight, k));
                }
            }
        }
    }
    sort_entries(&mut entries);
    let mut r = ReferenceSpectrum { kind, entries };
    r.truncate(k);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_counts_multiplicity() {
        let c = Patch::<f64>::circle(vec![0.0, 0.0], 1.0, [vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = reference_spectrum_component(&c, &DensitySpec::Uniform, &KernelProfile::Indicator, 3).unwrap();
        let v = r.values();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 1.0 / 3.0).abs() < 1e-15 && (v[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bump_density_unsupported() {
        let p = Patch::axis_box(1, vec![0.0], &[0], vec![1.0]).unwrap();
        let d = DensitySpec::CosineBump { amplitude: 0.2, frequencies: vec![1.0] };
        assert!(matches!(
            reference_spectrum_component(&p, &d, &KernelProfile::Indicator, 3),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn truncate_keeps_whole_clusters() {
        let c = Patch::circle(vec![0.0, 0.0], 2.0, [vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = reference_spectrum_component(&c, &DensitySpec::Uniform, &KernelProfile::Indicator, 2).unwrap();
        assert_eq!(r.entries.len(), 2);
        assert_eq!(r.len(), 3);
    }
}
