//! Degree-based density estimates and their scaling near intersections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::KernelProfile;
use crate::manifolds::{MixtureModel, SampleCloud};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KdeError<T> {
    pub component: usize,
    /// `sup |ε^{-d} deg - α β ρ|` over the retained samples.
    pub sup_error: T,
    /// Same, relative to `sup α β ρ`.
    pub relative: T,
    pub samples: usize,
}

/// Per-component sup error of the degree as a density estimate, over
/// samples farther than `ε` from every other component and from the
/// patch boundary (where the kernel ball is cut).
pub fn kde_sup_error<T: Scalar>(
    model: &MixtureModel<T>,
    cloud: &SampleCloud<T>,
    graph: &Graph<T>,
    profile: &KernelProfile<T>,
) -> Result<Vec<KdeError<T>>> {
    if graph.len() != cloud.len() {
        return Err(Error::LengthMismatch { expected: cloud.len(), got: graph.len() });
    }
    let eps = graph.epsilon();
    let deg = graph.degrees();
    let mut out = Vec::with_capacity(model.len());
    for (c, comp) in model.components.iter().enumerate() {
        let d = comp.patch.dim();
        let beta = profile.moments(d)?.beta;
        let scale = eps.powi(-(d as i32));
        let (_, rho_max) = comp.density.bounds(&comp.patch);
        let mut sup = T::zero();
        let mut samples = 0;
        for i in 0..cloud.len() {
            if cloud.labels[i] != c {
                continue;
            }
            let local = &cloud.local_coords(i)[..d];
            if comp.patch.boundary_distance(local) <= eps {
                continue;
            }
            let x = cloud.point(i);
            let isolated = model
                .components
                .iter()
                .enumerate()
                .all(|(o, other)| o == c || other.patch.distance(x) > eps);
            if !isolated {
                continue;
            }
            let target = comp.alpha * beta * comp.density.value(&comp.patch, local);
            sup = sup.max((scale * deg[i] - target).abs());
            samples += 1;
        }
        out.push(KdeError {
            component: c,
            sup_error: sup,
            relative: sup / (comp.alpha * beta * rho_max),
            samples,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeRange<T> {
    pub min: T,
    pub max: T,
    pub samples: usize,
}

impl<T: Scalar> DegreeRange<T> {
    fn collect(values: impl Iterator<Item = T>) -> Self {
        let mut r = Self { min: T::infinity(), max: T::neg_infinity(), samples: 0 };
        for v in values {
            r.min = r.min.min(v);
            r.max = r.max.max(v);
            r.samples += 1;
        }
        r
    }
}

/// Degree scaling on the larger piece of a two-piece union.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeScaling<T> {
    /// `ε^{-d_lower} deg / (α β ρ)_lower` over samples of the larger piece
    /// within `ε/2` of the smaller one.
    pub near: DegreeRange<T>,
    /// `ε^{-d_upper} deg / (α β ρ)_upper` over samples of the larger piece
    /// farther than `ε` from the smaller one.
    pub far: DegreeRange<T>,
    pub lower: usize,
    pub upper: usize,
}

pub fn degree_scaling<T: Scalar>(
    model: &MixtureModel<T>,
    cloud: &SampleCloud<T>,
    graph: &Graph<T>,
    profile: &KernelProfile<T>,
) -> Result<DegreeScaling<T>> {
    if model.len() != 2 {
        return Err(Error::InvalidModel("degree scaling compares exactly two components".into()));
    }
    if graph.len() != cloud.len() {
        return Err(Error::LengthMismatch { expected: cloud.len(), got: graph.len() });
    }
    let dims = model.dims();
    let (lower, upper) = if dims[0] <= dims[1] { (0, 1) } else { (1, 0) };
    let eps = graph.epsilon();
    let deg = graph.degrees();
    let lo = &model.components[lower];
    let up = &model.components[upper];
    let norm = |c: &crate::manifolds::Component<T>, local: &[T]| -> Result<T> {
        let d = c.patch.dim();
        Ok(eps.powi(d as i32) * c.alpha * profile.moments(d)?.beta * c.density.value(&c.patch, local))
    };
    let mut near = Vec::new();
    let mut far = Vec::new();
    for i in 0..cloud.len() {
        if cloud.labels[i] != upper {
            continue;
        }
        let x = cloud.point(i);
        let dist = lo.patch.distance(x);
        if dist < eps / T::lit(2.0) {
            let foot = lo.patch.local_coords(x);
            let clamped: Vec<T> = match &lo.patch {
                crate::manifolds::Patch::Flat { lengths, .. } => foot
                    .iter()
                    .zip(lengths)
                    .map(|(&s, &l)| s.max(-l / T::lit(2.0)).min(l / T::lit(2.0)))
                    .collect(),
                _ => foot,
            };
            near.push(deg[i] / norm(lo, &clamped)?);
        } else if dist > eps {
            let d = up.patch.dim();
            far.push(deg[i] / norm(up, &cloud.local_coords(i)[..d])?);
        }
    }
    Ok(DegreeScaling {
        near: DegreeRange::collect(near.into_iter()),
        far: DegreeRange::collect(far.into_iter()),
        lower,
        upper,
    })
}
