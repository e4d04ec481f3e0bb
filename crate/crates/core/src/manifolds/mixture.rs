use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::density::DensitySpec;
use super::patch::Patch;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component<T> {
    pub patch: Patch<T>,
    pub density: DensitySpec<T>,
    pub alpha: T,
}

/// Probability measure `Σ_i α_i ρ_i dVol_i` on a union of patches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel<T> {
    pub ambient_dim: usize,
    pub components: Vec<Component<T>>,
}

impl<T: Scalar> MixtureModel<T> {
    pub fn new(components: Vec<Component<T>>) -> Result<Self> {
        let ambient_dim = components
            .first()
            .ok_or_else(|| Error::InvalidModel("model has no components".into()))?
            .patch
            .ambient_dim();
        let m = Self { ambient_dim, components };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidModel("model has no components".into()));
        }
        let mut total = T::zero();
        for (i, c) in self.components.iter().enumerate() {
            c.patch.validate()?;
            c.density.validate(&c.patch)?;
            if c.patch.ambient_dim() != self.ambient_dim {
                return Err(Error::InvalidModel(format!("component {i} lives in a different ambient space")));
            }
            if !(c.alpha > T::zero() && c.alpha <= T::one()) {
                return Err(Error::InvalidModel(format!("component {i} has weight {} outside (0, 1]", c.alpha)));
            }
            total += c.alpha;
        }
        if (total - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(16.0)) {
            return Err(Error::InvalidModel(format!("component weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.patch.dim()).collect()
    }

    pub fn max_dim(&self) -> usize {
        self.dims().into_iter().max().unwrap_or(0)
    }

    /// `ρ_i` at `local` (not multiplied by `α_i`).
    pub fn density_at(&self, component: usize, local: &[T]) -> Result<T> {
        let c = self
            .components
            .get(component)
            .ok_or_else(|| Error::Domain(format!("no component {component}")))?;
        if !c.patch.contains_local(local) {
            return Err(Error::Domain(format!("local coordinates outside component {component}")));
        }
        Ok(c.density.value(&c.patch, local))
    }
}

/// Points sampled from a mixture, with their component labels and local
/// coordinates on the labeled patch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleCloud<T> {
    pub ambient_dim: usize,
    /// Row-major `n × ambient_dim`.
    pub points: Vec<T>,
    pub labels: Vec<usize>,
    /// Row-major `n × local_stride`; row `i` holds the coordinates of point
    /// `i` on its patch, zero padded.
    pub local: Vec<T>,
    pub local_stride: usize,
    pub counts: Vec<usize>,
    pub seed: u64,
    /// True when per-component counts were fixed instead of drawn.
    pub fixed_counts: bool,
}

impl<T: Scalar> SampleCloud<T> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn local_coords(&self, i: usize) -> &[T] {
        &self.local[i * self.local_stride..(i + 1) * self.local_stride]
    }

    /// Builds a cloud from raw points, labels and per-point local coordinates.
    pub fn from_parts(
        ambient_dim: usize,
        points: Vec<T>,
        labels: Vec<usize>,
        local: Vec<Vec<T>>,
        components: usize,
    ) -> Result<Self> {
        let n = labels.len();
        if points.len() != n * ambient_dim {
            return Err(Error::LengthMismatch { expected: n * ambient_dim, got: points.len() });
        }
        if local.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: local.len() });
        }
        let stride = local.iter().map(Vec::len).max().unwrap_or(0);
        let mut flat = vec![T::zero(); n * stride];
        for (i, l) in local.iter().enumerate() {
            flat[i * stride..i * stride + l.len()].copy_from_slice(l);
        }
        let mut counts = vec![0; components];
        for &l in &labels {
            if l >= components {
                return Err(Error::Domain(format!("label {l} out of range")));
            }
            counts[l] += 1;
        }
        Ok(Self {
            ambient_dim,
            points,
            labels,
            local: flat,
            local_stride: stride,
            counts,
            seed: 0,
            fixed_counts: true,
        })
    }

    /// Restriction to the given indices, keeping labels and seed.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let mut points = Vec::with_capacity(idx.len() * self.ambient_dim);
        let mut local = Vec::with_capacity(idx.len() * self.local_stride);
        let mut labels = Vec::with_capacity(idx.len());
        let mut counts = vec![0; self.counts.len()];
        for &i in idx {
            points.extend_from_slice(self.point(i));
            local.extend_from_slice(self.local_coords(i));
            labels.push(self.labels[i]);
            counts[self.labels[i]] += 1;
        }
        Self {
            ambient_dim: self.ambient_dim,
            points,
            labels,
            local,
            local_stride: self.local_stride,
            counts,
            seed: self.seed,
            fixed_counts: self.fixed_counts,
        }
    }
}

/// splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream used for component `index`.
pub fn component_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64 + 1))
}

/// Draws `n` points: component counts are Binomial (sequential conditional
/// draws from a dedicated stream), then each component is sampled i.i.d.
/// from its own stream.
pub fn sample_mixture<T: Scalar>(model: &MixtureModel<T>, n: usize, seed: u64) -> Result<SampleCloud<T>> {
    model.validate()?;
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let mut counts = Vec::with_capacity(model.len());
    let mut remaining = n as u64;
    let mut mass = 1.0f64;
    for (i, c) in model.components.iter().enumerate() {
        if i + 1 == model.len() {
            counts.push(remaining as usize);
            break;
        }
        let p = (c.alpha.as_f64() / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, p)
            .map_err(|e| Error::Sampling(e.to_string()))?
            .sample(&mut rng);
        counts.push(k as usize);
        remaining -= k;
        mass -= c.alpha.as_f64();
    }
    let mut cloud = sample_with_counts(model, &counts, seed)?;
    cloud.fixed_counts = false;
    Ok(cloud)
}

/// Samples exactly `counts[i]` points from component `i`.
pub fn sample_with_counts<T: Scalar>(model: &MixtureModel<T>, counts: &[usize], seed: u64) -> Result<SampleCloud<T>> {
    model.validate()?;
    if counts.len() != model.len() {
        return Err(Error::LengthMismatch { expected: model.len(), got: counts.len() });
    }
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::EmptyCloud);
    }
    let big_n = model.ambient_dim;
    let stride = model.max_dim();
    let mut points = Vec::with_capacity(n * big_n);
    let mut local = Vec::with_capacity(n * stride);
    let mut labels = Vec::with_capacity(n);
    for (i, (c, &count)) in model.components.iter().zip(counts).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(component_seed(seed, i));
        let envelope = c.density.shape_max();
        let cap = 1000 * count.max(1);
        let mut proposals = 0usize;
        let mut accepted = 0usize;
        let mut s = vec![T::zero(); c.patch.dim()];
        while accepted < count {
            if proposals >= cap {
                return Err(Error::Sampling(format!(
                    "component {i}: rejection sampler exhausted {cap} proposals"
                )));
            }
            proposals += 1;
            propose_uniform(&c.patch, &mut rng, &mut s);
            if let DensitySpec::CosineBump { .. } = c.density {
                let u = T::lit(rng.gen::<f64>()) * envelope;
                if u >= c.density.shape_at(&c.patch, &s) {
                    continue;
                }
            }
            points.extend(c.patch.embed(&s));
            local.extend_from_slice(&s);
            local.extend(std::iter::repeat(T::zero()).take(stride - s.len()));
            labels.push(i);
            accepted += 1;
        }
    }
    Ok(SampleCloud {
        ambient_dim: big_n,
        points,
        labels,
        local,
        local_stride: stride,
        counts: counts.to_vec(),
        seed,
        fixed_counts: true,
    })
}

fn propose_uniform<T: Scalar>(patch: &Patch<T>, rng: &mut ChaCha8Rng, out: &mut [T]) {
    match patch {
        Patch::Flat { lengths, .. } => {
            for (s, &l) in out.iter_mut().zip(lengths) {
                *s = (T::lit(rng.gen::<f64>()) - T::lit(0.5)) * l;
            }
        }
        Patch::Circle { radius, .. } => {
            out[0] = T::lit(rng.gen::<f64>()) * T::lit(2.0) * T::PI() * *radius;
        }
    }
}
