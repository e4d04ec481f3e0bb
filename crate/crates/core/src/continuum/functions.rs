use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelProfile;
use crate::manifolds::{MixtureModel, Patch};
use crate::scalar::Scalar;

/// Closed-form function on one patch, in local coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalFunction<T> {
    Constant { value: T },
    /// `offset + Σ_j slope_j s_j`
    Affine { offset: T, slope: Vec<T> },
    /// `amplitude ∏_j cos(π m_j (s_j + L_j/2) / L_j)`, the Neumann modes of a box.
    NeumannMode { amplitude: T, wavenumbers: Vec<u32> },
    /// `amplitude cos(m θ)` or `amplitude sin(m θ)` on a circle, `θ = s/r`.
    CircleMode { amplitude: T, m: u32, sine: bool },
    /// `scale √(α ρ)` with the component's weight and density.
    SqrtDensity { scale: T },
}

impl<T: Scalar> LocalFunction<T> {
    pub fn constant(value: T) -> Self {
        Self::Constant { value }
    }
}

/// One closed-form function per component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothFunctionSpec<T> {
    pub parts: Vec<LocalFunction<T>>,
}

impl<T: Scalar> SmoothFunctionSpec<T> {
    pub fn new(parts: Vec<LocalFunction<T>>) -> Self {
        Self { parts }
    }

    pub fn check(&self, model: &MixtureModel<T>) -> Result<()> {
        if self.parts.len() != model.len() {
            return Err(Error::LengthMismatch { expected: model.len(), got: self.parts.len() });
        }
        for (i, (f, c)) in self.parts.iter().zip(&model.components).enumerate() {
            let ok = match f {
                LocalFunction::Affine { slope, .. } => slope.len() == c.patch.dim(),
                LocalFunction::NeumannMode { wavenumbers, .. } => {
                    c.patch.is_flat() && wavenumbers.len() == c.patch.dim()
                }
                LocalFunction::CircleMode { .. } => !c.patch.is_flat(),
                _ => true,
            };
            if !ok {
                return Err(Error::InvalidModel(format!("function part {i} does not fit its patch")));
            }
        }
        Ok(())
    }

    /// Value on `component` at local coordinates.
    pub fn value(&self, model: &MixtureModel<T>, component: usize, local: &[T]) -> T {
        let c = &model.components[component];
        match &self.parts[component] {
            LocalFunction::Constant { value } => *value,
            LocalFunction::Affine { offset, slope } => {
                *offset + slope.iter().zip(local).fold(T::zero(), |a, (&g, &s)| a + g * s)
            }
            LocalFunction::NeumannMode { amplitude, wavenumbers } => {
                let Patch::Flat { lengths, .. } = &c.patch else { return T::zero() };
                *amplitude
                    * wavenumbers.iter().zip(lengths).zip(local).fold(T::one(), |acc, ((&m, &l), &s)| {
                        acc * (neumann_arg(m, l, s)).cos()
                    })
            }
            LocalFunction::CircleMode { amplitude, m, sine } => {
                let Patch::Circle { radius, .. } = &c.patch else { return T::zero() };
                let a = T::from_usize_lossy(*m as usize) * local[0] / *radius;
                *amplitude * if *sine { a.sin() } else { a.cos() }
            }
            LocalFunction::SqrtDensity { scale } => *scale * (c.alpha * c.density.value(&c.patch, local)).sqrt(),
        }
    }

    /// Gradient in local (orthonormal or arclength) coordinates.
    pub fn gradient(&self, model: &MixtureModel<T>, component: usize, local: &[T]) -> Vec<T> {
        let c = &model.components[component];
        let d = c.patch.dim();
        match &self.parts[component] {
            LocalFunction::Constant { .. } => vec![T::zero(); d],
            LocalFunction::Affine { slope, .. } => slope.clone(),
            LocalFunction::NeumannMode { amplitude, wavenumbers } => {
                let Patch::Flat { lengths, .. } = &c.patch else { return vec![T::zero(); d] };
                let args: Vec<T> = (0..d).map(|j| neumann_arg(wavenumbers[j], lengths[j], local[j])).collect();
                (0..d)
                    .map(|j| {
                        let rate = T::PI() * T::from_usize_lossy(wavenumbers[j] as usize) / lengths[j];
                        let mut g = -*amplitude * rate * args[j].sin();
                        for (k, a) in args.iter().enumerate() {
                            if k != j {
                                g *= a.cos();
                            }
                        }
                        g
                    })
                    .collect()
            }
            LocalFunction::CircleMode { amplitude, m, sine } => {
                let Patch::Circle { radius, .. } = &c.patch else { return vec![T::zero(); d] };
                let rate = T::from_usize_lossy(*m as usize) / *radius;
                let a = rate * local[0];
                vec![*amplitude * rate * if *sine { a.cos() } else { -a.sin() }]
            }
            LocalFunction::SqrtDensity { scale } => {
                let rho = c.density.value(&c.patch, local);
                let g = c.density.gradient(&c.patch, local);
                let f = *scale * c.alpha.sqrt() / (T::lit(2.0) * rho.sqrt());
                g.into_iter().map(|x| f * x).collect()
            }
        }
    }
}

fn neumann_arg<T: Scalar>(m: u32, l: T, s: T) -> T {
    T::PI() * T::from_usize_lossy(m as usize) * (s + l / T::lit(2.0)) / l
}

/// What a function sees at a quadrature node or sample.
pub struct NodeContext<'a, T> {
    pub component: usize,
    pub local: &'a [T],
    pub point: &'a [T],
    /// `η_ε(|x - ·|) ⋆ μ` at the node, as computed by the caller.
    pub conv: T,
    pub epsilon: T,
}

/// A function on the union that may depend on the convolution `η_ε ⋆ μ`.
pub trait ModelFunction<T>: Sync {
    fn eval(&self, model: &MixtureModel<T>, ctx: &NodeContext<'_, T>) -> T;
}

impl<T: Scalar> ModelFunction<T> for SmoothFunctionSpec<T> {
    fn eval(&self, model: &MixtureModel<T>, ctx: &NodeContext<'_, T>) -> T {
        self.value(model, ctx.component, ctx.local)
    }
}

/// `ε^{-d_i} (η_ε ⋆ μ)(x) / (α_i β_i ρ_i(x))`, which tends to one away
/// from intersections and boundaries.
pub(crate) fn degree_factor<T: Scalar>(model: &MixtureModel<T>, beta: T, component: usize, local: &[T], conv: T, eps: T) -> T {
    let c = &model.components[component];
    let d = c.patch.dim() as i32;
    eps.powi(-d) * conv / (c.alpha * beta * c.density.value(&c.patch, local))
}

/// `u · √(ε^{-d_i} (η_ε ⋆ μ) / (α_i β_i ρ_i))`
#[derive(Clone, Debug)]
pub struct DegreeCorrected<T> {
    pub base: SmoothFunctionSpec<T>,
    /// `β` of the kernel in each component's dimension.
    pub betas: Vec<T>,
}

impl<T: Scalar> DegreeCorrected<T> {
    pub fn new(base: SmoothFunctionSpec<T>, model: &MixtureModel<T>, profile: &KernelProfile<T>) -> Result<Self> {
        base.check(model)?;
        let betas = model
            .components
            .iter()
            .map(|c| profile.moments(c.patch.dim()).map(|m| m.beta))
            .collect::<Result<_>>()?;
        Ok(Self { base, betas })
    }
}

impl<T: Scalar> ModelFunction<T> for DegreeCorrected<T> {
    fn eval(&self, model: &MixtureModel<T>, ctx: &NodeContext<'_, T>) -> T {
        let f = degree_factor(model, self.betas[ctx.component], ctx.component, ctx.local, ctx.conv, ctx.epsilon);
        self.base.value(model, ctx.component, ctx.local) * f.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{Component, DensitySpec};

    #[test]
    fn gradients_match_finite_differences() {
        let p = Patch::<f64>::axis_box(2, vec![0.0, 0.0], &[0, 1], vec![1.4, 1.0]).unwrap();
        let d = DensitySpec::CosineBump { amplitude: 0.3, frequencies: vec![1.0, 1.0] };
        let model = MixtureModel::new(vec![Component { patch: p, density: d, alpha: 1.0 }]).unwrap();
        let fs = [
            LocalFunction::NeumannMode { amplitude: 1.5, wavenumbers: vec![2, 1] },
            LocalFunction::Affine { offset: 1.0, slope: vec![0.5, -2.0] },
            LocalFunction::SqrtDensity { scale: 2.0 },
        ];
        let x = [0.17, -0.31];
        for f in fs {
            let spec = SmoothFunctionSpec::new(vec![f]);
            let g = spec.gradient(&model, 0, &x);
            for j in 0..2 {
                let (mut a, mut b) = (x, x);
                a[j] += 1e-6;
                b[j] -= 1e-6;
                let fd = (spec.value(&model, 0, &a) - spec.value(&model, 0, &b)) / 2e-6;
                assert!((fd - g[j]).abs() < 1e-7);
            }
        }
    }
}
