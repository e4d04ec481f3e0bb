use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelProfile;
use crate::manifolds::{flat_intersection, principal_angle, AffineSubspace, MixtureModel};
use crate::scalar::Scalar;

use super::functions::{degree_factor, LocalFunction, ModelFunction, NodeContext, SmoothFunctionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `d(x) < Cε` on the larger piece
    Near,
    /// `Cε ≤ d(x) < C√ε`
    Mid,
    Far,
    /// Any point of the smaller piece.
    Lower,
}

/// Function on a two-piece union that follows the lower piece's function
/// up to `Cε` from the intersection, the upper piece's function beyond
/// `C√ε`, and interpolates logarithmically in between. Both sides are
/// degree corrected.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryFunction<T> {
    /// `parts[lower]` and `parts[upper]` hold the two base functions.
    pub base: SmoothFunctionSpec<T>,
    pub lower: usize,
    pub upper: usize,
    pub epsilon: T,
    /// Region constant `2 / sin θ`.
    pub region_constant: T,
    pub intersection: AffineSubspace<T>,
    pub betas: Vec<T>,
}

impl<T: Scalar> RecoveryFunction<T> {
    pub fn inner_radius(&self) -> T {
        self.region_constant * self.epsilon
    }

    pub fn outer_radius(&self) -> T {
        self.region_constant * self.epsilon.sqrt()
    }

    /// Distance from an ambient point to the intersection.
    pub fn distance(&self, x: &[T]) -> T {
        self.intersection.distance(x)
    }

    pub fn region(&self, component: usize, x: &[T]) -> Region {
        if component == self.lower {
            return Region::Lower;
        }
        let d = self.distance(x);
        if d < self.inner_radius() {
            Region::Near
        } else if d < self.outer_radius() {
            Region::Mid
        } else {
            Region::Far
        }
    }

    /// Weight of the lower function at distance `d`: one up to `Cε`, zero
    /// from `C√ε`, linear in `ln d` in between.
    pub fn weight(&self, d: T) -> T {
        let (a, b) = (self.inner_radius(), self.outer_radius());
        if d <= a {
            T::one()
        } else if d >= b {
            T::zero()
        } else {
            (b.ln() - d.ln()) / (b.ln() - a.ln())
        }
    }

    fn lower_corrected(&self, model: &MixtureModel<T>, x: &[T], conv: T) -> T {
        let patch = &model.components[self.lower].patch;
        let foot = self.intersection.project(x);
        let s = patch.local_coords(&foot);
        let f = degree_factor(model, self.betas[self.lower], self.lower, &s, conv, self.epsilon);
        self.base.value(model, self.lower, &s) * f.sqrt()
    }
}

impl<T: Scalar> ModelFunction<T> for RecoveryFunction<T> {
    fn eval(&self, model: &MixtureModel<T>, ctx: &NodeContext<'_, T>) -> T {
        let c = ctx.component;
        let corrected = |comp: usize| {
            let f = degree_factor(model, self.betas[comp], comp, ctx.local, ctx.conv, ctx.epsilon);
            self.base.value(model, comp, ctx.local) * f.sqrt()
        };
        if c == self.lower {
            return corrected(c);
        }
        if c != self.upper {
            return T::zero();
        }
        match self.region(c, ctx.point) {
            Region::Near => self.lower_corrected(model, ctx.point, ctx.conv),
            Region::Far => corrected(c),
            _ => {
                let w = self.weight(self.distance(ctx.point));
                let up = corrected(c);
                up + w * (self.lower_corrected(model, ctx.point, ctx.conv) - up)
            }
        }
    }
}

/// Builds the interpolating function for a two-piece model whose pieces
/// meet at a flat of dimension `d12` with `d1 - d12 ≤ 2 ≤ d2 - d12`.
pub fn build_recovery<T: Scalar>(
    model: &MixtureModel<T>,
    profile: &KernelProfile<T>,
    lower_fn: LocalFunction<T>,
    upper_fn: LocalFunction<T>,
    epsilon: T,
) -> Result<RecoveryFunction<T>> {
    model.validate()?;
    if model.len() != 2 {
        return Err(Error::InvalidModel("the recovery construction needs exactly two components".into()));
    }
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::Domain(format!("need 0 < ε < 1, got {epsilon}")));
    }
    let dims = model.dims();
    let (lower, upper) = if dims[0] <= dims[1] { (0, 1) } else { (1, 0) };
    let (pl, pu) = (&model.components[lower].patch, &model.components[upper].patch);
    let intersection = flat_intersection(pl, pu)?;
    let tol = T::lit(1e-9);
    if pl.distance(&intersection.point) > tol || pu.distance(&intersection.point) > tol {
        return Err(Error::DegenerateIntersection("the pieces do not meet".into()));
    }
    let d12 = intersection.dim();
    if dims[lower] > d12 + 2 || dims[upper] < d12 + 2 {
        return Err(Error::Unsupported(format!(
            "dimensions ({}, {}) meeting in dimension {d12} are outside the interpolation regime",
            dims[lower], dims[upper]
        )));
    }
    let theta = principal_angle(pl, pu)?;
    let region_constant = T::lit(2.0) / theta.sin();
    let reach = region_constant * epsilon.sqrt() + epsilon;
    for patch in [pl, pu] {
        let s = patch.local_coords(&intersection.point);
        let room = patch.boundary_distance(&s);
        if room <= reach {
            return Err(Error::Construction(format!(
                "interpolation layer of radius {reach} reaches a patch boundary {room} away"
            )));
        }
    }
    let mut parts = vec![LocalFunction::constant(T::zero()); 2];
    parts[lower] = lower_fn;
    parts[upper] = upper_fn;
    let base = SmoothFunctionSpec::new(parts);
    base.check(model)?;
    let betas = model
        .components
        .iter()
        .map(|c| profile.moments(c.patch.dim()).map(|m| m.beta))
        .collect::<Result<_>>()?;
    Ok(RecoveryFunction { base, lower, upper, epsilon, region_constant, intersection, betas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn setup(eps: f64) -> (MixtureModel<f64>, RecoveryFunction<f64>) {
        let model = presets::pierced_square(3.0, 2.0).unwrap();
        let r = build_recovery(&model, &KernelProfile::Indicator, LocalFunction::constant(1.0), LocalFunction::constant(0.0), eps)
            .unwrap();
        (model, r)
    }

    #[test]
    fn weight_is_half_at_three_quarter_power() {
        let (_, r) = setup(0.01);
        assert_eq!(r.region_constant, 2.0);
        let d = 2.0 * 0.01f64.powf(0.75);
        assert!((r.weight(d) - 0.5).abs() < 1e-12);
        assert_eq!(r.weight(0.02), 1.0);
        assert_eq!(r.weight(0.2), 0.0);
    }

    #[test]
    fn regions_and_branch_values() {
        let (model, r) = setup(0.01);
        let conv = 0.3;
        let eval = |x: f64| {
            let point = [x, 0.0, 0.0];
            let local = [x, 0.0];
            r.eval(&model, &NodeContext { component: 1, local: &local, point: &point, conv, epsilon: 0.01 })
        };
        // near: the degree-corrected constant one from the segment side
        let beta1 = 2.0;
        let expected = (conv / (0.01 * 0.5 * beta1 * 0.5)).sqrt();
        assert_eq!(r.region(1, &[0.01, 0.0, 0.0]), Region::Near);
        assert!((eval(0.01) - expected).abs() < 1e-12);
        assert_eq!(r.region(1, &[0.2, 0.0, 0.0]), Region::Far);
        assert_eq!(eval(0.2), 0.0);
        // continuity at both region boundaries
        let a = r.inner_radius();
        let b = r.outer_radius();
        assert!((eval(a * (1.0 - 1e-12)) - eval(a * (1.0 + 1e-12))).abs() < 1e-9);
        assert!((eval(b * (1.0 - 1e-12)) - eval(b * (1.0 + 1e-12))).abs() < 1e-9);
    }

    #[test]
    fn rejects_layer_past_boundary() {
        let model = presets::paper_rect_segment::<f64>();
        let r = build_recovery(&model, &KernelProfile::Indicator, LocalFunction::constant(1.0), LocalFunction::constant(0.0), 0.1);
        assert!(matches!(r, Err(Error::Construction(_))));
    }
}
