//! Named models used by the experiments and tests.

use crate::error::{Error, Result};
use crate::manifolds::{Component, DensitySpec, MixtureModel, Patch};
use crate::scalar::Scalar;

/// Per-component counts of the rectangle-and-segment experiment
/// (segment first, rectangle second).
pub const PAPER_COUNTS: [usize; 2] = [2600, 2800];
pub const PAPER_EPSILON: f64 = 0.13;

pub const NAMES: [&str; 4] = ["paper-rect-segment", "unit-circle", "crossing-segments", "pierced-square"];

fn uniform<T: Scalar>(patch: Patch<T>, alpha: T) -> Component<T> {
    Component { patch, density: DensitySpec::Uniform, alpha }
}

/// Segment `{0}×{0}×[-0.65, 0.65]` crossing the rectangle
/// `[-0.7, 0.7]×[-0.5, 0.5]×{0}` at the origin, with weights proportional
/// to the counts 2600 and 2800.
pub fn paper_rect_segment<T: Scalar>() -> MixtureModel<T> {
    let total = T::from_usize_lossy(PAPER_COUNTS[0] + PAPER_COUNTS[1]);
    let a1 = T::from_usize_lossy(PAPER_COUNTS[0]) / total;
    let seg = Patch::axis_box(3, vec![T::zero(); 3], &[2], vec![T::lit(1.3)]).expect("valid segment");
    let rect = Patch::axis_box(3, vec![T::zero(); 3], &[0, 1], vec![T::lit(1.4), T::one()]).expect("valid rectangle");
    MixtureModel::new(vec![uniform(seg, a1), uniform(rect, T::one() - a1)]).expect("valid model")
}

pub fn unit_circle<T: Scalar>() -> MixtureModel<T> {
    let frame = [vec![T::one(), T::zero()], vec![T::zero(), T::one()]];
    let c = Patch::circle(vec![T::zero(); 2], T::one(), frame).expect("valid circle");
    MixtureModel::new(vec![uniform(c, T::one())]).expect("valid model")
}

/// Two unit segments in the plane crossing at their midpoints.
pub fn crossing_segments<T: Scalar>() -> MixtureModel<T> {
    let a = Patch::axis_box(2, vec![T::zero(); 2], &[0], vec![T::one()]).expect("valid segment");
    let b = Patch::axis_box(2, vec![T::zero(); 2], &[1], vec![T::one()]).expect("valid segment");
    let half = T::lit(0.5);
    MixtureModel::new(vec![uniform(a, half), uniform(b, half)]).expect("valid model")
}

/// Segment of length `segment` along `e_3` piercing a `side × side` square
/// in the `e_1 e_2` plane at both centers, equal weights.
pub fn pierced_square<T: Scalar>(side: T, segment: T) -> Result<MixtureModel<T>> {
    let seg = Patch::axis_box(3, vec![T::zero(); 3], &[2], vec![segment])?;
    let sq = Patch::axis_box(3, vec![T::zero(); 3], &[0, 1], vec![side, side])?;
    let half = T::lit(0.5);
    MixtureModel::new(vec![uniform(seg, half), uniform(sq, half)])
}

pub fn by_name<T: Scalar>(name: &str) -> Result<MixtureModel<T>> {
    match name {
        "paper-rect-segment" => Ok(paper_rect_segment()),
        "unit-circle" => Ok(unit_circle()),
        "crossing-segments" => Ok(crossing_segments()),
        "pierced-square" => pierced_square(T::lit(3.0), T::lit(2.0)),
        other => Err(Error::Domain(format!("unknown preset '{other}'"))),
    }
}
