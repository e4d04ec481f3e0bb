use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// An embedded flat piece or circle in `R^N`.
///
/// Flat pieces are parametrized over the box `∏ [-L_j/2, L_j/2]` by
/// `origin + Σ s_j frame_j`. Circles are parametrized by arclength
/// `s ∈ [0, 2πr)` through `center + r (cos(s/r) e_0 + sin(s/r) e_1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Patch<T> {
    Flat {
        origin: Vec<T>,
        frame: Vec<Vec<T>>,
        lengths: Vec<T>,
    },
    Circle {
        center: Vec<T>,
        radius: T,
        frame: [Vec<T>; 2],
    },
}

impl<T: Scalar> Patch<T> {
    pub fn flat(origin: Vec<T>, frame: Vec<Vec<T>>, lengths: Vec<T>) -> Result<Self> {
        let p = Self::Flat { origin, frame, lengths };
        p.validate()?;
        Ok(p)
    }

    pub fn circle(center: Vec<T>, radius: T, frame: [Vec<T>; 2]) -> Result<Self> {
        let p = Self::Circle { center, radius, frame };
        p.validate()?;
        Ok(p)
    }

    /// Axis-aligned box `∏ [c_j - L_j/2, c_j + L_j/2]` spanned by the
    /// coordinate axes `axes` in `R^ambient`.
    pub fn axis_box(ambient: usize, center: Vec<T>, axes: &[usize], lengths: Vec<T>) -> Result<Self> {
        let frame = axes
            .iter()
            .map(|&a| {
                let mut e = vec![T::zero(); ambient];
                if a >= ambient {
                    return Err(Error::InvalidModel(format!("axis {a} outside R^{ambient}")));
                }
                e[a] = T::one();
                Ok(e)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::flat(center, frame, lengths)
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::structural_tol();
        let n = self.ambient_dim();
        let frame: Vec<&Vec<T>> = match self {
            Self::Flat { frame, lengths, .. } => {
                if frame.is_empty() {
                    return Err(Error::InvalidModel("flat piece needs at least one frame vector".into()));
                }
                if lengths.len() != frame.len() {
                    return Err(Error::InvalidModel(format!(
                        "{} side lengths for a {}-dimensional piece",
                        lengths.len(),
                        frame.len()
                    )));
                }
                if lengths.iter().any(|&l| !(l > T::zero()) || !l.is_finite()) {
                    return Err(Error::InvalidModel("side lengths must be positive".into()));
                }
                frame.iter().collect()
            }
            Self::Circle { radius, frame, .. } => {
                if !(*radius > T::zero()) || !radius.is_finite() {
                    return Err(Error::InvalidModel("circle radius must be positive".into()));
                }
                frame.iter().collect()
            }
        };
        if frame.len() > n {
            return Err(Error::InvalidModel("more frame vectors than ambient dimensions".into()));
        }
        for (i, a) in frame.iter().enumerate() {
            if a.len() != n {
                return Err(Error::InvalidModel("frame vector has wrong ambient dimension".into()));
            }
            for (j, b) in frame.iter().enumerate().take(i + 1) {
                let target = if i == j { T::one() } else { T::zero() };
                if (dot(a, b) - target).abs() > tol {
                    return Err(Error::InvalidModel(format!("frame is not orthonormal (vectors {j}, {i})")));
                }
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Flat { origin, .. } => origin.len(),
            Self::Circle { center, .. } => center.len(),
        }
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self {
            Self::Flat { frame, .. } => frame.len(),
            Self::Circle { .. } => 1,
        }
    }

    pub fn has_boundary(&self) -> bool {
        matches!(self, Self::Flat { .. })
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, Self::Flat { .. })
    }

    /// Intrinsic volume (length, area, ...).
    pub fn volume(&self) -> T {
        match self {
            Self::Flat { lengths, .. } => lengths.iter().fold(T::one(), |a, &l| a * l),
            Self::Circle { radius, .. } => T::lit(2.0) * T::PI() * *radius,
        }
    }

    /// Whether `local` lies in the parameter domain (closed box, or
    /// `[0, 2πr]` for circles).
    pub fn contains_local(&self, local: &[T]) -> bool {
        if local.len() != self.dim() {
            return false;
        }
        let tol = T::structural_tol();
        match self {
            Self::Flat { lengths, .. } => local
                .iter()
                .zip(lengths)
                .all(|(&s, &l)| s.abs() <= l / T::lit(2.0) + tol),
            Self::Circle { radius, .. } => {
                local[0] >= -tol && local[0] <= T::lit(2.0) * T::PI() * *radius + tol
            }
        }
    }

    /// Ambient point for local coordinates.
    pub fn embed(&self, local: &[T]) -> Vec<T> {
        let mut x;
        match self {
            Self::Flat { origin, frame, .. } => {
                x = origin.clone();
                for (s, e) in local.iter().zip(frame) {
                    for (xi, &ei) in x.iter_mut().zip(e) {
                        *xi += *s * ei;
                    }
                }
            }
            Self::Circle { center, radius, frame } => {
                x = center.clone();
                let theta = local[0] / *radius;
                let (sn, cs) = theta.sin_cos();
                for i in 0..x.len() {
                    x[i] += *radius * (cs * frame[0][i] + sn * frame[1][i]);
                }
            }
        }
        x
    }

    /// Local coordinates of the nearest point of the underlying affine
    /// plane (flat) or of the circle, without clamping to the box.
    pub fn local_coords(&self, x: &[T]) -> Vec<T> {
        match self {
            Self::Flat { origin, frame, .. } => {
                let rel: Vec<T> = x.iter().zip(origin).map(|(&a, &b)| a - b).collect();
                frame.iter().map(|e| dot(&rel, e)).collect()
            }
            Self::Circle { center, radius, frame } => {
                let rel: Vec<T> = x.iter().zip(center).map(|(&a, &b)| a - b).collect();
                let c = dot(&rel, &frame[0]);
                let s = dot(&rel, &frame[1]);
                let mut theta = s.atan2(c);
                if theta < T::zero() {
                    theta += T::lit(2.0) * T::PI();
                }
                vec![theta * *radius]
            }
        }
    }

    /// Euclidean distance from `x` to the patch (including its boundary).
    pub fn distance(&self, x: &[T]) -> T {
        let nearest = match self {
            Self::Flat { lengths, .. } => {
                let s: Vec<T> = self
                    .local_coords(x)
                    .into_iter()
                    .zip(lengths)
                    .map(|(s, &l)| {
                        let h = l / T::lit(2.0);
                        s.max(-h).min(h)
                    })
                    .collect();
                self.embed(&s)
            }
            Self::Circle { .. } => self.embed(&self.local_coords(x)),
        };
        crate::scalar::dist_sq(x, &nearest).sqrt()
    }

    /// Intrinsic distance from local coordinates to the patch boundary;
    /// infinite for circles.
    pub fn boundary_distance(&self, local: &[T]) -> T {
        match self {
            Self::Flat { lengths, .. } => local
                .iter()
                .zip(lengths)
                .map(|(&s, &l)| l / T::lit(2.0) - s.abs())
                .fold(T::infinity(), T::min),
            Self::Circle { .. } => T::infinity(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_orthonormal_frame() {
        let r = Patch::<f64>::flat(vec![0.0; 3], vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]], vec![1.0, 1.0]);
        assert!(r.is_err());
    }

    #[test]
    fn embed_and_project_round_trip() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = Patch::flat(vec![1.0, 2.0, 3.0], vec![vec![s, s, 0.0], vec![0.0, 0.0, 1.0]], vec![2.0, 1.0]).unwrap();
        let x = p.embed(&[0.3, -0.2]);
        let back = p.local_coords(&x);
        assert!((back[0] - 0.3).abs() < 1e-14 && (back[1] + 0.2).abs() < 1e-14);
        assert!(p.distance(&x) < 1e-14);
        assert!((p.boundary_distance(&back) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn circle_arclength() {
        let c = Patch::circle(vec![0.0, 0.0], 2.0, [vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let x = c.embed(&[std::f64::consts::PI]);
        assert!((x[0]).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
        assert!((c.local_coords(&x)[0] - std::f64::consts::PI).abs() < 1e-14);
        assert!((c.distance(&[3.0, 0.0]) - 1.0).abs() < 1e-14);
        assert!((c.volume() - 4.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn distance_to_box_clamps() {
        let p = Patch::<f64>::axis_box(2, vec![0.0, 0.0], &[0], vec![1.0]).unwrap();
        assert!((p.distance(&[1.5, 0.0]) - 1.0).abs() < 1e-14);
        assert!((p.distance(&[0.2, -0.3]) - 0.3).abs() < 1e-14);
    }
}
