use serde::{Deserialize, Serialize};

use super::patch::Patch;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Density of a component with respect to its volume measure.
///
/// `CosineBump` on a flat piece is proportional to
/// `1 + a ∏_j cos(2π f_j s_j / L_j)`; on a circle it is proportional to
/// `1 + a cos(f θ)` with integer `f`, `θ = s / r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec<T> {
    Uniform,
    CosineBump { amplitude: T, frequencies: Vec<T> },
}

impl<T: Scalar> DensitySpec<T> {
    pub fn validate(&self, patch: &Patch<T>) -> Result<()> {
        let Self::CosineBump { amplitude, frequencies } = self else {
            return Ok(());
        };
        if !(*amplitude >= T::zero() && *amplitude < T::one()) {
            return Err(Error::InvalidModel(format!("bump amplitude {amplitude} outside [0, 1)")));
        }
        if frequencies.len() != patch.dim() {
            return Err(Error::InvalidModel(format!(
                "{} bump frequencies for a {}-dimensional patch",
                frequencies.len(),
                patch.dim()
            )));
        }
        if let Patch::Circle { .. } = patch {
            let f = frequencies[0];
            if f.fract() != T::zero() {
                return Err(Error::InvalidModel("bump frequency on a circle must be an integer".into()));
            }
        }
        Ok(())
    }

    /// Unnormalized profile `g` at `local`.
    fn shape(&self, patch: &Patch<T>, local: &[T]) -> T {
        match self {
            Self::Uniform => T::one(),
            Self::CosineBump { amplitude, frequencies } => {
                let two_pi = T::lit(2.0) * T::PI();
                let prod = match patch {
                    Patch::Flat { lengths, .. } => local
                        .iter()
                        .zip(frequencies)
                        .zip(lengths)
                        .fold(T::one(), |acc, ((&s, &f), &l)| acc * (two_pi * f * s / l).cos()),
                    Patch::Circle { radius, .. } => (frequencies[0] * local[0] / *radius).cos(),
                };
                T::one() + *amplitude * prod
            }
        }
    }

    /// `∫ g dVol` over the patch.
    pub fn normalization(&self, patch: &Patch<T>) -> T {
        let vol = patch.volume();
        match (self, patch) {
            (Self::Uniform, _) => vol,
            (Self::CosineBump { .. }, Patch::Circle { .. }) => vol,
            (Self::CosineBump { amplitude, frequencies }, Patch::Flat { lengths, .. }) => {
                let bump = frequencies.iter().zip(lengths).fold(T::one(), |acc, (&f, &l)| {
                    acc * l * sinc(T::PI() * f)
                });
                vol + *amplitude * bump
            }
        }
    }

    /// Normalized density value, without range checks.
    pub fn value(&self, patch: &Patch<T>, local: &[T]) -> T {
        self.shape(patch, local) / self.normalization(patch)
    }

    /// `(lower, upper)` bounds of the normalized density.
    pub fn bounds(&self, patch: &Patch<T>) -> (T, T) {
        let z = self.normalization(patch);
        match self {
            Self::Uniform => (T::one() / z, T::one() / z),
            Self::CosineBump { amplitude, .. } => ((T::one() - *amplitude) / z, (T::one() + *amplitude) / z),
        }
    }

    /// Upper bound on the Lipschitz constant in local (arclength) coordinates.
    pub fn lipschitz(&self, patch: &Patch<T>) -> T {
        match self {
            Self::Uniform => T::zero(),
            Self::CosineBump { amplitude, frequencies } => {
                let z = self.normalization(patch);
                let two_pi = T::lit(2.0) * T::PI();
                let rate = match patch {
                    Patch::Flat { lengths, .. } => frequencies
                        .iter()
                        .zip(lengths)
                        .map(|(&f, &l)| (two_pi * f / l).powi(2))
                        .sum::<T>()
                        .sqrt(),
                    Patch::Circle { radius, .. } => frequencies[0].abs() / *radius,
                };
                *amplitude * rate / z
            }
        }
    }

    /// Gradient of the normalized density in local coordinates.
    pub fn gradient(&self, patch: &Patch<T>, local: &[T]) -> Vec<T> {
        let Self::CosineBump { amplitude, frequencies } = self else {
            return vec![T::zero(); local.len()];
        };
        let z = self.normalization(patch);
        let two_pi = T::lit(2.0) * T::PI();
        match patch {
            Patch::Flat { lengths, .. } => {
                let args: Vec<T> = local
                    .iter()
                    .zip(frequencies)
                    .zip(lengths)
                    .map(|((&s, &f), &l)| two_pi * f * s / l)
                    .collect();
                (0..local.len())
                    .map(|j| {
                        let mut g = -*amplitude * args[j].sin() * two_pi * frequencies[j] / lengths[j];
                        for (k, a) in args.iter().enumerate() {
                            if k != j {
                                g *= a.cos();
                            }
                        }
                        g / z
                    })
                    .collect()
            }
            Patch::Circle { radius, .. } => {
                let f = frequencies[0];
                vec![-*amplitude * (f * local[0] / *radius).sin() * f / *radius / z]
            }
        }
    }

    /// Largest value of the unnormalized profile, used as the rejection envelope.
    pub(crate) fn shape_max(&self) -> T {
        match self {
            Self::Uniform => T::one(),
            Self::CosineBump { amplitude, .. } => T::one() + *amplitude,
        }
    }

    pub(crate) fn shape_at(&self, patch: &Patch<T>, local: &[T]) -> T {
        self.shape(patch, local)
    }
}

fn sinc<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(1e-8) {
        T::one()
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_simpson;

    #[test]
    fn bump_on_segment_integrates_to_one() {
        let p = Patch::axis_box(1, vec![0.0], &[0], vec![1.3]).unwrap();
        let d = DensitySpec::CosineBump { amplitude: 0.4, frequencies: vec![0.7] };
        let total = adaptive_simpson(|s: f64| d.value(&p, &[s]), -0.65, 0.65, 1e-13);
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn circle_requires_integer_frequency() {
        let c = Patch::circle(vec![0.0, 0.0], 1.0, [vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let bad = DensitySpec::CosineBump { amplitude: 0.3, frequencies: vec![1.5] };
        assert!(bad.validate(&c).is_err());
        let good = DensitySpec::CosineBump { amplitude: 0.3, frequencies: vec![2.0] };
        assert!(good.validate(&c).is_ok());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = Patch::<f64>::axis_box(3, vec![0.0; 3], &[0, 1], vec![1.4, 1.0]).unwrap();
        let d = DensitySpec::CosineBump { amplitude: 0.5, frequencies: vec![1.0, 0.5] };
        let x = [0.21, -0.13];
        let g = d.gradient(&p, &x);
        let h = 1e-6;
        for j in 0..2 {
            let mut a = x;
            let mut b = x;
            a[j] += h;
            b[j] -= h;
            let fd = (d.value(&p, &a) - d.value(&p, &b)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-7, "{fd} vs {}", g[j]);
        }
    }
}
